//! Plate-bending finite element laboratory for the Adini rectangle.
//!
//! The Adini element discretizes the clamped biharmonic (Kirchhoff plate)
//! problem on uniform rectangular meshes with twelve degrees of freedom per
//! cell: deflection and both slopes at each corner. The element is
//! nonconforming, and this crate exists to measure the consequences:
//! besides assembling and solving the plate problem, it computes the broken
//! error norms, the interpolation-error expansion on each cell, the
//! consistency functional, and the term-by-term error decomposition that
//! together show the L2 error of the method is bounded below by a positive
//! multiple of h^2, so the method does not superconverge.
//!
//! Entry points:
//! - [`study::run_study`] runs a full convergence study and yields CSV rows.
//! - [`verify`] hosts the seeded verification suites behind the CLI.
//! - The `examples/` directory exercises each capability in isolation.

pub mod analytic;
pub mod assembly;
pub mod band;
pub mod diagnostics;
pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod reference_element;
pub mod study;
pub mod verify;

pub use error::Error;
