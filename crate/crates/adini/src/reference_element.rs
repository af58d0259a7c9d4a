//! Reference square, shape functions, and local interpolation operators.
//!
//! The element lives on the reference square `[-1, 1]^2`. Its shape space is
//! the twelve-dimensional span of all cubic monomials together with
//! `xi^3 eta` and `xi eta^3`, and its degrees of freedom are the value and
//! both first derivatives at the four corners. Physical cells are axis
//! aligned rectangles reached by a diagonal affine map, so reference
//! derivatives and physical derivatives differ only by powers of the half
//! side lengths.

use nalgebra::DMatrix;

use crate::analytic::AnalyticField;
use crate::error::Error;
use crate::quadrature::{integrate_on_cell, QuadRule2D};

/// Dimension of the local shape space.
pub const SHAPE_DIM: usize = 12;

/// Dimension of the space of polynomials of total degree at most four.
pub const P4_DIM: usize = 15;

/// Monomial exponents spanning the shape space: all of degree three and
/// below, plus `xi^3 eta` and `xi eta^3`.
pub const SHAPE_EXPONENTS: [(u32, u32); SHAPE_DIM] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (3, 1),
    (1, 3),
];

/// Monomial exponents of total degree at most four, in graded order.
pub const P4_EXPONENTS: [(u32, u32); P4_DIM] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

/// Corners of the reference square in counterclockwise order, starting at
/// the lower left.
pub const REF_VERTICES: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Falling factorial `n (n-1) ... (n-k+1)`, the coefficient picked up by
/// differentiating `t^n` exactly `k` times.
fn falling(n: u32, k: u32) -> f64 {
    let mut p = 1.0;
    for i in 0..k {
        p *= (n - i) as f64;
    }
    p
}

/// Value at `(xi, eta)` of the order `(a, b)` derivative of the monomial
/// `xi^i eta^j`.
fn monomial_deriv(i: u32, j: u32, xi: f64, eta: f64, a: u32, b: u32) -> f64 {
    if a > i || b > j {
        return 0.0;
    }
    falling(i, a) * falling(j, b) * xi.powi((i - a) as i32) * eta.powi((j - b) as i32)
}

/// Position of exponent `(i, j)` in [`P4_EXPONENTS`].
fn p4_index(i: u32, j: u32) -> Option<usize> {
    P4_EXPONENTS.iter().position(|&(a, b)| a == i && b == j)
}

/// Geometry of one axis-aligned rectangular cell.
///
/// `hx` and `hy` are half side lengths: the cell is
/// `[xc - hx, xc + hx] x [yc - hy, yc + hy]` and the map
/// `x = xc + hx xi`, `y = yc + hy eta` carries the reference square onto it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub xc: f64,
    pub yc: f64,
    pub hx: f64,
    pub hy: f64,
}

impl CellGeometry {
    pub fn new(xc: f64, yc: f64, hx: f64, hy: f64) -> Self {
        debug_assert!(hx > 0.0 && hy > 0.0, "half lengths must be positive");
        CellGeometry { xc, yc, hx, hy }
    }

    pub fn to_physical(&self, xi: f64, eta: f64) -> (f64, f64) {
        (self.xc + self.hx * xi, self.yc + self.hy * eta)
    }

    pub fn to_reference(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.xc) / self.hx, (y - self.yc) / self.hy)
    }

    pub fn area(&self) -> f64 {
        4.0 * self.hx * self.hy
    }

    /// Physical corners in the same counterclockwise order as
    /// [`REF_VERTICES`].
    pub fn vertices(&self) -> [(f64, f64); 4] {
        REF_VERTICES.map(|(xi, eta)| self.to_physical(xi, eta))
    }

    /// Conversion factor between a physical degree of freedom and the
    /// matching reference one: values carry weight one, while the two
    /// derivative slots absorb `hx` or `hy` through the chain rule.
    pub fn dof_scale(&self, local_dof: usize) -> f64 {
        match local_dof % 3 {
            0 => 1.0,
            1 => self.hx,
            _ => self.hy,
        }
    }
}

/// A member of the shape space with explicit monomial coefficients, ordered
/// as in [`SHAPE_EXPONENTS`].
#[derive(Clone, Copy, Debug)]
pub struct LocalPoly12 {
    pub coeffs: [f64; SHAPE_DIM],
}

impl LocalPoly12 {
    pub fn zero() -> Self {
        LocalPoly12 {
            coeffs: [0.0; SHAPE_DIM],
        }
    }

    /// Derivative of order `(a, b)` at a reference point.
    pub fn eval(&self, xi: f64, eta: f64, a: u32, b: u32) -> f64 {
        let mut s = 0.0;
        for (c, &(i, j)) in self.coeffs.iter().zip(SHAPE_EXPONENTS.iter()) {
            if *c != 0.0 {
                s += c * monomial_deriv(i, j, xi, eta, a, b);
            }
        }
        s
    }

    /// Embeds into the degree-four space, which contains the shape space.
    pub fn to_p4(&self) -> LocalPolyP4 {
        let mut p = LocalPolyP4::zero();
        for (c, &(i, j)) in self.coeffs.iter().zip(SHAPE_EXPONENTS.iter()) {
            p.coeffs[p4_index(i, j).expect("shape exponents lie in P4")] = *c;
        }
        p
    }
}

/// A polynomial of total degree at most four in reference coordinates,
/// ordered as in [`P4_EXPONENTS`].
#[derive(Clone, Copy, Debug)]
pub struct LocalPolyP4 {
    pub coeffs: [f64; P4_DIM],
}

impl LocalPolyP4 {
    pub fn zero() -> Self {
        LocalPolyP4 {
            coeffs: [0.0; P4_DIM],
        }
    }

    /// Polynomial with a single unit monomial `xi^i eta^j`.
    pub fn monomial(i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.coeffs[p4_index(i, j).expect("exponent of degree at most four")] = 1.0;
        p
    }

    /// Coefficient of `xi^i eta^j`, zero when the exponent lies outside the
    /// space.
    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        p4_index(i, j).map_or(0.0, |k| self.coeffs[k])
    }

    /// Derivative of order `(a, b)` at a reference point.
    pub fn eval(&self, xi: f64, eta: f64, a: u32, b: u32) -> f64 {
        let mut s = 0.0;
        for (c, &(i, j)) in self.coeffs.iter().zip(P4_EXPONENTS.iter()) {
            if *c != 0.0 {
                s += c * monomial_deriv(i, j, xi, eta, a, b);
            }
        }
        s
    }

    /// Derivative of order `(a, b)` in coefficient space; differentiation
    /// only lowers degrees, so the result stays in the space.
    pub fn derivative(&self, a: u32, b: u32) -> LocalPolyP4 {
        let mut out = LocalPolyP4::zero();
        for (c, &(i, j)) in self.coeffs.iter().zip(P4_EXPONENTS.iter()) {
            if *c != 0.0 && i >= a && j >= b {
                let k = p4_index(i - a, j - b).expect("derivative exponent stays in P4");
                out.coeffs[k] += c * falling(i, a) * falling(j, b);
            }
        }
        out
    }

    /// Mean value over the reference square. The mean of `xi^p eta^q` is
    /// `1 / ((p+1)(q+1))` when both exponents are even and zero otherwise.
    pub fn average(&self) -> f64 {
        let mut s = 0.0;
        for (c, &(i, j)) in self.coeffs.iter().zip(P4_EXPONENTS.iter()) {
            if *c != 0.0 && i % 2 == 0 && j % 2 == 0 {
                s += c / (((i + 1) * (j + 1)) as f64);
            }
        }
        s
    }

    pub fn scale(&self, s: f64) -> LocalPolyP4 {
        let mut out = *self;
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn sub(&self, other: &LocalPolyP4) -> LocalPolyP4 {
        let mut out = *self;
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c -= o;
        }
        out
    }
}

/// The twelve nodal shape functions on the reference square.
///
/// Shape function `3 v + c` is the unique member of the shape space whose
/// degree of freedom `c` (value, xi derivative, eta derivative) at corner
/// `v` equals one while the other eleven degrees of freedom vanish.
pub struct ReferenceBasis {
    /// `coeffs[k][j]` multiplies monomial `j` in shape function `k`.
    coeffs: [[f64; SHAPE_DIM]; SHAPE_DIM],
}

impl ReferenceBasis {
    /// Builds the nodal basis by inverting the corner degree-of-freedom
    /// matrix of the monomial basis.
    pub fn new() -> Result<Self, Error> {
        let d = dof_matrix();
        let dinv = d
            .try_inverse()
            .ok_or_else(|| Error::Internal("corner degree-of-freedom matrix is singular".into()))?;
        // Row k of the inverse transpose lists the monomial coefficients of
        // the shape function dual to degree of freedom k.
        let c = dinv.transpose();
        let mut coeffs = [[0.0; SHAPE_DIM]; SHAPE_DIM];
        for (k, row) in coeffs.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = c[(k, j)];
            }
        }
        Ok(ReferenceBasis { coeffs })
    }

    /// Shape function `k` as an explicit polynomial.
    pub fn shape(&self, k: usize) -> LocalPoly12 {
        LocalPoly12 {
            coeffs: self.coeffs[k],
        }
    }

    /// Derivative of order `(a, b)` of shape function `k` at `(xi, eta)`.
    pub fn eval_shape(&self, k: usize, xi: f64, eta: f64, a: u32, b: u32) -> f64 {
        self.shape(k).eval(xi, eta, a, b)
    }

    /// Linear combination of shape functions with the given reference
    /// degrees of freedom.
    pub fn from_dofs(&self, dofs: &[f64; SHAPE_DIM]) -> LocalPoly12 {
        let mut out = LocalPoly12::zero();
        for (d, row) in dofs.iter().zip(self.coeffs.iter()) {
            if *d != 0.0 {
                for (acc, c) in out.coeffs.iter_mut().zip(row.iter()) {
                    *acc += d * c;
                }
            }
        }
        out
    }
}

/// Corner degree-of-freedom matrix: entry `(i, j)` applies degree of freedom
/// `i` to monomial `j`.
fn dof_matrix() -> DMatrix<f64> {
    let mut d = DMatrix::zeros(SHAPE_DIM, SHAPE_DIM);
    for (v, &(xi, eta)) in REF_VERTICES.iter().enumerate() {
        for (j, &(mi, mj)) in SHAPE_EXPONENTS.iter().enumerate() {
            d[(3 * v, j)] = monomial_deriv(mi, mj, xi, eta, 0, 0);
            d[(3 * v + 1, j)] = monomial_deriv(mi, mj, xi, eta, 1, 0);
            d[(3 * v + 2, j)] = monomial_deriv(mi, mj, xi, eta, 0, 1);
        }
    }
    d
}

/// Corner interpolation of a smooth field onto one cell.
///
/// Returns the member of the shape space, written in the cell's reference
/// coordinates, that matches the field's value and both physical first
/// derivatives at the four corners. The derivative degrees of freedom absorb
/// the half lengths through the chain rule.
pub fn interpolate_field(
    basis: &ReferenceBasis,
    v: &AnalyticField,
    cell: &CellGeometry,
) -> Result<LocalPoly12, Error> {
    v.require_order(1)?;
    let mut dofs = [0.0; SHAPE_DIM];
    for (k, (x, y)) in cell.vertices().into_iter().enumerate() {
        dofs[3 * k] = v.eval(x, y, 0, 0)?;
        dofs[3 * k + 1] = cell.hx * v.eval(x, y, 1, 0)?;
        dofs[3 * k + 2] = cell.hy * v.eval(x, y, 0, 1)?;
    }
    Ok(basis.from_dofs(&dofs))
}

/// Corner interpolation of a polynomial already written in reference
/// coordinates. No geometry enters because the degrees of freedom are read
/// directly at the reference corners.
pub fn interpolate_ref_poly(basis: &ReferenceBasis, p: &LocalPolyP4) -> LocalPoly12 {
    let mut dofs = [0.0; SHAPE_DIM];
    for (k, &(xi, eta)) in REF_VERTICES.iter().enumerate() {
        dofs[3 * k] = p.eval(xi, eta, 0, 0);
        dofs[3 * k + 1] = p.eval(xi, eta, 1, 0);
        dofs[3 * k + 2] = p.eval(xi, eta, 0, 1);
    }
    basis.from_dofs(&dofs)
}

/// Moment projection of a smooth field onto polynomials of degree at most
/// four on one cell: the projection matches the cell average of every mixed
/// derivative of total order zero through four.
///
/// In cell-centered reference coordinates the moment system is triangular.
/// Stepping down through derivative orders 4, 3, 2, 1, 0, the equation for
/// order `(a, b)` involves only the already fixed higher-order coefficients
/// and the single unknown multiplying `xi^a eta^b`, because same-order
/// monomials lose a whole variable under the derivative and average to zero
/// on the symmetric square.
pub fn p4_project(
    v: &AnalyticField,
    cell: &CellGeometry,
    rule: &QuadRule2D,
) -> Result<LocalPolyP4, Error> {
    v.require_order(4)?;
    let mut p = LocalPolyP4::zero();
    let area = cell.area();
    for order in (0..=4u32).rev() {
        for a in (0..=order).rev() {
            let b = order - a;
            let dv = v.deriv_fn(a, b)?;
            let phys_avg = integrate_on_cell(rule, cell, &dv) / area;
            let ref_avg = phys_avg * cell.hx.powi(a as i32) * cell.hy.powi(b as i32);
            let known = p.derivative(a, b).average();
            let k = p4_index(a, b).expect("projection exponent lies in P4");
            p.coeffs[k] = (ref_avg - known) / (falling(a, a) * falling(b, b));
        }
    }
    Ok(p)
}

/// Wraps a reference-coordinate polynomial on one cell as an analytic field
/// in physical coordinates, converting derivatives through the chain rule.
pub fn field_from_ref_poly(p: LocalPolyP4, cell: CellGeometry) -> AnalyticField {
    AnalyticField::from_fn(
        "ref-poly",
        cell.xc + cell.hx,
        cell.yc + cell.hy,
        4,
        move |x, y, a, b| {
            let (xi, eta) = cell.to_reference(x, y);
            p.eval(xi, eta, a, b) / (cell.hx.powi(a as i32) * cell.hy.powi(b as i32))
        },
    )
}
