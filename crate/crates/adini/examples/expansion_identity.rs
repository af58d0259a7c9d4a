//! Demonstrates the two-term expansion of the interpolation error.
//!
//! On any cell, the Hessian product of the interpolation error of a
//! degree-four polynomial against any member of the shape space collapses
//! to two moments weighted by the squared half lengths of the cell:
//!
//!   integral of D^2(u - I u) : D^2 v
//!     = -(hy^2 / 3) integral of u_xxyy v_xx
//!       -(hx^2 / 3) integral of u_xxyy v_yy
//!
//! Nothing else survives: only the single mixed derivative u_xxyy enters,
//! and the mixed derivative of v never couples. The identity is checked on
//! random cells and random polynomials, then on the frozen closed-form
//! case u = xi^2 eta^2, v = xi^2, where both sides equal -32/3.

use adini::diagnostics::expansion_identity;
use adini::quadrature::gauss_rule_2d;
use adini::reference_element::{CellGeometry, LocalPoly12, LocalPolyP4, ReferenceBasis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), adini::Error> {
    let basis = ReferenceBasis::new()?;
    let rule = gauss_rule_2d(4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    println!(
        "{:>6} {:>14} {:>14} {:>10}",
        "trial", "lhs", "rhs", "residual"
    );
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let cell = CellGeometry::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
        );
        let mut u = LocalPolyP4::zero();
        for c in u.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let mut v = LocalPoly12::zero();
        for c in v.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
        let res = (lhs - rhs).abs() / (1.0 + lhs.abs());
        worst = worst.max(res);
        println!("{trial:>6} {lhs:>14.6e} {rhs:>14.6e} {res:>10.2e}");
    }
    println!("worst residual over 10 random trials: {worst:.2e}");

    let cell = CellGeometry::new(0.0, 0.0, 1.0, 1.0);
    let u = LocalPolyP4::monomial(2, 2);
    let mut v = LocalPoly12::zero();
    v.coeffs[3] = 1.0;
    let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
    println!("\nfrozen case u = xi^2 eta^2, v = xi^2 on the reference cell:");
    println!(
        "lhs = {lhs:.12}, rhs = {rhs:.12}, -32/3 = {:.12}",
        -32.0 / 3.0
    );
    Ok(())
}
