//! Shows the degree-four moment projection and its commuting property.
//!
//! The projection of a smooth field onto degree-four polynomials matches
//! the cell averages of every derivative up to order four. In particular
//! each (constant) fourth derivative of the projection equals the cell
//! average of the corresponding analytic fourth derivative, which is what
//! makes the projection the right intermediary between a smooth solution
//! and the element's interpolation operator.

use adini::analytic::{solution_sine2, AnalyticField};
use adini::diagnostics::commuting_residual;
use adini::mesh::build_mesh;
use adini::quadrature::{gauss_rule_2d, integrate_on_cell};
use adini::reference_element::{p4_project, CellGeometry, P4_EXPONENTS};

fn main() -> Result<(), adini::Error> {
    let rule = gauss_rule_2d(6)?;

    // The projection of x^5 onto degree four on the reference cell.
    let x5 = AnalyticField::from_fn("x^5", 1.0, 1.0, 6, |x, _, a, b| {
        if b > 0 || a > 5 {
            0.0
        } else {
            (5 - a + 1..=5).map(|v| v as f64).product::<f64>() * x.powi(5 - a as i32)
        }
    });
    let cell = CellGeometry::new(0.0, 0.0, 1.0, 1.0);
    let p = p4_project(&x5, &cell, &rule)?;
    println!("projection of x^5 onto degree four, reference cell:");
    for (k, &(i, j)) in P4_EXPONENTS.iter().enumerate() {
        if p.coeffs[k].abs() > 1e-12 {
            println!("  {:+.6} x^{i} y^{j}", p.coeffs[k]);
        }
    }
    println!("  closed form: (10/3) x^3 - (7/3) x\n");

    // Fourth derivatives of the projection match cell averages.
    let w = solution_sine2(1.0, 1.0);
    let cell = CellGeometry::new(0.3, 0.6, 0.1, 0.15);
    let p = p4_project(&w, &cell, &rule)?;
    println!("fourth derivatives on the cell centered at (0.3, 0.6):");
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "deriv", "projection", "cell avg", "diff"
    );
    for a in 0..=4u32 {
        let b = 4 - a;
        let dw = w.deriv_fn(a, b)?;
        let avg = integrate_on_cell(&rule, &cell, &dw) / cell.area();
        let proj = p.eval(0.0, 0.0, a, b) / (cell.hx.powi(a as i32) * cell.hy.powi(b as i32));
        println!(
            "  w_x{a}y{b} {proj:>14.6e} {avg:>14.6e} {:>10.2e}",
            (proj - avg).abs()
        );
    }

    let mesh = build_mesh(1.0, 1.0, 8, 8)?;
    let worst = commuting_residual(&w, &mesh, &rule)?;
    println!("\nworst relative mismatch over an 8x8 mesh: {worst:.2e}");
    Ok(())
}
