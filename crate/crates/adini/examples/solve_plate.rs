//! Solves one clamped plate problem and inspects the solution.
//!
//! Assembles the discrete biharmonic system for a manufactured load on a
//! 16 x 16 mesh, factors it, and compares the computed deflection with the
//! exact solution at a few points.

use adini::analytic::{biharmonic_rhs, solution_sine2};
use adini::assembly::{assemble, cholesky_solve_with_stats};
use adini::mesh::{build_dofmap, build_mesh, eval_discrete};
use adini::reference_element::ReferenceBasis;

fn main() -> Result<(), adini::Error> {
    let w = solution_sine2(1.0, 1.0);
    let f = biharmonic_rhs(&w)?;
    let mesh = build_mesh(1.0, 1.0, 16, 16)?;
    let dofmap = build_dofmap(&mesh);
    let basis = ReferenceBasis::new()?;

    let system = assemble(&mesh, &dofmap, &f)?;
    let (w_h, stats) = cholesky_solve_with_stats(&system)?;
    println!(
        "{} unknowns, bandwidth {}, smallest pivot {:.3e}, residual {:.2e}",
        system.matrix.n(),
        system.matrix.bandwidth(),
        stats.min_pivot,
        stats.rel_residual
    );

    println!(
        "\n{:>14} {:>12} {:>12} {:>10}",
        "point", "computed", "exact", "error"
    );
    for &(x, y) in &[(0.5, 0.5), (0.25, 0.25), (0.125, 0.75), (0.75, 0.375)] {
        let (c, xi, eta) = mesh.locate(x, y);
        let got = eval_discrete(&w_h, &mesh, &dofmap, &basis, c, xi, eta, 0, 0)?;
        let want = w.value(x, y);
        println!(
            "({:>5}, {:>5}) {:>12.6} {:>12.6} {:>10.2e}",
            x,
            y,
            got,
            want,
            (got - want).abs()
        );
    }
    Ok(())
}
