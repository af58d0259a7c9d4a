//! Exhibits the h^2 floor under the L2 error.
//!
//! A fourth-order element pair would let the L2 error fall like h^4; this
//! element cannot do better than h^2 for generic smooth solutions. The
//! mechanism is the cross term a_h(w - I_h w, I_h w), whose leading part
//!
//!   sum over cells of (hy^2/3) |w_xxy|^2 + (hx^2/3) |w_xyy|^2
//!
//! is positive and of exact size h^2 whenever the mixed third derivatives
//! of the solution do not vanish. The tables below show err / h^2
//! stabilizing at a positive constant while cross/dominant tends to one.

use adini::diagnostics::{h1_lower_bound, lower_bound_ratio};
use adini::study::{run_study, StudyConfig};
use std::f64::consts::PI;

fn main() -> Result<(), adini::Error> {
    let config = StudyConfig {
        n0: 8,
        levels: 4,
        ..StudyConfig::default()
    };
    let report = run_study(&config)?;

    let errors: Vec<_> = report.details.iter().map(|d| d.errors).collect();
    println!(
        "{:>10} {:>14} {:>8} {:>14} {:>8}",
        "h", "err_L2/h^2", "order", "err_H1/h^2", "order"
    );
    let l2 = lower_bound_ratio(&errors);
    let h1 = h1_lower_bound(&errors);
    for (a, b) in l2.iter().zip(h1.iter()) {
        let fmt = |o: Option<f64>| o.map_or_else(|| format!("{:>8}", "-"), |v| format!("{v:8.3}"));
        println!(
            "{:>10.4e} {:>14.6} {} {:>14.6} {}",
            a.h,
            a.ratio,
            fmt(a.order),
            b.ratio,
            fmt(b.order)
        );
    }

    println!(
        "\n{:>10} {:>14} {:>14} {:>10}",
        "h", "cross", "dominant", "ratio"
    );
    for d in &report.details {
        println!(
            "{:>10.4e} {:>14.6e} {:>14.6e} {:>10.6}",
            d.h, d.expansion.cross, d.expansion.dominant, d.expansion.ratio
        );
    }
    let c = 2.0 * PI.powi(6) / 3.0;
    println!("\nfor this solution the dominant term is exactly (2 pi^6 / 3) h^2 = {c:.4} h^2");
    println!(
        "a vanishing L2/h^2 ratio would need cross/dominant to collapse; it tends to one instead"
    );
    Ok(())
}
