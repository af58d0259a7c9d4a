//! Convergence studies over a sequence of refined meshes.
//!
//! A study solves the clamped plate problem for one manufactured solution
//! on meshes `n0, 2 n0, 4 n0, ...`, measures error norms and the
//! decomposition diagnostics on every level, and reports them as rows that
//! can be printed as a table or written as CSV.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::analytic::{biharmonic_rhs, solution_by_name, solution_names, AnalyticField};
use crate::assembly::{assemble, cg_solve, cholesky_solve_with_stats};
use crate::diagnostics::{
    consistency_error, cross_term, error_report, identity_check, ErrorReport, ExpansionReport,
    IdentityReport,
};
use crate::error::Error;
use crate::mesh::{build_dofmap, build_mesh, interpolate_global};
use crate::quadrature::gauss_rule_2d;
use crate::reference_element::ReferenceBasis;

/// Relative residual the computed solution must reach in the assembled
/// system, whichever solver produced it.
pub const GALERKIN_RESIDUAL_TOL: f64 = 1e-9;

/// Conjugate gradients certifies exactly the residual the study accepts;
/// asking for more runs into the floating-point floor of the fourth-order
/// systems on fine meshes.
const CG_TOL: f64 = GALERKIN_RESIDUAL_TOL;
const CG_MAX_ITER: usize = 500_000;

/// Linear solver used for the discrete systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    /// Banded Cholesky factorization; the default.
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients; useful as an independent
    /// cross-check of the factorization. The attainable true residual of
    /// the iteration grows with the condition number of the fourth-order
    /// systems, so very fine meshes may fail to certify and should use the
    /// direct solver.
    Cg,
}

impl SolverChoice {
    pub fn parse(name: &str) -> Option<SolverChoice> {
        match name {
            "cholesky" => Some(SolverChoice::Cholesky),
            "cg" => Some(SolverChoice::Cg),
            _ => None,
        }
    }
}

/// Parameters of a convergence study.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    /// Name of the manufactured solution; see
    /// [`crate::analytic::solution_names`].
    pub solution: String,
    /// Cells per direction on the coarsest mesh.
    pub n0: usize,
    /// Number of meshes; each level doubles `n`.
    pub levels: usize,
    /// Domain side lengths.
    pub lx: f64,
    pub ly: f64,
    pub solver: SolverChoice,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n0 < 2 {
            return Err(Error::InvalidArgument(format!(
                "n0 = {} is below the minimum of 2 (a 1x1 mesh has no free nodes)",
                self.n0
            )));
        }
        if self.levels < 1 || self.levels > 6 {
            return Err(Error::InvalidArgument(format!(
                "levels = {} outside the supported range 1..=6",
                self.levels
            )));
        }
        if !(self.lx > 0.0 && self.ly > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "domain sides must be positive, got {} x {}",
                self.lx, self.ly
            )));
        }
        if solution_by_name(&self.solution, self.lx, self.ly).is_none() {
            return Err(Error::InvalidArgument(format!(
                "unknown solution '{}'; available: {}",
                self.solution,
                solution_names().join(", ")
            )));
        }
        Ok(())
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            solution: "sine2".to_string(),
            n0: 4,
            levels: 4,
            lx: 1.0,
            ly: 1.0,
            solver: SolverChoice::Cholesky,
        }
    }
}

/// One CSV row of a study.
#[derive(Clone, Copy, Debug)]
pub struct StudyRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub n_free: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub err_energy: f64,
    /// Observed orders against the previous level; empty on the first.
    pub order_l2: Option<f64>,
    pub order_h1: Option<f64>,
    pub order_energy: Option<f64>,
    pub ratio_l2_over_h2: f64,
    pub cross_term: f64,
    pub dominant_term: f64,
    /// `|a_h(w, I_h w) - (f, I_h w)|` scaled by `h^2` times the broken
    /// energy seminorm of the interpolant: the measured consistency
    /// constant.
    pub consistency_over_h2: f64,
    pub identity_residual: f64,
}

/// Everything measured on one level, for consumers that need more than the
/// CSV columns.
#[derive(Clone, Copy, Debug)]
pub struct LevelDetail {
    pub n: usize,
    pub h: f64,
    pub n_free: usize,
    pub errors: ErrorReport,
    pub expansion: ExpansionReport,
    pub identity: IdentityReport,
    /// Signed consistency functional at the interpolant.
    pub consistency: f64,
    pub consistency_over_h2: f64,
    /// Relative residual of the solution in the assembled system.
    pub galerkin_residual: f64,
    /// Smallest Cholesky pivot; present for the direct solver.
    pub min_pivot: Option<f64>,
    /// Iteration count; present for the conjugate-gradient solver.
    pub cg_iterations: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub details: Vec<LevelDetail>,
}

/// Runs a convergence study.
///
/// Every level is also a correctness gate: the factorization must report
/// positive pivots, the solution must satisfy the assembled system to
/// [`GALERKIN_RESIDUAL_TOL`], the error-decomposition identity must close,
/// and the cross term must be positive. Any violation aborts the study with
/// the corresponding error.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport, Error> {
    config.validate()?;
    let w = solution_by_name(&config.solution, config.lx, config.ly).expect("validated above");
    let f = biharmonic_rhs(&w)?;
    let basis = ReferenceBasis::new()?;
    let rule = gauss_rule_2d(6)?;
    let zero = AnalyticField::from_fn("zero", config.lx, config.ly, 4, |_, _, _, _| 0.0);

    let mut details = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        let n = config.n0 << level;
        let mesh = build_mesh(config.lx, config.ly, n, n)?;
        let dofmap = build_dofmap(&mesh);
        let system = assemble(&mesh, &dofmap, &f)?;

        let (w_h, min_pivot, cg_iterations) = match config.solver {
            SolverChoice::Cholesky => {
                let (w_h, stats) = cholesky_solve_with_stats(&system)?;
                (w_h, Some(stats.min_pivot), None)
            }
            SolverChoice::Cg => {
                let (w_h, stats) = cg_solve(&system, CG_TOL, CG_MAX_ITER)?;
                (w_h, None, Some(stats.iterations))
            }
        };
        let galerkin_residual = system.rel_residual(&w_h);
        if galerkin_residual > GALERKIN_RESIDUAL_TOL {
            return Err(Error::Internal(format!(
                "level {level}: solution residual {galerkin_residual:.3e} \
                 exceeds {GALERKIN_RESIDUAL_TOL:.1e}"
            )));
        }
        log::info!(
            "level {level}: n = {n}, {} unknowns, residual {galerkin_residual:.2e}",
            dofmap.n_free()
        );

        let errors = error_report(&w, &w_h, &mesh, &dofmap, &basis, &rule)?;
        let expansion = cross_term(&w, &mesh, &basis, &rule)?;
        if expansion.cross <= 0.0 {
            return Err(Error::DegenerateSolution(format!(
                "level {level}: cross term {:.3e} is not positive",
                expansion.cross
            )));
        }
        let identity = identity_check(&w, &f, &w_h, &mesh, &dofmap, &basis, &rule)?;

        let pi_w = interpolate_global(&w, &mesh, &dofmap)?;
        let consistency = consistency_error(&w, &f, &pi_w, &mesh, &dofmap, &basis, &rule)?;
        let pi_energy =
            crate::diagnostics::broken_norm(&zero, &pi_w, &mesh, &dofmap, &basis, 2, &rule)?;
        if pi_energy == 0.0 {
            return Err(Error::DegenerateSolution(format!(
                "level {level}: interpolant of '{}' has zero energy",
                w.name()
            )));
        }
        let h = mesh.h();
        details.push(LevelDetail {
            n,
            h,
            n_free: dofmap.n_free(),
            errors,
            expansion,
            identity,
            consistency,
            consistency_over_h2: consistency.abs() / (h * h * pi_energy),
            galerkin_residual,
            min_pivot,
            cg_iterations,
        });
    }

    let rows = rows_from_details(&details);
    Ok(StudyReport { rows, details })
}

fn observed_order(prev: (f64, f64), curr: (f64, f64)) -> Option<f64> {
    let ((hp, ep), (h, e)) = (prev, curr);
    (ep > 0.0 && e > 0.0 && hp != h).then(|| (ep / e).ln() / (hp / h).ln())
}

fn rows_from_details(details: &[LevelDetail]) -> Vec<StudyRow> {
    details
        .iter()
        .enumerate()
        .map(|(level, d)| {
            let orders = (level > 0).then(|| {
                let p = &details[level - 1];
                (
                    observed_order((p.h, p.errors.err_l2), (d.h, d.errors.err_l2)),
                    observed_order((p.h, p.errors.err_h1), (d.h, d.errors.err_h1)),
                    observed_order((p.h, p.errors.err_energy), (d.h, d.errors.err_energy)),
                )
            });
            let (order_l2, order_h1, order_energy) = orders.unwrap_or((None, None, None));
            StudyRow {
                level,
                n: d.n,
                h: d.h,
                n_free: d.n_free,
                err_l2: d.errors.err_l2,
                err_h1: d.errors.err_h1,
                err_energy: d.errors.err_energy,
                order_l2,
                order_h1,
                order_energy,
                ratio_l2_over_h2: d.errors.err_l2 / (d.h * d.h),
                cross_term: d.expansion.cross,
                dominant_term: d.expansion.dominant,
                consistency_over_h2: d.consistency_over_h2,
                identity_residual: d.identity.residual,
            }
        })
        .collect()
}

/// Exact column set of the study CSV.
pub const CSV_HEADER: &str = "level,n,h,n_free,err_L2,err_H1,err_energy,order_L2,order_H1,\
order_energy,ratio_L2_over_h2,cross_term,dominant_term,consistency_over_h2,identity_residual";

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v:.16e}");
    }
}

/// Renders rows as CSV with a fixed header, full-precision floats, and LF
/// line endings; identical inputs produce byte-identical output.
pub fn csv_string(rows: &[StudyRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},",
            r.level, r.n, r.h, r.n_free, r.err_l2, r.err_h1, r.err_energy
        );
        push_opt(&mut out, r.order_l2);
        out.push(',');
        push_opt(&mut out, r.order_h1);
        out.push(',');
        push_opt(&mut out, r.order_energy);
        let _ = writeln!(
            out,
            ",{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.ratio_l2_over_h2,
            r.cross_term,
            r.dominant_term,
            r.consistency_over_h2,
            r.identity_residual
        );
    }
    out
}

/// Writes [`csv_string`] to a file.
pub fn write_csv(path: &Path, rows: &[StudyRow]) -> io::Result<()> {
    fs::write(path, csv_string(rows))
}

fn fmt_order(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:6.3}"),
        None => format!("{:>6}", "-"),
    }
}

/// Renders rows as an aligned human-readable table.
pub fn format_table(rows: &[StudyRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>6} {:>10} {:>8} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6} {:>10} {:>10} {:>10}",
        "level",
        "n",
        "h",
        "n_free",
        "err_L2",
        "order",
        "err_H1",
        "order",
        "err_energy",
        "order",
        "L2/h^2",
        "cross/dom",
        "id_resid"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>5} {:>6} {:>10.4e} {:>8} {:>12.4e} {} {:>12.4e} {} {:>12.4e} {} {:>10.4e} {:>10.6} {:>10.2e}",
            r.level,
            r.n,
            r.h,
            r.n_free,
            r.err_l2,
            fmt_order(r.order_l2),
            r.err_h1,
            fmt_order(r.order_h1),
            r.err_energy,
            fmt_order(r.order_energy),
            r.ratio_l2_over_h2,
            r.cross_term / r.dominant_term,
            r.identity_residual
        );
    }
    out
}
