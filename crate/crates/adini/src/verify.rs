//! Seeded randomized verification suites.
//!
//! Each suite stress-tests one layer of the discretization with
//! reproducible random inputs and reports the worst residual it saw. The
//! suites are the runtime counterpart of the unit tests: the same
//! invariants, but with caller-chosen seed and trial count, so a failure
//! can be replayed exactly.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{biharmonic_rhs, solution_sine2, AnalyticField};
use crate::assembly::{assemble, cholesky_solve};
use crate::diagnostics::{commuting_residual, expansion_identity, identity_check};
use crate::error::Error;
use crate::mesh::{build_dofmap, build_mesh};
use crate::quadrature::{gauss_rule_1d, gauss_rule_2d, integrate_on_cell, tensor_rule};
use crate::reference_element::{
    field_from_ref_poly, interpolate_field, interpolate_ref_poly, p4_project, CellGeometry,
    LocalPoly12, LocalPolyP4, ReferenceBasis, P4_EXPONENTS, REF_VERTICES, SHAPE_DIM,
};
use crate::study::{run_study, StudyConfig};

/// Expected monomial image: exponent pairs with their coefficients.
type MonomialImage = Vec<((u32, u32), f64)>;

/// Outcome of one invariant within a suite.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    /// Worst residual observed over all trials.
    pub worst: f64,
    /// Threshold the residual was held to. For negative controls (checks
    /// named `... rejected`) the residual must exceed the threshold
    /// instead.
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Names accepted by [`run_suite`].
pub fn suite_names() -> &'static [&'static str] {
    &[
        "basis",
        "interp",
        "expansion",
        "commuting",
        "identity",
        "quadrature",
    ]
}

/// Runs one named suite with the given seed and trial count.
pub fn run_suite(name: &str, seed: u64, trials: usize) -> Result<SuiteReport, Error> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "trials must be at least 1".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match name {
        "basis" => basis_suite(&mut rng, trials)?,
        "interp" => interp_suite(&mut rng, trials)?,
        "expansion" => expansion_suite(&mut rng, trials)?,
        "commuting" => commuting_suite(&mut rng, trials)?,
        "identity" => identity_suite(&mut rng)?,
        "quadrature" => quadrature_suite(&mut rng, trials)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite '{name}'; available: {}",
                suite_names().join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        trials,
        checks,
    })
}

/// Renders a suite report as the lines the command-line tool prints.
pub fn format_suite_report(report: &SuiteReport) -> String {
    let mut out = format!(
        "suite '{}': {} checks, seed {}, {} trials\n",
        report.suite,
        report.checks.len(),
        report.seed,
        report.trials
    );
    for c in &report.checks {
        out.push_str(&format!(
            "  {}  {:<42} worst {:9.3e}  tol {:7.1e}\n",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.worst,
            c.tol
        ));
    }
    out.push_str(&format!(
        "result: {}\n",
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    out
}

fn check(name: &str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        worst,
        tol,
        passed: worst <= tol,
    }
}

fn random_cell(rng: &mut ChaCha8Rng) -> CellGeometry {
    CellGeometry::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(0.1..2.0),
        rng.gen_range(0.1..2.0),
    )
}

fn random_p4(rng: &mut ChaCha8Rng) -> LocalPolyP4 {
    let mut p = LocalPolyP4::zero();
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

fn random_shape(rng: &mut ChaCha8Rng) -> LocalPoly12 {
    let mut p = LocalPoly12::zero();
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

/// Polynomial in physical coordinates as an analytic field, for feeding
/// interpolation with something it must reproduce exactly.
fn poly_field(name: &str, terms: Vec<(u32, u32, f64)>) -> AnalyticField {
    AnalyticField::from_fn(name, 1.0, 1.0, 6, move |x, y, a, b| {
        let falling = |n: u32, k: u32| -> f64 {
            if k > n {
                0.0
            } else {
                (n - k + 1..=n).map(|v| v as f64).product()
            }
        };
        terms
            .iter()
            .map(|&(i, j, c)| {
                if a > i || b > j {
                    0.0
                } else {
                    c * falling(i, a)
                        * falling(j, b)
                        * x.powi((i - a) as i32)
                        * y.powi((j - b) as i32)
                }
            })
            .sum()
    })
}

fn basis_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckResult>, Error> {
    let basis = ReferenceBasis::new()?;
    let mut checks = Vec::new();

    // Each shape function carries exactly one unit nodal value or
    // derivative.
    let mut worst: f64 = 0.0;
    for k in 0..SHAPE_DIM {
        let shape = basis.shape(k);
        for (v, &(xi, eta)) in REF_VERTICES.iter().enumerate() {
            for d in 0..3 {
                let (a, b) = [(0, 0), (1, 0), (0, 1)][d];
                let got = shape.eval(xi, eta, a, b);
                let want = if 3 * v + d == k { 1.0 } else { 0.0 };
                worst = worst.max((got - want).abs());
            }
        }
    }
    checks.push(check("nodal duality of the shape functions", worst, 1e-12));

    // A random member of the shape space is recovered from its own nodal
    // data, coefficient for coefficient.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = random_shape(rng);
        let mut dofs = [0.0; SHAPE_DIM];
        for (v, &(xi, eta)) in REF_VERTICES.iter().enumerate() {
            dofs[3 * v] = p.eval(xi, eta, 0, 0);
            dofs[3 * v + 1] = p.eval(xi, eta, 1, 0);
            dofs[3 * v + 2] = p.eval(xi, eta, 0, 1);
        }
        let q = basis.from_dofs(&dofs);
        for (a, b) in p.coeffs.iter().zip(q.coeffs.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(check("shape space recovered from nodal data", worst, 1e-11));

    // Random physical cubics interpolate exactly on random cells.
    let probe = gauss_rule_2d(3)?;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cell = random_cell(rng);
        let mut terms = Vec::new();
        for i in 0..=3u32 {
            for j in 0..=(3 - i) {
                terms.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
        let w = poly_field("cubic", terms);
        let p = interpolate_field(&basis, &w, &cell)?;
        for &(xi, eta) in probe.points() {
            let (x, y) = cell.to_physical(xi, eta);
            worst = worst.max((p.eval(xi, eta, 0, 0) - w.value(x, y)).abs());
        }
    }
    checks.push(check("cubics reproduced on physical cells", worst, 1e-10));

    Ok(checks)
}

fn interp_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckResult>, Error> {
    let basis = ReferenceBasis::new()?;
    let mut checks = Vec::new();

    // Degree-three polynomials are fixed points of interpolation.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut p = random_p4(rng);
        for (k, &(i, j)) in P4_EXPONENTS.iter().enumerate() {
            if i + j == 4 {
                p.coeffs[k] = 0.0;
            }
        }
        let q = interpolate_ref_poly(&basis, &p).to_p4();
        for (a, b) in p.coeffs.iter().zip(q.coeffs.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(check("degree-three fixed points", worst, 1e-11));

    // The three quartic monomials outside the shape space map to their
    // known images.
    let mut worst: f64 = 0.0;
    let cases: [(LocalPolyP4, MonomialImage); 3] = [
        (
            LocalPolyP4::monomial(4, 0),
            vec![((2, 0), 2.0), ((0, 0), -1.0)],
        ),
        (
            LocalPolyP4::monomial(0, 4),
            vec![((0, 2), 2.0), ((0, 0), -1.0)],
        ),
        (
            LocalPolyP4::monomial(2, 2),
            vec![((2, 0), 1.0), ((0, 2), 1.0), ((0, 0), -1.0)],
        ),
    ];
    for (u, image) in &cases {
        let got = interpolate_ref_poly(&basis, u).to_p4();
        for (k, &(i, j)) in P4_EXPONENTS.iter().enumerate() {
            let want = image
                .iter()
                .find(|((a, b), _)| (*a, *b) == (i, j))
                .map_or(0.0, |&(_, c)| c);
            worst = worst.max((got.coeffs[k] - want).abs());
        }
    }
    checks.push(check("quartic monomial images", worst, 1e-12));

    // Interpolation of any quartic agrees with it at the corners, in value
    // and both derivatives.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_p4(rng);
        let q = interpolate_ref_poly(&basis, &u);
        for &(xi, eta) in REF_VERTICES.iter() {
            for (a, b) in [(0, 0), (1, 0), (0, 1)] {
                worst = worst.max((u.eval(xi, eta, a, b) - q.eval(xi, eta, a, b)).abs());
            }
        }
    }
    checks.push(check("nodal exactness on quartics", worst, 1e-11));

    Ok(checks)
}

fn expansion_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckResult>, Error> {
    let basis = ReferenceBasis::new()?;
    let rule = gauss_rule_2d(4)?;
    let mut checks = Vec::new();

    // Frozen closed form on the reference cell.
    let cell = CellGeometry::new(0.0, 0.0, 1.0, 1.0);
    let u = LocalPolyP4::monomial(2, 2);
    let mut v = LocalPoly12::zero();
    v.coeffs[3] = 1.0;
    let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
    let want = -32.0 / 3.0;
    let worst = (lhs - want).abs().max((rhs - want).abs());
    checks.push(check(
        "closed form -32/3 on the reference cell",
        worst,
        1e-12,
    ));

    // The identity holds for random quartics, shape members, and cells.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cell = random_cell(rng);
        let u = random_p4(rng);
        let v = random_shape(rng);
        let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    checks.push(check("two-term expansion on random cells", worst, 1e-11));

    // The mixed second derivative of the interpolation error never couples.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cell = random_cell(rng);
        let u = random_p4(rng);
        let v = random_shape(rng);
        let err = u.sub(&interpolate_ref_poly(&basis, &u).to_p4());
        let inv_xy = 1.0 / (cell.hx * cell.hy);
        let mut acc = 0.0;
        for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
            acc += qw * err.eval(xi, eta, 1, 1) * v.eval(xi, eta, 1, 1) * inv_xy * inv_xy;
        }
        worst = worst.max((acc * cell.hx * cell.hy).abs());
    }
    checks.push(check("mixed-derivative term vanishes", worst, 1e-12));

    Ok(checks)
}

fn commuting_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckResult>, Error> {
    let rule = gauss_rule_2d(6)?;
    let mut checks = Vec::new();

    // The projection reproduces random degree-four polynomials on random
    // cells.
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cell = random_cell(rng);
        let p = random_p4(rng);
        let w = field_from_ref_poly(p, cell);
        let q = p4_project(&w, &cell, &rule)?;
        for (a, b) in p.coeffs.iter().zip(q.coeffs.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(check("degree-four fields reproduced", worst, 1e-10));

    // On random cells, every fourth derivative of the projection equals the
    // cell average of the analytic fourth derivative.
    let w = solution_sine2(1.0, 1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let cell = CellGeometry::new(
            rng.gen_range(0.2..0.8),
            rng.gen_range(0.2..0.8),
            rng.gen_range(0.05..0.2),
            rng.gen_range(0.05..0.2),
        );
        let p = p4_project(&w, &cell, &rule)?;
        for a in 0..=4u32 {
            let b = 4 - a;
            let dw = w.deriv_fn(a, b)?;
            let avg = integrate_on_cell(&rule, &cell, &dw) / cell.area();
            let scale = cell.hx.powi(a as i32) * cell.hy.powi(b as i32);
            let proj = p.eval(0.0, 0.0, a, b) / scale;
            worst = worst.max((proj - avg).abs() / (1.0 + avg.abs()));
        }
    }
    checks.push(check("fourth derivatives match cell averages", worst, 1e-9));

    // Same property sweeping a whole mesh, anisotropic cells included.
    let mesh = build_mesh(1.0, 1.0, 8, 5)?;
    let worst = commuting_residual(&w, &mesh, &rule)?;
    checks.push(check("cell averages across an 8x5 mesh", worst, 1e-9));

    Ok(checks)
}

fn identity_suite(rng: &mut ChaCha8Rng) -> Result<Vec<CheckResult>, Error> {
    let mut checks = Vec::new();

    // The decomposition closes on a two-level study.
    let report = run_study(&StudyConfig {
        n0: 4,
        levels: 2,
        ..StudyConfig::default()
    })?;
    let mut worst_identity: f64 = 0.0;
    let mut worst_galerkin: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for d in &report.details {
        let scale = 1.0 + d.identity.lhs.abs();
        worst_identity = worst_identity.max(d.identity.residual / scale);
        worst_sum = worst_sum.max((d.identity.sum() - d.identity.lhs).abs() / scale);
        worst_galerkin = worst_galerkin.max(d.galerkin_residual);
    }
    checks.push(check(
        "five terms close the decomposition",
        worst_identity,
        1e-8,
    ));
    checks.push(check("terms sum to the left side", worst_sum, 1e-8));
    checks.push(check(
        "solutions satisfy the discrete systems",
        worst_galerkin,
        1e-9,
    ));

    // A perturbed solution must be rejected; the identity is not generic.
    let w = solution_sine2(1.0, 1.0);
    let f = biharmonic_rhs(&w)?;
    let mesh = build_mesh(1.0, 1.0, 4, 4)?;
    let dofmap = build_dofmap(&mesh);
    let basis = ReferenceBasis::new()?;
    let rule = gauss_rule_2d(6)?;
    let system = assemble(&mesh, &dofmap, &f)?;
    let mut w_h = cholesky_solve(&system)?;
    let amp = 1e-3
        * w_h
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-12);
    for v in w_h.values.iter_mut() {
        *v += rng.gen_range(-amp..amp);
    }
    let rejected = matches!(
        identity_check(&w, &f, &w_h, &mesh, &dofmap, &basis, &rule),
        Err(Error::IdentityViolation { .. })
    );
    checks.push(CheckResult {
        name: "perturbed solution rejected".to_string(),
        worst: if rejected { 1.0 } else { 0.0 },
        tol: 0.5,
        passed: rejected,
    });

    Ok(checks)
}

fn quadrature_suite(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckResult>, Error> {
    let mut checks = Vec::new();

    // Closed-form monomial integrals on [-1, 1], up to the exactness
    // degree of every rule size.
    let exact_1d = |k: u32| -> f64 {
        if k.is_multiple_of(2) {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        }
    };
    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        let rule = gauss_rule_1d(n)?;
        for _ in 0..trials.div_ceil(8) {
            let k = rng.gen_range(0..=(2 * n as u32 - 1));
            let c = rng.gen_range(-1.0..1.0);
            let got = rule.integrate(|t| c * t.powi(k as i32));
            worst = worst.max((got - c * exact_1d(k)).abs());
        }
    }
    checks.push(check("monomials exact to degree 2n-1", worst, 1e-12));

    // Tensor rules integrate separable products as the product of the 1D
    // integrals.
    let mut worst: f64 = 0.0;
    let rule = tensor_rule(&gauss_rule_1d(4)?, &gauss_rule_1d(5)?);
    for _ in 0..trials {
        let p = rng.gen_range(0..=7u32);
        let q = rng.gen_range(0..=8u32);
        let got = rule.integrate_ref(|xi, eta| xi.powi(p as i32) * eta.powi(q as i32));
        worst = worst.max((got - exact_1d(p) * exact_1d(q)).abs());
    }
    checks.push(check("tensor rules integrate products", worst, 1e-12));

    // Physical-cell integration carries the Jacobian: centered monomials
    // integrate to scaled reference values.
    let mut worst: f64 = 0.0;
    let rule2 = gauss_rule_2d(6)?;
    for _ in 0..trials {
        let cell = random_cell(rng);
        let p = rng.gen_range(0..=5u32);
        let q = rng.gen_range(0..=5u32);
        let got = integrate_on_cell(&rule2, &cell, |x, y| {
            (x - cell.xc).powi(p as i32) * (y - cell.yc).powi(q as i32)
        });
        let want =
            cell.hx.powi(p as i32 + 1) * cell.hy.powi(q as i32 + 1) * exact_1d(p) * exact_1d(q);
        let scale = cell.hx.powi(p as i32 + 1).abs() * cell.hy.powi(q as i32 + 1).abs();
        worst = worst.max((got - want).abs() / (1.0 + scale));
    }
    checks.push(check("jacobians on physical cells", worst, 1e-12));

    Ok(checks)
}
