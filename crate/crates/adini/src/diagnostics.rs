//! Measured quantities of the plate discretization.
//!
//! Everything here is a number a convergence study reports: broken error
//! norms, the per-cell expansion of the interpolation error against the
//! discrete Hessian, the consistency functional of the nonconforming space,
//! the term-by-term decomposition of the L2 error, the commuting defect of
//! the moment projection, and error-to-h^2 ratio tables.
//!
//! Quadrature rules are passed in by the caller: six points per direction
//! for integrands involving analytic fields, four for purely polynomial
//! integrands (exact).

use crate::analytic::AnalyticField;
use crate::error::Error;
use crate::mesh::{local_on_cell, DiscreteField, DofMap, Mesh};
use crate::quadrature::{integrate_on_cell, QuadRule2D};
use crate::reference_element::{
    interpolate_field, interpolate_ref_poly, p4_project, CellGeometry, LocalPoly12, LocalPolyP4,
    ReferenceBasis,
};

/// Binomial weights of the mixed derivatives in the order-l seminorm,
/// indexed `[order][a]`.
const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

type Deriv<'a> = Box<dyn Fn(f64, f64) -> f64 + 'a>;

/// One closure per mixed derivative `(a, order - a)`, order checked once.
fn deriv_closures(w: &AnalyticField, order: u32) -> Result<Vec<Deriv<'_>>, Error> {
    (0..=order)
        .map(|a| w.deriv_fn(a, order - a).map(|f| Box::new(f) as Deriv<'_>))
        .collect()
}

/// Broken order-l seminorm of `w - u_h`: the square root of the cell-wise
/// sum of all order-l mixed derivatives of the difference, squared, with
/// binomial weights. Order 0 is the L2 norm and order 2 the energy seminorm
/// whose mixed term carries weight two.
pub fn broken_norm(
    w: &AnalyticField,
    u_h: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    order: u32,
    rule: &QuadRule2D,
) -> Result<f64, Error> {
    if order > 4 {
        return Err(Error::InvalidArgument(format!(
            "seminorm order {order} exceeds the element's order 4"
        )));
    }
    let dw = deriv_closures(w, order)?;
    let weights = &BINOM[order as usize];
    let mut sq = 0.0;
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let local = local_on_cell(u_h, mesh, dofmap, basis, c);
        let mut cell_sq = 0.0;
        for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
            let (x, y) = cell.to_physical(xi, eta);
            for a in 0..=order {
                let b = order - a;
                let scale = cell.hx.powi(a as i32) * cell.hy.powi(b as i32);
                let diff = dw[a as usize](x, y) - local.eval(xi, eta, a, b) / scale;
                cell_sq += qw * weights[a as usize] * diff * diff;
            }
        }
        sq += cell_sq * cell.hx * cell.hy;
    }
    Ok(sq.sqrt())
}

/// Both sides of the per-cell expansion of the interpolation error.
///
/// For a degree-four polynomial `u` and a shape-space member `v` on one
/// cell, the Hessian product of `u - (interpolant of u)` against `v`
/// collapses to two weighted moments of the single derivative `u_xxyy`:
///
/// ```text
/// lhs = integral of D^2(u - I u) : D^2 v
/// rhs = -(hy^2/3) integral of u_xxyy v_xx - (hx^2/3) integral of u_xxyy v_yy
/// ```
///
/// This is an exact identity; the returned pair agrees to quadrature
/// precision. It is the mechanism behind the h^2 lower bound: the
/// interpolation error cannot be orthogonal to the discrete space.
pub fn expansion_identity(
    u: &LocalPolyP4,
    v: &LocalPoly12,
    cell: &CellGeometry,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> (f64, f64) {
    let err = u.sub(&interpolate_ref_poly(basis, u).to_p4());
    let hx2 = cell.hx * cell.hx;
    let hy2 = cell.hy * cell.hy;
    let inv_xx = 1.0 / hx2;
    let inv_xy = 1.0 / (cell.hx * cell.hy);
    let inv_yy = 1.0 / hy2;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
        let e_xx = err.eval(xi, eta, 2, 0) * inv_xx;
        let e_xy = err.eval(xi, eta, 1, 1) * inv_xy;
        let e_yy = err.eval(xi, eta, 0, 2) * inv_yy;
        let v_xx = v.eval(xi, eta, 2, 0) * inv_xx;
        let v_xy = v.eval(xi, eta, 1, 1) * inv_xy;
        let v_yy = v.eval(xi, eta, 0, 2) * inv_yy;
        let u_xxyy = u.eval(xi, eta, 2, 2) * inv_xx * inv_yy;
        lhs += qw * (e_xx * v_xx + 2.0 * e_xy * v_xy + e_yy * v_yy);
        rhs -= qw * u_xxyy * (hy2 / 3.0 * v_xx + hx2 / 3.0 * v_yy);
    }
    let jac = cell.hx * cell.hy;
    (lhs * jac, rhs * jac)
}

/// The cross term of the error decomposition and its leading-order value.
#[derive(Clone, Copy, Debug)]
pub struct ExpansionReport {
    /// Broken Hessian product of the interpolation error against the
    /// interpolant, summed over cells.
    pub cross: f64,
    /// Its leading term: the third-derivative norms weighted by the squared
    /// half lengths, `sum over cells of (hy^2/3)|w_xxy|^2 + (hx^2/3)|w_xyy|^2`.
    pub dominant: f64,
    /// `cross / dominant`; tends to one under refinement.
    pub ratio: f64,
}

/// Computes the cross term `a_h(w - I_h w, I_h w)` by cell-wise quadrature
/// together with its closed-form dominant part from the analytic third
/// derivatives of `w`.
///
/// The dominant part is positive for any solution whose mixed third
/// derivatives do not vanish identically; a zero value means the study would
/// measure a degenerate case and is reported as an error.
pub fn cross_term(
    w: &AnalyticField,
    mesh: &Mesh,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> Result<ExpansionReport, Error> {
    w.require_order(3)?;
    let w_xx = w.deriv_fn(2, 0)?;
    let w_xy = w.deriv_fn(1, 1)?;
    let w_yy = w.deriv_fn(0, 2)?;
    let w_xxy = w.deriv_fn(2, 1)?;
    let w_xyy = w.deriv_fn(1, 2)?;
    let mut cross = 0.0;
    let mut dominant = 0.0;
    for cell in mesh.cells() {
        let pi = interpolate_field(basis, w, cell)?;
        let inv_xx = 1.0 / (cell.hx * cell.hx);
        let inv_xy = 1.0 / (cell.hx * cell.hy);
        let inv_yy = 1.0 / (cell.hy * cell.hy);
        let mut c_cell = 0.0;
        let mut d_cell = 0.0;
        for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
            let (x, y) = cell.to_physical(xi, eta);
            let p_xx = pi.eval(xi, eta, 2, 0) * inv_xx;
            let p_xy = pi.eval(xi, eta, 1, 1) * inv_xy;
            let p_yy = pi.eval(xi, eta, 0, 2) * inv_yy;
            c_cell += qw
                * ((w_xx(x, y) - p_xx) * p_xx
                    + 2.0 * (w_xy(x, y) - p_xy) * p_xy
                    + (w_yy(x, y) - p_yy) * p_yy);
            d_cell += qw
                * (cell.hy * cell.hy / 3.0 * w_xxy(x, y).powi(2)
                    + cell.hx * cell.hx / 3.0 * w_xyy(x, y).powi(2));
        }
        let jac = cell.hx * cell.hy;
        cross += c_cell * jac;
        dominant += d_cell * jac;
    }
    if dominant <= 0.0 {
        return Err(Error::DegenerateSolution(format!(
            "field '{}' has vanishing mixed third derivatives; \
             the cross term has no h^2 leading order",
            w.name()
        )));
    }
    Ok(ExpansionReport {
        cross,
        dominant,
        ratio: cross / dominant,
    })
}

/// Consistency functional `a_h(w, v_h) - (f, v_h)`: the residual of the
/// exact solution in the discrete equations, signed.
///
/// For a conforming space this would vanish by the weak form; for this
/// element it is of order h^2 and is the quantity the error decomposition
/// books against the discrete test functions.
pub fn consistency_error(
    w: &AnalyticField,
    f: &AnalyticField,
    v_h: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> Result<f64, Error> {
    w.require_order(2)?;
    let w_xx = w.deriv_fn(2, 0)?;
    let w_xy = w.deriv_fn(1, 1)?;
    let w_yy = w.deriv_fn(0, 2)?;
    let mut acc = 0.0;
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let local = local_on_cell(v_h, mesh, dofmap, basis, c);
        let inv_xx = 1.0 / (cell.hx * cell.hx);
        let inv_xy = 1.0 / (cell.hx * cell.hy);
        let inv_yy = 1.0 / (cell.hy * cell.hy);
        let mut cell_acc = 0.0;
        for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
            let (x, y) = cell.to_physical(xi, eta);
            let v_xx = local.eval(xi, eta, 2, 0) * inv_xx;
            let v_xy = local.eval(xi, eta, 1, 1) * inv_xy;
            let v_yy = local.eval(xi, eta, 0, 2) * inv_yy;
            let v_val = local.eval(xi, eta, 0, 0);
            cell_acc += qw
                * (w_xx(x, y) * v_xx + 2.0 * w_xy(x, y) * v_xy + w_yy(x, y) * v_yy
                    - f.value(x, y) * v_val);
        }
        acc += cell_acc * cell.hx * cell.hy;
    }
    Ok(acc)
}

/// Term-by-term decomposition of `(-f, w - w_h)`.
///
/// With `I_h w` the nodal interpolant, the identity
///
/// ```text
/// (-f, w - w_h) = t1 + t2 + t3 + t4 + t5
/// t1 = a_h(w, I_h w - w_h) - (f, I_h w - w_h)
/// t2 = a_h(w - I_h w, w - I_h w)
/// t3 = a_h(w - I_h w, w_h - I_h w)
/// t4 = 2 (f, I_h w - w)
/// t5 = 2 a_h(w - I_h w, I_h w)
/// ```
///
/// holds whenever `w_h` is the Galerkin solution for `f`. Terms t1 through
/// t4 are of order h^4; t5 is the h^2 cross term that forces the lower
/// bound.
#[derive(Clone, Copy, Debug)]
pub struct IdentityReport {
    pub lhs: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    pub residual: f64,
}

impl IdentityReport {
    pub fn sum(&self) -> f64 {
        self.t1 + self.t2 + self.t3 + self.t4 + self.t5
    }
}

/// Evaluates every term of the error decomposition by cell-wise quadrature.
///
/// `w_h` must be the computed Galerkin solution of the assembled system for
/// `f`: the derivation substitutes the discrete equations, so the identity
/// fails for arbitrary discrete fields. A residual beyond
/// `1e-8 (1 + |lhs|)` therefore signals an assembly or solver bug, or a
/// mesh so coarse that the fixed quadrature no longer resolves the analytic
/// integrands, and is returned as an error.
pub fn identity_check(
    w: &AnalyticField,
    f: &AnalyticField,
    w_h: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> Result<IdentityReport, Error> {
    w.require_order(2)?;
    let w_xx = w.deriv_fn(2, 0)?;
    let w_xy = w.deriv_fn(1, 1)?;
    let w_yy = w.deriv_fn(0, 2)?;
    let mut lhs = 0.0;
    let (mut t1, mut t2, mut t3, mut t4, mut t5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let pi = interpolate_field(basis, w, cell)?;
        let uh = local_on_cell(w_h, mesh, dofmap, basis, c);
        let inv_xx = 1.0 / (cell.hx * cell.hx);
        let inv_xy = 1.0 / (cell.hx * cell.hy);
        let inv_yy = 1.0 / (cell.hy * cell.hy);
        let (mut s_lhs, mut s1, mut s2, mut s3, mut s4, mut s5) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
            let (x, y) = cell.to_physical(xi, eta);
            let fv = f.value(x, y);
            let wv = w.value(x, y);
            let (a_xx, a_xy, a_yy) = (w_xx(x, y), w_xy(x, y), w_yy(x, y));
            let p_val = pi.eval(xi, eta, 0, 0);
            let p_xx = pi.eval(xi, eta, 2, 0) * inv_xx;
            let p_xy = pi.eval(xi, eta, 1, 1) * inv_xy;
            let p_yy = pi.eval(xi, eta, 0, 2) * inv_yy;
            let u_val = uh.eval(xi, eta, 0, 0);
            let u_xx = uh.eval(xi, eta, 2, 0) * inv_xx;
            let u_xy = uh.eval(xi, eta, 1, 1) * inv_xy;
            let u_yy = uh.eval(xi, eta, 0, 2) * inv_yy;
            // Hessian products pair as (xx, 2 xy, yy).
            let hess = |axx: f64, axy: f64, ayy: f64, bxx: f64, bxy: f64, byy: f64| {
                axx * bxx + 2.0 * axy * bxy + ayy * byy
            };
            let (e_xx, e_xy, e_yy) = (a_xx - p_xx, a_xy - p_xy, a_yy - p_yy);
            s_lhs -= qw * fv * (wv - u_val);
            s1 += qw
                * (hess(a_xx, a_xy, a_yy, p_xx - u_xx, p_xy - u_xy, p_yy - u_yy)
                    - fv * (p_val - u_val));
            s2 += qw * hess(e_xx, e_xy, e_yy, e_xx, e_xy, e_yy);
            s3 += qw * hess(e_xx, e_xy, e_yy, u_xx - p_xx, u_xy - p_xy, u_yy - p_yy);
            s4 += qw * 2.0 * fv * (p_val - wv);
            s5 += qw * 2.0 * hess(e_xx, e_xy, e_yy, p_xx, p_xy, p_yy);
        }
        let jac = cell.hx * cell.hy;
        lhs += s_lhs * jac;
        t1 += s1 * jac;
        t2 += s2 * jac;
        t3 += s3 * jac;
        t4 += s4 * jac;
        t5 += s5 * jac;
    }
    let report = IdentityReport {
        lhs,
        t1,
        t2,
        t3,
        t4,
        t5,
        residual: (lhs - (t1 + t2 + t3 + t4 + t5)).abs(),
    };
    let tol = 1e-8 * (1.0 + lhs.abs());
    if report.residual > tol {
        return Err(Error::IdentityViolation {
            residual: report.residual,
            tol,
        });
    }
    Ok(report)
}

/// Worst relative commuting defect of the moment projection: over all cells
/// and all five fourth derivatives, the difference between the (constant)
/// fourth derivative of the projection and the cell average it must equal,
/// scaled by `1 + |average|`.
pub fn commuting_residual(w: &AnalyticField, mesh: &Mesh, rule: &QuadRule2D) -> Result<f64, Error> {
    w.require_order(4)?;
    let mut worst: f64 = 0.0;
    for cell in mesh.cells() {
        let p = p4_project(w, cell, rule)?;
        let area = cell.area();
        for a in 0..=4u32 {
            let b = 4 - a;
            let dw = w.deriv_fn(a, b)?;
            let avg = integrate_on_cell(rule, cell, &dw) / area;
            let scale = cell.hx.powi(a as i32) * cell.hy.powi(b as i32);
            let proj = p.eval(0.0, 0.0, a, b) / scale;
            worst = worst.max((proj - avg).abs() / (1.0 + avg.abs()));
        }
    }
    Ok(worst)
}

/// Error norms of one discrete solution at one mesh size.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub h: f64,
    pub n_free: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub err_energy: f64,
}

/// Measures the L2, broken H1, and broken energy errors of `u_h` against
/// `w`.
pub fn error_report(
    w: &AnalyticField,
    u_h: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> Result<ErrorReport, Error> {
    Ok(ErrorReport {
        h: mesh.h(),
        n_free: dofmap.n_free(),
        err_l2: broken_norm(w, u_h, mesh, dofmap, basis, 0, rule)?,
        err_h1: broken_norm(w, u_h, mesh, dofmap, basis, 1, rule)?,
        err_energy: broken_norm(w, u_h, mesh, dofmap, basis, 2, rule)?,
    })
}

/// One level of a lower-bound table.
#[derive(Clone, Copy, Debug)]
pub struct RatioRow {
    pub h: f64,
    /// Error divided by h^2; stabilization at a positive value under
    /// refinement exhibits the lower bound.
    pub ratio: f64,
    /// Observed order against the previous level; empty on the first level
    /// or when an error vanishes.
    pub order: Option<f64>,
}

fn ratio_rows(data: &[(f64, f64)]) -> Vec<RatioRow> {
    data.iter()
        .enumerate()
        .map(|(k, &(h, e))| {
            let order = (k > 0)
                .then(|| {
                    let (hp, ep) = data[k - 1];
                    (e > 0.0 && ep > 0.0).then(|| (ep / e).ln() / (hp / h).ln())
                })
                .flatten();
            RatioRow {
                h,
                ratio: e / (h * h),
                order,
            }
        })
        .collect()
}

/// L2-error-to-h^2 ratios with observed orders, per level.
pub fn lower_bound_ratio(reports: &[ErrorReport]) -> Vec<RatioRow> {
    let data: Vec<(f64, f64)> = reports.iter().map(|r| (r.h, r.err_l2)).collect();
    ratio_rows(&data)
}

/// Broken-H1-error-to-h^2 ratios with observed orders, per level.
pub fn h1_lower_bound(reports: &[ErrorReport]) -> Vec<RatioRow> {
    let data: Vec<(f64, f64)> = reports.iter().map(|r| (r.h, r.err_h1)).collect();
    ratio_rows(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{biharmonic_rhs, solution_sine2};
    use crate::assembly::{assemble, cholesky_solve};
    use crate::mesh::{build_dofmap, build_mesh, field_from_discrete, interpolate_global};
    use crate::quadrature::gauss_rule_2d;
    use crate::reference_element::SHAPE_DIM;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

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

    #[test]
    fn l2_norm_of_sine2_against_zero_field() {
        let w = solution_sine2(1.0, 1.0);
        let mesh = build_mesh(1.0, 1.0, 8, 8).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let zero = DiscreteField::zeros(&dofmap);
        let got = broken_norm(&w, &zero, &mesh, &dofmap, &basis, 0, &rule).unwrap();
        assert!(
            (got - 0.375).abs() <= 1e-9,
            "L2 norm {got:.12e}, expected 3/8"
        );
    }

    #[test]
    fn broken_norm_vanishes_on_discrete_fields() {
        let mesh = build_mesh(1.0, 1.0, 3, 3).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = DiscreteField::zeros(&dofmap);
        for v in u.values.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let lifted = field_from_discrete(&u, &mesh, &dofmap, &basis);
        for order in 0..=4 {
            let got = broken_norm(&lifted, &u, &mesh, &dofmap, &basis, order, &rule).unwrap();
            assert!(got <= 1e-11, "order {order}: {got:.3e}");
        }
    }

    #[test]
    fn broken_norm_rejects_order_five() {
        let mesh = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(4).unwrap();
        let w = solution_sine2(1.0, 1.0);
        let zero = DiscreteField::zeros(&dofmap);
        assert!(broken_norm(&w, &zero, &mesh, &dofmap, &basis, 5, &rule).is_err());
    }

    /// Frozen closed-form case of the expansion identity on the reference
    /// cell: u = xi^2 eta^2, v = xi^2 gives -32/3 on both sides.
    #[test]
    fn expansion_identity_closed_form_case() {
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(4).unwrap();
        let cell = CellGeometry::new(0.0, 0.0, 1.0, 1.0);
        let u = LocalPolyP4::monomial(2, 2);
        let mut v = LocalPoly12::zero();
        v.coeffs[3] = 1.0; // xi^2
        let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
        let want = -32.0 / 3.0;
        assert!((lhs - want).abs() <= 1e-12, "lhs {lhs:.15e}");
        assert!((rhs - want).abs() <= 1e-12, "rhs {rhs:.15e}");
    }

    /// Cubic u is reproduced by interpolation and has no fourth derivative:
    /// both sides vanish. Pure xi^4 has zero mixed fourth derivative and its
    /// interpolation error is Hessian-orthogonal to the shape space.
    #[test]
    fn expansion_identity_degenerate_cases() {
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let cell = random_cell(&mut rng);
            let v = random_shape(&mut rng);
            let mut cubic = random_p4(&mut rng);
            for (k, &(i, j)) in crate::reference_element::P4_EXPONENTS.iter().enumerate() {
                if i + j == 4 {
                    cubic.coeffs[k] = 0.0;
                }
            }
            let (lhs, rhs) = expansion_identity(&cubic, &v, &cell, &basis, &rule);
            assert!(
                lhs.abs() <= 1e-11 && rhs.abs() <= 1e-11,
                "cubic: {lhs:.3e} {rhs:.3e}"
            );

            let (lhs, rhs) =
                expansion_identity(&LocalPolyP4::monomial(4, 0), &v, &cell, &basis, &rule);
            assert!(
                lhs.abs() <= 1e-11 && rhs.abs() <= 1e-11,
                "xi^4: {lhs:.3e} {rhs:.3e}"
            );
        }
    }

    #[test]
    fn expansion_identity_random_trials() {
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let cell = random_cell(&mut rng);
            let u = random_p4(&mut rng);
            let v = random_shape(&mut rng);
            let (lhs, rhs) = expansion_identity(&u, &v, &cell, &basis, &rule);
            assert!(
                (lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()),
                "trial {trial}: lhs {lhs:.15e} rhs {rhs:.15e}"
            );
        }
    }

    /// The mixed second derivative of the interpolation error is orthogonal
    /// to the mixed second derivative of every shape-space member.
    #[test]
    fn mixed_derivative_term_vanishes() {
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let cell = random_cell(&mut rng);
            let u = random_p4(&mut rng);
            let v = random_shape(&mut rng);
            let err = u.sub(&interpolate_ref_poly(&basis, &u).to_p4());
            let inv_xy = 1.0 / (cell.hx * cell.hy);
            let mut acc = 0.0;
            for (&(xi, eta), &qw) in rule.points().iter().zip(rule.weights()) {
                acc += qw * err.eval(xi, eta, 1, 1) * v.eval(xi, eta, 1, 1) * inv_xy * inv_xy;
            }
            acc *= cell.hx * cell.hy;
            assert!(acc.abs() <= 1e-12 * (1.0 + acc.abs()), "{acc:.3e}");
        }
    }

    #[test]
    fn cross_term_dominant_matches_closed_form() {
        let w = solution_sine2(1.0, 1.0);
        let mesh = build_mesh(1.0, 1.0, 8, 8).unwrap();
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let report = cross_term(&w, &mesh, &basis, &rule).unwrap();
        let h = mesh.h();
        let want = 2.0 * PI.powi(6) / 3.0 * h * h;
        assert!(
            (report.dominant - want).abs() <= 1e-6 * want,
            "dominant {:.9e} vs {want:.9e}",
            report.dominant
        );
        assert!(report.cross > 0.0);
        assert!(
            (report.ratio - 1.0).abs() < 0.5,
            "ratio {} too far from 1 already at 8x8",
            report.ratio
        );
    }

    #[test]
    fn consistency_error_vanishes_for_zero_test_field() {
        let w = solution_sine2(1.0, 1.0);
        let f = biharmonic_rhs(&w).unwrap();
        let mesh = build_mesh(1.0, 1.0, 4, 4).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let zero = DiscreteField::zeros(&dofmap);
        let got = consistency_error(&w, &f, &zero, &mesh, &dofmap, &basis, &rule).unwrap();
        assert_eq!(got, 0.0);
    }

    /// The element is genuinely nonconforming: the consistency functional
    /// does not vanish at finite h.
    #[test]
    fn consistency_error_is_nonzero_for_the_interpolant() {
        let w = solution_sine2(1.0, 1.0);
        let f = biharmonic_rhs(&w).unwrap();
        let mesh = build_mesh(1.0, 1.0, 8, 8).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let pi_w = interpolate_global(&w, &mesh, &dofmap).unwrap();
        let got = consistency_error(&w, &f, &pi_w, &mesh, &dofmap, &basis, &rule).unwrap();
        assert!(got.abs() > 1e-8, "consistency {got:.3e} unexpectedly small");
    }

    /// The assembled matrix and the quadrature route compute the same
    /// bilinear form, and the assembled load the same linear functional.
    #[test]
    fn quadrature_and_matrix_routes_agree() {
        let w = solution_sine2(1.0, 1.0);
        let f = biharmonic_rhs(&w).unwrap();
        let mesh = build_mesh(1.0, 1.0, 3, 3).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let system = assemble(&mesh, &dofmap, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut v = DiscreteField::zeros(&dofmap);
        for x in v.values.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        // a_h(v, v) via matrix.
        let mut av = vec![0.0; dofmap.n_free()];
        system.matrix.matvec(&v.values, &mut av);
        let quad_form: f64 = {
            // a_h(v, v) via per-cell quadrature, using the lifted field as
            // the analytic operand.
            let lifted = field_from_discrete(&v, &mesh, &dofmap, &basis);
            let hess = consistency_error(&lifted, &f, &v, &mesh, &dofmap, &basis, &rule).unwrap();
            // consistency_error returns a_h(lifted, v) - (f, v); add back.
            let fv: f64 = v.values.iter().zip(&system.rhs).map(|(a, b)| a * b).sum();
            hess + fv
        };
        let mat_form: f64 = v.values.iter().zip(&av).map(|(a, b)| a * b).sum();
        assert!(
            (quad_form - mat_form).abs() <= 1e-9 * (1.0 + mat_form.abs()),
            "quadrature {quad_form:.12e} vs matrix {mat_form:.12e}"
        );
    }

    #[test]
    fn identity_holds_for_the_galerkin_solution() {
        let w = solution_sine2(1.0, 1.0);
        let f = biharmonic_rhs(&w).unwrap();
        let mesh = build_mesh(1.0, 1.0, 8, 8).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let system = assemble(&mesh, &dofmap, &f).unwrap();
        let w_h = cholesky_solve(&system).unwrap();
        let report = identity_check(&w, &f, &w_h, &mesh, &dofmap, &basis, &rule).unwrap();
        assert!(
            report.residual <= 1e-8 * (1.0 + report.lhs.abs()),
            "residual {:.3e}",
            report.residual
        );
        // The decomposition must reproduce the left side, not just be small.
        assert!((report.sum() - report.lhs).abs() <= 1e-8 * (1.0 + report.lhs.abs()));
    }

    /// Feeding a non-Galerkin field violates the identity's precondition
    /// and is caught.
    #[test]
    fn identity_rejects_non_galerkin_fields() {
        let w = solution_sine2(1.0, 1.0);
        let f = biharmonic_rhs(&w).unwrap();
        let mesh = build_mesh(1.0, 1.0, 4, 4).unwrap();
        let dofmap = build_dofmap(&mesh);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let pi_w = interpolate_global(&w, &mesh, &dofmap).unwrap();
        match identity_check(&w, &f, &pi_w, &mesh, &dofmap, &basis, &rule) {
            Err(Error::IdentityViolation { residual, tol }) => {
                assert!(residual > tol);
            }
            other => panic!("expected identity violation, got {other:?}"),
        }
    }

    #[test]
    fn commuting_defect_is_tiny_for_sine2() {
        let w = solution_sine2(1.0, 1.0);
        let mesh = build_mesh(1.0, 1.0, 8, 8).unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let worst = commuting_residual(&w, &mesh, &rule).unwrap();
        assert!(worst <= 1e-9, "worst commuting defect {worst:.3e}");
    }

    #[test]
    fn ratio_tables_detect_rates() {
        // A superconvergent error h^3 has ratios h that keep falling.
        let cubic: Vec<ErrorReport> = [0.25, 0.125, 0.0625]
            .iter()
            .map(|&h: &f64| ErrorReport {
                h,
                n_free: 0,
                err_l2: h.powi(3),
                err_h1: 0.5 * h * h,
                err_energy: 0.0,
            })
            .collect();
        let rows = lower_bound_ratio(&cubic);
        assert!((rows[0].ratio - 0.25).abs() < 1e-14);
        assert!(rows[1].ratio < rows[0].ratio && rows[2].ratio < rows[1].ratio);
        assert!((rows[2].order.unwrap() - 3.0).abs() < 1e-12);
        // An exact h^2 error keeps a constant ratio.
        let h1_rows = h1_lower_bound(&cubic);
        for row in &h1_rows {
            assert!((row.ratio - 0.5).abs() < 1e-14);
        }
        assert!((h1_rows[1].order.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rows[0].order, None);
    }

    /// Interpolation error orders 4 - l for the first three seminorms,
    /// measured between an 8x8 and a 16x16 mesh.
    #[test]
    fn interpolation_error_orders() {
        let w = solution_sine2(1.0, 1.0);
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        let mut errs = Vec::new();
        for n in [8, 16] {
            let mesh = build_mesh(1.0, 1.0, n, n).unwrap();
            let dofmap = build_dofmap(&mesh);
            let pi_w = interpolate_global(&w, &mesh, &dofmap).unwrap();
            let per_order: Vec<f64> = (1..=3)
                .map(|l| broken_norm(&w, &pi_w, &mesh, &dofmap, &basis, l, &rule).unwrap())
                .collect();
            errs.push(per_order);
        }
        for (idx, l) in (1..=3u32).enumerate() {
            let order = (errs[0][idx] / errs[1][idx]).log2();
            let want = (4 - l) as f64;
            assert!(
                (order - want).abs() <= 0.3,
                "order for seminorm {l}: {order:.3} vs {want}"
            );
        }
    }

    #[test]
    fn cross_term_rejects_degenerate_fields() {
        // g(x) + g(y) has identically vanishing mixed third derivatives.
        let w = AnalyticField::from_fn("additive", 1.0, 1.0, 4, |x, y, a, b| {
            let part = |t: f64, k: u32| match k {
                0 => t * t * t,
                1 => 3.0 * t * t,
                2 => 6.0 * t,
                3 => 6.0,
                _ => 0.0,
            };
            match (a, b) {
                (_, 0) if a > 0 => part(x, a),
                (0, _) if b > 0 => part(y, b),
                (0, 0) => part(x, 0) + part(y, 0),
                _ => 0.0,
            }
        });
        let mesh = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let basis = ReferenceBasis::new().unwrap();
        let rule = gauss_rule_2d(6).unwrap();
        match cross_term(&w, &mesh, &basis, &rule) {
            Err(Error::DegenerateSolution(_)) => {}
            other => panic!("expected degenerate-solution error, got {other:?}"),
        }
    }

    /// The twelve-dimensional shape space embeds in the degree-four space;
    /// sanity-check the dimension constants once here.
    #[test]
    fn shape_space_dimension() {
        assert_eq!(SHAPE_DIM, 12);
    }
}
