//! Element matrices, global assembly, and linear solves.
//!
//! The bilinear form is the broken Hessian product
//! `sum over cells of integral(u_xx v_xx + 2 u_xy v_xy + u_yy v_yy)`.
//! Local matrices act on physical degrees of freedom (values and physical
//! first derivatives), so assembly is a plain scatter-add: shared nodes
//! carry the same physical quantities in every adjacent cell.

use crate::analytic::AnalyticField;
use crate::band::{jacobi_pcg, CgStats, SymBandMatrix};
use crate::error::Error;
use crate::mesh::{DiscreteField, DofMap, Mesh};
use crate::quadrature::{gauss_rule_2d, QuadRule2D};
use crate::reference_element::{CellGeometry, ReferenceBasis, SHAPE_DIM};

/// Points per direction for stiffness integrands; the integrands are
/// polynomials of degree at most four per direction, integrated exactly.
pub const STIFFNESS_RULE_POINTS: usize = 4;

/// Points per direction for load integrands with analytic right-hand sides,
/// fixed so that quadrature error stays out of measured convergence orders.
pub const LOAD_RULE_POINTS: usize = 6;

/// Element stiffness matrix of one cell in physical degrees of freedom.
///
/// Entry `(i, j)` is the broken Hessian product of shape functions `i` and
/// `j` mapped to the cell: reference second derivatives pick up `1/hx^2`,
/// `1/(hx hy)`, or `1/hy^2`, and the area element contributes `hx hy`.
#[allow(clippy::needless_range_loop)]
pub fn local_stiffness(
    cell: &CellGeometry,
    basis: &ReferenceBasis,
    rule: &QuadRule2D,
) -> [[f64; SHAPE_DIM]; SHAPE_DIM] {
    let mut s = [[0.0; SHAPE_DIM]; SHAPE_DIM];
    let inv_xx = 1.0 / (cell.hx * cell.hx);
    let inv_xy = 1.0 / (cell.hx * cell.hy);
    let inv_yy = 1.0 / (cell.hy * cell.hy);
    let mut d20 = [0.0; SHAPE_DIM];
    let mut d11 = [0.0; SHAPE_DIM];
    let mut d02 = [0.0; SHAPE_DIM];
    for (&(xi, eta), &w) in rule.points().iter().zip(rule.weights()) {
        for k in 0..SHAPE_DIM {
            d20[k] = basis.eval_shape(k, xi, eta, 2, 0) * inv_xx;
            d11[k] = basis.eval_shape(k, xi, eta, 1, 1) * inv_xy;
            d02[k] = basis.eval_shape(k, xi, eta, 0, 2) * inv_yy;
        }
        for i in 0..SHAPE_DIM {
            for j in i..SHAPE_DIM {
                s[i][j] += w * (d20[i] * d20[j] + 2.0 * d11[i] * d11[j] + d02[i] * d02[j]);
            }
        }
    }
    let area_jac = cell.hx * cell.hy;
    for i in 0..SHAPE_DIM {
        for j in i..SHAPE_DIM {
            let v = s[i][j] * area_jac * cell.dof_scale(i) * cell.dof_scale(j);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

/// Element load vector `integral of f times shape k` in physical degrees of
/// freedom.
pub fn local_load(
    cell: &CellGeometry,
    basis: &ReferenceBasis,
    f: &AnalyticField,
    rule: &QuadRule2D,
) -> [f64; SHAPE_DIM] {
    let mut e = [0.0; SHAPE_DIM];
    for (&(xi, eta), &w) in rule.points().iter().zip(rule.weights()) {
        let (x, y) = cell.to_physical(xi, eta);
        let fv = f.value(x, y) * w;
        for (k, ek) in e.iter_mut().enumerate() {
            *ek += fv * basis.eval_shape(k, xi, eta, 0, 0);
        }
    }
    let area_jac = cell.hx * cell.hy;
    for (k, ek) in e.iter_mut().enumerate() {
        *ek *= area_jac * cell.dof_scale(k);
    }
    e
}

/// The assembled Galerkin system on the free degrees of freedom.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: SymBandMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    /// Relative Euclidean residual `|b - A x| / |b|` of a candidate
    /// solution; zero for an empty or zero right-hand side.
    pub fn rel_residual(&self, x: &DiscreteField) -> f64 {
        let b_norm = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b_norm == 0.0 {
            return 0.0;
        }
        self.matrix.residual_norm(&x.values, &self.rhs) / b_norm
    }
}

/// Assembles the stiffness matrix and load vector on the free degrees of
/// freedom. Constrained slots are eliminated, which keeps the matrix
/// positive definite. On a uniform mesh all cells share one element matrix.
pub fn assemble(mesh: &Mesh, dofmap: &DofMap, f: &AnalyticField) -> Result<LinearSystem, Error> {
    let basis = ReferenceBasis::new()?;
    let stiffness_rule = gauss_rule_2d(STIFFNESS_RULE_POINTS)?;
    let load_rule = gauss_rule_2d(LOAD_RULE_POINTS)?;

    let n = dofmap.n_free();
    let mut bandwidth = 0;
    for c in 0..mesh.num_cells() {
        let frees: Vec<usize> = dofmap
            .cell_global_dofs(c)
            .iter()
            .filter_map(|&g| dofmap.free_of_global(g))
            .collect();
        for &a in &frees {
            for &b in &frees {
                bandwidth = bandwidth.max(a.abs_diff(b));
            }
        }
    }
    let mut matrix = SymBandMatrix::zeros(n, bandwidth);
    let mut rhs = vec![0.0; n];

    let element = mesh
        .cells()
        .first()
        .map(|cell| local_stiffness(cell, &basis, &stiffness_rule));
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let s = element.as_ref().expect("mesh has at least one cell");
        let e = local_load(cell, &basis, f, &load_rule);
        let globals = dofmap.cell_global_dofs(c);
        for i in 0..SHAPE_DIM {
            let Some(fi) = dofmap.free_of_global(globals[i]) else {
                continue;
            };
            rhs[fi] += e[i];
            for j in 0..SHAPE_DIM {
                if let Some(fj) = dofmap.free_of_global(globals[j]) {
                    if fi <= fj {
                        matrix.add(fi, fj, s[i][j]);
                    }
                }
            }
        }
    }
    Ok(LinearSystem { matrix, rhs })
}

/// How a direct solve went.
#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    /// Smallest Cholesky pivot; positive for an SPD system.
    pub min_pivot: f64,
    /// Relative Euclidean residual of the returned solution.
    pub rel_residual: f64,
    /// Whether an iterative refinement step was taken.
    pub refined: bool,
}

/// Banded Cholesky solve with at most one step of iterative refinement,
/// returning the solution together with pivot and residual statistics.
pub fn cholesky_solve_with_stats(
    system: &LinearSystem,
) -> Result<(DiscreteField, SolveStats), Error> {
    let chol = system.matrix.cholesky()?;
    let mut x = chol.solve(&system.rhs);
    let b_norm = system.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rel = |x: &[f64]| {
        if b_norm == 0.0 {
            0.0
        } else {
            system.matrix.residual_norm(x, &system.rhs) / b_norm
        }
    };
    let mut rel_residual = rel(&x);
    let mut refined = false;
    if rel_residual > 1e-10 {
        let n = x.len();
        let mut ax = vec![0.0; n];
        system.matrix.matvec(&x, &mut ax);
        let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = chol.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        rel_residual = rel(&x);
        refined = true;
        if rel_residual > 1e-10 {
            return Err(Error::Internal(format!(
                "direct solve stalled at relative residual {rel_residual:.3e} after refinement"
            )));
        }
    }
    Ok((
        DiscreteField { values: x },
        SolveStats {
            min_pivot: chol.min_pivot(),
            rel_residual,
            refined,
        },
    ))
}

/// Banded Cholesky solve of the assembled system.
pub fn cholesky_solve(system: &LinearSystem) -> Result<DiscreteField, Error> {
    cholesky_solve_with_stats(system).map(|(x, _)| x)
}

/// Jacobi-preconditioned conjugate gradient solve, the independent check on
/// the direct solver.
pub fn cg_solve(
    system: &LinearSystem,
    tol: f64,
    max_iter: usize,
) -> Result<(DiscreteField, CgStats), Error> {
    let (values, stats) = jacobi_pcg(&system.matrix, &system.rhs, tol, max_iter)?;
    Ok((DiscreteField { values }, stats))
}
