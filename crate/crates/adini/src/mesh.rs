//! Uniform rectangular meshes, global degree-of-freedom maps, and discrete
//! fields.
//!
//! The mesh covers `(0, lx) x (0, ly)` with `nx` by `ny` congruent cells.
//! Nodes are numbered lexicographically by `(y, x)` and carry three degrees
//! of freedom each: value, x derivative, y derivative. All three are
//! constrained to zero at boundary nodes, which encodes the clamped-plate
//! boundary condition; the remaining free degrees of freedom are numbered
//! consecutively in global order, which keeps the stiffness matrix bandwidth
//! at a few times `nx`.

use crate::analytic::AnalyticField;
use crate::error::Error;
use crate::reference_element::{CellGeometry, LocalPoly12, ReferenceBasis};

/// Degrees of freedom per node: value, x derivative, y derivative.
pub const NODE_DOFS: usize = 3;

/// Uniform rectangular mesh of `(0, lx) x (0, ly)`.
#[derive(Clone, Debug)]
pub struct Mesh {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    cells: Vec<CellGeometry>,
}

/// Builds the uniform `nx` by `ny` mesh of `(0, lx) x (0, ly)`.
pub fn build_mesh(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh, Error> {
    if !(lx > 0.0 && ly > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "domain lengths must be positive, got {lx} x {ly}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell counts must be positive, got {nx} x {ny}"
        )));
    }
    let hx = lx / (2.0 * nx as f64);
    let hy = ly / (2.0 * ny as f64);
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let xc = (2 * i + 1) as f64 * hx;
            let yc = (2 * j + 1) as f64 * hy;
            cells.push(CellGeometry::new(xc, yc, hx, hy));
        }
    }
    Ok(Mesh {
        lx,
        ly,
        nx,
        ny,
        hx,
        hy,
        cells,
    })
}

impl Mesh {
    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Half cell width `lx / (2 nx)`.
    pub fn hx(&self) -> f64 {
        self.hx
    }

    /// Half cell height `ly / (2 ny)`.
    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Mesh parameter: the larger of the two half side lengths.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn num_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Node index of grid position `(i, j)`, lexicographic by `(y, x)`.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        j * (self.nx + 1) + i
    }

    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        (
            i as f64 * self.lx / self.nx as f64,
            j as f64 * self.ly / self.ny as f64,
        )
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        i == 0 || i == self.nx || j == 0 || j == self.ny
    }

    /// Cell index of grid position `(i, j)`, lexicographic by `(y, x)`.
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn cell(&self, c: usize) -> &CellGeometry {
        &self.cells[c]
    }

    pub fn cells(&self) -> &[CellGeometry] {
        &self.cells
    }

    /// The four corner nodes of a cell, counterclockwise from the lower
    /// left, matching the reference corner order.
    pub fn cell_nodes(&self, c: usize) -> [usize; 4] {
        let i = c % self.nx;
        let j = c / self.nx;
        [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i + 1, j + 1),
            self.node_index(i, j + 1),
        ]
    }

    /// Cell containing a point of the closed domain, with its reference
    /// coordinates. Points on shared edges resolve to the lower-index cell;
    /// the top and right boundaries clamp inward.
    pub fn locate(&self, x: f64, y: f64) -> (usize, f64, f64) {
        let i = ((x / (2.0 * self.hx)).floor() as isize).clamp(0, self.nx as isize - 1) as usize;
        let j = ((y / (2.0 * self.hy)).floor() as isize).clamp(0, self.ny as isize - 1) as usize;
        let c = self.cell_index(i, j);
        let (xi, eta) = self.cells[c].to_reference(x, y);
        (c, xi, eta)
    }
}

/// Global numbering of the three-per-node degrees of freedom with boundary
/// constraints applied.
///
/// Global slot `3 node + comp` identifies one nodal quantity. Slots at
/// boundary nodes are constrained; the rest are the free degrees of freedom,
/// numbered consecutively in global slot order.
#[derive(Clone, Debug)]
pub struct DofMap {
    free_of_global: Vec<Option<usize>>,
    global_of_free: Vec<usize>,
    cell_dofs: Vec<[usize; 12]>,
}

/// Numbers the free degrees of freedom of a mesh.
pub fn build_dofmap(mesh: &Mesh) -> DofMap {
    let total = NODE_DOFS * mesh.num_nodes();
    let mut free_of_global = vec![None; total];
    let mut global_of_free = Vec::new();
    for node in 0..mesh.num_nodes() {
        if mesh.is_boundary_node(node) {
            continue;
        }
        for comp in 0..NODE_DOFS {
            let g = NODE_DOFS * node + comp;
            free_of_global[g] = Some(global_of_free.len());
            global_of_free.push(g);
        }
    }
    let cell_dofs = (0..mesh.num_cells())
        .map(|c| {
            let nodes = mesh.cell_nodes(c);
            let mut dofs = [0usize; 12];
            for (k, node) in nodes.into_iter().enumerate() {
                for comp in 0..NODE_DOFS {
                    dofs[NODE_DOFS * k + comp] = NODE_DOFS * node + comp;
                }
            }
            dofs
        })
        .collect();
    DofMap {
        free_of_global,
        global_of_free,
        cell_dofs,
    }
}

impl DofMap {
    pub fn n_free(&self) -> usize {
        self.global_of_free.len()
    }

    pub fn num_global(&self) -> usize {
        self.free_of_global.len()
    }

    /// Free index of a global slot, if unconstrained.
    pub fn free_of_global(&self, g: usize) -> Option<usize> {
        self.free_of_global[g]
    }

    pub fn global_of_free(&self, f: usize) -> usize {
        self.global_of_free[f]
    }

    /// Global slots of a cell's twelve local degrees of freedom, in local
    /// order (three per corner, corners counterclockwise).
    pub fn cell_global_dofs(&self, c: usize) -> &[usize; 12] {
        &self.cell_dofs[c]
    }
}

/// A member of the discrete space: the vector of free degrees of freedom.
/// Constrained boundary values are implicitly zero.
#[derive(Clone, Debug)]
pub struct DiscreteField {
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(dofmap: &DofMap) -> Self {
        DiscreteField {
            values: vec![0.0; dofmap.n_free()],
        }
    }

    /// Value of one global slot, zero when constrained.
    pub fn global_value(&self, dofmap: &DofMap, g: usize) -> f64 {
        dofmap.free_of_global(g).map_or(0.0, |f| self.values[f])
    }
}

/// Nodal interpolation of a smooth field into the discrete space: every free
/// degree of freedom is set to the matching value or first derivative of the
/// field.
///
/// Fields that violate the clamped boundary condition (nonzero value or
/// gradient at some boundary node) are truncated to zero there; this is
/// reported as a warning because the interpolant then no longer matches the
/// field at those nodes.
pub fn interpolate_global(
    w: &AnalyticField,
    mesh: &Mesh,
    dofmap: &DofMap,
) -> Result<DiscreteField, Error> {
    w.require_order(1)?;
    let mut out = DiscreteField::zeros(dofmap);
    for f in 0..dofmap.n_free() {
        let g = dofmap.global_of_free(f);
        let (x, y) = mesh.node_coords(g / NODE_DOFS);
        let (a, b) = [(0, 0), (1, 0), (0, 1)][g % NODE_DOFS];
        out.values[f] = w.eval(x, y, a, b)?;
    }
    let mut worst: f64 = 0.0;
    for node in 0..mesh.num_nodes() {
        if !mesh.is_boundary_node(node) {
            continue;
        }
        let (x, y) = mesh.node_coords(node);
        for (a, b) in [(0, 0), (1, 0), (0, 1)] {
            worst = worst.max(w.eval(x, y, a, b)?.abs());
        }
    }
    if worst > 1e-10 {
        log::warn!(
            "field '{}' violates the clamped boundary condition: \
             nodal data up to {worst:.3e} on the boundary was dropped",
            w.name()
        );
    }
    Ok(out)
}

/// Restriction of a discrete field to one cell, as a polynomial in the
/// cell's reference coordinates.
///
/// Gathers the twelve nodal quantities and converts the physical derivative
/// slots to reference derivatives with the half lengths.
pub fn local_on_cell(
    u: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    c: usize,
) -> LocalPoly12 {
    let cell = mesh.cell(c);
    let globals = dofmap.cell_global_dofs(c);
    let mut dofs = [0.0; 12];
    for (k, (slot, g)) in dofs.iter_mut().zip(globals.iter()).enumerate() {
        *slot = u.global_value(dofmap, *g) * cell.dof_scale(k);
    }
    basis.from_dofs(&dofs)
}

/// Physical derivative of order `(a, b)` of a discrete field at reference
/// point `(xi, eta)` of cell `c`.
#[allow(clippy::too_many_arguments)]
pub fn eval_discrete(
    u: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
    c: usize,
    xi: f64,
    eta: f64,
    a: u32,
    b: u32,
) -> Result<f64, Error> {
    if c >= mesh.num_cells() {
        return Err(Error::InvalidArgument(format!(
            "cell index {c} out of range for a mesh with {} cells",
            mesh.num_cells()
        )));
    }
    let cell = mesh.cell(c);
    let local = local_on_cell(u, mesh, dofmap, basis, c);
    Ok(local.eval(xi, eta, a, b) / (cell.hx.powi(a as i32) * cell.hy.powi(b as i32)))
}

/// Lifts a discrete field to an analytic field by piecewise polynomial
/// evaluation, so that it can be fed back through operators defined on
/// smooth fields. Derivatives are one-sided on cell edges.
pub fn field_from_discrete(
    u: &DiscreteField,
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &ReferenceBasis,
) -> AnalyticField {
    let locals: Vec<LocalPoly12> = (0..mesh.num_cells())
        .map(|c| local_on_cell(u, mesh, dofmap, basis, c))
        .collect();
    let mesh = mesh.clone();
    AnalyticField::from_fn("discrete", mesh.lx(), mesh.ly(), 4, move |x, y, a, b| {
        let (c, xi, eta) = mesh.locate(x, y);
        let cell = mesh.cell(c);
        locals[c].eval(xi, eta, a, b) / (cell.hx.powi(a as i32) * cell.hy.powi(b as i32))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::solution_sine2;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_field(dofmap: &DofMap, rng: &mut ChaCha8Rng) -> DiscreteField {
        let mut u = DiscreteField::zeros(dofmap);
        for v in u.values.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        u
    }

    #[test]
    fn mesh_counts_and_geometry() {
        let m = build_mesh(1.0, 1.0, 1, 1).unwrap();
        assert_eq!((m.num_cells(), m.num_nodes()), (1, 4));
        assert!((m.hx() - 0.5).abs() < 1e-16 && (m.hy() - 0.5).abs() < 1e-16);

        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        assert_eq!((m.num_cells(), m.num_nodes()), (4, 9));
        let interior: Vec<usize> = (0..m.num_nodes())
            .filter(|&n| !m.is_boundary_node(n))
            .collect();
        assert_eq!(interior, vec![4]);
        assert_eq!(m.node_coords(4), (0.5, 0.5));

        let m = build_mesh(2.0, 1.0, 4, 2).unwrap();
        assert!((m.hx() - 0.25).abs() < 1e-16);
        assert!((m.hy() - 0.25).abs() < 1e-16);
        assert!((m.h() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn invalid_mesh_arguments_are_rejected() {
        assert!(build_mesh(0.0, 1.0, 2, 2).is_err());
        assert!(build_mesh(1.0, -1.0, 2, 2).is_err());
        assert!(build_mesh(1.0, 1.0, 0, 2).is_err());
        assert!(build_mesh(1.0, 1.0, 2, 0).is_err());
    }

    #[test]
    fn cell_centers_and_corners_line_up_with_nodes() {
        let m = build_mesh(2.0, 1.0, 4, 2).unwrap();
        for c in 0..m.num_cells() {
            let cell = m.cell(c);
            let nodes = m.cell_nodes(c);
            for (corner, node) in cell.vertices().into_iter().zip(nodes) {
                let (x, y) = m.node_coords(node);
                assert!((corner.0 - x).abs() < 1e-14 && (corner.1 - y).abs() < 1e-14);
            }
        }
        // Cell (i, j) is centered at ((2i+1) lx / (2nx), (2j+1) ly / (2ny)).
        let cell = m.cell(m.cell_index(2, 1));
        assert!((cell.xc - 1.25).abs() < 1e-14 && (cell.yc - 0.75).abs() < 1e-14);
    }

    #[test]
    fn locate_finds_the_right_cell() {
        let m = build_mesh(1.0, 1.0, 4, 4).unwrap();
        let (c, xi, eta) = m.locate(0.30, 0.80);
        assert_eq!(c, m.cell_index(1, 3));
        let (x, y) = m.cell(c).to_physical(xi, eta);
        assert!((x - 0.30).abs() < 1e-14 && (y - 0.80).abs() < 1e-14);
        // Corners of the domain clamp inward.
        assert_eq!(m.locate(1.0, 1.0).0, m.cell_index(3, 3));
        assert_eq!(m.locate(0.0, 0.0).0, 0);
    }

    #[test]
    fn free_dof_counts() {
        let m = build_mesh(1.0, 1.0, 1, 1).unwrap();
        assert_eq!(build_dofmap(&m).n_free(), 0);
        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        assert_eq!(build_dofmap(&m).n_free(), 3);
        let m = build_mesh(1.0, 1.0, 8, 8).unwrap();
        assert_eq!(build_dofmap(&m).n_free(), 147);
        for nx in 1..=8 {
            for ny in 1..=8 {
                let m = build_mesh(1.0, 1.0, nx, ny).unwrap();
                let expected = 3 * nx.saturating_sub(1) * ny.saturating_sub(1);
                assert_eq!(build_dofmap(&m).n_free(), expected, "{nx}x{ny}");
            }
        }
    }

    #[test]
    fn dof_numbering_roundtrips() {
        let m = build_mesh(1.0, 1.0, 4, 3).unwrap();
        let map = build_dofmap(&m);
        for f in 0..map.n_free() {
            let g = map.global_of_free(f);
            assert_eq!(map.free_of_global(g), Some(f));
            assert!(!m.is_boundary_node(g / NODE_DOFS));
        }
        for node in 0..m.num_nodes() {
            if m.is_boundary_node(node) {
                for comp in 0..NODE_DOFS {
                    assert_eq!(map.free_of_global(NODE_DOFS * node + comp), None);
                }
            }
        }
    }

    #[test]
    fn adjacent_cells_share_global_dofs() {
        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let map = build_dofmap(&m);
        // Cells 0 and 1 share the edge between nodes (1,0) and (1,1); local
        // corners 1, 2 of cell 0 coincide with corners 0, 3 of cell 1.
        let left = map.cell_global_dofs(0);
        let right = map.cell_global_dofs(1);
        for comp in 0..NODE_DOFS {
            assert_eq!(left[3 + comp], right[comp]);
            assert_eq!(left[6 + comp], right[9 + comp]);
        }
    }

    #[test]
    fn interpolation_matches_nodal_data() {
        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let map = build_dofmap(&m);
        let w = solution_sine2(1.0, 1.0);
        let u = interpolate_global(&w, &m, &map).unwrap();
        // The single interior node sits at the peak of the solution.
        assert!((u.values[0] - 1.0).abs() < 1e-14);
        assert!(u.values[1].abs() < 1e-12 && u.values[2].abs() < 1e-12);
    }

    /// Interpolating the piecewise-polynomial lift of a discrete field
    /// returns the same coefficients: nodal interpolation is a projection.
    #[test]
    fn interpolation_is_a_projection_on_the_discrete_space() {
        let m = build_mesh(1.0, 1.0, 3, 3).unwrap();
        let map = build_dofmap(&m);
        let basis = ReferenceBasis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(&map, &mut rng);
        let lifted = field_from_discrete(&u, &m, &map, &basis);
        let v = interpolate_global(&lifted, &m, &map).unwrap();
        for (a, b) in u.values.iter().zip(v.values.iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn eval_rejects_bad_cell_index() {
        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let map = build_dofmap(&m);
        let basis = ReferenceBasis::new().unwrap();
        let u = DiscreteField::zeros(&map);
        assert!(eval_discrete(&u, &m, &map, &basis, 4, 0.0, 0.0, 0, 0).is_err());
        assert_eq!(
            eval_discrete(&u, &m, &map, &basis, 3, 0.3, -0.2, 1, 1).unwrap(),
            0.0
        );
    }

    /// Value and gradient agree at a shared node no matter which adjacent
    /// cell evaluates them, because the cells read the same global slots.
    #[test]
    fn nodal_continuity_across_cells() {
        let m = build_mesh(1.0, 1.0, 3, 3).unwrap();
        let map = build_dofmap(&m);
        let basis = ReferenceBasis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_field(&map, &mut rng);
        // Node (1,1) is corner 2 of cell (0,0) and corner 0 of cell (1,1).
        let c_low = m.cell_index(0, 0);
        let c_high = m.cell_index(1, 1);
        for (a, b) in [(0, 0), (1, 0), (0, 1)] {
            let lo = eval_discrete(&u, &m, &map, &basis, c_low, 1.0, 1.0, a, b).unwrap();
            let hi = eval_discrete(&u, &m, &map, &basis, c_high, -1.0, -1.0, a, b).unwrap();
            assert!(
                (lo - hi).abs() <= 1e-12 * (1.0 + lo.abs()),
                "d({a},{b}): {lo:.15e} vs {hi:.15e}"
            );
        }
    }

    /// The space is continuous along whole edges but its normal derivative
    /// jumps away from the nodes: the element is nonconforming.
    #[test]
    fn normal_derivative_jumps_at_edge_midpoints() {
        let m = build_mesh(1.0, 1.0, 2, 2).unwrap();
        let map = build_dofmap(&m);
        let basis = ReferenceBasis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_field(&map, &mut rng);
        // Vertical edge x = 1/2 between cells (0,0) and (1,0), at its
        // midpoint y = 1/4: reference point (1, 0) from the left cell and
        // (-1, 0) from the right cell.
        let left = m.cell_index(0, 0);
        let right = m.cell_index(1, 0);
        let val_l = eval_discrete(&u, &m, &map, &basis, left, 1.0, 0.0, 0, 0).unwrap();
        let val_r = eval_discrete(&u, &m, &map, &basis, right, -1.0, 0.0, 0, 0).unwrap();
        assert!(
            (val_l - val_r).abs() <= 1e-12 * (1.0 + val_l.abs()),
            "trace must be continuous: {val_l:.15e} vs {val_r:.15e}"
        );
        let dn_l = eval_discrete(&u, &m, &map, &basis, left, 1.0, 0.0, 1, 0).unwrap();
        let dn_r = eval_discrete(&u, &m, &map, &basis, right, -1.0, 0.0, 1, 0).unwrap();
        assert!(
            (dn_l - dn_r).abs() > 1e-6,
            "normal derivative jump unexpectedly small: {dn_l:.15e} vs {dn_r:.15e}"
        );
    }

    /// Interpolation is exact at the nodes themselves: evaluating the
    /// interpolant at any node returns the field's nodal value.
    #[test]
    fn interpolation_is_nodally_exact() {
        let w = AnalyticField::from_fn("bubble", 1.0, 1.0, 1, |x, y, a, b| {
            let fx = match a {
                0 => x * (1.0 - x),
                1 => 1.0 - 2.0 * x,
                _ => unreachable!("order capped at one"),
            };
            let fy = match b {
                0 => y * (1.0 - y),
                1 => 1.0 - 2.0 * y,
                _ => unreachable!("order capped at one"),
            };
            16.0 * fx * fy
        });
        let m = build_mesh(1.0, 1.0, 4, 4).unwrap();
        let map = build_dofmap(&m);
        let basis = ReferenceBasis::new().unwrap();
        // The gradient of this function does not vanish at boundary nodes,
        // so the interpolant clamps it there; nodal values are unaffected.
        let u = interpolate_global(&w, &m, &map).unwrap();
        for j in 0..=m.ny() {
            for i in 0..=m.nx() {
                let node = m.node_index(i, j);
                let (x, y) = m.node_coords(node);
                let c = if i < m.nx() && j < m.ny() {
                    m.cell_index(i, j)
                } else {
                    m.locate(x, y).0
                };
                let (xi, eta) = m.cell(c).to_reference(x, y);
                let got = eval_discrete(&u, &m, &map, &basis, c, xi, eta, 0, 0).unwrap();
                assert!(
                    (got - w.value(x, y)).abs() <= 1e-12,
                    "node ({i},{j}): {got:.15e} vs {:.15e}",
                    w.value(x, y)
                );
            }
        }
    }
}
