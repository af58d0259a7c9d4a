//! Gauss-Legendre quadrature on the reference square and on physical cells.
//!
//! All integrals in the library go through these rules. An n-point rule
//! integrates polynomials of degree 2n-1 exactly, so the 4x4 tensor rule is
//! exact for every product of plate-element second derivatives and the 6x6
//! rule keeps quadrature error far below discretization error when smooth
//! fields are involved.

use crate::error::Error;
use crate::reference_element::CellGeometry;

/// Maximum supported number of 1D Gauss points.
pub const MAX_GAUSS_POINTS: usize = 16;

/// One-dimensional Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadRule1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrate a function over [-1, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Tensor-product rule on the reference square [-1, 1]^2.
#[derive(Debug, Clone)]
pub struct QuadRule2D {
    points: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

impl QuadRule2D {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrate a function of reference coordinates over [-1, 1]^2.
    pub fn integrate_ref<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(xi, eta), &w)| w * f(xi, eta))
            .sum()
    }
}

/// Evaluate the Legendre polynomial P_n and its derivative at x.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are Newton-refined roots of P_n starting from the Chebyshev guesses,
/// then symmetrized in pairs so the returned rule is exactly symmetric about
/// zero and sorted ascending.
pub fn gauss_rule_1d(n: usize) -> Result<QuadRule1D, Error> {
    if !(1..=MAX_GAUSS_POINTS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "gauss rule size must be in 1..={MAX_GAUSS_POINTS}, got {n}"
        )));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Only the lower half is computed; the rest follows by symmetry.
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess for the i-th root in descending order,
        // negated so index 0 is the leftmost node.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (p2, d2) = legendre_with_deriv(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
            let (_, d) = legendre_with_deriv(n, 0.0);
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = x;
        points[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadRule1D { points, weights })
}

/// Tensor product of two 1D rules; weight of point (i, j) is w_i * w_j.
pub fn tensor_rule(rx: &QuadRule1D, ry: &QuadRule1D) -> QuadRule2D {
    let mut points = Vec::with_capacity(rx.len() * ry.len());
    let mut weights = Vec::with_capacity(rx.len() * ry.len());
    for (&xi, &wx) in rx.points().iter().zip(rx.weights()) {
        for (&eta, &wy) in ry.points().iter().zip(ry.weights()) {
            points.push((xi, eta));
            weights.push(wx * wy);
        }
    }
    QuadRule2D { points, weights }
}

/// The n x n tensor-product Gauss rule on the reference square.
pub fn gauss_rule_2d(n: usize) -> Result<QuadRule2D, Error> {
    let r = gauss_rule_1d(n)?;
    Ok(tensor_rule(&r, &r))
}

/// Integrate a function of physical coordinates over one cell.
///
/// The cell maps to the reference square by xi = (x - x_c)/h_x,
/// eta = (y - y_c)/h_y, so the Jacobian factor is h_x * h_y.
pub fn integrate_on_cell<F: FnMut(f64, f64) -> f64>(
    rule: &QuadRule2D,
    cell: &CellGeometry,
    mut integrand: F,
) -> f64 {
    let jac = cell.hx * cell.hy;
    let sum: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&(xi, eta), &w)| {
            let (x, y) = cell.to_physical(xi, eta);
            w * integrand(x, y)
        })
        .sum();
    jac * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Analytic moment of t^k over [-1, 1].
    fn monomial_moment(k: usize) -> f64 {
        if k.is_multiple_of(2) {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        }
    }

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_rule_1d(1).unwrap();
        assert_eq!(r.points(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);
    }

    #[test]
    fn two_point_rule_matches_legendre_roots() {
        let r = gauss_rule_1d(2).unwrap();
        assert_abs_diff_eq!(r.points()[0], -0.5773502691896257, epsilon = 1e-15);
        assert_abs_diff_eq!(r.points()[1], 0.5773502691896257, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        // Roots of P_3 are 0 and +-sqrt(3/5); weights 8/9 and 5/9.
        let r = gauss_rule_1d(3).unwrap();
        let x = (3.0f64 / 5.0).sqrt();
        assert_abs_diff_eq!(r.points()[0], -x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.points()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.points()[2], x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[2], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn rule_size_out_of_range_is_rejected() {
        assert!(gauss_rule_1d(0).is_err());
        assert!(gauss_rule_1d(MAX_GAUSS_POINTS + 1).is_err());
    }

    #[test]
    fn weights_positive_sorted_symmetric_and_sum_to_two() {
        for n in 1..=MAX_GAUSS_POINTS {
            let r = gauss_rule_1d(n).unwrap();
            assert!(r.weights().iter().all(|&w| w > 0.0));
            let sum: f64 = r.weights().iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-14);
            for i in 1..n {
                assert!(r.points()[i] > r.points()[i - 1]);
            }
            for i in 0..n {
                assert_eq!(r.points()[i], -r.points()[n - 1 - i]);
                assert_eq!(r.weights()[i], r.weights()[n - 1 - i]);
            }
        }
    }

    #[test]
    fn monomials_integrated_exactly_up_to_degree_2n_minus_1() {
        for n in 1..=MAX_GAUSS_POINTS {
            let r = gauss_rule_1d(n).unwrap();
            for k in 0..2 * n {
                let got = r.integrate(|t| t.powi(k as i32));
                assert_abs_diff_eq!(got, monomial_moment(k), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn random_polynomials_integrated_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=MAX_GAUSS_POINTS {
            let rx = gauss_rule_1d(n).unwrap();
            let rule = tensor_rule(&rx, &rx);
            let deg = 2 * n - 1;
            let coeffs: Vec<Vec<f64>> = (0..=deg)
                .map(|_| (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let exact: f64 = coeffs
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(move |(j, &c)| c * monomial_moment(i) * monomial_moment(j))
                })
                .sum();
            let got = rule.integrate_ref(|xi, eta| {
                let mut acc = 0.0;
                for (i, row) in coeffs.iter().enumerate() {
                    for (j, &c) in row.iter().enumerate() {
                        acc += c * xi.powi(i as i32) * eta.powi(j as i32);
                    }
                }
                acc
            });
            let scale = 1.0 + exact.abs();
            assert!(
                (got - exact).abs() <= 1e-12 * scale,
                "n={n}: got {got}, exact {exact}"
            );
        }
    }

    #[test]
    fn tensor_rule_of_one_point_rules() {
        let r1 = gauss_rule_1d(1).unwrap();
        let t = tensor_rule(&r1, &r1);
        assert_eq!(t.points(), &[(0.0, 0.0)]);
        assert_eq!(t.weights(), &[4.0]);
    }

    #[test]
    fn tensor_rule_of_two_point_rules_has_unit_weights() {
        let r2 = gauss_rule_1d(2).unwrap();
        let t = tensor_rule(&r2, &r2);
        assert_eq!(t.len(), 4);
        for &w in t.weights() {
            assert_abs_diff_eq!(w, 1.0, epsilon = 1e-15);
        }
        let sum: f64 = t.weights().iter().sum();
        assert_abs_diff_eq!(sum, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_rule_integrates_xi2_eta2() {
        // Integral of xi^2 eta^2 over the square is (2/3)^2.
        let r3 = gauss_rule_1d(3).unwrap();
        let t = tensor_rule(&r3, &r3);
        let got = t.integrate_ref(|xi, eta| xi * xi * eta * eta);
        assert_abs_diff_eq!(got, 4.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_integrates_to_cell_area() {
        let rule = gauss_rule_2d(2).unwrap();
        let cell = CellGeometry::new(0.5, 0.5, 0.5, 0.5);
        let got = integrate_on_cell(&rule, &cell, |_, _| 1.0);
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-14);

        let cell = CellGeometry::new(1.0, -2.0, 0.3, 0.7);
        let got = integrate_on_cell(&rule, &cell, |_, _| 1.0);
        assert_abs_diff_eq!(got, 4.0 * 0.3 * 0.7, epsilon = 1e-14);
    }

    #[test]
    fn linear_integrand_gives_midpoint_value_times_area() {
        let rule = gauss_rule_2d(3).unwrap();
        let cell = CellGeometry::new(0.5, 0.5, 0.25, 0.25);
        let area = 4.0 * cell.hx * cell.hy;
        let got = integrate_on_cell(&rule, &cell, |x, _| x);
        assert_abs_diff_eq!(got, 0.5 * area, epsilon = 1e-14);
    }

    #[test]
    fn sine_squared_over_unit_square_on_mesh() {
        // integral of sin^2(pi x) sin^2(pi y) over (0,1)^2 is 1/4.
        let rule = gauss_rule_2d(6).unwrap();
        let n = 4;
        let h = 1.0 / (2.0 * n as f64);
        let mut total = 0.0;
        for j in 0..n {
            for i in 0..n {
                let cell = CellGeometry::new((2 * i + 1) as f64 * h, (2 * j + 1) as f64 * h, h, h);
                total += integrate_on_cell(&rule, &cell, |x, y| {
                    let sx = (std::f64::consts::PI * x).sin();
                    let sy = (std::f64::consts::PI * y).sin();
                    sx * sx * sy * sy
                });
            }
        }
        assert_abs_diff_eq!(total, 0.25, epsilon = 1e-10);
    }
}
