//! Symmetric banded matrices with Cholesky and conjugate-gradient solvers.
//!
//! The stiffness matrix of a lexicographically numbered rectangular mesh has
//! all its nonzeros within a fixed distance of the diagonal, so a packed
//! diagonal-major layout stores it densely inside the band, the Cholesky
//! factor fills in nothing outside it, and factorization costs O(n b^2).

use crate::error::Error;

/// Symmetric matrix with entries confined to `|i - j| <= bandwidth`.
///
/// Only the upper triangle is stored: `data[d * n + i]` holds `A[i, i + d]`
/// for diagonal offsets `d = 0..=bandwidth`.
#[derive(Clone, Debug)]
pub struct SymBandMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bandwidth = if n == 0 { 0 } else { bandwidth.min(n - 1) };
        SymBandMatrix {
            n,
            bandwidth,
            data: vec![0.0; (bandwidth + 1) * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `A[i, j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            return 0.0;
        }
        self.data[d * self.n + lo]
    }

    /// Adds `v` to `A[i, j]` (and by symmetry `A[j, i]`). The entry must lie
    /// inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(
            d <= self.bandwidth,
            "entry ({i},{j}) outside bandwidth {}",
            self.bandwidth
        );
        self.data[d * self.n + lo] += v;
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for d in 0..=self.bandwidth {
            let row = &self.data[d * self.n..d * self.n + self.n.saturating_sub(d)];
            if d == 0 {
                for (i, v) in row.iter().enumerate() {
                    y[i] += v * x[i];
                }
            } else {
                for (i, v) in row.iter().enumerate() {
                    y[i] += v * x[i + d];
                    y[i + d] += v * x[i];
                }
            }
        }
    }

    /// Residual `b - A x` in the Euclidean norm.
    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        ax.iter()
            .zip(b.iter())
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Cholesky factorization `A = L L^T` with the factor confined to the
    /// same band. Fails on the first non-positive pivot, which for an
    /// assembled stiffness matrix signals a boundary-condition or assembly
    /// bug rather than roundoff.
    pub fn cholesky(&self) -> Result<BandCholesky, Error> {
        let n = self.n;
        let bw = self.bandwidth;
        // factor[d * n + col] = L[col + d, col]
        let mut factor = vec![0.0; (bw + 1) * n];
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let k_lo = j.saturating_sub(bw);
            let mut sum = 0.0;
            for k in k_lo..j {
                let l_jk = factor[(j - k) * n + k];
                sum += l_jk * l_jk;
            }
            let pivot = self.data[j] - sum;
            if pivot <= 0.0 {
                return Err(Error::NotPositiveDefinite { index: j, pivot });
            }
            min_pivot = min_pivot.min(pivot);
            let l_jj = pivot.sqrt();
            factor[j] = l_jj;
            let i_hi = (j + bw).min(n.saturating_sub(1));
            for i in j + 1..=i_hi {
                let k_lo = i.saturating_sub(bw).max(k_lo);
                let mut sum = 0.0;
                for k in k_lo..j {
                    sum += factor[(i - k) * n + k] * factor[(j - k) * n + k];
                }
                factor[(i - j) * n + j] = (self.get(i, j) - sum) / l_jj;
            }
        }
        if n == 0 {
            min_pivot = 0.0;
        }
        Ok(BandCholesky {
            n,
            bandwidth: bw,
            factor,
            min_pivot,
        })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bandwidth: usize,
    /// `factor[d * n + col] = L[col + d, col]`.
    factor: Vec<f64>,
    min_pivot: f64,
}

impl BandCholesky {
    /// Smallest diagonal pivot `d_j = A[j,j] - sum L[j,k]^2` encountered;
    /// positivity of all pivots certifies positive definiteness.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Factor entry `L[i, j]`; zero outside the lower band.
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        if i < j || i - j > self.bandwidth {
            return 0.0;
        }
        self.factor[(i - j) * self.n + j]
    }

    /// Solves `A x = b` by forward and backward substitution.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let bw = self.bandwidth;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..n {
            let j_lo = i.saturating_sub(bw);
            let mut s = x[i];
            for j in j_lo..i {
                s -= self.factor[(i - j) * n + j] * x[j];
            }
            x[i] = s / self.factor[i];
        }
        // L^T x = y
        for i in (0..n).rev() {
            let j_hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=j_hi {
                s -= self.factor[(j - i) * n + i] * x[j];
            }
            x[i] = s / self.factor[i];
        }
        x
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for an SPD banded matrix.
///
/// Stops when the true residual satisfies `|b - A x| <= tol |b|`. The final
/// test recomputes the residual from scratch so that the recurrence's drift
/// cannot fake convergence; when the recurrence converges but the true
/// residual does not confirm, the iteration restarts from the recomputed
/// residual. Two consecutive restarts without progress report the best
/// achieved residual as a convergence failure instead of iterating forever.
pub fn jacobi_pcg(
    a: &SymBandMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats), Error> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 || n == 0 {
        return Ok((
            vec![0.0; n],
            CgStats {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let mut inv_diag = Vec::with_capacity(n);
    for i in 0..n {
        let d = a.get(i, i);
        if d <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: i, pivot: d });
        }
        inv_diag.push(1.0 / d);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
    let mut ap = vec![0.0; n];
    let mut last_restart_res = f64::INFINITY;
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(p, q)| p * q).sum();
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: it,
                pivot: pap,
            });
        }
        let alpha = rz / pap;
        for ((x, r), (p, q)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *x += alpha * p;
            *r -= alpha * q;
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= tol * b_norm {
            let true_res = a.residual_norm(&x, b) / b_norm;
            if true_res <= tol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        rel_residual: true_res,
                    },
                ));
            }
            // The recurrence drifted from the true residual. Restart from
            // the recomputed one, unless restarting has stopped helping.
            if true_res >= 0.5 * last_restart_res {
                return Err(Error::NoConvergence {
                    max_iter: it,
                    residual: true_res,
                });
            }
            last_restart_res = true_res;
            a.matvec(&x, &mut ap);
            for ((r, b), q) in r.iter_mut().zip(b).zip(&ap) {
                *r = b - q;
            }
            for (z, (r, d)) in z.iter_mut().zip(r.iter().zip(&inv_diag)) {
                *z = r * d;
            }
            rz = r.iter().zip(&z).map(|(r, z)| r * z).sum();
            p.copy_from_slice(&z);
            continue;
        }
        for (z, (r, d)) in z.iter_mut().zip(r.iter().zip(&inv_diag)) {
            *z = r * d;
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
        if rz_new <= 0.0 {
            // An exactly zero (or numerically indefinite) residual cannot
            // drive the recurrence further; report what was reached.
            let true_res = a.residual_norm(&x, b) / b_norm;
            if true_res <= tol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        rel_residual: true_res,
                    },
                ));
            }
            return Err(Error::NoConvergence {
                max_iter: it,
                residual: true_res,
            });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (p, z) in p.iter_mut().zip(&z) {
            *p = z + beta * *p;
        }
    }
    Err(Error::NoConvergence {
        max_iter,
        residual: a.residual_norm(&x, b) / b_norm,
    })
}
