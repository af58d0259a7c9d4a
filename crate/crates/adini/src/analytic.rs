//! Closed-form manufactured solutions and their derivatives.
//!
//! A manufactured solution is a smooth field on the rectangle
//! `(0, lx) x (0, ly)` whose partial derivatives are known in closed form.
//! The plate solver consumes the order-4 biharmonic right-hand side
//! `f = w_xxxx + 2 w_xxyy + w_yyyy`, and the diagnostics consume mixed
//! derivatives up to total order 4, so a field carries an explicit bound on
//! the derivative orders it can produce.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Error;
use crate::mesh::Mesh;
use crate::quadrature::{integrate_on_cell, QuadRule2D};

type DerivFn = dyn Fn(f64, f64, u32, u32) -> f64 + Send + Sync;

/// A scalar field with closed-form mixed partial derivatives.
///
/// Evaluation requests the derivative order explicitly: `eval(x, y, a, b)`
/// returns the mixed partial taken `a` times in `x` and `b` times in `y`.
/// Orders with `a + b > max_order` are rejected rather than silently
/// approximated.
#[derive(Clone)]
pub struct AnalyticField {
    name: String,
    lx: f64,
    ly: f64,
    max_order: u32,
    eval_fn: Arc<DerivFn>,
}

impl AnalyticField {
    /// Wraps a closure that produces mixed partial derivatives on demand.
    ///
    /// The closure receives `(x, y, dx, dy)` and must return the exact
    /// derivative for every order with `dx + dy <= max_order`.
    pub fn from_fn<F>(name: &str, lx: f64, ly: f64, max_order: u32, f: F) -> Self
    where
        F: Fn(f64, f64, u32, u32) -> f64 + Send + Sync + 'static,
    {
        AnalyticField {
            name: name.to_string(),
            lx,
            ly,
            max_order,
            eval_fn: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Domain extents `(lx, ly)`; the field lives on `(0, lx) x (0, ly)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Returns an error unless the field can produce all derivatives of
    /// total order `order`.
    pub fn require_order(&self, order: u32) -> Result<(), Error> {
        if order > self.max_order {
            return Err(Error::UnsupportedDerivative {
                name: self.name.clone(),
                dx: order,
                dy: 0,
            });
        }
        Ok(())
    }

    /// Mixed partial derivative of order `(dx, dy)` at a point.
    pub fn eval(&self, x: f64, y: f64, dx: u32, dy: u32) -> Result<f64, Error> {
        if dx + dy > self.max_order {
            return Err(Error::UnsupportedDerivative {
                name: self.name.clone(),
                dx,
                dy,
            });
        }
        Ok((self.eval_fn)(x, y, dx, dy))
    }

    /// Point value, always available.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.eval_fn)(x, y, 0, 0)
    }

    /// Checks the order once and returns a plain closure for hot loops.
    pub fn deriv_fn(&self, dx: u32, dy: u32) -> Result<impl Fn(f64, f64) -> f64 + '_, Error> {
        if dx + dy > self.max_order {
            return Err(Error::UnsupportedDerivative {
                name: self.name.clone(),
                dx,
                dy,
            });
        }
        let f = &self.eval_fn;
        Ok(move |x, y| f(x, y, dx, dy))
    }
}

/// k-th derivative of `t -> sin^2(pi t / l)`.
///
/// Writing `sin^2(pi t / l) = (1 - cos(omega t)) / 2` with `omega = 2 pi / l`
/// gives the k-th derivative `-(omega^k / 2) cos(omega t + k pi / 2)`, which
/// cycles through cos and sin with period four.
fn sine_sq_deriv(t: f64, omega: f64, k: u32) -> f64 {
    if k == 0 {
        return (1.0 - (omega * t).cos()) / 2.0;
    }
    let amp = 0.5 * omega.powi(k as i32);
    match k % 4 {
        0 => -amp * (omega * t).cos(),
        1 => amp * (omega * t).sin(),
        2 => amp * (omega * t).cos(),
        _ => -amp * (omega * t).sin(),
    }
}

/// k-th derivative of the normalized quartic bump
/// `t -> 16 t^2 (l - t)^2 / l^4`, which equals one at `t = l / 2` and has a
/// double root at each endpoint.
fn quartic_bump_deriv(t: f64, l: f64, k: u32) -> f64 {
    let s = 16.0 / l.powi(4);
    match k {
        0 => s * (l * l * t * t - 2.0 * l * t * t * t + t * t * t * t),
        1 => s * (2.0 * l * l * t - 6.0 * l * t * t + 4.0 * t * t * t),
        2 => s * (2.0 * l * l - 12.0 * l * t + 12.0 * t * t),
        3 => s * (24.0 * t - 12.0 * l),
        4 => s * 24.0,
        _ => 0.0,
    }
}

/// Smooth clamped-plate solution `sin^2(pi x / lx) sin^2(pi y / ly)`.
///
/// Vanishes together with its gradient on the whole boundary and has
/// non-vanishing third-order mixed derivatives, so convergence studies built
/// on it exercise the consistency error of the element.
pub fn solution_sine2(lx: f64, ly: f64) -> AnalyticField {
    let omega_x = 2.0 * PI / lx;
    let omega_y = 2.0 * PI / ly;
    AnalyticField::from_fn("sine2", lx, ly, 4, move |x, y, a, b| {
        sine_sq_deriv(x, omega_x, a) * sine_sq_deriv(y, omega_y, b)
    })
}

/// Polynomial clamped-plate solution
/// `16^2 [x (lx - x)]^2 [y (ly - y)]^2 / (lx^4 ly^4)`.
///
/// A separable quartic with double roots on the boundary, normalized to one
/// at the center of the domain.
pub fn solution_poly4(lx: f64, ly: f64) -> AnalyticField {
    AnalyticField::from_fn("poly4", lx, ly, 4, move |x, y, a, b| {
        quartic_bump_deriv(x, lx, a) * quartic_bump_deriv(y, ly, b)
    })
}

/// Names accepted by [`solution_by_name`].
pub fn solution_names() -> &'static [&'static str] {
    &["sine2", "poly4"]
}

/// Looks up a manufactured solution by name on the given rectangle.
pub fn solution_by_name(name: &str, lx: f64, ly: f64) -> Option<AnalyticField> {
    match name {
        "sine2" => Some(solution_sine2(lx, ly)),
        "poly4" => Some(solution_poly4(lx, ly)),
        _ => None,
    }
}

/// Biharmonic right-hand side `f = w_xxxx + 2 w_xxyy + w_yyyy` of a field
/// with order-4 derivatives.
pub fn biharmonic_rhs(w: &AnalyticField) -> Result<AnalyticField, Error> {
    w.require_order(4)?;
    let (lx, ly) = w.domain();
    let name = format!("biharmonic({})", w.name());
    let inner = w.clone();
    Ok(AnalyticField::from_fn(
        &name,
        lx,
        ly,
        0,
        move |x, y, _, _| {
            let f = &inner.eval_fn;
            f(x, y, 4, 0) + 2.0 * f(x, y, 2, 2) + f(x, y, 0, 4)
        },
    ))
}

/// Evaluates both sides of the weak form `(D^2 w, D^2 v) = (f, v)` for smooth
/// fields by cell-wise quadrature and returns `(lhs, rhs)`.
///
/// With `f = biharmonic_rhs(w)` and `v` vanishing to first order on the
/// boundary the two sides agree up to quadrature error, which makes this a
/// direct check that the right-hand side matches the bilinear form.
pub fn weak_form_check(
    w: &AnalyticField,
    f: &AnalyticField,
    v: &AnalyticField,
    mesh: &Mesh,
    rule: &QuadRule2D,
) -> Result<(f64, f64), Error> {
    w.require_order(2)?;
    v.require_order(2)?;
    let w_xx = w.deriv_fn(2, 0)?;
    let w_xy = w.deriv_fn(1, 1)?;
    let w_yy = w.deriv_fn(0, 2)?;
    let v_xx = v.deriv_fn(2, 0)?;
    let v_xy = v.deriv_fn(1, 1)?;
    let v_yy = v.deriv_fn(0, 2)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for cell in mesh.cells() {
        lhs += integrate_on_cell(rule, cell, |x, y| {
            w_xx(x, y) * v_xx(x, y) + 2.0 * w_xy(x, y) * v_xy(x, y) + w_yy(x, y) * v_yy(x, y)
        });
        rhs += integrate_on_cell(rule, cell, |x, y| f.value(x, y) * v.value(x, y));
    }
    Ok((lhs, rhs))
}
