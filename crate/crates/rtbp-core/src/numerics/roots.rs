//! Bracketed scalar root finding with a derivative report.
//!
//! The iteration is a guarded secant method: each step proposes a secant
//! point from the two most recent iterates, falls back to bisection whenever
//! the proposal leaves the bracket or fails to shrink it geometrically, and
//! therefore inherits bisection's unconditional convergence while usually
//! converging superlinearly. Expensive integrand-backed functions (each
//! evaluation may be a full quadrature or manifold solve) make the eval
//! count the quantity to optimise.

use crate::error::{Error, Result};

/// Root, residual, and slope information returned by [`find_zero`].
#[derive(Debug, Clone, Copy)]
pub struct RootReport {
    /// Abscissa of the root.
    pub root: f64,
    /// Function value at the root (should be at residual level).
    pub f_root: f64,
    /// Central-difference derivative at the root, step
    /// `h = 1e-3 * (1 + |root|)` — wide enough that quadrature noise in the
    /// function does not dominate the quotient.
    pub derivative: f64,
    /// Number of function evaluations consumed (including the derivative
    /// stencil).
    pub n_eval: usize,
}

/// Find a zero of `f` inside `bracket`, to absolute abscissa tolerance `tol`.
///
/// The endpoints must straddle a sign change (an exact zero at an endpoint
/// is accepted); otherwise [`Error::NoSignChange`] is returned. The returned
/// report carries a central-difference estimate of `f'` at the root.
pub fn find_zero<F>(f: &mut F, bracket: (f64, f64), tol: f64) -> Result<RootReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Domain(format!("find_zero: empty bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("find_zero: tol = {tol} must be positive")));
    }
    let mut n_eval = 0usize;
    let mut f_lo = f(lo)?;
    n_eval += 1;
    let mut f_hi = f(hi)?;
    n_eval += 1;

    let finish = |root: f64, f_root: f64, n_eval: &mut usize, f: &mut F| -> Result<RootReport> {
        let h = 1e-3 * (1.0 + root.abs());
        let fp = f(root + h)?;
        let fm = f(root - h)?;
        *n_eval += 2;
        Ok(RootReport {
            root,
            f_root,
            derivative: (fp - fm) / (2.0 * h),
            n_eval: *n_eval,
        })
    };

    if f_lo == 0.0 {
        return finish(lo, f_lo, &mut n_eval, f);
    }
    if f_hi == 0.0 {
        return finish(hi, f_hi, &mut n_eval, f);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }

    // Illinois false position: the proposal interpolates the two bracket
    // ends; when the same end is replaced twice in a row, the stale opposite
    // end gets its residual weight halved so it cannot pin the interpolant.
    // Both ends then converge to the root superlinearly (plain false
    // position or a guarded secant pins one end and degenerates to
    // bisection-rate bracket shrinkage).
    let mut w_lo = 1.0f64;
    let mut w_hi = 1.0f64;
    let mut last_side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol {
            // Pick the endpoint with the smaller residual for the report.
            let (root, f_root) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
            return finish(root, f_root, &mut n_eval, f);
        }
        let g_lo = w_lo * f_lo;
        let g_hi = w_hi * f_hi;
        let mut x_next = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x_next > lo && x_next < hi) {
            x_next = 0.5 * (lo + hi);
        }
        let f_next = f(x_next)?;
        n_eval += 1;
        if f_next == 0.0 {
            return finish(x_next, f_next, &mut n_eval, f);
        }
        if f_next.signum() == f_lo.signum() {
            lo = x_next;
            f_lo = f_next;
            if last_side == -1 {
                w_hi *= 0.5;
            }
            w_lo = 1.0;
            last_side = -1;
        } else {
            hi = x_next;
            f_hi = f_next;
            if last_side == 1 {
                w_lo *= 0.5;
            }
            w_hi = 1.0;
            last_side = 1;
        }
    }
    Err(Error::MaxIterExceeded {
        what: "find_zero",
        iters: 200,
        residual: (hi - lo).abs(),
    })
}
