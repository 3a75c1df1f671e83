//! The unperturbed separatrix of the Duffing oscillator and the moving frame
//! attached to it.
//!
//! The reduced oscillator `X'' = X - X^3` has the homoclinic solution
//!
//! ```text
//! a(tau) = sqrt(2) sech(tau),      b(tau) = a'(tau) = -sqrt(2) sinh(tau) / cosh(tau)^2,
//! ```
//!
//! and the fast angle conjugate to it on the energy level `eps` is
//!
//! ```text
//! psi(tau) = 2 atan(sinh tau) - sinh(3 tau) / (24 eps^3) - 3 sinh(tau) / (8 eps^3),
//! psi'(tau) = 2 / cosh(tau) - cosh(tau)^3 / (2 eps^3).
//! ```
//!
//! Deviations `(x, y)` from `(a, b)` are measured in the frame spanned by the
//! tangent `(b, b')` and a second solution of the variational equation built
//! from
//!
//! ```text
//! h      = (3/2) (tanh tau + tau sech^2 tau),
//! H      = 1 - h tanh tau,
//! Htilde = (1 - 2 sech^2 tau) h - 2 tanh tau,
//! ```
//!
//! giving frame coordinates `M = (b' x - b y) / a` and `W = Htilde x - H y`
//! with unit "Wronskian" `b Htilde - b' H = a`. The scaled amplitudes
//! `MM = M / (eps^3 sqrt(eps) a)` and likewise for `W` are the natural O(1)
//! unknowns of the manifold solver.
//!
//! All formulas are evaluated through `E = exp(-|tau|)`, which keeps every
//! intermediate bounded by a small power of `1/E` and makes the routines
//! valid on the whole working range `|tau| <= TAU_MAX` without branching on
//! overflow.

use crate::error::{Error, Result};

/// Largest `|tau|` the frame evaluator accepts. `exp(3 * TAU_MAX)` must stay
/// comfortably inside `f64` range; 60 leaves two hundred orders of magnitude
/// of headroom while covering every truncation window used in practice.
pub const TAU_MAX: f64 = 60.0;

/// All separatrix and frame data at one point `tau`, on the level `eps`.
///
/// Produced by [`eval_frame`]; consumed by the coordinate maps below and by
/// the quadratures of the manifold solver and the splitting integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    /// Evaluation point.
    pub tau: f64,
    /// Separatrix amplitude `a = sqrt(2) sech(tau)`; positive, even.
    pub a: f64,
    /// Separatrix velocity `b = a'`; odd, `b(0) = 0`.
    pub b: f64,
    /// `b' = a - a^3`, evaluated through the identity rather than by
    /// differencing, so the Wronskian relations hold to machine precision.
    pub bprime: f64,
    /// Fast angle `psi(tau)` on the level `eps`; odd, `psi(0) = 0`.
    pub psi: f64,
    /// Particular solution `h` of `h' = (2 b / a) h + 3`; odd, bounded.
    pub h: f64,
    /// Frame function `H = 1 - h tanh(tau)`; even, `H(0) = 1`.
    pub big_h: f64,
    /// Frame function `Htilde = (1 - 2 sech^2) h - 2 tanh`; odd.
    pub big_h_tilde: f64,
    /// `tanh(tau) = -b / a`, kept explicitly so the inverse frame map never
    /// divides by the exponentially small `a`.
    pub tanh_tau: f64,
    /// `sech^2(tau) = a^2 / 2`, same purpose.
    pub sech_sq: f64,
}

/// Evaluate separatrix, fast angle, and frame functions at `tau` on level `eps`.
///
/// `eps` must be positive and `|tau| <= TAU_MAX`; both are reported as domain
/// errors otherwise. The result is exact in the sense that internal
/// identities (`b' = a - a^3`, `b^2 = a^2 - a^4/2`, `b Htilde - b' H = a`)
/// hold to rounding error by construction.
pub fn eval_frame(tau: f64, eps: f64) -> Result<FrameSample> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eval_frame: eps = {eps} must be positive")));
    }
    if !tau.is_finite() || tau.abs() > TAU_MAX {
        return Err(Error::Domain(format!(
            "eval_frame: |tau| = {} exceeds {TAU_MAX}",
            tau.abs()
        )));
    }
    let s = if tau < 0.0 { -1.0 } else { 1.0 };
    let e = (-tau.abs()).exp(); // in (0, 1]
    let e2 = e * e;
    let one_plus = 1.0 + e2;
    let one_minus = 1.0 - e2;

    let sech = 2.0 * e / one_plus;
    let sech_sq = sech * sech;
    let tanh_tau = s * one_minus / one_plus;
    let sinh = s * one_minus / (2.0 * e);
    // sinh(3 tau) via E^3; E^3 >= exp(-180) is far above the f64 underflow floor.
    let e3 = e * e2;
    let sinh3 = s * (1.0 - e3 * e3) / (2.0 * e3);

    let sqrt2 = std::f64::consts::SQRT_2;
    let a = sqrt2 * sech;
    let b = -sqrt2 * sinh * sech_sq;
    let bprime = a - a * a * a;

    let eps3 = eps * eps * eps;
    let psi = 2.0 * sinh.atan() - sinh3 / (24.0 * eps3) - 3.0 * sinh / (8.0 * eps3);

    let h = 1.5 * (tanh_tau + tau * sech_sq);
    let big_h = 1.0 - h * tanh_tau;
    let big_h_tilde = (1.0 - 2.0 * sech_sq) * h - 2.0 * tanh_tau;

    Ok(FrameSample {
        tau,
        a,
        b,
        bprime,
        psi,
        h,
        big_h,
        big_h_tilde,
        tanh_tau,
        sech_sq,
    })
}

/// Derivative of the fast angle, `psi'(tau) = 2 / cosh - cosh^3 / (2 eps^3)`.
///
/// Used to size oscillatory quadrature panels; monotone decreasing in
/// `|tau|` and of size `exp(3 |tau|) / (16 eps^3)` in the tails.
pub fn psi_prime(tau: f64, eps: f64) -> f64 {
    let e = (-tau.abs()).exp();
    let cosh = (1.0 + e * e) / (2.0 * e);
    2.0 / cosh - cosh * cosh * cosh / (2.0 * eps * eps * eps)
}

/// Frame coordinates `(M, W)` of a deviation `(x, y)` from the separatrix.
///
/// `M = (b' x - b y) / a` (tangential) and `W = Htilde x - H y` (transverse).
/// The division by `a` is carried out through `b / a = -tanh` and
/// `b' / a = 1 - 2 sech^2`, so the map stays accurate in the far tails.
pub fn mw_from_xy(x: f64, y: f64, frame: &FrameSample) -> (f64, f64) {
    let bprime_over_a = 1.0 - 2.0 * frame.sech_sq;
    let b_over_a = -frame.tanh_tau;
    let m = bprime_over_a * x - b_over_a * y;
    let w = frame.big_h_tilde * x - frame.big_h * y;
    (m, w)
}

/// Inverse of [`mw_from_xy`]: `x = (b/a) W - H M`, `y = (b'/a) W - Htilde M`.
///
/// Uses the same division-free tangent/normal quotients, so the pair of maps
/// round-trips to machine precision for any `|tau| <= TAU_MAX`.
pub fn xy_from_mw(m: f64, w: f64, frame: &FrameSample) -> (f64, f64) {
    let bprime_over_a = 1.0 - 2.0 * frame.sech_sq;
    let b_over_a = -frame.tanh_tau;
    let x = b_over_a * w - frame.big_h * m;
    let y = bprime_over_a * w - frame.big_h_tilde * m;
    (x, y)
}

/// Scale frame coordinates to the O(1) amplitudes of the manifold solver:
/// `MM = M / (eps^3 sqrt(eps) a)`, `WW = W / (eps^3 sqrt(eps) a)`.
///
/// Returns a domain error when the scale factor degenerates (it cannot for
/// `|tau| <= TAU_MAX` and `eps > 0`, but the guard keeps misuse loud).
pub fn scale_mw(m: f64, w: f64, frame: &FrameSample, eps: f64) -> Result<(f64, f64)> {
    let scale = eps.powi(3) * eps.sqrt() * frame.a;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "scale_mw: degenerate scale eps^3 sqrt(eps) a = {scale:e} at tau = {}",
            frame.tau
        )));
    }
    Ok((m / scale, w / scale))
}

/// Inverse of [`scale_mw`].
pub fn unscale_mw(mm: f64, ww: f64, frame: &FrameSample, eps: f64) -> Result<(f64, f64)> {
    let scale = eps.powi(3) * eps.sqrt() * frame.a;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "unscale_mw: degenerate scale eps^3 sqrt(eps) a = {scale:e} at tau = {}",
            frame.tau
        )));
    }
    Ok((mm * scale, ww * scale))
}
