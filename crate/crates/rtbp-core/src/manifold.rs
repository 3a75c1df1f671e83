//! Stable and unstable manifold solutions by Picard iteration on integral
//! equations.
//!
//! The deviation `(x, y)` of a manifold solution from the separatrix
//! `(a, b)`, written in the moving frame of [`crate::homoclinic`], satisfies
//! a pair of integral equations whose kernels are the exact forcing terms
//! `(S, P, Q)` of the reduced oscillator:
//!
//! ```text
//! M(tau)     = -(1/a) Int_tau^inf (b' P + b Q) dsigma        (stable)
//! M(tau)     = +(1/a) Int_{-inf}^tau (b' P + b Q) dsigma     (unstable)
//! W(tau)     = a Int_0^tau (Htilde P - H Q) / a dsigma
//! Theta(tau) = Int_0^tau sqrt(2) S / (eps^3 U^3 X^3 a^3) dsigma
//! ```
//!
//! The iteration runs on mass-ratio-normalized amplitudes
//!
//! ```text
//! Mhat = MM / rho,   What = WW / rho,      MM = M / (eps^3 sqrt(eps) a),
//! ```
//!
//! for which the map stays non-degenerate as `rho -> 0`: both `P` and `Q`
//! carry an overall factor `rho`, so `Phat = P / rho` and `Qhat = Q / rho`
//! have finite limits and the normalized fixed point at `rho = 0` is exactly
//! the first-order (Melnikov) manifold pair. The splitting distance
//! `(MM_stable(0) - MM_unstable(0)) / rho = Mhat_s(0) - Mhat_u(0)` therefore
//! needs no division by a small parameter at any `rho`.
//!
//! Numerical scheme (shared by the seed and every Picard step):
//!
//! * a geometric grid of [`GRID_N`] intervals on `[0, GRID_T]` (reflected
//!   for the unstable side), first step [`GRID_H0`];
//! * between adjacent nodes, Gauss-Legendre panels sized so each carries at
//!   most [`PANEL_PHASE`] radians of the oscillation `2 psi` and never more
//!   than [`PANEL_WIDTH_MAX`] in width;
//! * a truncation point ("cut") where the non-stationary-phase bound
//!   `24 eps^2 a^4 / (2 |psi'|)` falls below [`CUT_TOL`]; beyond it the
//!   oscillatory `M`/`W` kernels are dropped (their true contribution is
//!   below the bound) while the secularly growing angle kernel is still
//!   integrated to the end of the grid;
//! * prefix/suffix sums of the panel integrals give all node values of the
//!   three integrals in one pass;
//! * iterates are stored at the nodes as `(Mhat, What, a^3 Theta)` — the
//!   triple that stays O(1) over the whole grid — and interpolated at
//!   quadrature points by a local 4-point (cubic) Lagrange rule.
//!
//! Convergence is measured in the weighted norm
//! `sup |Mhat| + sup |What| + sup |a^3 Theta|` over the grid nodes, i.e. on
//! the normalized triple, so the stopping rule is meaningful uniformly in
//! `rho` (for `|rho| <= 1` it dominates the same norm on the unnormalized
//! amplitudes).

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::homoclinic::{eval_frame, psi_prime, FrameSample};
use crate::model::{ParamSet, COLLISION_FLOOR};
use crate::numerics::quad::{GL20_NODES, GL20_WEIGHTS};
use crate::numerics::roots::find_zero;

/// Default convergence tolerance for [`solve_stable`] / [`solve_unstable`]
/// in the weighted norm.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap; the map contracts like `K sqrt(eps)`, so sixty
/// steps is far more than any admissible parameter point needs.
pub const DEFAULT_MAX_ITER: usize = 60;

/// First grid step of the geometric node distribution.
pub const GRID_H0: f64 = 0.01;
/// Number of grid intervals (nodes = `GRID_N + 1`).
pub const GRID_N: usize = 400;
/// Truncation time of the half-line integral equations.
pub const GRID_T: f64 = 45.0;

/// Truncation tolerance for the oscillatory `M`/`W` kernels: beyond the
/// point where `24 eps^2 a^4 / (2 |psi'|)` drops under this value, their
/// remaining contribution is discarded.
const CUT_TOL: f64 = 1e-13;
/// Maximum radians of the phase `2 psi` per Gauss-Legendre panel. A
/// 20-point rule integrates a tone of half-phase 5 rad to ~1e-20 relative,
/// leaving orders of magnitude of headroom for envelope curvature.
const PANEL_PHASE: f64 = 10.0;
/// Maximum panel width, so slowly oscillating stretches still resolve the
/// envelope.
const PANEL_WIDTH_MAX: f64 = 0.35;
/// Cap on subpanels of a single grid interval; prevents runaway phase
/// counts from consuming the machine (they cannot occur below the cut for
/// admissible parameters).
const MAX_SUBPANELS: usize = 200_000;
/// Convergence tolerance used for the inner solves of [`find_homoclinic`];
/// looser than [`DEFAULT_TOL`] because the root only needs the splitting
/// distance to ~1e-11.
const HOMOCLINIC_SOLVE_TOL: f64 = 1e-11;
/// Abscissa tolerance of the homoclinic root search. The splitting distance
/// is evaluated to ~1e-11, which on the O(1e-2) slope near the root leaves
/// a few 1e-10 of irreducible abscissa noise; the tolerance sits at that
/// floor, so the returned root is noise-limited rather than bracket-limited
/// and lands well inside 1e-8 of the symmetry zero.
const HOMOCLINIC_ROOT_TOL: f64 = 1e-10;

/// Which half-line a trajectory lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Forward half-line `[0, GRID_T]`; decay as `tau -> +inf`.
    Stable,
    /// Backward half-line `[-GRID_T, 0]`; decay as `tau -> -inf`.
    Unstable,
}

impl Side {
    /// Index of the node `tau = 0` in this side's grid.
    fn zero_index(self, n_nodes: usize) -> usize {
        match self {
            Side::Stable => 0,
            Side::Unstable => n_nodes - 1,
        }
    }
}

/// One manifold iterate: normalized frame amplitudes and angle deviation at
/// the grid nodes.
///
/// Stored components are the mass-ratio-normalized triple
/// `(Mhat, What, a^3 Theta)`; the scaled amplitudes `MM = rho Mhat` and
/// `WW = rho What` of the underlying deviation are exposed by [`Self::mm`]
/// and [`Self::mw`], the raw angle deviation by [`Self::theta`].
///
/// Invariants maintained by the constructors and checked by
/// [`Self::validate`]: the grid is strictly increasing (`[0, GRID_T]` on the
/// stable side, `[-GRID_T, 0]` on the unstable side); `(MM, WW)` stays in
/// `[-1, 1]^2`; `What` and `Theta` vanish at the node `tau = 0`.
#[derive(Debug, Clone)]
pub struct ScaledTrajectory {
    /// Strictly increasing node abscissae.
    pub grid: Vec<f64>,
    /// Normalized tangential amplitude `Mhat = MM / rho` at the nodes.
    pub m_hat: Vec<f64>,
    /// Normalized transverse amplitude `What = WW / rho` at the nodes.
    pub w_hat: Vec<f64>,
    /// Weighted angle deviation `a^3 Theta` at the nodes (the bounded,
    /// smooth quantity; `Theta` itself grows like `a^-3` in the tail).
    pub theta_weighted: Vec<f64>,
    /// Parameter point the trajectory belongs to.
    pub params: ParamSet,
    /// Half-line the trajectory lives on.
    pub side: Side,
}

impl ScaledTrajectory {
    /// Scaled tangential amplitudes `MM = rho Mhat` at the nodes.
    pub fn mm(&self) -> Vec<f64> {
        self.m_hat.iter().map(|v| self.params.rho * v).collect()
    }

    /// Scaled transverse amplitudes `WW = rho What` at the nodes.
    pub fn mw(&self) -> Vec<f64> {
        self.w_hat.iter().map(|v| self.params.rho * v).collect()
    }

    /// Angle deviation `Theta` at the nodes (recovered from `a^3 Theta`).
    pub fn theta(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.theta_weighted)
            .map(|(&tau, &c)| {
                let a = eval_frame(tau, self.params.eps)
                    .expect("grid stays inside the frame domain")
                    .a;
                c / (a * a * a)
            })
            .collect()
    }

    /// Normalized tangential amplitude at the matching point `tau = 0`.
    pub fn m_hat_at_zero(&self) -> f64 {
        self.m_hat[self.side.zero_index(self.grid.len())]
    }

    /// All-zero trajectory on the default grid (the trivial admissible
    /// seed).
    pub fn zero(p: &ParamSet, side: Side) -> ScaledTrajectory {
        let grid = default_grid(side);
        let n = grid.len();
        ScaledTrajectory {
            grid,
            m_hat: vec![0.0; n],
            w_hat: vec![0.0; n],
            theta_weighted: vec![0.0; n],
            params: *p,
            side,
        }
    }

    /// Check the structural invariants listed on the type.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if n < 4 || self.m_hat.len() != n || self.w_hat.len() != n || self.theta_weighted.len() != n
        {
            return Err(Error::Domain(format!(
                "trajectory: inconsistent lengths (grid {n})"
            )));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("trajectory: grid not strictly increasing".into()));
        }
        let zero = self.side.zero_index(n);
        if self.grid[zero] != 0.0 {
            return Err(Error::Domain(format!(
                "trajectory: zero node sits at tau = {}",
                self.grid[zero]
            )));
        }
        if self.w_hat[zero] != 0.0 || self.theta_weighted[zero] != 0.0 {
            return Err(Error::Domain(
                "trajectory: What and Theta must vanish at tau = 0".into(),
            ));
        }
        let rho = self.params.rho;
        for i in 0..n {
            let mm = rho * self.m_hat[i];
            let ww = rho * self.w_hat[i];
            if !(mm.is_finite() && ww.is_finite() && self.theta_weighted[i].is_finite()) {
                return Err(Error::DomainEscape { tau: self.grid[i], amplitude: f64::NAN });
            }
            if mm.abs() > 1.0 || ww.abs() > 1.0 {
                return Err(Error::DomainEscape {
                    tau: self.grid[i],
                    amplitude: mm.abs().max(ww.abs()),
                });
            }
        }
        Ok(())
    }
}

/// Convergence record of a Picard solve.
#[derive(Debug, Clone)]
pub struct IterationReport {
    /// Weighted-norm distances between successive iterates, one per step.
    pub residuals: Vec<f64>,
    /// Ratios `residuals[k] / residuals[k-1]`; all below one for a
    /// contracting run.
    pub contraction_ratios: Vec<f64>,
    /// Whether the final residual fell below the requested tolerance (the
    /// only way a report is returned by the solvers).
    pub converged: bool,
    /// Bound on the tangential-kernel mass discarded beyond the end of the
    /// grid, from the measured last-decade envelope constant times
    /// `Int_T^inf a^4`.
    pub dropped_tail: f64,
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Ratio of the geometric node distribution: `h0 (r^n - 1) / (r - 1) = t`.
fn geometric_ratio(h0: f64, n: usize, t: f64) -> f64 {
    let total = |r: f64| -> f64 {
        // Sum h0 r^k for k < n, in closed form away from r = 1.
        h0 * (r.powi(n as i32) - 1.0) / (r - 1.0)
    };
    let mut lo = 1.0 + 1e-9;
    let mut hi = 1.5;
    debug_assert!(total(lo) < t && total(hi) > t);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Node abscissae for one side: `GRID_N + 1` geometrically spaced nodes,
/// `[0, GRID_T]` for the stable side and its exact negation-reversal for the
/// unstable side (so the two grids mirror each other bit for bit).
pub fn default_grid(side: Side) -> Vec<f64> {
    let r = geometric_ratio(GRID_H0, GRID_N, GRID_T);
    let mut nodes = Vec::with_capacity(GRID_N + 1);
    nodes.push(0.0);
    let mut step = GRID_H0;
    let mut t = 0.0;
    for _ in 0..GRID_N {
        t += step;
        nodes.push(t);
        step *= r;
    }
    nodes[GRID_N] = GRID_T;
    match side {
        Side::Stable => nodes,
        Side::Unstable => {
            let mut rev: Vec<f64> = nodes.iter().rev().map(|&t| -t).collect();
            rev[GRID_N] = 0.0; // avoid the negative zero
            rev
        }
    }
}

/// First point where the tangential-kernel bound `24 eps^2 a^4 / (2|psi'|)`
/// drops below [`CUT_TOL`]; `M`/`W` kernels are truncated at `|tau|` beyond
/// it.
fn kernel_cut(eps: f64) -> f64 {
    let c = 24.0 * eps * eps;
    let mut t = 0.0f64;
    while t < GRID_T {
        let amp = 2.0 * std::f64::consts::SQRT_2 * (-t).exp();
        let speed = (2.0 * psi_prime(t, eps).abs()).max(1e-3);
        if c * amp.powi(4) / speed <= CUT_TOL {
            return t;
        }
        t += 0.25;
    }
    GRID_T
}

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

/// Parameter-derived constants shared by every kernel evaluation of a step.
struct KernelCtx {
    rho: f64,
    m1: f64,
    eps2: f64,
    eps3: f64,
    eps35: f64,
    theta0: f64,
}

impl KernelCtx {
    fn new(p: &ParamSet) -> KernelCtx {
        let eps2 = p.eps * p.eps;
        let eps3 = eps2 * p.eps;
        KernelCtx {
            rho: p.rho,
            m1: 1.0 - p.rho,
            eps2,
            eps3,
            eps35: eps3 * p.eps.sqrt(),
            theta0: p.theta0,
        }
    }
}

/// Closure data at one state point: the multiplier `U` together with the
/// directly computed difference `delta = U - 1` (far more accurate than
/// forming `U - 1` after the fact) and the separation quantities needed by
/// the force terms.
struct ClosurePoint {
    u: f64,
    delta: f64,
    s: f64,
    /// `sqrt(1 + v1)` with `v1 = R13^2 - 1`.
    q1: f64,
    /// `sqrt(1 + v2)` with `v2 = R23^2 - 1`.
    q2: f64,
    v2: f64,
}

/// Solve the energy closure for `delta = U - 1` by Newton iteration.
///
/// The closure reads `U = 1 - eps^3 U^3 hval` with
///
/// ```text
/// hval = Y^2 + X^4/2 - X^2 [(1-rho)/R13 + rho/R23]
/// ```
///
/// evaluated here in the grouped form
///
/// ```text
/// hval = y (2b + y) + x (2a + x) ((X^2 + a^2)/2 - 1) - X^2 (Sum 1/R - 1),
/// ```
///
/// which is exact because the separatrix identity `b^2 + a^4/2 - a^2 = 0`
/// removes the zeroth-order block; every remaining factor vanishes with the
/// deviation, so `delta` comes out with full relative accuracy even when it
/// is ~1e-16 (deep tail, small `rho`). `Sum 1/R - 1` is itself assembled
/// from `1/sqrt(1+v) - 1 = -v / (sqrt(1+v)(1 + sqrt(1+v)))`, avoiding the
/// `1 - (1 + small)` cancellation.
#[allow(clippy::too_many_arguments)]
fn solve_closure(
    ctx: &KernelCtx,
    xx: f64,
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    cos_t: f64,
) -> Result<ClosurePoint> {
    let rho = ctx.rho;
    let m1 = ctx.m1;
    let xx2 = xx * xx;
    let kappa = 0.5 * (xx2 + a * a) - 1.0;
    let base = y * (2.0 * b + y) + x * (2.0 * a + x) * kappa;

    let mut delta = 0.0f64;
    let mut converged = false;
    for _ in 0..30 {
        let u = 1.0 + delta;
        let s = ctx.eps2 * u * u * xx2;
        let v1 = rho * s * (rho * s + 2.0 * cos_t);
        let v2 = m1 * s * (m1 * s - 2.0 * cos_t);
        let r13_sq = 1.0 + v1;
        let r23_sq = 1.0 + v2;
        if r13_sq <= COLLISION_FLOOR || r23_sq <= COLLISION_FLOOR {
            return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor: COLLISION_FLOOR });
        }
        let q1 = r13_sq.sqrt();
        let q2 = r23_sq.sqrt();
        let rinv1 = -v1 / (q1 * (1.0 + q1));
        let rinv2 = -v2 / (q2 * (1.0 + q2));
        let sum_m1 = m1 * rinv1 + rho * rinv2;
        let hval = base - xx2 * sum_m1;
        let target = -ctx.eps3 * u * u * u * hval;

        // d(target)/d(delta) for the Newton slope.
        let dr1_ds = -rho * (rho * s + cos_t) / (q1 * r13_sq);
        let dr2_ds = -m1 * (m1 * s - cos_t) / (q2 * r23_sq);
        let dh_ds = -xx2 * (m1 * dr1_ds + rho * dr2_ds);
        let ds_dd = 2.0 * ctx.eps2 * u * xx2;
        let dtarget = -ctx.eps3 * (3.0 * u * u * hval + u * u * u * dh_ds * ds_dd);

        let resid = delta - target;
        let slope = 1.0 - dtarget;
        let step = if slope.abs() > 1e-8 { resid / slope } else { resid };
        delta -= step;
        if !delta.is_finite() {
            return Err(Error::NoConvergence {
                what: "manifold closure",
                iters: 30,
                residual: f64::NAN,
            });
        }
        if step.abs() <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "manifold closure",
            iters: 30,
            residual: delta,
        });
    }

    // Re-evaluate the separations at the converged multiplier so the force
    // terms see a self-consistent state.
    let u = 1.0 + delta;
    let s = ctx.eps2 * u * u * xx2;
    let v1 = rho * s * (rho * s + 2.0 * cos_t);
    let v2 = m1 * s * (m1 * s - 2.0 * cos_t);
    let r13_sq = 1.0 + v1;
    let r23_sq = 1.0 + v2;
    if r13_sq <= COLLISION_FLOOR || r23_sq <= COLLISION_FLOOR {
        return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor: COLLISION_FLOOR });
    }
    Ok(ClosurePoint {
        u,
        delta,
        s,
        q1: r13_sq.sqrt(),
        q2: r23_sq.sqrt(),
        v2,
    })
}

/// The three integrand values at one quadrature point:
/// `[b' Phat + b Qhat, (Htilde Phat - H Qhat)/a, dTheta/dtau]`.
///
/// `Phat = P / rho` and `Qhat = Q / rho` are evaluated through the
/// rho-normalized force terms
///
/// ```text
/// Fhat = F / rho = g1 (1 + rho (phi - 1 - rho phi)) + g2 (1 - (1-rho) phi),
/// Ghat = G / rho = (1-rho) sin(theta) (g2 - rho g1),
/// ```
///
/// with `phi = s cos(theta)`, `g1 = (1 - R13^-3)/rho` and `g2 = 1 - R23^-3`
/// in division-free square-root form, so every term vanishes with `s` and
/// the whole evaluation has a finite, exact `rho -> 0` limit. The angle
/// integrand uses the factored form
///
/// ```text
/// dTheta/dtau = sqrt(2) x
///   + sqrt(2) (a delta + U x) ((UX)^2 + a UX + a^2) / (eps^3 (UX)^3 a^3),
/// ```
///
/// equivalent to `sqrt(2) S / (eps^3 U^3 X^3 a^3)` but free of the
/// `1/a^3 - 1/(UX)^3` cancellation between two exponentially growing terms.
fn eval_kernels(
    ctx: &KernelCtx,
    fr: &FrameSample,
    m_hat: f64,
    w_hat: f64,
    theta_w: f64,
) -> Result<[f64; 3]> {
    let a = fr.a;
    let b = fr.b;
    let a3 = a * a * a;
    let theta_dev = theta_w / a3;
    let theta = theta_dev + ctx.theta0 + fr.psi;

    // Deviation from the separatrix, in both normalized and raw form.
    let xh = ctx.eps35 * (b * w_hat - a * fr.big_h * m_hat);
    let yh = ctx.eps35 * (fr.bprime * w_hat - a * fr.big_h_tilde * m_hat);
    let x = ctx.rho * xh;
    let y = ctx.rho * yh;
    let xx = a + x;
    if !(xx > 0.0) {
        return Err(Error::DomainEscape { tau: fr.tau, amplitude: xx });
    }
    let yy = b + y;

    let (sin_t, cos_t) = theta.sin_cos();
    let cp = solve_closure(ctx, xx, x, y, a, b, cos_t)?;

    // rho-normalized force terms in square-root form.
    let s = cp.s;
    let phi = s * cos_t;
    let g1 = s * (ctx.rho * s + 2.0 * cos_t) * (cp.q1 * cp.q1 + cp.q1 + 1.0)
        / ((1.0 + cp.q1) * cp.q1.powi(3));
    let g2 = cp.v2 * (cp.q2 * cp.q2 + cp.q2 + 1.0) / ((1.0 + cp.q2) * cp.q2.powi(3));
    let fhat = g1 * (1.0 + ctx.rho * (phi - 1.0 - ctx.rho * phi)) + g2 * (1.0 - ctx.m1 * phi);
    let ghat = ctx.m1 * sin_t * (g2 - ctx.rho * g1);

    let sqrt2 = std::f64::consts::SQRT_2;
    let phat = sqrt2 * s * ghat;
    let qhat =
        -ctx.rho * ctx.rho * xh.powi(3) - 3.0 * a * ctx.rho * xh * xh - xx * fhat + phat * yy / xx;

    let m_kernel = fr.bprime * phat + b * qhat;
    let w_kernel = (fr.big_h_tilde * phat - fr.big_h * qhat) / a;

    let ux = cp.u * xx;
    let num = a * cp.delta + cp.u * x;
    let theta_kernel = sqrt2 * x
        + sqrt2 * num * (ux * ux + a * ux + a * a) / (ctx.eps3 * ux.powi(3) * a3);

    Ok([m_kernel, w_kernel, theta_kernel])
}

// ---------------------------------------------------------------------------
// Interpolation of an iterate
// ---------------------------------------------------------------------------

/// Local 4-point Lagrange interpolation of the stored triple over the grid.
struct TrajInterp<'a> {
    grid: &'a [f64],
    m_hat: &'a [f64],
    w_hat: &'a [f64],
    theta_w: &'a [f64],
}

impl<'a> TrajInterp<'a> {
    fn new(t: &'a ScaledTrajectory) -> TrajInterp<'a> {
        TrajInterp {
            grid: &t.grid,
            m_hat: &t.m_hat,
            w_hat: &t.w_hat,
            theta_w: &t.theta_weighted,
        }
    }

    /// Cubic stencil starting index for evaluation inside interval `j`.
    fn stencil(&self, j: usize) -> usize {
        let n = self.grid.len();
        j.saturating_sub(1).min(n - 4)
    }

    /// Evaluate `(Mhat, What, a^3 Theta)` at `tau` inside interval `j`.
    fn eval(&self, j: usize, tau: f64) -> (f64, f64, f64) {
        let i0 = self.stencil(j);
        let g = &self.grid[i0..i0 + 4];
        let mut basis = [0.0f64; 4];
        for (k, bk) in basis.iter_mut().enumerate() {
            let mut num = 1.0;
            let mut den = 1.0;
            for l in 0..4 {
                if l != k {
                    num *= tau - g[l];
                    den *= g[k] - g[l];
                }
            }
            *bk = num / den;
        }
        let dot = |v: &[f64]| -> f64 {
            basis[0] * v[i0] + basis[1] * v[i0 + 1] + basis[2] * v[i0 + 2] + basis[3] * v[i0 + 3]
        };
        (dot(self.m_hat), dot(self.w_hat), dot(self.theta_w))
    }
}

// ---------------------------------------------------------------------------
// Panel integration and assembly
// ---------------------------------------------------------------------------

/// Integrate the three kernels over every grid interval.
///
/// `eval(j, frame)` produces the integrand triple at a quadrature point
/// inside interval `j`. Oscillatory components (`M`, `W`) are only
/// accumulated on the active span `|tau| < cut`; the angle component is
/// integrated everywhere. Panel sizes follow the phase of `2 psi` on the
/// active span and the width cap elsewhere.
fn integrate_intervals<F>(
    grid: &[f64],
    frames: &[FrameSample],
    eps: f64,
    cut: f64,
    side: Side,
    eval: &F,
) -> Result<Vec<[f64; 3]>>
where
    F: Fn(usize, &FrameSample) -> Result<[f64; 3]>,
{
    let n_int = grid.len() - 1;
    let mut out = vec![[0.0f64; 3]; n_int];

    // One span of one interval: phase-resolved or width-capped panels.
    let span = |j: usize,
                    lo: f64,
                    hi: f64,
                    dpsi: f64,
                    keep_osc: bool,
                    acc: &mut [f64; 3]|
     -> Result<()> {
        if !(hi > lo) {
            return Ok(());
        }
        let by_phase = if keep_osc { (2.0 * dpsi.abs() / PANEL_PHASE).ceil() } else { 1.0 };
        let by_width = ((hi - lo) / PANEL_WIDTH_MAX).ceil();
        let n_sub = by_phase.max(by_width).max(1.0);
        if !(n_sub <= MAX_SUBPANELS as f64) {
            return Err(Error::PanelBudgetExceeded { cap: MAX_SUBPANELS });
        }
        let n_sub = n_sub as usize;
        let width = (hi - lo) / n_sub as f64;
        for k in 0..n_sub {
            let plo = lo + width * k as f64;
            let phi_ = if k + 1 == n_sub { hi } else { lo + width * (k + 1) as f64 };
            let c = 0.5 * (plo + phi_);
            let hw = 0.5 * (phi_ - plo);
            for (node, wt) in GL20_NODES.iter().zip(GL20_WEIGHTS.iter()) {
                let tau = c + hw * node;
                let fr = eval_frame(tau, eps)?;
                let v = eval(j, &fr)?;
                if keep_osc {
                    acc[0] += wt * hw * v[0];
                    acc[1] += wt * hw * v[1];
                }
                acc[2] += wt * hw * v[2];
            }
        }
        Ok(())
    };

    for j in 0..n_int {
        let lo = grid[j];
        let hi = grid[j + 1];
        let mut acc = [0.0f64; 3];
        // Split the interval at the cut so the dead part is never
        // phase-panelled.
        let (active_lo, active_hi) = match side {
            Side::Stable => (lo, hi.min(cut)),
            Side::Unstable => (lo.max(-cut), hi),
        };
        if active_hi > active_lo {
            // Phase across the active span, from the node values of psi
            // (psi is monotone on each half-line, so the node difference
            // bounds the span difference).
            let dpsi = frames[j + 1].psi - frames[j].psi;
            span(j, active_lo, active_hi, dpsi, true, &mut acc)?;
        }
        match side {
            Side::Stable if hi > cut => span(j, lo.max(cut), hi, 0.0, false, &mut acc)?,
            Side::Unstable if lo < -cut => span(j, lo, hi.min(-cut), 0.0, false, &mut acc)?,
            _ => {}
        }
        out[j] = acc;
    }
    Ok(out)
}

/// Assemble node values of the three integral transforms from per-interval
/// panel integrals, applying side-dependent orientation and scaling.
fn assemble(
    grid: &[f64],
    frames: &[FrameSample],
    panels: &[[f64; 3]],
    p: &ParamSet,
    side: Side,
) -> Result<ScaledTrajectory> {
    let n = grid.len();
    let eps35 = p.eps.powi(3) * p.eps.sqrt();

    // Accumulate each transform outward from its own anchor instead of
    // differencing prefix sums against a grid-wide total. The angle
    // integrand grows like `a^-3` toward the far tail, so a total over the
    // whole half-line dwarfs the near-anchor structure and a difference of
    // prefix sums would lose it below the ulp of the total. Summing from
    // the anchor keeps every node value at full quadrature precision and
    // makes the two half-lines exact floating-point mirrors of each other.
    //
    // `int_m[i]` = integral from node i to the far (infinite) end, where
    // the tangential transform vanishes; `int_w`/`int_c` = signed integral
    // from tau = 0 (the anchor node) to node i.
    let mut int_m = vec![0.0f64; n];
    let mut int_w = vec![0.0f64; n];
    let mut int_c = vec![0.0f64; n];
    match side {
        Side::Stable => {
            for j in (0..n - 1).rev() {
                int_m[j] = int_m[j + 1] + panels[j][0];
            }
            for j in 0..n - 1 {
                int_w[j + 1] = int_w[j] + panels[j][1];
                int_c[j + 1] = int_c[j] + panels[j][2];
            }
        }
        Side::Unstable => {
            for j in 0..n - 1 {
                int_m[j + 1] = int_m[j] + panels[j][0];
            }
            for j in (0..n - 1).rev() {
                int_w[j] = int_w[j + 1] - panels[j][1];
                int_c[j] = int_c[j + 1] - panels[j][2];
            }
        }
    }

    let mut m_hat = vec![0.0f64; n];
    let mut w_hat = vec![0.0f64; n];
    let mut theta_w = vec![0.0f64; n];
    let m_sign = match side {
        Side::Stable => -1.0,
        Side::Unstable => 1.0,
    };
    for i in 0..n {
        let a = frames[i].a;
        let a2 = a * a;
        m_hat[i] = m_sign * int_m[i] / (eps35 * a2);
        w_hat[i] = int_w[i] / eps35;
        theta_w[i] = a2 * a * int_c[i];
    }

    let out = ScaledTrajectory {
        grid: grid.to_vec(),
        m_hat,
        w_hat,
        theta_weighted: theta_w,
        params: *p,
        side,
    };
    out.validate()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// The Picard map, seed, and solvers
// ---------------------------------------------------------------------------

/// Apply the integral-equation map once: evaluate the exact kernels along
/// `current` and integrate them into a new trajectory at the same parameter
/// point `p` (which also becomes the output's parameter set).
///
/// Errors: [`Error::DomainEscape`] if the input drives the state through
/// the oscillator's turning surface (`X <= 0`) or the output leaves
/// `(MM, WW) in [-1,1]^2`; [`Error::Collision`] if a separation collapses;
/// [`Error::NoConvergence`] if the energy closure stalls.
pub fn picard_step(current: &ScaledTrajectory, p: &ParamSet) -> Result<ScaledTrajectory> {
    let grid = &current.grid;
    let frames: Vec<FrameSample> =
        grid.iter().map(|&t| eval_frame(t, p.eps)).collect::<Result<_>>()?;
    let cut = kernel_cut(p.eps);
    let ctx = KernelCtx::new(p);
    let interp = TrajInterp::new(current);
    let eval = |j: usize, fr: &FrameSample| -> Result<[f64; 3]> {
        let (m, w, c) = interp.eval(j, fr.tau);
        eval_kernels(&ctx, fr, m, w, c)
    };
    let panels = integrate_intervals(grid, &frames, p.eps, cut, current.side, &eval)?;
    assemble(grid, &frames, &panels, p, current.side)
}

/// First-order seed trajectory: the explicit leading-order amplitudes
///
/// ```text
/// Mhat0(tau) = (3 sqrt2 / 2)(1-rho) (sqrt(eps)/a^2) Int_tau^T a^3 (a b' + b^2) sin 2(theta0+psi),
/// What0(tau) = -(3 sqrt2 / 2)(1-rho) sqrt(eps) Int_0^tau a^2 (a Htilde - b H) sin 2(theta0+psi),
/// Theta0     = 0,
/// ```
///
/// (mirrored integration ranges on the unstable side), evaluated with the
/// same panel machinery as the full map.
pub fn seed_trajectory(p: &ParamSet, side: Side) -> Result<ScaledTrajectory> {
    let grid = default_grid(side);
    let frames: Vec<FrameSample> =
        grid.iter().map(|&t| eval_frame(t, p.eps)).collect::<Result<_>>()?;
    let cut = kernel_cut(p.eps);
    let eps2 = p.eps * p.eps;
    let c0 = -1.5 * std::f64::consts::SQRT_2 * (1.0 - p.rho) * eps2 * eps2;
    let theta0 = p.theta0;
    let eval = |_j: usize, fr: &FrameSample| -> Result<[f64; 3]> {
        let forcing = (2.0 * (theta0 + fr.psi)).sin();
        let a = fr.a;
        let a2 = a * a;
        let m_kernel = c0 * a2 * a * (a * fr.bprime + fr.b * fr.b) * forcing;
        let w_kernel = c0 * a2 * (a * fr.big_h_tilde - fr.b * fr.big_h) * forcing;
        Ok([m_kernel, w_kernel, 0.0])
    };
    let panels = integrate_intervals(&grid, &frames, p.eps, cut, side, &eval)?;
    assemble(&grid, &frames, &panels, p, side)
}

/// Weighted-norm distance `sup |dMhat| + sup |dWhat| + sup |d(a^3 Theta)|`
/// between two iterates on the same grid.
pub fn weighted_delta(a: &ScaledTrajectory, b: &ScaledTrajectory) -> f64 {
    debug_assert_eq!(a.grid.len(), b.grid.len());
    let sup = |u: &[f64], v: &[f64]| -> f64 {
        u.iter().zip(v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    sup(&a.m_hat, &b.m_hat) + sup(&a.w_hat, &b.w_hat)
        + sup(&a.theta_weighted, &b.theta_weighted)
}

/// Bound on the tangential-kernel mass beyond the end of the grid: the
/// envelope constant `C = max |kernel| / a^4` measured over the last decade
/// of nodes, times `Int_T^inf a^4 = (2 sqrt2)^4 e^{-4T} / 4` (up to the
/// sub-percent correction of `a` versus its envelope).
fn dropped_tail_bound(traj: &ScaledTrajectory) -> f64 {
    let p = &traj.params;
    let ctx = KernelCtx::new(p);
    let n = traj.grid.len();
    let take = (n / 10).max(2);
    let mut c_meas = 0.0f64;
    for i in (n - take)..n {
        // On the unstable side the far tail sits at the *start* of the grid.
        let idx = match traj.side {
            Side::Stable => i,
            Side::Unstable => n - 1 - i,
        };
        let tau = traj.grid[idx];
        let Ok(fr) = eval_frame(tau, p.eps) else { continue };
        let Ok(v) = eval_kernels(
            &ctx,
            &fr,
            traj.m_hat[idx],
            traj.w_hat[idx],
            traj.theta_weighted[idx],
        ) else {
            continue;
        };
        let amp = 2.0 * std::f64::consts::SQRT_2 * (-tau.abs()).exp();
        c_meas = c_meas.max(v[0].abs() / amp.powi(4));
    }
    let amp_end = 2.0 * std::f64::consts::SQRT_2 * (-GRID_T).exp();
    c_meas * amp_end.powi(4) / 4.0
}

/// Iterate the Picard map from `seed` until the weighted-norm residual
/// drops below `tol` (then `report.converged` is true) or `max_iter` steps
/// elapse ([`Error::MaxIterExceeded`]). The parameter point is taken from
/// `seed.params`.
pub fn solve_from(
    seed: ScaledTrajectory,
    tol: f64,
    max_iter: usize,
) -> Result<(ScaledTrajectory, IterationReport)> {
    let p = seed.params;
    let mut cur = seed;
    let mut residuals: Vec<f64> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    for _ in 0..max_iter {
        let next = picard_step(&cur, &p)?;
        let delta = weighted_delta(&cur, &next);
        if let Some(&prev) = residuals.last() {
            ratios.push(delta / prev);
        }
        residuals.push(delta);
        cur = next;
        if delta < tol {
            let dropped_tail = dropped_tail_bound(&cur);
            return Ok((
                cur,
                IterationReport {
                    residuals,
                    contraction_ratios: ratios,
                    converged: true,
                    dropped_tail,
                },
            ));
        }
    }
    Err(Error::MaxIterExceeded {
        what: "manifold Picard iteration",
        iters: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Solve for the stable manifold trajectory on `[0, GRID_T]`.
pub fn solve_stable(
    p: &ParamSet,
    tol: f64,
    max_iter: usize,
) -> Result<(ScaledTrajectory, IterationReport)> {
    solve_from(seed_trajectory(p, Side::Stable)?, tol, max_iter)
}

/// Solve for the unstable manifold trajectory on `[-GRID_T, 0]`.
pub fn solve_unstable(
    p: &ParamSet,
    tol: f64,
    max_iter: usize,
) -> Result<(ScaledTrajectory, IterationReport)> {
    solve_from(seed_trajectory(p, Side::Unstable)?, tol, max_iter)
}

/// Normalized splitting distance at the matching section `tau = 0`:
///
/// ```text
/// D(theta0) = (MM_stable(0) - MM_unstable(0)) / rho = Mhat_s(0) - Mhat_u(0).
/// ```
///
/// Computed in the rho-normalized variables throughout, so `rho = 0`
/// evaluates the exact first-order (Melnikov) limit rather than a 0/0.
pub fn splitting_distance(p: &ParamSet) -> Result<f64> {
    let (st, _) = solve_stable(p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (un, _) = solve_unstable(p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(st.m_hat_at_zero() - un.m_hat_at_zero())
}

/// Value of the matching amplitude `X0 = sqrt(2) - M(0)` recovered from a
/// converged trajectory; near `sqrt(2)` for admissible parameters.
pub fn matching_x0(traj: &ScaledTrajectory) -> f64 {
    let p = &traj.params;
    let sqrt2 = std::f64::consts::SQRT_2;
    let m0 = p.eps.powi(3) * p.eps.sqrt() * sqrt2 * p.rho * traj.m_hat_at_zero();
    sqrt2 - m0
}

/// Find a zero `theta0*` of the splitting distance inside `bracket`,
/// returning `(theta0*, d D / d theta0)` at the root.
///
/// `p.theta0` is ignored; the bracket endpoints must produce splitting
/// distances of opposite sign ([`Error::NoSignChange`] otherwise).
/// Successive evaluations reuse the previous converged pair of trajectories
/// as the next seed, which cuts the iteration count of every solve after
/// the first two to a handful.
pub fn find_homoclinic(p: &ParamSet, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let warm: RefCell<Option<(ScaledTrajectory, ScaledTrajectory)>> = RefCell::new(None);
    let mut f = |theta0: f64| -> Result<f64> {
        let q = p.with_theta0(theta0);
        let (seed_s, seed_u) = match warm.borrow_mut().take() {
            Some((mut s, mut u)) => {
                s.params = q;
                u.params = q;
                (s, u)
            }
            None => (seed_trajectory(&q, Side::Stable)?, seed_trajectory(&q, Side::Unstable)?),
        };
        let (st, _) = solve_from(seed_s, HOMOCLINIC_SOLVE_TOL, DEFAULT_MAX_ITER)?;
        let (un, _) = solve_from(seed_u, HOMOCLINIC_SOLVE_TOL, DEFAULT_MAX_ITER)?;
        let d = st.m_hat_at_zero() - un.m_hat_at_zero();
        warm.replace(Some((st, un)));
        Ok(d)
    };
    let report = find_zero(&mut f, bracket, HOMOCLINIC_ROOT_TOL)?;
    Ok((report.root, report.derivative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::d0_direct;
    use crate::model::{solve_u, spq_exact};
    use crate::numerics::quad::OscPlan;
    use approx::assert_abs_diff_eq;

    fn p_ref() -> ParamSet {
        ParamSet::new(0.2, 0.35, 0.7).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = default_grid(Side::Stable);
        assert_eq!(g.len(), GRID_N + 1);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[GRID_N], GRID_T);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let h_first = g[1] - g[0];
        assert_abs_diff_eq!(h_first, GRID_H0, epsilon = 1e-12);
        let h_last = g[GRID_N] - g[GRID_N - 1];
        assert!(h_last > 0.25 && h_last < 0.6, "last step {h_last}");
        // Steps grow monotonically.
        for w in g.windows(3) {
            assert!(w[2] - w[1] > w[1] - w[0]);
        }
        // The unstable grid is the exact mirror.
        let u = default_grid(Side::Unstable);
        for i in 0..=GRID_N {
            assert_eq!(u[i], -g[GRID_N - i]);
        }
        assert_eq!(u[GRID_N], 0.0);
    }

    #[test]
    fn closure_matches_reference_solver() {
        // The dedicated Newton closure must agree with the general-purpose
        // fixed-point solver at a generic state.
        let p = p_ref();
        let ctx = KernelCtx::new(&p);
        let fr = eval_frame(0.9, p.eps).unwrap();
        let (m_hat, w_hat, theta_w) = (0.05, -0.03, 0.01);
        let a = fr.a;
        let xh = ctx.eps35 * (fr.b * w_hat - a * fr.big_h * m_hat);
        let yh = ctx.eps35 * (fr.bprime * w_hat - a * fr.big_h_tilde * m_hat);
        let x = p.rho * xh;
        let y = p.rho * yh;
        let theta = theta_w / (a * a * a) + p.theta0 + fr.psi;
        let cp = solve_closure(&ctx, a + x, x, y, a, fr.b, theta.cos()).unwrap();
        let u_ref = solve_u(a + x, fr.b + y, theta, &p).unwrap();
        assert_abs_diff_eq!(cp.u, u_ref, epsilon = 1e-12);
        // delta is the directly computed U - 1.
        assert_abs_diff_eq!(cp.delta, u_ref - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kernels_match_direct_forcing_terms() {
        // The sqrt-form rho-normalized kernels must reproduce the plainly
        // assembled forcing terms S, P, Q at moderate deviations.
        let p = p_ref();
        let ctx = KernelCtx::new(&p);
        for &tau in &[0.35, 1.2, 2.8] {
            let fr = eval_frame(tau, p.eps).unwrap();
            let (m_hat, w_hat, theta_w) = (0.04, 0.02, -0.015);
            let v = eval_kernels(&ctx, &fr, m_hat, w_hat, theta_w).unwrap();

            let a = fr.a;
            let xh = ctx.eps35 * (fr.b * w_hat - a * fr.big_h * m_hat);
            let yh = ctx.eps35 * (fr.bprime * w_hat - a * fr.big_h_tilde * m_hat);
            let x = p.rho * xh;
            let y = p.rho * yh;
            let theta_dev = theta_w / (a * a * a);
            let (s_val, p_val, q_val) = spq_exact(x, y, theta_dev, tau, &p).unwrap();

            let m_direct = (fr.bprime * p_val + fr.b * q_val) / p.rho;
            let w_direct = (fr.big_h_tilde * p_val - fr.big_h * q_val) / (a * p.rho);
            let u_cl = solve_u(x + a, y + fr.b, theta_dev + p.theta0 + fr.psi, &p).unwrap();
            let theta_direct = std::f64::consts::SQRT_2 * s_val
                / (p.eps.powi(3) * u_cl.powi(3) * (x + a).powi(3) * a.powi(3));

            let scale_m = m_direct.abs().max(1e-8);
            assert_abs_diff_eq!(v[0] / scale_m, m_direct / scale_m, epsilon = 1e-10);
            let scale_w = w_direct.abs().max(1e-8);
            assert_abs_diff_eq!(v[1] / scale_w, w_direct / scale_w, epsilon = 1e-10);
            let scale_t = theta_direct.abs().max(1e-10);
            assert_abs_diff_eq!(v[2] / scale_t, theta_direct / scale_t, epsilon = 1e-8);
        }
    }

    #[test]
    fn seed_matches_independent_quadrature() {
        // Mhat0(0) recomputed through the generic oscillatory-plan
        // quadrature of the numerics module.
        let p = p_ref();
        let seed = seed_trajectory(&p, Side::Stable).unwrap();
        let plan = OscPlan::new(p.eps, 2.0, 4.0, 10.0, 1e-13, 2_000_000).unwrap();
        let (val, _) = plan
            .integrate(&mut |t: f64| {
                let fr = eval_frame(t, p.eps)?;
                let a = fr.a;
                Ok(a * a * a
                    * (a * fr.bprime + fr.b * fr.b)
                    * (2.0 * (p.theta0 + fr.psi)).sin())
            })
            .unwrap();
        let expected = 1.5 * std::f64::consts::SQRT_2 * (1.0 - p.rho) * p.eps.sqrt() / 2.0 * val;
        assert_abs_diff_eq!(seed.m_hat[0], expected, epsilon = 1e-10 * expected.abs().max(1.0));
        // What vanishes at tau = 0 and Theta is identically zero.
        assert_eq!(seed.w_hat[0], 0.0);
        assert!(seed.theta_weighted.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn zero_mass_ratio_gives_zero_deviation_but_finite_normantization() {
        // At rho = 0 the raw deviation map sends zero to zero (P and Q carry
        // a factor rho), while the normalized image is the finite Melnikov
        // content.
        let p = ParamSet::new(0.0, 0.4, 0.7).unwrap();
        let zero = ScaledTrajectory::zero(&p, Side::Stable);
        let img = picard_step(&zero, &p).unwrap();
        assert!(img.mm().iter().all(|&v| v == 0.0));
        assert!(img.mw().iter().all(|&v| v == 0.0));
        assert!(img.m_hat[0].abs() > 1e-6, "normalized image must be non-trivial");
    }

    #[test]
    fn picard_step_contracts() {
        let p = p_ref();
        let seed = seed_trajectory(&p, Side::Stable).unwrap();
        let one = picard_step(&seed, &p).unwrap();
        let two = picard_step(&one, &p).unwrap();
        let d1 = weighted_delta(&seed, &one);
        let d2 = weighted_delta(&one, &two);
        assert!(d2 < d1, "second increment {d2} not below first {d1}");
        assert!(d2 / d1 < 1.0);
    }

    #[test]
    fn stable_solve_converges_with_geometric_residuals() {
        let p = p_ref();
        let (traj, report) = solve_stable(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(*report.residuals.last().unwrap() < DEFAULT_TOL);
        // Strict decay after the seed transient.
        for w in report.residuals.windows(2).skip(1) {
            assert!(w[1] < w[0], "residuals not decreasing: {:?}", report.residuals);
        }
        assert!(report.contraction_ratios.iter().skip(1).all(|&r| r < 1.0));
        // Matching amplitude lands near sqrt(2).
        let x0 = matching_x0(&traj);
        assert!((x0 - std::f64::consts::SQRT_2).abs() < 0.05, "X0 = {x0}");
        // Tangential amplitude decays (identically zero beyond the kernel
        // cut, where only the discarded bound remains).
        assert_eq!(*traj.m_hat.last().unwrap(), 0.0);
        assert!(report.dropped_tail < 1e-50);
        traj.validate().unwrap();
    }

    #[test]
    fn unstable_mirrors_stable_at_symmetric_angle() {
        let p = ParamSet::new(0.2, 0.35, 0.0).unwrap();
        let (st, _) = solve_stable(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let (un, _) = solve_unstable(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let n = st.grid.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert_abs_diff_eq!(un.m_hat[j], st.m_hat[i], epsilon = 1e-10);
            assert_abs_diff_eq!(un.w_hat[j], -st.w_hat[i], epsilon = 1e-10);
            assert_abs_diff_eq!(un.theta_weighted[j], -st.theta_weighted[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn splitting_vanishes_at_zero_angle_and_is_odd() {
        let p0 = ParamSet::new(0.1, 0.4, 0.0).unwrap();
        let d0 = splitting_distance(&p0).unwrap();
        assert!(d0.abs() < 1e-10, "D(0) = {d0}");
        let dp = splitting_distance(&p0.with_theta0(0.6)).unwrap();
        let dm = splitting_distance(&p0.with_theta0(-0.6)).unwrap();
        assert!(dp.abs() > 1e-4);
        assert_abs_diff_eq!(dp + dm, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_mass_ratio_splitting_equals_melnikov_integral() {
        // The rho -> 0 fixed point of the normalized map *is* the Melnikov
        // function; the two completely independent evaluations must agree.
        let p = ParamSet::new(0.0, 0.4, 0.7).unwrap();
        let d_manifold = splitting_distance(&p).unwrap();
        let (d_melnikov, _) = d0_direct(p.theta0, p.eps).unwrap();
        assert_abs_diff_eq!(d_manifold, d_melnikov, epsilon = 1e-8);
    }

    #[test]
    fn two_admissible_seeds_reach_the_same_fixed_point() {
        let p = p_ref();
        let (from_seed, _) =
            solve_from(seed_trajectory(&p, Side::Stable).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER)
                .unwrap();
        let (from_zero, _) =
            solve_from(ScaledTrajectory::zero(&p, Side::Stable), DEFAULT_TOL, DEFAULT_MAX_ITER)
                .unwrap();
        assert!(weighted_delta(&from_seed, &from_zero) < 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn find_homoclinic_locates_root_near_zero() {
        let p = ParamSet::new(0.02, 0.4, 0.0).unwrap();
        let (root, slope) = find_homoclinic(&p, (-0.5, 0.5)).unwrap();
        assert!(root.abs() < 1e-7, "root = {root}");
        // Slope of the splitting distance at zero: about -2.7e-2 on this
        // level (dominated by the first two odd harmonics).
        assert!(
            (slope.abs() - 0.027).abs() / 0.027 < 0.35,
            "slope = {slope}"
        );
    }

    #[test]
    fn find_homoclinic_reports_missing_sign_change() {
        let p = ParamSet::new(0.02, 0.4, 0.0).unwrap();
        let err = find_homoclinic(&p, (0.2, 0.5)).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }), "got {err}");
    }

    #[test]
    fn runaway_input_escapes_domain() {
        let p = ParamSet::new(0.45, 0.55, 0.3).unwrap();
        let mut bad = ScaledTrajectory::zero(&p, Side::Stable);
        for v in bad.m_hat.iter_mut() {
            *v = 20.0;
        }
        let err = picard_step(&bad, &p).unwrap_err();
        assert!(matches!(err, Error::DomainEscape { .. }), "got {err}");
    }
}
