//! The restricted circular planar three-body problem in the three coordinate
//! systems used by the library, and the exact algebra connecting them.
//!
//! Primaries of mass `1 - rho` and `rho` move on the unit circle with unit
//! angular velocity; the massless body is tracked in inertial polar
//! coordinates `(r2, theta2)`. Three descriptions are chained together:
//!
//! 1. **Physical**: second-order equations for `(r2, theta2)` driven by the
//!    radial/angular force components `f, g`.
//! 2. **McGehee**: `u = 1/r2`, `v = r2dot / sqrt(u)`, `theta = theta2 - t`,
//!    `w = theta2dot / u^(3/2)`, with rescaled time
//!    `d tau = (1/sqrt(2)) u^(3/2) dt`, which compactifies infinity.
//! 3. **Duffing**: `X = w`, `Y = -v w / sqrt(2)`, same `theta`, on a fixed
//!    level of the Jacobi constant `J`. The level is encoded by
//!    `eps = 1/|J|` and eliminates `u` through the closure `U` solving
//!
//!    ```text
//!    U = 1 - eps^3 U^3 Y^2 - (1/2) eps^3 U^3 X^4
//!          + (1-rho) eps^3 U^3 X^2 / R13 + rho eps^3 U^3 X^2 / R23,
//!    ```
//!
//!    after which `u = eps^2 U^2 X^2` and the motion is a perturbed Duffing
//!    oscillator `X'' = X - X^3 + O(eps^2)`.
//!
//! The force functions `F, G` and the separations `R13, R23` depend on the
//! state only through `s = eps^2 U^2 X^2` (equal to `u`) and `theta`:
//!
//! ```text
//! R13 = sqrt(1 + rho^2 s^2 + 2 rho s cos theta),
//! R23 = sqrt(1 + (1-rho)^2 s^2 - 2 (1-rho) s cos theta),
//! F   = 1 - (1-rho)(1 + rho s cos theta)/R13^3 - rho (1 - (1-rho) s cos theta)/R23^3,
//! G   = rho (1-rho) sin theta (1/R13^3 - 1/R23^3).
//! ```
//!
//! Finally, deviations `(x, y) = (X - a, Y - b)` from the separatrix obey
//! `x' = y + P`, `y' = (1 - 3 a^2) x + Q`, `Theta' = sqrt(2) S / (eps^3 U^3 X^3 a^3)`
//! with the exact forcing terms assembled by [`spq_exact`].

use crate::error::{Error, Result};
use crate::homoclinic::eval_frame;

/// Largest admissible `eps` unless a caller widens the box explicitly.
pub const DEFAULT_EPS_CEILING: f64 = 0.6;

/// Squared-separation floor below which an inverse-cube force is treated as
/// a collision.
pub const COLLISION_FLOOR: f64 = 1e-12;

/// Smallest `|X|` the Duffing vector field accepts (the reduction divides by
/// `X^3`).
pub const X_FLOOR: f64 = 1e-6;

/// Mass ratio, energy level, and separatrix phase for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    /// Mass of the lighter primary; the heavier has mass `1 - rho`.
    pub rho: f64,
    /// Energy parameter: `eps = 1/|J|` with `J < 0` the Jacobi constant.
    pub eps: f64,
    /// Phase of the separatrix relative to the binary.
    pub theta0: f64,
}

impl ParamSet {
    /// Build a parameter set inside the default admissible box:
    /// `rho` in `(-eps0, 1/2 + eps0)` and `eps` in `(0, eps0]` with
    /// `eps0 = 0.6`.
    pub fn new(rho: f64, eps: f64, theta0: f64) -> Result<ParamSet> {
        Self::with_ceiling(rho, eps, theta0, DEFAULT_EPS_CEILING)
    }

    /// Like [`ParamSet::new`] with an explicit box radius `eps0 <= 0.6`.
    pub fn with_ceiling(rho: f64, eps: f64, theta0: f64, eps0: f64) -> Result<ParamSet> {
        if !(eps0 > 0.0 && eps0 <= DEFAULT_EPS_CEILING) {
            return Err(Error::Domain(format!(
                "ParamSet: eps ceiling {eps0} outside (0, {DEFAULT_EPS_CEILING}]"
            )));
        }
        if !(eps > 0.0 && eps <= eps0) {
            return Err(Error::Domain(format!("ParamSet: eps = {eps} outside (0, {eps0}]")));
        }
        if !(rho > -eps0 && rho < 0.5 + eps0) {
            return Err(Error::Domain(format!(
                "ParamSet: rho = {rho} outside (-{eps0}, {})",
                0.5 + eps0
            )));
        }
        if !theta0.is_finite() {
            return Err(Error::Domain(format!("ParamSet: theta0 = {theta0} not finite")));
        }
        Ok(ParamSet { rho, eps, theta0 })
    }

    /// Mass of the heavier primary.
    pub fn m1(&self) -> f64 {
        1.0 - self.rho
    }

    /// Mass of the lighter primary.
    pub fn m2(&self) -> f64 {
        self.rho
    }

    /// Same parameters with a different separatrix phase.
    pub fn with_theta0(&self, theta0: f64) -> ParamSet {
        ParamSet { theta0, ..*self }
    }
}

/// Inertial polar state of the massless body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalState {
    /// Distance from the barycentre.
    pub r2: f64,
    /// Radial velocity.
    pub r2dot: f64,
    /// Inertial polar angle.
    pub th2: f64,
    /// Angular velocity.
    pub th2dot: f64,
}

/// McGehee-regularised state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McGeheeState {
    /// Inverse radius `u = 1/r2 > 0`.
    pub u: f64,
    /// Scaled radial velocity `v = r2dot / sqrt(u)`.
    pub v: f64,
    /// Synodic angle `theta = theta2 - t`.
    pub theta: f64,
    /// Scaled angular velocity `w = theta2dot / u^(3/2)`.
    pub w: f64,
}

/// Duffing-reduced state on a fixed energy level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingState {
    /// Synodic angle.
    pub theta: f64,
    /// Oscillator position `X = w`.
    pub x: f64,
    /// Oscillator velocity `Y = -v w / sqrt(2)`.
    pub y: f64,
}

/// Squared separations from the two primaries in physical variables.
fn separations_sq_physical(r2: f64, cos_phi: f64, rho: f64) -> (f64, f64) {
    let m1 = 1.0 - rho;
    let m2 = rho;
    let r13_sq = r2 * r2 + m2 * m2 + 2.0 * m2 * r2 * cos_phi;
    let r23_sq = r2 * r2 + m1 * m1 - 2.0 * m1 * r2 * cos_phi;
    (r13_sq, r23_sq)
}

/// Right-hand side of the physical equations of motion at time `t`:
/// returns `(r2dot, r2ddot, th2dot, th2ddot)`.
pub fn rtbp_rhs(state: &PhysicalState, p: &ParamSet, t: f64) -> Result<[f64; 4]> {
    let PhysicalState { r2, r2dot, th2, th2dot } = *state;
    if !(r2 > 1e-9) {
        return Err(Error::Domain(format!("rtbp_rhs: r2 = {r2} too close to the origin")));
    }
    let phi = th2 - t;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let (r13_sq, r23_sq) = separations_sq_physical(r2, cos_phi, p.rho);
    let floor = COLLISION_FLOOR;
    if r13_sq <= floor || r23_sq <= floor {
        return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor });
    }
    let m1 = p.m1();
    let m2 = p.m2();
    let r13_3 = r13_sq * r13_sq.sqrt();
    let r23_3 = r23_sq * r23_sq.sqrt();
    let f = -m1 * (r2 + m2 * cos_phi) / r13_3 - m2 * (r2 - m1 * cos_phi) / r23_3;
    let g = m1 * m2 * sin_phi * (1.0 / r13_3 - 1.0 / r23_3) / r2;
    Ok([r2dot, r2 * th2dot * th2dot + f, th2dot, -2.0 * r2dot * th2dot / r2 + g])
}

/// Jacobi integral in physical variables at time `t`; conserved along the
/// flow of [`rtbp_rhs`].
pub fn jacobi_constant(state: &PhysicalState, p: &ParamSet, t: f64) -> Result<f64> {
    let PhysicalState { r2, r2dot, th2, th2dot } = *state;
    if !(r2 > 1e-9) {
        return Err(Error::Domain(format!("jacobi_constant: r2 = {r2} too small")));
    }
    let cos_phi = (th2 - t).cos();
    let (r13_sq, r23_sq) = separations_sq_physical(r2, cos_phi, p.rho);
    if r13_sq <= COLLISION_FLOOR || r23_sq <= COLLISION_FLOOR {
        return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor: COLLISION_FLOOR });
    }
    Ok(0.5 * (r2dot * r2dot + r2 * r2 * (th2dot - 1.0) * (th2dot - 1.0))
        - 0.5 * r2 * r2
        - p.m1() / r13_sq.sqrt()
        - p.m2() / r23_sq.sqrt())
}

/// Physical -> McGehee change of variables at time `t`.
pub fn to_mcgehee(state: &PhysicalState, t: f64) -> Result<McGeheeState> {
    let PhysicalState { r2, r2dot, th2, th2dot } = *state;
    if !(r2 > 0.0) {
        return Err(Error::Domain(format!("to_mcgehee: r2 = {r2} must be positive")));
    }
    let u = 1.0 / r2;
    let su = u.sqrt();
    Ok(McGeheeState {
        u,
        v: r2dot / su,
        theta: th2 - t,
        w: th2dot / (u * su),
    })
}

/// McGehee -> physical change of variables at time `t`.
pub fn from_mcgehee(m: &McGeheeState, t: f64) -> Result<PhysicalState> {
    if !(m.u > 0.0) {
        return Err(Error::Domain(format!("from_mcgehee: u = {} must be positive", m.u)));
    }
    let su = m.u.sqrt();
    Ok(PhysicalState {
        r2: 1.0 / m.u,
        r2dot: m.v * su,
        th2: m.theta + t,
        th2dot: m.w * m.u * su,
    })
}

/// Squared separations as functions of `s = eps^2 U^2 X^2` (equal to `u`)
/// and the synodic angle.
fn separations_sq_s(s: f64, cos_theta: f64, rho: f64) -> (f64, f64) {
    let m1 = 1.0 - rho;
    let r13_sq = 1.0 + rho * rho * s * s + 2.0 * rho * s * cos_theta;
    let r23_sq = 1.0 + m1 * m1 * s * s - 2.0 * m1 * s * cos_theta;
    (r13_sq, r23_sq)
}

/// Force functions `(F, G, R13, R23)` evaluated at `s = eps^2 U^2 X^2`.
///
/// This is the primitive shared by the McGehee and Duffing vector fields;
/// both reduce to it because their force terms depend on the state only
/// through `s` and `theta`.
pub fn forces_fg_s(s: f64, theta: f64, rho: f64) -> Result<(f64, f64, f64, f64)> {
    let (sin_t, cos_t) = theta.sin_cos();
    let (r13_sq, r23_sq) = separations_sq_s(s, cos_t, rho);
    if r13_sq <= COLLISION_FLOOR || r23_sq <= COLLISION_FLOOR {
        return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor: COLLISION_FLOOR });
    }
    let m1 = 1.0 - rho;
    let r13 = r13_sq.sqrt();
    let r23 = r23_sq.sqrt();
    let inv13 = 1.0 / (r13_sq * r13);
    let inv23 = 1.0 / (r23_sq * r23);
    let phi = s * cos_t;
    let f = 1.0 - m1 * (1.0 + rho * phi) * inv13 - rho * (1.0 - m1 * phi) * inv23;
    let g = rho * m1 * sin_t * (inv13 - inv23);
    Ok((f, g, r13, r23))
}

/// Force functions in Duffing variables: `(F, G, R13, R23)` at
/// `s = eps^2 U^2 X^2`. `y` does not enter the forces; it is accepted so the
/// signature mirrors the state the caller holds.
pub fn forces_fg(x: f64, _y: f64, theta: f64, u_closure: f64, p: &ParamSet) -> Result<(f64, f64, f64, f64)> {
    let s = p.eps * p.eps * u_closure * u_closure * x * x;
    forces_fg_s(s, theta, p.rho)
}

/// Solve the closure equation for `U` at the state `(X, Y, theta)`.
///
/// Damped fixed-point iteration from `U = 1` with a Newton fallback; the
/// residual target is `1e-14`. For the near-separatrix states this library
/// visits, `U = 1 + O(eps^3)` and the plain iteration converges in a
/// handful of steps.
pub fn solve_u(x: f64, y: f64, theta: f64, p: &ParamSet) -> Result<f64> {
    solve_u_seeded(x, y, theta, p, 1.0)
}

/// [`solve_u`] with an explicit starting guess, for callers that sweep along
/// a trajectory and can reuse the previous point's closure value.
pub fn solve_u_seeded(x: f64, y: f64, theta: f64, p: &ParamSet, seed: f64) -> Result<f64> {
    let eps3 = p.eps.powi(3);
    let x2 = x * x;
    let cos_t = theta.cos();
    let rho = p.rho;
    let m1 = 1.0 - rho;
    // g(U) = 1 - eps^3 U^3 (Y^2 + X^4/2 - X^2 [(1-rho)/R13 + rho/R23]).
    let residual_map = |u: f64| -> Result<f64> {
        let s = p.eps * p.eps * u * u * x2;
        let (r13_sq, r23_sq) = separations_sq_s(s, cos_t, rho);
        if r13_sq <= COLLISION_FLOOR || r23_sq <= COLLISION_FLOOR {
            return Err(Error::Collision { sep_sq: r13_sq.min(r23_sq), floor: COLLISION_FLOOR });
        }
        let bracket = y * y + 0.5 * x2 * x2 - x2 * (m1 / r13_sq.sqrt() + rho / r23_sq.sqrt());
        Ok(1.0 - eps3 * u * u * u * bracket)
    };
    let mut u = if seed.is_finite() && seed > 0.0 { seed } else { 1.0 };
    let tol = 1e-14;
    let mut resid = f64::INFINITY;
    for iter in 0..100 {
        let g = residual_map(u)?;
        resid = (g - u).abs();
        if resid <= tol * u.abs().max(1.0) {
            return Ok(g);
        }
        if iter < 20 {
            // Damped fixed point: half-step toward g(U).
            u += 0.5 * (g - u);
        } else {
            // Newton on r(U) = g(U) - U with a finite-difference slope.
            let h = 1e-7 * u.abs().max(1.0);
            let gp = residual_map(u + h)?;
            let slope = (gp - g) / h - 1.0;
            if slope == 0.0 || !slope.is_finite() {
                u += 0.5 * (g - u);
            } else {
                u -= (g - u) / slope;
            }
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::NoConvergence { what: "solve_u", iters: iter + 1, residual: resid });
            }
        }
    }
    Err(Error::NoConvergence { what: "solve_u", iters: 100, residual: resid })
}

/// McGehee vector field: `d/dtau (u, theta, w, v)`.
pub fn mcgehee_rhs(m: &McGeheeState, p: &ParamSet) -> Result<[f64; 4]> {
    let McGeheeState { u, v, theta, w } = *m;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("mcgehee_rhs: u = {u} must be positive")));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    // In McGehee variables s = u exactly.
    let (f, g, _, _) = forces_fg_s(u, theta, p.rho)?;
    let u_m32 = 1.0 / (u * u.sqrt());
    Ok([
        -sqrt2 * v * u,
        sqrt2 * (w - u_m32),
        -v * w / sqrt2 + sqrt2 * u * g,
        v * v / sqrt2 + sqrt2 * w * w - sqrt2 + sqrt2 * f,
    ])
}

/// Duffing vector field on the level `eps`: `d/dtau (theta, X, Y)`.
///
/// Solves the closure for `U` internally; `|X|` below [`X_FLOOR`] is a
/// domain error because the angle equation divides by `X^3`.
pub fn duffing_rhs(s: &DuffingState, p: &ParamSet) -> Result<[f64; 3]> {
    let DuffingState { theta, x, y } = *s;
    if x.abs() < X_FLOOR {
        return Err(Error::Domain(format!("duffing_rhs: |X| = {} below floor {X_FLOOR}", x.abs())));
    }
    let u_cl = solve_u(x, y, theta, p)?;
    let (f, g, _, _) = forces_fg(x, y, theta, u_cl, p)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let eps3 = p.eps.powi(3);
    let e2u2 = p.eps * p.eps * u_cl * u_cl;
    Ok([
        sqrt2 * (x - 1.0 / (eps3 * u_cl.powi(3) * x.powi(3))),
        y + sqrt2 * e2u2 * x * x * g,
        x - x.powi(3) - x * f + sqrt2 * e2u2 * x * y * g,
    ])
}

/// McGehee -> Duffing reduction: `(X, Y, theta)` plus the closure value `U`
/// recovered from `u = eps^2 U^2 X^2`.
pub fn duffing_from_mcgehee(m: &McGeheeState, p: &ParamSet) -> Result<(DuffingState, f64)> {
    if !(m.u > 0.0) {
        return Err(Error::Domain(format!("duffing_from_mcgehee: u = {} must be positive", m.u)));
    }
    if m.w.abs() < X_FLOOR {
        return Err(Error::Domain(format!(
            "duffing_from_mcgehee: |w| = {} below floor {X_FLOOR}",
            m.w.abs()
        )));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let state = DuffingState { theta: m.theta, x: m.w, y: -m.v * m.w / sqrt2 };
    let u_closure = m.u.sqrt() / (p.eps * m.w);
    Ok((state, u_closure))
}

/// Duffing -> McGehee: solves the closure to reconstruct `u`, then maps the
/// velocities back.
pub fn mcgehee_from_duffing(d: &DuffingState, p: &ParamSet) -> Result<McGeheeState> {
    if d.x.abs() < X_FLOOR {
        return Err(Error::Domain(format!(
            "mcgehee_from_duffing: |X| = {} below floor {X_FLOOR}",
            d.x.abs()
        )));
    }
    let u_cl = solve_u(d.x, d.y, d.theta, p)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let u = (p.eps * u_cl * d.x).powi(2);
    Ok(McGeheeState {
        u,
        v: -sqrt2 * d.y / d.x,
        theta: d.theta,
        w: d.x,
    })
}

/// Exact forcing terms `(S, P, Q)` of the deviation equations at
/// `(x, y, Theta)` relative to the separatrix point `tau`.
///
/// With `X = x + a(tau)`, `Y = y + b(tau)`, `theta = Theta + theta0 + psi(tau)`:
///
/// ```text
/// S = x^3 + 3 a x^2 + 3 a^2 x + (U^3 - 1) X^3 + eps^3 U^3 x X^3 a^3,
/// P = sqrt(2) eps^2 U^2 X^2 G,
/// Q = -x^3 - 3 a x^2 - X F + sqrt(2) eps^2 U^2 X Y G,
/// ```
///
/// where `U` solves the closure at `(X, Y, theta)`. Requires `X > 0` (the
/// deviation must not push the state through the oscillator's turning
/// surface).
pub fn spq_exact(x: f64, y: f64, theta_dev: f64, tau: f64, p: &ParamSet) -> Result<(f64, f64, f64)> {
    let fr = eval_frame(tau, p.eps)?;
    let a = fr.a;
    let x_big = x + a;
    if !(x_big > 0.0) {
        return Err(Error::Domain(format!(
            "spq_exact: X = x + a = {x_big} must stay positive (x = {x}, a = {a})"
        )));
    }
    let y_big = y + fr.b;
    let theta = theta_dev + p.theta0 + fr.psi;
    let u_cl = solve_u(x_big, y_big, theta, p)?;
    let (f, g, _, _) = forces_fg(x_big, y_big, theta, u_cl, p)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let eps3 = p.eps.powi(3);
    let u3 = u_cl * u_cl * u_cl;
    let x3 = x_big * x_big * x_big;
    let s_val = x * x * x + 3.0 * a * x * x + 3.0 * a * a * x + (u3 - 1.0) * x3
        + eps3 * u3 * x * x3 * a * a * a;
    let p_val = sqrt2 * p.eps * p.eps * u_cl * u_cl * x_big * x_big * g;
    let q_val = -x * x * x - 3.0 * a * x * x - x_big * f
        + sqrt2 * p.eps * p.eps * u_cl * u_cl * x_big * y_big * g;
    Ok((s_val, p_val, q_val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homoclinic::psi_prime;
    use approx::assert_abs_diff_eq;

    fn p_ref() -> ParamSet {
        ParamSet::new(0.2, 0.35, 0.7).unwrap()
    }

    #[test]
    fn param_set_validation() {
        assert!(ParamSet::new(0.2, 0.35, 0.0).is_ok());
        assert!(ParamSet::new(0.0, 0.5, 1.0).is_ok());
        assert!(ParamSet::new(-0.1, 0.4, 0.0).is_ok()); // analytic continuation in rho
        assert!(ParamSet::new(0.2, 0.0, 0.0).is_err());
        assert!(ParamSet::new(0.2, 0.7, 0.0).is_err());
        assert!(ParamSet::new(1.2, 0.4, 0.0).is_err());
        assert!(ParamSet::new(0.2, 0.4, f64::NAN).is_err());
    }

    #[test]
    fn physical_mcgehee_round_trip() {
        let s = PhysicalState { r2: 3.7, r2dot: -0.21, th2: 2.9, th2dot: 0.13 };
        let t = 1.234;
        let m = to_mcgehee(&s, t).unwrap();
        let back = from_mcgehee(&m, t).unwrap();
        assert_abs_diff_eq!(back.r2, s.r2, epsilon = 1e-14);
        assert_abs_diff_eq!(back.r2dot, s.r2dot, epsilon = 1e-14);
        assert_abs_diff_eq!(back.th2, s.th2, epsilon = 1e-14);
        assert_abs_diff_eq!(back.th2dot, s.th2dot, epsilon = 1e-16);
    }

    #[test]
    fn jacobi_is_a_first_integral_along_the_field() {
        // dJ/dt along the flow vanishes: check with a central difference of
        // J along a short exact (RK4) trajectory.
        let p = p_ref();
        let mut s = PhysicalState { r2: 2.4, r2dot: 0.05, th2: 0.3, th2dot: 0.31 };
        let mut t = 0.0;
        let j0 = jacobi_constant(&s, &p, t).unwrap();
        let dt = 1e-3;
        for _ in 0..200 {
            // One classical RK4 step.
            let y = [s.r2, s.r2dot, s.th2, s.th2dot];
            let f = |state: [f64; 4], tt: f64| -> [f64; 4] {
                let st = PhysicalState { r2: state[0], r2dot: state[1], th2: state[2], th2dot: state[3] };
                rtbp_rhs(&st, &p, tt).unwrap()
            };
            let k1 = f(y, t);
            let add = |a: [f64; 4], b: [f64; 4], c: f64| {
                [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2], a[3] + c * b[3]]
            };
            let k2 = f(add(y, k1, dt / 2.0), t + dt / 2.0);
            let k3 = f(add(y, k2, dt / 2.0), t + dt / 2.0);
            let k4 = f(add(y, k3, dt), t + dt);
            let ynew = [
                y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                y[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
                y[3] + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
            ];
            s = PhysicalState { r2: ynew[0], r2dot: ynew[1], th2: ynew[2], th2dot: ynew[3] };
            t += dt;
        }
        let j1 = jacobi_constant(&s, &p, t).unwrap();
        assert_abs_diff_eq!(j0, j1, epsilon = 1e-9);
    }

    #[test]
    fn mcgehee_field_is_the_physical_field_in_new_variables() {
        // Map a physical state to McGehee, advance the physical flow by a
        // tiny RK4 step, remap, and compare the difference quotient with the
        // McGehee field times d tau / dt = u^{3/2} / sqrt(2).
        let p = p_ref();
        let t0 = 0.6;
        let s0 = PhysicalState { r2: 1.9, r2dot: -0.11, th2: 1.1, th2dot: 0.42 };
        let m0 = to_mcgehee(&s0, t0).unwrap();
        let dt = 5e-6;
        let f = |st: &PhysicalState, tt: f64| rtbp_rhs(st, &p, tt).unwrap();
        let step = |st: &PhysicalState, tt: f64, h: f64| -> PhysicalState {
            let y = [st.r2, st.r2dot, st.th2, st.th2dot];
            let k1 = f(st, tt);
            let mk = |c: f64, k: &[f64; 4]| PhysicalState {
                r2: y[0] + c * k[0],
                r2dot: y[1] + c * k[1],
                th2: y[2] + c * k[2],
                th2dot: y[3] + c * k[3],
            };
            let k2 = f(&mk(h / 2.0, &k1), tt + h / 2.0);
            let k3 = f(&mk(h / 2.0, &k2), tt + h / 2.0);
            let k4 = f(&mk(h, &k3), tt + h);
            PhysicalState {
                r2: y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                r2dot: y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                th2: y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
                th2dot: y[3] + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
            }
        };
        let sp = step(&s0, t0, dt);
        let sm = step(&s0, t0, -dt);
        let mp = to_mcgehee(&sp, t0 + dt).unwrap();
        let mm = to_mcgehee(&sm, t0 - dt).unwrap();
        let dtau_dt = m0.u * m0.u.sqrt() / std::f64::consts::SQRT_2;
        let rhs = mcgehee_rhs(&m0, &p).unwrap();
        let quotient = [
            (mp.u - mm.u) / (2.0 * dt) / dtau_dt,
            (mp.theta - mm.theta) / (2.0 * dt) / dtau_dt,
            (mp.w - mm.w) / (2.0 * dt) / dtau_dt,
            (mp.v - mm.v) / (2.0 * dt) / dtau_dt,
        ];
        for (have, want) in quotient.iter().zip(rhs.iter()) {
            assert_abs_diff_eq!(have, want, epsilon = 1e-6);
        }
    }

    #[test]
    fn closure_is_exactly_one_on_the_separatrix_at_rho_zero() {
        let p = ParamSet::new(0.0, 0.45, 0.3).unwrap();
        for &tau in &[0.0, 0.8, 2.0, 5.0] {
            let fr = eval_frame(tau, p.eps).unwrap();
            let u = solve_u(fr.a, fr.b, 1.234 + tau, &p).unwrap();
            assert_abs_diff_eq!(u, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn closure_stays_within_eps_cubed_of_one_near_the_separatrix() {
        let p = p_ref();
        for &tau in &[0.0, 0.5, 1.5, 3.0, 6.0] {
            let fr = eval_frame(tau, p.eps).unwrap();
            let u = solve_u(fr.a + 0.01, fr.b - 0.02, 1.0 + tau, &p).unwrap();
            // |U - 1| <= C eps^3 with a generous C.
            assert!((u - 1.0).abs() <= 10.0 * p.eps.powi(3), "U = {u} at tau = {tau}");
        }
    }

    #[test]
    fn forces_vanish_at_rho_zero() {
        let (f, g, r13, r23) = forces_fg_s(0.3, 1.1, 0.0).unwrap();
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-15);
        assert_eq!(g, 0.0);
        assert_eq!(r13, 1.0);
        assert!((r23 - (1.0 + 0.09 - 0.6 * 1.1f64.cos()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn duffing_reduction_round_trips_through_mcgehee() {
        let p = p_ref();
        let d0 = DuffingState { theta: 0.9, x: 1.3, y: -0.25 };
        let m = mcgehee_from_duffing(&d0, &p).unwrap();
        let (d1, u_back) = duffing_from_mcgehee(&m, &p).unwrap();
        assert_abs_diff_eq!(d1.x, d0.x, epsilon = 1e-13);
        assert_abs_diff_eq!(d1.y, d0.y, epsilon = 1e-13);
        assert_abs_diff_eq!(d1.theta, d0.theta, epsilon = 1e-15);
        let u_direct = solve_u(d0.x, d0.y, d0.theta, &p).unwrap();
        assert_abs_diff_eq!(u_back, u_direct, epsilon = 1e-12);
    }

    #[test]
    fn duffing_angle_equation_matches_mcgehee_angle_equation() {
        // theta' = sqrt(2)(X - 1/(eps^3 U^3 X^3)) must equal
        // sqrt(2)(w - u^{-3/2}) under u = eps^2 U^2 X^2.
        let p = p_ref();
        let d = DuffingState { theta: -0.4, x: 1.21, y: 0.18 };
        let rhs_d = duffing_rhs(&d, &p).unwrap();
        let m = mcgehee_from_duffing(&d, &p).unwrap();
        let rhs_m = mcgehee_rhs(&m, &p).unwrap();
        assert_abs_diff_eq!(rhs_d[0], rhs_m[1], epsilon = 1e-11);
    }

    #[test]
    fn spq_matches_raw_vector_field_forms() {
        // Independent assembly: S from the angle equation,
        // S_raw = eps^3 U^3 a^3 X^3 x + U^3 X^3 - a^3, and Q from
        // Q_raw = (X - X^3 - X F + sqrt2 eps^2 U^2 X Y G) - b' - (1 - 3a^2) x.
        let cases = [
            (0.01, -0.02, 0.1, 1.0, 0.2, 0.3, 0.5),
            (-0.03, 0.015, -0.2, 0.4, 0.1, 0.45, 1.1),
            (0.0, 0.0, 0.0, 2.0, 0.3, 0.5, 0.0),
        ];
        for &(x, y, th_dev, tau, rho, eps, th0) in &cases {
            let p = ParamSet::new(rho, eps, th0).unwrap();
            let (s_val, p_val, q_val) = spq_exact(x, y, th_dev, tau, &p).unwrap();
            let fr = eval_frame(tau, eps).unwrap();
            let a = fr.a;
            let x_big = x + a;
            let y_big = y + fr.b;
            let theta = th_dev + th0 + fr.psi;
            let u = solve_u(x_big, y_big, theta, &p).unwrap();
            let (f, g, _, _) = forces_fg(x_big, y_big, theta, u, &p).unwrap();
            let sqrt2 = std::f64::consts::SQRT_2;
            let u3 = u * u * u;
            let x3 = x_big.powi(3);
            let s_raw = eps.powi(3) * u3 * a.powi(3) * x3 * x + u3 * x3 - a.powi(3);
            let q_raw = (x_big - x3 - x_big * f + sqrt2 * eps * eps * u * u * x_big * y_big * g)
                - fr.bprime
                - (1.0 - 3.0 * a * a) * x;
            let p_raw = sqrt2 * eps * eps * u * u * x_big * x_big * g;
            assert_abs_diff_eq!(s_val, s_raw, epsilon = 1e-13);
            assert_abs_diff_eq!(q_val, q_raw, epsilon = 1e-13);
            assert_abs_diff_eq!(p_val, p_raw, epsilon = 1e-15);
            // Angle-equation consistency: sqrt2 S/(eps^3 U^3 X^3 a^3)
            // equals theta' - psi'.
            let lhs = sqrt2 * s_val / (eps.powi(3) * u3 * x3 * a.powi(3));
            let theta_prime = sqrt2 * (x_big - 1.0 / (eps.powi(3) * u3 * x3));
            assert_abs_diff_eq!(lhs, theta_prime - psi_prime(tau, eps), epsilon = 1e-9);
        }
    }

    #[test]
    fn collision_is_detected() {
        // s cos(theta) chosen so R23^2 crosses zero: s = 1, theta = 0,
        // rho = 0 gives R23^2 = 1 + 1 - 2 = 0.
        let r = forces_fg_s(1.0, 0.0, 0.0);
        assert!(matches!(r, Err(Error::Collision { .. })));
    }

    #[test]
    fn duffing_rhs_rejects_small_x() {
        let p = p_ref();
        let d = DuffingState { theta: 0.0, x: 1e-7, y: 0.0 };
        assert!(duffing_rhs(&d, &p).is_err());
    }
}
