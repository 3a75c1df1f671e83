//! Numerical study of near-collision ("second species") dynamics in the
//! restricted circular planar three-body problem.
//!
//! The library is organised around a chain of exact changes of variables that
//! turn the equations of motion for the massless body into a perturbed Duffing
//! oscillator, and around the quantities that measure the splitting of its
//! stable and unstable manifolds:
//!
//! * [`model`] — the equations of motion in physical polar, McGehee, and
//!   Duffing-like coordinates, the Jacobi integral, and the algebraic closure
//!   `U` that eliminates the energy level.
//! * [`homoclinic`] — the unperturbed separatrix `(a, b)` of the Duffing
//!   oscillator, the fast angle `psi` along it, and the linearised frame
//!   `(M, W)` adapted to the separatrix together with its scalings.
//! * [`numerics`] — shared numerical kit: an embedded Runge–Kutta integrator
//!   with dense output, adaptive and oscillatory panel quadrature,
//!   trapezoidal Fourier projection, and bracketed root finding.
//! * [`manifold`] — Picard iteration on the integral equations for the
//!   stable/unstable solutions, and the splitting distance they define.
//! * [`melnikov`] — the first-order (in the mass ratio) splitting function
//!   `D0`, evaluated both by direct quadrature and by an explicit Fourier
//!   series whose coefficients are exact rationals.
//! * [`asymptotics`] — the complex-plane representation of the Fourier
//!   coefficients, their steepest-descent evaluation, and the exponentially
//!   small leading term of the splitting as `eps -> 0`.
//! * [`verify`] — ten numbered cross-validation criteria tying all of the
//!   above together; the CLI `verify` subcommand and the acceptance test
//!   target run exactly these.
//!
//! Conventions used throughout: the two primaries have masses `1 - rho` and
//! `rho` with `rho` in `[0, 1/2]`; the energy parameter is `eps` with
//! `eps^3 = 1/|J|^3` fixing the Jacobi constant `J < 0`; `theta0` is the
//! phase of the separatrix relative to the binary. All floating point work is
//! `f64`.

pub mod asymptotics;
pub mod error;
pub mod homoclinic;
pub mod manifold;
pub mod melnikov;
pub mod model;
pub mod numerics;
pub mod verify;

pub use error::{Error, Result};
pub use model::ParamSet;
