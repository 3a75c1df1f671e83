//! Shared numerical kit.
//!
//! Everything here is deterministic: fixed quadrature tables, fixed panel
//! subdivision rules, and integer-driven refinement, so repeated runs produce
//! identical bytes. The submodules are independent of the dynamical model;
//! they know nothing about the three-body problem beyond the shape of the
//! integrands they are handed.
//!
//! * [`quad`] — adaptive panel quadrature on finite windows, improper
//!   integrals over the real line with an envelope-certified tail cut, and a
//!   phase-driven panel plan for integrands oscillating like
//!   `exp(i q psi(tau))`.
//! * [`ode`] — an explicit embedded Runge–Kutta (Dormand–Prince 5(4)) pair
//!   with dense output.
//! * [`fourier`] — trapezoidal sine projections on a periodic grid, exact
//!   for trigonometric polynomials far beyond the orders needed here.
//! * [`roots`] — a bracketed bisection/secant hybrid that also reports a
//!   central-difference derivative at the root.

pub mod fourier;
pub mod ode;
pub mod quad;
pub mod roots;

pub use fourier::{fourier_project, Parity};
pub use ode::{integrate_ode, OdeSolution, OdeSpec};
pub use quad::{quad_adaptive, quad_improper, OscPlan, QuadSpec};
pub use roots::{find_zero, RootReport};
