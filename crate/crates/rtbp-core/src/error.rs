//! Error taxonomy shared by every module.
//!
//! Numerical routines return [`Result`] rather than panicking: domain
//! violations, failed convergence, and budget exhaustion are all ordinary
//! outcomes when parameters are pushed toward the singular limits this
//! library studies. Each variant carries enough context to reconstruct what
//! failed without re-running the computation.

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the operation
    /// (negative radicand, vanishing denominator, amplitude out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The massless body came within the collision floor of a primary:
    /// the mutual separation entering an inverse-cube force is too small.
    #[error("collision: separation^2 = {sep_sq:.3e} at or below floor {floor:.3e}")]
    Collision { sep_sq: f64, floor: f64 },

    /// A fixed-point or Newton solve did not reach its residual target.
    #[error("no convergence in {what} after {iters} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iters: usize,
        residual: f64,
    },

    /// The adaptive ODE integrator drove the step below the representable
    /// minimum while trying to satisfy its error tolerance.
    #[error("step size underflow at t = {t:.6e} (step {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// An adaptive quadrature needed more panels than its configured budget.
    #[error("panel budget exceeded: needed more than {cap} panels")]
    PanelBudgetExceeded { cap: usize },

    /// A bracketing root finder was handed endpoints with equal signs.
    #[error("no sign change on bracket [{lo:.6e}, {hi:.6e}]: f = {f_lo:.3e}, {f_hi:.3e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A Picard iterate left the closed box in which the integral operator
    /// is contracting.
    #[error("iterate left the contraction domain at tau = {tau:.4} (scaled amplitude {amplitude:.3e} > 1)")]
    DomainEscape { tau: f64, amplitude: f64 },

    /// An iteration hit its cap before meeting the requested tolerance.
    #[error("{what} exceeded {iters} iterations; last residual {residual:.3e}")]
    MaxIterExceeded {
        what: &'static str,
        iters: usize,
        residual: f64,
    },

    /// A coefficient or integral index lies outside the admissible set.
    #[error("index outside the admissible set: {0}")]
    Index(String),

    /// A run configuration is structurally invalid (bad flag combination,
    /// malformed sweep, unknown format, ...).
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name of the variant, used in CLI reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Collision { .. } => "CollisionError",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::PanelBudgetExceeded { .. } => "PanelBudgetExceeded",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::DomainEscape { .. } => "DomainEscape",
            Error::MaxIterExceeded { .. } => "MaxIterExceeded",
            Error::Index(_) => "IndexError",
            Error::Config(_) => "ConfigError",
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_stable() {
        assert_eq!(Error::Domain("x".into()).name(), "DomainError");
        assert_eq!(
            Error::Collision { sep_sq: 0.0, floor: 1e-12 }.name(),
            "CollisionError"
        );
        assert_eq!(
            Error::MaxIterExceeded { what: "picard", iters: 3, residual: 1.0 }.name(),
            "MaxIterExceeded"
        );
    }

    #[test]
    fn display_carries_context() {
        let e = Error::NoSignChange { lo: 0.0, hi: 1.0, f_lo: 2.0, f_hi: 3.0 };
        let s = format!("{e}");
        assert!(s.contains("bracket"));
        assert!(s.contains("0.0"));
    }
}
