//! Built-in cross-validation suites.
//!
//! Ten numbered criteria exercise the library end to end:
//!
//! 1.  algebraic identities of the separatrix frame and of the cubic
//!     inversion used by the contour integrals;
//! 2.  conservation of the Jacobi integral along the physical flow;
//! 3.  exact rational pins of the series coefficients;
//! 4.  agreement of the complex-contour and real-line routes to the tail
//!     integrals;
//! 5.  the steepest-descent scaling law of two auxiliary tail integrals;
//! 6.  the Fourier series of the splitting function against direct
//!     quadrature;
//! 7.  extraction of the exponentially small leading constant from the
//!     direct quadrature, compared against both candidate closed forms;
//! 8.  contraction of the Picard iteration for the manifold solutions;
//! 9.  the vanishing-mass-ratio limit of the manifold splitting against the
//!     first-order splitting function;
//! 10. location and transversality of the symmetric homoclinic intersection.
//!
//! Each criterion returns a [`CriterionReport`] carrying one [`Check`] per
//! asserted inequality. The CLI `verify` subcommand and the `acceptance`
//! integration-test target both run exactly these functions, so the
//! command-line report and CI agree by construction. Reports contain no
//! wall-clock or other nondeterministic data; a fixed build produces
//! byte-identical output for a fixed configuration.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::asymptotics::{
    leading_splitting, leading_splitting_resolved, y_of_z, z_integral, ZIntegralSpec, ZPath,
    LEADING_COEFF_CATALOG, LEADING_COEFF_RESOLVED,
};
use crate::error::Result;
use crate::homoclinic::eval_frame;
use crate::manifold::{
    find_homoclinic, picard_step, seed_trajectory, splitting_distance, weighted_delta, Side,
};
use crate::melnikov::{d0_direct, fourier_series_d0, series_coefficients, Truncation};
use crate::model::{jacobi_constant, rtbp_rhs, ParamSet, PhysicalState};
use crate::numerics::{integrate_ode, OdeSpec};

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// One asserted comparison inside a criterion.
#[derive(Debug, Clone)]
pub struct Check {
    /// What is being compared.
    pub name: String,
    /// The measured number.
    pub observed: f64,
    /// The bound it is held against.
    pub bound: f64,
    /// Sense of the comparison: `"<="`, `">="` or `"in"` (interval given in
    /// the name).
    pub relation: &'static str,
    /// Whether the comparison held.
    pub passed: bool,
}

impl Check {
    /// `observed <= bound`, both finite.
    pub fn le(name: impl Into<String>, observed: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            bound,
            relation: "<=",
            passed: observed.is_finite() && observed <= bound,
        }
    }

    /// `observed >= bound`, `observed` finite.
    pub fn ge(name: impl Into<String>, observed: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            observed,
            bound,
            relation: ">=",
            passed: observed.is_finite() && observed >= bound,
        }
    }

    /// `observed` inside `[lo, hi]`; the bounds are recorded as `lo` in
    /// `bound` and the interval spelled out in the name.
    pub fn within(name: impl Into<String>, observed: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: format!("{} in [{lo}, {hi}]", name.into()),
            observed,
            bound: hi,
            relation: "in",
            passed: observed.is_finite() && observed >= lo && observed <= hi,
        }
    }
}

/// Outcome of one numbered criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// Criterion number, 1 through 10.
    pub number: u32,
    /// Short stable name.
    pub name: &'static str,
    /// True when every check passed and the criterion body completed.
    pub passed: bool,
    /// One-paragraph human summary with the key numbers.
    pub summary: String,
    /// The individual comparisons.
    pub checks: Vec<Check>,
}

/// Run a criterion body, converting an internal error into a failed report
/// that names the error variant.
fn guarded<F>(number: u32, name: &'static str, body: F) -> CriterionReport
where
    F: FnOnce(&mut Vec<Check>) -> Result<String>,
{
    let mut checks = Vec::new();
    match body(&mut checks) {
        Ok(summary) => {
            let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
            CriterionReport { number, name, passed, summary, checks }
        }
        Err(e) => CriterionReport {
            number,
            name,
            passed: false,
            summary: format!("aborted by {}: {}", e.name(), e),
            checks,
        },
    }
}

/// Normalized residual of `lhs = rhs`, flat for tiny and huge magnitudes.
fn ident_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs())
}

fn big_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// 1. Frame identities
// ---------------------------------------------------------------------------

/// Differential and algebraic identities of the separatrix frame, its exact
/// parities, and the cubic inversion behind the contour integrals, each on
/// 200 sample points with normalized residuals below `1e-11`.
pub fn criterion_01_frame_identities() -> CriterionReport {
    guarded(1, "frame-identities", |checks| {
        const N: usize = 200;
        const EPS: f64 = 0.35;
        let sqrt2 = std::f64::consts::SQRT_2;

        // Independent closed forms, from the hyperbolic representation
        // rather than from the recurrences the frame evaluation itself uses.
        let mut r_bprime_recur = 0.0f64; // b' = a - a^3
        let mut r_bprime_hyper = 0.0f64; // b' = sqrt(2) (cosh^2 - 2) / cosh^3
        let mut r_bsecond = 0.0f64; //      b'' = (1 - 3 a^2) b
        let mut r_energy = 0.0f64; //       b^2 = a^2 - a^4 / 2
        let mut r_h_ode = 0.0f64; //        h' = (2 b / a) h + 3
        let mut parity = [0.0f64; 7]; //    a, b, b', psi, h, H, Htilde

        for i in 0..N {
            let tau = -8.0 + 16.0 * (i as f64) / ((N - 1) as f64);
            let f = eval_frame(tau, EPS)?;
            let g = eval_frame(-tau, EPS)?;
            let (s, c) = (tau.sinh(), tau.cosh());

            r_bprime_recur = r_bprime_recur.max(ident_residual(f.bprime, f.a - f.a.powi(3)));
            r_bprime_hyper =
                r_bprime_hyper.max(ident_residual(f.bprime, sqrt2 * (c * c - 2.0) / c.powi(3)));
            let bsecond = sqrt2 * s * (6.0 - c * c) / c.powi(4);
            r_bsecond = r_bsecond.max(ident_residual(bsecond, (1.0 - 3.0 * f.a * f.a) * f.b));
            r_energy = r_energy
                .max(ident_residual(f.b * f.b, f.a * f.a - 0.5 * f.a.powi(4)));
            let h_prime = 3.0 / (c * c) * (1.0 - tau * s / c);
            r_h_ode = r_h_ode.max(ident_residual(h_prime, 2.0 * f.b / f.a * f.h + 3.0));

            let pairs = [
                (f.a, g.a, 1.0),
                (f.b, g.b, -1.0),
                (f.bprime, g.bprime, 1.0),
                (f.psi, g.psi, -1.0),
                (f.h, g.h, -1.0),
                (f.big_h, g.big_h, 1.0),
                (f.big_h_tilde, g.big_h_tilde, -1.0),
            ];
            for (k, (here, mirrored, sign)) in pairs.into_iter().enumerate() {
                parity[k] = parity[k].max(ident_residual(mirrored, sign * here));
            }
        }

        let mut r_cubic = 0.0f64;
        for i in 0..N {
            let z = -40.0 + 80.0 * (i as f64) / ((N - 1) as f64);
            let y = y_of_z(z);
            r_cubic = r_cubic.max((y * y * y + 12.0 * y - 2.0 * z).abs() / (1.0 + 2.0 * z.abs()));
        }

        const BOUND: f64 = 1e-11;
        checks.push(Check::le("b' = a - a^3", r_bprime_recur, BOUND));
        checks.push(Check::le("b' = sqrt2 (cosh^2 - 2)/cosh^3", r_bprime_hyper, BOUND));
        checks.push(Check::le("b'' = (1 - 3 a^2) b", r_bsecond, BOUND));
        checks.push(Check::le("b^2 = a^2 - a^4/2", r_energy, BOUND));
        checks.push(Check::le("h' = (2 b / a) h + 3", r_h_ode, BOUND));
        let names = [
            "a even", "b odd", "b' even", "psi odd", "h odd", "H even", "Htilde odd",
        ];
        for (k, name) in names.iter().enumerate() {
            checks.push(Check::le(format!("parity: {name}"), parity[k], BOUND));
        }
        checks.push(Check::le("cubic inversion 2z = y^3 + 12y", r_cubic, BOUND));

        let worst = checks.iter().map(|c| c.observed).fold(0.0f64, f64::max);
        Ok(format!(
            "13 identities on {N} sample points each; worst normalized residual {worst:.3e} \
             against bound {BOUND:.1e}"
        ))
    })
}

// ---------------------------------------------------------------------------
// 2. Jacobi conservation
// ---------------------------------------------------------------------------

/// The Jacobi integral is conserved to `1e-8` over a time span of 50 by the
/// adaptive integrator at tolerance `1e-11`, for five seeded-random initial
/// conditions at `(rho, eps) = (0.2, 0.35)`.
pub fn criterion_02_jacobi_conservation() -> CriterionReport {
    guarded(2, "jacobi-conservation", |checks| {
        let p = ParamSet::new(0.2, 0.35, 0.0)?;
        let spec = OdeSpec { rel_tol: 1e-11, abs_tol: 1e-13, ..OdeSpec::default() };
        let mut rng = StdRng::seed_from_u64(20260819);
        let mut worst = 0.0f64;

        for trial in 0..5 {
            // A moderately eccentric orbit outside the binary: near-circular
            // speed about the total mass, randomly perturbed, stays clear of
            // both primaries for the whole window.
            let r2 = 1.6 + 0.8 * rng.random::<f64>();
            let th2 = TAU * rng.random::<f64>();
            let th2dot = r2.powf(-1.5) * (1.0 + 0.1 * (rng.random::<f64>() - 0.5));
            let r2dot = 0.1 * (rng.random::<f64>() - 0.5);

            let state0 = PhysicalState { r2, r2dot, th2, th2dot };
            let j0 = jacobi_constant(&state0, &p, 0.0)?;

            let mut y = [r2, r2dot, th2, th2dot];
            let mut drift = 0.0f64;
            let mut field = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
                let st = PhysicalState { r2: y[0], r2dot: y[1], th2: y[2], th2dot: y[3] };
                out.copy_from_slice(&rtbp_rhs(&st, &p, t)?);
                Ok(())
            };
            for seg in 0..10 {
                let t0 = 5.0 * seg as f64;
                let t1 = t0 + 5.0;
                let sol = integrate_ode(&mut field, &y, (t0, t1), &spec)?;
                y.copy_from_slice(sol.last());
                let st = PhysicalState { r2: y[0], r2dot: y[1], th2: y[2], th2dot: y[3] };
                drift = drift.max((jacobi_constant(&st, &p, t1)? - j0).abs());
            }
            worst = worst.max(drift);
            checks.push(Check::le(
                format!("ic{} Jacobi drift over [0, 50]", trial + 1),
                drift,
                1e-8,
            ));
        }

        Ok(format!(
            "five seeded-random orbits integrated to t = 50 at tolerance 1e-11; worst \
             Jacobi drift {worst:.3e} against bound 1e-8"
        ))
    })
}

// ---------------------------------------------------------------------------
// 3. Exact coefficient pins
// ---------------------------------------------------------------------------

/// The exact rational series coefficients at the base lattice point
/// reproduce the catalogued values `99/16` and `-123/8` exactly.
pub fn criterion_03_coefficient_pins() -> CriterionReport {
    guarded(3, "coefficient-pins", |checks| {
        let s = series_coefficients(0, 1, 0)?;
        let want_c2 = big_ratio(99, 16);
        let want_cal = big_ratio(-123, 8);

        let diff_c2 = (&s.c2 - &want_c2).to_f64().unwrap_or(f64::NAN).abs();
        let diff_cal = (&s.cal_c - &want_cal).to_f64().unwrap_or(f64::NAN).abs();
        checks.push(Check {
            name: "C2(0,1,0) = 99/16 exactly".into(),
            observed: diff_c2,
            bound: 0.0,
            relation: "<=",
            passed: s.c2 == want_c2,
        });
        checks.push(Check {
            name: "calC(0,1,0) = -123/8 exactly".into(),
            observed: diff_cal,
            bound: 0.0,
            relation: "<=",
            passed: s.cal_c == want_cal,
        });

        Ok("base-point coefficients match 99/16 and -123/8 by exact rational equality".into())
    })
}

// ---------------------------------------------------------------------------
// 4. Contour vs real-line integrals
// ---------------------------------------------------------------------------

/// Five tail integrals evaluated along the complex contour agree with the
/// independent real-line route to `1e-8` relative, at `eps` 0.40 and 0.45.
pub fn criterion_04_dual_route_integrals() -> CriterionReport {
    guarded(4, "contour-vs-line", |checks| {
        const INDICES: [(u32, u32, u32); 5] = [(3, 1, 0), (5, 1, 0), (9, 1, 0), (7, 1, 1), (5, 2, 0)];
        let mut worst = 0.0f64;
        for &eps in &[0.40f64, 0.45] {
            for &(p, q, r) in &INDICES {
                let spec = ZIntegralSpec::new(p, q, r, eps, ZPath::Shifted)?;
                let contour = spec.value()?;
                let line = spec.tau_reference(1e-12)?;
                let rel = (contour - line).norm() / line.norm();
                worst = worst.max(rel);
                checks.push(Check::le(
                    format!("I({p},{q},{r}) eps={eps:.2} contour vs line"),
                    rel,
                    1e-8,
                ));
            }
        }
        Ok(format!(
            "ten contour/line pairs; worst relative disagreement {worst:.3e} against bound 1e-8"
        ))
    })
}

// ---------------------------------------------------------------------------
// 5. Steepest-descent scaling of the auxiliary tail integrals
// ---------------------------------------------------------------------------

/// Two auxiliary contour integrals approach their closed-form leading
/// asymptotics with relative error `<= C eps^(3/2)` for a single constant
/// `C` across `eps` in {0.45, 0.40, 0.35}.
pub fn criterion_05_tail_asymptotics() -> CriterionReport {
    guarded(5, "tail-asymptotics", |checks| {
        let sqrt_pi = PI.sqrt();
        let eps_list = [0.45f64, 0.40, 0.35];

        // rel error scaled by eps^{-3/2}, per family and per eps.
        let mut scaled = [[0.0f64; 3]; 2];
        for (i, &eps) in eps_list.iter().enumerate() {
            let e3 = eps.powi(3);
            let amp = eps.powf(-4.5);

            let k1 = 1.0 / (12.0 * e3);
            let v1 = (16.0 / 3.0) * z_integral(5, 1, 0, k1, ZPath::Shifted)?.re;
            let pred1 = (4.0 * sqrt_pi / 3.0) * amp * (-2.0 / (3.0 * e3)).exp();
            let rel1 = ((v1 - pred1) / pred1).abs();

            let k2 = 1.0 / (24.0 * e3);
            let v2 = (64.0 / 3.0) * z_integral(5, 3, 0, k2, ZPath::Shifted)?.re;
            let pred2 = -((2.0 * PI).sqrt() / 12.0) * amp * (-1.0 / (3.0 * e3)).exp();
            let rel2 = ((v2 - pred2) / pred2).abs();

            let scale = eps.powf(1.5);
            scaled[0][i] = rel1 / scale;
            scaled[1][i] = rel2 / scale;
        }

        let c_fit = scaled.iter().flatten().copied().fold(0.0f64, f64::max);
        for (fam, label) in ["first", "second"].iter().enumerate() {
            for (i, &eps) in eps_list.iter().enumerate() {
                checks.push(Check::le(
                    format!("{label} integral: rel error / eps^1.5 at eps={eps:.2}"),
                    scaled[fam][i],
                    2.5,
                ));
            }
            // The scaled error must not grow as eps shrinks, otherwise the
            // true order would be below 3/2 and no single C could work
            // asymptotically.
            for i in 1..3 {
                checks.push(Check::le(
                    format!(
                        "{label} integral: scaled error ratio eps={:.2}/{:.2}",
                        eps_list[i],
                        eps_list[i - 1]
                    ),
                    scaled[fam][i] / scaled[fam][i - 1],
                    1.05,
                ));
            }
        }

        Ok(format!(
            "both integrals follow their leading asymptotics with rel error <= C eps^1.5, \
             fitted C = {c_fit:.3} (bound 2.5), scaled errors non-increasing in eps"
        ))
    })
}

// ---------------------------------------------------------------------------
// 6. Fourier series vs direct quadrature
// ---------------------------------------------------------------------------

/// The Fourier series of the splitting function matches the direct
/// quadrature within `max(1e-4 relative, series tail estimate)` on eight
/// phases for each `eps` in {0.40, 0.45, 0.50}.
pub fn criterion_06_series_vs_direct() -> CriterionReport {
    guarded(6, "series-vs-direct", |checks| {
        let thetas = [0.3f64, 0.7, 1.1, 1.5, 1.9, 2.3, 2.7, 3.1];
        let mut worst = 0.0f64;
        for &eps in &[0.40f64, 0.45, 0.50] {
            let table = fourier_series_d0(eps, Truncation::default())?;
            let tail = table.d0_tail_bound();
            for &theta0 in &thetas {
                let (direct, _) = d0_direct(theta0, eps)?;
                let series = table.eval(theta0);
                let tol = (1e-4 * direct.abs()).max(tail);
                let diff = (direct - series).abs();
                worst = worst.max(diff / tol);
                checks.push(Check::le(
                    format!("eps={eps:.2} theta0={theta0:.1}: |direct - series|"),
                    diff,
                    tol,
                ));
            }
        }
        Ok(format!(
            "24 phase/energy pairs; worst |direct - series| at {worst:.3} of its allowance \
             max(1e-4 relative, series tail bound)"
        ))
    })
}

// ---------------------------------------------------------------------------
// 7. Leading-constant extraction
// ---------------------------------------------------------------------------

/// Direct quadrature of the splitting at `theta0 = pi/2`, scaled by
/// `eps^-5 exp(-1/(3 eps^3))`, settles onto a constant as `eps` decreases
/// through {0.50, 0.45, 0.40, 0.35}; the settled value is compared against
/// the two candidate closed-form constants and the verdict recorded.
pub fn criterion_07_leading_constant() -> CriterionReport {
    guarded(7, "leading-constant", |checks| {
        let eps_seq = [0.50f64, 0.45, 0.40, 0.35];
        let scale = |e: f64| e.powi(-5) * (-1.0 / (3.0 * e.powi(3))).exp();
        let mut c = [0.0f64; 4];
        for (i, &eps) in eps_seq.iter().enumerate() {
            c[i] = d0_direct(FRAC_PI_2, eps)?.0 / scale(eps);
        }
        let d = [(c[1] - c[0]).abs(), (c[2] - c[1]).abs(), (c[3] - c[2]).abs()];

        checks.push(Check::le("|Delta c| ratio step 2/1", d[1] / d[0], 1.0));
        checks.push(Check::le("|Delta c| ratio step 3/2", d[2] / d[1], 1.0));
        // Successive corrections shrink at least as fast as eps^{3/2}
        // (up to a 1.5x allowance for the subleading structure).
        for i in 1..3 {
            let rate = (eps_seq[i + 1] / eps_seq[i]).powf(1.5);
            checks.push(Check::le(
                format!(
                    "|Delta c| decay vs eps^1.5 between eps={:.2} and {:.2}",
                    eps_seq[i],
                    eps_seq[i + 1]
                ),
                d[i] / (d[i - 1] * rate),
                1.5,
            ));
        }

        let half_pi_amp = (PI / 2.0).sqrt();
        let k_resolved = LEADING_COEFF_RESOLVED * half_pi_amp;
        let k_catalog = LEADING_COEFF_CATALOG * half_pi_amp;
        let settled = c[3];

        checks.push(Check {
            name: "settled constant has the sign of the assembled product (1/40)".into(),
            observed: settled,
            bound: 0.0,
            relation: ">=",
            passed: settled * k_resolved > 0.0,
        });
        checks.push(Check::within(
            "settled / assembled-product prediction",
            settled / k_resolved,
            1.0 / 3.0,
            3.0,
        ));
        checks.push(Check {
            name: "settled constant contradicts the catalogued -(37/20) (sign)".into(),
            observed: settled,
            bound: 0.0,
            relation: ">=",
            passed: settled * k_catalog < 0.0,
        });

        Ok(format!(
            "scaled splitting at pi/2: c(eps) = [{:.5}, {:.5}, {:.5}, {:.5}] with differences \
             [{:.1e}, {:.1e}, {:.1e}] shrinking at eps^1.5 rate or faster; the settled constant \
             {:.5} matches the independently assembled coefficient product (1/40)sqrt(pi/2) = \
             {:.5} in sign and within a factor {:.2}, and contradicts the catalogued \
             -(37/20)sqrt(pi/2) = {:.4} in sign",
            c[0],
            c[1],
            c[2],
            c[3],
            d[0],
            d[1],
            d[2],
            settled,
            k_resolved,
            settled / k_resolved,
            k_catalog,
        ))
    })
}

// ---------------------------------------------------------------------------
// 8. Picard contraction
// ---------------------------------------------------------------------------

/// The Picard iteration contracts with ratio at most `K sqrt(eps)` for one
/// constant `K <= 1` across `eps` in {0.20, 0.30, 0.40} at `rho = 0.2`.
pub fn criterion_08_picard_contraction() -> CriterionReport {
    guarded(8, "picard-contraction", |checks| {
        let eps_list = [0.20f64, 0.30, 0.40];
        let mut k_uniform = 0.0f64;
        let mut rates = [0.0f64; 3];
        for (i, &eps) in eps_list.iter().enumerate() {
            let p = ParamSet::new(0.2, eps, 0.7)?;
            let mut cur = seed_trajectory(&p, Side::Stable)?;
            let mut deltas = Vec::new();
            for _ in 0..7 {
                let next = picard_step(&cur, &p)?;
                deltas.push(weighted_delta(&cur, &next));
                cur = next;
                if *deltas.last().unwrap() < 1e-10 {
                    break;
                }
            }
            // Drop the first ratio (seed transient) when enough steps remain.
            let skip = if deltas.len() > 3 { 1 } else { 0 };
            let rate = deltas
                .windows(2)
                .skip(skip)
                .map(|w| w[1] / w[0])
                .fold(0.0f64, f64::max);
            rates[i] = rate;
            k_uniform = k_uniform.max(rate / eps.sqrt());
            checks.push(Check::le(
                format!("contraction ratio at eps={eps:.2}"),
                rate,
                1.0,
            ));
        }
        checks.push(Check::le(
            "uniform K = max ratio/sqrt(eps)",
            k_uniform,
            1.0,
        ));
        Ok(format!(
            "observed contraction ratios [{:.4}, {:.4}, {:.4}] at eps = [0.20, 0.30, 0.40]; \
             single K = {:.4} bounds every ratio by K sqrt(eps) with K <= 1",
            rates[0], rates[1], rates[2], k_uniform
        ))
    })
}

// ---------------------------------------------------------------------------
// 9. Mass-ratio limit
// ---------------------------------------------------------------------------

/// The normalized manifold splitting at `rho` in {0.05, 0.025, 0.0125}
/// extrapolates (first order in `rho`) to the first-order splitting function
/// within twice the extrapolation error bar, at `eps = 0.4`, `theta0 = 0.7`.
pub fn criterion_09_mass_ratio_limit() -> CriterionReport {
    guarded(9, "mass-ratio-limit", |checks| {
        let (target, _) = d0_direct(0.7, 0.4)?;
        let rhos = [0.05f64, 0.025, 0.0125];
        let mut dv = [0.0f64; 3];
        for (i, &rho) in rhos.iter().enumerate() {
            dv[i] = splitting_distance(&ParamSet::new(rho, 0.4, 0.7)?)?;
        }
        let extrap1 = 2.0 * dv[1] - dv[0];
        let extrap2 = 2.0 * dv[2] - dv[1];
        let bar = (extrap2 - extrap1).abs().max(1e-9);

        checks.push(Check::le(
            "|Richardson limit - first-order splitting|",
            (extrap2 - target).abs(),
            2.0 * bar,
        ));
        // First-order convergence in rho: successive differences halve.
        checks.push(Check::within(
            "difference halving ratio",
            (dv[1] - dv[2]) / (dv[0] - dv[1]),
            0.3,
            0.7,
        ));

        Ok(format!(
            "splitting per unit mass ratio [{:.8e}, {:.8e}, {:.8e}] at rho = [0.05, 0.025, \
             0.0125]; Richardson limit {:.8e} vs first-order value {:.8e}, difference {:.2e} \
             within 2 x error bar {:.2e}",
            dv[0], dv[1], dv[2], extrap2, target, (extrap2 - target).abs(), bar
        ))
    })
}

// ---------------------------------------------------------------------------
// 10. Homoclinic root and transversality
// ---------------------------------------------------------------------------

/// The root finder locates the symmetric homoclinic phase at `theta0 = 0`
/// within `1e-8`, and the splitting crosses zero there with slope at least
/// half the leading-order prediction (using the resolved constant; the
/// catalogued constant is reported for contrast).
pub fn criterion_10_homoclinic_transversality() -> CriterionReport {
    guarded(10, "homoclinic-transversality", |checks| {
        let p = ParamSet::new(0.02, 0.4, 0.0)?;
        let (root, slope) = find_homoclinic(&p, (-0.5, 0.5))?;

        // d/dtheta0 of A sin(theta0) at 0 equals A = value at pi/2.
        let pred_resolved = leading_splitting_resolved(FRAC_PI_2, 0.4)?.abs();
        let pred_catalog = leading_splitting(FRAC_PI_2, 0.4)?.abs();

        checks.push(Check::le("|theta0 root|", root.abs(), 1e-8));
        checks.push(Check::ge(
            "|splitting slope| vs half the resolved leading prediction",
            slope.abs(),
            0.5 * pred_resolved,
        ));

        Ok(format!(
            "homoclinic phase located at theta0 = {root:.2e} with slope {slope:.4e}; the \
             resolved leading prediction {pred_resolved:.4e} is exceeded (threshold half of \
             it); the catalogued constant would predict {pred_catalog:.3e}, {:.0}x above the \
             measured slope, and is reported for contrast only",
            pred_catalog / slope.abs()
        ))
    })
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Named criterion groups accepted by the CLI `--suite` flag.
pub const SUITES: &[(&str, &[u32])] = &[
    ("identities", &[1]),
    ("conservation", &[2]),
    ("coefficients", &[3]),
    ("contour", &[4, 5]),
    ("melnikov", &[6, 7]),
    ("manifold", &[8, 9, 10]),
    ("fast", &[1, 2, 3, 4, 5]),
    ("all", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
];

/// Criterion numbers of a named suite.
pub fn suite_criteria(name: &str) -> Option<&'static [u32]> {
    SUITES.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

/// Run one criterion by number (1 through 10).
pub fn run_criterion(number: u32) -> Option<CriterionReport> {
    match number {
        1 => Some(criterion_01_frame_identities()),
        2 => Some(criterion_02_jacobi_conservation()),
        3 => Some(criterion_03_coefficient_pins()),
        4 => Some(criterion_04_dual_route_integrals()),
        5 => Some(criterion_05_tail_asymptotics()),
        6 => Some(criterion_06_series_vs_direct()),
        7 => Some(criterion_07_leading_constant()),
        8 => Some(criterion_08_picard_contraction()),
        9 => Some(criterion_09_mass_ratio_limit()),
        10 => Some(criterion_10_homoclinic_transversality()),
        _ => None,
    }
}

/// Run every criterion of a named suite, in numeric order.
pub fn run_suite(name: &str) -> Option<Vec<CriterionReport>> {
    let numbers = suite_criteria(name)?;
    Some(numbers.iter().map(|&n| run_criterion(n).expect("suite lists valid numbers")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for number in [1u32, 3] {
            let rep = run_criterion(number).unwrap();
            assert!(rep.passed, "criterion {number} failed: {}", rep.summary);
        }
    }

    #[test]
    fn suites_are_well_formed() {
        assert_eq!(suite_criteria("identities"), Some(&[1u32][..]));
        assert!(suite_criteria("nonsense").is_none());
        let all = suite_criteria("all").unwrap();
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
        for (_, numbers) in SUITES {
            for &n in *numbers {
                assert!((1..=10).contains(&n));
            }
        }
    }

    #[test]
    fn guarded_converts_errors_into_failed_reports() {
        let rep = guarded(99, "probe", |_| {
            Err(crate::error::Error::Domain("synthetic".into()))
        });
        assert!(!rep.passed);
        assert!(rep.summary.contains("DomainError"));
        assert!(rep.summary.contains("synthetic"));
    }

    #[test]
    fn check_constructors_enforce_their_relations() {
        assert!(Check::le("x", 1.0, 2.0).passed);
        assert!(!Check::le("x", 3.0, 2.0).passed);
        assert!(!Check::le("x", f64::NAN, 2.0).passed);
        assert!(Check::ge("x", 3.0, 2.0).passed);
        assert!(!Check::ge("x", 1.0, 2.0).passed);
        assert!(Check::within("x", 0.5, 0.3, 0.7).passed);
        assert!(!Check::within("x", 0.1, 0.3, 0.7).passed);
    }
}
