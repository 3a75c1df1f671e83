//! Explicit embedded Runge–Kutta integration: the Dormand–Prince 5(4) pair
//! with its quartic dense-output interpolant.
//!
//! The pair is FSAL (first-same-as-last): the seventh stage of an accepted
//! step seeds the next one, so each step costs six fresh right-hand-side
//! evaluations. Step size control follows the classical `0.9 err^(-1/5)`
//! rule with the growth factor clamped to `[0.2, 10]`.

use crate::error::{Error, Result};

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights; also the seventh row of `a`, which makes the pair FSAL.
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Embedded error weights: `h * sum_i E_i k_i` estimates the local error.
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];
/// Dense-output matrix: on an accepted step the interpolant is
/// `y(t0 + s h) = y0 + h * sum_j (K^T P)_j s^(j+1)`, `s` in `[0, 1]`.
const P: [[f64; 4]; 7] = [
    [
        1.00000000000000000e+00,
        -2.85358006538628350e+00,
        3.07174346410590049e+00,
        -1.12701756538628350e+00,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        4.02313337923030456e+00,
        -6.24932156528899974e+00,
        2.67542448435159796e+00,
    ],
    [
        0.0,
        -3.73240196158850424e+00,
        1.00689705898436745e+01,
        -5.68552696158850424e+00,
    ],
    [
        0.0,
        2.55480383018494228e+00,
        -6.39911237735101679e+00,
        3.52193236792079123e+00,
    ],
    [
        0.0,
        -1.37442411421860244e+00,
        3.27265775224672906e+00,
        -1.76728125707574546e+00,
    ],
    [
        0.0,
        1.38246893177814356e+00,
        -3.76493786355628712e+00,
        2.38246893177814378e+00,
    ],
];

/// Tolerances and controls for [`integrate_ode`].
#[derive(Debug, Clone, Copy)]
pub struct OdeSpec {
    /// Relative tolerance per step.
    pub rel_tol: f64,
    /// Absolute tolerance per step.
    pub abs_tol: f64,
    /// Hard cap on the step magnitude (`f64::INFINITY` to disable).
    pub max_step: f64,
    /// Record the quartic interpolant on every accepted step so the solution
    /// can be evaluated anywhere in the integration window.
    pub dense_output: bool,
    /// Cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        OdeSpec {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_step: f64::INFINITY,
            dense_output: false,
            max_steps: 10_000_000,
        }
    }
}

/// One stored interpolation segment.
#[derive(Debug, Clone)]
struct DenseSeg {
    t0: f64,
    h: f64,
    y0: Vec<f64>,
    /// Four interpolation coefficient vectors, `q[j][i]` multiplying `s^(j+1)`.
    q: [Vec<f64>; 4],
}

/// Result of an integration: accepted mesh, states there, and (optionally)
/// the dense interpolant.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// Accepted times, starting at `t0` and ending exactly at `t1`.
    pub t: Vec<f64>,
    /// States at the accepted times.
    pub y: Vec<Vec<f64>>,
    dense: Option<Vec<DenseSeg>>,
    /// Number of right-hand-side evaluations.
    pub n_eval: usize,
    /// Accepted step count.
    pub n_accepted: usize,
    /// Rejected step count.
    pub n_rejected: usize,
}

impl OdeSolution {
    /// Final state.
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("solution always holds the initial state")
    }

    /// Evaluate the dense interpolant at `t`, which must lie inside the
    /// integration window (inclusive). Requires `dense_output` to have been
    /// set in the spec.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let segs = self.dense.as_ref().ok_or_else(|| {
            Error::Domain("OdeSolution::eval: integration was run without dense output".into())
        })?;
        let t_start = self.t[0];
        let t_end = *self.t.last().unwrap();
        let dir = (t_end - t_start).signum();
        if (t - t_start) * dir < -1e-12 || (t - t_end) * dir > 1e-12 {
            return Err(Error::Domain(format!(
                "OdeSolution::eval: t = {t} outside integration window [{t_start}, {t_end}]"
            )));
        }
        // Binary search for the segment containing t (mesh is monotone in dir).
        let mut lo = 0usize;
        let mut hi = segs.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let seg = &segs[mid];
            if (t - (seg.t0 + seg.h)) * dir > 0.0 {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let seg = &segs[lo];
        let s = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let n = seg.y0.len();
        let mut out = seg.y0.clone();
        let mut spow = s;
        for j in 0..4 {
            for i in 0..n {
                out[i] += seg.h * spow * seg.q[j][i];
            }
            spow *= s;
        }
        Ok(out)
    }
}

/// Integrate `dy/dt = field(t, y)` from `t_span.0` to `t_span.1` (either
/// direction). The field writes its value into the output slice and may
/// fail, which aborts the integration with that error.
pub fn integrate_ode<F>(
    field: &mut F,
    y0: &[f64],
    t_span: (f64, f64),
    spec: &OdeSpec,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let (t0, t1) = t_span;
    let n = y0.len();
    if n == 0 || !t0.is_finite() || !t1.is_finite() || t0 == t1 {
        return Err(Error::Domain(format!(
            "integrate_ode: bad problem (dim {n}, span [{t0}, {t1}])"
        )));
    }
    let dir = (t1 - t0).signum();
    let mut k = vec![vec![0.0f64; n]; 7];
    let mut n_eval = 0usize;

    let mut y = y0.to_vec();
    let mut t = t0;
    field(t, &y, &mut k[0])?;
    n_eval += 1;

    // Initial step selection in the spirit of classical embedded-pair codes:
    // balance the size of y against the size of f, then refine with one
    // Euler probe.
    let sc = |i: usize, a: &[f64], b: &[f64]| -> f64 {
        spec.abs_tol + spec.rel_tol * a[i].abs().max(b[i].abs())
    };
    let d0 = (0..n)
        .map(|i| (y[i] / sc(i, &y, &y)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (n as f64).sqrt();
    let d1 = (0..n)
        .map(|i| (k[0][i] / sc(i, &y, &y)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (n as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min((t1 - t0).abs());
    let mut probe = vec![0.0f64; n];
    let y_probe: Vec<f64> = (0..n).map(|i| y[i] + dir * h0 * k[0][i]).collect();
    field(t + dir * h0, &y_probe, &mut probe)?;
    n_eval += 1;
    let d2 = (0..n)
        .map(|i| ((probe[i] - k[0][i]) / sc(i, &y, &y)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (n as f64).sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(spec.max_step).min((t1 - t0).abs());

    let mut sol = OdeSolution {
        t: vec![t0],
        y: vec![y.clone()],
        dense: if spec.dense_output { Some(Vec::new()) } else { None },
        n_eval: 0,
        n_accepted: 0,
        n_rejected: 0,
    };

    let mut y_new = vec![0.0f64; n];
    let mut stage = vec![0.0f64; n];
    let mut steps = 0usize;
    while (t - t1) * dir < 0.0 {
        steps += 1;
        if steps > spec.max_steps {
            return Err(Error::MaxIterExceeded {
                what: "integrate_ode",
                iters: spec.max_steps,
                residual: (t1 - t).abs(),
            });
        }
        // Do not step past the endpoint.
        if (t + dir * h - t1) * dir > 0.0 {
            h = (t1 - t).abs();
        }
        let min_h = 1e-14 * t.abs().max(1.0);
        if h < min_h {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        // Stages 2..6.
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s_idx, row) in rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, aij) in row.iter().enumerate() {
                    acc += aij * k[j][i];
                }
                stage[i] = y[i] + dir * h * acc;
            }
            field(t + dir * h * C[s_idx + 1], &stage, &mut k[s_idx + 1])?;
            n_eval += 1;
        }
        // Fifth-order solution and its FSAL stage.
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += B[j] * k[j][i];
            }
            y_new[i] = y[i] + dir * h * acc;
        }
        field(t + dir * h, &y_new, &mut k[6])?;
        n_eval += 1;

        // Error norm (RMS of component errors against mixed tolerance).
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            let scale = spec.abs_tol + spec.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (h * e / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            // Accept.
            let t_new = if (t + dir * h - t1) * dir >= 0.0 { t1 } else { t + dir * h };
            if let Some(dense) = sol.dense.as_mut() {
                let mut q = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                for (j, qj) in q.iter_mut().enumerate() {
                    for i in 0..n {
                        let mut acc = 0.0;
                        for m in 0..7 {
                            acc += k[m][i] * P[m][j];
                        }
                        qj[i] = acc;
                    }
                }
                dense.push(DenseSeg { t0: t, h: dir * h, y0: y.clone(), q });
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            let (k0, k6) = {
                let (head, tail) = k.split_at_mut(6);
                (&mut head[0], &tail[0])
            };
            k0.copy_from_slice(k6);
            sol.t.push(t);
            sol.y.push(y.clone());
            sol.n_accepted += 1;
            let factor = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h = (h * factor).min(spec.max_step);
        } else {
            sol.n_rejected += 1;
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
        }
    }
    sol.n_eval = n_eval;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn default_like(rel: f64, abs: f64, dense: bool) -> OdeSpec {
        OdeSpec { rel_tol: rel, abs_tol: abs, dense_output: dense, ..OdeSpec::default() }
    }

    #[test]
    fn exponential_decay_is_exact_to_tolerance() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[1.0], (0.0, 5.0), &default_like(1e-12, 1e-14, false)).unwrap();
        assert_abs_diff_eq!(sol.last()[0], (-5.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[1.0, 0.0], (0.0, 50.0), &default_like(1e-12, 1e-14, false)).unwrap();
        let e = 0.5 * (sol.last()[0].powi(2) + sol.last()[1].powi(2));
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.last()[0], 50.0f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn dense_output_matches_analytic_solution_between_nodes() {
        let mut f = |t: f64, _y: &[f64], dy: &mut [f64]| {
            dy[0] = t.cos();
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[0.0], (0.0, 10.0), &default_like(1e-11, 1e-13, true)).unwrap();
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            let v = sol.eval(t).unwrap()[0];
            assert_abs_diff_eq!(v, t.sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn backward_integration_works() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0];
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[1.0], (0.0, -3.0), &default_like(1e-12, 1e-14, false)).unwrap();
        assert_abs_diff_eq!(sol.last()[0], (-3.0f64).exp(), epsilon = 1e-12);
        assert_eq!(*sol.t.last().unwrap(), -3.0);
    }

    #[test]
    fn eval_outside_window_is_a_domain_error() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[1.0], (0.0, 1.0), &default_like(1e-10, 1e-12, true)).unwrap();
        assert!(sol.eval(1.5).is_err());
        assert!(sol.eval(-0.5).is_err());
        assert!(sol.eval(0.0).is_ok());
        assert!(sol.eval(1.0).is_ok());
    }

    #[test]
    fn field_errors_propagate() {
        let mut f = |t: f64, _y: &[f64], dy: &mut [f64]| {
            if t > 0.5 {
                return Err(Error::Domain("wall".into()));
            }
            dy[0] = 1.0;
            Ok(())
        };
        assert!(integrate_ode(&mut f, &[0.0], (0.0, 1.0), &OdeSpec::default()).is_err());
    }

    #[test]
    fn nonautonomous_polynomial_is_reproduced() {
        // dy/dt = 3 t^2 -> y = t^3 exactly (well inside order).
        let mut f = |t: f64, _y: &[f64], dy: &mut [f64]| {
            dy[0] = 3.0 * t * t;
            Ok(())
        };
        let sol = integrate_ode(&mut f, &[0.0], (0.0, 2.0), &default_like(1e-10, 1e-12, true)).unwrap();
        assert_abs_diff_eq!(sol.last()[0], 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.eval(1.37).unwrap()[0], 1.37f64.powi(3), epsilon = 1e-11);
    }
}
