//! Direct and series evaluation of the first-order splitting distance
//! `D0(theta0)` between the stable and unstable manifolds.
//!
//! Two independent routes are provided and cross-checked:
//!
//! * **Direct**: `D0 = -(sqrt(2)/(2 eps^1.5)) I + (1/(2 eps^3.5)) J` where
//!   `I` and `J` are improper oscillatory integrals over the separatrix,
//!   evaluated with phase-planned panel quadrature ([`OscPlan`]).
//! * **Series**: `D0(theta0)` is an odd function, hence a sine series. Its
//!   coefficients factor into exact rational combinatorial coefficients
//!   times *elementary integrals* `int a^p b^r trig(q psi) d tau`, summed
//!   over an index lattice `(k, l)` with `n = k + l` controlling the size
//!   of each contribution.
//!
//! The elementary integrals depend on `(k, l)` only through the diagonal
//! `n = k + l`, so the table assembly sums the exact rational coefficients
//! along complete diagonals first. This matters: the per-diagonal combined
//! coefficient stays `O(1)` while individual terms grow, and truncating a
//! rectangle in `(k, l)` would break the cancellation and corrupt the sum.
//!
//! Two inequivalent foldings of the double binomial sum behind the
//! coefficients are in circulation; they differ in how the central binomial
//! term and the cross-term signs fold when negative harmonics are mapped
//! onto positive ones, and they do not agree numerically. Both are
//! implemented ([`CoeffConvention`]), the tests pin both, and the
//! verification suite reports which one tracks the direct quadrature.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::homoclinic::eval_frame;
use crate::numerics::quad::OscPlan;

/// Admissible window for [`d0_direct`] (precision budget of the direct
/// quadrature at the bottom, validity of the `R1` expansion at the top).
pub const EPS_DIRECT_RANGE: (f64, f64) = (0.3, 0.5);

/// Default quadrature tolerance for the direct route.
pub const DIRECT_TOL: f64 = 1e-13;

/// Default quadrature tolerance for elementary integrals feeding the series
/// route (tighter: the smallest retained coefficients are ~1e-12).
pub const ELEMENTARY_TOL: f64 = 1e-16;

/// `R1 = sqrt(1 - 2 eps^2 a^2 cos(psi + theta0) + eps^4 a^4)`, the distance
/// from the collision singularity driving the splitting integrands.
pub fn r1(tau: f64, theta0: f64, eps: f64) -> Result<f64> {
    if eps == 0.0 {
        return Ok(1.0);
    }
    let fr = eval_frame(tau, eps)?;
    let w = eps * eps * fr.a * fr.a;
    let radicand = 1.0 - 2.0 * w * (theta0 + fr.psi).cos() + w * w;
    if radicand <= 0.0 {
        return Err(Error::Domain(format!(
            "r1: radicand {radicand} <= 0 at tau = {tau}, eps = {eps}"
        )));
    }
    Ok(radicand.sqrt())
}

/// `1 - R1^{-3}` written as `-expm1(-1.5 ln1p(delta))` with
/// `delta = R1^2 - 1`; accurate down to `|delta| ~ 1e-300` where the naive
/// form loses all relative precision.
fn one_minus_inv_cubed(delta: f64) -> f64 {
    -(-1.5 * delta.ln_1p()).exp_m1()
}

/// `I`-integrand: `(2 a^3 - 3 a^5 / 2) sin(theta0 + psi) (1 - R1^{-3})`.
fn integrand_i(tau: f64, theta0: f64, eps: f64) -> Result<f64> {
    let fr = eval_frame(tau, eps)?;
    let a = fr.a;
    let w = eps * eps * a * a;
    let phi = theta0 + fr.psi;
    let omr = one_minus_inv_cubed(w * w - 2.0 * w * phi.cos());
    Ok((2.0 * a.powi(3) - 1.5 * a.powi(5)) * phi.sin() * omr)
}

/// `J`-integrand:
/// `a b [eps^2 a^2 cos(theta0 + psi)(2 + R1^{-3}) + (1 - R1^{-3})]`.
fn integrand_j(tau: f64, theta0: f64, eps: f64) -> Result<f64> {
    let fr = eval_frame(tau, eps)?;
    let a = fr.a;
    let w = eps * eps * a * a;
    let phi = theta0 + fr.psi;
    let c = phi.cos();
    let omr = one_minus_inv_cubed(w * w - 2.0 * w * c);
    Ok(a * fr.b * (w * c * (3.0 - omr) + omr))
}

/// The two improper splitting integrals `(I, J)` with error estimates,
/// integrated over the whole line with mirrored phase-planned panels.
pub fn splitting_integrals(
    theta0: f64,
    eps: f64,
    tol: f64,
) -> Result<((f64, f64), (f64, f64))> {
    let e2 = eps * eps;
    let plan_i = OscPlan::new(eps, 1.0, 5.0, 24.0 * e2, tol, 400_000)?;
    let plan_j = OscPlan::new(eps, 1.0, 4.0, 12.0 * e2, tol, 400_000)?;
    let i = plan_i.integrate_line(&mut |t| integrand_i(t, theta0, eps))?;
    let j = plan_j.integrate_line(&mut |t| integrand_j(t, theta0, eps))?;
    Ok((i, j))
}

/// Prefactors `(-sqrt(2)/(2 eps^1.5), 1/(2 eps^3.5))` combining `(I, J)`
/// into `D0`.
pub fn d0_prefactors(eps: f64) -> (f64, f64) {
    (
        -std::f64::consts::SQRT_2 / (2.0 * eps.powf(1.5)),
        1.0 / (2.0 * eps.powf(3.5)),
    )
}

/// Splitting distance by direct quadrature, with a conservative error
/// estimate. Restricted to `eps` in `[0.3, 0.5]`: below, the answer drowns
/// in the quadrature budget; above, the `R1` expansion controlling the
/// error terms stops converging.
pub fn d0_direct(theta0: f64, eps: f64) -> Result<(f64, f64)> {
    d0_direct_tol(theta0, eps, DIRECT_TOL)
}

/// [`d0_direct`] with an explicit quadrature tolerance.
pub fn d0_direct_tol(theta0: f64, eps: f64, tol: f64) -> Result<(f64, f64)> {
    let (lo, hi) = EPS_DIRECT_RANGE;
    if !(eps >= lo && eps <= hi) {
        return Err(Error::Domain(format!(
            "d0_direct: eps = {eps} outside [{lo}, {hi}]"
        )));
    }
    if !theta0.is_finite() {
        return Err(Error::Domain(format!("d0_direct: theta0 = {theta0} not finite")));
    }
    let ((i, err_i), (j, err_j)) = splitting_integrals(theta0, eps, tol)?;
    let (ci, cj) = d0_prefactors(eps);
    Ok((ci * i + cj * j, ci.abs() * err_i + cj.abs() * err_j))
}

// ----------------------------------------------------------------------------
// Elementary integrals
// ----------------------------------------------------------------------------

/// The six elementary integral families. `I` kinds carry `cos(q psi)`
/// (only the real part of `e^{i q psi}` survives the parity of `a`); `J`
/// kinds carry an extra factor `b` and `sin(q psi)` (only the imaginary
/// part survives). Odd families sit on harmonics `q = 2m + 1`, even
/// families on `q = 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    I1Odd,
    I2Odd,
    I1Even,
    I2Even,
    JOdd,
    JEven,
}

impl Kind {
    /// Does the integrand carry the odd factor `b`?
    pub fn with_b(self) -> bool {
        matches!(self, Kind::JOdd | Kind::JEven)
    }

    /// Odd-harmonic family (`q = 2m + 1`) or even (`q = 2m`)?
    pub fn odd_harmonics(self) -> bool {
        matches!(self, Kind::I1Odd | Kind::I2Odd | Kind::JOdd)
    }

    /// Power of `a` in the integrand at lattice diagonal `n`.
    pub fn a_power(self, n: u32) -> u32 {
        match self {
            Kind::I1Odd => 4 * n + 3,
            Kind::I2Odd => 4 * n + 5,
            Kind::I1Even => 4 * n + 1,
            Kind::I2Even => 4 * n + 3,
            Kind::JOdd => 4 * n + 3,
            Kind::JEven => 4 * n + 1,
        }
    }

    /// Exponent of the `eps` prefactor at diagonal `n`.
    pub fn eps_exponent(self, n: u32) -> i32 {
        let n = n as i32;
        match self {
            Kind::I1Odd | Kind::I2Odd => 4 * n,
            Kind::I1Even | Kind::I2Even => 4 * n - 2,
            Kind::JOdd => 4 * n + 2,
            Kind::JEven => 4 * n,
        }
    }

    /// Oscillation harmonic `q` at index `m`.
    pub fn harmonic(self, m: u32) -> u32 {
        if self.odd_harmonics() {
            2 * m + 1
        } else {
            2 * m
        }
    }

    /// Valid index set: odd families need `m = 0, n >= 1` or
    /// `m >= 1, n >= m`; even families need `m >= 1, n >= m`.
    pub fn index_ok(self, n: u32, m: u32) -> bool {
        if self.odd_harmonics() {
            (m == 0 && n >= 1) || (m >= 1 && n >= m)
        } else {
            m >= 1 && n >= m
        }
    }
}

/// A request for one elementary integral
/// `eps^e int a^p b^r trig(q psi) d tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementaryIntegral {
    pub kind: Kind,
    pub n: u32,
    pub m: u32,
}

impl ElementaryIntegral {
    /// Validate the indices against the family's lattice.
    pub fn new(kind: Kind, n: u32, m: u32) -> Result<ElementaryIntegral> {
        if !kind.index_ok(n, m) {
            return Err(Error::Index(format!(
                "elementary integral {kind:?} has no index (n, m) = ({n}, {m})"
            )));
        }
        Ok(ElementaryIntegral { kind, n, m })
    }

    /// Evaluate by tau-domain phase-planned quadrature; returns the value
    /// (with its `eps` prefactor) and an error estimate.
    pub fn value(&self, eps: f64, tol: f64) -> Result<(f64, f64)> {
        let p = self.kind.a_power(self.n);
        let q = self.kind.harmonic(self.m);
        let with_b = self.kind.with_b();
        let p_env = (p + u32::from(with_b)) as f64;
        let plan = OscPlan::new(eps, q as f64, p_env, 1.0, tol, 2_000_000)?;
        let qf = q as f64;
        let mut f = |t: f64| -> Result<f64> {
            let fr = eval_frame(t, eps)?;
            let base = fr.a.powi(p as i32);
            Ok(if with_b {
                base * fr.b * (qf * fr.psi).sin()
            } else {
                base * (qf * fr.psi).cos()
            })
        };
        // Both integrands are even in tau: integrate the half line and double.
        let (half, err) = plan.integrate(&mut f)?;
        let pref = eps.powi(self.kind.eps_exponent(self.n));
        Ok((pref * 2.0 * half, pref.abs() * 2.0 * err))
    }
}

/// Convenience wrapper: validated elementary integral value at the default
/// tolerance.
pub fn elementary_integral(kind: Kind, n: u32, m: u32, eps: f64) -> Result<f64> {
    Ok(ElementaryIntegral::new(kind, n, m)?.value(eps, ELEMENTARY_TOL)?.0)
}

// ----------------------------------------------------------------------------
// Exact rational coefficients
// ----------------------------------------------------------------------------

/// Generalized binomial `binom(num/2, n)` in exact rational arithmetic,
/// with the convention `binom(alpha, n) = 0` for `n < 0`.
fn binom_half(num: i64, n: i64) -> BigRational {
    if n < 0 {
        return BigRational::zero();
    }
    let mut out = BigRational::one();
    let alpha = BigRational::new(BigInt::from(num), BigInt::from(2));
    for i in 0..n {
        let factor = (&alpha - BigRational::from(BigInt::from(i)))
            / BigRational::from(BigInt::from(i + 1));
        out *= factor;
    }
    out
}

/// Integer binomial as a rational, `0` outside `0 <= k <= n`.
fn comb(n: i64, k: i64) -> BigRational {
    if k < 0 || k > n || n < 0 {
        return BigRational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let k = k.min(n - k);
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The two foldings of the binomial double sum. `Symmetrized` is the
/// catalogued closed form; `Projected` is the folding recovered by
/// projecting the splitting integrand onto each harmonic directly. They
/// disagree in the central (`m = 0`) terms and the sign pattern of the
/// `J`-family brackets; the verification suite reports which one matches
/// the direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffConvention {
    Symmetrized,
    Projected,
}

/// Base coefficient `C_{m,k,l}` of the odd-harmonic `I` family.
fn c_coeff(m: i64, k: i64, l: i64, conv: CoeffConvention) -> BigRational {
    if m == 0 {
        let x = match conv {
            CoeffConvention::Symmetrized => 2,
            CoeffConvention::Projected => 1,
        };
        let core = if k >= 1 {
            binom_half(-3, 2 * k) * (ratio(x, 1) * comb(2 * k, k) - comb(2 * k, k - 1))
        } else {
            BigRational::zero()
        };
        if l == 0 {
            binom_half(-3, k) + core
        } else {
            core * binom_half(-(4 * k + 3), l)
        }
    } else {
        binom_half(-3, 2 * k)
            * (comb(2 * k, k - m) - comb(2 * k, k - m - 1))
            * binom_half(-(4 * k + 3), l)
    }
}

/// Base coefficient `E_{m,k,l}` of the even-harmonic `I` family
/// (`m >= 1`); identical in both conventions.
fn e_coeff(m: i64, k: i64, l: i64) -> BigRational {
    binom_half(-3, 2 * k - 1)
        * (comb(2 * k - 1, k - m) - comb(2 * k - 1, k - m - 1))
        * binom_half(-(4 * k + 1), l)
}

/// Coefficient of the odd-harmonic `J` family.
fn cal_c_coeff(m: i64, k: i64, l: i64, conv: CoeffConvention) -> BigRational {
    let br = match conv {
        CoeffConvention::Symmetrized => {
            ratio(1, 2) * binom_half(-3, 2 * k) * binom_half(-(4 * k + 3), l)
                - binom_half(-3, 2 * k + 1) * binom_half(-(4 * k + 5), l)
        }
        CoeffConvention::Projected => {
            binom_half(-3, 2 * k) * binom_half(-(4 * k + 3), l)
                + ratio(2, 1) * binom_half(-3, 2 * k + 1) * binom_half(-(4 * k + 5), l)
        }
    };
    let mut out = -br * comb(2 * k + 1, k - m);
    if m == 0 && l == 0 {
        out += -(ratio(-3, 1) * binom_half(-5, k) + binom_half(-3, k));
    }
    out
}

/// Coefficient of the even-harmonic `J` family (`m >= 1`).
fn cal_e_coeff(m: i64, k: i64, l: i64, conv: CoeffConvention) -> BigRational {
    let br = match conv {
        CoeffConvention::Symmetrized => {
            ratio(1, 2) * binom_half(-3, 2 * k - 1) * binom_half(-(4 * k + 1), l)
                - binom_half(-3, 2 * k) * binom_half(-(4 * k + 3), l)
        }
        CoeffConvention::Projected => {
            ratio(2, 1) * binom_half(-3, 2 * k) * binom_half(-(4 * k + 3), l)
                + binom_half(-3, 2 * k - 1) * binom_half(-(4 * k + 1), l)
        }
    };
    br * comb(2 * k, k - m)
}

/// The exact rational coefficients at one lattice point `(m, k, l)`:
/// `c1 = 2 C`, `c2 = (3/2) C` weight the two odd-harmonic `I` elementaries,
/// `e1 = 2 E`, `e2 = (3/2) E` the even ones (present for `m >= 1` only),
/// and `cal_c`, `cal_e` weight the `J` elementaries.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub c1: BigRational,
    pub c2: BigRational,
    pub cal_c: BigRational,
    pub e1: Option<BigRational>,
    pub e2: Option<BigRational>,
    pub cal_e: Option<BigRational>,
}

/// Coefficients in the catalogued (`Symmetrized`) convention.
pub fn series_coefficients(m: u32, k: u32, l: u32) -> Result<SeriesCoefficients> {
    series_coefficients_with(m, k, l, CoeffConvention::Symmetrized)
}

/// Coefficients in an explicit convention. `k >= 1` is required; indices
/// with `k < m` yield zeros through the binomial convention.
pub fn series_coefficients_with(
    m: u32,
    k: u32,
    l: u32,
    conv: CoeffConvention,
) -> Result<SeriesCoefficients> {
    if k < 1 {
        return Err(Error::Index(format!(
            "series_coefficients: k = {k} outside the lattice (k >= 1)"
        )));
    }
    let (m, k, l) = (m as i64, k as i64, l as i64);
    let c = c_coeff(m, k, l, conv);
    let (e1, e2, cal_e) = if m >= 1 {
        let e = e_coeff(m, k, l);
        (
            Some(ratio(2, 1) * &e),
            Some(ratio(3, 2) * &e),
            Some(cal_e_coeff(m, k, l, conv)),
        )
    } else {
        (None, None, None)
    };
    Ok(SeriesCoefficients {
        c1: ratio(2, 1) * &c,
        c2: ratio(3, 2) * &c,
        cal_c: cal_c_coeff(m, k, l, conv),
        e1,
        e2,
        cal_e,
    })
}

// ----------------------------------------------------------------------------
// Series assembly
// ----------------------------------------------------------------------------

/// Truncation caps: harmonics `m <= m_max`, lattice `k <= k_max`,
/// `l <= l_max`. Only complete diagonals `n = k + l <= min(k_max,
/// l_max + max(m, 1))` are retained, so every retained diagonal lies inside
/// the `(k, l)` rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub m_max: usize,
    pub k_max: usize,
    pub l_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { m_max: 6, k_max: 6, l_max: 6 }
    }
}

/// Sine-coefficient tables of the splitting integrals `I` and `J`.
///
/// `i_odd[m]`/`j_odd[m]` multiply `sin((2m+1) theta0)` for `m = 0..=m_max`;
/// `i_even[m-1]`/`j_even[m-1]` multiply `sin(2m theta0)` for
/// `m = 1..=m_max`. The `tail_*` vectors hold per-entry estimates of the
/// dropped diagonals (geometric extrapolation of the observed decay, which
/// tracks the `eps^4`-per-diagonal scaling) plus accumulated quadrature
/// error.
#[derive(Debug, Clone)]
pub struct FourierTable {
    pub eps: f64,
    pub truncation: Truncation,
    pub convention: CoeffConvention,
    pub i_odd: Vec<f64>,
    pub i_even: Vec<f64>,
    pub j_odd: Vec<f64>,
    pub j_even: Vec<f64>,
    pub tail_i_odd: Vec<f64>,
    pub tail_i_even: Vec<f64>,
    pub tail_j_odd: Vec<f64>,
    pub tail_j_even: Vec<f64>,
}

/// Geometric estimate of the dropped diagonals from the last two nonzero
/// retained terms; zero when fewer than two terms are available.
fn geometric_tail(terms: &[(f64, f64)]) -> f64 {
    let quad_err: f64 = terms.iter().map(|t| t.1).sum();
    let nz: Vec<f64> = terms.iter().map(|t| t.0.abs()).filter(|v| *v != 0.0).collect();
    if nz.len() < 2 {
        return quad_err;
    }
    let (last, prev) = (nz[nz.len() - 1], nz[nz.len() - 2]);
    let r = if prev > 0.0 { (last / prev).min(0.9) } else { 0.5 };
    last * r / (1.0 - r) + quad_err
}

/// Exact combined coefficient along the complete diagonal `k + l = n`.
fn diagonal_sum(
    f: &dyn Fn(i64, i64, i64, CoeffConvention) -> BigRational,
    m: usize,
    n: usize,
    conv: CoeffConvention,
) -> f64 {
    let mut s = BigRational::zero();
    for k in m.max(1)..=n {
        let l = (n - k) as i64;
        s += f(m as i64, k as i64, l, conv);
    }
    rational_to_f64(&s)
}

/// Convert an exact rational to `f64` through a numerator/denominator
/// split (the direct `to_f64` on huge numerators would overflow).
fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    // For the default truncation numerator/denominator fit in ~200 bits;
    // split into f64-sized mantissas with an exponent correction.
    let num = r.numer();
    let den = r.denom();
    let shift = (num.bits() as i64 - den.bits() as i64).max(0);
    let scaled_den: BigInt = den << shift;
    let int_part = (num * BigInt::from(1u64 << 53)) / &scaled_den;
    let frac = int_part.to_f64().unwrap_or(f64::NAN) / (1u64 << 53) as f64;
    frac * 2f64.powi(shift as i32)
}

/// Assemble the sine-coefficient tables in the `Projected` convention at
/// the default elementary tolerance.
pub fn fourier_series_d0(eps: f64, truncation: Truncation) -> Result<FourierTable> {
    fourier_series_d0_with(eps, truncation, CoeffConvention::Projected, ELEMENTARY_TOL)
}

/// Table assembly with explicit convention and quadrature tolerance.
pub fn fourier_series_d0_with(
    eps: f64,
    truncation: Truncation,
    convention: CoeffConvention,
    tol: f64,
) -> Result<FourierTable> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Domain(format!(
            "fourier_series_d0: eps = {eps} outside (0, 0.5]"
        )));
    }
    if truncation.k_max < 1 {
        return Err(Error::Config("fourier_series_d0: k_max must be >= 1".into()));
    }
    let mcap = truncation.m_max;
    let mut table = FourierTable {
        eps,
        truncation,
        convention,
        i_odd: Vec::with_capacity(mcap + 1),
        i_even: Vec::with_capacity(mcap),
        j_odd: Vec::with_capacity(mcap + 1),
        j_even: Vec::with_capacity(mcap),
        tail_i_odd: Vec::new(),
        tail_i_even: Vec::new(),
        tail_j_odd: Vec::new(),
        tail_j_even: Vec::new(),
    };

    let elem = |kind: Kind, n: usize, m: usize| -> Result<(f64, f64)> {
        ElementaryIntegral::new(kind, n as u32, m as u32)?.value(eps, tol)
    };

    for m in 0..=mcap {
        let n_hi = truncation.k_max.min(truncation.l_max + m.max(1));
        // I odd family: -c1 * I1 + c2 * I2 per diagonal.
        let mut sum = 0.0;
        let mut terms = Vec::new();
        for n in m.max(1)..=n_hi {
            let c = diagonal_sum(&|m, k, l, cv| c_coeff(m, k, l, cv), m, n, convention);
            let (v1, e1) = elem(Kind::I1Odd, n, m)?;
            let (v2, e2) = elem(Kind::I2Odd, n, m)?;
            let t = -2.0 * c * v1 + 1.5 * c * v2;
            sum += t;
            terms.push((t, c.abs() * (2.0 * e1 + 1.5 * e2)));
        }
        table.i_odd.push(sum);
        table.tail_i_odd.push(geometric_tail(&terms));
        // J odd family.
        let mut sum = 0.0;
        let mut terms = Vec::new();
        for n in m.max(1)..=n_hi {
            let c = diagonal_sum(&cal_c_coeff, m, n, convention);
            let (v, e) = elem(Kind::JOdd, n, m)?;
            let t = c * v;
            sum += t;
            terms.push((t, c.abs() * e));
        }
        table.j_odd.push(sum);
        table.tail_j_odd.push(geometric_tail(&terms));
    }
    for m in 1..=mcap {
        let n_hi = truncation.k_max.min(truncation.l_max + m);
        // I even family: +e1 * I1 - e2 * I2 per diagonal.
        let mut sum = 0.0;
        let mut terms = Vec::new();
        for n in m..=n_hi {
            let e = diagonal_sum(&|m, k, l, _| e_coeff(m, k, l), m, n, convention);
            let (v1, q1) = elem(Kind::I1Even, n, m)?;
            let (v2, q2) = elem(Kind::I2Even, n, m)?;
            let t = 2.0 * e * v1 - 1.5 * e * v2;
            sum += t;
            terms.push((t, e.abs() * (2.0 * q1 + 1.5 * q2)));
        }
        table.i_even.push(sum);
        table.tail_i_even.push(geometric_tail(&terms));
        // J even family.
        let mut sum = 0.0;
        let mut terms = Vec::new();
        for n in m..=n_hi {
            let e = diagonal_sum(&cal_e_coeff, m, n, convention);
            let (v, q) = elem(Kind::JEven, n, m)?;
            let t = e * v;
            sum += t;
            terms.push((t, e.abs() * q));
        }
        table.j_even.push(sum);
        table.tail_j_even.push(geometric_tail(&terms));
    }

    table.check_tails()?;
    Ok(table)
}

impl FourierTable {
    /// Invariant: within each family, every dropped-diagonal estimate stays
    /// below 1e-3 of the retained head (the family's largest coefficient).
    /// Checked against the head rather than entry-by-entry because high
    /// harmonics are exponentially small and their tail estimates are
    /// dominated by the (absolute) quadrature budget.
    fn check_tails(&self) -> Result<()> {
        let families = [
            (&self.i_odd, &self.tail_i_odd, "I odd"),
            (&self.i_even, &self.tail_i_even, "I even"),
            (&self.j_odd, &self.tail_j_odd, "J odd"),
            (&self.j_even, &self.tail_j_even, "J even"),
        ];
        for (vals, tails, name) in families {
            let head = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for (i, (v, t)) in vals.iter().zip(tails.iter()).enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "fourier table: {name}[{i}] is not finite"
                    )));
                }
                if *t > 1e-3 * head {
                    return Err(Error::NoConvergence {
                        what: "fourier table diagonal tail",
                        iters: self.truncation.k_max,
                        residual: t / head.max(f64::MIN_POSITIVE),
                    });
                }
            }
        }
        Ok(())
    }

    /// `(I(theta0), J(theta0))` from the sine tables.
    pub fn eval_i_j(&self, theta0: f64) -> (f64, f64) {
        let mut i = 0.0;
        let mut j = 0.0;
        for (m, (vi, vj)) in self.i_odd.iter().zip(self.j_odd.iter()).enumerate() {
            let s = ((2 * m + 1) as f64 * theta0).sin();
            i += vi * s;
            j += vj * s;
        }
        for (m1, (vi, vj)) in self.i_even.iter().zip(self.j_even.iter()).enumerate() {
            let s = (2.0 * (m1 + 1) as f64 * theta0).sin();
            i += vi * s;
            j += vj * s;
        }
        (i, j)
    }

    /// Series value of the splitting distance at `theta0`.
    pub fn eval(&self, theta0: f64) -> f64 {
        let (i, j) = self.eval_i_j(theta0);
        let (ci, cj) = d0_prefactors(self.eps);
        ci * i + cj * j
    }

    /// Coefficient of `sin(q theta0)` in `D0`, `q >= 1`.
    pub fn combined_coefficient(&self, q: usize) -> Option<f64> {
        let (ci, cj) = d0_prefactors(self.eps);
        if q == 0 {
            return None;
        }
        if q % 2 == 1 {
            let m = (q - 1) / 2;
            let vi = self.i_odd.get(m)?;
            let vj = self.j_odd.get(m)?;
            Some(ci * vi + cj * vj)
        } else {
            let m = q / 2;
            let vi = self.i_even.get(m - 1)?;
            let vj = self.j_even.get(m - 1)?;
            Some(ci * vi + cj * vj)
        }
    }

    /// All combined sine coefficients `q = 1..=2 m_max + 1`.
    pub fn combined_coefficients(&self) -> Vec<f64> {
        (1..=2 * self.truncation.m_max + 1)
            .map(|q| self.combined_coefficient(q).unwrap_or(0.0))
            .collect()
    }

    /// Derivative of the series at `theta0 = 0`: `sum q c_q`.
    pub fn derivative_at_zero(&self) -> f64 {
        self.combined_coefficients()
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c)
            .sum()
    }

    /// Bound on the dropped diagonals of the full `D0` series, in `D0`
    /// units (worst case over `theta0`).
    pub fn d0_tail_bound(&self) -> f64 {
        let (ci, cj) = d0_prefactors(self.eps);
        let ti: f64 = self.tail_i_odd.iter().chain(self.tail_i_even.iter()).sum();
        let tj: f64 = self.tail_j_odd.iter().chain(self.tail_j_even.iter()).sum();
        ci.abs() * ti + cj.abs() * tj
    }
}

// ----------------------------------------------------------------------------
// Series expansion of R1^{-3}
// ----------------------------------------------------------------------------

/// Partial sum (to order `trunc` in the expansion variable) of the double
/// series for `R1^{-3}`: factor out `(1 + eps^4 a^4)^{-3/2}`, expand in
/// `mu = 2 eps^2 a^2 / (1 + eps^4 a^4) < 1`, and reduce each `cos^i` to
/// harmonics `cos(m (psi + theta0))`.
pub fn r1_inv_cubed_series(tau: f64, theta0: f64, eps: f64, trunc: usize) -> Result<f64> {
    if eps == 0.0 {
        return Ok(1.0);
    }
    let fr = eval_frame(tau, eps)?;
    let w = eps * eps * fr.a * fr.a;
    let denom = 1.0 + w * w;
    let mu = 2.0 * w / denom;
    if !(mu < 1.0) {
        return Err(Error::Domain(format!(
            "r1_inv_cubed_series: expansion parameter mu = {mu} >= 1"
        )));
    }
    let phi = theta0 + fr.psi;
    let pref = denom.powf(-1.5);
    // binom(-3/2, i) (-mu)^i, accumulated multiplicatively.
    let mut outer = 1.0;
    let mut sum = 0.0;
    for i in 0..=trunc {
        if i > 0 {
            outer *= (-1.5 - (i as f64 - 1.0)) / i as f64 * (-mu);
        }
        // cos^i phi = 2^{-i} sum_k binom(i, k) cos((i - 2k) phi).
        let mut inner = 0.0;
        let mut row = 1.0;
        for k in 0..=i {
            inner += row * ((i as f64 - 2.0 * k as f64) * phi).cos();
            row *= (i - k) as f64 / (k as f64 + 1.0);
        }
        sum += outer * inner * 0.5f64.powi(i as i32);
    }
    Ok(pref * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn r1_pins() {
        // tau = 0, theta0 = pi/2: the cosine term drops, radicand 1 + eps^4 a^4.
        let v = r1(0.0, std::f64::consts::FRAC_PI_2, 0.4).unwrap();
        assert_abs_diff_eq!(v, 1.1024f64.sqrt(), epsilon = 1e-15);
        // cos(psi + theta0) = 1 collapses to 1 - eps^2 a^2.
        let v = r1(0.0, 0.0, 0.4).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 0.32, epsilon = 1e-15);
        // eps = 0 degenerates to 1.
        assert_eq!(r1(1.0, 0.3, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn inv_cubed_is_accurate_for_tiny_delta() {
        // Taylor of 1 - (1+d)^{-3/2} is 1.5 d - 1.875 d^2 + O(d^3); a naive
        // evaluation would be wrong by ~1e-16 here, eleven orders larger
        // than the allowance.
        let d = 1e-14;
        assert_abs_diff_eq!(one_minus_inv_cubed(d), 1.5 * d - 1.875 * d * d, epsilon = 1e-29);
        let d = 0.3f64;
        assert_abs_diff_eq!(
            one_minus_inv_cubed(d),
            1.0 - (1.0 + d).powf(-1.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn i_integrand_weight_identity() {
        // (b' a^2 + a b^2) = 2 a^3 - 3 a^5 / 2 via b' = a - a^3 and
        // b^2 = a^2 - a^4 / 2; asserted numerically since the direct
        // integrand uses the right-hand form.
        for i in 0..200 {
            let tau = -5.0 + 10.0 * (i as f64) / 199.0;
            let fr = eval_frame(tau, 0.4).unwrap();
            let lhs = fr.bprime * fr.a * fr.a + fr.a * fr.b * fr.b;
            let rhs = 2.0 * fr.a.powi(3) - 1.5 * fr.a.powi(5);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-14);
        }
    }

    #[test]
    fn d0_direct_is_odd_and_vanishes_at_multiples_of_pi() {
        let (v0, e0) = d0_direct(0.0, 0.45).unwrap();
        assert!(v0.abs() <= e0 + 1e-12, "D0(0) = {v0}");
        let (vpi, epi) = d0_direct(std::f64::consts::PI, 0.45).unwrap();
        assert!(vpi.abs() <= epi + 1e-11, "D0(pi) = {vpi}");
        let (vp, _) = d0_direct(0.7, 0.45).unwrap();
        let (vm, em) = d0_direct(-0.7, 0.45).unwrap();
        assert!((vp + vm).abs() <= 2.0 * em + 1e-11);
    }

    #[test]
    fn d0_direct_rejects_out_of_range_eps() {
        assert!(d0_direct(0.5, 0.25).is_err());
        assert!(d0_direct(0.5, 0.55).is_err());
    }

    #[test]
    fn elementary_index_sets() {
        assert!(ElementaryIntegral::new(Kind::I1Odd, 0, 0).is_err());
        assert!(ElementaryIntegral::new(Kind::I1Odd, 1, 0).is_ok());
        assert!(ElementaryIntegral::new(Kind::I1Odd, 1, 2).is_err());
        assert!(ElementaryIntegral::new(Kind::JEven, 1, 0).is_err());
        assert!(ElementaryIntegral::new(Kind::JEven, 1, 1).is_ok());
    }

    #[test]
    fn elementary_smoke_values() {
        // I1 odd (n=1, m=0): integrand eps^4 a^7 cos(psi); positive and
        // modest at eps = 0.45 (the a^7 mass sits where psi is slow).
        let v = elementary_integral(Kind::I1Odd, 1, 0, 0.45).unwrap();
        assert!(v > 0.0 && v < 10.0, "I1_odd(1,0) = {v}");
    }

    #[test]
    fn coefficient_pins_both_conventions() {
        // Symmetrized convention, the catalogued rationals.
        let s = series_coefficients(0, 1, 0).unwrap();
        assert_eq!(s.c2, ratio(99, 16));
        assert_eq!(s.cal_c, ratio(-123, 8));
        assert!(s.e1.is_none());
        // Projected convention.
        let p = series_coefficients_with(0, 1, 0, CoeffConvention::Projected).unwrap();
        assert_eq!(p.c2, ratio(9, 16));
        assert_eq!(p.cal_c, ratio(3, 2));
        // Out-of-lattice E indices vanish through the binomial convention.
        let far = series_coefficients(3, 1, 0).unwrap();
        assert_eq!(far.e1.unwrap(), BigRational::zero());
        assert_eq!(far.e2.unwrap(), BigRational::zero());
        // k = 0 is not on the lattice at all.
        assert!(series_coefficients(0, 0, 0).is_err());
    }

    #[test]
    fn rational_to_f64_handles_large_entries() {
        let r = ratio(99, 16);
        assert_abs_diff_eq!(rational_to_f64(&r), 6.1875, epsilon = 1e-15);
        let big = binom_half(-3, 40); // huge numerator and denominator
        let approx_direct = big.to_f64().unwrap();
        assert_abs_diff_eq!(rational_to_f64(&big), approx_direct, epsilon = approx_direct.abs() * 1e-12);
        assert_eq!(rational_to_f64(&BigRational::zero()), 0.0);
        let neg = ratio(-123, 8);
        assert_abs_diff_eq!(rational_to_f64(&neg), -15.375, epsilon = 1e-15);
    }

    #[test]
    fn r1_series_matches_direct() {
        // Generic point; the binomial variable 2 eps^2 a^2 cos - eps^4 a^4
        // reaches ~0.57 here, so sixty terms leave a tail ~0.57^60 ≈ 1e-15.
        let tau = 0.5;
        let th0 = 0.3;
        let eps = 0.4;
        let direct = r1(tau, th0, eps).unwrap().powi(-3);
        let series = r1_inv_cubed_series(tau, th0, eps, 60).unwrap();
        assert_abs_diff_eq!(series, direct, epsilon = 1e-12);
        // theta0 + psi = pi/2 at tau = 0: odd cos-powers vanish pointwise.
        let direct = r1(0.0, std::f64::consts::FRAC_PI_2, 0.4).unwrap().powi(-3);
        let series =
            r1_inv_cubed_series(0.0, std::f64::consts::FRAC_PI_2, 0.4, 20).unwrap();
        assert_abs_diff_eq!(series, direct, epsilon = 1e-10);
        // eps = 0 is exactly 1.
        assert_eq!(r1_inv_cubed_series(1.0, 0.2, 0.0, 5).unwrap(), 1.0);
    }

    #[test]
    fn small_table_is_consistent() {
        // Shallow in harmonics but deep enough in diagonals to pass the
        // tail-quality invariant at this eps.
        let trunc = Truncation { m_max: 2, k_max: 4, l_max: 4 };
        let t = fourier_series_d0(0.45, trunc).unwrap();
        assert_eq!(t.i_odd.len(), 3);
        assert_eq!(t.i_even.len(), 2);
        // Series is odd in theta0 by construction.
        let v = t.eval(0.6);
        assert_abs_diff_eq!(t.eval(-0.6), -v, epsilon = 1e-13 * v.abs().max(1.0));
        // Combined coefficients assemble the same number.
        let coeffs = t.combined_coefficients();
        let manual: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * 0.6).sin())
            .sum();
        assert_abs_diff_eq!(manual, v, epsilon = 1e-14 * v.abs().max(1.0));
        assert!(t.d0_tail_bound() >= 0.0);
    }
}
