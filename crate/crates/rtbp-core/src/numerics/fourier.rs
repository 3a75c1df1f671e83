//! Sine-series projection of a smooth `2 pi`-periodic function on a uniform
//! grid.
//!
//! The trapezoidal rule on a periodic grid with `N` points integrates
//! trigonometric polynomials of degree `< N/2` exactly, and converges
//! geometrically for analytic integrands, so `N = 512` leaves nothing on the
//! table for the harmonic orders (a few tens) that appear here.

use crate::error::Result;

/// Which harmonic family a projection targets.
///
/// The splitting function is odd in `theta0`, so its series splits into
/// odd harmonics `sin((2m+1) theta0)` and even harmonics `sin(2m theta0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Project on `sin((2m+1) theta0)`.
    Odd,
    /// Project on `sin(2m theta0)`.
    Even,
}

/// Default number of periodic grid points.
pub const DEFAULT_GRID: usize = 512;

/// Projection `(1/pi) * int_0^{2 pi} g(theta) sin(k theta) dtheta` with
/// `k = 2m + 1` ([`Parity::Odd`]) or `k = 2m` ([`Parity::Even`]), computed by
/// the `N`-point periodic trapezoidal rule.
pub fn fourier_project_n<G>(g: &mut G, m: usize, parity: Parity, n: usize) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let k = match parity {
        Parity::Odd => 2 * m + 1,
        Parity::Even => 2 * m,
    } as f64;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        let theta = j as f64 * step;
        acc += g(theta)? * (k * theta).sin();
    }
    Ok(acc * 2.0 / n as f64)
}

/// [`fourier_project_n`] with the default grid of [`DEFAULT_GRID`] points.
pub fn fourier_project<G>(g: &mut G, m: usize, parity: Parity) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    fourier_project_n(g, m, parity, DEFAULT_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_coefficients_of_a_sine_polynomial() {
        let mut g = |th: f64| {
            Ok(0.7 * th.sin() - 1.3 * (2.0 * th).sin() + 0.25 * (3.0 * th).sin()
                + 4.0 * (6.0 * th).sin()
                - 0.01 * (11.0 * th).sin())
        };
        assert_abs_diff_eq!(fourier_project(&mut g, 0, Parity::Odd).unwrap(), 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(fourier_project(&mut g, 1, Parity::Even).unwrap(), -1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(fourier_project(&mut g, 1, Parity::Odd).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(fourier_project(&mut g, 3, Parity::Even).unwrap(), 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(fourier_project(&mut g, 5, Parity::Odd).unwrap(), -0.01, epsilon = 1e-14);
        // Harmonics absent from g project to zero.
        assert_abs_diff_eq!(fourier_project(&mut g, 2, Parity::Odd).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fourier_project(&mut g, 4, Parity::Even).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cosine_content_does_not_leak_into_sine_projections() {
        let mut g = |th: f64| Ok(2.0 + 5.0 * th.cos() - 3.0 * (4.0 * th).cos());
        assert_abs_diff_eq!(fourier_project(&mut g, 0, Parity::Odd).unwrap(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(fourier_project(&mut g, 2, Parity::Even).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn analytic_but_nonpolynomial_integrand_converges_geometrically() {
        // g(theta) = exp(sin(theta)) has known sine coefficients
        // 2 I_k(1) ... in fact (1/pi) int exp(sin th) sin(k th) dth equals
        // 2 I_1(1) for k = 1 where I is the modified Bessel function; checked
        // against a high-resolution reference grid instead of special
        // functions to keep the test self-contained.
        let mut g = |th: f64| Ok(th.sin().exp());
        let coarse = fourier_project(&mut g, 0, Parity::Odd).unwrap();
        let fine = fourier_project_n(&mut g, 0, Parity::Odd, 4096).unwrap();
        assert_abs_diff_eq!(coarse, fine, epsilon = 1e-13);
    }

    #[test]
    fn even_parity_m_zero_projects_onto_nothing() {
        let mut g = |th: f64| Ok(1.0 + th.sin());
        assert_eq!(fourier_project(&mut g, 0, Parity::Even).unwrap(), 0.0);
    }
}
