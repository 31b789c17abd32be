//! Exact Fourier integrals of polynomials over sub-intervals of `[-1, 1]`.
//!
//! `∫ p(u) e^{-iκu} du = Σ_n c_n m_n` with the oscillatory moments
//! `m_n = ∫ u^n e^{-iκu} du`. Integrating by parts links consecutive moments,
//!
//! ```text
//! λ m_n = [u^n e^{λu}] − n m_{n−1},   λ = −iκ,
//! ```
//!
//! which is stable upward while `n ≤ |κ|` and downward above it. For tiny
//! `|κ|` the Maclaurin series of the exponential is summed instead.

use num_complex::Complex64;

use crate::polycalc::Polynomial;

/// Below this `|κ|` (with `|u| ≤ 1`), moments come from the power series.
const SERIES_THRESHOLD: f64 = 0.25;

/// Relative truncation level for the power series.
const SERIES_TOLERANCE: f64 = 1e-18;

/// `m_n = ∫_lo^hi u^n e^{-iκu} du` for `n = 0..=max_power`; requires
/// `-1 ≤ lo ≤ hi ≤ 1`.
pub fn oscillatory_moments(max_power: usize, kappa: f64, lo: f64, hi: f64) -> Vec<Complex64> {
    debug_assert!((-1.0..=1.0).contains(&lo) && (-1.0..=1.0).contains(&hi));
    if kappa.abs() < SERIES_THRESHOLD {
        return series_moments(max_power, kappa, lo, hi);
    }
    let lambda = Complex64::new(0.0, -kappa);
    let e_hi = (lambda * hi).exp();
    let e_lo = (lambda * lo).exp();
    let boundary = |n: usize| e_hi * hi.powi(n as i32) - e_lo * lo.powi(n as i32);

    let mut m = vec![Complex64::new(0.0, 0.0); max_power + 1];
    let forward_last = (kappa.abs().floor() as usize).min(max_power);
    m[0] = (e_hi - e_lo) / lambda;
    for n in 1..=forward_last {
        m[n] = (boundary(n) - m[n - 1] * n as f64) / lambda;
    }
    if forward_last < max_power {
        let top = max_power.max((2.0 * kappa.abs()).ceil() as usize) + 60;
        let mut current = Complex64::new(0.0, 0.0);
        for n in (forward_last + 2..=top).rev() {
            current = (boundary(n) - lambda * current) / n as f64;
            if n - 1 <= max_power {
                m[n - 1] = current;
            }
        }
    }
    m
}

fn series_moments(max_power: usize, kappa: f64, lo: f64, hi: f64) -> Vec<Complex64> {
    let lambda = Complex64::new(0.0, -kappa);
    (0..=max_power)
        .map(|n| {
            let scale = (hi.abs().powi(n as i32 + 1) + lo.abs().powi(n as i32 + 1)) / (n + 1) as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            let mut factor = Complex64::new(1.0, 0.0);
            for k in 0..200 {
                let p = (n + k + 1) as i32;
                sum += factor * ((hi.powi(p) - lo.powi(p)) / p as f64);
                factor = factor * lambda / (k + 1) as f64;
                if factor.norm() <= SERIES_TOLERANCE * scale {
                    break;
                }
            }
            sum
        })
        .collect()
}

/// `∫_lo^hi p(u) e^{-iκu} du`.
pub fn polynomial_fourier(p: &Polynomial, kappa: f64, lo: f64, hi: f64) -> Complex64 {
    let Some(degree) = p.degree() else {
        return Complex64::new(0.0, 0.0);
    };
    let m = oscillatory_moments(degree, kappa, lo, hi);
    p.coeffs().iter().zip(&m).map(|(c, m)| m * *c).sum()
}

/// `∫_0^t f(t') e^{-iωt'} dt'` for `f` written in `u = 2t/tf − 1`.
pub fn time_fourier(p: &Polynomial, duration: f64, omega: f64, t: f64) -> Complex64 {
    let kappa = 0.5 * omega * duration;
    let hi = (2.0 * t / duration - 1.0).clamp(-1.0, 1.0);
    let phase = Complex64::new(0.0, -kappa).exp();
    phase * polynomial_fourier(p, kappa, -1.0, hi) * (0.5 * duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn quad_moment(n: usize, kappa: f64, lo: f64, hi: f64) -> Complex64 {
        let rule = GaussLegendre::new(32);
        rule.integrate(lo, hi, 64, |u| {
            Complex64::new(0.0, -kappa * u).exp() * u.powi(n as i32)
        })
    }

    #[test]
    fn moments_match_quadrature_across_regimes() {
        for &kappa in &[0.0, 1e-3, 0.2, 0.3, 1.0, 3.9, 12.5, 40.0] {
            for &(lo, hi) in &[(-1.0, 1.0), (-1.0, 0.3), (-0.2, 0.9)] {
                let m = oscillatory_moments(20, kappa, lo, hi);
                for (n, got) in m.iter().enumerate() {
                    let want = quad_moment(n, kappa, lo, hi);
                    assert!(
                        (got - want).norm() < 1e-14,
                        "kappa {kappa} [{lo}, {hi}] n {n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_frequency_moments_are_plain_integrals() {
        let m = oscillatory_moments(6, 0.0, -1.0, 1.0);
        for (n, v) in m.iter().enumerate() {
            let want = if n % 2 == 0 { 2.0 / (n + 1) as f64 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-16 && v.im.abs() < 1e-16);
        }
    }

    #[test]
    fn time_fourier_of_constant() {
        // ∫_0^T e^{-iωt} dt = (1 - e^{-iωT}) / (iω)
        let p = Polynomial::constant(1.0);
        let (tf, w) = (3.0, 1.7);
        let got = time_fourier(&p, tf, w, tf);
        let want = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -w * tf).exp())
            / Complex64::new(0.0, w);
        assert!((got - want).norm() < 1e-15);
        assert!(time_fourier(&p, tf, w, 0.0).norm() < 1e-16);
    }
}
