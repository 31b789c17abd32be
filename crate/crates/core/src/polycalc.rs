//! Polynomial calculus on coefficient vectors.
//!
//! [`Polynomial`] is a dense real polynomial in a single variable with
//! coefficients in ascending powers. It carries no notion of which variable
//! it is written in; the designer uses normalized time `s = t/tf` for the
//! exact shape family and the centered variable `u = 2s - 1` for the
//! trajectory polynomials it evaluates.
//!
//! [`RationalPolynomial`] holds exact rational coefficients and is used
//! wherever an integral or endpoint value must be free of rounding.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    /// Builds a polynomial, trimming trailing zero coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn monomial(power: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = c;
        Polynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self, k: usize) -> Polynomial {
        if k == 0 {
            return self.clone();
        }
        if k >= self.coeffs.len() {
            return Polynomial::zero();
        }
        let coeffs = (k..self.coeffs.len())
            .map(|power| falling_factorial(power, k) * self.coeffs[power])
            .collect();
        Polynomial::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(power, c)| c / (power + 1) as f64),
        );
        Polynomial::new(coeffs)
    }

    /// Antiderivative vanishing at `x = origin`.
    pub fn antiderivative_from(&self, origin: f64) -> Polynomial {
        let anti = self.antiderivative();
        let offset = anti.eval(origin);
        anti - Polynomial::constant(offset)
    }

    pub fn definite_integral(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Largest absolute value over `n` equally spaced samples of `[a, b]`.
    pub fn max_abs_sampled(&self, a: f64, b: f64, n: usize) -> f64 {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                self.eval(x).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self + &(-rhs)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl Mul<f64> for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

/// `n (n-1) ... (n-k+1)` as a float.
fn falling_factorial(n: usize, k: usize) -> f64 {
    ((n - k + 1)..=n).fold(1.0, |acc, m| acc * m as f64)
}

/// Exact polynomial with rational coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        RationalPolynomial::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// `(a + b x)^n`.
    pub fn binomial_power(a: i64, b: i64, n: usize) -> Self {
        let base = RationalPolynomial::from_integers(&[a, b]);
        (0..n).fold(RationalPolynomial::from_integers(&[1]), |acc, _| {
            acc.mul(&base)
        })
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn mul(&self, rhs: &RationalPolynomial) -> RationalPolynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return RationalPolynomial::new(Vec::new());
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RationalPolynomial::new(coeffs)
    }

    pub fn derivative(&self, k: usize) -> RationalPolynomial {
        if k >= self.coeffs.len() {
            return RationalPolynomial::new(Vec::new());
        }
        let coeffs = (k..self.coeffs.len())
            .map(|power| {
                let factor: BigInt = ((power - k + 1)..=power).map(BigInt::from).product();
                &self.coeffs[power] * BigRational::from_integer(factor)
            })
            .collect();
        RationalPolynomial::new(coeffs)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Exact `∫_a^b p(x) dx`.
    pub fn definite_integral(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        let mut pa = a.clone();
        let mut pb = b.clone();
        for (power, c) in self.coeffs.iter().enumerate() {
            let denom = BigRational::from_integer(BigInt::from(power + 1));
            total += c * (&pb - &pa) / denom;
            pa = &pa * a;
            pb = &pb * b;
        }
        total
    }

    /// Returns `q(y) = p(offset + slope * y)`.
    pub fn compose_affine(&self, offset: &BigRational, slope: &BigRational) -> RationalPolynomial {
        let linear = RationalPolynomial::new(vec![offset.clone(), slope.clone()]);
        let mut result = RationalPolynomial::new(Vec::new());
        for c in self.coeffs.iter().rev() {
            result = result.mul(&linear);
            if result.coeffs.is_empty() {
                result.coeffs.push(c.clone());
            } else {
                result.coeffs[0] += c;
            }
            result = RationalPolynomial::new(result.coeffs);
        }
        result
    }

    /// Nearest binary64 coefficients.
    pub fn to_f64(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(rational_to_f64).collect())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Elementary symmetric polynomials `P_0..P_N` of the squared frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCoefficients {
    values: Vec<f64>,
}

impl SymmetricCoefficients {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of frequencies `N`.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// `P_j`, zero outside `0..=N`.
    pub fn get(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }

    /// `∏_i (ω_i² - x) = Σ_j P_j (-x)^(N-j)`.
    pub fn characteristic(&self, x: f64) -> f64 {
        let n = self.order();
        self.values
            .iter()
            .enumerate()
            .map(|(j, p)| p * (-x).powi((n - j) as i32))
            .sum()
    }
}

/// Expands `∏ (X + ω_i²)` one factor at a time.
pub fn symmetric_coefficients(freqs: &[f64]) -> Result<SymmetricCoefficients> {
    if freqs.is_empty() {
        return Err(Error::InvalidSpec("frequency list is empty".into()));
    }
    if let Some(bad) = freqs.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidSpec(format!(
            "frequencies must be finite and positive, got {bad}"
        )));
    }
    let mut values = vec![1.0];
    for w in freqs {
        let w2 = w * w;
        values.push(0.0);
        for j in (1..values.len()).rev() {
            values[j] += values[j - 1] * w2;
        }
    }
    Ok(SymmetricCoefficients { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;
    use proptest::prelude::*;

    fn shape_n2() -> Polynomial {
        // s^4 (1-s)^4 (1-2s), expanded by hand-checked integer arithmetic
        RationalPolynomial::binomial_power(0, 1, 4)
            .mul(&RationalPolynomial::binomial_power(1, -1, 4))
            .mul(&RationalPolynomial::from_integers(&[1, -2]))
            .to_f64()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::new(vec![0.0, 0.0, 1.0]).eval(0.5), 0.25);
        assert_eq!(Polynomial::constant(1.0).eval(-3.7), 1.0);
        assert_eq!(shape_n2().eval(0.5), 0.0);
    }

    #[test]
    fn derivative_examples() {
        let p = Polynomial::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(p.derivative(1), Polynomial::new(vec![0.0, 2.0]));
        assert_eq!(shape_n2().derivative(3).eval(0.0), 0.0);
        assert_eq!(shape_n2().derivative(4).eval(0.0), 24.0);
        assert!(p.derivative(3).is_zero());
    }

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Polynomial::new(vec![0.0]).degree(), None);
    }

    #[test]
    fn definite_integral_examples() {
        for n in 1..=8 {
            let odd = RationalPolynomial::binomial_power(0, 1, 2 * n)
                .mul(&RationalPolynomial::binomial_power(1, -1, 2 * n))
                .mul(&RationalPolynomial::from_integers(&[1, -2]));
            let zero = BigRational::zero();
            let one = BigRational::one();
            assert!(odd.definite_integral(&zero, &one).is_zero(), "N = {n}");
            let f = odd.to_f64();
            let mass: f64 = f.coeffs().iter().map(|c| c.abs()).sum();
            assert!(f.definite_integral(0.0, 1.0).abs() <= 1e-15 * mass);
        }
        assert_eq!(Polynomial::constant(1.0).definite_integral(0.0, 1.0), 1.0);

        // Beta oracle: B(5,6) - 2 B(6,6) = 4!5!/10! - 2 * 5!5!/11!
        let fact = |n: u64| (1..=n).product::<u64>() as f64;
        let oracle = fact(4) * fact(5) / fact(10) - 2.0 * fact(5) * fact(5) / fact(11);
        assert!((oracle - 1.0 / 13860.0).abs() < 1e-18);
        let weighted = &Polynomial::new(vec![1.0, -1.0]) * &shape_n2();
        // power-basis sum cancels about four digits
        assert!((weighted.definite_integral(0.0, 1.0) / oracle - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rational_conversion_is_correctly_rounded() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(rational_to_f64(&third), 1.0 / 3.0);
        let r = BigRational::new(BigInt::from(-1), BigInt::from(13860));
        assert_eq!(rational_to_f64(&r), -1.0 / 13860.0);
        assert_eq!(rational_to_f64(&BigRational::from_integer(BigInt::from(24))), 24.0);
    }

    #[test]
    fn compose_affine_maps_unit_interval() {
        // p(s) = s^2 with s = (1 + u)/2 gives (1 + 2u + u^2)/4
        let p = RationalPolynomial::from_integers(&[0, 0, 1]);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let q = p.compose_affine(&half, &half).to_f64();
        assert_eq!(q, Polynomial::new(vec![0.25, 0.5, 0.25]));
    }

    #[test]
    fn symmetric_coefficient_examples() {
        let p = symmetric_coefficients(&[2.0, 3.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 13.0, 36.0]);

        let p = symmetric_coefficients(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 3.0, 3.0, 1.0]);

        // brute-force expansion of (X + 0.97^2)(X + 1)(X + 1.03^2)
        let sq = [0.97f64 * 0.97, 1.0, 1.03f64 * 1.03];
        let oracle = [
            1.0,
            sq[0] + sq[1] + sq[2],
            sq[0] * sq[1] + sq[0] * sq[2] + sq[1] * sq[2],
            sq[0] * sq[1] * sq[2],
        ];
        let p = symmetric_coefficients(&[0.97, 1.0, 1.03]).unwrap();
        for (got, want) in p.values().iter().zip(oracle) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        assert!((p.get(1) - 3.0018).abs() < 1e-14);
        assert!((p.get(2) - 3.00000081).abs() < 1e-14);
        assert!((p.get(3) - 0.99820081).abs() < 1e-14);
    }

    #[test]
    fn symmetric_coefficients_reject_bad_input() {
        assert!(matches!(symmetric_coefficients(&[]), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            symmetric_coefficients(&[1.0, 0.0]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            symmetric_coefficients(&[-1.0]),
            Err(Error::InvalidSpec(_))
        ));
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-100i32..100, 1..12)
            .prop_map(|c| Polynomial::new(c.into_iter().map(f64::from).collect()))
    }

    proptest! {
        #[test]
        fn antiderivative_then_derivative_is_identity(
            multiples in prop::collection::vec(-100i32..100, 1..12),
        ) {
            // coefficients divisible by power + 1 keep every step exact
            let p = Polynomial::new(
                multiples.iter().enumerate().map(|(k, m)| f64::from(*m) * (k + 1) as f64).collect(),
            );
            prop_assert_eq!(p.antiderivative().derivative(1), p);
        }

        #[test]
        fn derivative_then_antiderivative_drops_constant(p in poly_strategy()) {
            let back = p.derivative(1).antiderivative();
            let mut expected = p.coeffs().to_vec();
            if !expected.is_empty() {
                expected[0] = 0.0;
            }
            prop_assert_eq!(back, Polynomial::new(expected));
        }

        #[test]
        fn integral_is_antisymmetric(p in poly_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            prop_assert_eq!(p.definite_integral(a, b), -p.definite_integral(b, a));
        }

        #[test]
        fn symmetric_coefficients_permutation_invariant(
            freqs in prop::collection::vec(0.2f64..3.0, 1..7),
            seed in any::<u64>(),
        ) {
            let mut shuffled = freqs.clone();
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            if seed % 2 == 0 {
                shuffled.reverse();
            }
            let a = symmetric_coefficients(&freqs).unwrap();
            let b = symmetric_coefficients(&shuffled).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
            }
        }

        #[test]
        fn characteristic_vanishes_at_squared_frequencies(
            freqs in prop::collection::vec(0.9f64..1.1, 1..7),
        ) {
            let p = symmetric_coefficients(&freqs).unwrap();
            let n = freqs.len();
            for w in &freqs {
                let residual = p.characteristic(w * w);
                prop_assert!(residual.abs() <= 1e-12 * p.get(n), "{residual}");
            }
        }

        #[test]
        fn characteristic_vanishes_relative_to_term_scale(
            freqs in prop::collection::vec(0.2f64..3.0, 1..7),
        ) {
            let p = symmetric_coefficients(&freqs).unwrap();
            let n = freqs.len();
            for w in &freqs {
                let x = w * w;
                let scale = (0..=n)
                    .map(|j| (p.get(j) * x.powi((n - j) as i32)).abs())
                    .fold(0.0, f64::max);
                prop_assert!(p.characteristic(x).abs() <= 1e-13 * scale);
            }
        }
    }
}
