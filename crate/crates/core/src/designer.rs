//! Robust transport protocol synthesis.
//!
//! The trap acceleration is generated from an auxiliary shape `g` through
//! the operator `∏_i (d²/dt² + ω_i²)`, so its Fourier transform picks up the
//! factor `∏_i (ω_i² − ω²)` and vanishes at every design frequency. The
//! position is then the exact double antiderivative of that acceleration.
//!
//! Polynomials returned by [`TransportProtocol`] are written in the centered
//! time `u = 2t/tf − 1`, which keeps evaluation well conditioned for the
//! high-order shapes of multi-point protocols.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::polycalc::{
    rational_to_f64, symmetric_coefficients, Polynomial, RationalPolynomial,
    SymmetricCoefficients,
};
use crate::units::UnitMode;

/// Largest number of design frequencies accepted by default.
pub const DEFAULT_MAX_POINTS: usize = 8;

/// Endpoint tolerance relative to `max(|d|, 1)`.
const ENDPOINT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    /// Transport distance, harmonic lengths.
    #[serde(rename = "d")]
    pub distance: f64,
    /// Transport duration, units of `1/ω_ref`.
    #[serde(rename = "tf")]
    pub duration: f64,
    /// Design angular frequencies, units of `ω_ref`.
    pub freqs: Vec<f64>,
    #[serde(skip)]
    pub unit_mode: UnitMode,
}

impl TransportSpec {
    /// Dimensionless spec, validated.
    pub fn new(distance: f64, duration: f64, freqs: Vec<f64>) -> Result<Self> {
        let spec = TransportSpec {
            distance,
            duration,
            freqs,
            unit_mode: UnitMode::Dimensionless,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec from SI inputs (m, s, rad/s), stored in reduced units of `mode`.
    pub fn from_physical(
        distance_m: f64,
        duration_s: f64,
        freqs_rad_s: &[f64],
        mode: UnitMode,
    ) -> Result<Self> {
        if !mode.is_physical() {
            return Err(Error::InvalidSpec("from_physical needs a physical unit mode".into()));
        }
        if let UnitMode::Physical { mass, omega_ref } = mode {
            if !(mass > 0.0 && omega_ref > 0.0) {
                return Err(Error::InvalidSpec(
                    "mass and reference frequency must be positive".into(),
                ));
            }
        }
        let spec = TransportSpec {
            distance: distance_m / mode.length_scale(),
            duration: duration_s / mode.time_scale(),
            freqs: freqs_rad_s
                .iter()
                .map(|w| w / mode.frequency_scale())
                .collect(),
            unit_mode: mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_unit_mode(mut self, mode: UnitMode) -> Self {
        self.unit_mode = mode;
        self
    }

    pub fn with_distance(&self, distance: f64) -> Self {
        TransportSpec {
            distance,
            ..self.clone()
        }
    }

    pub fn with_freqs(&self, freqs: Vec<f64>) -> Self {
        TransportSpec {
            freqs,
            ..self.clone()
        }
    }

    pub fn points(&self) -> usize {
        self.freqs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.distance.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "distance must be finite, got {}",
                self.distance
            )));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.freqs.is_empty() {
            return Err(Error::InvalidSpec("at least one design frequency is required".into()));
        }
        if let Some(w) = self.freqs.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "design frequencies must be positive, got {w}"
            )));
        }
        Ok(())
    }
}

/// Auxiliary shape family: an exact polynomial in `s = t/tf` with a zero of
/// order at least `2N` at both endpoints and zero mean over `[0, 1]`.
pub trait ShapeFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn shape(&self, points: usize) -> RationalPolynomial;
}

/// `s^{2N} (1 − s)^{2N} (1 − 2s)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolynomialBump;

impl ShapeFamily for PolynomialBump {
    fn name(&self) -> &'static str {
        "polynomial_bump"
    }

    fn shape(&self, points: usize) -> RationalPolynomial {
        let order = 2 * points;
        RationalPolynomial::binomial_power(0, 1, order)
            .mul(&RationalPolynomial::binomial_power(1, -1, order))
            .mul(&RationalPolynomial::from_integers(&[1, -2]))
    }
}

/// Per-`N` data of a shape family, independent of the spec.
#[derive(Debug, PartialEq)]
struct ShapeData {
    exact: RationalPolynomial,
    base: Polynomial,
    centered: Polynomial,
    delta: f64,
    /// `d^{2k} g̃/du^{2k}` for `k = 0..=N`, double-double coefficients.
    even_derivatives: Vec<Vec<TwoFloat>>,
}

impl ShapeData {
    fn build(family: &dyn ShapeFamily, points: usize) -> Result<Self> {
        let exact = family.shape(points);
        check_family_contract(&exact, points, family.name())?;

        let zero = BigRational::zero();
        let one = BigRational::one();
        let weighted = exact.mul(&RationalPolynomial::from_integers(&[1, -1]));
        let delta_exact = weighted.definite_integral(&zero, &one);
        if delta_exact.is_zero() {
            return Err(Error::DegenerateShape);
        }

        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let centered_exact = exact.compose_affine(&half, &half);
        let even_derivatives = (0..=points)
            .map(|k| {
                centered_exact
                    .derivative(2 * k)
                    .coeffs()
                    .iter()
                    .map(double_double)
                    .collect()
            })
            .collect();
        Ok(ShapeData {
            base: exact.to_f64(),
            centered: centered_exact.to_f64(),
            exact,
            delta: rational_to_f64(&delta_exact),
            even_derivatives,
        })
    }
}

/// Nearest double-double to `r`.
fn double_double(r: &BigRational) -> TwoFloat {
    let hi = rational_to_f64(r);
    let rest = BigRational::from_float(hi).map_or(0.0, |h| rational_to_f64(&(r - h)));
    TwoFloat::new_add(hi, rest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFunction {
    points: usize,
    shape: Arc<ShapeData>,
    norm: f64,
    duration: f64,
}

impl AuxiliaryFunction {
    pub fn points(&self) -> usize {
        self.points
    }

    /// Unnormalized shape `g̃(s)`.
    pub fn base(&self) -> &Polynomial {
        &self.shape.base
    }

    pub fn exact_base(&self) -> &RationalPolynomial {
        &self.shape.exact
    }

    /// `g̃` written in `u = 2s − 1`.
    pub fn centered(&self) -> &Polynomial {
        &self.shape.centered
    }

    /// `Δ = ∫₀¹ (1 − s) g̃(s) ds`.
    pub fn delta(&self) -> f64 {
        self.shape.delta
    }

    /// Normalization `𝒩 = d / (P_N tf² Δ)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `g(t) = 𝒩 g̃(t/tf)`.
    pub fn value(&self, t: f64) -> f64 {
        self.norm * self.shape.centered.eval(2.0 * t / self.duration - 1.0)
    }
}

/// Per-order endpoint values `𝒩 g̃^{(k)}(0)` and `𝒩 g̃^{(k)}(1)`
/// (derivatives with respect to `s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    pub order: usize,
    pub at_start: f64,
    pub at_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub residuals: Vec<BoundaryResidual>,
}

impl BoundaryReport {
    pub fn all_vanish(&self) -> bool {
        self.residuals
            .iter()
            .all(|r| r.at_start == 0.0 && r.at_end == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportProtocol {
    spec: TransportSpec,
    aux: AuxiliaryFunction,
    pj: SymmetricCoefficients,
    x0: Polynomial,
    v0: Polynomial,
    a0: Polynomial,
}

impl TransportProtocol {
    pub fn spec(&self) -> &TransportSpec {
        &self.spec
    }

    pub fn aux(&self) -> &AuxiliaryFunction {
        &self.aux
    }

    pub fn symmetric(&self) -> &SymmetricCoefficients {
        &self.pj
    }

    pub fn points(&self) -> usize {
        self.aux.points
    }

    pub fn duration(&self) -> f64 {
        self.spec.duration
    }

    pub fn distance(&self) -> f64 {
        self.spec.distance
    }

    /// Trap position as a polynomial in `u = 2t/tf − 1`.
    pub fn position_poly(&self) -> &Polynomial {
        &self.x0
    }

    pub fn velocity_poly(&self) -> &Polynomial {
        &self.v0
    }

    pub fn acceleration_poly(&self) -> &Polynomial {
        &self.a0
    }

    pub fn centered_time(&self, t: f64) -> f64 {
        2.0 * t / self.spec.duration - 1.0
    }

    pub fn position(&self, t: f64) -> f64 {
        self.x0.eval(self.centered_time(t))
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.v0.eval(self.centered_time(t))
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        self.a0.eval(self.centered_time(t))
    }

    /// `max |ẍ₀|` over a dense sample of the transport window.
    pub fn max_abs_acceleration(&self) -> f64 {
        self.a0.max_abs_sampled(-1.0, 1.0, 4001)
    }

    pub fn max_abs_position(&self) -> f64 {
        self.x0.max_abs_sampled(-1.0, 1.0, 4001)
    }

    /// Reassembles a protocol from stored polynomials, rebuilding the shape
    /// data from `spec` and checking it against the stored `delta`/`norm`.
    pub fn from_parts(
        spec: TransportSpec,
        delta: f64,
        norm: f64,
        x0: Polynomial,
        v0: Polynomial,
        a0: Polynomial,
    ) -> Result<Self> {
        spec.validate()?;
        let aux = make_auxiliary(&spec)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(aux.delta(), delta) || !close(aux.norm, norm) {
            return Err(Error::ProtocolFile(format!(
                "stored delta/norm ({delta}, {norm}) disagree with the spec ({}, {})",
                aux.delta(), aux.norm
            )));
        }
        let pj = symmetric_coefficients(&spec.freqs)?;
        Ok(TransportProtocol {
            spec,
            aux,
            pj,
            x0,
            v0,
            a0,
        })
    }
}

/// Configurable front end; [`Designer::default`] ships the polynomial bump
/// family capped at [`DEFAULT_MAX_POINTS`]. Shape data is computed once per
/// `N` and shared by every protocol the designer builds.
#[derive(Debug)]
pub struct Designer {
    family: Box<dyn ShapeFamily>,
    max_points: usize,
    shapes: Mutex<HashMap<usize, Arc<ShapeData>>>,
}

impl Default for Designer {
    fn default() -> Self {
        Designer::new(Box::new(PolynomialBump), DEFAULT_MAX_POINTS)
    }
}

impl Designer {
    pub fn new(family: Box<dyn ShapeFamily>, max_points: usize) -> Self {
        Designer {
            family,
            max_points,
            shapes: Mutex::new(HashMap::new()),
        }
    }

    pub fn family(&self) -> &dyn ShapeFamily {
        self.family.as_ref()
    }

    fn shape(&self, points: usize) -> Result<Arc<ShapeData>> {
        if let Some(shape) = self.lock_shapes().get(&points) {
            return Ok(Arc::clone(shape));
        }
        // built outside the lock; a racing duplicate is harmless
        let shape = Arc::new(ShapeData::build(self.family.as_ref(), points)?);
        Ok(Arc::clone(self.lock_shapes().entry(points).or_insert(shape)))
    }

    fn lock_shapes(&self) -> std::sync::MutexGuard<'_, HashMap<usize, Arc<ShapeData>>> {
        self.shapes.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn make_auxiliary(&self, spec: &TransportSpec) -> Result<AuxiliaryFunction> {
        spec.validate()?;
        let points = spec.points();
        if points > self.max_points {
            return Err(Error::InvalidSpec(format!(
                "{points} design frequencies exceed the cap of {}",
                self.max_points
            )));
        }
        let shape = self.shape(points)?;
        let pj = symmetric_coefficients(&spec.freqs)?;
        let norm = if spec.distance == 0.0 {
            0.0
        } else {
            spec.distance / (pj.get(points) * spec.duration * spec.duration * shape.delta)
        };
        Ok(AuxiliaryFunction {
            points,
            shape,
            norm,
            duration: spec.duration,
        })
    }

    pub fn build_trajectory(&self, spec: &TransportSpec) -> Result<TransportProtocol> {
        let aux = self.make_auxiliary(spec)?;
        let pj = symmetric_coefficients(&spec.freqs)?;
        // The high-order terms of ẍ₀ cancel strongly for short transports, so
        // the chain runs in double-double and is rounded once at the end.
        let a0_wide = wide_acceleration(&aux, &pj, spec.duration)?;
        let half_tf = TwoFloat::from(0.5 * spec.duration);
        let v0_wide = integrate_from_start(&a0_wide, half_tf);
        let x0_wide = integrate_from_start(&v0_wide, half_tf);
        let (a0, v0, x0) = (round(&a0_wide), round(&v0_wide), round(&x0_wide));

        let scale = spec.distance.abs().max(1.0);
        let tolerance = ENDPOINT_TOLERANCE * scale;
        let end_position = (x0.eval(1.0) - spec.distance).abs();
        if end_position > tolerance {
            return Err(Error::InternalConsistency {
                what: "final position x0(tf) = d",
                residual: end_position,
                tolerance,
            });
        }
        let end_velocity = v0.eval(1.0).abs() * spec.duration;
        if end_velocity > tolerance {
            return Err(Error::InternalConsistency {
                what: "final velocity v0(tf) = 0",
                residual: end_velocity,
                tolerance,
            });
        }
        Ok(TransportProtocol {
            spec: spec.clone(),
            aux,
            pj,
            x0,
            v0,
            a0,
        })
    }
}

fn round(coeffs: &[TwoFloat]) -> Polynomial {
    Polynomial::new(coeffs.iter().map(|c| c.hi()).collect())
}

/// `(tf/2) ∫_{-1}^u p`, vanishing at `u = -1`.
fn integrate_from_start(p: &[TwoFloat], half_tf: TwoFloat) -> Vec<TwoFloat> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(TwoFloat::from(0.0));
    for (power, c) in p.iter().enumerate() {
        out.push(*c * half_tf / (power + 1) as f64);
    }
    // value at u = -1, alternating in sign with the power
    let at_start = out
        .iter()
        .enumerate()
        .fold(TwoFloat::from(0.0), |acc, (power, c)| {
            if power % 2 == 0 {
                acc + *c
            } else {
                acc - *c
            }
        });
    out[0] = -at_start;
    out
}

fn check_family_contract(exact: &RationalPolynomial, points: usize, name: &str) -> Result<()> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    for k in 0..2 * points {
        let d = exact.derivative(k);
        if !d.eval(&zero).is_zero() || !d.eval(&one).is_zero() {
            return Err(Error::InvalidSpec(format!(
                "shape family {name} has a non-vanishing derivative of order {k} at an endpoint"
            )));
        }
    }
    if !exact.definite_integral(&zero, &one).is_zero() {
        return Err(Error::InvalidSpec(format!(
            "shape family {name} does not integrate to zero over the transport"
        )));
    }
    Ok(())
}

fn default_designer() -> &'static Designer {
    static DESIGNER: OnceLock<Designer> = OnceLock::new();
    DESIGNER.get_or_init(Designer::default)
}

pub fn make_auxiliary(spec: &TransportSpec) -> Result<AuxiliaryFunction> {
    default_designer().make_auxiliary(spec)
}

pub fn build_trajectory(spec: &TransportSpec) -> Result<TransportProtocol> {
    default_designer().build_trajectory(spec)
}

/// `ẍ₀ = Σ_j P_j g^{(2N−2j)}` in the centered variable, where each time
/// derivative contributes a factor `2/tf`.
pub fn build_acceleration(
    aux: &AuxiliaryFunction,
    pj: &SymmetricCoefficients,
    duration: f64,
) -> Result<Polynomial> {
    Ok(round(&wide_acceleration(aux, pj, duration)?))
}

/// [`build_acceleration`] before rounding, as
/// `𝒩 (2/tf)^{2N} Σ_j P_j (tf/2)^{2j} g̃^{(2N−2j)}(u)`.
fn wide_acceleration(
    aux: &AuxiliaryFunction,
    pj: &SymmetricCoefficients,
    duration: f64,
) -> Result<Vec<TwoFloat>> {
    let n = aux.points;
    if pj.order() != n {
        return Err(Error::InvalidSpec(format!(
            "symmetric coefficients of order {} do not match a {n}-point shape",
            pj.order()
        )));
    }
    if aux.norm == 0.0 {
        return Ok(Vec::new());
    }
    let derivatives = &aux.shape.even_derivatives;
    let mut sum = vec![TwoFloat::from(0.0); derivatives[0].len()];
    let half_tf_sq = TwoFloat::new_mul(0.5 * duration, 0.5 * duration);
    let mut weight = TwoFloat::from(1.0);
    for j in 0..=n {
        let factor = weight * pj.get(j);
        for (acc, c) in sum.iter_mut().zip(&derivatives[n - j]) {
            *acc += factor * *c;
        }
        weight *= half_tf_sq;
    }
    let scale = TwoFloat::from(aux.norm) / half_tf_sq.powi(n as i32);
    Ok(sum.into_iter().map(|c| c * scale).collect())
}

/// Endpoint values of `𝒩 g̃^{(order)}`, exact up to the final scaling.
pub fn boundary_residual(aux: &AuxiliaryFunction, order: usize) -> BoundaryResidual {
    let d = aux.shape.exact.derivative(order);
    let at = |x: BigRational| aux.norm * rational_to_f64(&d.eval(&x));
    BoundaryResidual {
        order,
        at_start: at(BigRational::zero()),
        at_end: at(BigRational::one()),
    }
}

/// Checks `g^{(k)}(0) = g^{(k)}(tf) = 0` for `k = 0..2N−1`.
pub fn verify_boundary_conditions(aux: &AuxiliaryFunction) -> BoundaryReport {
    BoundaryReport {
        residuals: (0..2 * aux.points)
            .map(|k| boundary_residual(aux, k))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spec(d: f64, tf: f64, freqs: &[f64]) -> TransportSpec {
        TransportSpec::new(d, tf, freqs.to_vec()).unwrap()
    }

    #[test]
    fn auxiliary_two_point() {
        let aux = make_auxiliary(&spec(1.0, 1.0, &[1.0, 1.0])).unwrap();
        assert_eq!(aux.delta(), 1.0 / 13860.0);
        assert!((aux.norm() - 13860.0).abs() < 1e-9);
    }

    #[test]
    fn auxiliary_one_point() {
        let aux = make_auxiliary(&spec(1.0, 1.0, &[1.0])).unwrap();
        // ∫₀¹ (1-s) s²(1-s)²(1-2s) ds = B(3,4) - 2 B(4,4) = 1/60 - 1/70
        assert_eq!(aux.delta(), 1.0 / 420.0);
        assert!((aux.norm() - 420.0).abs() < 1e-10);
    }

    #[test]
    fn zero_distance_is_trivial() {
        for n in 1..=4 {
            let p = build_trajectory(&spec(0.0, 3.0, &vec![1.0; n])).unwrap();
            assert_eq!(p.aux().norm(), 0.0);
            assert!(p.position_poly().is_zero());
            assert!(p.acceleration_poly().is_zero());
        }
    }

    #[test]
    fn one_point_acceleration_structure() {
        // ẍ₀ = g'' + ω²g
        let s = spec(2.0, 5.0, &[1.3]);
        let p = build_trajectory(&s).unwrap();
        let aux = p.aux();
        let tf = s.duration;
        let g2 = aux.centered().derivative(2).scale(aux.norm() * (2.0 / tf).powi(2));
        for i in 0..=20 {
            let t = tf * i as f64 / 20.0;
            let u = 2.0 * t / tf - 1.0;
            let expected = g2.eval(u) + 1.3 * 1.3 * aux.value(t);
            assert!((p.acceleration(t) - expected).abs() < 1e-12 * expected.abs().max(1e-3));
        }
    }

    #[test]
    fn two_point_acceleration_matches_finite_differences() {
        let s = spec(1.0, 1.0, &[1.0, 1.0]);
        let p = build_trajectory(&s).unwrap();
        let aux = p.aux();
        // central differences of g(t) = 𝒩 g̃(t) at t = 1/2 (tf = 1)
        let g = |t: f64| aux.norm() * aux.base().eval(t);
        let h = 1e-2;
        // odd symmetry makes every even derivative vanish at the midpoint
        assert!(p.acceleration(0.5).abs() <= 1e-9 * p.max_abs_acceleration());
        let t = 0.3;
        let d2 = (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h);
        let d4 = (g(t + 2.0 * h) - 4.0 * g(t + h) + 6.0 * g(t) - 4.0 * g(t - h) + g(t - 2.0 * h))
            / h.powi(4);
        let h2 = h / 2.0;
        let d2b = (g(t + h2) - 2.0 * g(t) + g(t - h2)) / (h2 * h2);
        let d4b = (g(t + 2.0 * h2) - 4.0 * g(t + h2) + 6.0 * g(t) - 4.0 * g(t - h2)
            + g(t - 2.0 * h2))
            / h2.powi(4);
        // Richardson extrapolation removes the O(h²) term
        let d2r = (4.0 * d2b - d2) / 3.0;
        let d4r = (4.0 * d4b - d4) / 3.0;
        let fd = d4r + 2.0 * d2r + g(t);
        let exact = p.acceleration(t);
        assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "{fd} vs {exact}");
    }

    #[test]
    fn endpoints_hold() {
        let p = build_trajectory(&spec(1.0, 1.0, &[1.0, 1.0])).unwrap();
        assert_eq!(p.position(0.0), 0.0);
        assert_eq!(p.velocity(0.0), 0.0);
        assert!((p.position(1.0) - 1.0).abs() < 1e-12);
        assert!(p.velocity(1.0).abs() < 1e-12);
    }

    #[test]
    fn three_point_coincident_overshoots() {
        let p = build_trajectory(&spec(30000.0, 2.0 * PI * 1.25, &[1.0, 1.0, 1.0])).unwrap();
        assert!(p.max_abs_position() / 30000.0 > 1.0);
    }

    #[test]
    fn boundary_report() {
        let aux = make_auxiliary(&spec(1.0, 1.0, &[1.0, 1.0])).unwrap();
        let report = verify_boundary_conditions(&aux);
        assert_eq!(report.residuals.len(), 4);
        assert!(report.all_vanish());
        let fourth = boundary_residual(&aux, 4);
        assert_eq!(fourth.at_start, 24.0 * aux.norm());

        let aux3 = make_auxiliary(&spec(1.0, 1.0, &[1.0, 1.1, 0.9])).unwrap();
        let report = verify_boundary_conditions(&aux3);
        assert_eq!(report.residuals.len(), 6);
        assert!(report.all_vanish());
    }

    #[test]
    fn acceleration_is_second_derivative_of_position() {
        let s = spec(7.0, 4.0, &[0.8, 1.0, 1.3]);
        let p = build_trajectory(&s).unwrap();
        let rate = 2.0 / s.duration;
        let second = p.position_poly().derivative(2).scale(rate * rate);
        for (a, b) in second.coeffs().iter().zip(p.acceleration_poly().coeffs()) {
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(TransportSpec::new(1.0, 0.0, vec![1.0]).is_err());
        assert!(TransportSpec::new(1.0, 1.0, vec![]).is_err());
        assert!(TransportSpec::new(1.0, 1.0, vec![1.0, -2.0]).is_err());
        assert!(TransportSpec::new(f64::NAN, 1.0, vec![1.0]).is_err());
        let too_many = TransportSpec::new(1.0, 1.0, vec![1.0; 9]).unwrap();
        assert!(matches!(build_trajectory(&too_many), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn mismatched_symmetric_order_is_rejected() {
        let aux = make_auxiliary(&spec(1.0, 1.0, &[1.0, 1.0])).unwrap();
        let pj = symmetric_coefficients(&[1.0]).unwrap();
        assert!(matches!(
            build_acceleration(&aux, &pj, 1.0),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[derive(Debug)]
    struct NotOdd;
    impl ShapeFamily for NotOdd {
        fn name(&self) -> &'static str {
            "not_odd"
        }
        fn shape(&self, points: usize) -> RationalPolynomial {
            RationalPolynomial::binomial_power(0, 1, 2 * points)
                .mul(&RationalPolynomial::binomial_power(1, -1, 2 * points))
        }
    }

    #[test]
    fn custom_family_contract_is_enforced() {
        let designer = Designer::new(Box::new(NotOdd), 4);
        assert!(matches!(
            designer.make_auxiliary(&spec(1.0, 1.0, &[1.0])),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn physical_spec_round_trips_through_scales() {
        let mode = UnitMode::physical(40.0 * crate::units::AMU, 2.0 * PI * 1.41e6);
        let a0 = mode.length_scale();
        let w = mode.frequency_scale();
        let s = TransportSpec::from_physical(30000.0 * a0, 2.0 * PI * 1.25 / w, &[w], mode)
            .unwrap();
        assert!((s.distance - 30000.0).abs() < 1e-9);
        assert!((s.duration - 2.0 * PI * 1.25).abs() < 1e-12);
        assert!((s.freqs[0] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn protocol_is_linear_in_distance(
            d in 0.1f64..1e4,
            n in 1usize..=4,
            tf in (2.0 * PI)..20.0,
        ) {
            let freqs = vec![1.0; n];
            let p1 = build_trajectory(&spec(d, tf, &freqs)).unwrap();
            let p2 = build_trajectory(&spec(2.0 * d, tf, &freqs)).unwrap();
            for i in 0..=16 {
                let t = tf * i as f64 / 16.0;
                let a = 2.0 * p1.position(t);
                let b = p2.position(t);
                prop_assert!((a - b).abs() <= 1e-12 * d);
            }
        }

        #[test]
        fn shape_is_invariant_under_time_rescaling(
            c in 0.5f64..2.0,
            n in 1usize..=3,
            tf in (4.0 * PI)..20.0,
        ) {
            let freqs: Vec<f64> = (0..n).map(|i| 0.95 + 0.05 * i as f64).collect();
            let scaled: Vec<f64> = freqs.iter().map(|w| c * w).collect();
            let p1 = build_trajectory(&spec(10.0, tf, &freqs)).unwrap();
            let p2 = build_trajectory(&spec(10.0, tf / c, &scaled)).unwrap();
            for (a, b) in p1.position_poly().coeffs().iter().zip(p2.position_poly().coeffs()) {
                prop_assert!((a - b).abs() <= 1e-10 * 10.0, "{} vs {}", a, b);
            }
        }

        #[test]
        fn trajectory_is_reflection_symmetric(
            d in -1e4f64..1e4,
            n in 1usize..=4,
            tf in (2.0 * PI)..30.0,
            spread in 0.0f64..0.1,
        ) {
            let freqs: Vec<f64> = (0..n).map(|i| 1.0 - spread + 2.0 * spread * i as f64 / n as f64).collect();
            let p = build_trajectory(&spec(d, tf, &freqs)).unwrap();
            // short multi-point transports overshoot far beyond d
            let excursion = p.max_abs_position().max(1.0);
            for i in 0..=20 {
                let t = tf * i as f64 / 20.0;
                let lhs = p.position(tf - t);
                let rhs = d - p.position(t);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * excursion, "{} vs {}", lhs, rhs);
            }
        }
    }
}
