//! Excitation observables of a transport protocol probed at trap frequency ω.
//!
//! In reduced units the final excitation is `ΔE = |F(ω)|²/2` with
//! `F(ω) = ∫₀^tf ẍ₀(t) e^{-iωt} dt`. Values called *quanta* are `ΔE/ħω` for
//! the probed ω; the robustness average `Λ(η)` normalizes by `ħω₀` instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designer::TransportProtocol;
use crate::error::{emit, Error, Result, Warning};
use crate::fourier::{polynomial_fourier, time_fourier};
use crate::quadrature::GaussLegendre;

/// Relative change between successive panel doublings accepted by `Λ`.
pub const LAMBDA_TOLERANCE: f64 = 1e-8;
const LAMBDA_START_PANELS: usize = 8;
const LAMBDA_MAX_PANELS: usize = 1024;

/// Phase advance per RK4 step above which a resolution warning is raised.
const MAX_RADIANS_PER_STEP: f64 = 0.1;

/// `F(ω) = ∫₀^tf ẍ₀(t) e^{-iωt} dt`, evaluated exactly from the polynomial
/// acceleration. `ω` may be zero or negative.
pub fn fourier_accel(protocol: &TransportProtocol, omega: f64) -> Complex64 {
    time_fourier(
        protocol.acceleration_poly(),
        protocol.duration(),
        omega,
        protocol.duration(),
    )
}

/// `|∏_i (ω_i² − ω²)| · |G(ω)|` with `G` the transform of the auxiliary `g`.
pub fn fourier_factorized(protocol: &TransportProtocol, omega: f64) -> f64 {
    let aux = protocol.aux();
    let tf = protocol.duration();
    let kappa = 0.5 * omega * tf;
    let g = polynomial_fourier(aux.centered(), kappa, -1.0, 1.0).norm() * 0.5 * tf * aux.norm().abs();
    let prefactor: f64 = protocol
        .spec()
        .freqs
        .iter()
        .map(|w| (w * w - omega * omega).abs())
        .product();
    prefactor * g
}

/// `ΔE(tf; ω)` in units of `ħω_ref`.
pub fn excitation_energy(protocol: &TransportProtocol, omega: f64) -> f64 {
    0.5 * fourier_accel(protocol, omega).norm_sqr()
}

/// `ΔE(tf; ω)/ħω`.
pub fn final_excitation(protocol: &TransportProtocol, omega: f64) -> Result<f64> {
    check_frequency(omega)?;
    Ok(excitation_energy(protocol, omega) / omega)
}

/// `ΔE(tf; ω)` in joules, `(m/2)|F|²` with `F` expressed in m/s. Requires a
/// physical unit mode.
pub fn final_excitation_joules(protocol: &TransportProtocol, omega: f64) -> Result<f64> {
    check_frequency(omega)?;
    let mode = protocol.spec().unit_mode;
    if !mode.is_physical() {
        return Err(Error::InvalidArgument(
            "joule output needs a physical unit mode".into(),
        ));
    }
    let velocity_scale = mode.length_scale() / mode.time_scale();
    let f_si = fourier_accel(protocol, omega) * velocity_scale;
    Ok(0.5 * mode.mass() * f_si.norm_sqr())
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "probe frequency must be positive, got {omega}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationCurve {
    pub omegas: Vec<f64>,
    /// `ΔE(tf; ω)/ħω` per grid point.
    pub energies: Vec<f64>,
    pub protocol_id: String,
}

pub fn excitation_curve(protocol: &TransportProtocol, omegas: &[f64]) -> Result<ExcitationCurve> {
    let energies = omegas
        .par_iter()
        .map(|&w| final_excitation(protocol, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExcitationCurve {
        omegas: omegas.to_vec(),
        energies,
        protocol_id: protocol_id(protocol),
    })
}

pub fn protocol_id(protocol: &TransportProtocol) -> String {
    let spec = protocol.spec();
    let freqs: Vec<String> = spec.freqs.iter().map(|w| w.to_string()).collect();
    format!(
        "N={} freqs=[{}] tf={} d={}",
        spec.points(),
        freqs.join(","),
        spec.duration,
        spec.distance
    )
}

/// State of the fictitious particle in the trap frame, `ξ = x_c − x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub t: f64,
    pub xi: f64,
    pub xi_dot: f64,
}

#[derive(Debug, Clone)]
pub struct ClassicalRun {
    pub omega: f64,
    pub states: Vec<ClassicalState>,
    /// `(t, ΔE(t)/ħω)`.
    pub transient: Vec<(f64, f64)>,
    pub final_quanta: f64,
    pub warnings: Vec<Warning>,
}

impl ClassicalRun {
    pub fn peak_transient(&self) -> f64 {
        self.transient.iter().map(|&(_, e)| e).fold(0.0, f64::max)
    }
}

/// Default RK4 step count for `(ω, tf)`.
pub fn default_steps(omega: f64, duration: f64) -> usize {
    let per_period = (4000.0 * omega * duration / (2.0 * PI)).ceil() as usize;
    per_period.max(20_000)
}

/// `ΔE(t)/ħω = [½(ξ̇ + ẋ₀)² + ½ω²ξ²]/ω`.
pub fn transient_quanta(protocol: &TransportProtocol, omega: f64, state: &ClassicalState) -> f64 {
    let v_lab = state.xi_dot + protocol.velocity(state.t);
    (0.5 * v_lab * v_lab + 0.5 * omega * omega * state.xi * state.xi) / omega
}

/// Fixed-step RK4 for `ξ̈ + ω²ξ = −ẍ₀(t)` on `[0, t_end]` from rest,
/// returning `n_steps + 1` states. The state update uses compensated
/// summation.
pub fn integrate_classical(
    protocol: &TransportProtocol,
    omega: f64,
    t_end: f64,
    n_steps: usize,
) -> Vec<ClassicalState> {
    let h = t_end / n_steps as f64;
    let w2 = omega * omega;
    let rhs = |t: f64, xi: f64, xi_dot: f64| (xi_dot, -w2 * xi - protocol.acceleration(t));

    let mut states = Vec::with_capacity(n_steps + 1);
    let (mut xi, mut xi_dot) = (0.0f64, 0.0f64);
    let (mut c_xi, mut c_dot) = (0.0f64, 0.0f64);
    states.push(ClassicalState {
        t: 0.0,
        xi,
        xi_dot,
    });
    for i in 0..n_steps {
        let t = i as f64 * h;
        let k1 = rhs(t, xi, xi_dot);
        let k2 = rhs(t + 0.5 * h, xi + 0.5 * h * k1.0, xi_dot + 0.5 * h * k1.1);
        let k3 = rhs(t + 0.5 * h, xi + 0.5 * h * k2.0, xi_dot + 0.5 * h * k2.1);
        let k4 = rhs(t + h, xi + h * k3.0, xi_dot + h * k3.1);
        let d_xi = h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let d_dot = h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        kahan_add(&mut xi, &mut c_xi, d_xi);
        kahan_add(&mut xi_dot, &mut c_dot, d_dot);
        states.push(ClassicalState {
            t: (i + 1) as f64 * h,
            xi,
            xi_dot,
        });
    }
    states
}

fn kahan_add(sum: &mut f64, compensation: &mut f64, value: f64) {
    let y = value - *compensation;
    let t = *sum + y;
    *compensation = (t - *sum) - y;
    *sum = t;
}

/// Classical oracle over the whole transport. `n_steps = None` uses
/// [`default_steps`].
pub fn classical_simulate(
    protocol: &TransportProtocol,
    omega: f64,
    n_steps: Option<usize>,
) -> Result<ClassicalRun> {
    check_frequency(omega)?;
    let tf = protocol.duration();
    let n_steps = n_steps.unwrap_or_else(|| default_steps(omega, tf));
    if n_steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "n_steps must be at least 100, got {n_steps}"
        )));
    }
    let mut warnings = Vec::new();
    let radians_per_step = omega * tf / n_steps as f64;
    if radians_per_step > MAX_RADIANS_PER_STEP {
        warnings.push(emit(Warning::Resolution { radians_per_step }));
    }
    let states = integrate_classical(protocol, omega, tf, n_steps);
    let transient: Vec<(f64, f64)> = states
        .iter()
        .map(|s| (s.t, transient_quanta(protocol, omega, s)))
        .collect();
    let final_quanta = transient.last().map(|&(_, e)| e).unwrap_or(0.0);
    Ok(ClassicalRun {
        omega,
        states,
        transient,
        final_quanta,
        warnings,
    })
}

/// `a = ξ − iξ̇/ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmplitude {
    pub value: Complex64,
    pub omega: f64,
}

impl ComplexAmplitude {
    pub fn from_state(xi: f64, xi_dot: f64, omega: f64) -> Self {
        ComplexAmplitude {
            value: Complex64::new(xi, -xi_dot / omega),
            omega,
        }
    }

    pub fn xi(&self) -> f64 {
        self.value.re
    }

    pub fn xi_dot(&self) -> f64 {
        -self.omega * self.value.im
    }

    /// `½ω²|a|²/ω`, the excitation once the trap is at rest.
    pub fn resting_quanta(&self) -> f64 {
        0.5 * self.omega * self.value.norm_sqr()
    }
}

/// `a(t) = (i/ω) e^{iωt} ∫₀^t ẍ₀(t') e^{-iωt'} dt'`.
pub fn complex_amplitude(
    protocol: &TransportProtocol,
    omega: f64,
    t: f64,
) -> Result<ComplexAmplitude> {
    check_frequency(omega)?;
    let tf = protocol.duration();
    if !(0.0..=tf).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside the transport window [0, {tf}]"
        )));
    }
    let partial = time_fourier(protocol.acceleration_poly(), tf, omega, t);
    let value = Complex64::new(0.0, 1.0 / omega) * Complex64::new(0.0, omega * t).exp() * partial;
    Ok(ComplexAmplitude { value, omega })
}

#[derive(Debug, Clone)]
pub struct LambdaEstimate {
    pub value: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub relative_change: f64,
    pub warnings: Vec<Warning>,
}

/// `Λ(η) = (1/2ω₀η) ∫_{ω₀(1−η)}^{ω₀(1+η)} ΔE(tf; ω)/ħω₀ dω` by composite
/// Gauss–Legendre with `n_quad` nodes per panel, doubling the panel count
/// from 8 until successive estimates agree to [`LAMBDA_TOLERANCE`].
pub fn lambda_metric(
    protocol: &TransportProtocol,
    omega0: f64,
    eta: f64,
    n_quad: usize,
) -> Result<LambdaEstimate> {
    check_frequency(omega0)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    if n_quad < 16 {
        return Err(Error::InvalidArgument(format!(
            "n_quad must be at least 16, got {n_quad}"
        )));
    }
    let rule = GaussLegendre::new(n_quad);
    let (lo, hi) = (omega0 * (1.0 - eta), omega0 * (1.0 + eta));
    let estimate = |panels: usize| -> f64 {
        let integral: f64 = rule.integrate(lo, hi, panels, |w| excitation_energy(protocol, w) / omega0);
        integral / (2.0 * omega0 * eta)
    };

    let mut panels = LAMBDA_START_PANELS;
    let mut previous = estimate(panels);
    loop {
        let next = estimate(2 * panels);
        panels *= 2;
        let scale = next.abs().max(previous.abs());
        let relative_change = if scale == 0.0 {
            0.0
        } else {
            (next - previous).abs() / scale
        };
        if relative_change <= LAMBDA_TOLERANCE || panels >= LAMBDA_MAX_PANELS {
            let mut warnings = Vec::new();
            if relative_change > LAMBDA_TOLERANCE {
                warnings.push(emit(Warning::Accuracy {
                    relative_change,
                    nodes: panels * n_quad,
                }));
            }
            return Ok(LambdaEstimate {
                value: next,
                panels,
                nodes_per_panel: n_quad,
                relative_change,
                warnings,
            });
        }
        previous = next;
    }
}

/// Local exponent of `ΔE ∝ |ω − ω₀|^p` for a coincident protocol, from a
/// least-squares fit of `log ΔE` against `log |ω − ω₀|` with offsets
/// `|ω − ω₀|/ω₀ ∈ [1e-3, 1e-2]` on both sides.
pub fn flatness_order(protocol: &TransportProtocol, omega0: f64) -> Result<f64> {
    check_frequency(omega0)?;
    let coincident = protocol
        .spec()
        .freqs
        .iter()
        .all(|w| (w - omega0).abs() <= 1e-12 * omega0);
    if !coincident {
        return Err(Error::InvalidArgument(format!(
            "flatness order needs every design frequency equal to {omega0}"
        )));
    }
    const SAMPLES: usize = 12;
    let mut xs = Vec::with_capacity(2 * SAMPLES);
    let mut ys = Vec::with_capacity(2 * SAMPLES);
    for i in 0..SAMPLES {
        let offset = 10f64.powf(-3.0 + i as f64 / (SAMPLES - 1) as f64);
        for sign in [-1.0, 1.0] {
            let w = omega0 * (1.0 + sign * offset);
            let e = final_excitation(protocol, w)?;
            if e <= 0.0 {
                return Err(Error::InvalidArgument(
                    "excitation vanishes near the design frequency; nothing to fit".into(),
                ));
            }
            xs.push((offset * omega0).ln());
            ys.push(e.ln());
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
