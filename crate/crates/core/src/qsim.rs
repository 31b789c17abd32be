//! Split-operator solution of the Schrödinger equation in the moving trap
//! `V(x, t) = ½ω²(x − x₀(t))²`, and the closed-form comparison state.
//!
//! The grid is periodic; the kinetic factor is applied spectrally. Each step
//! is `e^{−iVh/2} e^{−iTh} e^{−iVh/2}` with the trap sampled at the step
//! midpoint.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::designer::{build_trajectory, TransportProtocol};
use crate::error::{Error, Result};
use crate::evaluator::{default_steps, final_excitation, integrate_classical};

pub const MIN_POINTS: usize = 512;
/// Edge-to-peak amplitude ratio above which the grid is reported too small.
pub const EDGE_TOLERANCE: f64 = 1e-8;
/// Padding beyond the swept region, in harmonic lengths of the probed trap.
pub const GRID_MARGIN: f64 = 10.0;
/// Largest accepted `ω·dt`.
pub const MAX_PHASE_STEP: f64 = 0.02;
/// Steps between edge-leak checks during propagation.
const LEAK_CHECK_INTERVAL: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    /// Periodic grid of `n_points` cells on `[x_min, x_max)`.
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two of at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidArgument(format!(
                "invalid grid range [{x_min}, {x_max}]"
            )));
        }
        Ok(SpatialGrid {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid spanning the trap sweep and the classical excursion of the
    /// packet at `omega`, padded by [`GRID_MARGIN`] harmonic lengths.
    pub fn for_protocol(protocol: &TransportProtocol, omega: f64, n_points: usize) -> Result<Self> {
        check_omega(omega)?;
        let tf = protocol.duration();
        let states = integrate_classical(protocol, omega, tf, default_steps(omega, tf));
        let (mut lo, mut hi) = (0.0f64, protocol.distance().max(0.0));
        for s in &states {
            let x0 = protocol.position(s.t);
            lo = lo.min(x0).min(x0 + s.xi);
            hi = hi.max(x0).max(x0 + s.xi);
        }
        let margin = GRID_MARGIN / omega.sqrt();
        SpatialGrid::new(lo - margin, hi + margin, n_points)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|i| self.x_min + i as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        (0..n)
            .map(|i| {
                let j = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                j * dk
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub psi: Vec<Complex64>,
    pub t: f64,
    pub dx: f64,
}

impl WaveFunction {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &WaveFunction) -> Complex64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.dx
    }

    fn edge_ratio(&self) -> f64 {
        let peak = self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = self.psi.len();
        let edge = self.psi[0].norm().max(self.psi[n - 1].norm());
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "trap frequency must be positive, got {omega}"
        )))
    }
}

/// Level-`n` eigenstate of the static trap `½ω²(x − center)²`, sampled on the
/// grid and normalized on it.
pub fn eigenstate(grid: &SpatialGrid, omega: f64, center: f64, level: usize) -> Result<WaveFunction> {
    check_omega(omega)?;
    let a0 = 1.0 / omega.sqrt();
    if a0 < 4.0 * grid.dx() {
        return Err(Error::Resolution(format!(
            "grid spacing {} too coarse for harmonic length {a0}",
            grid.dx()
        )));
    }
    let psi: Vec<Complex64> = grid
        .positions()
        .into_iter()
        .map(|x| Complex64::new(hermite_function(level, (x - center) / a0), 0.0))
        .collect();
    let mut wf = WaveFunction {
        psi,
        t: 0.0,
        dx: grid.dx(),
    };
    let scale = 1.0 / wf.norm().sqrt();
    wf.psi.iter_mut().for_each(|z| *z *= scale);
    Ok(wf)
}

/// Normalized Hermite function `H_n(y) e^{−y²/2} / √(2ⁿ n! √π)` by the
/// stable three-term recurrence.
fn hermite_function(level: usize, y: f64) -> f64 {
    let mut prev = PI.powf(-0.25) * (-0.5 * y * y).exp();
    if level == 0 {
        return prev;
    }
    let mut cur = 2f64.sqrt() * y * prev;
    for k in 1..level {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * y * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Initial state: ground state of the trap at `x₀(0) = 0`.
pub fn ground_state(grid: &SpatialGrid, omega: f64) -> Result<WaveFunction> {
    eigenstate(grid, omega, 0.0, 0)
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// `⟨H₀⟩/ħω` for the trap centred at `x0`; the kinetic term is taken in
/// momentum space.
pub fn energy_expectation(psi: &WaveFunction, grid: &SpatialGrid, omega: f64, x0: f64) -> f64 {
    let n = grid.n_points;
    let mut spectrum = psi.psi.clone();
    Spectral::new(n).forward.process(&mut spectrum);
    let norm = psi.norm();
    let kinetic: f64 = spectrum
        .iter()
        .zip(grid.wavenumbers())
        .map(|(z, k)| 0.5 * k * k * z.norm_sqr())
        .sum::<f64>()
        * psi.dx
        / n as f64;
    let potential: f64 = psi
        .psi
        .iter()
        .zip(grid.positions())
        .map(|(z, x)| 0.5 * omega * omega * (x - x0) * (x - x0) * z.norm_sqr())
        .sum::<f64>()
        * psi.dx;
    (kinetic + potential) / norm / omega
}

/// [`propagate_with`] without observation.
pub fn propagate(
    protocol: &TransportProtocol,
    grid: &SpatialGrid,
    omega: f64,
    dt: f64,
) -> Result<WaveFunction> {
    propagate_with(protocol, grid, omega, dt, 0, |_| {})
}

/// Propagates the ground state over `[0, tf]` with steps no longer than
/// `dt`. When `every > 0`, `observe` sees the state after every `every`-th
/// step (and the final one).
pub fn propagate_with<F>(
    protocol: &TransportProtocol,
    grid: &SpatialGrid,
    omega: f64,
    dt: f64,
    every: usize,
    mut observe: F,
) -> Result<WaveFunction>
where
    F: FnMut(&WaveFunction),
{
    check_omega(omega)?;
    if !(dt > 0.0 && omega * dt <= MAX_PHASE_STEP) {
        return Err(Error::InvalidArgument(format!(
            "time step {dt} must be positive and at most {MAX_PHASE_STEP}/omega"
        )));
    }
    let tf = protocol.duration();
    let steps = (tf / dt).ceil() as usize;
    let h = tf / steps as f64;
    let n = grid.n_points;
    let xs = grid.positions();
    let kinetic: Vec<Complex64> = grid
        .wavenumbers()
        .into_iter()
        .map(|k| Complex64::new(0.0, -0.5 * k * k * h).exp() / n as f64)
        .collect();
    let fft = Spectral::new(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.forward.get_inplace_scratch_len()];
    let mut half_potential = vec![Complex64::new(0.0, 0.0); n];

    let mut wf = ground_state(grid, omega)?;
    for step in 0..steps {
        let center = protocol.position((step as f64 + 0.5) * h);
        for (v, x) in half_potential.iter_mut().zip(&xs) {
            let dx = x - center;
            *v = Complex64::new(0.0, -0.25 * omega * omega * dx * dx * h).exp();
        }
        wf.psi.iter_mut().zip(&half_potential).for_each(|(z, v)| *z *= v);
        fft.forward.process_with_scratch(&mut wf.psi, &mut scratch);
        wf.psi.iter_mut().zip(&kinetic).for_each(|(z, k)| *z *= k);
        fft.inverse.process_with_scratch(&mut wf.psi, &mut scratch);
        wf.psi.iter_mut().zip(&half_potential).for_each(|(z, v)| *z *= v);
        wf.t = (step + 1) as f64 * h;

        let last = step + 1 == steps;
        if last || (step + 1) % LEAK_CHECK_INTERVAL == 0 {
            let ratio = wf.edge_ratio();
            if ratio > EDGE_TOLERANCE {
                return Err(Error::BoundaryLeak { ratio });
            }
        }
        if every > 0 && ((step + 1) % every == 0 || last) {
            observe(&wf);
        }
    }
    Ok(wf)
}

/// Closed-form state at time `t` for an initial ground state: the static
/// eigenstate displaced to the classical centre `x_c`, boosted by `ẋ_c`, and
/// carrying the accumulated Lagrangian phase `∫ (½ẋ_c² − ½ω²(x_c − x₀)²)`.
/// The classical path comes from the RK4 integrator; the phase integral uses
/// Simpson's rule on the same nodes.
pub fn analytic_solution(
    protocol: &TransportProtocol,
    grid: &SpatialGrid,
    omega: f64,
    t: f64,
) -> Result<WaveFunction> {
    check_omega(omega)?;
    let tf = protocol.duration();
    if !(0.0..=tf).contains(&t) {
        return Err(Error::InvalidArgument(format!("time {t} outside [0, {tf}]")));
    }
    let ground = ground_state(grid, omega)?;
    if t == 0.0 {
        return Ok(ground);
    }
    let full = default_steps(omega, tf) as f64;
    let mut steps = ((full * t / tf).ceil() as usize).max(2000);
    steps += steps % 2;
    let states = integrate_classical(protocol, omega, t, steps);

    let lagrangian: Vec<f64> = states
        .iter()
        .map(|s| {
            let v_c = s.xi_dot + protocol.velocity(s.t);
            0.5 * v_c * v_c - 0.5 * omega * omega * s.xi * s.xi
        })
        .collect();
    let h = t / steps as f64;
    let interior: f64 = lagrangian[1..steps]
        .iter()
        .enumerate()
        .map(|(i, l)| if i % 2 == 0 { 4.0 * l } else { 2.0 * l })
        .sum();
    let action = h / 3.0 * (lagrangian[0] + interior + lagrangian[steps]);

    let last = states[steps];
    let x_c = protocol.position(t) + last.xi;
    let v_c = protocol.velocity(t) + last.xi_dot;
    let a0 = 1.0 / omega.sqrt();
    let dx = grid.dx();
    let psi = grid
        .positions()
        .into_iter()
        .map(|x| {
            let rel = x - x_c;
            let phase = v_c * rel + action - 0.5 * omega * t;
            Complex64::from_polar(hermite_function(0, rel / a0) / a0.sqrt(), phase)
        })
        .collect();
    Ok(WaveFunction { psi, t, dx })
}

/// Copy of `protocol` rescaled to distance `d`; the excitation scales as `d²`.
pub fn desk_scale(protocol: &TransportProtocol, distance: f64) -> Result<TransportProtocol> {
    build_trajectory(&protocol.spec().with_distance(distance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub omega: f64,
    pub tf: f64,
    pub d: f64,
    pub n_points: usize,
    pub dt: f64,
    pub final_energy_quanta: f64,
    pub delta_e_quanta: f64,
    /// Fourier prediction `ΔE/ħω` for the same protocol.
    pub classical_delta_e_quanta: f64,
    pub fidelity_vs_analytic: f64,
    /// Argument of `⟨ψ_analytic|ψ_numeric⟩`, radians.
    pub overlap_phase: f64,
    pub norm_drift: f64,
}

/// Tolerances for [`QuantumReport::failures`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumTolerances {
    /// Absolute bound on `ΔE` when the classical prediction is below it.
    pub absolute: f64,
    pub relative: f64,
    pub fidelity: f64,
    pub phase: f64,
    pub norm: f64,
}

impl Default for QuantumTolerances {
    fn default() -> Self {
        QuantumTolerances {
            absolute: 1e-4,
            relative: 1e-3,
            fidelity: 1e-5,
            phase: 1e-3,
            norm: 1e-10,
        }
    }
}

impl QuantumReport {
    /// Human-readable list of violated tolerances; empty when all hold.
    pub fn failures(&self, tol: &QuantumTolerances) -> Vec<String> {
        let mut out = Vec::new();
        let classical = self.classical_delta_e_quanta;
        if classical <= tol.absolute {
            if self.delta_e_quanta.abs() > tol.absolute {
                out.push(format!(
                    "excitation {} exceeds {} quanta",
                    self.delta_e_quanta, tol.absolute
                ));
            }
        } else {
            let rel = (self.delta_e_quanta - classical).abs() / classical;
            if rel > tol.relative {
                out.push(format!(
                    "quantum/classical excitation differ by {rel:e} relative"
                ));
            }
        }
        if 1.0 - self.fidelity_vs_analytic > tol.fidelity {
            out.push(format!("fidelity {} below 1 - {}", self.fidelity_vs_analytic, tol.fidelity));
        }
        if self.overlap_phase.abs() > tol.phase {
            out.push(format!("overlap phase {} rad", self.overlap_phase));
        }
        if self.norm_drift > tol.norm {
            out.push(format!("norm drift {:e}", self.norm_drift));
        }
        out
    }
}

/// Full quantum check of `protocol` at trap frequency `omega`.
pub fn verify_protocol(
    protocol: &TransportProtocol,
    omega: f64,
    n_points: usize,
    dt: f64,
) -> Result<QuantumReport> {
    let grid = SpatialGrid::for_protocol(protocol, omega, n_points)?;
    let numeric = propagate(protocol, &grid, omega, dt)?;
    let tf = protocol.duration();
    let analytic = analytic_solution(protocol, &grid, omega, tf)?;
    let overlap = analytic.overlap(&numeric);
    let energy = energy_expectation(&numeric, &grid, omega, protocol.position(tf));
    Ok(QuantumReport {
        omega,
        tf,
        d: protocol.distance(),
        n_points,
        dt,
        final_energy_quanta: energy,
        delta_e_quanta: energy - 0.5,
        classical_delta_e_quanta: final_excitation(protocol, omega)?,
        fidelity_vs_analytic: overlap.norm(),
        overlap_phase: overlap.arg(),
        norm_drift: (numeric.norm() - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::TransportSpec;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-20.0, 20.0, 1024).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(-1.0, 1.0, 1000).is_err());
        assert!(SpatialGrid::new(-1.0, 1.0, 256).is_err());
        assert!(SpatialGrid::new(1.0, -1.0, 512).is_err());
        let g = SpatialGrid::new(-1.0, 1.0, 512).unwrap();
        assert_eq!(g.positions()[256], 0.0);
        assert_eq!(g.wavenumbers()[1], PI);
    }

    #[test]
    fn ground_state_moments() {
        let g = grid();
        let psi = ground_state(&g, 1.0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-14);
        let mean_x: f64 = psi
            .psi
            .iter()
            .zip(g.positions())
            .map(|(z, x)| x * z.norm_sqr())
            .sum::<f64>()
            * psi.dx;
        assert!(mean_x.abs() < 1e-14);
        assert!((energy_expectation(&psi, &g, 1.0, 0.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let g = SpatialGrid::new(-2000.0, 2000.0, 512).unwrap();
        assert!(matches!(ground_state(&g, 1.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn excited_and_displaced_energies() {
        let g = grid();
        for omega in [1.0, 2.3] {
            let first = eigenstate(&g, omega, 0.0, 1).unwrap();
            assert!((energy_expectation(&first, &g, omega, 0.0) - 1.5).abs() < 1e-8);
            // displaced by δ (in harmonic lengths): 0.5 + δ²/2
            let a0 = 1.0 / omega.sqrt();
            let delta = 1.7;
            let shifted = ground_state(&g, omega).unwrap();
            let e = energy_expectation(&shifted, &g, omega, delta * a0);
            assert!((e - (0.5 + 0.5 * delta * delta)).abs() < 1e-8, "{e}");
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let g = grid();
        let states: Vec<_> = (0..6).map(|n| eigenstate(&g, 1.0, 0.3, n).unwrap()).collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.overlap(b).re - want).abs() < 1e-12);
            }
            let e = energy_expectation(a, &g, 1.0, 0.3);
            assert!((e - (i as f64 + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn stationary_trap_only_rotates_the_phase() {
        let spec = TransportSpec::new(0.0, 6.0, vec![1.0]).unwrap();
        let p = build_trajectory(&spec).unwrap();
        let g = grid();
        let out = propagate(&p, &g, 1.0, 0.01).unwrap();
        let ground = ground_state(&g, 1.0).unwrap();
        let overlap = ground.overlap(&out);
        assert!(overlap.norm() >= 1.0 - 1e-10);
        // the splitting error shows up as a phase lag, second order in dt
        let lag = |dt: f64| {
            let out = propagate(&p, &g, 1.0, dt).unwrap();
            let arg = ground.overlap(&out).arg() + 3.0;
            (arg + PI).rem_euclid(2.0 * PI) - PI
        };
        let (coarse, fine) = (lag(0.01), lag(0.005));
        assert!(coarse.abs() < 1e-4, "{coarse}");
        assert!((coarse / fine - 4.0).abs() < 0.05, "{coarse} {fine}");
        let analytic = analytic_solution(&p, &g, 1.0, 6.0).unwrap();
        assert!(analytic.overlap(&out).norm() >= 1.0 - 1e-10);
    }

    #[test]
    fn analytic_solution_at_start_is_ground_state() {
        let spec = TransportSpec::new(5.0, 8.0, vec![1.0]).unwrap();
        let p = build_trajectory(&spec).unwrap();
        let g = SpatialGrid::for_protocol(&p, 1.0, 1024).unwrap();
        assert_eq!(analytic_solution(&p, &g, 1.0, 0.0).unwrap(), ground_state(&g, 1.0).unwrap());
    }

    #[test]
    fn auto_grid_covers_the_sweep() {
        let spec = TransportSpec::new(20.0, 2.0 * PI * 1.25, vec![1.0; 3]).unwrap();
        let p = build_trajectory(&spec).unwrap();
        let g = SpatialGrid::for_protocol(&p, 1.0, 4096).unwrap();
        assert!(g.x_min <= -8.0 && g.x_max >= 28.0);
    }

    #[test]
    fn small_time_step_is_enforced() {
        let spec = TransportSpec::new(1.0, 6.0, vec![1.0]).unwrap();
        let p = build_trajectory(&spec).unwrap();
        assert!(propagate(&p, &grid(), 2.0, 0.011).is_err());
    }

    #[test]
    fn undersized_grid_reports_leak() {
        let spec = TransportSpec::new(30.0, 8.0, vec![1.0]).unwrap();
        let p = build_trajectory(&spec).unwrap();
        let g = SpatialGrid::new(-8.0, 8.0, 512).unwrap();
        assert!(matches!(propagate(&p, &g, 1.0, 0.01), Err(Error::BoundaryLeak { .. })));
    }

    #[test]
    fn report_tolerance_logic() {
        let mut r = QuantumReport {
            omega: 1.0,
            tf: 1.0,
            d: 1.0,
            n_points: 512,
            dt: 0.01,
            final_energy_quanta: 0.5,
            delta_e_quanta: 1e-6,
            classical_delta_e_quanta: 0.0,
            fidelity_vs_analytic: 1.0,
            overlap_phase: 0.0,
            norm_drift: 0.0,
        };
        let tol = QuantumTolerances::default();
        assert!(r.failures(&tol).is_empty());
        r.classical_delta_e_quanta = 1.0;
        r.delta_e_quanta = 1.01;
        assert_eq!(r.failures(&tol).len(), 1);
    }
}
