//! Unit conventions.
//!
//! All computation is dimensionless: time in units of `1/ω_ref`, lengths in
//! units of the harmonic length `a₀ = √(ħ/mω_ref)`, energies in units of
//! `ħω_ref` (so `ħ = m = ω_ref = 1`). Physical mode only rescales values on
//! the way in and out.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitMode {
    #[default]
    Dimensionless,
    Physical {
        /// Particle mass in kg.
        mass: f64,
        /// Reference angular frequency in rad/s.
        omega_ref: f64,
    },
}

impl UnitMode {
    pub fn physical(mass: f64, omega_ref: f64) -> Self {
        UnitMode::Physical { mass, omega_ref }
    }

    /// Harmonic length in meters (1 in dimensionless mode).
    pub fn length_scale(&self) -> f64 {
        match *self {
            UnitMode::Dimensionless => 1.0,
            UnitMode::Physical { mass, omega_ref } => (HBAR / (mass * omega_ref)).sqrt(),
        }
    }

    /// Seconds per unit of dimensionless time.
    pub fn time_scale(&self) -> f64 {
        match *self {
            UnitMode::Dimensionless => 1.0,
            UnitMode::Physical { omega_ref, .. } => 1.0 / omega_ref,
        }
    }

    /// Joules per unit of dimensionless energy (`ħω_ref`).
    pub fn energy_scale(&self) -> f64 {
        match *self {
            UnitMode::Dimensionless => 1.0,
            UnitMode::Physical { omega_ref, .. } => HBAR * omega_ref,
        }
    }

    /// rad/s per unit of dimensionless angular frequency.
    pub fn frequency_scale(&self) -> f64 {
        1.0 / self.time_scale()
    }

    pub fn mass(&self) -> f64 {
        match *self {
            UnitMode::Dimensionless => 1.0,
            UnitMode::Physical { mass, .. } => mass,
        }
    }

    pub fn is_physical(&self) -> bool {
        matches!(self, UnitMode::Physical { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn calcium_harmonic_length() {
        let mode = UnitMode::physical(40.0 * AMU, 2.0 * PI * 1.41e6);
        let a0 = mode.length_scale();
        // 40Ca+ at 1.41 MHz: a0 ≈ 13.4 nm
        assert!((a0 - 13.39e-9).abs() < 0.02e-9, "{a0}");
        // mass * (a0 * omega)^2 == hbar * omega
        let omega = mode.frequency_scale();
        let lhs = mode.mass() * (a0 * omega).powi(2);
        assert!((lhs / mode.energy_scale() - 1.0).abs() < 1e-12);
    }
}
