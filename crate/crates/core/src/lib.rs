//! Design and verification of robust shortcut-to-adiabaticity transport in
//! a moving harmonic trap.
//!
//! * [`designer`] builds N-point trap trajectories whose acceleration
//!   spectrum vanishes at chosen trap frequencies.
//! * [`evaluator`] predicts final and transient excitation, with a classical
//!   RK4 cross-check and the robustness average `Λ(η)`.
//! * [`optimizer`] scans and refines the spacing of the design frequencies.
//! * [`qsim`] propagates the Schrödinger equation on a grid and compares it
//!   with the exact displaced-Gaussian solution.
//!
//! Everything runs in reduced units `ħ = m = ω_ref = 1` (see [`units`]).

pub mod designer;
pub mod error;
pub mod evaluator;
pub mod optimizer;
pub mod fourier;
pub mod io;
pub mod polycalc;
pub mod qsim;
pub mod quadrature;
pub mod units;

pub use designer::{build_trajectory, TransportProtocol, TransportSpec};
pub use error::{Error, Result, Warning};
pub use polycalc::{Polynomial, SymmetricCoefficients};
pub use units::UnitMode;
