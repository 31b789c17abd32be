//! Placement of the design frequencies around a nominal `ω₀`.
//!
//! Patterns spread `N` frequencies symmetrically over `[ω₀(1−ε), ω₀(1+ε)]`;
//! the search is one-dimensional in the spacing `ε` and scores each
//! placement with the robustness average `Λ(η)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designer::{build_trajectory, TransportSpec};
use crate::error::{emit, Error, Result, Warning};
use crate::evaluator::lambda_metric;

/// Gauss–Legendre nodes per panel used when scoring a placement.
pub const QUADRATURE_NODES: usize = 16;
/// Largest spacing accepted by sweeps and brackets.
pub const MAX_EPSILON: f64 = 0.2;
/// Points in the coarse scan preceding golden-section refinement.
pub const COARSE_POINTS: usize = 33;
/// Width of the final golden-section interval.
pub const EPSILON_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    OnePoint,
    TwoPoint,
    ThreePoint,
    /// `N` frequencies equally spaced over `[ω₀(1−ε), ω₀(1+ε)]`.
    SymmetricN(usize),
}

impl PatternKind {
    pub fn points(&self) -> usize {
        match *self {
            PatternKind::OnePoint => 1,
            PatternKind::TwoPoint => 2,
            PatternKind::ThreePoint => 3,
            PatternKind::SymmetricN(n) => n,
        }
    }

    /// Relative offsets `(ω_k − ω₀)/ω₀`, paired so that entry `k` is exactly
    /// the negative of entry `N−1−k`.
    pub fn offsets(&self, epsilon: f64) -> Vec<f64> {
        let n = self.points();
        if n == 1 {
            return vec![0.0];
        }
        let span = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let step = 2 * k as i64 - (n as i64 - 1);
                epsilon * step as f64 / span
            })
            .collect()
    }

    pub fn frequencies(&self, omega0: f64, epsilon: f64) -> Result<Vec<f64>> {
        PlacementPattern::new(*self, epsilon)?.frequencies(omega0)
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::OnePoint => f.write_str("one_point"),
            PatternKind::TwoPoint => f.write_str("two_point"),
            PatternKind::ThreePoint => f.write_str("three_point"),
            PatternKind::SymmetricN(n) => write!(f, "symmetric_{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementPattern {
    pub kind: PatternKind,
    pub epsilon: f64,
}

impl PlacementPattern {
    pub fn new(kind: PatternKind, epsilon: f64) -> Result<Self> {
        if kind.points() == 0 {
            return Err(Error::InvalidArgument("a pattern needs at least one point".into()));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        Ok(PlacementPattern { kind, epsilon })
    }

    pub fn frequencies(&self, omega0: f64) -> Result<Vec<f64>> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        Ok(self
            .kind
            .offsets(self.epsilon)
            .into_iter()
            .map(|o| omega0 * (1.0 + o))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub argmin_eps: f64,
    pub min_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub pattern: PatternKind,
    pub eps_star: f64,
    pub lambda_star: f64,
    pub lambda_at_zero: f64,
    /// `Λ(0)/Λ(ε*)`; 1 when both vanish.
    pub ratio: f64,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

/// `0, 0.0025, …, 0.08`.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..=32).map(|i| i as f64 / 400.0).collect()
}

/// `Λ(η)` of the protocol designed for `kind` at spacing `epsilon`.
pub fn lambda_for(
    kind: PatternKind,
    base: &TransportSpec,
    omega0: f64,
    eta: f64,
    epsilon: f64,
) -> Result<f64> {
    let evaluate = || -> Result<f64> {
        let freqs = kind.frequencies(omega0, epsilon)?;
        let protocol = build_trajectory(&base.with_freqs(freqs))?;
        Ok(lambda_metric(&protocol, omega0, eta, QUADRATURE_NODES)?.value)
    };
    evaluate().map_err(|source| Error::AtEpsilon {
        epsilon,
        source: Box::new(source),
    })
}

pub fn sweep_epsilon(
    kind: PatternKind,
    base: &TransportSpec,
    omega0: f64,
    eta: f64,
    grid: &[f64],
) -> Result<SweepResult> {
    validate_grid(grid)?;
    let lambdas = grid
        .par_iter()
        .map(|&eps| lambda_for(kind, base, omega0, eta, eps))
        .collect::<Result<Vec<_>>>()?;
    let (index, min_lambda) = argmin(&lambdas);
    Ok(SweepResult {
        epsilons: grid.to_vec(),
        argmin_eps: grid[index],
        min_lambda,
        lambdas,
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("epsilon grid is empty".into()));
    }
    if let Some(eps) = grid.iter().find(|e| !(0.0..=MAX_EPSILON).contains(*e)) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {eps} outside [0, {MAX_EPSILON}]"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("epsilon grid must be strictly ascending".into()));
    }
    Ok(())
}

/// First index of the smallest value.
fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

/// [`optimize_epsilon_with`] using [`COARSE_POINTS`].
pub fn optimize_epsilon(
    kind: PatternKind,
    base: &TransportSpec,
    omega0: f64,
    eta: f64,
    bracket: (f64, f64),
) -> Result<OptimizeResult> {
    optimize_epsilon_with(kind, base, omega0, eta, bracket, COARSE_POINTS)
}

/// Coarse scan of `bracket`, then golden-section refinement inside the
/// neighbouring grid cells of the scan minimum.
pub fn optimize_epsilon_with(
    kind: PatternKind,
    base: &TransportSpec,
    omega0: f64,
    eta: f64,
    bracket: (f64, f64),
    coarse_points: usize,
) -> Result<OptimizeResult> {
    let (lo, hi) = bracket;
    if !(0.0 <= lo && lo < hi && hi <= MAX_EPSILON) {
        return Err(Error::InvalidArgument(format!(
            "bracket [{lo}, {hi}] must satisfy 0 <= lo < hi <= {MAX_EPSILON}"
        )));
    }
    if coarse_points < 3 {
        return Err(Error::InvalidArgument("coarse scan needs at least 3 points".into()));
    }
    let lambda_at_zero = lambda_for(kind, base, omega0, eta, 0.0)?;
    let finish = |eps_star: f64, lambda_star: f64, warnings: Vec<Warning>| OptimizeResult {
        pattern: kind,
        eps_star,
        lambda_star,
        lambda_at_zero,
        ratio: if lambda_star == 0.0 && lambda_at_zero == 0.0 {
            1.0
        } else {
            lambda_at_zero / lambda_star
        },
        warnings,
    };
    // Nothing to place, or nothing to excite.
    if kind.points() == 1 || base.distance == 0.0 {
        let value = lambda_for(kind, base, omega0, eta, lo)?;
        return Ok(finish(lo, value, Vec::new()));
    }

    let grid: Vec<f64> = (0..coarse_points)
        .map(|i| lo + (hi - lo) * i as f64 / (coarse_points - 1) as f64)
        .collect();
    let coarse = sweep_epsilon(kind, base, omega0, eta, &grid)?;
    let (index, _) = argmin(&coarse.lambdas);
    let mut warnings = Vec::new();
    if index == 0 || index == coarse_points - 1 {
        warnings.push(emit(Warning::Boundary {
            epsilon: grid[index],
        }));
    }

    let a = grid[index.saturating_sub(1)];
    let b = grid[(index + 1).min(coarse_points - 1)];
    let objective = |eps: f64| lambda_for(kind, base, omega0, eta, eps);
    let (eps_refined, lambda_refined) = golden_section(objective, a, b, EPSILON_TOLERANCE)?;
    let (eps_star, lambda_star) = if lambda_refined < coarse.min_lambda {
        (eps_refined, lambda_refined)
    } else {
        (coarse.argmin_eps, coarse.min_lambda)
    };
    Ok(finish(eps_star, lambda_star, warnings))
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns the best point evaluated.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
