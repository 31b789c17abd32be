//! Reference datasets: ⁴⁰Ca⁺ transported over d = 30000 a₀, robustness window η = 0.02.

use std::f64::consts::PI;
use std::process::ExitCode;

use anyhow::Result;
use serde_json::{json, Map, Value};

use sta_core::evaluator::classical_simulate;
use sta_core::io;
use sta_core::optimizer::{
    default_epsilon_grid, lambda_for, optimize_epsilon, sweep_epsilon, PatternKind,
};
use sta_core::{build_trajectory, TransportProtocol, TransportSpec};

use crate::args::Figure;
use crate::commands::{Job, Output};

pub const DISTANCE: f64 = 30000.0;
pub const ETA: f64 = 0.02;
const TRANSIENT_STEPS: usize = 20_000;
const TRANSIENT_STRIDE: usize = 10;

/// `ω₀t_f / 2π` of each curve.
const SHORT: f64 = 1.25;
const STRETCHED: f64 = 1.5625;
const LONG: f64 = 2.5;
const REFERENCE: f64 = 5.0;

struct Curve {
    name: &'static str,
    points: usize,
    periods: f64,
}

const FIG1_CURVES: [Curve; 5] = [
    Curve { name: "one_point_tf1.25", points: 1, periods: SHORT },
    Curve { name: "two_point_tf1.25", points: 2, periods: SHORT },
    Curve { name: "three_point_tf1.25", points: 3, periods: SHORT },
    Curve { name: "three_point_tf1.5625", points: 3, periods: STRETCHED },
    Curve { name: "one_point_tf5", points: 1, periods: REFERENCE },
];

fn coincident(curve: &Curve) -> Result<TransportProtocol> {
    let spec = TransportSpec::new(DISTANCE, 2.0 * PI * curve.periods, vec![1.0; curve.points])?;
    Ok(build_trajectory(&spec)?)
}

pub fn reproduce(figure: Figure) -> Result<Job> {
    Ok(Box::new(move |dir| {
        let mut out = Output::create(dir)?;
        let summary = match figure {
            Figure::Fig1a => fig1a(&mut out)?,
            Figure::Fig1b => fig1b(&mut out)?,
            Figure::Fig2 => fig2(&mut out)?,
        };
        out.write_json("summary.json", &summary)?;
        println!("{}", serde_json::to_string_pretty(&summary)?);
        Ok((out, summary, ExitCode::SUCCESS))
    }))
}

fn fig1a(out: &mut Output) -> Result<Value> {
    let mut curves = Map::new();
    for curve in &FIG1_CURVES {
        let p = coincident(curve)?;
        out.write(&format!("{}.csv", curve.name), &io::trajectory_csv(&p, io::TRAJECTORY_SAMPLES)?)?;
        curves.insert(
            curve.name.into(),
            json!({
                "x0_start": p.position(0.0),
                "x0_end_over_d": p.position(p.duration()) / DISTANCE,
                "max_abs_x0_over_d": p.max_abs_position() / DISTANCE,
            }),
        );
    }
    Ok(json!({ "figure": "fig1a", "d": DISTANCE, "curves": curves }))
}

fn fig1b(out: &mut Output) -> Result<Value> {
    let mut curves = Map::new();
    for curve in &FIG1_CURVES {
        let p = coincident(curve)?;
        let run = classical_simulate(&p, 1.0, Some(TRANSIENT_STEPS))?;
        let sampled: Vec<(f64, f64)> = run.transient.iter().copied().step_by(TRANSIENT_STRIDE).collect();
        out.write(&format!("{}.csv", curve.name), &io::transient_csv(&sampled))?;
        curves.insert(
            curve.name.into(),
            json!({ "peak_quanta": run.peak_transient(), "final_quanta": run.final_quanta }),
        );
    }
    Ok(json!({ "figure": "fig1b", "omega": 1.0, "d": DISTANCE, "curves": curves }))
}

const PATTERNS: [PatternKind; 3] = [PatternKind::OnePoint, PatternKind::TwoPoint, PatternKind::ThreePoint];

fn fig2(out: &mut Output) -> Result<Value> {
    let grid = default_epsilon_grid();
    let bracket = (grid[0], grid[grid.len() - 1]);
    let mut sweeps = Map::new();
    let mut optima = Map::new();
    // [short, long] × [1, 2, 3 points]
    let mut lambdas: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut best = [[0.0; 3]; 2];
    for (slot, periods) in [SHORT, LONG].into_iter().enumerate() {
        let base = TransportSpec::new(DISTANCE, 2.0 * PI * periods, vec![1.0])?;
        let mut row = Vec::new();
        for (k, kind) in PATTERNS.into_iter().enumerate() {
            let name = format!("{kind}_tf{periods}");
            let sweep = sweep_epsilon(kind, &base, 1.0, ETA, &grid)?;
            out.write(&format!("{name}.csv"), &io::sweep_csv(&sweep))?;
            sweeps.insert(
                name.clone(),
                json!({ "min_lambda": sweep.min_lambda, "argmin_eps": sweep.argmin_eps }),
            );
            let opt = optimize_epsilon(kind, &base, 1.0, ETA, bracket)?;
            best[slot][k] = opt.lambda_star;
            optima.insert(name, serde_json::to_value(&opt)?);
            row.push(sweep.lambdas);
        }
        lambdas.push(row);
    }
    let longer_below = lambdas[1]
        .iter()
        .flatten()
        .zip(lambdas[0].iter().flatten())
        .all(|(long, short)| long < short);

    let base = TransportSpec::new(DISTANCE, 2.0 * PI * SHORT, vec![1.0])?;
    let three_zero = lambda_for(PatternKind::ThreePoint, &base, 1.0, ETA, 0.0)?;
    let three_003 = lambda_for(PatternKind::ThreePoint, &base, 1.0, ETA, 0.03)?;
    let [one, two, three] = best[0];
    Ok(json!({
        "figure": "fig2",
        "d": DISTANCE,
        "eta": ETA,
        "sweeps": sweeps,
        "optima": optima,
        "lambda_3pt_eps0": three_zero,
        "lambda_3pt_eps003": three_003,
        "ratios": {
            "lambda_1pt_over_lambda_3pt_opt": one / three,
            "lambda_3pt_eps0_over_lambda_3pt_eps003": three_zero / three_003,
            "lambda_1pt_over_lambda_2pt_opt": one / two,
            "lambda_2pt_opt_over_lambda_3pt_opt": two / three,
        },
        "longer_transport_below_everywhere": longer_below,
    }))
}
