use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sta_core::evaluator::{classical_simulate, excitation_curve, lambda_metric};
use sta_core::io;
use sta_core::optimizer::{default_epsilon_grid, optimize_epsilon, sweep_epsilon, PatternKind, QUADRATURE_NODES};
use sta_core::qsim::{desk_scale, verify_protocol, QuantumTolerances};
use sta_core::units::{UnitMode, AMU};
use sta_core::{build_trajectory, TransportSpec};

use crate::args::*;
use crate::figures;

pub const MANIFEST: &str = "manifest.json";

/// Bad flag combination; the process exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(message: impl Into<String>) -> Result<T> {
    Err(Usage(message.into()).into())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name, exactly as given.
    pub argv: Vec<String>,
    /// Parsed parameters including defaults.
    pub resolved: Value,
    pub outputs: Vec<String>,
    pub results: Value,
}

/// Files written by one run, in order.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn finish(mut self, argv: &[String], command: &Command, results: Value) -> Result<()> {
        let manifest = Manifest {
            tool: "sta".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            argv: argv.to_vec(),
            resolved: serde_json::to_value(command)?,
            outputs: std::mem::take(&mut self.files),
            results,
        };
        self.write_json(MANIFEST, &manifest)
    }
}

pub fn run(command: Command, argv: &[String]) -> Result<ExitCode> {
    let (dir, outcome) = match &command {
        Command::Design(a) => (&a.out, design(a)),
        Command::Evaluate(a) => (&a.out, evaluate(a)),
        Command::Sweep(a) => (&a.out, sweep(a)),
        Command::Optimize(a) => (&a.out, optimize(a)),
        Command::Reproduce(a) => (&a.out, figures::reproduce(a.figure)),
        Command::Qverify(a) => (&a.out, qverify(a)),
        Command::Replay(a) => return replay(a),
    };
    let dir = dir.clone();
    let (writer, results, code) = outcome?(&dir)?;
    writer.finish(argv, &command, results)?;
    Ok(code)
}

/// A validated command, deferred until the output directory is known.
pub type Job = Box<dyn FnOnce(&Path) -> Result<(Output, Value, ExitCode)>>;

fn resolve_units(u: &UnitArgs) -> Result<UnitMode> {
    match (u.units, u.mass_amu, u.omega_hz) {
        (Units::Dimensionless, None, None) => Ok(UnitMode::Dimensionless),
        (Units::Dimensionless, _, _) => usage("--mass-amu/--omega-hz require --units physical"),
        (Units::Physical, Some(m), Some(f)) if m > 0.0 && f > 0.0 => {
            Ok(UnitMode::physical(m * AMU, 2.0 * std::f64::consts::PI * f))
        }
        (Units::Physical, Some(_), Some(_)) => usage("--mass-amu and --omega-hz must be positive"),
        (Units::Physical, _, _) => usage("--units physical needs --mass-amu and --omega-hz"),
    }
}

fn design(a: &DesignArgs) -> Result<Job> {
    let mode = resolve_units(&a.units)?;
    if a.samples < 2 {
        return usage("--samples must be at least 2");
    }
    let a = a.clone();
    Ok(Box::new(move |dir| {
        let spec = TransportSpec::new(a.d, a.tf, a.freqs.clone())?.with_unit_mode(mode);
        let protocol = build_trajectory(&spec)?;
        let mut out = Output::create(dir)?;
        out.write("protocol.json", &(io::protocol_to_json(&protocol)? + "\n"))?;
        out.write("trajectory.csv", &io::trajectory_csv(&protocol, a.samples)?)?;
        let results = json!({
            "N": protocol.points(),
            "max_abs_x0_over_d": if a.d == 0.0 { 0.0 } else { protocol.max_abs_position() / a.d.abs() },
            "max_abs_a0": protocol.max_abs_acceleration(),
        });
        println!("designed {}", sta_core::evaluator::protocol_id(&protocol));
        Ok((out, results, ExitCode::SUCCESS))
    }))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn evaluate(a: &EvaluateArgs) -> Result<Job> {
    if !(a.omega_min > 0.0 && a.omega_max > a.omega_min) {
        return usage("need 0 < --omega-min < --omega-max");
    }
    if a.points < 2 {
        return usage("--points must be at least 2");
    }
    let a = a.clone();
    Ok(Box::new(move |dir| {
        let protocol = io::load_protocol(&a.protocol)?;
        let curve = excitation_curve(&protocol, &linspace(a.omega_min, a.omega_max, a.points))?;
        let mut out = Output::create(dir)?;
        out.write("curve.csv", &io::curve_csv(&curve))?;
        let mut results = json!({ "protocol_id": curve.protocol_id });
        if let Some(omega) = a.omega.filter(|_| a.transient) {
            let run = classical_simulate(&protocol, omega, a.steps)?;
            out.write("transient.csv", &io::transient_csv(&run.transient))?;
            results["transient_peak_quanta"] = json!(run.peak_transient());
            results["transient_final_quanta"] = json!(run.final_quanta);
        }
        if let Some(eta) = a.eta {
            let lambda = lambda_metric(&protocol, a.omega0, eta, QUADRATURE_NODES)?;
            println!("Lambda(eta={eta}) = {}", io::format_f64(lambda.value));
            results["lambda"] = json!(lambda.value);
            results["eta"] = json!(eta);
        }
        Ok((out, results, ExitCode::SUCCESS))
    }))
}

pub fn parse_pattern(text: &str) -> Result<PatternKind> {
    Ok(match text {
        "one_point" => PatternKind::OnePoint,
        "two_point" => PatternKind::TwoPoint,
        "three_point" => PatternKind::ThreePoint,
        other => match other.strip_prefix("symmetric_").and_then(|n| n.parse().ok()) {
            Some(n) if n >= 1 => PatternKind::SymmetricN(n),
            _ => return usage(format!("unknown pattern {other:?}")),
        },
    })
}

fn pattern_base(p: &PatternArgs) -> Result<(PatternKind, TransportSpec)> {
    let kind = parse_pattern(&p.pattern)?;
    let base = TransportSpec::new(p.d, p.tf, vec![p.omega0])?;
    Ok((kind, base))
}

fn sweep(a: &SweepArgs) -> Result<Job> {
    let kind = parse_pattern(&a.pattern.pattern)?;
    let grid = a.eps.clone().unwrap_or_else(default_epsilon_grid);
    let a = a.clone();
    Ok(Box::new(move |dir| {
        let (_, base) = pattern_base(&a.pattern)?;
        let p = &a.pattern;
        let result = sweep_epsilon(kind, &base, p.omega0, p.eta, &grid)?;
        let mut out = Output::create(dir)?;
        out.write("sweep.csv", &io::sweep_csv(&result))?;
        println!(
            "{kind}: min Lambda = {} at eps = {}",
            io::format_f64(result.min_lambda),
            io::format_f64(result.argmin_eps)
        );
        let results = json!({ "argmin_eps": result.argmin_eps, "min_lambda": result.min_lambda });
        Ok((out, results, ExitCode::SUCCESS))
    }))
}

fn optimize(a: &OptimizeArgs) -> Result<Job> {
    let kind = parse_pattern(&a.pattern.pattern)?;
    if !(a.eps_min >= 0.0 && a.eps_max > a.eps_min) {
        return usage("need 0 <= --eps-min < --eps-max");
    }
    let a = a.clone();
    Ok(Box::new(move |dir| {
        let (_, base) = pattern_base(&a.pattern)?;
        let p = &a.pattern;
        let result = optimize_epsilon(kind, &base, p.omega0, p.eta, (a.eps_min, a.eps_max))?;
        let mut out = Output::create(dir)?;
        out.write_json("optimize.json", &result)?;
        println!(
            "{kind}: eps* = {}, Lambda* = {}, Lambda(0)/Lambda* = {}",
            io::format_f64(result.eps_star),
            io::format_f64(result.lambda_star),
            io::format_f64(result.ratio)
        );
        Ok((out, serde_json::to_value(&result)?, ExitCode::SUCCESS))
    }))
}

fn qverify(a: &QverifyArgs) -> Result<Job> {
    if !(a.d_scale.is_finite() && a.omega > 0.0 && a.dt > 0.0) {
        return usage("need finite --d-scale and positive --omega, --dt");
    }
    let a = a.clone();
    Ok(Box::new(move |dir| {
        let protocol = desk_scale(&io::load_protocol(&a.protocol)?, a.d_scale)?;
        let report = verify_protocol(&protocol, a.omega, a.n, a.dt)?;
        let failures = report.failures(&QuantumTolerances::default());
        let mut out = Output::create(dir)?;
        out.write_json("qverify.json", &json!({ "report": report, "failures": failures }))?;
        println!(
            "quantum dE = {} quanta, classical dE = {} quanta, fidelity = {}, phase = {} rad",
            io::format_f64(report.delta_e_quanta),
            io::format_f64(report.classical_delta_e_quanta),
            io::format_f64(report.fidelity_vs_analytic),
            io::format_f64(report.overlap_phase)
        );
        for f in &failures {
            eprintln!("tolerance violated: {f}");
        }
        let code = if failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        Ok((out, json!({ "passed": failures.is_empty() }), code))
    }))
}

fn replay(a: &ReplayArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.manifest)
        .with_context(|| format!("reading {}", a.manifest.display()))?;
    let manifest: Manifest = serde_json::from_str(&text).context("parsing manifest")?;
    let mut argv = manifest.argv;
    if let Some(dir) = &a.out {
        replace_out(&mut argv, dir);
    }
    let mut full = vec!["sta".to_string()];
    full.extend(argv.iter().cloned());
    let cli = crate::args::Cli::try_parse_from(&full)
        .map_err(|e| Usage(format!("manifest arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return usage("a manifest cannot replay another replay");
    }
    run(cli.command, &argv)
}

fn replace_out(argv: &mut Vec<String>, dir: &Path) {
    let dir = dir.display().to_string();
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == "--out" && i + 1 < argv.len() {
            argv[i + 1] = dir.clone();
            return;
        }
        if argv[i].starts_with("--out=") {
            argv[i] = format!("--out={dir}");
            return;
        }
        i += 1;
    }
    argv.push("--out".into());
    argv.push(dir);
}
