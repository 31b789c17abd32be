//! Protocol files and CSV datasets.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same binary64 value, so every file round-trips bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::designer::{TransportProtocol, TransportSpec};
use crate::error::{Error, Result};
use crate::evaluator::ExcitationCurve;
use crate::optimizer::SweepResult;
use crate::polycalc::Polynomial;
use crate::units::UnitMode;

/// Independent variable of the stored coefficient lists.
pub const TIME_VARIABLE: &str = "u = 2t/tf - 1";

/// Default number of samples in a trajectory CSV.
pub const TRAJECTORY_SAMPLES: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub spec: TransportSpec,
    #[serde(rename = "N")]
    pub points: usize,
    pub delta: f64,
    pub norm: f64,
    pub coeffs_x0: Polynomial,
    pub coeffs_v0: Polynomial,
    pub coeffs_a0: Polynomial,
    pub unit_mode: UnitMode,
    pub time_variable: String,
}

impl From<&TransportProtocol> for ProtocolFile {
    fn from(p: &TransportProtocol) -> Self {
        ProtocolFile {
            spec: p.spec().clone(),
            points: p.points(),
            delta: p.aux().delta(),
            norm: p.aux().norm(),
            coeffs_x0: p.position_poly().clone(),
            coeffs_v0: p.velocity_poly().clone(),
            coeffs_a0: p.acceleration_poly().clone(),
            unit_mode: p.spec().unit_mode,
            time_variable: TIME_VARIABLE.to_string(),
        }
    }
}

impl ProtocolFile {
    pub fn into_protocol(self) -> Result<TransportProtocol> {
        if self.time_variable != TIME_VARIABLE {
            return Err(Error::ProtocolFile(format!(
                "unsupported time variable {:?}, expected {TIME_VARIABLE:?}",
                self.time_variable
            )));
        }
        if self.points != self.spec.freqs.len() {
            return Err(Error::ProtocolFile(format!(
                "N = {} but {} design frequencies listed",
                self.points,
                self.spec.freqs.len()
            )));
        }
        let spec = self.spec.with_unit_mode(self.unit_mode);
        TransportProtocol::from_parts(
            spec,
            self.delta,
            self.norm,
            self.coeffs_x0,
            self.coeffs_v0,
            self.coeffs_a0,
        )
    }
}

pub fn protocol_to_json(protocol: &TransportProtocol) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProtocolFile::from(protocol))?)
}

pub fn protocol_from_json(text: &str) -> Result<TransportProtocol> {
    let file: ProtocolFile = serde_json::from_str(text)?;
    file.into_protocol()
}

pub fn save_protocol(protocol: &TransportProtocol, path: &Path) -> Result<()> {
    fs::write(path, protocol_to_json(protocol)? + "\n")?;
    Ok(())
}

pub fn load_protocol(path: &Path) -> Result<TransportProtocol> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ProtocolFile(format!("{}: {e}", path.display())))?;
    protocol_from_json(&text)
}

/// Shortest round-trip decimal; scientific notation outside `[1e-6, 1e15)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-6..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV text with a header row and one line per row.
pub fn csv_string<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_f64).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn curve_csv(curve: &ExcitationCurve) -> String {
    csv_string(
        &["omega", "delta_e_quanta"],
        curve
            .omegas
            .iter()
            .zip(&curve.energies)
            .map(|(w, e)| vec![*w, *e]),
    )
}

pub fn transient_csv(series: &[(f64, f64)]) -> String {
    csv_string(
        &["t", "delta_e_quanta"],
        series.iter().map(|&(t, e)| vec![t, e]),
    )
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    csv_string(
        &["epsilon", "lambda"],
        sweep
            .epsilons
            .iter()
            .zip(&sweep.lambdas)
            .map(|(e, l)| vec![*e, *l]),
    )
}

/// `t,x0,v0,a0` at `samples` equally spaced times, in SI units when the
/// protocol carries a physical unit mode.
pub fn trajectory_csv(protocol: &TransportProtocol, samples: usize) -> Result<String> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two trajectory samples".into()));
    }
    let mode = protocol.spec().unit_mode;
    let (ts, ls) = (mode.time_scale(), mode.length_scale());
    let tf = protocol.duration();
    Ok(csv_string(
        &["t", "x0", "v0", "a0"],
        (0..samples).map(|i| {
            let t = if i + 1 == samples {
                tf
            } else {
                tf * i as f64 / (samples - 1) as f64
            };
            vec![
                t * ts,
                protocol.position(t) * ls,
                protocol.velocity(t) * ls / ts,
                protocol.acceleration(t) * ls / (ts * ts),
            ]
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::build_trajectory;
    use std::f64::consts::PI;

    fn fig1_three() -> TransportProtocol {
        build_trajectory(&TransportSpec::new(30000.0, 2.0 * PI * 1.25, vec![1.0; 3]).unwrap())
            .unwrap()
    }

    #[test]
    fn protocol_round_trips_exactly() {
        let p = fig1_three();
        let text = protocol_to_json(&p).unwrap();
        let back = protocol_from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(protocol_to_json(&back).unwrap(), text);
    }

    #[test]
    fn physical_mode_survives_the_round_trip() {
        let mode = UnitMode::physical(40.0 * crate::units::AMU, 2.0 * PI * 1.41e6);
        let spec = TransportSpec::new(100.0, 9.0, vec![0.98, 1.02]).unwrap().with_unit_mode(mode);
        let p = build_trajectory(&spec).unwrap();
        let back = protocol_from_json(&protocol_to_json(&p).unwrap()).unwrap();
        assert_eq!(back.spec().unit_mode, mode);
        assert_eq!(back, p);
    }

    #[test]
    fn tampered_files_are_rejected() {
        let p = fig1_three();
        let mut file = ProtocolFile::from(&p);
        file.norm *= 1.001;
        assert!(matches!(file.into_protocol(), Err(Error::ProtocolFile(_))));
        let mut file = ProtocolFile::from(&p);
        file.points = 2;
        assert!(file.into_protocol().is_err());
        let mut file = ProtocolFile::from(&p);
        file.time_variable = "s".into();
        assert!(file.into_protocol().is_err());
        assert!(protocol_from_json("{}").is_err());
    }

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-7, 6.02e23, -2.5e-300, 123456.789, f64::MAX] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(1e-9), "1e-9");
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = fig1_three();
        let text = trajectory_csv(&p, 5).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x0,v0,a0");
        assert_eq!(lines.len(), 6);
        let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert!(first[1].abs() < 1e-9 && first[2].abs() < 1e-9);
        let last: Vec<f64> = lines[5].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(last[0], p.duration());
        assert!((last[1] - 30000.0).abs() < 1e-6);
    }
}
