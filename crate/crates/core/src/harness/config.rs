//! Flat `key = value` experiment configuration.
//!
//! Keys mirror the command-line flags without their leading dashes
//! (`snr-db`, `min-errors`, ...); underscores are accepted in place of
//! dashes. Lists are comma-separated. Later assignments override earlier
//! ones, which is how command-line overrides are layered over a file.

use super::{check_axis, Diagnostic, HarnessError, ScenarioConfig, SweepAxis, TrialsPolicy};
use crate::channel::{Geometry, NoiseModel, PathLossModel};
use crate::detectors::DetectorKind;
use crate::numerics::DEFAULT_TOL;
use crate::protocol::{Modulation, ProtocolKind};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

const KEYS: [&str; 23] = [
    "protocol",
    "mod",
    "M",
    "K",
    "snr-db",
    "rho",
    "alpha",
    "rate",
    "eta",
    "d0d",
    "d0r",
    "pathloss",
    "exponent",
    "partition-loss-db",
    "detector",
    "tol",
    "trials",
    "min-errors",
    "batch",
    "seed",
    "out",
    "sweep",
    "values",
];

/// Splits configuration text into ordered `(key, value)` pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                n + 1
            ))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(HarnessError::Config(format!("line {}: empty key", n + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// A fully resolved `run` request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: ScenarioConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub out: Option<PathBuf>,
}

fn normalize(key: &str) -> String {
    let k = key.trim().trim_start_matches('-').replace('_', "-");
    match k.as_str() {
        "m" | "alphabet" => "M".into(),
        "k" | "relays" => "K".into(),
        "modulation" => "mod".into(),
        "snr" => "snr-db".into(),
        _ => k,
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse '{value}'")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, HarnessError> {
    value
        .split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number::<f64>(key, s))
        .collect()
}

impl RunSpec {
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, HarnessError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            let key = normalize(k.as_ref());
            if !KEYS.contains(&key.as_str()) {
                return Err(HarnessError::Config(format!(
                    "unknown key '{}'",
                    k.as_ref()
                )));
            }
            map.insert(key, v.as_ref().trim().to_string());
        }
        let get = |k: &str| map.get(k).map(String::as_str);

        let rho = get("rho")
            .map(|v| number::<f64>("rho", v))
            .transpose()?
            .unwrap_or(0.8);
        let alpha = get("alpha")
            .map(|v| number::<f64>("alpha", v))
            .transpose()?
            .unwrap_or(0.4);
        let protocol = match get("protocol").unwrap_or("ps") {
            "ps" => ProtocolKind::PowerSplitting { rho },
            "ts" => ProtocolKind::TimeSwitching { alpha },
            "grid" => ProtocolKind::Grid,
            other => {
                return Err(HarnessError::Config(format!(
                    "protocol: expected ps|ts|grid, got '{other}'"
                )))
            }
        };
        let modulation = match get("mod").unwrap_or("dpsk") {
            "dpsk" => Modulation::Dpsk,
            "fsk" => Modulation::Fsk,
            other => {
                return Err(HarnessError::Config(format!(
                    "mod: expected dpsk|fsk, got '{other}'"
                )))
            }
        };
        let alphabet = get("M")
            .map(|v| number::<usize>("M", v))
            .transpose()?
            .unwrap_or(2);

        let d0d = get("d0d")
            .map(|v| number::<f64>("d0d", v))
            .transpose()?
            .unwrap_or(3.0);
        let k = get("K").map(|v| number::<usize>("K", v)).transpose()?;
        let d0r = match (get("d0r").map(|v| list("d0r", v)).transpose()?, k) {
            (Some(d), Some(k)) if d.len() == 1 && k > 1 => vec![d[0]; k],
            (Some(d), Some(k)) if d.len() != k => {
                return Err(HarnessError::Config(format!(
                    "K = {k} but d0r lists {} distances",
                    d.len()
                )))
            }
            (Some(d), _) => d,
            (None, k) => vec![d0d / 3.0; k.unwrap_or(1)],
        };
        let geometry = Geometry::new(d0d, d0r)?;

        let pathloss = match get("pathloss").unwrap_or("bounded") {
            "bounded" => PathLossModel::Bounded {
                exponent: get("exponent")
                    .map(|v| number("exponent", v))
                    .transpose()?
                    .unwrap_or(4.0),
            },
            "indoor" => PathLossModel::Indoor {
                exponent: get("exponent")
                    .map(|v| number("exponent", v))
                    .transpose()?
                    .unwrap_or(1.6),
                partition_loss_db: get("partition-loss-db")
                    .map(|v| number("partition-loss-db", v))
                    .transpose()?
                    .unwrap_or(3.4),
            },
            other => {
                return Err(HarnessError::Config(format!(
                    "pathloss: expected bounded|indoor, got '{other}'"
                )))
            }
        };

        let tol = get("tol")
            .map(|v| number::<f64>("tol", v))
            .transpose()?
            .unwrap_or(DEFAULT_TOL);
        let detector = match get("detector").unwrap_or("gld") {
            "gld" => DetectorKind::Gld,
            "mld" => DetectorKind::Mld { tol },
            other => {
                return Err(HarnessError::Config(format!(
                    "detector: expected mld|gld, got '{other}'"
                )))
            }
        };

        let defaults = TrialsPolicy::default();
        let max_trials = get("trials")
            .map(|v| number::<u64>("trials", v))
            .transpose()?
            .unwrap_or(defaults.max_trials);
        let trials = TrialsPolicy {
            max_trials,
            min_errors: get("min-errors")
                .map(|v| number("min-errors", v))
                .transpose()?
                .unwrap_or(defaults.min_errors),
            batch: get("batch")
                .map(|v| number("batch", v))
                .transpose()?
                .unwrap_or(defaults.batch.min(max_trials.max(1))),
        };

        let snr_db = get("snr-db")
            .map(|v| list("snr-db", v))
            .transpose()?
            .unwrap_or_else(|| vec![35.0]);
        let scenario = ScenarioConfig {
            protocol,
            modulation,
            alphabet,
            geometry,
            pathloss,
            noise: NoiseModel::default(),
            eta: get("eta")
                .map(|v| number("eta", v))
                .transpose()?
                .unwrap_or(0.6),
            rate: get("rate")
                .map(|v| number("rate", v))
                .transpose()?
                .unwrap_or(1.0),
            snr_db,
            detector,
            trials,
            seed: get("seed")
                .map(|v| number("seed", v))
                .transpose()?
                .unwrap_or(1),
            diagnostic: Diagnostic::Off,
        };
        scenario.validate()?;

        let axis: SweepAxis = get("sweep").unwrap_or("snr").parse()?;
        check_axis(&scenario, axis)?;
        let values = match (axis, get("values")) {
            (_, Some(v)) => list("values", v)?,
            (SweepAxis::Snr, None) => scenario.snr_db.clone(),
            (a, None) => {
                return Err(HarnessError::Config(format!(
                    "sweep = {a} needs a 'values' list"
                )))
            }
        };
        if values.is_empty() {
            return Err(HarnessError::Config("sweep values are empty".into()));
        }
        Ok(RunSpec {
            scenario,
            axis,
            values,
            out: get("out").map(PathBuf::from),
        })
    }
}
