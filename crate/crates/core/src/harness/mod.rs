//! Monte-Carlo SER estimation, parameter sweeps and experiment plumbing.
//!
//! Trials run in fixed-size batches. Batch `i` of point `p` draws from a
//! ChaCha8 stream keyed by the master seed and `(p, i)`, and batches are
//! merged strictly in index order, so results do not depend on how many
//! worker threads execute them.

mod config;
mod output;
mod presets;

pub use config::{parse_config_text, RunSpec};
pub use output::{emit_csv, write_csv, CSV_COLUMNS};
pub use presets::{figure_preset, run_figure, PresetSweep, FIGURE_PRESETS};

use crate::channel::{draw_fading, ChannelError, Geometry, NoiseModel, PathLossModel};
use crate::detectors::{detect, DetectorError, DetectorKind};
use crate::protocol::{
    link_budget, LinkBudget, Modulation, ProtocolConfig, ProtocolError, ProtocolKind,
};
use crate::transceiver::{dpsk_phase, generate_block, TransceiverError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Transceiver(#[from] TransceiverError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("output error: {0}")]
    Output(String),
}

impl HarnessError {
    /// True for problems with the requested experiment rather than its execution.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Channel(_)
                | HarnessError::Protocol(ProtocolError::Parameter(_))
                | HarnessError::Protocol(ProtocolError::RelayCount { .. })
        )
    }
}

/// Monte-Carlo stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialsPolicy {
    pub max_trials: u64,
    pub min_errors: u64,
    pub batch: u64,
}

impl Default for TrialsPolicy {
    fn default() -> Self {
        Self {
            max_trials: 2_000_000,
            min_errors: 200,
            batch: 1_000,
        }
    }
}

impl TrialsPolicy {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.batch == 0 || self.max_trials < self.batch || self.min_errors == 0 {
            return Err(HarnessError::Config(format!(
                "trials policy needs max_trials >= batch >= 1 and min_errors >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Replacements for parts of the simulation chain, used to check the
/// estimator itself.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Diagnostic {
    #[default]
    Off,
    /// Every link SNR set to the given value.
    ClampSnr(f64),
    /// The detector guesses uniformly at random.
    RandomGuess,
    /// Each trial errs independently with the given probability.
    CoinFlip(f64),
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    pub modulation: Modulation,
    pub alphabet: usize,
    pub geometry: Geometry,
    pub pathloss: PathLossModel,
    pub noise: NoiseModel,
    pub eta: f64,
    pub rate: f64,
    pub snr_db: Vec<f64>,
    pub detector: DetectorKind,
    pub trials: TrialsPolicy,
    pub seed: u64,
    pub diagnostic: Diagnostic,
}

impl ScenarioConfig {
    /// Single-relay BDPSK power-splitting scenario with GLD detection; a
    /// starting point for builders and tests.
    pub fn baseline() -> Self {
        Self {
            protocol: ProtocolKind::PowerSplitting { rho: 0.8 },
            modulation: Modulation::Dpsk,
            alphabet: 2,
            geometry: Geometry::new(3.0, vec![1.0]).expect("static geometry"),
            pathloss: PathLossModel::Bounded { exponent: 4.0 },
            noise: NoiseModel::default(),
            eta: 0.6,
            rate: 1.0,
            snr_db: vec![35.0],
            detector: DetectorKind::Gld,
            trials: TrialsPolicy::default(),
            seed: 1,
            diagnostic: Diagnostic::Off,
        }
    }

    pub fn relays(&self) -> usize {
        self.geometry.relays()
    }

    pub fn protocol_config(&self, snr_db: f64) -> ProtocolConfig {
        ProtocolConfig {
            kind: self.protocol,
            eta: self.eta,
            relays: self.relays(),
            alphabet: self.alphabet,
            modulation: self.modulation,
            rate: self.rate,
            p0: 10f64.powf(snr_db / 10.0) * self.noise.total(),
        }
    }

    pub fn link_budget(&self, snr_db: f64) -> Result<LinkBudget, HarnessError> {
        if !snr_db.is_finite() {
            return Err(HarnessError::Config(format!(
                "SNR must be finite, got {snr_db}"
            )));
        }
        Ok(link_budget(
            &self.protocol_config(snr_db),
            &self.geometry,
            &self.pathloss,
            &self.noise,
        )?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(HarnessError::Config(format!(
                "SNR grid must be nonempty and finite, got {:?}",
                self.snr_db
            )));
        }
        self.trials.validate()?;
        self.detector.validate()?;
        match self.diagnostic {
            Diagnostic::ClampSnr(g) if !(g.is_finite() && g > 0.0) => {
                return Err(HarnessError::Config(format!(
                    "clamped SNR must be positive, got {g}"
                )))
            }
            Diagnostic::CoinFlip(p) if !(0.0..=1.0).contains(&p) => {
                return Err(HarnessError::Config(format!(
                    "coin-flip probability must lie in [0, 1], got {p}"
                )))
            }
            _ => {}
        }
        self.protocol_config(self.snr_db[0]).validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical scenario description.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Outcome of one Monte-Carlo point.
#[derive(Debug, Clone, PartialEq)]
pub struct SerEstimate {
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    pub stderr: f64,
    pub seed: u64,
    pub point_id: u64,
    pub wall_time: f64,
}

impl SerEstimate {
    fn new(trials: u64, errors: u64, seed: u64, point_id: u64, wall_time: f64) -> Self {
        let ser = if trials == 0 {
            0.0
        } else {
            errors as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (ser * (1.0 - ser) / trials as f64).sqrt()
        };
        Self {
            trials,
            errors,
            ser,
            stderr,
            seed,
            point_id,
            wall_time,
        }
    }
}

/// The RNG for batch `batch` of point `point_id`.
pub fn batch_rng(seed: u64, point_id: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point_id << 32) ^ batch);
    rng
}

struct TrialPlan<'a> {
    scenario: &'a ScenarioConfig,
    budget: LinkBudget,
}

impl TrialPlan<'_> {
    fn run_batch(&self, point_id: u64, batch: u64, count: u64) -> Result<u64, HarnessError> {
        let sc = self.scenario;
        let alphabet = sc.alphabet;
        let relays = sc.relays();
        let mut rng = batch_rng(sc.seed, point_id, batch);
        let mut errors = 0;
        for _ in 0..count {
            let m = rng.random_range(0..alphabet);
            let decision = match sc.diagnostic {
                Diagnostic::CoinFlip(p) => {
                    errors += u64::from(rng.random::<f64>() < p);
                    continue;
                }
                Diagnostic::RandomGuess => rng.random_range(0..alphabet),
                Diagnostic::Off | Diagnostic::ClampSnr(_) => {
                    let fading = draw_fading(relays, &mut rng);
                    let s_prev = dpsk_phase(rng.random_range(0..alphabet), alphabet);
                    let block = generate_block(m, s_prev, &self.budget, &fading, &mut rng)?;
                    detect(&block, &self.budget, sc.detector)?
                }
            };
            errors += u64::from(decision != m);
        }
        Ok(errors)
    }
}

/// Estimates the SER of `scenario` at one SNR. `point_id` selects the random
/// streams and must differ between points that should be independent.
pub fn estimate_ser(
    scenario: &ScenarioConfig,
    snr_db: f64,
    point_id: u64,
) -> Result<SerEstimate, HarnessError> {
    if point_id >= 1 << 31 {
        return Err(HarnessError::Config(format!(
            "point id {point_id} out of range"
        )));
    }
    scenario.validate()?;
    let start = Instant::now();
    let mut budget = scenario.link_budget(snr_db)?;
    if let Diagnostic::ClampSnr(g) = scenario.diagnostic {
        budget = budget.with_all_snrs(g);
    }
    let plan = TrialPlan { scenario, budget };
    let policy = scenario.trials;
    let batch_size = |i: u64| policy.batch.min(policy.max_trials - i * policy.batch);
    let total_batches = policy.max_trials.div_ceil(policy.batch);
    let wave = (2 * rayon::current_num_threads()).max(1) as u64;

    let (mut trials, mut errors) = (0u64, 0u64);
    let mut next = 0u64;
    'outer: while next < total_batches {
        let end = (next + wave).min(total_batches);
        let results: Vec<Result<u64, HarnessError>> = (next..end)
            .into_par_iter()
            .map(|i| plan.run_batch(point_id, i, batch_size(i)))
            .collect();
        for (i, r) in (next..end).zip(results) {
            errors += r?;
            trials += batch_size(i);
            if errors >= policy.min_errors || trials >= policy.max_trials {
                break 'outer;
            }
        }
        next = end;
    }
    Ok(SerEstimate::new(
        trials,
        errors,
        scenario.seed,
        point_id,
        start.elapsed().as_secs_f64(),
    ))
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Snr,
    Rho,
    Alpha,
    /// Relative relay position `D_0r / D_0d`, applied to every relay.
    Position,
    /// Alphabet size `M`.
    Alphabet,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr",
            SweepAxis::Rho => "rho",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Position => "position",
            SweepAxis::Alphabet => "M",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "snr" => Ok(SweepAxis::Snr),
            "rho" => Ok(SweepAxis::Rho),
            "alpha" => Ok(SweepAxis::Alpha),
            "position" => Ok(SweepAxis::Position),
            "M" | "m" => Ok(SweepAxis::Alphabet),
            other => Err(HarnessError::Config(format!(
                "unknown sweep axis '{other}' (expected snr|rho|alpha|position|M)"
            ))),
        }
    }
}

/// Why a sweep point produced no estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub message: String,
    /// The point itself was invalid (as opposed to failing while running).
    pub usage: bool,
}

impl From<HarnessError> for PointError {
    fn from(e: HarnessError) -> Self {
        Self {
            message: e.to_string(),
            usage: e.is_usage(),
        }
    }
}

impl fmt::Display for PointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// One sweep point: its concrete scenario, SNR and outcome.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scenario: ScenarioConfig,
    pub snr_db: f64,
    pub outcome: Result<SerEstimate, PointError>,
}

fn apply_axis(
    base: &ScenarioConfig,
    axis: SweepAxis,
    value: f64,
) -> Result<ScenarioConfig, HarnessError> {
    let mut sc = base.clone();
    match axis {
        SweepAxis::Snr => sc.snr_db = vec![value],
        SweepAxis::Rho => sc.protocol = ProtocolKind::PowerSplitting { rho: value },
        SweepAxis::Alpha => sc.protocol = ProtocolKind::TimeSwitching { alpha: value },
        SweepAxis::Position => {
            sc.geometry = Geometry::uniform(base.geometry.d_sd(), base.relays(), value)?;
        }
        SweepAxis::Alphabet => {
            if !(value >= 2.0 && value.fract() == 0.0 && value <= 1024.0) {
                return Err(HarnessError::Config(format!(
                    "alphabet size must be an integer >= 2, got {value}"
                )));
            }
            sc.alphabet = value as usize;
        }
    }
    Ok(sc)
}

pub(crate) fn check_axis(base: &ScenarioConfig, axis: SweepAxis) -> Result<(), HarnessError> {
    let ok = match axis {
        SweepAxis::Rho => matches!(base.protocol, ProtocolKind::PowerSplitting { .. }),
        SweepAxis::Alpha => matches!(base.protocol, ProtocolKind::TimeSwitching { .. }),
        SweepAxis::Position => base.relays() > 0,
        SweepAxis::Snr | SweepAxis::Alphabet => true,
    };
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Config(format!(
            "sweep axis {axis} does not apply to a {} scenario with {} relays",
            base.protocol.name(),
            base.relays()
        )))
    }
}

/// Runs one estimate per axis value (and, for non-SNR axes, per SNR in the
/// base grid), calling `on_row` as each row completes. Point errors are
/// recorded in the row and the sweep continues.
pub fn sweep_with<F: FnMut(&SweepRow)>(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    mut on_row: F,
) -> Result<Vec<SweepRow>, HarnessError> {
    check_axis(base, axis)?;
    let mut points = Vec::new();
    for &v in values {
        if axis == SweepAxis::Snr {
            points.push((v, apply_axis(base, axis, v)));
        } else {
            for &snr in &base.snr_db {
                points.push((snr, apply_axis(base, axis, v)));
            }
        }
    }
    let mut rows = Vec::with_capacity(points.len());
    for (id, (snr, sc)) in points.into_iter().enumerate() {
        let row = match sc {
            Ok(mut sc) => {
                sc.snr_db = vec![snr];
                let outcome = estimate_ser(&sc, snr, id as u64).map_err(PointError::from);
                SweepRow {
                    scenario: sc,
                    snr_db: snr,
                    outcome,
                }
            }
            Err(e) => SweepRow {
                scenario: base.clone(),
                snr_db: snr,
                outcome: Err(e.into()),
            },
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    sweep_with(base, axis, values, |_| {})
}
