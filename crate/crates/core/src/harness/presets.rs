//! Desk-scale reproductions of the published figure scenarios.
//!
//! Every preset keeps the published geometry, rate, alphabet and EH
//! parameters but trims SNR grids to a handful of points. Trial budgets follow
//! [`TrialsPolicy::default`], so points whose SER lies far below
//! `min_errors / max_trials` (10⁻⁴ by default) carry few errors.

use super::{emit_csv, sweep_with, HarnessError, ScenarioConfig, SweepAxis};
use crate::channel::{Geometry, PathLossModel};
use crate::protocol::{Modulation, ProtocolKind};
use std::path::{Path, PathBuf};

pub const FIGURE_PRESETS: [&str; 11] = [
    "fig2", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6a", "fig6b", "fig7", "fig8", "fig10",
];

/// One sweep of a figure preset, written to `<preset>_<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetSweep {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

const RHO_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const POSITION_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const MODULATIONS: [Modulation; 2] = [Modulation::Dpsk, Modulation::Fsk];

fn scenario(d0d: f64, d0r: &[f64], alphabet: usize, rate: f64, snr_db: f64) -> ScenarioConfig {
    let mut sc = ScenarioConfig::baseline();
    sc.geometry = Geometry::new(d0d, d0r.to_vec()).expect("preset geometry");
    sc.alphabet = alphabet;
    sc.rate = rate;
    sc.snr_db = vec![snr_db];
    sc
}

fn with(base: &ScenarioConfig, protocol: ProtocolKind, modulation: Modulation) -> ScenarioConfig {
    let mut sc = base.clone();
    sc.protocol = protocol;
    sc.modulation = modulation;
    sc
}

/// ρ and α sweeps for both modulations at a fixed SNR.
fn coefficient_sweeps(base: &ScenarioConfig) -> Vec<PresetSweep> {
    let mut out = Vec::new();
    for modulation in MODULATIONS {
        out.push(PresetSweep {
            name: format!("ps_{modulation}"),
            scenario: with(base, ProtocolKind::PowerSplitting { rho: 0.5 }, modulation),
            axis: SweepAxis::Rho,
            values: RHO_GRID.to_vec(),
        });
        out.push(PresetSweep {
            name: format!("ts_{modulation}"),
            scenario: with(base, ProtocolKind::TimeSwitching { alpha: 0.5 }, modulation),
            axis: SweepAxis::Alpha,
            values: ALPHA_GRID.to_vec(),
        });
    }
    out
}

fn snr_sweeps(
    base: &ScenarioConfig,
    tag: &str,
    protocols: &[ProtocolKind],
    snrs: &[f64],
) -> Vec<PresetSweep> {
    let mut out = Vec::new();
    for &protocol in protocols {
        for modulation in MODULATIONS {
            out.push(PresetSweep {
                name: format!("{}{tag}_{modulation}", protocol.name()),
                scenario: with(base, protocol, modulation),
                axis: SweepAxis::Snr,
                values: snrs.to_vec(),
            });
        }
    }
    out
}

fn position_sweeps(exponent: f64, snr_db: f64) -> Vec<PresetSweep> {
    let mut base = scenario(3.0, &[1.0], 2, 1.0, snr_db);
    base.pathloss = PathLossModel::Bounded { exponent };
    let protocols = [
        ProtocolKind::PowerSplitting { rho: 0.8 },
        ProtocolKind::TimeSwitching { alpha: 0.4 },
    ];
    let mut out = Vec::new();
    for protocol in protocols {
        for modulation in MODULATIONS {
            out.push(PresetSweep {
                name: format!("{}_{modulation}", protocol.name()),
                scenario: with(&base, protocol, modulation),
                axis: SweepAxis::Position,
                values: POSITION_GRID.to_vec(),
            });
        }
    }
    out
}

/// The sweeps that make up `preset`.
pub fn figure_preset(preset: &str) -> Result<Vec<PresetSweep>, HarnessError> {
    let k3 = [0.75, 1.5, 2.25];
    Ok(match preset {
        // The single-relay coefficient study uses the captioned relay
        // position D0r = 2.
        "fig2" => coefficient_sweeps(&scenario(3.0, &[2.0], 2, 1.0, 35.0)),
        "fig3a" => coefficient_sweeps(&scenario(3.0, &[1.0, 1.5], 2, 0.5, 30.0)),
        "fig3b" => coefficient_sweeps(&scenario(3.0, &k3, 2, 1.0, 35.0)),
        "fig4" => snr_sweeps(
            &scenario(3.0, &k3, 2, 1.0, 35.0),
            "",
            &[
                ProtocolKind::PowerSplitting { rho: 0.8 },
                ProtocolKind::TimeSwitching { alpha: 0.55 },
                ProtocolKind::Grid,
            ],
            &[20.0, 23.0, 26.0, 29.0, 32.0, 35.0, 38.0],
        ),
        "fig5a" => position_sweeps(2.7, 26.0),
        "fig5b" => position_sweeps(4.0, 35.0),
        "fig6a" => coefficient_sweeps(&scenario(3.0, &[1.0], 4, 2.0, 38.0)),
        "fig6b" => coefficient_sweeps(&scenario(3.0, &[1.0], 8, 3.0, 40.0)),
        "fig7" | "fig8" => {
            let (one, two) = if preset == "fig7" {
                (
                    ProtocolKind::PowerSplitting { rho: 0.8 },
                    ProtocolKind::PowerSplitting { rho: 0.85 },
                )
            } else {
                (
                    ProtocolKind::TimeSwitching { alpha: 0.4 },
                    ProtocolKind::TimeSwitching { alpha: 0.6 },
                )
            };
            let mut v = snr_sweeps(
                &scenario(3.0, &[2.0], 2, 1.0, 35.0),
                "_k1",
                &[one],
                &[20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0],
            );
            v.extend(snr_sweeps(
                &scenario(3.0, &[1.0, 1.5], 2, 0.5, 30.0),
                "_k2",
                &[two],
                &[15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0],
            ));
            v
        }
        "fig10" => {
            let mut base = scenario(10.0, &[1.0, 1.0, 1.0], 2, 1.0, 35.0);
            base.pathloss = PathLossModel::INDOOR_OFFICE;
            snr_sweeps(
                &base,
                "",
                &[
                    ProtocolKind::PowerSplitting { rho: 0.8 },
                    ProtocolKind::TimeSwitching { alpha: 0.55 },
                ],
                &[20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0],
            )
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                FIGURE_PRESETS.join(", ")
            )))
        }
    })
}

/// Runs every sweep of `preset`, writing one CSV per sweep into `out_dir`.
/// `adjust` may tweak each scenario (trial budget, seed, detector) first.
pub fn run_figure<F, P>(
    preset: &str,
    out_dir: &Path,
    adjust: F,
    mut progress: P,
) -> Result<Vec<PathBuf>, HarnessError>
where
    F: Fn(&mut ScenarioConfig),
    P: FnMut(&str, &super::SweepRow),
{
    let sweeps = figure_preset(preset)?;
    let mut written = Vec::new();
    for mut s in sweeps {
        adjust(&mut s.scenario);
        let rows = sweep_with(&s.scenario, s.axis, &s.values, |row| progress(&s.name, row))?;
        let path = out_dir.join(format!("{preset}_{}.csv", s.name));
        emit_csv(&s.scenario, &rows, &path)?;
        written.push(path);
    }
    Ok(written)
}
