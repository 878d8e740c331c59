//! Energy-harvesting relaying protocols and their unified link budget.
//!
//! Power splitting (PS) routes a fraction `ρ` of the relay's received power to
//! the harvester during the source sub-block; time switching (TS) spends a
//! fraction `α` of the block harvesting before any data moves. The grid-powered
//! baseline gives the source and every relay a fixed `P₀/(K+1)`.
//!
//! Internally the total per-node noise is normalized to `σ₀² = 1`, so the
//! source power `p0` is the linear SNR.

use crate::channel::{ChannelError, Geometry, NoiseModel, PathLossModel};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid protocol parameter: {0}")]
    Parameter(String),
    #[error("configuration has {config} relays but geometry has {geometry}")]
    RelayCount { config: usize, geometry: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Dpsk,
    Fsk,
}

impl Modulation {
    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Dpsk => "dpsk",
            Modulation::Fsk => "fsk",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolKind {
    PowerSplitting { rho: f64 },
    TimeSwitching { alpha: f64 },
    Grid,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::PowerSplitting { .. } => "ps",
            ProtocolKind::TimeSwitching { .. } => "ts",
            ProtocolKind::Grid => "grid",
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            ProtocolKind::PowerSplitting { rho } => Some(rho),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ProtocolKind::TimeSwitching { alpha } => Some(alpha),
            _ => None,
        }
    }
}

/// Everything the link budget needs besides geometry and noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Energy conversion efficiency `η`.
    pub eta: f64,
    /// Number of relays `K`.
    pub relays: usize,
    /// Alphabet size `M`.
    pub alphabet: usize,
    pub modulation: Modulation,
    /// Information rate `R` (bits per unit block time).
    pub rate: f64,
    /// Source power `P₀` in units of the per-node noise variance.
    pub p0: f64,
}

fn open_unit(name: &str, v: f64) -> Result<(), ProtocolError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ProtocolError::Parameter(format!(
            "{name} must lie in the open interval (0, 1), got {v}"
        )))
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self.kind {
            ProtocolKind::PowerSplitting { rho } => open_unit("rho", rho)?,
            ProtocolKind::TimeSwitching { alpha } => open_unit("alpha", alpha)?,
            ProtocolKind::Grid => {}
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ProtocolError::Parameter(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.alphabet < 2 || !self.alphabet.is_power_of_two() {
            return Err(ProtocolError::Parameter(format!(
                "alphabet size must be a power of two >= 2, got {}",
                self.alphabet
            )));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(ProtocolError::Parameter(format!(
                "rate must be positive and finite, got {}",
                self.rate
            )));
        }
        if !(self.p0.is_finite() && self.p0 > 0.0) {
            return Err(ProtocolError::Parameter(format!(
                "source power must be positive and finite, got {}",
                self.p0
            )));
        }
        Ok(())
    }

    /// `ξ`: 1 for DPSK (per-symbol gain normalization), `M` for FSK.
    pub fn xi(&self) -> f64 {
        match self.modulation {
            Modulation::Dpsk => 1.0,
            Modulation::Fsk => self.alphabet as f64,
        }
    }

    pub fn bits_per_symbol(&self) -> f64 {
        (self.alphabet as f64).log2()
    }

    fn slots(&self) -> f64 {
        (self.relays + 1) as f64
    }

    /// Symbol duration `T_s` under a unit block time at rate `R`.
    pub fn symbol_time(&self) -> f64 {
        let ps = self.bits_per_symbol() / (self.slots() * self.rate);
        match self.kind {
            ProtocolKind::TimeSwitching { alpha } => (1.0 - alpha) * ps,
            _ => ps,
        }
    }
}

/// Harvested (or supplied) relay transmit power `P_r` for a first-hop path
/// loss `l0r`.
pub fn harvested_power(config: &ProtocolConfig, l0r: f64) -> Result<f64, ProtocolError> {
    config.validate()?;
    let ProtocolConfig { eta, p0, .. } = *config;
    Ok(match config.kind {
        ProtocolKind::PowerSplitting { rho } => eta * rho * p0 * l0r,
        ProtocolKind::TimeSwitching { alpha } => {
            config.slots() * eta * p0 * l0r * alpha / (1.0 - alpha)
        }
        ProtocolKind::Grid => p0 / config.slots(),
    })
}

/// Effective noise variances at the destination (direct and relayed hops) and
/// at the relay decoding input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveNoise {
    pub sd: f64,
    pub sr: f64,
    pub rd: f64,
}

pub fn effective_noise(config: &ProtocolConfig, noise: &NoiseModel) -> EffectiveNoise {
    let full = noise.antenna() + noise.circuit();
    let sr = match config.kind {
        ProtocolKind::PowerSplitting { rho } => (1.0 - rho) * noise.antenna() + noise.circuit(),
        _ => full,
    };
    EffectiveNoise {
        sd: full,
        sr,
        rd: full,
    }
}

/// Symbol timing implied by a rate target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolBudget {
    /// Symbol duration `T_s` (block time normalized to one).
    pub symbol_time: f64,
    /// Rate recovered from `T_s`; equals the configured rate.
    pub rate: f64,
    /// Fraction of the block available for information delivery.
    pub id_fraction: f64,
}

pub fn info_rate_check(config: &ProtocolConfig) -> Result<SymbolBudget, ProtocolError> {
    config.validate()?;
    let ts = config.symbol_time();
    let id_fraction = match config.kind {
        ProtocolKind::TimeSwitching { alpha } => 1.0 - alpha,
        _ => 1.0,
    };
    let rate = id_fraction * config.bits_per_symbol() / (config.slots() * ts);
    Ok(SymbolBudget {
        symbol_time: ts,
        rate,
        id_fraction,
    })
}

/// Relay amplifying gain `G_r` that holds the average relay transmit power at
/// `P_r`, written per protocol and modulation.
pub fn amplifying_gain(
    config: &ProtocolConfig,
    l0r: f64,
    noise: &NoiseModel,
) -> Result<f64, ProtocolError> {
    config.validate()?;
    let ts = config.symbol_time();
    let (s1, s2) = (noise.antenna(), noise.circuit());
    let ProtocolConfig { eta, p0, .. } = *config;
    let xi = config.xi();
    let k1 = config.slots();
    let g2 = match config.kind {
        ProtocolKind::PowerSplitting { rho } => {
            eta * rho * p0 * ts * l0r / ((1.0 - rho) * p0 * ts * l0r + xi * ((1.0 - rho) * s1 + s2))
        }
        ProtocolKind::TimeSwitching { alpha } => {
            k1 * eta * p0 * ts * l0r * alpha / ((1.0 - alpha) * (p0 * ts * l0r + xi * (s1 + s2)))
        }
        ProtocolKind::Grid => {
            let share = p0 / k1;
            share * ts / (share * ts * l0r + xi * (s1 + s2))
        }
    };
    Ok(g2.sqrt())
}

/// Per-scenario SNRs and effective noise variances of the unified model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub modulation: Modulation,
    pub alphabet: usize,
    pub gamma_sd: f64,
    pub gamma_sr: Vec<f64>,
    pub gamma_rd: Vec<f64>,
    pub sigma_sd_sq: f64,
    pub sigma_sr_sq: Vec<f64>,
    pub sigma_rd_sq: Vec<f64>,
    pub xi: f64,
}

impl LinkBudget {
    pub fn relays(&self) -> usize {
        self.gamma_rd.len()
    }

    /// Copy with every link SNR replaced by `gamma`.
    pub fn with_all_snrs(&self, gamma: f64) -> Self {
        let mut out = self.clone();
        out.gamma_sd = gamma;
        out.gamma_sr.iter_mut().for_each(|g| *g = gamma);
        out.gamma_rd.iter_mut().for_each(|g| *g = gamma);
        out
    }
}

/// Derives the unified link budget: average SNRs of the direct, first-hop and
/// second-hop links plus the effective noise variances.
pub fn link_budget(
    config: &ProtocolConfig,
    geometry: &Geometry,
    pathloss: &PathLossModel,
    noise: &NoiseModel,
) -> Result<LinkBudget, ProtocolError> {
    config.validate()?;
    if geometry.relays() != config.relays {
        return Err(ProtocolError::RelayCount {
            config: config.relays,
            geometry: geometry.relays(),
        });
    }
    let eff = effective_noise(config, noise);
    let (s1, s2) = (noise.antenna(), noise.circuit());
    let ProtocolConfig { eta, p0, rate, .. } = *config;
    let bits = config.bits_per_symbol();
    let k1 = config.slots();
    let xi = config.xi();
    let l0d = pathloss.gain(geometry.d_sd())?;

    let gamma_sd = match config.kind {
        ProtocolKind::PowerSplitting { .. } => p0 * l0d * bits / (k1 * (s1 + s2) * rate),
        ProtocolKind::TimeSwitching { alpha } => {
            (1.0 - alpha) * p0 * l0d * bits / (k1 * (s1 + s2) * rate)
        }
        ProtocolKind::Grid => p0 * l0d * bits / (k1 * k1 * (s1 + s2) * rate),
    };

    let mut gamma_sr = Vec::with_capacity(config.relays);
    let mut gamma_rd = Vec::with_capacity(config.relays);
    for r in 0..config.relays {
        let l0r = pathloss.gain(geometry.d_sr()[r])?;
        let lrd = pathloss.gain(geometry.d_rd(r))?;
        let (g_sr, g_rd) = match config.kind {
            ProtocolKind::PowerSplitting { rho } => {
                let sr_noise = (1.0 - rho) * s1 + s2;
                let g_sr = (1.0 - rho) * p0 * l0r * bits / (k1 * sr_noise * rate);
                let g_rd = rho * eta * p0 * l0r * lrd * bits
                    / (((1.0 - rho) * p0 * l0r * bits + k1 * sr_noise * rate * xi) * (s1 + s2));
                (g_sr, g_rd)
            }
            ProtocolKind::TimeSwitching { alpha } => {
                let g_sr = (1.0 - alpha) * p0 * l0r * bits / (k1 * (s1 + s2) * rate);
                let g_rd = k1 * alpha * eta * p0 * l0r * lrd * bits
                    / (((1.0 - alpha) * p0 * l0r * bits + k1 * (s1 + s2) * rate * xi) * (s1 + s2));
                (g_sr, g_rd)
            }
            ProtocolKind::Grid => {
                // Source and relay each transmit P₀/(K+1); no splitting at the relay.
                let share = p0 / k1;
                let g_sr = share * l0r * bits / (k1 * (s1 + s2) * rate);
                let g_rd = share * lrd * bits
                    / ((share * l0r * bits + k1 * (s1 + s2) * rate * xi) * (s1 + s2));
                (g_sr, g_rd)
            }
        };
        gamma_sr.push(g_sr);
        gamma_rd.push(g_rd);
    }

    Ok(LinkBudget {
        modulation: config.modulation,
        alphabet: config.alphabet,
        gamma_sd,
        gamma_sr,
        gamma_rd,
        sigma_sd_sq: eff.sd,
        sigma_sr_sq: vec![eff.sr; config.relays],
        sigma_rd_sq: vec![eff.rd; config.relays],
        xi,
    })
}
