//! Modulation and generation of destination observations.
//!
//! The unified generators draw observations straight from the link budget.
//! [`generate_block_raw`] instead walks the physical chain (source power,
//! antenna noise, splitter, circuit noise, explicit relay gain) and exists to
//! cross-check the unified form.

use crate::channel::{cscg, FadingDraw, Geometry, NoiseModel, PathLossModel};
use crate::protocol::{
    amplifying_gain, effective_noise, LinkBudget, Modulation, ProtocolConfig, ProtocolError,
    ProtocolKind,
};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransceiverError {
    #[error("message {m} outside alphabet of size {alphabet}")]
    Message { m: usize, alphabet: usize },
    #[error("reference symbol must have unit modulus, got |s| = {0}")]
    Reference(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("budget is for {0} modulation")]
    Modulation(Modulation),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Two consecutive DPSK observations `[y(l-1), y(l)]` per link.
#[derive(Debug, Clone, PartialEq)]
pub struct DpskBlock {
    pub y_sd: [Complex64; 2],
    pub y_rd: Vec<[Complex64; 2]>,
}

/// One `M`-tone observation vector per link.
#[derive(Debug, Clone, PartialEq)]
pub struct FskBlock {
    pub y_sd: Vec<Complex64>,
    pub y_rd: Vec<Vec<Complex64>>,
}

/// A destination observation for either modulation.
#[derive(Debug, Clone, PartialEq)]
pub enum ReceivedBlock {
    Dpsk(DpskBlock),
    Fsk(FskBlock),
}

fn check_message(m: usize, alphabet: usize) -> Result<(), TransceiverError> {
    if m < alphabet {
        Ok(())
    } else {
        Err(TransceiverError::Message { m, alphabet })
    }
}

fn check_fading(budget: &LinkBudget, fading: &FadingDraw) -> Result<(), TransceiverError> {
    let k = budget.relays();
    if fading.h_sr.len() != k || fading.h_rd.len() != k {
        return Err(TransceiverError::Dimension(format!(
            "budget has {k} relays, fading draw has {}/{}",
            fading.h_sr.len(),
            fading.h_rd.len()
        )));
    }
    Ok(())
}

/// Phase rotation `e^{j2πm/M}` carrying message `m`.
pub fn dpsk_phase(m: usize, alphabet: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * m as f64 / alphabet as f64)
}

/// Differential encoding `s(l) = s(l-1)·e^{j2πm/M}`.
pub fn dpsk_encode(
    m: usize,
    alphabet: usize,
    s_prev: Complex64,
) -> Result<Complex64, TransceiverError> {
    check_message(m, alphabet)?;
    let modulus = s_prev.norm();
    if (modulus - 1.0).abs() > 1e-9 {
        return Err(TransceiverError::Reference(modulus));
    }
    Ok(s_prev * dpsk_phase(m, alphabet))
}

/// Per-link amplitudes of the unified model.
struct Amplitudes {
    sd_signal: f64,
    sd_noise: f64,
    relays: Vec<RelayAmplitudes>,
}

struct RelayAmplitudes {
    signal: f64,
    relay_noise: f64,
    dest_noise: f64,
}

impl Amplitudes {
    fn new(budget: &LinkBudget) -> Self {
        let sd_noise = budget.sigma_sd_sq.sqrt();
        let relays = (0..budget.relays())
            .map(|r| {
                let s0r = budget.sigma_sr_sq[r].sqrt();
                let srd = budget.sigma_rd_sq[r].sqrt();
                let g_rd = budget.gamma_rd[r];
                RelayAmplitudes {
                    signal: s0r * srd * (budget.gamma_sr[r] * g_rd).sqrt(),
                    relay_noise: s0r * srd * g_rd.sqrt(),
                    dest_noise: srd,
                }
            })
            .collect();
        Self {
            sd_signal: sd_noise * budget.gamma_sd.sqrt(),
            sd_noise,
            relays,
        }
    }
}

/// Draws one DPSK block under message `m` with reference symbol `s_prev`.
pub fn generate_block_dpsk<R: Rng + ?Sized>(
    m: usize,
    s_prev: Complex64,
    budget: &LinkBudget,
    fading: &FadingDraw,
    rng: &mut R,
) -> Result<DpskBlock, TransceiverError> {
    if budget.modulation != Modulation::Dpsk {
        return Err(TransceiverError::Modulation(budget.modulation));
    }
    check_fading(budget, fading)?;
    let s = [s_prev, dpsk_encode(m, budget.alphabet, s_prev)?];
    let amp = Amplitudes::new(budget);
    let direct = amp.sd_signal * fading.h_sd;
    let y_sd = s.map(|si| direct * si + amp.sd_noise * cscg(rng));
    let y_rd = amp
        .relays
        .iter()
        .enumerate()
        .map(|(r, a)| {
            let cascade = a.signal * fading.h_sr[r] * fading.h_rd[r];
            let forwarded = a.relay_noise * fading.h_rd[r];
            s.map(|si| cascade * si + forwarded * cscg(rng) + a.dest_noise * cscg(rng))
        })
        .collect();
    Ok(DpskBlock { y_sd, y_rd })
}

/// Draws one FSK block under message `m` (tone `m + 1`).
pub fn generate_block_fsk<R: Rng + ?Sized>(
    m: usize,
    budget: &LinkBudget,
    fading: &FadingDraw,
    rng: &mut R,
) -> Result<FskBlock, TransceiverError> {
    if budget.modulation != Modulation::Fsk {
        return Err(TransceiverError::Modulation(budget.modulation));
    }
    check_fading(budget, fading)?;
    let tones = budget.alphabet;
    check_message(m, tones)?;
    let amp = Amplitudes::new(budget);
    let mut y_sd: Vec<Complex64> = (0..tones).map(|_| amp.sd_noise * cscg(rng)).collect();
    y_sd[m] += amp.sd_signal * fading.h_sd;
    let y_rd = amp
        .relays
        .iter()
        .enumerate()
        .map(|(r, a)| {
            let forwarded = a.relay_noise * fading.h_rd[r];
            let mut y: Vec<Complex64> = (0..tones)
                .map(|_| forwarded * cscg(rng) + a.dest_noise * cscg(rng))
                .collect();
            y[m] += a.signal * fading.h_sr[r] * fading.h_rd[r];
            y
        })
        .collect();
    Ok(FskBlock { y_sd, y_rd })
}

/// Draws one block of the budget's modulation. The DPSK reference symbol is
/// `s_prev`; FSK ignores it.
pub fn generate_block<R: Rng + ?Sized>(
    m: usize,
    s_prev: Complex64,
    budget: &LinkBudget,
    fading: &FadingDraw,
    rng: &mut R,
) -> Result<ReceivedBlock, TransceiverError> {
    Ok(match budget.modulation {
        Modulation::Dpsk => {
            ReceivedBlock::Dpsk(generate_block_dpsk(m, s_prev, budget, fading, rng)?)
        }
        Modulation::Fsk => ReceivedBlock::Fsk(generate_block_fsk(m, budget, fading, rng)?),
    })
}

/// Output of the physical-chain generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBlock {
    pub block: ReceivedBlock,
    /// Energy `‖G_r y_0r‖²` each relay radiated, per transmitted symbol
    /// (the DPSK pair counts as two symbols, an FSK tone vector as one).
    pub relay_energy: Vec<f64>,
}

/// Draws one block from the per-protocol signal chain with explicit antenna
/// noise `u`, circuit noise `v` and relay gain `G_r`.
#[allow(clippy::too_many_arguments)]
pub fn generate_block_raw<R: Rng + ?Sized>(
    m: usize,
    s_prev: Complex64,
    config: &ProtocolConfig,
    geometry: &Geometry,
    pathloss: &PathLossModel,
    noise: &NoiseModel,
    fading: &FadingDraw,
    rng: &mut R,
) -> Result<RawBlock, TransceiverError> {
    config.validate()?;
    let k = config.relays;
    if geometry.relays() != k {
        return Err(ProtocolError::RelayCount {
            config: k,
            geometry: geometry.relays(),
        }
        .into());
    }
    if fading.relays() != k || fading.h_rd.len() != k {
        return Err(TransceiverError::Dimension(format!(
            "configuration has {k} relays, fading draw has {}",
            fading.relays()
        )));
    }
    check_message(m, config.alphabet)?;

    let ts = config.symbol_time();
    let source_power = match config.kind {
        ProtocolKind::Grid => config.p0 / (k + 1) as f64,
        _ => config.p0,
    };
    // Fraction of the received power routed to information decoding.
    let id_share = match config.kind {
        ProtocolKind::PowerSplitting { rho } => 1.0 - rho,
        _ => 1.0,
    };
    let amp_ant = noise.antenna().sqrt();
    let amp_cir = noise.circuit().sqrt();
    let dest_noise = effective_noise(config, noise).rd.sqrt();
    let tx_amp = (source_power * ts).sqrt();

    let symbols: Vec<Complex64> = match config.modulation {
        Modulation::Dpsk => vec![s_prev, dpsk_encode(m, config.alphabet, s_prev)?],
        Modulation::Fsk => {
            let mut tone = vec![Complex64::new(0.0, 0.0); config.alphabet];
            tone[m] = Complex64::new(1.0, 0.0);
            tone
        }
    };
    let per_block = match config.modulation {
        Modulation::Dpsk => 2.0,
        Modulation::Fsk => 1.0,
    };

    let l0d = pathloss
        .gain(geometry.d_sd())
        .map_err(ProtocolError::from)?;
    let direct = tx_amp * l0d.sqrt() * fading.h_sd;
    let y_sd: Vec<Complex64> = symbols
        .iter()
        .map(|&s| direct * s + amp_ant * cscg(rng) + amp_cir * cscg(rng))
        .collect();

    let mut y_rd = Vec::with_capacity(k);
    let mut relay_energy = Vec::with_capacity(k);
    for r in 0..k {
        let l0r = pathloss
            .gain(geometry.d_sr()[r])
            .map_err(ProtocolError::from)?;
        let lrd = pathloss
            .gain(geometry.d_rd(r))
            .map_err(ProtocolError::from)?;
        let gain = amplifying_gain(config, l0r, noise)?;
        let split = id_share.sqrt();
        let incident = tx_amp * l0r.sqrt() * fading.h_sr[r];
        let relay_rx: Vec<Complex64> = symbols
            .iter()
            .map(|&s| split * (incident * s + amp_ant * cscg(rng)) + amp_cir * cscg(rng))
            .collect();
        let relay_tx: Vec<Complex64> = relay_rx.iter().map(|&y| gain * y).collect();
        relay_energy.push(relay_tx.iter().map(|v| v.norm_sqr()).sum::<f64>() / per_block);
        let hop = lrd.sqrt() * fading.h_rd[r];
        y_rd.push(
            relay_tx
                .iter()
                .map(|&x| hop * x + dest_noise * cscg(rng))
                .collect::<Vec<_>>(),
        );
    }

    let block = match config.modulation {
        Modulation::Dpsk => ReceivedBlock::Dpsk(DpskBlock {
            y_sd: [y_sd[0], y_sd[1]],
            y_rd: y_rd.into_iter().map(|v| [v[0], v[1]]).collect(),
        }),
        Modulation::Fsk => ReceivedBlock::Fsk(FskBlock { y_sd, y_rd }),
    };
    Ok(RawBlock {
        block,
        relay_energy,
    })
}
