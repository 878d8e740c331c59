//! Noncoherent maximum-likelihood detectors (MLD) and their five-point
//! Gauss–Legendre counterparts (GLD) for M-DPSK and M-FSK.
//!
//! Each detector scores all `M` hypotheses with a log-likelihood in which the
//! hypothesis-independent constants are dropped, so metric values are only
//! comparable within one block.

use crate::numerics::{
    log_integral_exact_lenient, log_integral_i, IntegralArgs, IntegralMode, NumericsError,
    DEFAULT_TOL,
};
use crate::protocol::{LinkBudget, Modulation};
use crate::transceiver::{dpsk_phase, DpskBlock, FskBlock, ReceivedBlock};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("block does not match the link budget: {0}")]
    Dimension(String),
    #[error("invalid detector: {0}")]
    Kind(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorKind {
    /// Exact likelihood with the integral evaluated to `tol` (absolute on `ln I`).
    Mld { tol: f64 },
    /// Likelihood integral replaced by the five-point rule.
    Gld,
}

impl DetectorKind {
    pub fn mld() -> Self {
        DetectorKind::Mld { tol: DEFAULT_TOL }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Mld { .. } => "mld",
            DetectorKind::Gld => "gld",
        }
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        match *self {
            DetectorKind::Mld { tol } if !(tol > 0.0 && tol <= 1e-6) => Err(DetectorError::Kind(
                format!("MLD tolerance must lie in (0, 1e-6], got {tol}"),
            )),
            _ => Ok(()),
        }
    }

    fn ln_integral(&self, args: &IntegralArgs) -> Result<f64, DetectorError> {
        Ok(match *self {
            DetectorKind::Mld { tol } => {
                args.validate()?;
                log_integral_exact_lenient(args, tol)
            }
            DetectorKind::Gld => log_integral_i(args, IntegralMode::Gl5)?,
        })
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_budget(
    budget: &LinkBudget,
    modulation: Modulation,
    relays: usize,
) -> Result<(), DetectorError> {
    if budget.modulation != modulation {
        return Err(DetectorError::Dimension(format!(
            "budget is for {}, block is {modulation}",
            budget.modulation
        )));
    }
    if relays != budget.relays() {
        return Err(DetectorError::Dimension(format!(
            "block has {relays} relayed observations, budget has {} relays",
            budget.relays()
        )));
    }
    Ok(())
}

/// Index of the largest metric; the smallest index wins ties.
pub fn argmax_first(metrics: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in metrics.iter().enumerate().skip(1) {
        if v > metrics[best] {
            best = i;
        }
    }
    best
}

/// Per-hypothesis DPSK metrics.
pub fn dpsk_metrics(
    block: &DpskBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<Vec<f64>, DetectorError> {
    check_budget(budget, Modulation::Dpsk, block.y_rd.len())?;
    kind.validate()?;
    let alphabet = budget.alphabet;
    let g = budget.gamma_sd;
    let direct_weight = 2.0 * g / ((1.0 + 2.0 * g) * budget.sigma_sd_sq);
    let cross = block.y_sd[0] * block.y_sd[1].conj();

    let mut metrics = Vec::with_capacity(alphabet);
    for m in 0..alphabet {
        let rot = dpsk_phase(m, alphabet);
        let mut metric = direct_weight * (cross * rot).re;
        for (r, y) in block.y_rd.iter().enumerate() {
            let eps1 = budget.sigma_sr_sq[r] * budget.gamma_rd[r];
            let eps2 = (1.0 + 2.0 * budget.gamma_sr[r]) * eps1;
            let denom = 2.0 * budget.sigma_rd_sq[r];
            let turned = y[0] * rot;
            let args = IntegralArgs::new(
                eps1,
                eps2,
                (y[1] - turned).norm_sqr() / denom,
                (y[1] + turned).norm_sqr() / denom,
                1.0,
            );
            metric += kind.ln_integral(&args)?;
        }
        metrics.push(metric);
    }
    Ok(metrics)
}

/// Per-hypothesis FSK metrics.
pub fn fsk_metrics(
    block: &FskBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<Vec<f64>, DetectorError> {
    check_budget(budget, Modulation::Fsk, block.y_rd.len())?;
    kind.validate()?;
    let alphabet = budget.alphabet;
    let dims_ok = block.y_sd.len() == alphabet && block.y_rd.iter().all(|y| y.len() == alphabet);
    if !dims_ok {
        return Err(DetectorError::Dimension(format!(
            "every observation vector must have {alphabet} tones"
        )));
    }
    let g = budget.gamma_sd;
    let direct_weight = g / ((1.0 + g) * budget.sigma_sd_sq);
    let lambda = (alphabet - 1) as f64;
    let energies: Vec<f64> = block
        .y_rd
        .iter()
        .map(|y| y.iter().map(|v| v.norm_sqr()).sum())
        .collect();

    let mut metrics = Vec::with_capacity(alphabet);
    for m in 0..alphabet {
        let mut metric = direct_weight * block.y_sd[m].norm_sqr();
        for (r, y) in block.y_rd.iter().enumerate() {
            let eps1 = budget.sigma_sr_sq[r] * budget.gamma_rd[r];
            let eps2 = (1.0 + budget.gamma_sr[r]) * eps1;
            let on_tone = y[m].norm_sqr();
            let args = IntegralArgs::new(
                eps1,
                eps2,
                (energies[r] - on_tone).max(0.0) / budget.sigma_rd_sq[r],
                on_tone / budget.sigma_rd_sq[r],
                lambda,
            );
            metric += kind.ln_integral(&args)?;
        }
        metrics.push(metric);
    }
    Ok(metrics)
}

pub fn detect_dpsk(
    block: &DpskBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<usize, DetectorError> {
    Ok(argmax_first(&dpsk_metrics(block, budget, kind)?))
}

pub fn detect_fsk(
    block: &FskBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<usize, DetectorError> {
    Ok(argmax_first(&fsk_metrics(block, budget, kind)?))
}

/// Metrics for a block of either modulation.
pub fn metrics(
    block: &ReceivedBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<Vec<f64>, DetectorError> {
    match block {
        ReceivedBlock::Dpsk(b) => dpsk_metrics(b, budget, kind),
        ReceivedBlock::Fsk(b) => fsk_metrics(b, budget, kind),
    }
}

/// Decision for a block of either modulation.
pub fn detect(
    block: &ReceivedBlock,
    budget: &LinkBudget,
    kind: DetectorKind,
) -> Result<usize, DetectorError> {
    Ok(argmax_first(&metrics(block, budget, kind)?))
}
