//! Line-network geometry, path loss, Rayleigh fading and the two-stage noise
//! model (receive antenna plus information-decoding circuit).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid path-loss input: {0}")]
    PathLoss(String),
    #[error("invalid noise model: {0}")]
    Noise(String),
}

/// Source, relays and destination on a straight line.
///
/// Relay `r` sits `d_sr[r]` meters from the source, so its distance to the
/// destination is `d_sd - d_sr[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    d_sd: f64,
    d_sr: Vec<f64>,
}

impl Geometry {
    pub fn new(d_sd: f64, d_sr: Vec<f64>) -> Result<Self, ChannelError> {
        if !(d_sd.is_finite() && d_sd > 0.0) {
            return Err(ChannelError::Geometry(format!(
                "source-destination distance must be positive, got {d_sd}"
            )));
        }
        if let Some(bad) = d_sr.iter().find(|&&d| !(d > 0.0 && d < d_sd)) {
            return Err(ChannelError::Geometry(format!(
                "relay distance {bad} is not strictly between source and destination (0, {d_sd})"
            )));
        }
        Ok(Self { d_sd, d_sr })
    }

    /// All `k` relays at the same fraction of the source-destination distance.
    pub fn uniform(d_sd: f64, k: usize, fraction: f64) -> Result<Self, ChannelError> {
        Self::new(d_sd, vec![fraction * d_sd; k])
    }

    pub fn relays(&self) -> usize {
        self.d_sr.len()
    }

    pub fn d_sd(&self) -> f64 {
        self.d_sd
    }

    pub fn d_sr(&self) -> &[f64] {
        &self.d_sr
    }

    pub fn d_rd(&self, relay: usize) -> f64 {
        self.d_sd - self.d_sr[relay]
    }
}

/// Distance-dependent large-scale attenuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLossModel {
    /// `L = 1 / (1 + d^exponent)`.
    Bounded { exponent: f64 },
    /// Bounded model in dB minus a partition (wall) loss.
    Indoor {
        exponent: f64,
        partition_loss_db: f64,
    },
}

impl PathLossModel {
    /// Office-building profile: exponent 1.6 behind a double plasterboard wall.
    pub const INDOOR_OFFICE: PathLossModel = PathLossModel::Indoor {
        exponent: 1.6,
        partition_loss_db: 3.4,
    };

    pub fn exponent(&self) -> f64 {
        match *self {
            PathLossModel::Bounded { exponent } | PathLossModel::Indoor { exponent, .. } => {
                exponent
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PathLossModel::Bounded { .. } => "bounded",
            PathLossModel::Indoor { .. } => "indoor",
        }
    }

    /// Linear power gain at distance `d`.
    pub fn gain(&self, d: f64) -> Result<f64, ChannelError> {
        if !(d.is_finite() && d > 0.0) {
            return Err(ChannelError::PathLoss(format!(
                "distance must be positive, got {d}"
            )));
        }
        let exponent = self.exponent();
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(ChannelError::PathLoss(format!(
                "exponent must be positive, got {exponent}"
            )));
        }
        let bounded = 1.0 / (1.0 + d.powf(exponent));
        Ok(match *self {
            PathLossModel::Bounded { .. } => bounded,
            PathLossModel::Indoor {
                partition_loss_db, ..
            } => {
                let db = 10.0 * bounded.log10() - partition_loss_db;
                10f64.powf(db / 10.0)
            }
        })
    }
}

/// Per-node noise: total variance `sigma0_sq`, of which `split` is added at
/// the antenna and `1 - split` in the decoding circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma0_sq: f64,
    split: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma0_sq: 1.0,
            split: 0.5,
        }
    }
}

impl NoiseModel {
    pub fn new(sigma0_sq: f64, split: f64) -> Result<Self, ChannelError> {
        if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
            return Err(ChannelError::Noise(format!(
                "total noise variance must be positive, got {sigma0_sq}"
            )));
        }
        if !(split > 0.0 && split < 1.0) {
            return Err(ChannelError::Noise(format!(
                "antenna share must lie in (0, 1), got {split}"
            )));
        }
        Ok(Self { sigma0_sq, split })
    }

    pub fn total(&self) -> f64 {
        self.sigma0_sq
    }

    pub fn split(&self) -> f64 {
        self.split
    }

    /// Antenna-stage variance, added before any power splitter.
    pub fn antenna(&self) -> f64 {
        self.split * self.sigma0_sq
    }

    /// Decoding-circuit variance, added after the splitter.
    pub fn circuit(&self) -> f64 {
        (1.0 - self.split) * self.sigma0_sq
    }
}

/// Small-scale fading for one detection block.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraw {
    pub h_sd: Complex64,
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
}

impl FadingDraw {
    pub fn relays(&self) -> usize {
        self.h_sr.len()
    }
}

/// One `CN(0, 1)` sample.
#[inline]
pub fn cscg<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Fills `out` with independent `CN(0, 1)` samples.
pub fn fill_cscg<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    for v in out.iter_mut() {
        *v = cscg(rng);
    }
}

/// Draws the `2K + 1` independent unit-variance Rayleigh coefficients.
pub fn draw_fading<R: Rng + ?Sized>(relays: usize, rng: &mut R) -> FadingDraw {
    let h_sd = cscg(rng);
    let h_sr = (0..relays).map(|_| cscg(rng)).collect();
    let h_rd = (0..relays).map(|_| cscg(rng)).collect();
    FadingDraw { h_sd, h_sr, h_rd }
}
