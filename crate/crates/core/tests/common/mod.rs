//! Oracle checks shared by the integration suites and the acceptance runner.
//! Each returns a verdict plus a one-line summary of what it measured.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared as ChiSquaredSampler, Distribution};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use swipt_core::channel::{cscg, draw_fading, Geometry, NoiseModel, PathLossModel};
use swipt_core::detectors::{argmax_first, detect, DetectorKind};
use swipt_core::numerics::{pdf_x0, pdf_y0, PdfParams, DEFAULT_TOL, GL5};
use swipt_core::protocol::{
    amplifying_gain, harvested_power, link_budget, LinkBudget, Modulation, ProtocolConfig,
    ProtocolKind,
};
use swipt_core::transceiver::{dpsk_phase, generate_block, generate_block_raw, ReceivedBlock};

pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    /// Conjunction of several checks, keeping every summary.
    pub fn all(parts: Vec<Check>) -> Self {
        let pass = parts.iter().all(|c| c.pass);
        let detail = parts
            .iter()
            .map(|c| format!("{}{}", if c.pass { "" } else { "FAILED " }, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail }
    }

    pub fn assert(&self) {
        assert!(self.pass, "{}", self.detail);
    }
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

// ---------------------------------------------------------------------------
// Cascaded densities

/// Complex multivariate Student-t proposal with per-entry scale `scale[j]`.
/// Its polynomial tails dominate the cascaded densities, so importance
/// weights stay bounded.
struct StudentT {
    scale: Vec<f64>,
    nu: f64,
}

impl StudentT {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let w = ChiSquaredSampler::new(self.nu).unwrap().sample(rng);
        let f = (self.nu / w).sqrt();
        self.scale
            .iter()
            .map(|s| cscg(rng) * (s.sqrt() * f))
            .collect()
    }

    fn ln_pdf(&self, x: &[Complex64]) -> f64 {
        let d = 2.0 * self.scale.len() as f64;
        let q: f64 = x
            .iter()
            .zip(&self.scale)
            .map(|(v, s)| 2.0 * v.norm_sqr() / s)
            .sum();
        let ln_det: f64 = self.scale.iter().map(|s| (s / 2.0).ln()).sum();
        ln_gamma((self.nu + d) / 2.0)
            - ln_gamma(self.nu / 2.0)
            - 0.5 * d * (self.nu * PI).ln()
            - ln_det
            - 0.5 * (self.nu + d) * (q / self.nu).ln_1p()
    }
}

/// One cascaded observation model together with its density and a binning.
trait Cascade: Sync {
    fn params(&self) -> &PdfParams;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64>;
    fn density(&self, x: &[Complex64]) -> f64;
    fn entry_power(&self) -> Vec<f64>;
    /// Two scalar statistics; the histogram cells are products of their
    /// quantile bins.
    fn stats(&self, x: &[Complex64]) -> [f64; 2];
}

struct X0 {
    p: PdfParams,
    c: Complex64,
}

const LEVELS: usize = 5;
const CELLS: usize = LEVELS * LEVELS;

type Edges = [[f64; LEVELS - 1]; 2];

fn cell<C: Cascade + ?Sized>(model: &C, x: &[Complex64], edges: &Edges) -> usize {
    let level = |v: f64, e: &[f64]| e.iter().take_while(|&&b| v > b).count();
    let [a, b] = model.stats(x);
    level(a, &edges[0]) * LEVELS + level(b, &edges[1])
}

impl Cascade for X0 {
    fn params(&self) -> &PdfParams {
        &self.p
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let x1 = cscg(rng) * self.p.omega1.sqrt();
        let x2 = cscg(rng) * self.p.omega2.sqrt();
        let (s1, s2) = (self.p.sigma1_sq.sqrt(), self.p.sigma2_sq.sqrt());
        [Complex64::new(1.0, 0.0), self.c]
            .iter()
            .map(|&w| x1 * x2 * w + x2 * s1 * cscg(rng) + s2 * cscg(rng))
            .collect()
    }

    fn density(&self, x: &[Complex64]) -> f64 {
        pdf_x0([x[0], x[1]], self.c, &self.p, DEFAULT_TOL).unwrap()
    }

    fn entry_power(&self) -> Vec<f64> {
        let noise = self.p.omega2 * self.p.sigma1_sq + self.p.sigma2_sq;
        let prod = self.p.omega1 * self.p.omega2;
        vec![prod + noise, prod * self.c.norm_sqr() + noise]
    }

    fn stats(&self, x: &[Complex64]) -> [f64; 2] {
        [
            x[0].norm_sqr() + x[1].norm_sqr(),
            (x[1] * (self.c * x[0]).conj()).arg(),
        ]
    }
}

struct Y0 {
    p: PdfParams,
    tones: usize,
    tone: usize,
}

impl Cascade for Y0 {
    fn params(&self) -> &PdfParams {
        &self.p
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let x1 = cscg(rng) * self.p.omega1.sqrt();
        let x2 = cscg(rng) * self.p.omega2.sqrt();
        let (s1, s2) = (self.p.sigma1_sq.sqrt(), self.p.sigma2_sq.sqrt());
        (0..self.tones)
            .map(|j| {
                let signal = if j + 1 == self.tone {
                    x1 * x2
                } else {
                    Complex64::new(0.0, 0.0)
                };
                signal + x2 * s1 * cscg(rng) + s2 * cscg(rng)
            })
            .collect()
    }

    fn density(&self, x: &[Complex64]) -> f64 {
        pdf_y0(x, self.tone, &self.p, DEFAULT_TOL).unwrap()
    }

    fn entry_power(&self) -> Vec<f64> {
        let noise = self.p.omega2 * self.p.sigma1_sq + self.p.sigma2_sq;
        (0..self.tones)
            .map(|j| {
                noise
                    + if j + 1 == self.tone {
                        self.p.omega1 * self.p.omega2
                    } else {
                        0.0
                    }
            })
            .collect()
    }

    fn stats(&self, x: &[Complex64]) -> [f64; 2] {
        let on = x[self.tone - 1].norm_sqr();
        let total: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        [on, total - on]
    }
}

fn x0_model() -> X0 {
    X0 {
        p: PdfParams {
            omega1: 1.0,
            omega2: 0.8,
            sigma1_sq: 0.5,
            sigma2_sq: 0.7,
        },
        c: Complex64::from_polar(1.0, PI / 3.0),
    }
}

fn y0_model(tones: usize) -> Y0 {
    Y0 {
        p: PdfParams {
            omega1: 1.2,
            omega2: 0.6,
            sigma1_sq: 0.4,
            sigma2_sq: 0.9,
        },
        tones,
        tone: 1,
    }
}

/// Importance-sampling sums: total weight, total squared weight, and per-bin
/// weight and squared weight.
struct Weights {
    n: usize,
    sum: f64,
    sum_sq: f64,
    bin: Vec<f64>,
    bin_sq: Vec<f64>,
}

fn importance_weights<C: Cascade>(model: &C, edges: &Edges, n: usize, seed: u64) -> Weights {
    let proposal = StudentT {
        scale: model.entry_power(),
        nu: 3.0,
    };
    let chunks = 64;
    let per = n / chunks;
    let bins = CELLS;
    let parts: Vec<Weights> = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(seed, c);
            let mut w = Weights {
                n: per,
                sum: 0.0,
                sum_sq: 0.0,
                bin: vec![0.0; bins],
                bin_sq: vec![0.0; bins],
            };
            for _ in 0..per {
                let x = proposal.sample(&mut r);
                let weight = model.density(&x) / proposal.ln_pdf(&x).exp();
                let b = cell(model, &x, edges);
                w.sum += weight;
                w.sum_sq += weight * weight;
                w.bin[b] += weight;
                w.bin_sq[b] += weight * weight;
            }
            w
        })
        .collect();
    parts
        .into_iter()
        .reduce(|mut a, b| {
            a.n += b.n;
            a.sum += b.sum;
            a.sum_sq += b.sum_sq;
            a.bin.iter_mut().zip(&b.bin).for_each(|(x, y)| *x += y);
            a.bin_sq
                .iter_mut()
                .zip(&b.bin_sq)
                .for_each(|(x, y)| *x += y);
            a
        })
        .unwrap()
}

fn mean_and_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Quintiles of each statistic from a pilot set of direct samples.
fn quantile_edges<C: Cascade>(model: &C, seed: u64) -> Edges {
    let mut r = rng(seed, 999);
    let pilot: Vec<[f64; 2]> = (0..20_000)
        .map(|_| model.stats(&model.draw(&mut r)))
        .collect();
    let mut edges = [[0.0; LEVELS - 1]; 2];
    for (s, e) in edges.iter_mut().enumerate() {
        let mut v: Vec<f64> = pilot.iter().map(|p| p[s]).collect();
        v.sort_by(f64::total_cmp);
        for (i, b) in e.iter_mut().enumerate() {
            *b = v[(i + 1) * v.len() / LEVELS];
        }
    }
    edges
}

fn normalization<C: Cascade>(name: &str, model: &C, seed: u64) -> Check {
    let edges = quantile_edges(model, seed);
    let w = importance_weights(model, &edges, 64_000, seed);
    let (mean, se) = mean_and_stderr(w.sum, w.sum_sq, w.n);
    let pass = (mean - 1.0).abs() <= 4.0 * se && se < 0.01;
    Check::new(pass, format!("{name} integrates to {mean:.4} ± {se:.4}"))
}

/// Pearson statistic between direct-sample bin counts and bin probabilities
/// obtained by integrating the density (importance sampling), with the
/// integration variance added to each cell's variance.
fn histogram<C: Cascade>(name: &str, model: &C, seed: u64) -> Check {
    let edges = quantile_edges(model, seed);
    let w = importance_weights(model, &edges, 128_000, seed ^ 0x5eed);
    let direct = 1_000_000usize;
    let chunks = 50u64;
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(seed ^ 0xd1ec7, c);
            let mut counts = vec![0u64; CELLS];
            for _ in 0..direct / chunks as usize {
                counts[cell(model, &model.draw(&mut r), &edges)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; CELLS],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = direct as f64;
    let mut stat = 0.0;
    let mut used = 0;
    for ((&sum, &sum_sq), &count) in w.bin.iter().zip(&w.bin_sq).zip(&counts) {
        let (p, se) = mean_and_stderr(sum, sum_sq, w.n);
        let expected = n * p;
        let var = expected * (1.0 - p) + (n * se).powi(2);
        if expected < 5.0 {
            continue;
        }
        stat += (count as f64 - expected).powi(2) / var;
        used += 1;
    }
    let p_value = ChiSquared::new(used as f64).unwrap().sf(stat);
    Check::new(
        p_value > 0.01,
        format!("{name} histogram χ² = {stat:.1} over {used} cells, p = {p_value:.3}"),
    )
}

pub fn pdf_normalization() -> Check {
    Check::all(vec![
        normalization("pdf_x0", &x0_model(), 11),
        normalization("pdf_y0 (M=2)", &y0_model(2), 12),
        normalization("pdf_y0 (M=3)", &y0_model(3), 13),
    ])
}

pub fn pdf_histograms() -> Check {
    Check::all(vec![
        histogram("pdf_x0", &x0_model(), 21),
        histogram("pdf_y0 (M=2)", &y0_model(2), 22),
    ])
}

// ---------------------------------------------------------------------------
// Signal generation

pub struct Chain {
    pub config: ProtocolConfig,
    pub geometry: Geometry,
    pub pathloss: PathLossModel,
    pub noise: NoiseModel,
}

impl Chain {
    pub fn new(kind: ProtocolKind, modulation: Modulation, alphabet: usize, snr_db: f64) -> Self {
        let noise = NoiseModel::default();
        Self {
            config: ProtocolConfig {
                kind,
                eta: 0.6,
                relays: 2,
                alphabet,
                modulation,
                rate: 1.0,
                p0: 10f64.powf(snr_db / 10.0) * noise.total(),
            },
            geometry: Geometry::new(3.0, vec![1.0, 2.0]).unwrap(),
            pathloss: PathLossModel::Bounded { exponent: 3.0 },
            noise,
        }
    }

    pub fn budget(&self) -> LinkBudget {
        link_budget(&self.config, &self.geometry, &self.pathloss, &self.noise).unwrap()
    }

    fn label(&self) -> String {
        format!("{}/{}", self.config.kind.name(), self.config.modulation)
    }
}

pub fn flatten(block: &ReceivedBlock) -> Vec<Complex64> {
    match block {
        ReceivedBlock::Dpsk(b) => b
            .y_sd
            .iter()
            .chain(b.y_rd.iter().flatten())
            .copied()
            .collect(),
        ReceivedBlock::Fsk(b) => b
            .y_sd
            .iter()
            .chain(b.y_rd.iter().flatten())
            .copied()
            .collect(),
    }
}

/// Running first and second moments of every entry, plus the lag-one
/// products within each DPSK pair.
#[derive(Default)]
struct Moments {
    n: f64,
    mean: Vec<Complex64>,
    power: Vec<f64>,
    pair: Vec<Complex64>,
}

impl Moments {
    fn add(&mut self, y: &[Complex64], dpsk: bool) {
        if self.mean.is_empty() {
            self.mean = vec![Complex64::new(0.0, 0.0); y.len()];
            self.power = vec![0.0; y.len()];
            self.pair = vec![Complex64::new(0.0, 0.0); y.len() / 2];
        }
        self.n += 1.0;
        for (i, v) in y.iter().enumerate() {
            self.mean[i] += v;
            self.power[i] += v.norm_sqr();
        }
        if dpsk {
            for (i, p) in self.pair.iter_mut().enumerate() {
                *p += y[2 * i + 1] * y[2 * i].conj();
            }
        }
    }

    /// Largest discrepancy between two ensembles, relative to the entry RMS.
    fn max_gap(&self, other: &Moments) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.mean.len() {
            let (pa, pb) = (self.power[i] / self.n, other.power[i] / other.n);
            let rms = pa.sqrt();
            worst = worst.max((pa - pb).abs() / pa);
            worst = worst.max((self.mean[i] / self.n - other.mean[i] / other.n).norm() / rms);
        }
        for (i, (a, b)) in self.pair.iter().zip(&other.pair).enumerate() {
            let scale = (self.power[2 * i] * self.power[2 * i + 1]).sqrt() / self.n;
            worst = worst.max((a / self.n - b / other.n).norm() / scale);
        }
        worst
    }
}

const GENERATOR_BLOCKS: usize = 100_000;
const SER_SNR_DB: f64 = 30.0;

/// Raw and unified generators driven by the same fading and message
/// sequence but independent noise: moments, relay energy and SER.
pub fn raw_vs_unified(chain: &Chain, seed: u64) -> Check {
    let budget = chain.budget();
    let alphabet = chain.config.alphabet;
    let relays = chain.config.relays;
    let dpsk = chain.config.modulation == Modulation::Dpsk;
    let (mut raw_m, mut uni_m) = (Moments::default(), Moments::default());
    let mut energy = vec![0.0; relays];
    let mut shared = rng(seed, 0);
    let (mut raw_rng, mut uni_rng) = (rng(seed, 1), rng(seed, 2));
    let s_prev = Complex64::from_polar(1.0, PI / 5.0);
    for _ in 0..GENERATOR_BLOCKS {
        let fading = draw_fading(relays, &mut shared);
        let raw = generate_block_raw(
            1,
            s_prev,
            &chain.config,
            &chain.geometry,
            &chain.pathloss,
            &chain.noise,
            &fading,
            &mut raw_rng,
        )
        .unwrap();
        let uni = generate_block(1, s_prev, &budget, &fading, &mut uni_rng).unwrap();
        raw_m.add(&flatten(&raw.block), dpsk);
        uni_m.add(&flatten(&uni), dpsk);
        energy
            .iter_mut()
            .zip(&raw.relay_energy)
            .for_each(|(e, x)| *e += x);
    }
    let gap = raw_m.max_gap(&uni_m);

    let ts = chain.config.symbol_time();
    let mut energy_gap: f64 = 0.0;
    for (r, e) in energy.iter().enumerate() {
        let l0r = chain.pathloss.gain(chain.geometry.d_sr()[r]).unwrap();
        let target = harvested_power(&chain.config, l0r).unwrap() * ts;
        energy_gap = energy_gap.max((e / GENERATOR_BLOCKS as f64 - target).abs() / target);
    }

    // Error rates at an SNR where errors are frequent but far from chance.
    let mut low = Chain::new(
        chain.config.kind,
        chain.config.modulation,
        alphabet,
        SER_SNR_DB,
    );
    low.config.relays = relays;
    let low_budget = low.budget();
    let (mut raw_err, mut uni_err) = (0u64, 0u64);
    let mut shared = rng(seed, 3);
    let (mut raw_rng, mut uni_rng) = (rng(seed, 4), rng(seed, 5));
    for _ in 0..GENERATOR_BLOCKS {
        let m = shared.random_range(0..alphabet);
        let s_prev = dpsk_phase(shared.random_range(0..alphabet), alphabet);
        let fading = draw_fading(relays, &mut shared);
        let raw = generate_block_raw(
            m,
            s_prev,
            &low.config,
            &low.geometry,
            &low.pathloss,
            &low.noise,
            &fading,
            &mut raw_rng,
        )
        .unwrap();
        let uni = generate_block(m, s_prev, &low_budget, &fading, &mut uni_rng).unwrap();
        raw_err += u64::from(detect(&raw.block, &low_budget, DetectorKind::Gld).unwrap() != m);
        uni_err += u64::from(detect(&uni, &low_budget, DetectorKind::Gld).unwrap() != m);
    }
    let n = GENERATOR_BLOCKS as f64;
    let (p_raw, p_uni) = (raw_err as f64 / n, uni_err as f64 / n);
    let half = |p: f64| 1.96 * (p * (1.0 - p) / n).sqrt();
    let overlap = (p_raw - p_uni).abs() <= half(p_raw) + half(p_uni);

    Check::new(
        gap < 0.02 && energy_gap < 0.02 && overlap,
        format!(
            "{}: moment gap {:.2}%, relay energy gap {:.2}%, SER {p_raw:.4} vs {p_uni:.4}",
            chain.label(),
            100.0 * gap,
            100.0 * energy_gap
        ),
    )
}

pub fn generator_chains() -> Vec<Chain> {
    let mut out = Vec::new();
    for kind in [
        ProtocolKind::PowerSplitting { rho: 0.6 },
        ProtocolKind::TimeSwitching { alpha: 0.4 },
        ProtocolKind::Grid,
    ] {
        for modulation in [Modulation::Dpsk, Modulation::Fsk] {
            out.push(Chain::new(kind, modulation, 4, 20.0));
        }
    }
    out
}

pub fn generator_equivalence() -> Check {
    Check::all(
        generator_chains()
            .iter()
            .enumerate()
            .map(|(i, c)| raw_vs_unified(c, 100 + i as u64))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Link budget, quadrature rule and detector reductions

/// Second-hop SNR from the link budget against `G²L_rd/σ_rd²` built from
/// each protocol's gain formula, over random valid parameters.
pub fn gain_identity() -> Check {
    let mut r = rng(31, 0);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..3_000 {
        let coeff = r.random_range(0.01..0.99);
        let kind = match r.random_range(0..3) {
            0 => ProtocolKind::PowerSplitting { rho: coeff },
            1 => ProtocolKind::TimeSwitching { alpha: coeff },
            _ => ProtocolKind::Grid,
        };
        let modulation = if r.random::<bool>() {
            Modulation::Dpsk
        } else {
            Modulation::Fsk
        };
        let relays = r.random_range(1..5);
        let d_sd = r.random_range(1.5..12.0);
        let d_sr: Vec<f64> = (0..relays)
            .map(|_| r.random_range(0.05..0.95) * d_sd)
            .collect();
        let geometry = Geometry::new(d_sd, d_sr.clone()).unwrap();
        let pathloss = if r.random::<bool>() {
            PathLossModel::Bounded {
                exponent: r.random_range(2.0..5.0),
            }
        } else {
            PathLossModel::Indoor {
                exponent: r.random_range(1.2..3.0),
                partition_loss_db: r.random_range(0.0..6.0),
            }
        };
        let noise = NoiseModel::new(r.random_range(0.2..3.0), r.random_range(0.05..0.95)).unwrap();
        let config = ProtocolConfig {
            kind,
            eta: r.random_range(0.1..1.0),
            relays,
            alphabet: 1 << r.random_range(1..5),
            modulation,
            rate: r.random_range(0.1..4.0),
            p0: 10f64.powf(r.random_range(-10.0..50.0) / 10.0),
        };
        let budget = link_budget(&config, &geometry, &pathloss, &noise).unwrap();
        for (k, &d) in d_sr.iter().enumerate() {
            let g = amplifying_gain(&config, pathloss.gain(d).unwrap(), &noise).unwrap();
            let lrd = pathloss.gain(d_sd - d).unwrap();
            let from_gain = g * g * lrd / budget.sigma_rd_sq[k];
            worst = worst.max((budget.gamma_rd[k] - from_gain).abs() / from_gain);
            cases += 1;
        }
    }
    Check::new(
        worst < 1e-10,
        format!("gain identity over {cases} relays: max relative gap {worst:.1e}"),
    )
}

pub fn gl5_exactness() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..=9 {
        let exact = if k % 2 == 0 {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        };
        let got = GL5.integrate(|x| x.powi(k), -1.0, 1.0);
        worst = worst.max((got - exact).abs());
    }
    let deg10 = (GL5.integrate(|x| x.powi(10), -1.0, 1.0) - 2.0 / 11.0).abs();
    Check::new(
        worst < 1e-12 && deg10 > 1e-6,
        format!("GL-5 max error through degree 9: {worst:.1e} (degree 10: {deg10:.1e})"),
    )
}

fn direct_only(modulation: Modulation, alphabet: usize, gamma: f64) -> LinkBudget {
    LinkBudget {
        modulation,
        alphabet,
        gamma_sd: gamma,
        gamma_sr: vec![],
        gamma_rd: vec![],
        sigma_sd_sq: 1.0,
        sigma_sr_sq: vec![],
        sigma_rd_sq: vec![],
        xi: if modulation == Modulation::Fsk {
            alphabet as f64
        } else {
            1.0
        },
    }
}

/// With no relays both detectors must reduce to differential phase detection
/// (DPSK) and energy detection (FSK).
pub fn k0_reduction() -> Check {
    let mut r = rng(41, 0);
    let mut mismatches = 0;
    let mut blocks = 0;
    for alphabet in [2, 4, 8] {
        for modulation in [Modulation::Dpsk, Modulation::Fsk] {
            let budget = direct_only(modulation, alphabet, 4.0);
            for _ in 0..5_000 {
                let m = r.random_range(0..alphabet);
                let s_prev = dpsk_phase(r.random_range(0..alphabet), alphabet);
                let fading = draw_fading(0, &mut r);
                let block = generate_block(m, s_prev, &budget, &fading, &mut r).unwrap();
                let classical = match &block {
                    ReceivedBlock::Dpsk(b) => argmax_first(
                        &(0..alphabet)
                            .map(|h| (b.y_sd[0] * b.y_sd[1].conj() * dpsk_phase(h, alphabet)).re)
                            .collect::<Vec<_>>(),
                    ),
                    ReceivedBlock::Fsk(b) => {
                        argmax_first(&b.y_sd.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>())
                    }
                };
                for kind in [DetectorKind::Gld, DetectorKind::mld()] {
                    mismatches += usize::from(detect(&block, &budget, kind).unwrap() != classical);
                    blocks += 1;
                }
            }
        }
    }
    Check::new(
        mismatches == 0,
        format!("K=0 detectors vs classical rules: {mismatches} of {blocks} decisions differ"),
    )
}
