//! Special-function layer for the relay likelihoods.
//!
//! Everything here revolves around the one-dimensional integral
//!
//! ```text
//! I(ε₁, ε₂, β₁, β₂, λ) = ∫₀^∞ exp(-(x + β₁/(1+ε₁x) + β₂/(1+ε₂x))) / ((1+ε₁x)^λ (1+ε₂x)) dx
//! ```
//!
//! which, after substituting `z = e^{-x}`, becomes `∫₀¹ ψ(z) dz` with a bounded
//! integrand. The reference value uses adaptive Gauss–Kronrod quadrature on the
//! transformed domain; the detector approximation uses the fixed five-point
//! Gauss–Legendre rule.

mod pdf;
pub mod quadrature;

pub use pdf::{pdf_x0, pdf_y0, PdfParams};
pub use quadrature::{Gl5Rule, GL5};

use quadrature::{adaptive_gk15, adaptive_gk15_with_breaks};
use thiserror::Error;

/// Default absolute tolerance of the reference quadrature.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum number of bisections of any one segment.
pub const MAX_DEPTH: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not reach tolerance (estimate {estimate}, error bound {error_bound})")]
    Accuracy { estimate: f64, error_bound: f64 },
}

/// Arguments of the likelihood integral `I(ε₁, ε₂, β₁, β₂, λ)`.
///
/// Zero `ε` or `β` values are accepted as the limits of the integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralArgs {
    pub eps1: f64,
    pub eps2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: f64,
}

impl IntegralArgs {
    pub fn new(eps1: f64, eps2: f64, beta1: f64, beta2: f64, lambda: f64) -> Self {
        Self {
            eps1,
            eps2,
            beta1,
            beta2,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let all = [self.eps1, self.eps2, self.beta1, self.beta2, self.lambda];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Domain(format!(
                "non-finite integral argument {self:?}"
            )));
        }
        if self.eps1 < 0.0 || self.eps2 < 0.0 || self.beta1 < 0.0 || self.beta2 < 0.0 {
            return Err(NumericsError::Domain(format!(
                "negative integral argument {self:?}"
            )));
        }
        if self.lambda <= 0.0 {
            return Err(NumericsError::Domain(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `ln ψ` at `-ln z = t`; `t = ∞` maps to `-∞` unless the integrand is flat.
    #[inline]
    fn ln_psi_at(&self, t: f64) -> f64 {
        let d1 = 1.0 + self.eps1 * t;
        let d2 = 1.0 + self.eps2 * t;
        if d1.is_infinite() || d2.is_infinite() {
            return f64::NEG_INFINITY;
        }
        -(self.beta1 / d1 + self.beta2 / d2) - self.lambda * d1.ln() - d2.ln()
    }
}

/// Selects how `I` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralMode {
    /// Adaptive reference quadrature; `tol` bounds the absolute error of `ln I`.
    Exact { tol: f64 },
    /// Fixed five-point Gauss–Legendre rule.
    Gl5,
}

/// Transformed integrand `ψ(z)` on `(0, 1]`.
pub fn psi(z: f64, args: &IntegralArgs) -> Result<f64, NumericsError> {
    args.validate()?;
    if !(z > 0.0 && z <= 1.0) {
        return Err(NumericsError::Domain(format!(
            "psi is defined on (0, 1], got z = {z}"
        )));
    }
    Ok(args.ln_psi_at(-z.ln()).exp())
}

fn check_tol(tol: f64) -> Result<(), NumericsError> {
    if tol > 0.0 && tol <= 1e-6 {
        Ok(())
    } else {
        Err(NumericsError::Domain(format!(
            "tolerance must lie in (0, 1e-6], got {tol}"
        )))
    }
}

/// Reference value of `I` with absolute error at most `tol`.
pub fn integral_i_ref(args: &IntegralArgs, tol: f64) -> Result<f64, NumericsError> {
    args.validate()?;
    check_tol(tol)?;
    let q = adaptive_gk15(
        |z: f64| args.ln_psi_at(-z.ln()).exp(),
        0.0,
        1.0,
        tol,
        0.0,
        MAX_DEPTH,
    );
    if q.converged {
        Ok(q.value.clamp(0.0, 1.0))
    } else {
        Err(NumericsError::Accuracy {
            estimate: q.value,
            error_bound: q.error,
        })
    }
}

#[inline]
fn gl5_log_terms(args: &IntegralArgs) -> [f64; 5] {
    let mut terms = [0.0; 5];
    for (i, term) in terms.iter_mut().enumerate() {
        let z = 0.5 * (1.0 + GL5.nodes[i]);
        *term = GL5.weights[i].ln() + args.ln_psi_at(-z.ln());
    }
    terms
}

/// Five-point Gauss–Legendre approximation `Ĩ = ½ Σ wᵢ ψ((1+zᵢ)/2)`.
pub fn integral_i_gl5(args: &IntegralArgs) -> Result<f64, NumericsError> {
    args.validate()?;
    let value = GL5
        .nodes
        .iter()
        .zip(GL5.weights.iter())
        .map(|(&z, &w)| w * args.ln_psi_at(-(0.5 * (1.0 + z)).ln()).exp())
        .sum::<f64>();
    Ok(0.5 * value)
}

/// `ln I` evaluated without underflow, in either mode.
pub fn log_integral_i(args: &IntegralArgs, mode: IntegralMode) -> Result<f64, NumericsError> {
    args.validate()?;
    match mode {
        IntegralMode::Gl5 => Ok(log_sum_exp(&gl5_log_terms(args)) - std::f64::consts::LN_2),
        IntegralMode::Exact { tol } => {
            check_tol(tol)?;
            let (value, converged, error) = log_integral_exact(args, tol);
            if converged {
                Ok(value)
            } else {
                Err(NumericsError::Accuracy {
                    estimate: value,
                    error_bound: error,
                })
            }
        }
    }
}

/// Same as [`log_integral_i`] in exact mode, but returns the best estimate
/// even when the subdivision budget is exhausted.
pub(crate) fn log_integral_exact_lenient(args: &IntegralArgs, tol: f64) -> f64 {
    log_integral_exact(args, tol).0
}

fn log_integral_exact(args: &IntegralArgs, tol: f64) -> (f64, bool, f64) {
    // Integrate in the original variable, shifted by the log-integrand's
    // maximum so the scaled integrand peaks at one. The tolerance is then
    // relative, i.e. absolute on ln I.
    let ln_f = |x: f64| -x + args.ln_psi_at(x);
    let (peak, shift) = locate_peak(args, &ln_f);
    let width = peak_width(&ln_f, peak);
    // Beyond `end` the tail is below e^{-end} <= tol * e^{shift} * e^{-12}.
    let end = (-shift - tol.ln() + 12.0).max(4.0 * peak + 1.0);
    let mut breaks = vec![0.0, end];
    for b in [1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 0.5 * peak, 2.0 * peak] {
        breaks.push(b);
    }
    for k in [0.0, 1.0, 4.0, 16.0, 64.0] {
        breaks.push(peak - k * width);
        breaks.push(peak + k * width);
    }
    breaks.retain(|&b| (0.0..=end).contains(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = adaptive_gk15_with_breaks(
        |x: f64| (ln_f(x) - shift).exp(),
        &breaks,
        0.0,
        tol,
        MAX_DEPTH,
    );
    (shift + q.value.ln(), q.converged, q.error / q.value)
}

/// Location and value of the maximum of `ln f` on `[0, ∞)`.
fn locate_peak<F: Fn(f64) -> f64>(args: &IntegralArgs, ln_f: &F) -> (f64, f64) {
    // The β/(1+εx) terms stop pulling the maximum outward beyond √(β/ε).
    let reach = [(args.beta1, args.eps1), (args.beta2, args.eps2)]
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(b, e)| (b / e).sqrt())
        .fold(1e4, f64::max);
    let mut best = (0.0, ln_f(0.0));
    let mut x = 1e-4;
    while x < 2.0 * reach {
        let v = ln_f(x);
        if v > best.1 {
            best = (x, v);
        }
        x *= 1.5;
    }
    if best.0 == 0.0 {
        return best;
    }
    // Golden-section refinement between the neighbouring samples.
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best.0 / 1.5, best.0 * 1.5);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (ln_f(a), ln_f(b));
    for _ in 0..80 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = ln_f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = ln_f(a);
        }
    }
    for (x, v) in [(a, fa), (b, fb)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Scale over which `ln f` drops by about one half around its maximum.
fn peak_width<F: Fn(f64) -> f64>(ln_f: &F, peak: f64) -> f64 {
    if peak == 0.0 {
        return 1.0;
    }
    let h = 1e-3 * peak;
    let curvature = (ln_f(peak + h) - 2.0 * ln_f(peak) + ln_f(peak - h)) / (h * h);
    if curvature < 0.0 && curvature.is_finite() {
        (-1.0 / curvature).sqrt().min(peak)
    } else {
        0.1 * peak
    }
}

/// Numerically stable `ln Σ exp(xᵢ)`. Returns `-∞` for an empty slice or when
/// every term is `-∞`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
