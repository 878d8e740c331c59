//! Densities of the cascaded Gaussian observations seen through one relay.
//!
//! `X₀ = X₁X₂[1, c]ᵀ + X₂x₁ + x₂` (two-symbol differential block) and
//! `Y₀ = X₁X₂ iₚ + X₂y₁ + y₂` (one tone vector), with `Xᵢ ~ CN(0, Ωᵢ)` and the
//! vectors `CN(0, σᵢ²I)`. Both densities reduce to one evaluation of `I`.

use super::{integral_i_ref, IntegralArgs, NumericsError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Variances of the factors in the cascaded model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfParams {
    /// Variance of `X₁`.
    pub omega1: f64,
    /// Variance of `X₂`.
    pub omega2: f64,
    /// Per-entry variance of the inner noise vector.
    pub sigma1_sq: f64,
    /// Per-entry variance of the outer noise vector.
    pub sigma2_sq: f64,
}

impl PdfParams {
    fn validate(&self) -> Result<(), NumericsError> {
        let v = [self.omega1, self.omega2, self.sigma1_sq, self.sigma2_sq];
        if v.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(NumericsError::Domain(format!(
                "all variances must be positive and finite: {self:?}"
            )))
        }
    }

    fn eps1(&self) -> f64 {
        self.omega2 * self.sigma1_sq / self.sigma2_sq
    }
}

/// Maps an observation of `X₀` onto the arguments of `I`.
pub fn x0_integral_args(x: [Complex64; 2], c: Complex64, params: &PdfParams) -> IntegralArgs {
    let c_norm = 1.0 + c.norm_sqr();
    let eps1 = params.eps1();
    let eps2 = (1.0 + params.omega1 * c_norm / params.sigma1_sq) * eps1;
    let beta1 = (x[1] - c * x[0]).norm_sqr() / (c_norm * params.sigma2_sq);
    let beta2 = (x[0] + c.conj() * x[1]).norm_sqr() / (c_norm * params.sigma2_sq);
    IntegralArgs::new(eps1, eps2, beta1, beta2, 1.0)
}

/// Maps an observation of `Y₀` (tone `p`, one-based) onto the arguments of `I`.
pub fn y0_integral_args(y: &[Complex64], tone: usize, params: &PdfParams) -> IntegralArgs {
    let total: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let on_tone = y[tone - 1].norm_sqr();
    let eps1 = params.eps1();
    let eps2 = (1.0 + params.omega1 / params.sigma1_sq) * eps1;
    IntegralArgs::new(
        eps1,
        eps2,
        (total - on_tone).max(0.0) / params.sigma2_sq,
        on_tone / params.sigma2_sq,
        (y.len() - 1) as f64,
    )
}

/// Density of `X₀ = X₁X₂[1, c]ᵀ + X₂x₁ + x₂` at `x`.
pub fn pdf_x0(
    x: [Complex64; 2],
    c: Complex64,
    params: &PdfParams,
    tol: f64,
) -> Result<f64, NumericsError> {
    params.validate()?;
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(NumericsError::Domain(format!("non-finite c = {c}")));
    }
    let args = x0_integral_args(x, c, params);
    let scale = (PI * params.sigma2_sq).powi(2);
    Ok(integral_i_ref(&args, tol)? / scale)
}

/// Density of `Y₀ = X₁X₂ iₚ + X₂y₁ + y₂` at `y`, with one-based tone index `tone`.
pub fn pdf_y0(
    y: &[Complex64],
    tone: usize,
    params: &PdfParams,
    tol: f64,
) -> Result<f64, NumericsError> {
    params.validate()?;
    let m = y.len();
    if tone < 1 || tone > m {
        return Err(NumericsError::Domain(format!(
            "tone index {tone} outside 1..={m}"
        )));
    }
    let args = y0_integral_args(y, tone, params);
    let scale = (PI * params.sigma2_sq).powi(m as i32);
    Ok(integral_i_ref(&args, tol)? / scale)
}
