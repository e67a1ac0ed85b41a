//! Bias analysis and the fairness-aware frequency response.
//!
//! When features are filtered before one round of aggregation, Â Xᶠ W equals
//! Aᶠ X W with Aᶠ = V (I − Λ) diag(h̃) Vᵀ. The correlation between the
//! sensitive attribute s and that effective topology is ρ = ‖sᵀAᶠ‖₁, which is
//! bounded by √N Σ_i m_i |h̃_i| with bias coefficients m_i = |s̃_i| |1 − λ_i|.
//!
//! The fair filter keeps every frequency with m_i ≤ τ·max(m) untouched and
//! scales each remaining frequency so that m_i h̃_i equals the mean of m over
//! the kept frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectral::{FilterResponse, GraphSignal, Spectrum};

/// m_i = |s̃_i| · |1 − λ_i|.
pub fn bias_coefficients(spec: &Spectrum, s: &GraphSignal) -> Result<Vec<f64>> {
    check_len(spec.len(), s.len())?;
    check_sensitive(s)?;
    let s_tilde = spec.gft(s)?;
    Ok(s_tilde
        .as_slice()
        .iter()
        .zip(spec.eigenvalues())
        .map(|(c, l)| c.abs() * (1.0 - l).abs())
        .collect())
}

fn check_sensitive(s: &GraphSignal) -> Result<()> {
    match s
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, &v)| v != 1.0 && v != -1.0)
    {
        Some((index, &value)) => Err(Error::NotBinarySensitive { index, value }),
        None => Ok(()),
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}

/// Indices with m_i > τ·max(m), ascending. Ties at the threshold stay out.
pub fn cutoff_set(m: &[f64], tau: f64) -> Result<Vec<usize>> {
    check_tau(tau)?;
    let m_max = m.iter().copied().fold(0.0, f64::max);
    let threshold = tau * m_max;
    Ok(m.iter()
        .enumerate()
        .filter_map(|(i, &v)| (v > threshold).then_some(i))
        .collect())
}

/// The fairness-aware frequency response for coefficients `m` and threshold `tau`.
pub fn fair_filter(m: &[f64], tau: f64) -> Result<FilterResponse> {
    let cut = cutoff_set(m, tau)?;
    let n = m.len();
    let k = cut.len();
    if k == 0 {
        return Ok(FilterResponse::identity(n));
    }
    if k == n {
        return Err(Error::AllFrequenciesCut(n));
    }
    let c = complement_mean(m, &cut);
    let mut gains = vec![1.0; n];
    for &i in &cut {
        debug_assert!(m[i] > 0.0, "cutoff members have m_i > tau * m_max >= 0");
        gains[i] = c / m[i];
    }
    FilterResponse::new(gains)
}

/// (1 / (N − k)) Σ_{j ∉ 𝒞} m_j. `cut` must be sorted.
fn complement_mean(m: &[f64], cut: &[usize]) -> f64 {
    let mut sum = 0.0;
    let mut next = cut.iter().peekable();
    for (j, &v) in m.iter().enumerate() {
        if next.peek() == Some(&&j) {
            next.next();
        } else {
            sum += v;
        }
    }
    sum / (m.len() - cut.len()) as f64
}

/// Constant filter with the same mean gain (hence the same ℓ₁ norm) as `h_fair`.
pub fn uniform_counterpart(h_fair: &FilterResponse) -> FilterResponse {
    FilterResponse::new(vec![h_fair.mean(); h_fair.len()]).expect("mean of finite gains is finite")
}

/// Aᶠ = V (I − Λ) diag(h̃) Vᵀ.
pub fn effective_topology(spec: &Spectrum, h: &FilterResponse) -> Result<DenseMatrix> {
    check_len(spec.len(), h.len())?;
    let weights: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .zip(h.gains())
        .map(|(l, g)| (1.0 - l) * g)
        .collect();
    Ok(spec.operator(&weights))
}

/// ρ = ‖sᵀ Aᶠ‖₁, evaluated from the dense product.
pub fn correlation_rho(s: &GraphSignal, a_f: &DenseMatrix) -> Result<f64> {
    check_len(a_f.rows(), s.len())?;
    Ok(a_f.t_matvec(s.as_slice())?.iter().map(|v| v.abs()).sum())
}

/// √N Σ_i m_i |h̃_i|.
pub fn rho_upper_bound(spec: &Spectrum, s: &GraphSignal, h: &FilterResponse) -> Result<f64> {
    check_len(spec.len(), h.len())?;
    let m = bias_coefficients(spec, s)?;
    Ok(weighted_bias(&m, h) * (spec.len() as f64).sqrt())
}

/// Σ_i m_i |h̃_i|, the filter-dependent factor of the bound.
pub fn weighted_bias(m: &[f64], h: &FilterResponse) -> f64 {
    m.iter().zip(h.gains()).map(|(m, g)| m * g.abs()).sum()
}

/// Xᶠ = V diag(h̃) Vᵀ X, applied column by column.
pub fn filter_features(
    spec: &Spectrum,
    h: &FilterResponse,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    spec.apply_filter_columns(h, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub tau: f64,
    pub k: usize,
    pub rho: f64,
    pub rho_bound: f64,
    pub m: Vec<f64>,
    pub cutoff: Vec<usize>,
}

impl BiasReport {
    /// Designs the fair filter for `tau` and measures ρ and its bound under it.
    pub fn compute(spec: &Spectrum, s: &GraphSignal, tau: f64) -> Result<(Self, FilterResponse)> {
        let m = bias_coefficients(spec, s)?;
        let cutoff = cutoff_set(&m, tau)?;
        let h = fair_filter(&m, tau)?;
        let rho = correlation_rho(s, &effective_topology(spec, &h)?)?;
        let rho_bound = weighted_bias(&m, &h) * (spec.len() as f64).sqrt();
        Ok((
            BiasReport {
                tau,
                k: cutoff.len(),
                rho,
                rho_bound,
                m,
                cutoff,
            },
            h,
        ))
    }
}
