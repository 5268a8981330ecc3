//! Extreme-value model of spin-glass ground-state statistics.
//!
//! The minimum of `m` independent `N(0, σ²)` variables is modeled by a Gumbel
//! law with location `α = F⁻¹(1 - 1/m)` and scale `β = F⁻¹(1 - 1/(e m)) - α`
//! (`F⁻¹` the standard normal quantile), so its mean is `-σ(α + Γβ)`.
//! Correlations among the `2^n` logical energies are absorbed by counting
//! only `2^(δn)` effective independent levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf_inv, erf_inv_tail_approx, upper_tail_quantile};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Fitted effective-dimension factor δ.
pub const DEFAULT_DELTA: f64 = 0.798158;

/// Reference `n^{3/2}` coefficient of the SK ground-state energy.
pub const PARISI_REFERENCE: f64 = -0.763167;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
}

impl GumbelParams {
    /// Mean of the minimum of `m` standard normals.
    pub fn mean_min(&self) -> f64 {
        -(self.alpha + EULER_GAMMA * self.beta)
    }
}

/// Gumbel parameters for the extreme of `m >= 2` standard normals.
pub fn gumbel_params(m: f64) -> Result<GumbelParams> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::invalid(format!("gumbel parameters need finite m >= 2, got {m}")));
    }
    let alpha = upper_tail_quantile(1.0 / m)?;
    let beta = upper_tail_quantile(1.0 / (std::f64::consts::E * m))? - alpha;
    Ok(GumbelParams { alpha, beta, m })
}

/// Expected minimum `-σ(α + Γβ)` of `m` independent `N(0, σ²)` variables.
pub fn expected_min_independent(m: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(sigma * gumbel_params(m)?.mean_min())
}

/// Standard deviation `√(n(n-1)/2)` of a logical energy under N(0,1) couplings.
pub fn sk_sigma(n: usize) -> f64 {
    ((n * (n.saturating_sub(1))) as f64 / 2.0).sqrt()
}

/// `√(δ ln 2)`, the modeled `n^{3/2}` coefficient of `-l0`.
pub fn asymptotic_constant(delta: f64) -> f64 {
    (delta * std::f64::consts::LN_2).sqrt()
}

/// Polynomial count factor `p(n)` with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountPolynomial {
    pub coeffs: Vec<f64>,
}

impl Default for CountPolynomial {
    /// `n(n+1)/12`.
    fn default() -> Self {
        CountPolynomial {
            coeffs: vec![0.0, 1.0 / 12.0, 1.0 / 12.0],
        }
    }
}

impl CountPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        CountPolynomial { coeffs }
    }

    /// `p(n)^power`, used for profiles with several defects.
    pub fn powered(&self, power: u32) -> PoweredCount<'_> {
        PoweredCount { base: self, power }
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * n + c)
    }
}

pub struct PoweredCount<'a> {
    base: &'a CountPolynomial,
    power: u32,
}

impl PoweredCount<'_> {
    pub fn eval(&self, n: f64) -> f64 {
        self.base.eval(n).powi(self.power as i32)
    }
}

fn effective_levels(n: usize, delta: f64) -> f64 {
    (delta * n as f64).exp2()
}

/// Modeled mean ground energy `M_ind(2^(δn))` with `σ = √(n(n-1)/2)`.
pub fn model_l0(n: usize, delta: f64) -> Result<f64> {
    expected_min_independent(effective_levels(n, delta), sk_sigma(n))
}

/// Modeled mean single-violator energy `M_ind(2^(δn) p(n))` for `p(n) = n(n+1)/12`.
pub fn expected_a1_independent(n: usize, delta: f64) -> Result<f64> {
    expected_a1_with(n, delta, &CountPolynomial::default())
}

pub fn expected_a1_with(n: usize, delta: f64, p: &CountPolynomial) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("single violators need n >= 3, got {n}")));
    }
    expected_min_independent(effective_levels(n, delta) * p.eval(n as f64), sk_sigma(n))
}

/// Model of `(l0 - a_k)/k` when `S_k` contributes `2^(δn) p_k(n)` levels.
pub fn model_defect_difference(n: usize, delta: f64, k: u32, p: &CountPolynomial) -> Result<f64> {
    let levels = effective_levels(n, delta);
    let sigma = sk_sigma(n);
    let l0 = expected_min_independent(levels, sigma)?;
    let ak = expected_min_independent(levels * p.powered(k).eval(n as f64), sigma)?;
    Ok((l0 - ak) / k as f64)
}

/// Leading-order `l0 - a1`: `√n ln(n(n+1)/12) / (2√(δ ln 2))`.
pub fn f1_scaling(n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    nf.sqrt() * (nf * (nf + 1.0) / 12.0).ln() / (2.0 * asymptotic_constant(delta))
}

/// Successive closed-form approximations of the independent-level model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxChain {
    /// `erf⁻¹(1 - 2/m) ≈ √((δn - 2) ln 2)` with `m = 2^(δn)`.
    pub alpha_approx: f64,
    /// Same for the `e m` quantile: `√((δn - 2) ln 2 + 1)`.
    pub alpha_beta_approx: f64,
    /// `-√(n(n-1)) √((δn - 2) ln 2)`.
    pub l0_approx: f64,
    /// `-√(n(n-1)) √((δn - 2) ln 2 + ε)`, `ε = ln p(n)`.
    pub a1_approx: f64,
    /// `√(n(n-1)) ε / (2√(δ n ln 2))`.
    pub diff_approx: f64,
}

pub fn approx_chain(n: usize, delta: f64, p: &CountPolynomial) -> Result<ApproxChain> {
    let nf = n as f64;
    let dn = delta * nf;
    if !(dn > 2.0) {
        return Err(Error::invalid(format!("approximation needs δn > 2, got {dn}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let root = (nf * (nf - 1.0)).sqrt();
    let eps = p.eval(nf).ln();
    let base = (dn - 2.0) * ln2;
    Ok(ApproxChain {
        alpha_approx: base.sqrt(),
        alpha_beta_approx: (base + 1.0).sqrt(),
        l0_approx: -root * base.sqrt(),
        a1_approx: -root * (base + eps).sqrt(),
        diff_approx: root * eps / (2.0 * (dn * ln2).sqrt()),
    })
}

/// The un-approximated counterparts of [`ApproxChain`], written with `erf⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactChain {
    pub erf_inv_alpha: f64,
    pub erf_inv_alpha_beta: f64,
    /// `-√(n(n-1)) erf⁻¹(1 - 2/m)`, the location term alone.
    pub l0_location: f64,
    pub a1_location: f64,
    pub diff_location: f64,
    /// Full Gumbel means.
    pub l0_mean: f64,
    pub a1_mean: f64,
}

pub fn exact_chain(n: usize, delta: f64, p: &CountPolynomial) -> Result<ExactChain> {
    let nf = n as f64;
    let root = (nf * (nf - 1.0)).sqrt();
    let m0 = effective_levels(n, delta);
    let m1 = m0 * p.eval(nf);
    let ea = erf_inv(1.0 - 2.0 / m0)?;
    let eab = erf_inv(1.0 - 2.0 / (std::f64::consts::E * m0))?;
    let ea1 = erf_inv(1.0 - 2.0 / m1)?;
    let l0_mean = expected_min_independent(m0, sk_sigma(n))?;
    let a1_mean = expected_min_independent(m1, sk_sigma(n))?;
    Ok(ExactChain {
        erf_inv_alpha: ea,
        erf_inv_alpha_beta: eab,
        l0_location: -root * ea,
        a1_location: -root * ea1,
        diff_location: root * (ea1 - ea),
        l0_mean,
        a1_mean,
    })
}

/// Crude tail inverse used by the closed-form derivation.
pub fn crude_erf_inv(x: f64) -> f64 {
    erf_inv_tail_approx(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvtCalibration {
    pub delta: f64,
    pub fit_range: (usize, usize),
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// One-parameter least-squares fit of δ to `(n, mean l0)` data.
pub fn calibrate_delta(points: &[(usize, f64)]) -> Result<EvtCalibration> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "delta calibration needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, y)| n < 2 || !y.is_finite()) {
        return Err(Error::invalid("calibration data must have n >= 2 and finite energies"));
    }
    let n_min = points.iter().map(|p| p.0).min().unwrap_or(0);
    let n_max = points.iter().map(|p| p.0).max().unwrap_or(0);
    if n_min == n_max {
        return Err(Error::invalid("calibration data needs at least two distinct sizes"));
    }
    let sse = |delta: f64| -> f64 {
        points
            .iter()
            .map(|&(n, y)| match model_l0(n, delta) {
                Ok(m) => (y - m).powi(2),
                Err(_) => f64::INFINITY,
            })
            .sum()
    };
    // Smallest δ keeping 2^(δ n_min) >= 2.
    let lo = 1.0 / n_min as f64 + 1e-12;
    let hi = 1.0;
    let grid = 600;
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|i| lo + i as f64 * step)
        .map(|d| (sse(d), d))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|x| x.1)
        .unwrap_or(lo);
    let (a, b) = ((best - step).max(lo), (best + step).min(hi));
    let delta = golden_section(sse, a, b, 1e-12);
    let residual = (sse(delta) / points.len() as f64).sqrt();
    if !residual.is_finite() {
        return Err(Error::invalid("calibration diverged"));
    }
    Ok(EvtCalibration {
        delta,
        fit_range: (n_min, n_max),
        residual,
    })
}

/// Minimizer of a unimodal function on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// One row of the model curves: ground energy, single-violator energy, and their scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub n: usize,
    pub l0_model: f64,
    pub a1_model: f64,
    pub f1: f64,
}

pub fn model_curves(n_values: &[usize], delta: f64, p: &CountPolynomial) -> Result<Vec<ModelRow>> {
    n_values
        .iter()
        .map(|&n| {
            Ok(ModelRow {
                n,
                l0_model: model_l0(n, delta)?,
                a1_model: expected_a1_with(n, delta, p)?,
                f1: f1_scaling(n, delta),
            })
        })
        .collect()
}
