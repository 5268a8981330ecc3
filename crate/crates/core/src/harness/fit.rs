//! Least-squares fits of `y = β n^α + γ`.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::golden_section;

pub const ALPHA_BRACKET: (f64, f64) = (0.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Covariance of `(α, β, γ)`; zero when it cannot be estimated.
    pub covariance: [[f64; 3]; 3],
    /// Root-mean-square (weighted) residual.
    pub rms: f64,
    /// Set when α is not identifiable from the data.
    pub degenerate: bool,
}

impl FitResult {
    pub fn alpha_stderr(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn predict(&self, n: f64) -> f64 {
        self.beta * n.powf(self.alpha) + self.gamma
    }
}

/// Unweighted fit.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    fit_power_law_weighted(points, &vec![1.0; points.len()])
}

/// Fit minimizing `Σ w_i (y_i - β n_i^α - γ)²`, e.g. with `w = 1/SE²`.
pub fn fit_power_law_weighted(points: &[(f64, f64)], weights: &[f64]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::invalid(format!("power-law fit needs at least 4 points, got {}", points.len())));
    }
    if weights.len() != points.len() {
        return Err(Error::invalid("one weight per point required"));
    }
    if points.iter().any(|&(n, y)| !(n > 0.0) || !n.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("fit points need finite y and positive finite n"));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be positive and finite"));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("n values must be distinct"));
    }

    let wsum: f64 = weights.iter().sum();
    let ymean = points.iter().zip(weights).map(|(p, w)| w * p.1).sum::<f64>() / wsum;
    let spread = points.iter().map(|p| (p.1 - ymean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * ymean.abs().max(1.0) {
        return Ok(FitResult {
            alpha: 0.0,
            beta: 0.0,
            gamma: ymean,
            covariance: [[0.0; 3]; 3],
            rms: 0.0,
            degenerate: true,
        });
    }

    let sse_at = |alpha: f64| linear_part(points, weights, alpha).2;
    let (lo, hi) = ALPHA_BRACKET;
    let grid = 300;
    let h = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|i| lo + h * i as f64)
        .map(|a| (sse_at(a), a))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|x| x.1)
        .unwrap_or(1.0);
    let alpha = golden_section(sse_at, (best - h).max(lo), (best + h).min(hi), 1e-14);
    let (beta, gamma, sse) = linear_part(points, weights, alpha);
    let (alpha, beta, gamma, sse) = gauss_newton_polish(points, weights, alpha, beta, gamma, sse);

    let dof = points.len() as f64 - 3.0;
    let rms = (sse / wsum).sqrt();
    let jtj = jacobian_gram(points, weights, alpha, beta);
    let covariance = match jtj.try_inverse() {
        Some(inv) if dof > 0.0 && beta.abs() > 1e-14 => {
            let s2 = sse / dof;
            let mut c = [[0.0; 3]; 3];
            for (i, row) in c.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = s2 * inv[(i, j)];
                }
            }
            c
        }
        _ => [[0.0; 3]; 3],
    };
    Ok(FitResult {
        alpha,
        beta,
        gamma,
        covariance,
        rms,
        degenerate: beta.abs() <= 1e-14,
    })
}

/// Weighted linear least squares for `(β, γ)` at fixed α.
fn linear_part(points: &[(f64, f64)], weights: &[f64], alpha: f64) -> (f64, f64, f64) {
    let k = points.len();
    let a = DMatrix::from_fn(k, 2, |i, j| {
        let s = weights[i].sqrt();
        if j == 0 {
            s * points[i].0.powf(alpha)
        } else {
            s
        }
    });
    let b = DVector::from_fn(k, |i, _| weights[i].sqrt() * points[i].1);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12 * svd.singular_values.max())
        .unwrap_or_else(|_| DVector::zeros(2));
    let r = &a * &x - &b;
    (x[0], x[1], r.norm_squared())
}

fn residuals_sse(points: &[(f64, f64)], weights: &[f64], a: f64, b: f64, g: f64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(&(n, y), w)| w * (y - b * n.powf(a) - g).powi(2))
        .sum()
}

fn jacobian_gram(points: &[(f64, f64)], weights: &[f64], alpha: f64, beta: f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for (&(n, _), &w) in points.iter().zip(weights) {
        let p = n.powf(alpha);
        let row = [beta * p * n.ln(), p, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += w * row[i] * row[j];
            }
        }
    }
    m
}

/// One Gauss–Newton step on all three parameters, kept only if it helps.
fn gauss_newton_polish(
    points: &[(f64, f64)],
    weights: &[f64],
    a: f64,
    b: f64,
    g: f64,
    sse: f64,
) -> (f64, f64, f64, f64) {
    let jtj = jacobian_gram(points, weights, a, b);
    let mut jtr = nalgebra::Vector3::zeros();
    for (&(n, y), &w) in points.iter().zip(weights) {
        let p = n.powf(a);
        let r = y - b * p - g;
        jtr += w * r * nalgebra::Vector3::new(b * p * n.ln(), p, 1.0);
    }
    match jtj.try_inverse() {
        Some(inv) => {
            let d = inv * jtr;
            let (a2, b2, g2) = (a + d[0], b + d[1], g + d[2]);
            let s2 = residuals_sse(points, weights, a2, b2, g2);
            if s2.is_finite() && s2 < sse && (ALPHA_BRACKET.0..=ALPHA_BRACKET.1).contains(&a2) {
                (a2, b2, g2, s2)
            } else {
                (a, b, g, sse)
            }
        }
        None => (a, b, g, sse),
    }
}
