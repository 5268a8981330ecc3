//! Closed-form limits used as oracles for the numerical routines.

use serde::{Deserialize, Serialize};

use crate::solver::binomial;

/// Uniform ferromagnet `J_ij = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerroLimit {
    pub n: usize,
    pub l0: f64,
    pub gap: f64,
    pub a1: f64,
    pub c: f64,
}

pub fn ferro_limit(n: usize) -> FerroLimit {
    let nf = n as f64;
    let l0 = -nf * (nf - 1.0) / 2.0;
    FerroLimit {
        n,
        l0,
        gap: 2.0 * (nf - 1.0),
        a1: l0 + 2.0,
        c: 2.0 * nf - 4.0,
    }
}

/// Uniform antiferromagnet `J_ij = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiferroLimit {
    pub n: usize,
    /// Only for even `n`.
    pub l0: Option<f64>,
    pub gap: Option<f64>,
    /// Only for `n` divisible by 3.
    pub a1: Option<f64>,
    pub c_minus_1: f64,
}

pub fn antiferro_limit(n: usize) -> AntiferroLimit {
    let nf = n as f64;
    let even = n % 2 == 0;
    let third = n % 3 == 0;
    AntiferroLimit {
        n,
        l0: even.then_some(-nf / 2.0),
        gap: even.then_some(2.0),
        a1: third.then(|| -(nf / 2.0) * (1.0 + nf / 3.0)),
        c_minus_1: nf * nf / 6.0 + if third { 2.0 } else { 4.0 / 3.0 },
    }
}

/// Covariance of two logical energies under i.i.d. unit-variance couplings,
/// given the configurations as ±1 vectors.
pub fn eigenvalue_covariance(sigma: &[i8], tau: &[i8]) -> f64 {
    assert_eq!(sigma.len(), tau.len(), "configurations must have equal length");
    let overlap: f64 = sigma.iter().zip(tau).map(|(&s, &t)| f64::from(s) * f64::from(t)).sum();
    0.5 * overlap * overlap - sigma.len() as f64 / 2.0
}

/// Mean energy `μ((n-2k)² - n)/2` of a configuration with `k` down spins
/// when every coupling has mean `μ`.
pub fn mean_split(n: usize, k: usize, mu: f64) -> f64 {
    assert!(k <= n, "k must not exceed n");
    let d = n as f64 - 2.0 * k as f64;
    mu * (d * d - n as f64) / 2.0
}

/// Number of configurations with exactly `k` down spins.
pub fn level_count(n: usize, k: usize) -> u128 {
    binomial(n, k)
}

/// `Σ_{i<j} σ_i σ_j` via `((Σσ)² - n)/2`.
pub fn pair_sum(sigma: &[i8]) -> i64 {
    let s: i64 = sigma.iter().map(|&x| i64::from(x)).sum();
    (s * s - sigma.len() as i64) / 2
}
