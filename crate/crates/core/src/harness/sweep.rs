//! Scaling exponent of `c̄₋₁` across coupling distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instances::{DistributionKind, DistributionSpec};
use crate::rng::derive_seed;

use super::config::{EnsembleConfig, Quantity};
use super::ensemble::run_ensemble;
use super::fit::{fit_power_law, fit_power_law_weighted, FitResult};

/// Default μ/σ grid.
pub const DEFAULT_RATIOS: [f64; 9] = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kind: DistributionKind,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: DistributionKind,
    pub ratio: f64,
    pub alpha: f64,
    pub alpha_se: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rms: f64,
    pub error: Option<String>,
}

/// Every kind crossed with every ratio.
pub fn grid(kinds: &[DistributionKind], ratios: &[f64]) -> Vec<SweepCell> {
    kinds
        .iter()
        .flat_map(|&kind| ratios.iter().map(move |&ratio| SweepCell { kind, ratio }))
        .collect()
}

/// Fits `c̄₋₁(n) = β n^α + γ` for one cell; `base` supplies sizes, schedule and seed.
pub fn sweep_cell(base: &EnsembleConfig, cell: SweepCell, index: usize, weighted: bool) -> Result<FitResult> {
    let mut cfg = base.clone();
    cfg.distribution = DistributionSpec::with_ratio(cell.kind, cell.ratio)?;
    cfg.quantities = vec![Quantity::CMinus1];
    cfg.master_seed = derive_seed(base.master_seed, index as u64);
    let res = run_ensemble(&cfg)?;
    let series = res.series("c_minus_1");
    let points: Vec<(f64, f64)> = series.iter().map(|(n, s)| (*n, s.mean)).collect();
    if weighted {
        let w: Vec<f64> = series
            .iter()
            .map(|(_, s)| if s.se > 0.0 { 1.0 / (s.se * s.se) } else { 1e12 })
            .collect();
        fit_power_law_weighted(&points, &w)
    } else {
        fit_power_law(&points)
    }
}

/// Runs every cell; failures are reported in the row rather than aborting.
pub fn scaling_sweep(base: &EnsembleConfig, cells: &[SweepCell], weighted: bool) -> Vec<SweepRow> {
    cells
        .par_iter()
        .enumerate()
        .map(|(i, &cell)| match sweep_cell(base, cell, i, weighted) {
            Ok(f) => SweepRow {
                kind: cell.kind,
                ratio: cell.ratio,
                alpha: f.alpha,
                alpha_se: f.alpha_stderr(),
                beta: f.beta,
                gamma: f.gamma,
                rms: f.rms,
                error: None,
            },
            Err(e) => SweepRow {
                kind: cell.kind,
                ratio: cell.ratio,
                alpha: f64::NAN,
                alpha_se: f64::NAN,
                beta: f64::NAN,
                gamma: f64::NAN,
                rms: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect()
}
