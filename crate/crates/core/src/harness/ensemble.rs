//! Deterministic ensemble runs.
//!
//! Sample `s` at size `n` uses the seed `derive_seed(derive_seed(master, n), s)`;
//! couplings and graph edges draw from two child streams of it. Samples are
//! evaluated in parallel but collected and reduced in task order, so outputs
//! do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{homogeneous_optimum, BoundsReport, KRange};
use crate::error::{Error, Result};
use crate::instances::{encode_maxcut, encode_minbisection, sample_instance, Graph, IsingInstance};
use crate::parity::ParityLayout;
use crate::rng::derive_seed;
use crate::sdp::c1_sdp_bound;
use crate::solver::{logical_spectrum, Limits};

use super::config::{EnsembleConfig, ProblemSpec, Quantity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: usize,
    pub sample: usize,
    pub seed: u64,
    /// One value per column of the run; NaN when unavailable.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean.
    pub se: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stat {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let count = v.len();
        if count == 0 {
            return Stat {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            f64::NAN
        };
        Stat {
            count,
            mean,
            variance,
            se: (variance / count as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub samples: usize,
    pub errors: usize,
    /// One entry per column.
    pub stats: Vec<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: EnsembleConfig,
    pub columns: Vec<String>,
    pub records: Vec<SampleRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl EnsembleResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn stat(&self, n: usize, column: &str) -> Option<Stat> {
        let c = self.column(column)?;
        self.aggregates.iter().find(|a| a.n == n).map(|a| a.stats[c])
    }

    /// `(n, mean)` for every size with at least one finite value.
    pub fn means(&self, column: &str) -> Vec<(f64, f64)> {
        self.series(column).into_iter().map(|(n, s)| (n, s.mean)).collect()
    }

    pub fn series(&self, column: &str) -> Vec<(f64, Stat)> {
        let Some(c) = self.column(column) else {
            return Vec::new();
        };
        self.aggregates
            .iter()
            .filter(|a| a.stats[c].count > 0)
            .map(|a| (a.n as f64, a.stats[c]))
            .collect()
    }
}

/// Seed of sample `sample` at size `n`.
pub fn sample_seed(master: u64, n: usize, sample: usize) -> u64 {
    derive_seed(derive_seed(master, n as u64), sample as u64)
}

/// Instance and underlying graph for one sample.
pub fn build_instance(cfg: &EnsembleConfig, n: usize, seed: u64) -> Result<(IsingInstance, Graph)> {
    let graph_spec = cfg.graph.at(n, derive_seed(seed, 1));
    let graph = graph_spec.realize()?;
    let inst = match cfg.problem {
        ProblemSpec::Ising => sample_instance(&cfg.distribution, &graph_spec, derive_seed(seed, 0))?,
        ProblemSpec::MaxCut => encode_maxcut(&graph)?,
        ProblemSpec::MinBisection { penalty } => encode_minbisection(&graph, penalty)?,
    };
    Ok((inst, graph))
}

fn evaluate(cfg: &EnsembleConfig, columns: &[&str], n: usize, seed: u64) -> Result<Vec<f64>> {
    let (inst, graph) = build_instance(cfg, n, seed)?;
    let layout = ParityLayout::new(n)?;
    let k_hat = match cfg.k_range()? {
        KRange::Full => layout.q,
        KRange::UpTo(k) => k.min(layout.q),
    };
    let wants = |q: Quantity| cfg.quantities.contains(&q);
    let mut k_need = cfg.quantities.iter().map(|q| q.defect_order()).max().unwrap_or(0);
    if wants(Quantity::CHat) {
        k_need = k_need.max(k_hat);
    }
    k_need = k_need.min(layout.q);
    let mut limits = Limits::default();
    if k_need >= 3 {
        limits = limits.with_high_order();
    }
    let needs_spectrum = cfg
        .quantities
        .iter()
        .any(|q| !matches!(q, Quantity::C1Sdp));
    let report: Option<BoundsReport> = if needs_spectrum && k_need > 0 {
        Some(homogeneous_optimum(&inst, &layout, KRange::UpTo(k_need), &limits)?)
    } else {
        None
    };
    let spectrum = match (&report, needs_spectrum) {
        (Some(r), _) => Some((r.l0, r.e, r.gap)),
        (None, true) => {
            let s = logical_spectrum(&inst, &limits)?;
            Some((s.l0, s.e, s.gap))
        }
        (None, false) => None,
    };
    let sdp = if wants(Quantity::C1Sdp) {
        if !matches!(cfg.problem, ProblemSpec::MaxCut) {
            return Err(Error::Config("c1_sdp is defined for MaxCut ensembles only".into()));
        }
        Some(c1_sdp_bound(&graph)?.c1_sdp)
    } else {
        None
    };
    let pick = |v: Option<&f64>| v.copied().unwrap_or(f64::NAN);
    Ok(columns
        .iter()
        .map(|&col| {
            let r = report.as_ref();
            match col {
                "l0" => spectrum.map_or(f64::NAN, |s| s.0),
                "e" => spectrum.map_or(f64::NAN, |s| s.1),
                "gap" => spectrum.map_or(f64::NAN, |s| s.2),
                "a1" => pick(r.and_then(|r| r.a.first())),
                "a2" => pick(r.and_then(|r| r.a.get(1))),
                "c_minus_1" => pick(r.and_then(|r| r.lower.first())),
                "c_minus_2" => pick(r.and_then(|r| r.lower.get(1))),
                "c_hat" => r
                    .map(|r| r.lower.iter().take(k_hat).copied().fold(f64::NEG_INFINITY, f64::max))
                    .filter(|x| x.is_finite())
                    .unwrap_or(f64::NAN),
                "c0" => pick(r.and_then(|r| r.upper.first())),
                "c1" => pick(r.and_then(|r| r.upper.get(1))),
                "c2" => pick(r.and_then(|r| r.upper.get(2))),
                "c1_sdp" => sdp.unwrap_or(f64::NAN),
                _ => f64::NAN,
            }
        })
        .collect())
}

/// Runs every sample of the configuration and aggregates per size.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let columns = cfg.columns();
    let tasks: Vec<(usize, usize)> = cfg
        .n_range
        .iter()
        .flat_map(|&n| (0..cfg.samples.samples(n)).map(move |s| (n, s)))
        .collect();
    let work = || -> Vec<SampleRecord> {
        tasks
            .par_iter()
            .map(|&(n, sample)| {
                let seed = sample_seed(cfg.master_seed, n, sample);
                match evaluate(cfg, &columns, n, seed) {
                    Ok(values) => SampleRecord {
                        n,
                        sample,
                        seed,
                        values,
                        error: None,
                    },
                    Err(e) => SampleRecord {
                        n,
                        sample,
                        seed,
                        values: vec![f64::NAN; columns.len()],
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    };
    let records = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    let aggregates = cfg
        .n_range
        .iter()
        .map(|&n| {
            let rows: Vec<&SampleRecord> = records.iter().filter(|r| r.n == n).collect();
            Aggregate {
                n,
                samples: rows.len(),
                errors: rows.iter().filter(|r| r.error.is_some()).count(),
                stats: (0..columns.len()).map(|c| Stat::of(rows.iter().map(|r| r.values[c]))).collect(),
            }
        })
        .collect();
    Ok(EnsembleResult {
        config: cfg.clone(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SampleSchedule;
    use crate::instances::DistributionSpec;

    #[test]
    fn stat_basics() {
        let s = Stat::of([1.0, 2.0, 3.0, f64::NAN]);
        assert_eq!(s.count, 3);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 1.0);
        assert!((s.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn antiferro_ensemble_is_exact() {
        let mut cfg = EnsembleConfig::new(
            DistributionSpec::Bimodal { p: 1.0 },
            vec![6, 9],
            SampleSchedule::Fixed { count: 3 },
        );
        cfg.quantities = vec![Quantity::CMinus1];
        let r = run_ensemble(&cfg).unwrap();
        let s6 = r.stat(6, "c_minus_1").unwrap();
        let s9 = r.stat(9, "c_minus_1").unwrap();
        assert_eq!((s6.mean, s6.variance), (8.0, 0.0));
        // Odd n: l0 = -4, e = 0, a1 = -18.
        assert_eq!((s9.mean, s9.variance), (18.0, 0.0));
    }

    #[test]
    fn errors_are_recorded_per_sample() {
        let mut cfg = EnsembleConfig::new(
            DistributionSpec::Normal { mean: 0.0, std_dev: 1.0 },
            vec![4],
            SampleSchedule::Fixed { count: 2 },
        );
        cfg.quantities = vec![Quantity::L0, Quantity::C1Sdp];
        let r = run_ensemble(&cfg).unwrap();
        assert_eq!(r.aggregates[0].errors, 2);
        assert!(r.records.iter().all(|x| x.error.is_some()));
    }
}
