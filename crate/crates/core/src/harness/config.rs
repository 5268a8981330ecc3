//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::KRange;
use crate::error::{Error, Result};
use crate::instances::{DistributionSpec, GraphSpec, Penalty};

/// Observables recorded per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    L0,
    E,
    Gap,
    A1,
    A2,
    #[serde(rename = "c_minus_1")]
    CMinus1,
    #[serde(rename = "c_minus_2")]
    CMinus2,
    CHat,
    /// Upper bounds `c_0`, `c_1`, `c_2`.
    UpperBounds,
    C1Sdp,
}

impl Quantity {
    pub const ALL: [Quantity; 10] = [
        Quantity::L0,
        Quantity::E,
        Quantity::Gap,
        Quantity::A1,
        Quantity::A2,
        Quantity::CMinus1,
        Quantity::CMinus2,
        Quantity::CHat,
        Quantity::UpperBounds,
        Quantity::C1Sdp,
    ];

    /// CSV column names produced by this quantity.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Quantity::L0 => &["l0"],
            Quantity::E => &["e"],
            Quantity::Gap => &["gap"],
            Quantity::A1 => &["a1"],
            Quantity::A2 => &["a2"],
            Quantity::CMinus1 => &["c_minus_1"],
            Quantity::CMinus2 => &["c_minus_2"],
            Quantity::CHat => &["c_hat"],
            Quantity::UpperBounds => &["c0", "c1", "c2"],
            Quantity::C1Sdp => &["c1_sdp"],
        }
    }

    /// Largest defect count needed, ignoring `c_hat`.
    pub(crate) fn defect_order(self) -> usize {
        match self {
            Quantity::L0 | Quantity::E | Quantity::Gap | Quantity::C1Sdp | Quantity::CHat => 0,
            Quantity::A1 | Quantity::CMinus1 => 1,
            Quantity::A2 | Quantity::CMinus2 | Quantity::UpperBounds => 2,
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| {
                serde_json::to_value(q)
                    .ok()
                    .and_then(|v| v.as_str().map(|x| x == s))
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::Config(format!("unknown quantity {s:?}")))
    }
}

/// Graph family, instantiated per size and sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphTemplate {
    Complete,
    ErdosRenyi { p_edge: f64 },
}

impl GraphTemplate {
    pub fn at(&self, n: usize, seed: u64) -> GraphSpec {
        match *self {
            GraphTemplate::Complete => GraphSpec::Complete { n },
            GraphTemplate::ErdosRenyi { p_edge } => GraphSpec::ErdosRenyi { n, p_edge, seed },
        }
    }
}

/// How a sample turns into an Ising instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Couplings drawn from the distribution on the graph's edges.
    #[default]
    Ising,
    MaxCut,
    MinBisection {
        #[serde(default = "auto_penalty")]
        penalty: Penalty,
    },
}

fn auto_penalty() -> Penalty {
    Penalty::Auto
}

/// Number of samples drawn at each size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSchedule {
    /// `max(floor, round(start · 2^-(n - n0)))`.
    Geometric { start: f64, n0: usize, floor: usize },
    Fixed { count: usize },
}

impl Default for SampleSchedule {
    fn default() -> Self {
        SampleSchedule::Geometric {
            start: 1e5,
            n0: 4,
            floor: 32,
        }
    }
}

impl SampleSchedule {
    pub fn samples(&self, n: usize) -> usize {
        match *self {
            SampleSchedule::Geometric { start, n0, floor } => {
                let e = n as f64 - n0 as f64;
                ((start * (-e).exp2()).round() as usize).max(floor)
            }
            SampleSchedule::Fixed { count } => count,
        }
    }

    fn min_over(&self, ns: &[usize]) -> usize {
        ns.iter().map(|&n| self.samples(n)).min().unwrap_or(0)
    }
}

/// Defect range as it appears in config files: an integer or `"full"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KMaxSetting {
    Count(usize),
    Word(String),
}

impl KMaxSetting {
    pub fn to_range(&self) -> Result<KRange> {
        match self {
            KMaxSetting::Count(k) => Ok(KRange::UpTo(*k)),
            KMaxSetting::Word(w) => w.parse(),
        }
    }
}

impl From<KRange> for KMaxSetting {
    fn from(k: KRange) -> Self {
        match k {
            KRange::UpTo(k) => KMaxSetting::Count(k),
            KRange::Full => KMaxSetting::Word("full".into()),
        }
    }
}

fn default_distribution() -> DistributionSpec {
    DistributionSpec::Normal {
        mean: 0.0,
        std_dev: 1.0,
    }
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::L0, Quantity::E, Quantity::Gap, Quantity::A1, Quantity::CMinus1]
}

fn default_k_max() -> KMaxSetting {
    KMaxSetting::Count(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionSpec,
    #[serde(default = "default_graph")]
    pub graph: GraphTemplate,
    #[serde(default)]
    pub problem: ProblemSpec,
    pub n_range: Vec<usize>,
    #[serde(default)]
    pub samples: SampleSchedule,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    /// Defect range used for `c_hat`.
    #[serde(default = "default_k_max")]
    pub k_max: KMaxSetting,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub threads: usize,
}

fn default_graph() -> GraphTemplate {
    GraphTemplate::Complete
}

impl EnsembleConfig {
    /// A K_n ensemble over `n_range` with the default observables.
    pub fn new(distribution: DistributionSpec, n_range: Vec<usize>, samples: SampleSchedule) -> Self {
        EnsembleConfig {
            name: String::new(),
            distribution,
            graph: GraphTemplate::Complete,
            problem: ProblemSpec::Ising,
            n_range,
            samples,
            master_seed: 0,
            quantities: default_quantities(),
            k_max: default_k_max(),
            threads: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: EnsembleConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn k_range(&self) -> Result<KRange> {
        self.k_max.to_range()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.n_range.is_empty() {
            return cfg_err("n_range is empty".into());
        }
        if let Some(&n) = self.n_range.iter().find(|&&n| !(2..=64).contains(&n)) {
            return cfg_err(format!("size n = {n} outside 2..=64"));
        }
        if self.quantities.is_empty() {
            return cfg_err("no quantities requested".into());
        }
        if self.samples.min_over(&self.n_range) < 2 {
            return cfg_err("at least 2 samples per size are needed for variances".into());
        }
        if let SampleSchedule::Geometric { start, .. } = self.samples {
            if !(start > 0.0 && start.is_finite()) {
                return cfg_err(format!("geometric schedule start must be positive, got {start}"));
            }
        }
        if let GraphTemplate::ErdosRenyi { p_edge } = self.graph {
            if !(0.0..=1.0).contains(&p_edge) {
                return cfg_err(format!("p_edge = {p_edge} not in [0, 1]"));
            }
        }
        self.distribution
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.k_range()?;
        Ok(())
    }

    /// Data columns produced for the requested quantities, in request order.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut seen = Vec::new();
        for q in &self.quantities {
            for c in q.columns() {
                if !seen.contains(c) {
                    seen.push(*c);
                }
            }
        }
        seen
    }
}
