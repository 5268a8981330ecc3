//! Logical Ising instances, coupling distributions, random graphs and the
//! MaxCut / MinBisection encodings.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parity::Site;
use crate::rng;

/// Distribution of i.i.d. couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Normal { mean: f64, std_dev: f64 },
    Uniform { low: f64, high: f64 },
    /// `+1` with probability `p`, `-1` otherwise.
    Bimodal { p: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Normal { mean, std_dev } => {
                if !mean.is_finite() || !(std_dev > 0.0 && std_dev.is_finite()) {
                    return Err(Error::invalid(format!(
                        "normal distribution needs finite mean and std_dev > 0 (got {mean}, {std_dev})"
                    )));
                }
            }
            DistributionSpec::Uniform { low, high } => {
                if !(low < high && low.is_finite() && high.is_finite()) {
                    return Err(Error::invalid(format!(
                        "uniform distribution needs low < high (got {low}, {high})"
                    )));
                }
            }
            DistributionSpec::Bimodal { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!("bimodal p must lie in [0,1], got {p}")));
                }
            }
        }
        Ok(())
    }

    /// The ratio μ/σ of mean to standard deviation.
    pub fn ratio(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            DistributionSpec::Normal { mean, std_dev } => Ok(mean / std_dev),
            DistributionSpec::Uniform { low, high } => {
                Ok(3f64.sqrt() * (low + high) / (low - high).abs())
            }
            DistributionSpec::Bimodal { p } => {
                if p == 0.0 || p == 1.0 {
                    return Err(Error::invalid("bimodal ratio undefined for p in {0, 1}"));
                }
                Ok((2.0 * p - 1.0) / (2.0 * (p * (1.0 - p)).sqrt()))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Normal { mean, .. } => mean,
            DistributionSpec::Uniform { low, high } => 0.5 * (low + high),
            DistributionSpec::Bimodal { p } => 2.0 * p - 1.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::Normal { std_dev, .. } => std_dev * std_dev,
            DistributionSpec::Uniform { low, high } => (high - low).powi(2) / 12.0,
            DistributionSpec::Bimodal { p } => 4.0 * p * (1.0 - p),
        }
    }

    /// Member of the family `kind` with the given μ/σ. Normal uses σ = 1,
    /// Uniform uses width 2, Bimodal solves for `p`.
    pub fn with_ratio(kind: DistributionKind, ratio: f64) -> Result<Self> {
        if !ratio.is_finite() {
            return Err(Error::invalid(format!("ratio must be finite, got {ratio}")));
        }
        Ok(match kind {
            DistributionKind::Normal => DistributionSpec::Normal {
                mean: ratio,
                std_dev: 1.0,
            },
            DistributionKind::Uniform => {
                let centre = ratio / 3f64.sqrt();
                DistributionSpec::Uniform {
                    low: centre - 1.0,
                    high: centre + 1.0,
                }
            }
            DistributionKind::Bimodal => {
                let x = ratio / (1.0 + ratio * ratio).sqrt();
                DistributionSpec::Bimodal { p: 0.5 * (1.0 + x) }
            }
        })
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            DistributionSpec::Normal { .. } => DistributionKind::Normal,
            DistributionSpec::Uniform { .. } => DistributionKind::Uniform,
            DistributionSpec::Bimodal { .. } => DistributionKind::Bimodal,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Normal { mean, std_dev } => Normal::new(mean, std_dev)
                .expect("validated normal parameters")
                .sample(rng),
            DistributionSpec::Uniform { low, high } => rng.gen_range(low..high),
            DistributionSpec::Bimodal { p } => {
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Normal,
    Uniform,
    Bimodal,
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(DistributionKind::Normal),
            "uniform" => Ok(DistributionKind::Uniform),
            "bimodal" => Ok(DistributionKind::Bimodal),
            other => Err(Error::Config(format!("unknown distribution kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistributionKind::Normal => "normal",
            DistributionKind::Uniform => "uniform",
            DistributionKind::Bimodal => "bimodal",
        })
    }
}

/// Graph on which couplings live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Complete { n: usize },
    ErdosRenyi { n: usize, p_edge: f64, seed: u64 },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::Complete { n } | GraphSpec::ErdosRenyi { n, .. } => n,
        }
    }

    /// Draws the edge set. Erdős–Rényi graphs include each pair independently
    /// with probability `p_edge`, visiting pairs in lexicographic order.
    pub fn realize(&self) -> Result<Graph> {
        match *self {
            GraphSpec::Complete { n } => {
                if n == 0 {
                    return Err(Error::invalid("graph needs at least one vertex"));
                }
                let edges = all_pairs(n).collect();
                Ok(Graph { n, edges })
            }
            GraphSpec::ErdosRenyi { n, p_edge, seed } => {
                if n == 0 {
                    return Err(Error::invalid("graph needs at least one vertex"));
                }
                if !(0.0..=1.0).contains(&p_edge) {
                    return Err(Error::invalid(format!("edge probability {p_edge} not in [0,1]")));
                }
                let mut r = rng::stream(seed);
                let edges = all_pairs(n).filter(|_| r.gen::<f64>() < p_edge).collect();
                Ok(Graph { n, edges })
            }
        }
    }
}

fn all_pairs(n: usize) -> impl Iterator<Item = Site> {
    (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| Site { i, j }))
}

/// A realized simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<Site>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Site>) -> Result<Self> {
        for e in &edges {
            if e.i == 0 || e.i >= e.j || e.j > n {
                return Err(Error::invalid(format!("edge {e} invalid for n = {n}")));
            }
        }
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph { n, edges })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("cycle needs n >= 3"));
        }
        let mut edges: Vec<Site> = (1..n).map(|i| Site { i, j: i + 1 }).collect();
        edges.push(Site { i: 1, j: n });
        Graph::new(n, edges)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.i - 1] += 1;
            d[e.j - 1] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
}

/// Logical problem `H = Σ_{i<j} J_ij σ_i σ_j + offset`.
///
/// Couplings are stored sparsely; absent edges mean `J_ij = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    couplings: BTreeMap<Site, f64>,
    /// Constant energy term carried alongside the couplings.
    pub offset: f64,
    pub metadata: Option<InstanceMetadata>,
}

impl IsingInstance {
    pub fn new(n: usize, couplings: impl IntoIterator<Item = (Site, f64)>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::invalid(format!("instance size n = {n} must be in 1..=64")));
        }
        let mut map = BTreeMap::new();
        for (s, j) in couplings {
            if s.i == 0 || s.i >= s.j || s.j > n {
                return Err(Error::invalid(format!("edge {s} invalid for n = {n}")));
            }
            if !j.is_finite() {
                return Err(Error::invalid(format!("coupling on {s} is not finite")));
            }
            map.insert(s, j);
        }
        Ok(IsingInstance {
            n,
            couplings: map,
            offset: 0.0,
            metadata: None,
        })
    }

    /// Complete graph with every coupling equal to `j`.
    pub fn uniform(n: usize, j: f64) -> Result<Self> {
        Self::new(n, all_pairs(n).map(|s| (s, j)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored couplings in lexicographic edge order.
    pub fn couplings(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.couplings.iter().map(|(&s, &j)| (s, j))
    }

    pub fn edge_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.couplings.get(&Site { i, j }).copied().unwrap_or(0.0)
    }

    /// True when every stored edge is present (the `K_n` case).
    pub fn is_dense(&self) -> bool {
        self.couplings.len() == self.n * (self.n - 1) / 2
    }

    /// Row-major symmetric `n x n` coupling matrix with zero diagonal.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (s, j) in self.couplings() {
            m[(s.i - 1) * n + (s.j - 1)] = j;
            m[(s.j - 1) * n + (s.i - 1)] = j;
        }
        m
    }

    /// Couplings per site of the full `K_n` layout, missing edges as zero.
    pub fn site_couplings(&self) -> Vec<f64> {
        let n = self.n;
        let mut v = vec![0.0; n * (n - 1) / 2];
        for (s, j) in self.couplings() {
            v[s.index(n)] = j;
        }
        v
    }

    /// True when all couplings are integers small enough for exact `i64` sums.
    pub fn is_integral(&self) -> bool {
        self.couplings.values().all(|j| j.fract() == 0.0 && j.abs() < 1e12)
    }

    /// `p0 = -Σ |J_ij|`, the unconstrained minimum of the local-field energy.
    pub fn p0(&self) -> f64 {
        -self.couplings.values().map(|j| j.abs()).sum::<f64>()
    }

    /// Logical energy `Σ J_ij σ_i σ_j` (offset excluded) of a configuration.
    pub fn energy(&self, logical: u64) -> f64 {
        self.couplings()
            .map(|(s, j)| {
                if ((logical >> (s.i - 1)) ^ (logical >> (s.j - 1))) & 1 == 1 {
                    -j
                } else {
                    j
                }
            })
            .sum()
    }

    pub fn scaled(&self, k: f64) -> IsingInstance {
        IsingInstance {
            n: self.n,
            couplings: self.couplings.iter().map(|(&s, &j)| (s, k * j)).collect(),
            offset: self.offset * k,
            metadata: self.metadata.clone(),
        }
    }

    pub fn with_metadata(mut self, metadata: InstanceMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    /// Underlying graph of nonzero couplings.
    pub fn support_graph(&self) -> Graph {
        Graph {
            n: self.n,
            edges: self
                .couplings
                .iter()
                .filter(|(_, &j)| j != 0.0)
                .map(|(&s, _)| s)
                .collect(),
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n,
            edges: self.couplings().map(|(s, j)| (s.i, s.j, j)).collect(),
            offset: self.offset,
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let mut inst = IsingInstance::new(
            file.n,
            file.edges
                .iter()
                .map(|&(i, j, v)| Site::new(i, j).map(|s| (s, v)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        inst.offset = file.offset;
        inst.metadata = file.metadata;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// On-disk instance document; vertex indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMetadata>,
}

/// Draws one coupling per edge of the realized graph, in edge order.
pub fn sample_instance(dist: &DistributionSpec, graph: &GraphSpec, seed: u64) -> Result<IsingInstance> {
    dist.validate()?;
    let g = graph.realize()?;
    let mut r = rng::stream(seed);
    let couplings: Vec<(Site, f64)> = g.edges.iter().map(|&e| (e, dist.sample(&mut r))).collect();
    Ok(IsingInstance::new(g.n, couplings)?.with_metadata(InstanceMetadata {
        distribution: Some(*dist),
        graph: Some(*graph),
        seed: Some(seed),
        problem: None,
    }))
}

/// MaxCut as an antiferromagnetic model: `J_ij = 1` on every edge.
pub fn encode_maxcut(graph: &Graph) -> Result<IsingInstance> {
    if graph.n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    Ok(IsingInstance::new(graph.n, graph.edges.iter().map(|&e| (e, 1.0)))?.with_metadata(
        InstanceMetadata {
            distribution: None,
            graph: None,
            seed: None,
            problem: Some("maxcut".into()),
        },
    ))
}

/// Maximum cut recovered from the ground energy of the MaxCut encoding.
pub fn cut_from_ground_energy(l0: f64, edge_count: usize) -> f64 {
    (-l0 + edge_count as f64) / 2.0
}

/// Penalty weight `u` of the MinBisection encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// Sufficient threshold `min(4 d_max, n) / 4` plus one.
    Auto,
    Fixed(f64),
}

pub fn bisection_threshold(graph: &Graph) -> f64 {
    (4 * graph.max_degree()).min(graph.n) as f64 / 4.0
}

/// MinBisection as `-Σ_E σσ + u (Σσ)^2`, expanded into pairwise couplings
/// `J_ij = -[ij ∈ E] + 2u` on `K_n` with the constant `u n` in `offset`.
pub fn encode_minbisection(graph: &Graph, penalty: Penalty) -> Result<IsingInstance> {
    let n = graph.n;
    if n == 0 || n % 2 == 1 {
        return Err(Error::invalid(format!("bisection needs an even vertex count, got {n}")));
    }
    let threshold = bisection_threshold(graph);
    let u = match penalty {
        Penalty::Auto => threshold + 1.0,
        Penalty::Fixed(u) => {
            if !(u > threshold) {
                return Err(Error::invalid(format!(
                    "penalty u = {u} must exceed min(4 d_max, n)/4 = {threshold}"
                )));
            }
            u
        }
    };
    let mut is_edge = vec![false; n * (n - 1) / 2];
    for e in &graph.edges {
        is_edge[e.index(n)] = true;
    }
    let couplings = all_pairs(n).map(|s| {
        let base = if is_edge[s.index(n)] { -1.0 } else { 0.0 };
        (s, base + 2.0 * u)
    });
    let mut inst = IsingInstance::new(n, couplings)?;
    inst.offset = u * n as f64;
    inst.metadata = Some(InstanceMetadata {
        distribution: None,
        graph: None,
        seed: None,
        problem: Some(format!("minbisection(u={u})")),
    });
    Ok(inst)
}
