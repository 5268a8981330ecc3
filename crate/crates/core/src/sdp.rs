//! MaxCut semidefinite relaxation and the resulting lower bound on `c₋₁`.
//!
//! The relaxation `max Σ_E (1 - X_ij)/2` over unit-diagonal PSD `X` equals
//! `max <L/4, X>` with `L` the graph Laplacian. The primal is searched over
//! low-rank factorizations `X = V Vᵀ` with unit rows; the dual point
//! `y = d + λ_max(L/4 - Diag(d)) 1` with `d_i = (L/4 X)_ii` is feasible for
//! any `d`, so `Σ y` is a certified upper bound on the relaxation.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{Graph, IsingInstance};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Factorization rank; `None` means `⌈√(2n)⌉`.
    pub rank: Option<usize>,
    /// Stop when the Riemannian gradient norm is below `tol · |E|`.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            rank: None,
            tol: 1e-7,
            max_iterations: 200_000,
            seed: 0x5d_9f3a_11c4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpResult {
    /// Relaxation value of the factorized primal point.
    pub primal_value: f64,
    /// Certified upper bound on the relaxation optimum.
    pub dual_value: f64,
    pub rank_used: usize,
    pub iterations: usize,
    /// False when the iteration cap was hit before the gradient tolerance.
    pub converged: bool,
}

impl SdpResult {
    pub fn relative_gap(&self) -> f64 {
        (self.dual_value - self.primal_value) / self.dual_value.abs().max(1.0)
    }
}

struct Factor {
    n: usize,
    r: usize,
    v: Vec<f64>,
}

impl Factor {
    fn row(&self, i: usize) -> &[f64] {
        &self.v[i * self.r..(i + 1) * self.r]
    }

    fn normalize_rows(&mut self) {
        for i in 0..self.n {
            let row = &mut self.v[i * self.r..(i + 1) * self.r];
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            } else {
                row[0] = 1.0;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn objective(f: &Factor, edges: &[(usize, usize)]) -> f64 {
    edges.iter().map(|&(i, j)| (1.0 - dot(f.row(i), f.row(j))) / 2.0).sum()
}

/// Riemannian gradient of the objective on the product of spheres.
fn gradient(f: &Factor, adj: &[Vec<usize>], out: &mut [f64]) -> f64 {
    let r = f.r;
    let mut norm2 = 0.0;
    for i in 0..f.n {
        let g = &mut out[i * r..(i + 1) * r];
        g.iter_mut().for_each(|x| *x = 0.0);
        for &j in &adj[i] {
            for (gx, vx) in g.iter_mut().zip(f.row(j)) {
                *gx -= 0.5 * vx;
            }
        }
        let vi = f.row(i);
        let radial = dot(g, vi);
        for (gx, vx) in g.iter_mut().zip(vi) {
            *gx -= radial * vx;
        }
        norm2 += dot(g, g);
    }
    norm2.sqrt()
}

fn certify(f: &Factor, graph: &Graph, edges: &[(usize, usize)]) -> (f64, f64, DMatrix<f64>) {
    let n = f.n;
    let deg = graph.degrees();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut d = vec![0.0; n];
    for &(i, j) in edges {
        m[(i, j)] -= 0.25;
        m[(j, i)] -= 0.25;
        let x = dot(f.row(i), f.row(j));
        d[i] -= 0.25 * x;
        d[j] -= 0.25 * x;
    }
    for i in 0..n {
        d[i] += 0.25 * deg[i] as f64;
        m[(i, i)] = 0.25 * deg[i] as f64 - d[i];
    }
    let eig = SymmetricEigen::new(m.clone());
    let (top, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &l)| (k, l))
        .unwrap_or((0, 0.0));
    // Eigenvalue error of a backward-stable solver is a small multiple of eps·‖M‖.
    let margin = 1e3 * f64::EPSILON * (1.0 + m.norm());
    let dual = d.iter().sum::<f64>() + n as f64 * (lambda + margin);
    let u = eig.eigenvectors.column(top).into_owned();
    (dual, lambda, DMatrix::from_column_slice(n, 1, u.as_slice()))
}

/// Solves the MaxCut relaxation with default options.
pub fn solve_maxcut_sdp(graph: &Graph) -> Result<SdpResult> {
    solve_maxcut_sdp_with(graph, &SdpOptions::default())
}

pub fn solve_maxcut_sdp_with(graph: &Graph, opts: &SdpOptions) -> Result<SdpResult> {
    let n = graph.n;
    if n == 0 {
        return Err(Error::invalid("graph has no vertices"));
    }
    let edges: Vec<(usize, usize)> = graph.edges.iter().map(|e| (e.i - 1, e.j - 1)).collect();
    if edges.is_empty() {
        return Ok(SdpResult {
            primal_value: 0.0,
            dual_value: 0.0,
            rank_used: 0,
            iterations: 0,
            converged: true,
        });
    }
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in &edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let r = opts
        .rank
        .unwrap_or_else(|| ((2 * n) as f64).sqrt().ceil() as usize)
        .clamp(1, n.max(1));
    let mut rng = rng::stream(opts.seed);
    let mut f = Factor {
        n,
        r,
        v: (0..n * r).map(|_| rng.sample(StandardNormal)).collect(),
    };
    f.normalize_rows();

    let tol = opts.tol * edges.len() as f64;
    let mut grad = vec![0.0; n * r];
    let mut trial = Factor { n, r, v: vec![0.0; n * r] };
    let mut value = objective(&f, &edges);
    let mut step = 1.0 / (1.0 + graph.max_degree() as f64);
    let mut iterations = 0;
    let mut converged = false;
    let mut escapes = 0;
    loop {
        while iterations < opts.max_iterations {
            let gnorm = gradient(&f, &adj, &mut grad);
            if gnorm < tol {
                converged = true;
                break;
            }
            iterations += 1;
            let g2 = gnorm * gnorm;
            let mut t = step * 2.0;
            loop {
                for ((tv, v), g) in trial.v.iter_mut().zip(&f.v).zip(&grad) {
                    *tv = v + t * g;
                }
                trial.normalize_rows();
                let tv = objective(&trial, &edges);
                if tv >= value + 1e-4 * t * g2 || t < 1e-16 {
                    std::mem::swap(&mut f.v, &mut trial.v);
                    value = tv;
                    step = t;
                    break;
                }
                t *= 0.5;
            }
        }
        let (dual, lambda, u) = certify(&f, graph, &edges);
        let scale = 1.0 + graph.max_degree() as f64;
        if lambda <= 1e-9 * scale || escapes >= 5 || iterations >= opts.max_iterations {
            return Ok(SdpResult {
                primal_value: value,
                dual_value: dual.max(value),
                rank_used: r,
                iterations,
                converged: converged && lambda <= 1e-6 * scale,
            });
        }
        // Second-order stationarity fails: move along the top eigenvector.
        escapes += 1;
        converged = false;
        let w: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
        let wn = dot(&w, &w).sqrt();
        for i in 0..n {
            for k in 0..r {
                f.v[i * r + k] += 0.1 * u[(i, 0)] * w[k] / wn;
            }
        }
        f.normalize_rows();
        value = objective(&f, &edges);
    }
}

/// Block sums of a symmetric matrix over consecutive index ranges.
struct BlockSums {
    n: usize,
    prefix: Vec<f64>,
}

impl BlockSums {
    fn new(n: usize, m: &[f64]) -> Self {
        let w = n + 1;
        let mut prefix = vec![0.0; w * w];
        for a in 0..n {
            for b in 0..n {
                prefix[(a + 1) * w + b + 1] =
                    m[a * n + b] + prefix[a * w + b + 1] + prefix[(a + 1) * w + b] - prefix[a * w + b];
            }
        }
        BlockSums { n, prefix }
    }

    /// `Σ_{i ∈ [i0, i1), j ∈ [j0, j1)} M_ij`, 0-based.
    fn sum(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let w = self.n + 1;
        let p = &self.prefix;
        p[i1 * w + j1] - p[i0 * w + j1] - p[i1 * w + j0] + p[i0 * w + j0]
    }
}

/// Upper bound on `a₁` from single-violator states built on consecutive
/// tripartitions `A = {1..k}`, `B = {k+1..j}`, `C = {j+1..n}` (each of size
/// at least 2). The violated plaquette is `[k, j]`, whose defect mask flips
/// exactly the `A × C` couplings; all four sign patterns constant on the
/// blocks are evaluated.
pub fn tripartition_a1_upper(inst: &IsingInstance) -> Result<f64> {
    tripartition_from_matrix(inst.n(), &inst.dense_matrix())
}

/// Tripartition bound for a row-major symmetric coupling matrix.
pub fn tripartition_from_matrix(n: usize, couplings: &[f64]) -> Result<f64> {
    if n < 6 {
        return Err(Error::invalid(format!("tripartition bound needs n >= 6, got {n}")));
    }
    if couplings.len() != n * n {
        return Err(Error::invalid("coupling matrix must be n x n"));
    }
    let bs = BlockSums::new(n, couplings);
    let total = bs.sum(0, n, 0, n) / 2.0;
    let mut best = f64::INFINITY;
    for k in 2..=n - 4 {
        for j in k + 2..=n - 2 {
            let ab = bs.sum(0, k, k, j);
            let ac = bs.sum(0, k, j, n);
            let bc = bs.sum(k, j, j, n);
            // Sign patterns + + +, + - +, - + +, + + - on (A, B, C).
            let candidates = [
                total - 2.0 * ac,
                total - 2.0 * (ab + ac + bc),
                total - 2.0 * ab,
                total - 2.0 * bc,
            ];
            for e in candidates {
                best = best.min(e);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C1SdpReport {
    pub n: usize,
    pub edges: usize,
    pub sdp: SdpResult,
    pub a1_plus: f64,
    /// `-2 ⌊dual⌋ + |E| + 2 - a₁⁺`; the floor is valid because cuts are integers.
    pub c1_sdp: f64,
    /// Same with the unrounded dual value.
    pub c1_sdp_raw: f64,
    /// False for edgeless graphs, where the bound says nothing.
    pub meaningful: bool,
}

/// Certified lower bound on `c₋₁` of the MaxCut encoding of `graph`.
pub fn c1_sdp_bound(graph: &Graph) -> Result<C1SdpReport> {
    let sdp = solve_maxcut_sdp(graph)?;
    c1_sdp_from(graph, sdp)
}

pub fn c1_sdp_from(graph: &Graph, sdp: SdpResult) -> Result<C1SdpReport> {
    let n = graph.n;
    let mut m = vec![0.0; n * n];
    for e in &graph.edges {
        m[(e.i - 1) * n + e.j - 1] = 1.0;
        m[(e.j - 1) * n + e.i - 1] = 1.0;
    }
    let a1_plus = tripartition_from_matrix(n, &m)?;
    let e = graph.edge_count() as f64;
    let cut_bound = (sdp.dual_value + 1e-9).floor();
    Ok(C1SdpReport {
        n: graph.n,
        edges: graph.edge_count(),
        sdp,
        a1_plus,
        c1_sdp: -2.0 * cut_bound + e + 2.0 - a1_plus,
        c1_sdp_raw: -2.0 * sdp.dual_value + e + 2.0 - a1_plus,
        meaningful: graph.edge_count() > 0,
    })
}
