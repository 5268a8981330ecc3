use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use parity_constraints::analytic::{antiferro_limit, ferro_limit};
use parity_constraints::bounds::{
    homogeneous_optimum, solve_lp, verify_assignment, ConstraintAssignment, KRange, OmegaFamily,
};
use parity_constraints::error::{Error, Result};
use parity_constraints::evt::{self, CountPolynomial, DEFAULT_DELTA};
use parity_constraints::harness::output;
use parity_constraints::harness::sweep::{grid, DEFAULT_RATIOS};
use parity_constraints::harness::{
    fit_power_law, fit_power_law_weighted, run_ensemble, scaling_sweep, EnsembleConfig, Quantity,
};
use parity_constraints::instances::{sample_instance, DistributionKind, DistributionSpec, GraphSpec, IsingInstance};
use parity_constraints::parity::ParityLayout;
use parity_constraints::rng::derive_seed;
use parity_constraints::sdp::c1_sdp_bound;
use parity_constraints::solver::Limits;

#[derive(Parser)]
#[command(name = "parity-constraints", version, about = "Minimal constraint strengths for parity-encoded Ising problems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Random seed (master seed for ensembles).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Defect range: an integer or "full".
    #[arg(long, global = true)]
    kmax: Option<KRange>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceSource {
    /// Instance JSON file; when absent an instance is sampled.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value = "normal")]
    dist: DistributionKind,
    /// μ/σ of the sampled couplings.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ratio: f64,
    /// Edge probability; complete graph when absent.
    #[arg(long)]
    p_edge: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, restricted minima and the bound chain of one instance.
    Solve(InstanceSource),
    /// Checks a constraint assignment against the defect subspaces.
    Verify {
        #[command(flatten)]
        source: InstanceSource,
        /// Assignment JSON file.
        #[arg(long, conflicts_with = "homogeneous")]
        assignment: Option<PathBuf>,
        /// Homogeneous strength.
        #[arg(long)]
        homogeneous: Option<f64>,
    },
    /// Inhomogeneous strengths from the covering linear program.
    Lp(InstanceSource),
    /// Writes a sampled instance as JSON.
    Generate(InstanceSource),
    /// Runs an ensemble configuration and writes raw and aggregate tables.
    Ensemble,
    /// Power-law fit of one aggregate column.
    Fit {
        /// Aggregate CSV written by `ensemble`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "c_minus_1")]
        column: String,
        /// Weight points by inverse squared standard error.
        #[arg(long)]
        weighted: bool,
    },
    /// Scaling exponent of c̄₋₁ across distributions and μ/σ.
    Sweep {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ratios: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<DistributionKind>>,
        #[arg(long)]
        weighted: bool,
    },
    /// Extreme-value model curves, optionally calibrating δ.
    Evt {
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        /// Calibrate δ on the l0 means of this aggregate CSV (or of --config's ensemble).
        #[arg(long)]
        calibrate: Option<PathBuf>,
    },
    /// SDP lower bound c₋₁,sdp on Erdős–Rényi MaxCut instances.
    Sdp {
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        p_edge: f64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Closed-form ferromagnetic and antiferromagnetic limits.
    Analytic {
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
}

fn instance(src: &InstanceSource, seed: u64) -> Result<IsingInstance> {
    if let Some(path) = &src.instance {
        return IsingInstance::load(path);
    }
    let dist = DistributionSpec::with_ratio(src.dist, src.ratio)?;
    let graph = match src.p_edge {
        Some(p_edge) => GraphSpec::ErdosRenyi {
            n: src.n,
            p_edge,
            seed: derive_seed(seed, 1),
        },
        None => GraphSpec::Complete { n: src.n },
    };
    sample_instance(&dist, &graph, derive_seed(seed, 0))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: serde::Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn limits_for(k: KRange) -> Limits {
    match k {
        KRange::UpTo(k) if k < 3 => Limits::default(),
        _ => Limits::default().with_high_order(),
    }
}

fn load_config(g: &Global) -> Result<EnsembleConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <file> is required".into()))?;
    let mut cfg = EnsembleConfig::load(path)?;
    if let Some(s) = g.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    if let Some(k) = g.kmax {
        cfg.k_max = k.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(g: &Global) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    if let Some(t) = g.threads.filter(|&t| t > 0) {
        // Ignore a second initialization; the pool is process-wide.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Solve(src) => {
            let inst = instance(src, seed)?;
            let layout = ParityLayout::new(inst.n())?;
            let k = g.kmax.unwrap_or(KRange::UpTo(2));
            let report = homogeneous_optimum(&inst, &layout, k, &limits_for(k))?;
            emit_json(&report, &g.out)
        }
        Command::Verify {
            source,
            assignment,
            homogeneous,
        } => {
            let inst = instance(source, seed)?;
            let layout = ParityLayout::new(inst.n())?;
            let assign = match (assignment, homogeneous) {
                (Some(path), _) => serde_json::from_str::<ConstraintAssignment>(&std::fs::read_to_string(path)?)?,
                (None, Some(c)) => ConstraintAssignment::homogeneous(*c),
                (None, None) => return Err(Error::Config("pass --assignment or --homogeneous".into())),
            };
            let k = g.kmax.unwrap_or(KRange::Full);
            let verdict = verify_assignment(&inst, &layout, &assign, k, &limits_for(k))?;
            emit_json(&verdict, &g.out)
        }
        Command::Lp(src) => {
            let inst = instance(src, seed)?;
            let layout = ParityLayout::new(inst.n())?;
            let k = g.kmax.unwrap_or(KRange::Full);
            let family = match k {
                KRange::Full => OmegaFamily::Full,
                KRange::UpTo(k) => OmegaFamily::UpTo(k),
            };
            let sol = solve_lp(&inst, &layout, &family, &limits_for(k))?;
            emit_json(&sol, &g.out)
        }
        Command::Generate(src) => {
            let inst = instance(src, seed)?;
            let mut w = sink(&g.out)?;
            writeln!(w, "{}", inst.to_json()?)?;
            Ok(())
        }
        Command::Ensemble => {
            let cfg = load_config(g)?;
            let res = run_ensemble(&cfg)?;
            let dir = out_dir(g);
            output::write_run(&res, &dir)?;
            output::write_aggregate(&res, io::stdout().lock())
        }
        Command::Fit {
            input,
            column,
            weighted,
        } => {
            let fit = if *weighted {
                let pts = output::read_aggregate_means(input, column)?;
                let w = se_weights(input, column, pts.len())?;
                fit_power_law_weighted(&pts, &w)?
            } else {
                fit_power_law(&output::read_aggregate_means(input, column)?)?
            };
            emit_json(&fit, &g.out)
        }
        Command::Sweep {
            ratios,
            kinds,
            weighted,
        } => {
            let base = load_config(g)?;
            let ratios = ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
            let kinds = kinds.clone().unwrap_or_else(|| {
                vec![DistributionKind::Normal, DistributionKind::Uniform, DistributionKind::Bimodal]
            });
            let rows = scaling_sweep(&base, &grid(&kinds, &ratios), *weighted);
            output::write_sweep(&rows, sink(&g.out)?)
        }
        Command::Evt {
            delta,
            n_min,
            n_max,
            calibrate,
        } => {
            let mut delta = *delta;
            let data = match (calibrate, &g.config) {
                (Some(path), _) => Some(output::read_aggregate_means(path, "l0")?),
                (None, Some(_)) => {
                    let mut cfg = load_config(g)?;
                    if !cfg.quantities.contains(&Quantity::L0) {
                        cfg.quantities.push(Quantity::L0);
                    }
                    Some(run_ensemble(&cfg)?.means("l0"))
                }
                (None, None) => None,
            };
            if let Some(points) = data {
                let pts: Vec<(usize, f64)> = points.iter().map(|&(n, y)| (n as usize, y)).collect();
                let cal = evt::calibrate_delta(&pts)?;
                eprintln!(
                    "delta = {:.6} (n in [{}, {}], rms residual {:.4})",
                    cal.delta, cal.fit_range.0, cal.fit_range.1, cal.residual
                );
                delta = cal.delta;
            }
            let ns: Vec<usize> = (*n_min.max(&3)..=*n_max).collect();
            let rows = evt::model_curves(&ns, delta, &CountPolynomial::default())?;
            output::write_model_curves(&rows, sink(&g.out)?)
        }
        Command::Sdp { sizes, p_edge, seeds } => {
            let mut rows = Vec::new();
            for &n in sizes {
                for s in 0..*seeds {
                    let gseed = derive_seed(derive_seed(seed, n as u64), s);
                    let graph = GraphSpec::ErdosRenyi {
                        n,
                        p_edge: *p_edge,
                        seed: gseed,
                    }
                    .realize()?;
                    rows.push((gseed, c1_sdp_bound(&graph)?));
                }
            }
            output::write_sdp_rows(&rows, sink(&g.out)?)
        }
        Command::Analytic { n } => {
            if *n < 3 {
                return Err(Error::InvalidInput(format!("closed forms need n >= 3, got {n}")));
            }
            let v = serde_json::json!({
                "ferro": ferro_limit(*n),
                "antiferro": antiferro_limit(*n),
            });
            emit_json(&v, &g.out)
        }
    }
}

/// Inverse-variance weights from the `<column>_se` field of an aggregate table.
fn se_weights(path: &Path, column: &str, expected: usize) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let mi = headers.iter().position(|h| h == format!("{column}_mean"));
    let si = headers.iter().position(|h| h == format!("{column}_se"));
    let (Some(mi), Some(si)) = (mi, si) else {
        return Err(Error::Parse(format!("{column}_se missing")));
    };
    let mut w = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.get(mi).is_none_or(str::is_empty) {
            continue;
        }
        let se: f64 = rec.get(si).unwrap_or("").parse().unwrap_or(f64::NAN);
        w.push(if se.is_finite() && se > 0.0 { 1.0 / (se * se) } else { 1e12 });
    }
    if w.len() != expected {
        return Err(Error::Parse("weight count mismatch".into()));
    }
    Ok(w)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
