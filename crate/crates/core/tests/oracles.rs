use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use parity_constraints::analytic::{antiferro_limit, eigenvalue_covariance, ferro_limit, level_count, pair_sum};
use parity_constraints::bounds::{homogeneous_optimum, KRange};
use parity_constraints::evt::expected_min_independent;
use parity_constraints::harness::{fit_power_law, run_ensemble, EnsembleConfig, Quantity, SampleSchedule};
use parity_constraints::instances::{DistributionSpec, GraphSpec};
use parity_constraints::parity::ParityLayout;
use parity_constraints::sdp::{c1_sdp_bound, solve_maxcut_sdp};
use parity_constraints::solver::{logical_spectrum, Limits};
use parity_constraints::IsingInstance;

fn bounds(inst: &IsingInstance, k: usize) -> parity_constraints::BoundsReport {
    let layout = ParityLayout::new(inst.n()).unwrap();
    homogeneous_optimum(inst, &layout, KRange::UpTo(k), &Limits::default()).unwrap()
}

#[test]
fn ferromagnet_matches_closed_form() {
    for n in 3..=14 {
        let r = bounds(&IsingInstance::uniform(n, -1.0).unwrap(), 1);
        let f = ferro_limit(n);
        assert_eq!((r.l0, r.gap, r.a[0], r.lower[0]), (f.l0, f.gap, f.a1, f.c), "n = {n}");
    }
}

#[test]
fn antiferromagnet_matches_closed_form() {
    for n in (4..=12).step_by(2) {
        let s = logical_spectrum(&IsingInstance::uniform(n, 1.0).unwrap(), &Limits::default()).unwrap();
        let a = antiferro_limit(n);
        assert_eq!(Some(s.l0), a.l0, "n = {n}");
        assert_eq!(Some(s.gap), a.gap, "n = {n}");
        let r = bounds(&IsingInstance::uniform(n, 1.0).unwrap(), 1);
        assert!((r.lower[0] - a.c_minus_1).abs() < 1e-9, "n = {n}");
    }
    for n in [6, 9, 12] {
        let r = bounds(&IsingInstance::uniform(n, 1.0).unwrap(), 1);
        assert_eq!(Some(r.a[0]), antiferro_limit(n).a1, "n = {n}");
    }
}

#[test]
fn antiferromagnet_odd_sizes() {
    // Ground level Σσ = ±1, first excited Σσ = ±3.
    for n in [5usize, 7, 9, 11] {
        let s = logical_spectrum(&IsingInstance::uniform(n, 1.0).unwrap(), &Limits::default()).unwrap();
        let nf = n as f64;
        assert_eq!(s.l0, (1.0 - nf) / 2.0);
        assert_eq!(s.e, (9.0 - nf) / 2.0);
    }
}

#[test]
fn level_structure_by_pair_sum() {
    let n = 9;
    for x in 0..1u64 << n {
        let sigma: Vec<i8> = (0..n).map(|i| if x >> i & 1 == 1 { -1 } else { 1 }).collect();
        let direct: i64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| i64::from(sigma[i] * sigma[j]))
            .sum();
        assert_eq!(pair_sum(&sigma), direct);
    }
    let total: u128 = (0..=n).map(|k| level_count(n, k)).sum();
    assert_eq!(total, 1 << n);
}

#[test]
fn covariance_is_overlap_of_pair_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [4usize, 7, 10, 13] {
        for _ in 0..20 {
            let s: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            let t: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            let mut direct = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    direct += f64::from(s[i] * s[j] * t[i] * t[j]);
                }
            }
            assert_eq!(eigenvalue_covariance(&s, &t), direct);
        }
    }
}

/// `E[min]` of `m` standard normals by Simpson quadrature of the density of the maximum.
fn exact_expected_min(m: f64) -> f64 {
    let (a, b, steps) = (-3.0f64, 10.0f64, 40_000usize);
    let h = (b - a) / steps as f64;
    let f = |x: f64| {
        let cdf = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        x * m * pdf * ((m - 1.0) * cdf.ln()).exp()
    };
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    -s * h / 3.0
}

#[test]
fn quadrature_oracle_agrees_with_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, trials) = (256usize, 20_000);
    let mins: Vec<f64> = (0..trials)
        .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).fold(f64::INFINITY, f64::min))
        .collect();
    let mean = mins.iter().sum::<f64>() / trials as f64;
    let sd = (mins.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    let exact = exact_expected_min(m as f64);
    assert!((mean - exact).abs() < 3.0 * sd / (trials as f64).sqrt(), "{mean} vs {exact}");
}

#[test]
fn gumbel_mean_bias_is_small_and_shrinking() {
    let mut prev = f64::INFINITY;
    for e in [10, 13, 16, 20, 24] {
        let m = (1u64 << e) as f64;
        let bias = exact_expected_min(m) - expected_min_independent(m, 1.0).unwrap();
        assert!(bias > 0.0 && bias < 0.015, "m = 2^{e}: bias {bias}");
        assert!(bias < prev);
        prev = bias;
    }
}

#[test]
fn fit_recovers_exponent_under_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ns: Vec<f64> = (4..=20).map(f64::from).collect();
    for alpha in [1.0, 1.5, 2.0] {
        for _ in 0..100 {
            let pts: Vec<(f64, f64)> = ns
                .iter()
                .map(|&n| {
                    let y = 0.7 * n.powf(alpha) + 1.0;
                    (n, y * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
                })
                .collect();
            let fit = fit_power_law(&pts).unwrap();
            assert!((fit.alpha - alpha).abs() < 0.1, "alpha {alpha}: fitted {}", fit.alpha);
        }
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let mut cfg = EnsembleConfig::new(
        DistributionSpec::Uniform { low: -1.0, high: 1.5 },
        vec![4, 5, 6, 7],
        SampleSchedule::Fixed { count: 9 },
    );
    cfg.quantities = vec![Quantity::L0, Quantity::A2, Quantity::CHat, Quantity::UpperBounds];
    cfg.master_seed = 17;
    cfg.threads = 1;
    let one = run_ensemble(&cfg).unwrap();
    cfg.threads = 3;
    let three = run_ensemble(&cfg).unwrap();
    assert_eq!(one.records, three.records);
    assert_eq!(one.aggregates, three.aggregates);
}

#[test]
fn sdp_bound_grows_with_size() {
    let mut prev = f64::NEG_INFINITY;
    for n in [20usize, 40, 80] {
        let mut sum = 0.0;
        for s in 0..3u64 {
            let g = GraphSpec::ErdosRenyi { n, p_edge: 0.4, seed: 100 + s }.realize().unwrap();
            let sdp = solve_maxcut_sdp(&g).unwrap();
            assert!(sdp.relative_gap() < 1e-4, "n = {n}: gap {}", sdp.relative_gap());
            assert!(sdp.primal_value <= sdp.dual_value + 1e-9);
            sum += c1_sdp_bound(&g).unwrap().c1_sdp;
        }
        let mean = sum / 3.0;
        assert!(mean > prev, "n = {n}: {mean} after {prev}");
        prev = mean;
    }
}
