//! Exact spectra and restricted minima by exhaustive enumeration.
//!
//! Logical spectra are scanned over the `2^(n-1)` configurations with the last
//! spin fixed up (global flip symmetry), visiting them in Gray-code order so
//! each step costs `O(n)` through incrementally maintained local fields.
//! Restricted minima `a_ω` use the sign-flip reduction: the minimum of `H_J`
//! over the defect subspace `S_ω` equals the logical ground energy of the
//! instance whose couplings are negated on the XOR of the defect masks of ω.

use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::IsingInstance;
use crate::parity::{BitString, DefectProfile, ParityLayout};

/// Enumeration caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest `n` for logical enumeration.
    pub max_spins: usize,
    /// Largest number of enumerated states for combinatorial scans.
    pub budget: u128,
    /// Defect counts `k >= 3` are only enumerated when set.
    pub allow_high_order: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_spins: 24,
            budget: 1 << 36,
            allow_high_order: false,
        }
    }
}

impl Limits {
    pub fn with_high_order(mut self) -> Self {
        self.allow_high_order = true;
        self
    }

    fn check_spins(&self, n: usize) -> Result<()> {
        if n > self.max_spins {
            return Err(Error::capacity(
                format!("logical enumeration over n = {n} spins"),
                n as u128,
                self.max_spins as u128,
            ));
        }
        Ok(())
    }

    fn check_budget(&self, what: impl Into<String>, states: u128) -> Result<()> {
        if states > self.budget {
            return Err(Error::capacity(what, states, self.budget));
        }
        Ok(())
    }
}

/// Ground energy, first excited energy and gap of a logical instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub l0: f64,
    /// Smallest energy strictly above `l0`; equals `l0` when the spectrum is flat.
    pub e: f64,
    pub gap: f64,
    /// Number of ground configurations counted modulo the global flip.
    pub ground_degeneracy: u64,
    /// One ground configuration (bit `b` set means spin `b + 1` down).
    pub argmin: u64,
}

trait Energy:
    Copy
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    /// Distance below which two levels are the same eigenvalue.
    fn tolerance(level: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl Energy for i64 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const TWO: Self = 2;
    fn tolerance(_: Self) -> Self {
        0
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Energy for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const TWO: Self = 2.0;
    fn tolerance(level: Self) -> Self {
        1e-9 * level.abs().max(1.0)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Partial<T> {
    l0: T,
    e: Option<T>,
    count: u64,
    argmin: u64,
}

impl<T: Energy> Partial<T> {
    fn observe(&mut self, energy: T, state: u64) {
        let tol = T::tolerance(self.l0);
        if energy < self.l0 - tol {
            self.e = Some(self.l0);
            self.l0 = energy;
            self.count = 1;
            self.argmin = state;
        } else if energy <= self.l0 + tol {
            self.count += 1;
            if energy < self.l0 {
                self.l0 = energy;
            }
        } else if self.e.is_none_or(|e| energy < e) {
            self.e = Some(energy);
        }
    }

    fn merge(self, other: Self) -> Self {
        let (lo, hi) = if other.l0 < self.l0 { (other, self) } else { (self, other) };
        let tol = T::tolerance(lo.l0);
        let e = |a: Option<T>, b: Option<T>| match (a, b) {
            (Some(x), Some(y)) => Some(if y < x { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        };
        if hi.l0 - lo.l0 <= tol {
            Partial {
                l0: lo.l0,
                e: e(lo.e, hi.e),
                count: lo.count + hi.count,
                argmin: lo.argmin,
            }
        } else {
            Partial {
                l0: lo.l0,
                e: e(lo.e, Some(hi.l0)),
                count: lo.count,
                argmin: lo.argmin,
            }
        }
    }
}

const CHUNK_BITS: usize = 14;

/// Gray-code scan of configurations `prefix | g` for all `g < 2^low_bits`.
fn scan_chunk<T: Energy>(n: usize, jm: &[T], prefix: u64, low_bits: usize) -> Partial<T> {
    let mut sigma: Vec<T> = (0..n)
        .map(|i| if prefix >> i & 1 == 1 { -T::ONE } else { T::ONE })
        .collect();
    let mut field = vec![T::ZERO; n];
    let mut energy = T::ZERO;
    for i in 0..n {
        let row = &jm[i * n..(i + 1) * n];
        let mut h = T::ZERO;
        for j in 0..n {
            h = h + row[j] * sigma[j];
        }
        field[i] = h;
        for j in i + 1..n {
            energy = energy + row[j] * sigma[i] * sigma[j];
        }
    }
    let mut state = prefix;
    let mut acc = Partial {
        l0: energy,
        e: None,
        count: 1,
        argmin: state,
    };
    for step in 1u64..(1u64 << low_bits) {
        let k = step.trailing_zeros() as usize;
        let sk = sigma[k];
        energy = energy - T::TWO * sk * field[k];
        let row = &jm[k * n..(k + 1) * n];
        let delta = T::TWO * sk;
        for (h, &jik) in field.iter_mut().zip(row) {
            *h = *h - delta * jik;
        }
        sigma[k] = -sk;
        state ^= 1 << k;
        acc.observe(energy, state);
    }
    acc
}

fn scan<T: Energy>(n: usize, jm: &[T]) -> Partial<T> {
    if n <= 1 {
        return Partial {
            l0: T::ZERO,
            e: None,
            count: 1,
            argmin: 0,
        };
    }
    let free = n - 1;
    let low = free.min(CHUNK_BITS);
    let chunks = 1u64 << (free - low);
    let partials: Vec<Partial<T>> = if chunks == 1 {
        vec![scan_chunk(n, jm, 0, low)]
    } else {
        (0..chunks)
            .into_par_iter()
            .map(|c| scan_chunk(n, jm, c << low, low))
            .collect()
    };
    partials.into_iter().reduce(Partial::merge).expect("at least one chunk")
}

/// Dense coupling matrix with couplings on `flip` sites negated.
fn signed_matrix(inst: &IsingInstance, flip: Option<&BitString>) -> Vec<f64> {
    let n = inst.n();
    let mut m = vec![0.0; n * n];
    for (s, j) in inst.couplings() {
        let v = match flip {
            Some(mask) if mask.get(s.index(n)) => -j,
            _ => j,
        };
        m[(s.i - 1) * n + (s.j - 1)] = v;
        m[(s.j - 1) * n + (s.i - 1)] = v;
    }
    m
}

fn spectrum_of_matrix(n: usize, m: &[f64], integral: bool) -> SpectrumSummary {
    if integral {
        let mi: Vec<i64> = m.iter().map(|&x| x as i64).collect();
        finish(scan(n, &mi))
    } else {
        finish(scan(n, m))
    }
}

fn finish<T: Energy>(p: Partial<T>) -> SpectrumSummary {
    let l0 = p.l0.to_f64();
    let e = p.e.map_or(l0, Energy::to_f64);
    SpectrumSummary {
        l0,
        e,
        gap: e - l0,
        ground_degeneracy: p.count,
        argmin: p.argmin,
    }
}

/// Exact `l0`, `e` and gap of the logical Hamiltonian.
pub fn logical_spectrum(inst: &IsingInstance, limits: &Limits) -> Result<SpectrumSummary> {
    limits.check_spins(inst.n())?;
    Ok(spectrum_of_matrix(inst.n(), &signed_matrix(inst, None), inst.is_integral()))
}

fn check_layout(inst: &IsingInstance, layout: &ParityLayout) -> Result<()> {
    if inst.n() != layout.n {
        return Err(Error::invalid(format!(
            "instance n = {} does not match layout n = {}",
            inst.n(),
            layout.n
        )));
    }
    Ok(())
}

/// Minimum of `H_J` over `S_ω` for the flip mask of ω.
fn masked_minimum(inst: &IsingInstance, mask: &BitString) -> f64 {
    spectrum_of_matrix(inst.n(), &signed_matrix(inst, Some(mask)), inst.is_integral()).l0
}

/// `a_ω`: lowest local-field energy among physical states violating exactly ω.
pub fn restricted_minimum(
    inst: &IsingInstance,
    omega: &DefectProfile,
    layout: &ParityLayout,
    limits: &Limits,
) -> Result<f64> {
    check_layout(inst, layout)?;
    if omega.is_empty() {
        return Err(Error::invalid(
            "empty defect profile is the logical subspace; use logical_spectrum",
        ));
    }
    limits.check_spins(inst.n())?;
    let mask = layout.profile_mask(omega)?;
    Ok(masked_minimum(inst, &mask))
}

/// `a_ω` for every single-plaquette profile, in plaquette index order.
pub fn single_violator_minima(
    inst: &IsingInstance,
    layout: &ParityLayout,
    limits: &Limits,
) -> Result<Vec<f64>> {
    check_layout(inst, layout)?;
    limits.check_spins(inst.n())?;
    Ok((0..layout.q)
        .into_par_iter()
        .map(|p| masked_minimum(inst, layout.mask_by_index(p)))
        .collect())
}

/// A minimum over defect profiles together with one minimizing profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectMinimum {
    pub value: f64,
    pub profile: DefectProfile,
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic k-combinations of `0..q`.
struct Combinations {
    q: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(q: usize, k: usize) -> Self {
        Combinations {
            q,
            current: (0..k).collect(),
            done: k > q || k == 0,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.q - k + i {
                self.current[i] += 1;
                for t in i + 1..k {
                    self.current[t] = self.current[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// `a_k`: minimum of `a_ω` over all profiles with exactly `k` violated plaquettes.
pub fn min_over_defect_count(
    inst: &IsingInstance,
    layout: &ParityLayout,
    k: usize,
    limits: &Limits,
) -> Result<DefectMinimum> {
    check_layout(inst, layout)?;
    if k == 0 || k > layout.q {
        return Err(Error::invalid(format!(
            "defect count k = {k} outside 1..={}",
            layout.q
        )));
    }
    limits.check_spins(inst.n())?;
    if k >= 3 && !limits.allow_high_order {
        return Err(Error::capacity(
            format!("a_{k} requires enabling high-order enumeration"),
            k as u128,
            2,
        ));
    }
    let profiles = binomial(layout.q, k);
    let states = profiles.saturating_mul(1u128 << (inst.n() - 1));
    limits.check_budget(
        format!("a_{k} over {profiles} defect profiles of {} states", 1u128 << (inst.n() - 1)),
        states,
    )?;
    let best = Combinations::new(layout.q, k)
        .enumerate()
        .par_bridge()
        .map(|(idx, combo)| {
            let mut mask = BitString::zeros(layout.m);
            for &p in &combo {
                mask.xor_assign(layout.mask_by_index(p));
            }
            (masked_minimum(inst, &mask), idx, combo)
        })
        .reduce_with(|a, b| {
            if (b.0, b.1) < (a.0, a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one profile");
    Ok(DefectMinimum {
        value: best.0,
        profile: DefectProfile::of(best.2.iter().map(|&p| layout.plaquettes()[p].label)),
    })
}

/// `a_ω` for every profile ω, indexed by the bitmask of plaquette indices
/// (entry 0 holds `l0`). Requires `q < 32`.
pub fn profile_minima(inst: &IsingInstance, layout: &ParityLayout, limits: &Limits) -> Result<Vec<f64>> {
    check_layout(inst, layout)?;
    limits.check_spins(inst.n())?;
    if layout.q >= 32 {
        return Err(Error::capacity("all defect profiles", 1u128 << layout.q.min(127), 1 << 31));
    }
    limits.check_budget(
        format!("all {} defect profiles", 1u128 << layout.q),
        (1u128 << layout.q) << (inst.n() - 1),
    )?;
    Ok((0..1u64 << layout.q)
        .into_par_iter()
        .map(|bits| {
            let mut mask = BitString::zeros(layout.m);
            for p in 0..layout.q {
                if bits >> p & 1 == 1 {
                    mask.xor_assign(layout.mask_by_index(p));
                }
            }
            masked_minimum(inst, &mask)
        })
        .collect())
}

/// Converts a profile bitmask over plaquette indices into labels.
pub fn profile_from_bits(layout: &ParityLayout, bits: u64) -> DefectProfile {
    DefectProfile::of((0..layout.q).filter(|p| bits >> p & 1 == 1).map(|p| layout.plaquettes()[p].label))
}

const PHYSICAL_INNER_BITS: usize = 16;

/// `a_k` for every `k = 0..=q` by enumerating all `2^m` physical states
/// (entry 0 is `l0`). Requires `m <= 62`.
pub fn defect_count_minima(
    inst: &IsingInstance,
    layout: &ParityLayout,
    limits: &Limits,
) -> Result<Vec<f64>> {
    check_layout(inst, layout)?;
    let m = layout.m;
    if m > 62 {
        return Err(Error::capacity("physical enumeration", 1u128 << 62, limits.budget));
    }
    limits.check_budget(format!("physical enumeration over 2^{m} states"), 1u128 << m)?;
    let q = layout.q;
    let jv = inst.site_couplings();
    let site_plaquettes: Vec<u64> = (0..m)
        .map(|s| layout.site_plaquettes(s).iter().fold(0u64, |acc, &p| acc | 1 << p))
        .collect();
    let members: Vec<u64> = layout
        .plaquettes()
        .iter()
        .map(|p| p.members.iter().fold(0u64, |acc, &s| acc | 1 << s))
        .collect();
    let inner = m.min(PHYSICAL_INNER_BITS);
    let blocks = 1u64 << (m - inner);
    let partials: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut state = block << inner;
            let mut energy: f64 = jv
                .iter()
                .enumerate()
                .map(|(s, &j)| if state >> s & 1 == 1 { -j } else { j })
                .sum();
            let mut viol: u64 = members
                .iter()
                .enumerate()
                .filter(|(_, &mm)| (state & mm).count_ones() % 2 == 1)
                .fold(0u64, |acc, (p, _)| acc | 1 << p);
            let mut best = vec![f64::INFINITY; q + 1];
            best[viol.count_ones() as usize] = energy;
            for step in 1u64..(1u64 << inner) {
                let b = step.trailing_zeros() as usize;
                if state >> b & 1 == 1 {
                    energy += 2.0 * jv[b];
                } else {
                    energy -= 2.0 * jv[b];
                }
                state ^= 1 << b;
                viol ^= site_plaquettes[b];
                let k = viol.count_ones() as usize;
                if energy < best[k] {
                    best[k] = energy;
                }
            }
            best
        })
        .collect();
    let mut best = vec![f64::INFINITY; q + 1];
    for p in partials {
        for (b, v) in best.iter_mut().zip(p) {
            *b = b.min(v);
        }
    }
    Ok(best)
}

/// Explicitly computed restricted minima.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RestrictedMinima {
    pub a_omega: Vec<(DefectProfile, f64)>,
    /// `a_k[k - 1]` is the minimum over profiles of size `k`.
    pub a_k: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{sample_instance, DistributionSpec, GraphSpec};
    use crate::parity::Plaquette;

    fn gaussian(n: usize, seed: u64) -> IsingInstance {
        sample_instance(
            &DistributionSpec::Normal { mean: 0.0, std_dev: 1.0 },
            &GraphSpec::Complete { n },
            seed,
        )
        .unwrap()
    }

    fn brute_spectrum(inst: &IsingInstance) -> (f64, f64) {
        let mut levels: Vec<f64> = (0..1u64 << inst.n()).map(|x| inst.energy(x)).collect();
        levels.sort_by(f64::total_cmp);
        let l0 = levels[0];
        let e = levels.iter().copied().find(|&v| v > l0 + 1e-9).unwrap_or(l0);
        (l0, e)
    }

    #[test]
    fn ferromagnetic_k4() {
        let s = logical_spectrum(&IsingInstance::uniform(4, -1.0).unwrap(), &Limits::default()).unwrap();
        assert_eq!((s.l0, s.e, s.gap), (-6.0, 0.0, 6.0));
        assert_eq!(s.ground_degeneracy, 1);
    }

    #[test]
    fn antiferromagnetic_k6() {
        let s = logical_spectrum(&IsingInstance::uniform(6, 1.0).unwrap(), &Limits::default()).unwrap();
        assert_eq!((s.l0, s.gap), (-3.0, 2.0));
        // C(6,3)/2 balanced configurations modulo flip.
        assert_eq!(s.ground_degeneracy, 10);
        assert_eq!(s.argmin.count_ones(), 3);
    }

    #[test]
    fn flat_spectrum() {
        let inst = IsingInstance::uniform(5, 0.0).unwrap();
        let s = logical_spectrum(&inst, &Limits::default()).unwrap();
        assert_eq!((s.l0, s.e, s.gap), (0.0, 0.0, 0.0));
        assert_eq!(s.ground_degeneracy, 16);
    }

    #[test]
    fn matches_brute_force_including_chunked_scan() {
        for (n, seed) in [(3, 1), (6, 2), (9, 3), (16, 4)] {
            let inst = gaussian(n, seed);
            let s = logical_spectrum(&inst, &Limits::default()).unwrap();
            let (l0, e) = brute_spectrum(&inst);
            assert!((s.l0 - l0).abs() < 1e-9, "n={n}");
            assert!((s.e - e).abs() < 1e-9, "n={n}");
            assert!((inst.energy(s.argmin) - l0).abs() < 1e-9);
        }
    }

    #[test]
    fn capacity_error() {
        let inst = IsingInstance::uniform(25, 1.0).unwrap();
        match logical_spectrum(&inst, &Limits::default()) {
            Err(Error::Capacity { .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn ferromagnetic_single_flip_violator() {
        for n in 4..9 {
            let inst = IsingInstance::uniform(n, -1.0).unwrap();
            let layout = ParityLayout::new(n).unwrap();
            let omega = DefectProfile::of([Plaquette { k: 1, l: n - 1 }]);
            let a = restricted_minimum(&inst, &omega, &layout, &Limits::default()).unwrap();
            let l0 = -((n * (n - 1) / 2) as f64);
            assert_eq!(a, l0 + 2.0);
            let a1 = min_over_defect_count(&inst, &layout, 1, &Limits::default()).unwrap();
            assert_eq!(a1.value, l0 + 2.0);
        }
    }

    #[test]
    fn antiferromagnetic_single_violator_k6() {
        let inst = IsingInstance::uniform(6, 1.0).unwrap();
        let layout = ParityLayout::new(6).unwrap();
        let a1 = min_over_defect_count(&inst, &layout, 1, &Limits::default()).unwrap();
        assert_eq!(a1.value, -9.0);
        assert_eq!(a1.profile.len(), 1);
        let singles = single_violator_minima(&inst, &layout, &Limits::default()).unwrap();
        assert_eq!(singles.iter().copied().fold(f64::INFINITY, f64::min), -9.0);
    }

    #[test]
    fn empty_profile_rejected() {
        let inst = gaussian(4, 1);
        let layout = ParityLayout::new(4).unwrap();
        assert!(restricted_minimum(&inst, &DefectProfile::empty(), &layout, &Limits::default()).is_err());
    }

    /// Direct enumeration over physical states of a given violation count.
    fn brute_by_count(inst: &IsingInstance, layout: &ParityLayout) -> Vec<f64> {
        let mut best = vec![f64::INFINITY; layout.q + 1];
        for bits in 0..1u64 << layout.m {
            let st = crate::parity::PhysicalState(BitString::from_u64(layout.m, bits));
            let k = layout.violated_plaquettes(&st).unwrap().len();
            let e = layout.field_energy(&st, inst).unwrap();
            best[k] = best[k].min(e);
        }
        best
    }

    #[test]
    fn defect_count_routes_agree() {
        let inst = gaussian(5, 17);
        let layout = ParityLayout::new(5).unwrap();
        let brute = brute_by_count(&inst, &layout);
        let physical = defect_count_minima(&inst, &layout, &Limits::default()).unwrap();
        let limits = Limits::default().with_high_order();
        for k in 0..=layout.q {
            assert!((brute[k] - physical[k]).abs() < 1e-9, "k={k}");
            if k > 0 {
                let red = min_over_defect_count(&inst, &layout, k, &limits).unwrap();
                assert!((brute[k] - red.value).abs() < 1e-9, "k={k}");
            }
        }
        let spec = logical_spectrum(&inst, &Limits::default()).unwrap();
        assert!((physical[0] - spec.l0).abs() < 1e-9);
    }

    #[test]
    fn high_order_is_gated_and_budgeted() {
        let inst = gaussian(6, 1);
        let layout = ParityLayout::new(6).unwrap();
        assert!(matches!(
            min_over_defect_count(&inst, &layout, 3, &Limits::default()),
            Err(Error::Capacity { .. })
        ));
        let tight = Limits {
            budget: 100,
            ..Limits::default()
        };
        assert!(matches!(
            min_over_defect_count(&inst, &layout, 2, &tight),
            Err(Error::Capacity { .. })
        ));
        assert!(min_over_defect_count(&inst, &layout, 0, &Limits::default()).is_err());
    }

    #[test]
    fn profile_minima_are_consistent() {
        let inst = gaussian(5, 3);
        let layout = ParityLayout::new(5).unwrap();
        let all = profile_minima(&inst, &layout, &Limits::default()).unwrap();
        assert_eq!(all.len(), 1 << layout.q);
        let by_count = defect_count_minima(&inst, &layout, &Limits::default()).unwrap();
        for k in 0..=layout.q {
            let m = (0..all.len())
                .filter(|b| (*b as u64).count_ones() as usize == k)
                .map(|b| all[b])
                .fold(f64::INFINITY, f64::min);
            assert!((m - by_count[k]).abs() < 1e-9);
        }
        assert!(all.iter().all(|&a| a >= inst.p0() - 1e-9));
    }

    #[test]
    fn combinations_enumerate_binomial() {
        assert_eq!(Combinations::new(6, 2).count() as u128, binomial(6, 2));
        assert_eq!(Combinations::new(10, 4).count() as u128, binomial(10, 4));
        assert_eq!(Combinations::new(3, 3).collect::<Vec<_>>(), vec![vec![0, 1, 2]]);
    }
}
