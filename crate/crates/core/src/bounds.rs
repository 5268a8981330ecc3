//! Constraint-strength bounds.
//!
//! For first excited energy `e` and restricted minima `a_k`, the lower bounds
//! are `c_-k = (e - a_k) / k` and the homogeneous optimum is their maximum
//! over `k = 1..=q`. The upper bounds are
//! `c_i = max(c_-1, ..., c_-i, (e - p0) / (i + 1))` with `c_0 = e - p0`,
//! bracketed by the trivial bound `2|p0|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::IsingInstance;
use crate::parity::{DefectProfile, ParityLayout, Plaquette};
use crate::simplex::{solve_covering, CoverRow};
use crate::solver::{
    defect_count_minima, logical_spectrum, min_over_defect_count, profile_from_bits, profile_minima,
    restricted_minimum, single_violator_minima, Limits,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteStrength {
    pub k: usize,
    pub l: usize,
    pub c: f64,
}

/// Constraint strengths, either one value for every plaquette or one each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConstraintAssignment {
    Homogeneous { c: f64 },
    PerPlaquette { strengths: Vec<PlaquetteStrength> },
}

impl ConstraintAssignment {
    pub fn homogeneous(c: f64) -> Self {
        ConstraintAssignment::Homogeneous { c }
    }

    pub fn per_plaquette(values: impl IntoIterator<Item = (Plaquette, f64)>) -> Self {
        ConstraintAssignment::PerPlaquette {
            strengths: values
                .into_iter()
                .map(|(p, c)| PlaquetteStrength { k: p.k, l: p.l, c })
                .collect(),
        }
    }

    pub fn strength(&self, p: Plaquette) -> Result<f64> {
        match self {
            ConstraintAssignment::Homogeneous { c } => Ok(*c),
            ConstraintAssignment::PerPlaquette { strengths } => strengths
                .iter()
                .find(|s| s.k == p.k && s.l == p.l)
                .map(|s| s.c)
                .ok_or_else(|| Error::invalid(format!("no strength assigned to plaquette {p}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            ConstraintAssignment::Homogeneous { c } => c.is_finite(),
            ConstraintAssignment::PerPlaquette { strengths } => strengths.iter().all(|s| s.c.is_finite()),
        };
        if !finite {
            return Err(Error::invalid("constraint strengths must be finite"));
        }
        Ok(())
    }

    /// Negative strengths are accepted but reward violations.
    pub fn has_negative(&self) -> bool {
        match self {
            ConstraintAssignment::Homogeneous { c } => *c < 0.0,
            ConstraintAssignment::PerPlaquette { strengths } => strengths.iter().any(|s| s.c < 0.0),
        }
    }

    /// Strengths in plaquette index order.
    pub fn resolve(&self, layout: &ParityLayout) -> Result<Vec<f64>> {
        self.validate()?;
        layout.plaquettes().iter().map(|p| self.strength(p.label)).collect()
    }
}

/// How many defect counts (or which profiles) to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRange {
    UpTo(usize),
    Full,
}

impl KRange {
    pub fn resolve(self, q: usize) -> usize {
        match self {
            KRange::UpTo(k) => k.min(q),
            KRange::Full => q,
        }
    }
}

impl std::str::FromStr for KRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(KRange::Full);
        }
        s.parse::<usize>()
            .map(KRange::UpTo)
            .map_err(|_| Error::Config(format!("k range must be an integer or 'full', got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub q: usize,
    pub l0: f64,
    pub e: f64,
    pub gap: f64,
    pub p0: f64,
    /// `2|p0|`.
    pub trivial: f64,
    /// `a[k-1] = a_k`.
    pub a: Vec<f64>,
    /// `lower[k-1] = c_-k`.
    pub lower: Vec<f64>,
    /// `upper[i] = c_i` for `i = 0..=k_max_used`.
    pub upper: Vec<f64>,
    pub c_hat: f64,
    pub k_max_used: usize,
    /// True when every defect count was included, so `c_hat` is the optimum.
    pub certified: bool,
    pub label: String,
}

impl BoundsReport {
    fn assemble(inst: &IsingInstance, layout: &ParityLayout, l0: f64, e: f64, a: Vec<f64>) -> Self {
        let p0 = inst.p0();
        let lower: Vec<f64> = a.iter().enumerate().map(|(i, ak)| (e - ak) / (i + 1) as f64).collect();
        let mut upper = Vec::with_capacity(lower.len() + 1);
        let mut running = f64::NEG_INFINITY;
        upper.push(e - p0);
        for (i, &c) in lower.iter().enumerate() {
            running = running.max(c);
            upper.push(running.max((e - p0) / (i + 2) as f64));
        }
        let k_max_used = a.len();
        let certified = k_max_used == layout.q;
        let c_hat = if lower.is_empty() {
            0.0
        } else {
            lower.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let label = if certified {
            "optimum".to_string()
        } else {
            format!("lower bound (k <= {k_max_used})")
        };
        BoundsReport {
            n: inst.n(),
            q: layout.q,
            l0,
            e,
            gap: e - l0,
            p0,
            trivial: 2.0 * p0.abs(),
            a,
            lower,
            upper,
            c_hat,
            k_max_used,
            certified,
            label,
        }
    }

    /// Checks `c_hat <= c_K <= ... <= c_0 <= 2|p0|` up to `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let mut prev = self.c_hat;
        for &c in self.upper.iter().rev() {
            if c < prev - tol {
                return false;
            }
            prev = c;
        }
        prev <= self.trivial + tol
    }
}

/// Homogeneous optimum and bound families over `k = 1..=k_max`.
///
/// The full range enumerates all physical states; truncated ranges use the
/// sign-flip reduction per defect profile.
pub fn homogeneous_optimum(
    inst: &IsingInstance,
    layout: &ParityLayout,
    k_range: KRange,
    limits: &Limits,
) -> Result<BoundsReport> {
    let spec = logical_spectrum(inst, limits)?;
    let k_max = k_range.resolve(layout.q);
    let a: Vec<f64> = if k_max == layout.q && layout.q > 2 {
        let by_count = defect_count_minima(inst, layout, limits)?;
        by_count[1..].to_vec()
    } else {
        let mut a = Vec::with_capacity(k_max);
        if k_max >= 1 {
            let singles = single_violator_minima(inst, layout, limits)?;
            a.push(singles.into_iter().fold(f64::INFINITY, f64::min));
        }
        for k in 2..=k_max {
            a.push(min_over_defect_count(inst, layout, k, limits)?.value);
        }
        a
    };
    Ok(BoundsReport::assemble(inst, layout, spec.l0, spec.e, a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub satisfied: bool,
    pub checked: u64,
    /// Smallest `Σ_{ω} c - (e - a_ω)` over the checked profiles.
    pub min_slack: f64,
    pub worst: Option<DefectProfile>,
    pub scope: String,
}

/// Checks `Σ_{[i,j] ∈ ω} c_ij >= e - a_ω` for every nonempty checked ω.
pub fn verify_assignment(
    inst: &IsingInstance,
    layout: &ParityLayout,
    assign: &ConstraintAssignment,
    scope: KRange,
    limits: &Limits,
) -> Result<Verdict> {
    let c = assign.resolve(layout)?;
    let spec = logical_spectrum(inst, limits)?;
    let tol = 1e-9 * inst.p0().abs().max(1.0);
    let mut checked = 0u64;
    let mut min_slack = f64::INFINITY;
    let mut worst = None;
    let mut consider = |profile: DefectProfile, provided: f64, a: f64| {
        checked += 1;
        let slack = provided - (spec.e - a);
        if slack < min_slack {
            min_slack = slack;
            worst = Some(profile);
        }
    };
    let k_max = scope.resolve(layout.q);
    if k_max == layout.q && layout.q < 32 {
        let all = profile_minima(inst, layout, limits)?;
        for (bits, &a) in all.iter().enumerate().skip(1) {
            let provided: f64 = (0..layout.q).filter(|p| bits >> p & 1 == 1).map(|p| c[p]).sum();
            consider(profile_from_bits(layout, bits as u64), provided, a);
        }
    } else {
        for profile in profiles_up_to(layout, k_max, inst.n(), limits)? {
            let a = restricted_minimum(inst, &profile, layout, limits)?;
            let provided: f64 = profile
                .violated
                .iter()
                .map(|&p| layout.plaquette_index(p).map(|i| c[i]))
                .sum::<Result<f64>>()?;
            consider(profile, provided, a);
        }
    }
    let scope = if k_max == layout.q {
        "full".to_string()
    } else {
        format!("k <= {k_max}")
    };
    Ok(Verdict {
        satisfied: min_slack >= -tol,
        checked,
        min_slack: if checked == 0 { 0.0 } else { min_slack },
        worst,
        scope,
    })
}

fn profiles_up_to(
    layout: &ParityLayout,
    k_max: usize,
    n: usize,
    limits: &Limits,
) -> Result<Vec<DefectProfile>> {
    let mut total: u128 = 0;
    let mut count = 1u128;
    for k in 1..=k_max {
        count = count * (layout.q - k + 1) as u128 / k as u128;
        total += count;
    }
    let states = total.saturating_mul(1u128 << (n - 1));
    if states > limits.budget {
        return Err(Error::capacity(
            format!("{total} defect profiles with k <= {k_max}"),
            states,
            limits.budget,
        ));
    }
    let labels: Vec<Plaquette> = layout.plaquettes().iter().map(|p| p.label).collect();
    let mut out = Vec::new();
    fn rec(labels: &[Plaquette], start: usize, left: usize, cur: &mut Vec<Plaquette>, out: &mut Vec<DefectProfile>) {
        if !cur.is_empty() {
            out.push(DefectProfile::of(cur.iter().copied()));
        }
        if left == 0 {
            return;
        }
        for i in start..labels.len() {
            cur.push(labels[i]);
            rec(labels, i + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(&labels, 0, k_max, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Which defect profiles enter the inhomogeneous program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaFamily {
    /// Every nonempty profile (n <= 6).
    Full,
    UpTo(usize),
    Explicit(Vec<DefectProfile>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub profile: DefectProfile,
    pub rhs: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub strengths: Vec<PlaquetteStrength>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Constraints holding with equality at the solution.
    pub active: Vec<LpConstraint>,
    pub family_size: usize,
    /// False when the family was truncated, making the objective a lower bound.
    pub complete_family: bool,
    pub label: String,
}

impl LpSolution {
    pub fn assignment(&self) -> ConstraintAssignment {
        ConstraintAssignment::PerPlaquette {
            strengths: self.strengths.clone(),
        }
    }
}

/// Largest `n` for which the full profile family is solved.
pub const FULL_LP_MAX_N: usize = 6;

/// Minimizes `Σ c_ij` over `c >= 0` subject to the covering inequalities of the family.
pub fn solve_lp(
    inst: &IsingInstance,
    layout: &ParityLayout,
    family: &OmegaFamily,
    limits: &Limits,
) -> Result<LpSolution> {
    let spec = logical_spectrum(inst, limits)?;
    let mut profiles: Vec<(DefectProfile, f64)> = Vec::new();
    let complete_family = match family {
        OmegaFamily::Full => {
            if inst.n() > FULL_LP_MAX_N {
                return Err(Error::capacity(
                    format!("full constraint family at n = {}", inst.n()),
                    inst.n() as u128,
                    FULL_LP_MAX_N as u128,
                ));
            }
            let all = profile_minima(inst, layout, limits)?;
            for (bits, &a) in all.iter().enumerate().skip(1) {
                profiles.push((profile_from_bits(layout, bits as u64), a));
            }
            true
        }
        OmegaFamily::UpTo(k) => {
            let k_max = (*k).min(layout.q);
            for p in profiles_up_to(layout, k_max, inst.n(), limits)? {
                let a = restricted_minimum(inst, &p, layout, limits)?;
                profiles.push((p, a));
            }
            k_max == layout.q
        }
        OmegaFamily::Explicit(list) => {
            for p in list {
                let a = restricted_minimum(inst, p, layout, limits)?;
                profiles.push((p.clone(), a));
            }
            false
        }
    };
    let rows: Vec<CoverRow> = profiles
        .iter()
        .map(|(p, a)| {
            Ok(CoverRow {
                vars: p
                    .violated
                    .iter()
                    .map(|&pl| layout.plaquette_index(pl))
                    .collect::<Result<Vec<_>>>()?,
                rhs: spec.e - a,
            })
        })
        .collect::<Result<_>>()?;
    let sol = solve_covering(&vec![1.0; layout.q], &rows)?;
    let tol = 1e-9 * inst.p0().abs().max(1.0);
    let active = rows
        .iter()
        .zip(&profiles)
        .zip(&sol.y)
        .filter(|((row, _), _)| {
            let lhs: f64 = row.vars.iter().map(|&v| sol.x[v]).sum();
            (lhs - row.rhs).abs() <= tol
        })
        .map(|((row, (p, _)), &y)| LpConstraint {
            profile: p.clone(),
            rhs: row.rhs,
            multiplier: y,
        })
        .collect();
    let strengths = layout
        .plaquettes()
        .iter()
        .zip(&sol.x)
        .map(|(p, &c)| PlaquetteStrength {
            k: p.label.k,
            l: p.label.l,
            c,
        })
        .collect();
    Ok(LpSolution {
        strengths,
        objective: sol.objective,
        dual_objective: sol.dual_objective,
        active,
        family_size: rows.len(),
        complete_family,
        label: if complete_family {
            "optimum".into()
        } else {
            "lower bound (truncated family)".into()
        },
    })
}
