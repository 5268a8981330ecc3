//! Parity (LHZ) layout for `n` logical spins.
//!
//! Physical spins are labeled by sites `(i, j)` with `1 <= i < j <= n` and
//! carry the relative orientation `σ_i σ_j`. Plaquettes are labeled `[k, l]`
//! with `1 <= k < l <= n - 1`. A plaquette with `l > k + 1` constrains the
//! four sites `(k,l), (k,l+1), (k+1,l), (k+1,l+1)`; the bottom row `l = k + 1`
//! constrains the three sites `(k,k+1), (k,k+2), (k+1,k+2)`.
//!
//! Bit conventions: site bits are ordered lexicographically in `(i, j)`, and a
//! set bit means the spin points down (`-1`), so XOR of words multiplies spins.
//! Logical configurations are `u64` words where bit `b` set means spin `b + 1`
//! is down.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::bounds::ConstraintAssignment;
use crate::error::{Error, Result};
use crate::instances::IsingInstance;

/// Physical spin label `(i, j)`, 1-based, `i < j`. Also used for logical edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub i: usize,
    pub j: usize,
}

impl Site {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::invalid(format!("site ({i},{j}) needs 1 <= i < j")));
        }
        Ok(Site { i, j })
    }

    /// Bit position of this site among `n(n-1)/2` sites.
    pub fn index(self, n: usize) -> usize {
        pair_index(self.i, self.j, n)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Plaquette label `[k, l]`, 1-based, `k < l <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Plaquette {
    pub k: usize,
    pub l: usize,
}

impl Plaquette {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k == 0 || k >= l {
            return Err(Error::invalid(format!("plaquette [{k},{l}] needs 1 <= k < l")));
        }
        Ok(Plaquette { k, l })
    }

    pub fn is_bottom_row(self) -> bool {
        self.l == self.k + 1
    }
}

impl fmt::Display for Plaquette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.k, self.l)
    }
}

fn pair_index(i: usize, j: usize, n: usize) -> usize {
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

/// Fixed-length bit word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, bit: usize) -> bool {
        debug_assert!(bit < self.len);
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn set(&mut self, bit: usize, value: bool) {
        assert!(bit < self.len, "bit {bit} out of range {}", self.len);
        let w = &mut self.words[bit / 64];
        if value {
            *w |= 1 << (bit % 64);
        } else {
            *w &= !(1 << (bit % 64));
        }
    }

    pub fn flip(&mut self, bit: usize) {
        assert!(bit < self.len, "bit {bit} out of range {}", self.len);
        self.words[bit / 64] ^= 1 << (bit % 64);
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "bit length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&b| self.get(b))
    }

    /// Low 64 bits; only meaningful when `len <= 64`.
    pub fn as_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut s = BitString::zeros(len);
        if len > 0 {
            let keep = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
            s.words[0] = value & keep;
        }
        s
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|b| if self.get(b) { '1' } else { '0' }).collect();
        write!(f, "BitString({s})")
    }
}

/// Physical spin configuration over the `m` sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhysicalState(pub BitString);

impl PhysicalState {
    pub fn all_up(layout: &ParityLayout) -> Self {
        PhysicalState(BitString::zeros(layout.m))
    }

    /// Spin value `+1` or `-1` of a site.
    pub fn spin(&self, layout: &ParityLayout, site: Site) -> i8 {
        if self.0.get(layout.site_index(site)) {
            -1
        } else {
            1
        }
    }

    pub fn apply_mask(&mut self, mask: &BitString) {
        self.0.xor_assign(mask);
    }
}

/// Set of violated plaquettes. The empty profile is the logical subspace.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DefectProfile {
    pub violated: BTreeSet<Plaquette>,
}

impl DefectProfile {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of<I: IntoIterator<Item = Plaquette>>(plaquettes: I) -> Self {
        DefectProfile {
            violated: plaquettes.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.violated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn symmetric_difference(&self, other: &DefectProfile) -> DefectProfile {
        DefectProfile {
            violated: self.violated.symmetric_difference(&other.violated).copied().collect(),
        }
    }
}

impl fmt::Display for DefectProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (idx, p) in self.violated.iter().enumerate() {
            if idx > 0 {
                f.write_char(',')?;
            }
            write!(f, "{p}")?;
        }
        f.write_char('}')
    }
}

#[derive(Clone, Debug)]
pub struct PlaquetteEntry {
    pub label: Plaquette,
    /// Member site bit positions (3 on the bottom row, 4 otherwise).
    pub members: Vec<usize>,
}

/// Index structures of the parity layout for `n` logical spins.
#[derive(Clone, Debug)]
pub struct ParityLayout {
    pub n: usize,
    /// Number of physical spins, `n(n-1)/2`.
    pub m: usize,
    /// Number of plaquettes, `(n-1)(n-2)/2`.
    pub q: usize,
    sites: Vec<Site>,
    plaquettes: Vec<PlaquetteEntry>,
    masks: Vec<BitString>,
    site_plaquettes: Vec<Vec<usize>>,
}

impl ParityLayout {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("parity layout needs n >= 2, got {n}")));
        }
        let m = n * (n - 1) / 2;
        let q = (n - 1) * (n - 2) / 2;
        let mut sites = Vec::with_capacity(m);
        for i in 1..=n {
            for j in i + 1..=n {
                sites.push(Site { i, j });
            }
        }
        let mut plaquettes = Vec::with_capacity(q);
        let mut masks = Vec::with_capacity(q);
        let mut site_plaquettes = vec![Vec::new(); m];
        for k in 1..n {
            for l in k + 1..n {
                let label = Plaquette { k, l };
                let member_sites: Vec<(usize, usize)> = if label.is_bottom_row() {
                    vec![(k, k + 1), (k, k + 2), (k + 1, k + 2)]
                } else {
                    vec![(k, l), (k, l + 1), (k + 1, l), (k + 1, l + 1)]
                };
                let members: Vec<usize> =
                    member_sites.iter().map(|&(i, j)| pair_index(i, j, n)).collect();
                let p_idx = plaquettes.len();
                for &s in &members {
                    site_plaquettes[s].push(p_idx);
                }
                // Flip rectangle {(i, j) : i <= k, j > l}.
                let mut mask = BitString::zeros(m);
                for i in 1..=k {
                    for j in l + 1..=n {
                        mask.set(pair_index(i, j, n), true);
                    }
                }
                plaquettes.push(PlaquetteEntry { label, members });
                masks.push(mask);
            }
        }
        Ok(ParityLayout {
            n,
            m,
            q,
            sites,
            plaquettes,
            masks,
            site_plaquettes,
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn plaquettes(&self) -> &[PlaquetteEntry] {
        &self.plaquettes
    }

    pub fn site_index(&self, site: Site) -> usize {
        assert!(site.j <= self.n, "site {site} outside layout n={}", self.n);
        site.index(self.n)
    }

    pub fn plaquette_index(&self, p: Plaquette) -> Result<usize> {
        if p.k == 0 || p.k >= p.l || p.l >= self.n {
            return Err(Error::invalid(format!(
                "plaquette {p} is not valid for n = {}",
                self.n
            )));
        }
        Ok(pair_index(p.k, p.l, self.n - 1))
    }

    /// Plaquette indices each site participates in.
    pub fn site_plaquettes(&self, site_index: usize) -> &[usize] {
        &self.site_plaquettes[site_index]
    }

    /// Mask of the flip rectangle `{(i, j) : i <= k, j > l}` for plaquette `[k, l]`.
    /// XOR-ing it into any state toggles the parity of `[k, l]` only.
    pub fn defect_mask(&self, p: Plaquette) -> Result<&BitString> {
        Ok(&self.masks[self.plaquette_index(p)?])
    }

    pub fn mask_by_index(&self, plaquette_index: usize) -> &BitString {
        &self.masks[plaquette_index]
    }

    /// XOR of the masks of all plaquettes in `omega`.
    pub fn profile_mask(&self, omega: &DefectProfile) -> Result<BitString> {
        let mut mask = BitString::zeros(self.m);
        for &p in &omega.violated {
            mask.xor_assign(self.defect_mask(p)?);
        }
        Ok(mask)
    }

    fn check_logical(&self, logical: u64) -> Result<()> {
        if self.n > 64 || (self.n < 64 && logical >> self.n != 0) {
            return Err(Error::invalid(format!(
                "logical configuration {logical:#x} does not fit n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Parity image of a logical configuration: bit `(i, j)` is `x_i XOR x_j`.
    pub fn logical_to_physical(&self, logical: u64) -> Result<PhysicalState> {
        self.check_logical(logical)?;
        let mut bits = BitString::zeros(self.m);
        for (idx, s) in self.sites.iter().enumerate() {
            let down = ((logical >> (s.i - 1)) ^ (logical >> (s.j - 1))) & 1 == 1;
            if down {
                bits.set(idx, true);
            }
        }
        Ok(PhysicalState(bits))
    }

    fn is_violated(&self, state: &PhysicalState, p_idx: usize) -> bool {
        self.plaquettes[p_idx]
            .members
            .iter()
            .filter(|&&s| state.0.get(s))
            .count()
            % 2
            == 1
    }

    /// Plaquettes with an odd number of down spins among their members.
    pub fn violated_plaquettes(&self, state: &PhysicalState) -> Result<DefectProfile> {
        self.check_state(state)?;
        Ok(DefectProfile {
            violated: (0..self.q)
                .filter(|&p| self.is_violated(state, p))
                .map(|p| self.plaquettes[p].label)
                .collect(),
        })
    }

    /// Violation pattern as a `q`-bit word indexed by plaquette index.
    pub fn violation_bits(&self, state: &PhysicalState) -> BitString {
        let mut bits = BitString::zeros(self.q);
        for p in 0..self.q {
            if self.is_violated(state, p) {
                bits.set(p, true);
            }
        }
        bits
    }

    fn check_state(&self, state: &PhysicalState) -> Result<()> {
        if state.0.len() != self.m {
            return Err(Error::invalid(format!(
                "state has {} bits, layout has m = {}",
                state.0.len(),
                self.m
            )));
        }
        Ok(())
    }

    /// Local-field energy `H_J = Σ J_ij s_(i,j)`.
    pub fn field_energy(&self, state: &PhysicalState, inst: &IsingInstance) -> Result<f64> {
        self.check_state(state)?;
        if inst.n() != self.n {
            return Err(Error::invalid(format!(
                "instance has n = {}, layout has n = {}",
                inst.n(),
                self.n
            )));
        }
        Ok(inst
            .couplings()
            .map(|(site, j)| {
                if state.0.get(self.site_index(site)) {
                    -j
                } else {
                    j
                }
            })
            .sum())
    }

    /// `H_J` plus the strengths of violated plaquettes. Satisfied plaquettes
    /// contribute zero, so states of the logical subspace carry exactly their
    /// logical energy.
    pub fn physical_energy(
        &self,
        state: &PhysicalState,
        inst: &IsingInstance,
        constraints: &ConstraintAssignment,
    ) -> Result<f64> {
        let field = self.field_energy(state, inst)?;
        let mut penalty = 0.0;
        for p in 0..self.q {
            if self.is_violated(state, p) {
                penalty += constraints.strength(self.plaquettes[p].label)?;
            }
        }
        Ok(field + penalty)
    }

    /// Text table of plaquette members and flip masks, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# parity layout n={} m={} q={}", self.n, self.m, self.q);
        let _ = writeln!(out, "plaquette\tmembers\tmask");
        for (entry, mask) in self.plaquettes.iter().zip(&self.masks) {
            let members: Vec<String> =
                entry.members.iter().map(|&s| self.sites[s].to_string()).collect();
            let mask_sites: Vec<String> = mask.ones().map(|s| self.sites[s].to_string()).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                entry.label,
                members.join(" "),
                mask_sites.join(" ")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites_of(layout: &ParityLayout, mask: &BitString) -> Vec<(usize, usize)> {
        mask.ones().map(|b| (layout.sites()[b].i, layout.sites()[b].j)).collect()
    }

    #[test]
    fn counts() {
        for n in 2..12 {
            let l = ParityLayout::new(n).unwrap();
            assert_eq!(l.m - l.q, n - 1);
            assert_eq!(l.plaquettes().len(), l.q);
            for (idx, s) in l.sites().iter().enumerate() {
                assert_eq!(s.index(n), idx);
            }
            for (idx, p) in l.plaquettes().iter().enumerate() {
                assert_eq!(l.plaquette_index(p.label).unwrap(), idx);
            }
        }
        assert!(ParityLayout::new(1).is_err());
    }

    #[test]
    fn members_follow_geometry() {
        let l = ParityLayout::new(5).unwrap();
        let idx = |i, j| Site { i, j }.index(5);
        let p = &l.plaquettes()[l.plaquette_index(Plaquette { k: 2, l: 4 }).unwrap()];
        assert_eq!(p.members, vec![idx(2, 4), idx(2, 5), idx(3, 4), idx(3, 5)]);
        let p = &l.plaquettes()[l.plaquette_index(Plaquette { k: 3, l: 4 }).unwrap()];
        assert_eq!(p.members, vec![idx(3, 4), idx(3, 5), idx(4, 5)]);
    }

    #[test]
    fn masks_for_n4() {
        let l = ParityLayout::new(4).unwrap();
        let m = l.defect_mask(Plaquette { k: 2, l: 3 }).unwrap();
        assert_eq!(sites_of(&l, m), vec![(1, 4), (2, 4)]);
        let m = l.defect_mask(Plaquette { k: 1, l: 2 }).unwrap();
        assert_eq!(sites_of(&l, m), vec![(1, 3), (1, 4)]);
        assert!(l.defect_mask(Plaquette { k: 2, l: 4 }).is_err());
    }

    #[test]
    fn logical_image_of_mixed_state() {
        let l = ParityLayout::new(4).unwrap();
        // (+,+,-,-): spins 3 and 4 down.
        let s = l.logical_to_physical(0b1100).unwrap();
        let down = sites_of(&l, &s.0);
        assert_eq!(down, vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
        assert!(l.violated_plaquettes(&s).unwrap().is_empty());
        assert!(l.logical_to_physical(1 << 4).is_err());
    }

    #[test]
    fn figure_examples() {
        let l = ParityLayout::new(5).unwrap();
        let mut s = l.logical_to_physical(0b10110).unwrap();
        s.apply_mask(l.defect_mask(Plaquette { k: 2, l: 3 }).unwrap());
        assert_eq!(
            l.violated_plaquettes(&s).unwrap(),
            DefectProfile::of([Plaquette { k: 2, l: 3 }])
        );

        let l = ParityLayout::new(6).unwrap();
        let mut s = l.logical_to_physical(0b101001).unwrap();
        s.apply_mask(l.defect_mask(Plaquette { k: 2, l: 3 }).unwrap());
        s.apply_mask(l.defect_mask(Plaquette { k: 3, l: 5 }).unwrap());
        assert_eq!(
            l.violated_plaquettes(&s).unwrap(),
            DefectProfile::of([Plaquette { k: 2, l: 3 }, Plaquette { k: 3, l: 5 }])
        );
    }

    #[test]
    fn dump_lists_every_plaquette() {
        let l = ParityLayout::new(4).unwrap();
        let d = l.dump();
        assert!(d.contains("[2,3]\t(2,3) (2,4) (3,4)\t(1,4) (2,4)"));
        assert_eq!(d.lines().count(), 2 + l.q);
    }
}
