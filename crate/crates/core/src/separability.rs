//! Separable sets and the maximal separable partition.
//!
//! `S` is separable for `ν` when `ν(T) = ν(T∩S) + ν(T∖S)` for every `T`.
//! Writing `ν` through its Möbius dividends `m`,
//!
//! ```text
//! ν(T) − ν(T∩S) − ν(T∖S) = Σ_{W⊆T, W straddles S} m(W) − ν(∅)
//! ```
//!
//! where `W` straddles `S` if it meets both `S` and `F∖S`. The left side
//! vanishes for all `T` iff `ν(∅) = 0` and every straddling dividend is zero
//! (Möbius inversion of the straddling part). So the separable sets are
//! exactly the unions of connected components of the graph joining every
//! pair of features that share a nonzero dividend, and those components form
//! the unique maximal partition. [`maximal_partition_oracle`] computes the
//! same partition the slow way, by intersecting separable sets.

use serde::{Deserialize, Serialize};

use crate::subset::{mobius_transform, FeatureIndex, SubsetMask, Tolerance, ValueTable};
use crate::{Error, Result};

/// Largest `n` accepted by [`maximal_partition_oracle`] (`O(4^n)`).
pub const ORACLE_MAX_FEATURES: usize = 12;

/// Disjoint nonempty blocks covering `0..n`, sorted by lowest member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionFile", into = "PartitionFile")]
pub struct Partition {
    n: usize,
    blocks: Vec<SubsetMask>,
}

/// On-disk form: `{"n": 3, "blocks": [[0, 1], [2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub n: usize,
    pub blocks: Vec<Vec<FeatureIndex>>,
}

impl TryFrom<PartitionFile> for Partition {
    type Error = Error;

    fn try_from(file: PartitionFile) -> Result<Self> {
        Partition::from_indices(file.n, &file.blocks)
    }
}

impl From<Partition> for PartitionFile {
    fn from(p: Partition) -> Self {
        PartitionFile {
            n: p.n,
            blocks: p.blocks.iter().map(|b| b.iter().collect()).collect(),
        }
    }
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<SubsetMask>) -> Result<Self> {
        if n == 0 || n > 31 {
            return Err(Error::InvalidPartition(format!("feature count {n} out of range")));
        }
        let mut seen = SubsetMask::EMPTY;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if b.check(n).is_err() {
                return Err(Error::InvalidPartition(format!("block {b} has features outside 0..{n}")));
            }
            let overlap = seen.intersection(*b);
            if !overlap.is_empty() {
                return Err(Error::InvalidPartition(format!("blocks overlap on {overlap}")));
            }
            seen = seen.union(*b);
        }
        let gap = SubsetMask::full(n).difference(seen);
        if !gap.is_empty() {
            return Err(Error::InvalidPartition(format!("features {gap} are not covered")));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(Partition { n, blocks })
    }

    pub fn from_indices(n: usize, blocks: &[Vec<FeatureIndex>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut m = SubsetMask::EMPTY;
            for &f in b {
                if f >= n {
                    return Err(Error::InvalidPartition(format!("feature {f} outside 0..{n}")));
                }
                if m.contains(f) {
                    return Err(Error::InvalidPartition(format!("feature {f} repeated in a block")));
                }
                m = m.with(f);
            }
            masks.push(m);
        }
        Partition::new(n, masks)
    }

    /// One block holding every feature.
    pub fn whole(n: usize) -> Self {
        Partition { n, blocks: vec![SubsetMask::full(n)] }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { n, blocks: (0..n).map(SubsetMask::singleton).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, f: FeatureIndex) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(f))
    }

    /// Union of the blocks selected by a mask over block indices.
    pub fn union_of(&self, meta: SubsetMask) -> SubsetMask {
        meta.iter().fold(SubsetMask::EMPTY, |acc, i| acc.union(self.blocks[i]))
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b.is_subset_of(*c)))
    }

    /// True if `s` is a union of blocks.
    pub fn is_union_of_blocks(&self, s: SubsetMask) -> bool {
        self.blocks
            .iter()
            .all(|b| b.is_subset_of(s) || b.intersection(s).is_empty())
    }
}

/// Meta game over blocks: `ν_G(H) = ν(∪_{g∈H} g)`.
pub fn union_table(t: &ValueTable, p: &Partition) -> Result<ValueTable> {
    if p.n() != t.n() {
        return Err(Error::DimensionMismatch { left: t.n(), right: p.n() });
    }
    ValueTable::from_fn(p.len(), |h| t.get(p.union_of(h)))
}

/// Worst additivity residual of one candidate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub set: SubsetMask,
    pub separable: bool,
    pub worst_t: SubsetMask,
    pub worst_residual: f64,
}

/// Scans all `2^n` coalitions `T` for `|ν(T) − ν(T∩S) − ν(T∖S)|`.
pub fn is_separable(t: &ValueTable, s: SubsetMask, tol: Tolerance) -> Result<SeparabilityReport> {
    s.check(t.n())?;
    let mut worst_t = SubsetMask::EMPTY;
    let mut worst = 0.0;
    for bits in 0..1u32 << t.n() {
        let tt = SubsetMask(bits);
        let r = (t.get(tt) - t.get(tt.intersection(s)) - t.get(tt.difference(s))).abs();
        if r > worst {
            worst = r;
            worst_t = tt;
        }
    }
    Ok(SeparabilityReport {
        set: s,
        separable: worst <= tol.value(),
        worst_t,
        worst_residual: worst,
    })
}

/// Per-block separability of a structurally valid partition.
pub fn validate_partition(t: &ValueTable, p: &Partition, tol: Tolerance) -> Result<Vec<SeparabilityReport>> {
    if p.n() != t.n() {
        return Err(Error::DimensionMismatch { left: t.n(), right: p.n() });
    }
    p.blocks().iter().map(|&b| is_separable(t, b, tol)).collect()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn check_empty_value(t: &ValueTable, tol: Tolerance) -> Result<()> {
    let e = t.get(SubsetMask::EMPTY);
    if !tol.is_zero(e) {
        return Err(Error::EmptySetNonZero(e));
    }
    Ok(())
}

/// The unique maximal partition into separable sets.
///
/// Features `f`, `g` are joined when some dividend `m(W)` with `{f,g} ⊆ W`
/// exceeds `tol` in magnitude; blocks are the connected components. The
/// result is re-validated at `2^n·tol`, and any block failing that check is
/// merged with the other failing blocks (the validator has the last word on
/// near-threshold inputs).
///
/// Fails with [`Error::EmptySetNonZero`] when `|ν(∅)| > tol`: no set, not
/// even `F`, is separable then.
pub fn maximal_partition(t: &ValueTable, tol: Tolerance) -> Result<Partition> {
    check_empty_value(t, tol)?;
    let n = t.n();
    if n == 1 {
        return Ok(Partition::singletons(1));
    }
    let m = mobius_transform(t);
    // Connecting each member of W to its lowest member gives the same
    // components as the full clique on W.
    let mut reach = vec![SubsetMask::EMPTY; n];
    for (w, &d) in m.dividends().iter().enumerate() {
        let w = SubsetMask(w as u32);
        if w.len() >= 2 && d.abs() > tol.value() {
            let lo = w.first().unwrap();
            reach[lo] = reach[lo].union(w);
        }
    }
    let mut dsu = DisjointSets::new(n);
    for (lo, r) in reach.iter().enumerate() {
        for f in r.iter() {
            dsu.union(lo, f);
        }
    }
    let mut blocks = vec![SubsetMask::EMPTY; n];
    for f in 0..n {
        let root = dsu.find(f);
        blocks[root] = blocks[root].with(f);
    }
    blocks.retain(|b| !b.is_empty());
    let mut p = Partition::new(n, blocks)?;

    let check_tol = tol.scaled((1u64 << n) as f64);
    loop {
        let reports = validate_partition(t, &p, check_tol)?;
        let failing: Vec<SubsetMask> = reports.iter().filter(|r| !r.separable).map(|r| r.set).collect();
        if failing.is_empty() {
            return Ok(p);
        }
        if p.len() <= 2 {
            return Ok(Partition::whole(n));
        }
        let merged = failing.iter().fold(SubsetMask::EMPTY, |a, b| a.union(*b));
        let mut next: Vec<SubsetMask> = p.blocks().iter().copied().filter(|b| !failing.contains(b)).collect();
        if failing.len() == 1 {
            // a lone failing block absorbs the first passing block
            let absorb = next.remove(0);
            next.push(merged.union(absorb));
        } else {
            next.push(merged);
        }
        p = Partition::new(n, next)?;
    }
}

/// The maximal partition by direct enumeration: `S_f` is the intersection
/// of every separable set containing `f`, and the distinct `S_f` are the
/// blocks. `O(4^n)`, limited to `n <= 12`.
pub fn maximal_partition_oracle(t: &ValueTable, tol: Tolerance) -> Result<Partition> {
    let n = t.n();
    if n > ORACLE_MAX_FEATURES {
        return Err(Error::TooManyFeatures { n, cap: ORACLE_MAX_FEATURES });
    }
    check_empty_value(t, tol)?;
    let full = SubsetMask::full(n);
    let mut s_f = vec![full; n];
    for bits in 0..1u32 << n {
        let s = SubsetMask(bits);
        if is_separable(t, s, tol)?.separable {
            for f in s.iter() {
                s_f[f] = s_f[f].intersection(s);
            }
        }
    }
    let mut blocks: Vec<SubsetMask> = Vec::new();
    for s in s_f {
        if !blocks.contains(&s) {
            blocks.push(s);
        }
    }
    Partition::new(n, blocks)
}

/// Meta game `ν_meta(H) = Σ_{g∈H} ν(g)` of a separable partition.
pub fn induced_meta_table(t: &ValueTable, p: &Partition, tol: Tolerance) -> Result<ValueTable> {
    for r in validate_partition(t, p, tol)? {
        if !r.separable {
            return Err(Error::NotSeparable {
                block: r.set.bits(),
                witness: r.worst_t.bits(),
                residual: r.worst_residual,
            });
        }
    }
    let block_values: Vec<f64> = p.blocks().iter().map(|&b| t.get(b)).collect();
    let meta = ValueTable::from_fn(p.len(), |h| h.iter().map(|i| block_values[i]).sum())?;
    for bits in 0..1u32 << p.len() {
        let h = SubsetMask(bits);
        let direct = t.get(p.union_of(h));
        let r = (meta.get(h) - direct).abs();
        if r > tol.value() * h.len().max(1) as f64 {
            return Err(Error::NotSeparable {
                block: p.union_of(h).bits(),
                witness: p.union_of(h).bits(),
                residual: r,
            });
        }
    }
    Ok(meta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub complement: SeparabilityReport,
    pub union: SeparabilityReport,
    pub intersection: SeparabilityReport,
    pub complement_ok: bool,
    pub union_ok: bool,
    pub intersection_ok: bool,
}

impl ClosureReport {
    pub fn all_ok(&self) -> bool {
        self.complement_ok && self.union_ok && self.intersection_ok
    }
}

/// Checks that `F∖S1`, `S1∪S2` and `S1∩S2` are separable given separable
/// `S1`, `S2`.
///
/// The complement has exactly the residuals of `S1`, so it is checked at
/// `tol`. Union and intersection residuals are bounded by `r1 + 2·r2` (three
/// applications of the separability identity), so they are checked at
/// `3·tol`.
pub fn closure_check(t: &ValueTable, s1: SubsetMask, s2: SubsetMask, tol: Tolerance) -> Result<ClosureReport> {
    for (which, s) in [("S1", s1), ("S2", s2)] {
        let r = is_separable(t, s, tol)?;
        if !r.separable {
            return Err(Error::ClosurePrecondition { which, residual: r.worst_residual });
        }
    }
    let derived = tol.scaled(3.0);
    let complement = is_separable(t, s1.complement(t.n()), tol)?;
    let union = is_separable(t, s1.union(s2), derived)?;
    let intersection = is_separable(t, s1.intersection(s2), derived)?;
    Ok(ClosureReport {
        complement_ok: complement.separable,
        union_ok: union.separable,
        intersection_ok: intersection.separable,
        complement,
        union,
        intersection,
    })
}
