//! Coalitions as bitmasks and set functions as dense tables.
//!
//! Feature `i` corresponds to bit `i`; a table over `n` features stores one
//! value per mask in `0..2^n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Index of a feature in `0..n`.
pub type FeatureIndex = usize;

/// Default cap on the feature count of a dense table (8 MB of `f64`).
pub const DEFAULT_MAX_FEATURES: usize = 20;

/// Absolute upper bound for [`ValueTable::with_cap`].
pub const HARD_MAX_FEATURES: usize = 24;

/// A subset of features, bit `i` set iff feature `i` is a member.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// The full feature set `F` over `n` features.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 31);
        SubsetMask(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(f: FeatureIndex) -> Self {
        SubsetMask(1 << f)
    }

    pub fn from_features<I: IntoIterator<Item = FeatureIndex>>(features: I) -> Self {
        SubsetMask(features.into_iter().fold(0, |acc, f| acc | (1 << f)))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn contains(self, f: FeatureIndex) -> bool {
        self.0 >> f & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    #[inline]
    pub fn complement(self, n: usize) -> Self {
        SubsetMask::full(n).difference(self)
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn with(self, f: FeatureIndex) -> Self {
        SubsetMask(self.0 | (1 << f))
    }

    #[inline]
    pub fn without(self, f: FeatureIndex) -> Self {
        SubsetMask(self.0 & !(1 << f))
    }

    /// Lowest member, if any.
    pub fn first(self) -> Option<FeatureIndex> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = FeatureIndex> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let f = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(f)
        })
    }

    /// All subsets of `self`, in ascending mask order.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let sup = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == sup { None } else { Some((cur.wrapping_sub(sup)) & sup) };
            Some(SubsetMask(cur))
        })
    }

    pub fn check(self, n: usize) -> Result<Self> {
        if (self.0 as u64) >> n != 0 {
            return Err(Error::MaskOutOfRange { mask: self.0, n });
        }
        Ok(self)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "f{i}")?;
        }
        f.write_str("}")
    }
}

/// Absolute comparison tolerance threaded through every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerance {
    abs_tol: f64,
}

impl Tolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(abs_tol: f64) -> Result<Self> {
        if !abs_tol.is_finite() || abs_tol < 0.0 {
            return Err(Error::InvalidTolerance(abs_tol));
        }
        Ok(Tolerance { abs_tol })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.abs_tol
    }

    /// `|x| <= tol`
    #[inline]
    pub fn is_zero(self, x: f64) -> bool {
        x.abs() <= self.abs_tol
    }

    pub fn scaled(self, factor: f64) -> Self {
        Tolerance { abs_tol: self.abs_tol * factor }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: Self::DEFAULT }
    }
}

/// Dense set function `ν` over all `2^n` subsets of `n` features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTable {
    n: usize,
    values: Vec<f64>,
}

impl TryFrom<RawTable> for ValueTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        ValueTable::new(raw.n, raw.values)
    }
}

impl ValueTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_cap(n, values, DEFAULT_MAX_FEATURES)
    }

    pub fn with_cap(n: usize, values: Vec<f64>, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_MAX_FEATURES);
        if n == 0 {
            return Err(Error::NoFeatures);
        }
        if n > cap {
            return Err(Error::TooManyFeatures { n, cap });
        }
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::LengthMismatch { n, expected, got: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(ValueTable { n, values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(SubsetMask) -> f64) -> Result<Self> {
        if n > HARD_MAX_FEATURES {
            return Err(Error::TooManyFeatures { n, cap: HARD_MAX_FEATURES });
        }
        let values = (0..1u32 << n).map(SubsetMask).map(f).collect();
        Self::with_cap(n, values, HARD_MAX_FEATURES)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| 0.0)
    }

    /// Additive game `ν(S) = Σ_{i∈S} c_i`.
    pub fn additive(coefficients: &[f64]) -> Result<Self> {
        Self::from_fn(coefficients.len(), |s| s.iter().map(|i| coefficients[i]).sum())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, s: SubsetMask) -> f64 {
        self.values[s.index()]
    }

    #[inline]
    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    /// Marginal contribution `ν(S ∪ {f}) − ν(S)`.
    #[inline]
    pub fn marginal(&self, s: SubsetMask, f: FeatureIndex) -> f64 {
        self.get(s.with(f)) - self.get(s)
    }

    pub fn check_feature(&self, f: FeatureIndex) -> Result<()> {
        if f >= self.n {
            return Err(Error::FeatureOutOfRange { feature: f, n: self.n });
        }
        Ok(())
    }

    pub fn check_same_n(&self, other: &ValueTable) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Harsanyi dividends `m` with `ν(T) = Σ_{W⊆T} m(W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusTable {
    n: usize,
    dividends: Vec<f64>,
}

impl MobiusTable {
    pub fn new(n: usize, dividends: Vec<f64>) -> Result<Self> {
        // same shape rules as a value table
        let t = ValueTable::with_cap(n, dividends, HARD_MAX_FEATURES)?;
        Ok(MobiusTable { n: t.n, dividends: t.values })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dividends(&self) -> &[f64] {
        &self.dividends
    }

    #[inline]
    pub fn get(&self, w: SubsetMask) -> f64 {
        self.dividends[w.index()]
    }
}

/// Fast subset Möbius transform, `O(n·2^n)`.
pub fn mobius_transform(t: &ValueTable) -> MobiusTable {
    let mut a = t.values.clone();
    for i in 0..t.n {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit != 0 {
                a[mask] -= a[mask ^ bit];
            }
        }
    }
    MobiusTable { n: t.n, dividends: a }
}

/// Inverse of [`mobius_transform`]: subset sums of the dividends.
pub fn zeta_transform(m: &MobiusTable) -> ValueTable {
    let mut a = m.dividends.clone();
    for i in 0..m.n {
        let bit = 1usize << i;
        for mask in 0..a.len() {
            if mask & bit != 0 {
                a[mask] += a[mask ^ bit];
            }
        }
    }
    ValueTable { n: m.n, values: a }
}

/// Result of [`eliminate`]: the reduced table and, for each new feature
/// index, the original index it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Elimination {
    pub table: ValueTable,
    pub kept: Vec<FeatureIndex>,
}

/// Maps a mask over compacted indices back to original indices.
pub(crate) fn expand_mask(compact: u32, kept: &[FeatureIndex]) -> SubsetMask {
    let mut out = 0u32;
    let mut bits = compact;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        out |= 1 << kept[j];
        bits &= bits - 1;
    }
    SubsetMask(out)
}

/// Removes the features in `removed`, keeping `ν′(S) = ν(S)` for every
/// surviving subset. Surviving features are renumbered in ascending order.
pub fn eliminate(t: &ValueTable, removed: SubsetMask) -> Result<Elimination> {
    removed.check(t.n)?;
    let kept: Vec<FeatureIndex> = removed.complement(t.n).iter().collect();
    if kept.is_empty() {
        return Err(Error::EliminateAll);
    }
    let values = (0..1u32 << kept.len())
        .map(|s| t.get(expand_mask(s, &kept)))
        .collect();
    Ok(Elimination {
        table: ValueTable { n: kept.len(), values },
        kept,
    })
}

/// Entrywise `α·t1 + (1−α)·t2`.
pub fn mix(t1: &ValueTable, t2: &ValueTable, alpha: f64) -> Result<ValueTable> {
    t1.check_same_n(t2)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let values = t1
        .values
        .iter()
        .zip(&t2.values)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    Ok(ValueTable { n: t1.n, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mobius(t: &ValueTable) -> Vec<f64> {
        (0..1u32 << t.n())
            .map(|w| {
                SubsetMask(w)
                    .subsets()
                    .map(|s| {
                        let sign = if (SubsetMask(w).len() - s.len()) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * t.get(s)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn construction_contract() {
        let t = ValueTable::new(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(t.get(SubsetMask::EMPTY), 0.0);
        assert_eq!(t.get(SubsetMask::singleton(0)), 1.0);
        assert!(ValueTable::new(2, vec![0.0, 0.0, 1.0, 2.0]).is_ok());
        assert!(matches!(
            ValueTable::new(2, vec![0.0, 1.0]),
            Err(Error::LengthMismatch { expected: 4, got: 2, .. })
        ));
        assert!(matches!(ValueTable::new(1, vec![0.0, f64::NAN]), Err(Error::NonFinite { index: 1, .. })));
        assert!(matches!(ValueTable::new(0, vec![0.0]), Err(Error::NoFeatures)));
        assert!(matches!(
            ValueTable::new(21, vec![]),
            Err(Error::TooManyFeatures { n: 21, cap: 20 })
        ));
        assert!(ValueTable::with_cap(3, vec![0.0; 8], 2).is_err());
    }

    #[test]
    fn json_rejects_wrong_length() {
        let ok: ValueTable = serde_json::from_str(r#"{"n":1,"values":[0,1]}"#).unwrap();
        assert_eq!(ok.values(), &[0.0, 1.0]);
        assert!(serde_json::from_str::<ValueTable>(r#"{"n":2,"values":[0,1]}"#).is_err());
    }

    #[test]
    fn two_feature_mobius() {
        let (a, b, c) = (0.3, -1.25, 2.5);
        let t = ValueTable::new(2, vec![0.0, a, b, a + b + c]).unwrap();
        let m = mobius_transform(&t);
        assert_eq!(m.dividends(), &[0.0, a, b, c]);
        let back = zeta_transform(&MobiusTable::new(2, vec![0.0, a, b, c]).unwrap());
        assert_eq!(back.values(), t.values());
        let zero = zeta_transform(&MobiusTable::new(3, vec![0.0; 8]).unwrap());
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn additive_has_no_interactions() {
        let t = ValueTable::additive(&[0.5, -1.0, 2.0, 0.25]).unwrap();
        let m = mobius_transform(&t);
        for w in 0..16u32 {
            if w.count_ones() >= 2 {
                assert!(m.get(SubsetMask(w)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn toy_table_dividends() {
        let t = ValueTable::new(
            3,
            vec![0.0, 0.5, 0.5, 0.5, 1.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0],
        )
        .unwrap();
        let m = mobius_transform(&t);
        let naive = naive_mobius(&t);
        assert!((m.get(SubsetMask(0b011)) + 0.5).abs() < 1e-12);
        assert!(m.get(SubsetMask(0b101)).abs() < 1e-12);
        assert!(m.get(SubsetMask(0b110)).abs() < 1e-12);
        assert!(m.get(SubsetMask(0b111)).abs() < 1e-12);
        for (x, y) in m.dividends().iter().zip(&naive) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eliminate_examples() {
        let toy = ValueTable::new(
            3,
            vec![0.0, 0.5, 0.5, 0.5, 1.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0],
        )
        .unwrap();
        let e = eliminate(&toy, SubsetMask::singleton(2)).unwrap();
        assert_eq!(e.table.values(), &[0.0, 0.5, 0.5, 0.5]);
        assert_eq!(e.kept, vec![0, 1]);

        let same = eliminate(&toy, SubsetMask::EMPTY).unwrap();
        assert_eq!(same.table, toy);

        let t = ValueTable::new(2, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let e = eliminate(&t, SubsetMask::singleton(0)).unwrap();
        assert_eq!(e.table.values(), &[0.0, 1.0]);
        assert_eq!(e.kept, vec![1]);

        assert!(matches!(eliminate(&t, SubsetMask::full(2)), Err(Error::EliminateAll)));
        assert!(eliminate(&t, SubsetMask(0b100)).is_err());
    }

    #[test]
    fn mix_examples() {
        let x0 = ValueTable::new(2, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let x1 = ValueTable::new(2, vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(mix(&x0, &x1, 0.5).unwrap().values(), &[0.0, 0.5, 1.0, 1.5]);
        assert_eq!(mix(&x0, &x0, 0.3).unwrap(), x0);
        assert_eq!(mix(&x0, &x1, 1.0).unwrap(), x0);
        assert!(matches!(mix(&x0, &x1, 1.5), Err(Error::AlphaOutOfRange(_))));
        let small = ValueTable::new(1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(mix(&x0, &small, 0.5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn subset_iteration() {
        let s = SubsetMask(0b1010);
        let subs: Vec<u32> = s.subsets().map(|m| m.0).collect();
        assert_eq!(subs, vec![0, 2, 8, 10]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(SubsetMask::EMPTY.subsets().count(), 1);
        assert_eq!(s.to_string(), "{f1,f3}");
        assert_eq!(SubsetMask::full(3).0, 7);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(-1.0).is_err());
        assert!(Tolerance::new(f64::INFINITY).is_err());
        assert_eq!(Tolerance::default().value(), 1e-9);
    }
}
