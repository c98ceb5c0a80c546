//! The four importance scores over a value table.
//!
//! | method    | score of feature `f`                                   |
//! |-----------|--------------------------------------------------------|
//! | Bivariate | `ν({f})`                                               |
//! | Ablation  | `ν(F) − ν(F∖{f})`                                      |
//! | Shapley   | `Σ_{S⊆F∖{f}} |S|!(n−|S|−1)!/n! · (ν(S∪{f}) − ν(S))`   |
//! | MCI       | `max_{S⊆F∖{f}} (ν(S∪{f}) − ν(S))`                      |
//!
//! All scores are computed exactly by enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::separability::{union_table, Partition};
use crate::subset::{eliminate, mix, FeatureIndex, SubsetMask, Tolerance, ValueTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMethod {
    Bivariate,
    Ablation,
    Shapley,
    #[serde(rename = "mci")]
    Mci,
}

impl ScoreMethod {
    pub const ALL: [ScoreMethod; 4] = [
        ScoreMethod::Bivariate,
        ScoreMethod::Ablation,
        ScoreMethod::Shapley,
        ScoreMethod::Mci,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoreMethod::Bivariate => "bivariate",
            ScoreMethod::Ablation => "ablation",
            ScoreMethod::Shapley => "shapley",
            ScoreMethod::Mci => "mci",
        }
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bivariate" => Ok(ScoreMethod::Bivariate),
            "ablation" => Ok(ScoreMethod::Ablation),
            "shapley" => Ok(ScoreMethod::Shapley),
            "mci" => Ok(ScoreMethod::Mci),
            other => Err(format!(
                "unknown method `{other}` (expected bivariate, ablation, shapley or mci)"
            )),
        }
    }
}

/// Per-feature scores of one method. MCI vectors also carry, per feature,
/// the lowest-bitmask context attaining the maximum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub method: ScoreMethod,
    pub scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<SubsetMask>>,
}

impl ImportanceVector {
    pub fn n(&self) -> usize {
        self.scores.len()
    }
}

/// Shapley weights by context size: `w[k] = k!(n−k−1)!/n!` for `k < n`.
///
/// Built by the ratio `w[k+1]/w[k] = (k+1)/(n−k−1)` so no factorial is ever
/// formed.
pub fn shapley_weights(n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return w;
    }
    let mut cur = 1.0 / n as f64;
    for k in 0..n {
        w.push(cur);
        if k + 1 < n {
            cur *= (k + 1) as f64 / (n - k - 1) as f64;
        }
    }
    w
}

/// Inserts a zero bit at position `f`, mapping masks over `F∖{f}` (compacted)
/// monotonically onto masks of the full set that avoid `f`.
#[inline]
fn spread(compact: u32, f: FeatureIndex) -> SubsetMask {
    let low = compact & ((1u32 << f) - 1);
    let high = (compact >> f) << (f + 1);
    SubsetMask(high | low)
}

fn contexts(n: usize, f: FeatureIndex) -> impl Iterator<Item = SubsetMask> {
    (0..1u32 << (n - 1)).map(move |c| spread(c, f))
}

fn mci_with_witness(t: &ValueTable, f: FeatureIndex) -> (f64, SubsetMask) {
    let mut best = f64::NEG_INFINITY;
    let mut witness = SubsetMask::EMPTY;
    for s in contexts(t.n(), f) {
        let m = t.marginal(s, f);
        if m > best {
            best = m;
            witness = s;
        }
    }
    (best, witness)
}

fn shapley_with(t: &ValueTable, f: FeatureIndex, weights: &[f64]) -> f64 {
    contexts(t.n(), f)
        .map(|s| weights[s.len()] * t.marginal(s, f))
        .sum()
}

/// Score of a single feature.
pub fn score(method: ScoreMethod, t: &ValueTable, f: FeatureIndex) -> Result<f64> {
    t.check_feature(f)?;
    let full = t.full_mask();
    Ok(match method {
        ScoreMethod::Bivariate => t.get(SubsetMask::singleton(f)),
        ScoreMethod::Ablation => t.get(full) - t.get(full.without(f)),
        ScoreMethod::Shapley => shapley_with(t, f, &shapley_weights(t.n())),
        ScoreMethod::Mci => mci_with_witness(t, f).0,
    })
}

/// Scores of every feature.
pub fn score_vector(method: ScoreMethod, t: &ValueTable) -> ImportanceVector {
    let n = t.n();
    let full = t.full_mask();
    let mut witnesses = None;
    let scores = match method {
        ScoreMethod::Bivariate => (0..n).map(|f| t.get(SubsetMask::singleton(f))).collect(),
        ScoreMethod::Ablation => (0..n).map(|f| t.get(full) - t.get(full.without(f))).collect(),
        ScoreMethod::Shapley => {
            let w = shapley_weights(n);
            (0..n).map(|f| shapley_with(t, f, &w)).collect()
        }
        ScoreMethod::Mci => {
            let (s, w): (Vec<f64>, Vec<SubsetMask>) = (0..n).map(|f| mci_with_witness(t, f)).unzip();
            witnesses = Some(w);
            s
        }
    };
    ImportanceVector { method, scores, witnesses }
}

/// Score of `f` in the game restricted to `s` (every feature outside `s`
/// eliminated).
pub fn restricted_score(method: ScoreMethod, t: &ValueTable, s: SubsetMask, f: FeatureIndex) -> Result<f64> {
    s.check(t.n())?;
    t.check_feature(f)?;
    if !s.contains(f) {
        return Err(Error::FeatureNotInSubset { feature: f, mask: s.bits() });
    }
    let e = eliminate(t, s.complement(t.n()))?;
    let local = e.kept.iter().position(|&k| k == f).expect("f survives elimination");
    score(method, &e.table, local)
}

/// Scores of the blocks of `p`, treating each block as one feature of the
/// meta game `ν_G(H) = ν(∪H)`. Separability is not required.
pub fn grouped_score_vector(method: ScoreMethod, t: &ValueTable, p: &Partition) -> Result<Vec<f64>> {
    let meta = union_table(t, p)?;
    Ok(score_vector(method, &meta).scores)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    pub method: ScoreMethod,
    pub alpha: f64,
    /// `ϕ(α·t1 + (1−α)·t2)`
    pub lhs: Vec<f64>,
    /// `α·ϕ(t1) + (1−α)·ϕ(t2)`
    pub rhs: Vec<f64>,
    pub residual: f64,
    pub worst_feature: FeatureIndex,
    pub violated: bool,
}

pub fn check_linearity(
    method: ScoreMethod,
    t1: &ValueTable,
    t2: &ValueTable,
    alpha: f64,
    tol: Tolerance,
) -> Result<LinearityReport> {
    let mixed = mix(t1, t2, alpha)?;
    let lhs = score_vector(method, &mixed).scores;
    let a = score_vector(method, t1).scores;
    let b = score_vector(method, t2).scores;
    let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
    let (worst_feature, residual) = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Ok(LinearityReport {
        method,
        alpha,
        lhs,
        rhs,
        residual,
        worst_feature,
        violated: residual > tol.value(),
    })
}
