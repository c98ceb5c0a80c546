//! Mechanical checks of the importance axioms.
//!
//! Every checker returns an [`AxiomReport`] with a scalar residual
//! (`passed ⇔ residual ≤ tol`) and, on failure, a [`Witness`] locating the
//! worst violation. Ties keep the first violation in scan order. A check
//! whose premise never applies passes with `vacuous = true`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::OutcomeTable;
use crate::importance::{score_vector, ImportanceVector, ScoreMethod};
use crate::report::fmt_sig;
use crate::separability::is_separable;
use crate::subset::{eliminate, FeatureIndex, SubsetMask, Tolerance, ValueTable};
use crate::{Error, Result};

/// Largest `n` for checks that enumerate all eliminations or restrictions.
pub const ENUMERATION_MAX_FEATURES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    ValueConsistency,
    ImportanceConsistency,
    Triviality,
    NullFeature,
    DataModelEquivalence,
    MarginalContribution,
    Elimination,
    Minimalism,
    EmptySetValue,
    Monotonicity,
    SymmetryEmpty,
    SymmetryPair,
    SeparableImportanceSplit,
    SeparableImportanceConverse,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::ValueConsistency => "value consistency",
            Axiom::ImportanceConsistency => "importance consistency",
            Axiom::Triviality => "triviality",
            Axiom::NullFeature => "null feature",
            Axiom::DataModelEquivalence => "data-model equivalence",
            Axiom::MarginalContribution => "marginal contribution",
            Axiom::Elimination => "elimination",
            Axiom::Minimalism => "minimalism",
            Axiom::EmptySetValue => "empty-set value",
            Axiom::Monotonicity => "monotonicity",
            Axiom::SymmetryEmpty => "symmetry (z = ∅)",
            Axiom::SymmetryPair => "symmetry (z = {f1,f2})",
            Axiom::SeparableImportanceSplit => "separable importance (split)",
            Axiom::SeparableImportanceConverse => "separable importance (converse)",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a violation happened. Which coordinates are set depends on the
/// axiom; `lhs` and `rhs` are the two sides of the violated relation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<SubsetMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<SubsetMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<FeatureIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_feature: Option<FeatureIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.subset {
            write!(f, "S={s} ")?;
        }
        if let Some(t) = self.context {
            write!(f, "T={t} ")?;
        }
        if let Some(i) = self.feature {
            write!(f, "f=f{i} ")?;
        }
        if let Some(i) = self.other_feature {
            write!(f, "g=f{i} ")?;
        }
        if let Some(i) = self.instance {
            write!(f, "x={i} ")?;
        }
        write!(f, "lhs={} rhs={}", fmt_sig(self.lhs), fmt_sig(self.rhs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<ScoreMethod>,
    pub passed: bool,
    pub vacuous: bool,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl AxiomReport {
    fn vacuous(axiom: Axiom, method: Option<ScoreMethod>) -> Self {
        AxiomReport { axiom, method, passed: true, vacuous: true, residual: 0.0, witness: None }
    }

    pub(crate) fn finish(axiom: Axiom, method: Option<ScoreMethod>, tol: Tolerance, worst: Option<(f64, Witness)>) -> Self {
        let (residual, witness) = worst.unwrap_or((0.0, Witness::default()));
        let passed = residual <= tol.value();
        AxiomReport {
            axiom,
            method,
            passed,
            vacuous: false,
            residual,
            witness: (!passed).then_some(witness),
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.passed, self.vacuous) {
            (false, _) => "fail",
            (true, true) => "vacuous",
            (true, false) => "pass",
        }
    }
}

/// Keeps the first strictly largest candidate.
#[derive(Default)]
pub(crate) struct Worst(Option<(f64, Witness)>);

impl Worst {
    pub(crate) fn offer(&mut self, residual: f64, witness: impl FnOnce() -> Witness) {
        if self.0.as_ref().is_none_or(|(r, _)| residual > *r) {
            self.0 = Some((residual, witness()));
        }
    }

    pub(crate) fn into_inner(self) -> Option<(f64, Witness)> {
        self.0
    }
}

fn check_len(t: &ValueTable, v: &ImportanceVector) -> Result<()> {
    if v.n() != t.n() {
        return Err(Error::DimensionMismatch { left: t.n(), right: v.n() });
    }
    Ok(())
}

/// Both items of Triviality, enumerated exhaustively.
///
/// Item 1: a subset `S` with `|ν(S)| > tol` whose members all score within
/// `tol` of zero violates with residual `|ν(S)|` (witness `subset`,
/// `lhs = |ν(S)|`, `rhs = max_{f∈S} |ϕ(f)|`).
/// Item 2: a feature with `|ϕ(f)| > tol` whose every marginal is within
/// `tol` of zero violates with residual `|ϕ(f)|` (witness `feature`,
/// `lhs = |ϕ(f)|`, `rhs = max_S |ν(S∪{f}) − ν(S)|`).
///
/// Unlike the other checkers this one reports the first violation (item 1
/// by ascending mask, then item 2 by feature) rather than the largest, so
/// the witness is the smallest offending subset.
pub fn check_triviality(t: &ValueTable, v: &ImportanceVector, tol: Tolerance) -> Result<AxiomReport> {
    check_len(t, v)?;
    let mut first = None;
    let mut premise = false;
    for bits in 0..1u32 << t.n() {
        let s = SubsetMask(bits);
        let value = t.get(s).abs();
        if value <= tol.value() {
            continue;
        }
        premise = true;
        let best = s.iter().map(|f| v.scores[f].abs()).fold(0.0, f64::max);
        if best <= tol.value() && first.is_none() {
            first = Some((value, Witness { subset: Some(s), lhs: value, rhs: best, ..Default::default() }));
        }
    }
    for f in 0..t.n() {
        let phi = v.scores[f].abs();
        if phi <= tol.value() {
            continue;
        }
        premise = true;
        let best = t
            .full_mask()
            .without(f)
            .subsets()
            .map(|s| t.marginal(s, f).abs())
            .fold(0.0, f64::max);
        if best <= tol.value() && first.is_none() {
            first = Some((phi, Witness { feature: Some(f), lhs: phi, rhs: best, ..Default::default() }));
        }
    }
    if !premise {
        return Ok(AxiomReport::vacuous(Axiom::Triviality, Some(v.method)));
    }
    Ok(AxiomReport::finish(Axiom::Triviality, Some(v.method), tol, first))
}

/// If feature `f` is null on the grid (changing it alone never moves the
/// output), its score must be zero: residual `|ϕ(f)|`. Vacuous otherwise.
pub fn check_null_feature(
    grid: &OutcomeTable,
    v: &ImportanceVector,
    f: FeatureIndex,
    tol: Tolerance,
) -> Result<AxiomReport> {
    if grid.n_features() != v.n() {
        return Err(Error::DimensionMismatch { left: grid.n_features(), right: v.n() });
    }
    if f >= v.n() {
        return Err(Error::FeatureOutOfRange { feature: f, n: v.n() });
    }
    if !grid.is_null_feature(f, tol.value()) {
        return Ok(AxiomReport::vacuous(Axiom::NullFeature, Some(v.method)));
    }
    let phi = v.scores[f];
    let worst = Some((phi.abs(), Witness { feature: Some(f), lhs: phi, rhs: 0.0, ..Default::default() }));
    Ok(AxiomReport::finish(Axiom::NullFeature, Some(v.method), tol, worst))
}

/// For a perfect model, `ϕ(ν^M)` must equal `ϕ(ν^D)` coordinatewise:
/// residual `max_f |ϕ(ν^M, f) − ϕ(ν^D, f)|`. Vacuous when not perfect.
pub fn check_data_model_equivalence(
    data_t: &ValueTable,
    model_t: &ValueTable,
    method: ScoreMethod,
    perfect: bool,
    tol: Tolerance,
) -> Result<AxiomReport> {
    data_t.check_same_n(model_t)?;
    if !perfect {
        return Ok(AxiomReport::vacuous(Axiom::DataModelEquivalence, Some(method)));
    }
    let d = score_vector(method, data_t).scores;
    let m = score_vector(method, model_t).scores;
    let mut worst = Worst::default();
    for f in 0..d.len() {
        worst.offer((m[f] - d[f]).abs(), || Witness {
            feature: Some(f),
            lhs: m[f],
            rhs: d[f],
            ..Default::default()
        });
    }
    Ok(AxiomReport::finish(Axiom::DataModelEquivalence, Some(method), tol, worst.into_inner()))
}

/// `ϕ(f) ≥ ν(F) − ν(F∖{f})`: residual `max_f (ν(F) − ν(F∖{f}) − ϕ(f))⁺`.
pub fn check_marginal_contribution(t: &ValueTable, v: &ImportanceVector, tol: Tolerance) -> Result<AxiomReport> {
    check_len(t, v)?;
    let full = t.full_mask();
    let mut worst = Worst::default();
    for f in 0..t.n() {
        let bound = t.get(full) - t.get(full.without(f));
        worst.offer((bound - v.scores[f]).max(0.0), || Witness {
            feature: Some(f),
            lhs: v.scores[f],
            rhs: bound,
            ..Default::default()
        });
    }
    Ok(AxiomReport::finish(Axiom::MarginalContribution, Some(v.method), tol, worst.into_inner()))
}

/// Eliminating any proper subset `T` must not raise a surviving feature's
/// score: residual `max_{f,T} (ϕ(ν′_T, f) − ϕ(ν, f))⁺`, witness `context = T`,
/// `feature = f` (original index), `lhs = ϕ(ν, f)`, `rhs = ϕ(ν′_T, f)`.
/// Scans features first, then `T` in ascending mask order.
pub fn check_elimination(t: &ValueTable, method: ScoreMethod, tol: Tolerance) -> Result<AxiomReport> {
    let n = t.n();
    if n > ENUMERATION_MAX_FEATURES {
        return Err(Error::TooManyFeatures { n, cap: ENUMERATION_MAX_FEATURES });
    }
    if n == 1 {
        return Ok(AxiomReport::vacuous(Axiom::Elimination, Some(method)));
    }
    let base = score_vector(method, t).scores;
    let full = t.full_mask();
    // scores after each elimination, mapped back to original indices
    let mut after: Vec<Vec<f64>> = Vec::with_capacity(1 << n);
    for bits in 0..1u32 << n {
        let removed = SubsetMask(bits);
        let mut row = vec![f64::NAN; n];
        if removed != full {
            let e = eliminate(t, removed)?;
            for (local, s) in score_vector(method, &e.table).scores.into_iter().enumerate() {
                row[e.kept[local]] = s;
            }
        }
        after.push(row);
    }
    let mut worst = Worst::default();
    for f in 0..n {
        for bits in 1..(1u32 << n) - 1 {
            let removed = SubsetMask(bits);
            if removed.contains(f) {
                continue;
            }
            let reduced = after[bits as usize][f];
            worst.offer((reduced - base[f]).max(0.0), || Witness {
                context: Some(removed),
                feature: Some(f),
                lhs: base[f],
                rhs: reduced,
                ..Default::default()
            });
        }
    }
    Ok(AxiomReport::finish(Axiom::Elimination, Some(method), tol, worst.into_inner()))
}

/// Minimalism, checked as equality with the MCI vector (the unique minimal
/// score satisfying marginal contribution and elimination): residual
/// `max_f |ϕ(f) − MCI(f)|`.
pub fn check_minimalism(t: &ValueTable, v: &ImportanceVector, tol: Tolerance) -> Result<AxiomReport> {
    check_len(t, v)?;
    let mci = score_vector(ScoreMethod::Mci, t).scores;
    let mut worst = Worst::default();
    for f in 0..t.n() {
        worst.offer((v.scores[f] - mci[f]).abs(), || Witness {
            feature: Some(f),
            lhs: v.scores[f],
            rhs: mci[f],
            ..Default::default()
        });
    }
    Ok(AxiomReport::finish(Axiom::Minimalism, Some(v.method), tol, worst.into_inner()))
}

/// `|ν(∅)| ≤ tol`.
pub fn check_empty_set(t: &ValueTable, tol: Tolerance) -> AxiomReport {
    let e = t.get(SubsetMask::EMPTY);
    let w = Witness { subset: Some(SubsetMask::EMPTY), lhs: e, rhs: 0.0, ..Default::default() };
    AxiomReport::finish(Axiom::EmptySetValue, None, tol, Some((e.abs(), w)))
}

/// `ν(S) ≤ ν(S ∪ {i}) + tol` over every cover relation of the lattice:
/// residual `max (ν(S) − ν(S∪{i}))⁺`, witness `subset = S`,
/// `context = S∪{i}`.
pub fn check_monotonicity(t: &ValueTable, tol: Tolerance) -> AxiomReport {
    let mut worst = Worst::default();
    for bits in 0..1u32 << t.n() {
        let s = SubsetMask(bits);
        for i in s.complement(t.n()).iter() {
            let bigger = s.with(i);
            let (lo, hi) = (t.get(s), t.get(bigger));
            worst.offer((lo - hi).max(0.0), || Witness {
                subset: Some(s),
                context: Some(bigger),
                lhs: lo,
                rhs: hi,
                ..Default::default()
            });
        }
    }
    AxiomReport::finish(Axiom::Monotonicity, None, tol, worst.into_inner())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVariant {
    /// Hypothesis quantified over every `S ⊆ F`.
    ZEmpty,
    /// Hypothesis quantified over `S ⊆ F ∖ {f1, f2}`.
    ZPair,
}

/// Largest `|ν(S∪{f1}) − ν(S∪{f2})|` over the variant's contexts.
pub fn symmetry_gap(t: &ValueTable, f1: FeatureIndex, f2: FeatureIndex, variant: SymmetryVariant) -> f64 {
    let scope = match variant {
        SymmetryVariant::ZEmpty => t.full_mask(),
        SymmetryVariant::ZPair => t.full_mask().without(f1).without(f2),
    };
    scope
        .subsets()
        .map(|s| (t.get(s.with(f1)) - t.get(s.with(f2))).abs())
        .fold(0.0, f64::max)
}

/// Symmetric features must score equally: residual
/// `max |ϕ(f1) − ϕ(f2)|` over pairs whose symmetry gap is within `tol`.
/// Vacuous when no pair is symmetric.
pub fn check_symmetry(
    t: &ValueTable,
    v: &ImportanceVector,
    variant: SymmetryVariant,
    tol: Tolerance,
) -> Result<AxiomReport> {
    check_len(t, v)?;
    let axiom = match variant {
        SymmetryVariant::ZEmpty => Axiom::SymmetryEmpty,
        SymmetryVariant::ZPair => Axiom::SymmetryPair,
    };
    let mut worst = Worst::default();
    let mut premise = false;
    for f1 in 0..t.n() {
        for f2 in f1 + 1..t.n() {
            if symmetry_gap(t, f1, f2, variant) > tol.value() {
                continue;
            }
            premise = true;
            let (a, b) = (v.scores[f1], v.scores[f2]);
            worst.offer((a - b).abs(), || Witness {
                feature: Some(f1),
                other_feature: Some(f2),
                lhs: a,
                rhs: b,
                ..Default::default()
            });
        }
    }
    if !premise {
        return Ok(AxiomReport::vacuous(axiom, Some(v.method)));
    }
    Ok(AxiomReport::finish(axiom, Some(v.method), tol, worst.into_inner()))
}

/// Scores of the game restricted to `s`, indexed by original feature, zero
/// outside `s` (and everywhere when `s` is empty).
pub fn restricted_score_vector(method: ScoreMethod, t: &ValueTable, s: SubsetMask) -> Result<Vec<f64>> {
    let mut out = vec![0.0; t.n()];
    if s.is_empty() {
        return Ok(out);
    }
    let e = eliminate(t, s.complement(t.n()))?;
    for (local, v) in score_vector(method, &e.table).scores.into_iter().enumerate() {
        out[e.kept[local]] = v;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableImportanceReport {
    pub set: SubsetMask,
    /// Item 1: separable `S` ⇒ `ϕ = ϕ^S + ϕ^{F∖S}`.
    pub split: AxiomReport,
    /// Item 2: `ϕ = ϕ^S + ϕ^{F∖S}` ⇒ `S` separable.
    pub converse: AxiomReport,
}

/// Both directions of separable importance for one set `s`.
///
/// The split residual is `max_f |ϕ(f) − ϕ^S(f) − ϕ^{F∖S}(f)|` (witness
/// `feature`, `lhs = ϕ(f)`, `rhs = ϕ^S(f) + ϕ^{F∖S}(f)`), vacuous unless `s`
/// is separable. The converse residual is the separability residual of `s`
/// (witness `context = T`, `lhs = ν(T)`, `rhs = ν(T∩S) + ν(T∖S)`), vacuous
/// unless the split identity holds.
pub fn check_separable_importance(
    t: &ValueTable,
    method: ScoreMethod,
    s: SubsetMask,
    tol: Tolerance,
) -> Result<SeparableImportanceReport> {
    let n = t.n();
    if n > ENUMERATION_MAX_FEATURES {
        return Err(Error::TooManyFeatures { n, cap: ENUMERATION_MAX_FEATURES });
    }
    s.check(n)?;
    let sep = is_separable(t, s, tol)?;
    let phi = score_vector(method, t).scores;
    let inside = restricted_score_vector(method, t, s)?;
    let outside = restricted_score_vector(method, t, s.complement(n))?;
    let mut split_worst = Worst::default();
    for f in 0..n {
        let sum = inside[f] + outside[f];
        split_worst.offer((phi[f] - sum).abs(), || Witness {
            feature: Some(f),
            lhs: phi[f],
            rhs: sum,
            ..Default::default()
        });
    }
    let split_worst = split_worst.into_inner();
    let identity_holds = split_worst.as_ref().is_none_or(|(r, _)| *r <= tol.value());

    let split = if sep.separable {
        AxiomReport::finish(Axiom::SeparableImportanceSplit, Some(method), tol, split_worst)
    } else {
        AxiomReport::vacuous(Axiom::SeparableImportanceSplit, Some(method))
    };
    let converse = if identity_holds {
        let tt = sep.worst_t;
        let w = Witness {
            context: Some(tt),
            lhs: t.get(tt),
            rhs: t.get(tt.intersection(s)) + t.get(tt.difference(s)),
            ..Default::default()
        };
        AxiomReport::finish(Axiom::SeparableImportanceConverse, Some(method), tol, Some((sep.worst_residual, w)))
    } else {
        AxiomReport::vacuous(Axiom::SeparableImportanceConverse, Some(method))
    };
    Ok(SeparableImportanceReport { set: s, split, converse })
}

/// One Markdown row per report: axiom, method, status, residual, witness.
pub fn render_markdown(reports: &[AxiomReport]) -> String {
    let mut out = String::from("| axiom | method | status | residual | witness |\n|---|---|---|---|---|\n");
    for r in reports {
        let method = r.method.map_or("-".to_string(), |m| m.to_string());
        let witness = r.witness.as_ref().map_or("-".to_string(), |w| w.to_string());
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r.axiom,
            method,
            r.status(),
            fmt_sig(r.residual),
            witness
        ));
    }
    out
}
