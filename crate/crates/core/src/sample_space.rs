//! Finite weighted collections of per-instance value tables.

use serde::{Deserialize, Serialize};

use crate::axioms::{Axiom, AxiomReport, Witness, Worst};
use crate::importance::{score_vector, ScoreMethod};
use crate::subset::{SubsetMask, Tolerance, ValueTable};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub weight: f64,
    pub values: Vec<f64>,
}

/// On-disk form: `{"n": .., "instances": [{"weight": .., "values": [..]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpaceFile {
    pub n: usize,
    pub instances: Vec<Instance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleSpaceFile", into = "SampleSpaceFile")]
pub struct SampleSpace {
    n: usize,
    weights: Vec<f64>,
    tables: Vec<ValueTable>,
}

impl TryFrom<SampleSpaceFile> for SampleSpace {
    type Error = Error;

    fn try_from(file: SampleSpaceFile) -> Result<Self> {
        let mut pairs = Vec::with_capacity(file.instances.len());
        for inst in file.instances {
            pairs.push((inst.weight, ValueTable::new(file.n, inst.values)?));
        }
        let space = SampleSpace::new(pairs)?;
        if space.n != file.n {
            return Err(Error::DimensionMismatch { left: file.n, right: space.n });
        }
        Ok(space)
    }
}

impl From<SampleSpace> for SampleSpaceFile {
    fn from(s: SampleSpace) -> Self {
        SampleSpaceFile {
            n: s.n,
            instances: s
                .weights
                .into_iter()
                .zip(s.tables)
                .map(|(weight, t)| Instance { weight, values: t.into_values() })
                .collect(),
        }
    }
}

impl SampleSpace {
    /// Normalizes the weights to sum to one.
    pub fn new(instances: Vec<(f64, ValueTable)>) -> Result<Self> {
        let Some((_, first)) = instances.first() else {
            return Err(Error::EmptySampleSpace);
        };
        let n = first.n();
        let mut total = 0.0;
        for (w, t) in &instances {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeights(format!("weight {w} is not a finite non-negative number")));
            }
            if t.n() != n {
                return Err(Error::DimensionMismatch { left: n, right: t.n() });
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        let (weights, tables) = instances.into_iter().map(|(w, t)| (w / total, t)).unzip();
        Ok(SampleSpace { n, weights, tables })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tables(&self) -> &[ValueTable] {
        &self.tables
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ValueTable)> {
        self.weights.iter().copied().zip(&self.tables)
    }
}

/// Entrywise weighted mean of the local tables.
pub fn global_table(ss: &SampleSpace) -> ValueTable {
    let mut acc = vec![0.0; 1 << ss.n];
    for (w, t) in ss.iter() {
        for (a, v) in acc.iter_mut().zip(t.values()) {
            *a += w * v;
        }
    }
    ValueTable::new(ss.n, acc).expect("weighted mean of valid tables is valid")
}

/// Residual `max_S |claim(S) − E[ν_x(S)]|`, witness `subset`,
/// `lhs = claim(S)`, `rhs = E[ν_x(S)]`.
pub fn check_value_consistency(ss: &SampleSpace, claim: &ValueTable, tol: Tolerance) -> Result<AxiomReport> {
    if claim.n() != ss.n {
        return Err(Error::DimensionMismatch { left: ss.n, right: claim.n() });
    }
    let g = global_table(ss);
    let mut worst = Worst::default();
    for bits in 0..1u32 << ss.n {
        let s = SubsetMask(bits);
        let (c, e) = (claim.get(s), g.get(s));
        worst.offer((c - e).abs(), || Witness { subset: Some(s), lhs: c, rhs: e, ..Default::default() });
    }
    Ok(AxiomReport::finish(Axiom::ValueConsistency, None, tol, worst.into_inner()))
}

/// Residual `max_f |ϕ(E[ν_x], f) − E[ϕ(ν_x, f)]|`, witness `feature`,
/// `lhs` the global side, `rhs` the expectation side.
pub fn check_importance_consistency(ss: &SampleSpace, method: ScoreMethod, tol: Tolerance) -> AxiomReport {
    let global = score_vector(method, &global_table(ss)).scores;
    let mut expected = vec![0.0; ss.n];
    for (w, t) in ss.iter() {
        for (e, s) in expected.iter_mut().zip(score_vector(method, t).scores) {
            *e += w * s;
        }
    }
    let mut worst = Worst::default();
    for f in 0..ss.n {
        worst.offer((global[f] - expected[f]).abs(), || Witness {
            feature: Some(f),
            lhs: global[f],
            rhs: expected[f],
            ..Default::default()
        });
    }
    AxiomReport::finish(Axiom::ImportanceConsistency, Some(method), tol, worst.into_inner())
}

/// Uniform space of `copies` identical tables.
pub fn duplicate_space(t: &ValueTable, copies: usize) -> Result<SampleSpace> {
    if copies == 0 {
        return Err(Error::ZeroCopies);
    }
    SampleSpace::new(vec![(1.0, t.clone()); copies])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SampleSpace {
        SampleSpace::new(vec![
            (0.5, ValueTable::new(2, vec![0.0, 0.0, 1.0, 2.0]).unwrap()),
            (0.5, ValueTable::new(2, vec![0.0, 1.0, 1.0, 1.0]).unwrap()),
        ])
        .unwrap()
    }

    fn toy() -> ValueTable {
        ValueTable::new(3, vec![0.0, 0.5, 0.5, 0.5, 1.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0]).unwrap()
    }

    #[test]
    fn global_examples() {
        assert_eq!(global_table(&pair()).values(), &[0.0, 0.5, 1.0, 1.5]);
        let one = SampleSpace::new(vec![(2.0, toy())]).unwrap();
        assert_eq!(global_table(&one), toy());
        let dup = SampleSpace::new(vec![(0.3, toy()), (0.7, toy())]).unwrap();
        let g = global_table(&dup);
        for (a, b) in g.values().iter().zip(toy().values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(SampleSpace::new(vec![]), Err(Error::EmptySampleSpace)));
        assert!(matches!(SampleSpace::new(vec![(0.0, toy())]), Err(Error::InvalidWeights(_))));
        assert!(matches!(SampleSpace::new(vec![(-1.0, toy()), (2.0, toy())]), Err(Error::InvalidWeights(_))));
        let two = ValueTable::zeros(2).unwrap();
        assert!(matches!(SampleSpace::new(vec![(1.0, toy()), (1.0, two)]), Err(Error::DimensionMismatch { .. })));
        let s = SampleSpace::new(vec![(1.0, toy()), (3.0, toy())]).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn value_consistency_examples() {
        let ss = pair();
        assert!(check_value_consistency(&ss, &global_table(&ss), Tolerance::default()).unwrap().passed);
        let claim = ValueTable::new(2, vec![0.0, 0.5, 1.0, 1.5]).unwrap();
        assert!(check_value_consistency(&ss, &claim, Tolerance::default()).unwrap().passed);
        let bad = ValueTable::new(2, vec![0.0, 0.5, 2.0, 1.5]).unwrap();
        let r = check_value_consistency(&ss, &bad, Tolerance::default()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.witness.unwrap().subset, Some(SubsetMask(0b10)));
        assert_eq!(r.residual, 1.0);
        assert!(check_value_consistency(&ss, &toy(), Tolerance::default()).is_err());
    }

    #[test]
    fn importance_consistency_examples() {
        let r = check_importance_consistency(&pair(), ScoreMethod::Mci, Tolerance::default());
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert_eq!(w.feature, Some(0));
        assert_eq!((w.lhs, w.rhs), (0.5, 1.0));
        assert_eq!(r.residual, 0.5);
        for m in [ScoreMethod::Bivariate, ScoreMethod::Ablation, ScoreMethod::Shapley] {
            assert!(check_importance_consistency(&pair(), m, Tolerance::default()).passed, "{m}");
        }
        for m in ScoreMethod::ALL {
            let one = SampleSpace::new(vec![(1.0, toy())]).unwrap();
            assert!(check_importance_consistency(&one, m, Tolerance::default()).passed);
        }
    }

    #[test]
    fn duplicate_examples() {
        let d = duplicate_space(&toy(), 3).unwrap();
        assert_eq!(d.len(), 3);
        let g = global_table(&d);
        for (a, b) in g.values().iter().zip(toy().values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(check_importance_consistency(&d, ScoreMethod::Mci, Tolerance::default()).passed);
        assert_eq!(duplicate_space(&toy(), 1).unwrap().len(), 1);
        assert!(matches!(duplicate_space(&toy(), 0), Err(Error::ZeroCopies)));
    }

    #[test]
    fn file_round_trip() {
        let json = r#"{"n":2,"instances":[{"weight":1.0,"values":[0.0,0.0,1.0,2.0]},{"weight":1.0,"values":[0.0,1.0,1.0,1.0]}]}"#;
        let s: SampleSpace = serde_json::from_str(json).unwrap();
        assert_eq!(s, pair());
        let bad = r#"{"n":2,"instances":[{"weight":1.0,"values":[0.0,1.0]}]}"#;
        assert!(serde_json::from_str::<SampleSpace>(bad).is_err());
    }
}
