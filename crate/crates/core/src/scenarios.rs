//! Deterministic reproductions of the worked examples.
//!
//! Each demo returns a [`ScenarioReport`]: the inputs it built, the score
//! vectors it computed, the axiom outcomes and a list of named assertions
//! whose operands are stored alongside the verdict. No randomness anywhere;
//! distributions are enumerated exactly.

use serde::{Deserialize, Serialize};

use crate::axioms::{check_data_model_equivalence, check_null_feature, check_triviality, AxiomReport};
use crate::dataset::{grid_to_dataset, model_value_table, r2_value_table, Dataset, OutcomeTable};
use crate::importance::{grouped_score_vector, score_vector, ImportanceVector, ScoreMethod};
use crate::sample_space::{check_importance_consistency, global_table, SampleSpace};
use crate::separability::{maximal_partition, Partition};
use crate::subset::{SubsetMask, Tolerance, ValueTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Every coordinate within `tol`.
    Eq,
    /// Some coordinate differs by more than `tol`.
    Ne,
    /// Every coordinate of `lhs` at least `rhs - tol`.
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub relation: Relation,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub tol: f64,
    pub holds: bool,
}

impl Assertion {
    pub fn new(name: impl Into<String>, relation: Relation, lhs: Vec<f64>, rhs: Vec<f64>, tol: f64) -> Self {
        let pairs = || lhs.iter().zip(&rhs);
        let holds = lhs.len() == rhs.len()
            && match relation {
                Relation::Eq => pairs().all(|(a, b)| (a - b).abs() <= tol),
                Relation::Ne => pairs().any(|(a, b)| (a - b).abs() > tol),
                Relation::Ge => pairs().all(|(a, b)| *a >= b - tol),
            };
        Assertion { name: name.into(), relation, lhs, rhs, tol, holds }
    }

    /// Largest coordinate gap `|lhs − rhs|`.
    pub fn margin(&self) -> f64 {
        self.lhs.iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTable {
    pub name: String,
    pub table: ValueTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedScores {
    pub table: String,
    pub vectors: Vec<ImportanceVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedAxiom {
    pub label: String,
    pub report: AxiomReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub tables: Vec<NamedTable>,
    pub scores: Vec<NamedScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grouped_scores: Vec<NamedScores>,
    pub axioms: Vec<NamedAxiom>,
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ScenarioReport {
    fn new(name: &str) -> Self {
        ScenarioReport {
            name: name.into(),
            parameters: vec![],
            tables: vec![],
            scores: vec![],
            partition: None,
            grouped_scores: vec![],
            axioms: vec![],
            assertions: vec![],
            notes: vec![],
        }
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&ValueTable> {
        self.tables.iter().find(|t| t.name == name).map(|t| &t.table)
    }

    pub fn scores_for(&self, table: &str, method: ScoreMethod) -> Option<&[f64]> {
        self.scores
            .iter()
            .find(|s| s.table == table)?
            .vectors
            .iter()
            .find(|v| v.method == method)
            .map(|v| v.scores.as_slice())
    }

    pub fn all_hold(&self) -> bool {
        self.assertions.iter().all(|a| a.holds)
    }

    fn add_table(&mut self, name: &str, t: &ValueTable) {
        self.tables.push(NamedTable { name: name.into(), table: t.clone() });
        self.scores.push(NamedScores {
            table: name.into(),
            vectors: ScoreMethod::ALL.iter().map(|&m| score_vector(m, t)).collect(),
        });
    }
}

const EXACT: f64 = 1e-12;

fn mci_pair() -> (ValueTable, ValueTable) {
    (
        ValueTable::new(2, vec![0.0, 0.0, 1.0, 2.0]).expect("static table"),
        ValueTable::new(2, vec![0.0, 1.0, 1.0, 1.0]).expect("static table"),
    )
}

/// Expectation of local scores against the score of the expected table,
/// for the two-instance pair with `α = 1/2`.
pub fn demo_linearity(method: ScoreMethod) -> ScenarioReport {
    let mut r = ScenarioReport::new("mci-nonlinearity");
    let (t0, t1) = mci_pair();
    let alpha = 0.5;
    r.parameters.push(Parameter { name: "alpha".into(), value: alpha });
    let ss = SampleSpace::new(vec![(alpha, t0.clone()), (1.0 - alpha, t1.clone())]).expect("static space");
    let g = global_table(&ss);
    r.add_table("x0", &t0);
    r.add_table("x1", &t1);
    r.add_table("mean", &g);

    let s0 = score_vector(method, &t0).scores;
    let s1 = score_vector(method, &t1).scores;
    let mean_of_scores: Vec<f64> = s0.iter().zip(&s1).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
    let score_of_mean = score_vector(method, &g).scores;
    if method == ScoreMethod::Mci {
        r.assertions.push(Assertion::new("score of x0", Relation::Eq, s0, vec![1.0, 2.0], EXACT));
        r.assertions.push(Assertion::new("score of x1", Relation::Eq, s1, vec![1.0, 1.0], EXACT));
        r.assertions.push(Assertion::new("mean of scores", Relation::Eq, mean_of_scores.clone(), vec![1.0, 1.5], EXACT));
        r.assertions.push(Assertion::new("score of mean", Relation::Eq, score_of_mean.clone(), vec![0.5, 1.0], EXACT));
    }
    r.assertions.push(Assertion::new(
        "mean of scores differs from score of mean",
        Relation::Ne,
        mean_of_scores,
        score_of_mean,
        Tolerance::DEFAULT,
    ));
    r.axioms.push(NamedAxiom {
        label: "pair".into(),
        report: check_importance_consistency(&ss, method, Tolerance::default()),
    });
    r
}

pub fn demo_mci_nonlinearity() -> ScenarioReport {
    demo_linearity(ScoreMethod::Mci)
}

/// Twin columns `f0 = f1 = ρ`, `ρ ∈ {−1, 1}` uniform, target `ρ`, and the
/// two perfect models `M0(x) = x0`, `M1(x) = x1`.
///
/// Model tables are evaluated on the uniform product grid `{−1, 1}²` (label
/// prefix `grid`), where each model ignores the other column. The same
/// checks are repeated with model tables evaluated on the data support
/// (prefix `support`), where both models coincide with the target.
pub fn demo_twin_features() -> ScenarioReport {
    let mut r = ScenarioReport::new("twin-features");
    let tol = Tolerance::default();
    let rho = [-1.0, 1.0];
    let rows: Vec<Vec<f64>> = rho.iter().map(|&p| vec![p, p]).collect();
    let data = Dataset::from_rows(&rows, rho.to_vec(), None).expect("static dataset");
    let nu_d = r2_value_table(&data).expect("target has mass");

    let domains = vec![vec![-1.0, 1.0]; 2];
    let grids: Vec<OutcomeTable> = (0..2)
        .map(|i| OutcomeTable::from_model(domains.clone(), move |x| x[i]).expect("static grid"))
        .collect();
    let grid_tables: Vec<ValueTable> = grids
        .iter()
        .map(|g| r2_value_table(&grid_to_dataset(g, &[0.25; 4]).expect("uniform grid")).expect("model has mass"))
        .collect();
    // on the support both models output ρ
    let support_tables: Vec<ValueTable> = (0..2)
        .map(|i| {
            let out: Vec<f64> = rows.iter().map(|x| x[i]).collect();
            model_value_table(&data, &out).expect("model has mass")
        })
        .collect();

    r.add_table("data", &nu_d);
    for (i, t) in grid_tables.iter().enumerate() {
        r.add_table(&format!("grid M{i}"), t);
    }
    for (i, t) in support_tables.iter().enumerate() {
        r.add_table(&format!("support M{i}"), t);
    }

    for (setting, tables) in [("grid", &grid_tables), ("support", &support_tables)] {
        for m in ScoreMethod::ALL {
            let mut nf = true;
            let mut dme = true;
            let mut triv = true;
            for i in 0..2 {
                let v = score_vector(m, &tables[i]);
                // the column model i ignores
                let null = 1 - i;
                let rep = check_null_feature(&grids[i], &v, null, tol).expect("shapes agree");
                nf &= rep.passed;
                r.axioms.push(NamedAxiom { label: format!("{setting} M{i} f{null}"), report: rep });
                let rep = check_data_model_equivalence(&nu_d, &tables[i], m, true, tol).expect("shapes agree");
                dme &= rep.passed;
                r.axioms.push(NamedAxiom { label: format!("{setting} M{i} vs data"), report: rep });
                let rep = check_triviality(&tables[i], &v, tol).expect("shapes agree");
                triv &= rep.passed;
                r.axioms.push(NamedAxiom { label: format!("{setting} M{i}"), report: rep });
            }
            r.assertions.push(Assertion::new(
                format!("{setting} {m}: models score alike"),
                Relation::Eq,
                score_vector(m, &tables[0]).scores,
                score_vector(m, &tables[1]).scores,
                tol.value(),
            ));
            let flag = |b: bool| if b { 1.0 } else { 0.0 };
            r.assertions.push(Assertion::new(
                format!("{setting} {m}: null feature or data-model equivalence fails"),
                Relation::Eq,
                vec![flag(!nf || !dme)],
                vec![1.0],
                0.0,
            ));
            r.assertions.push(Assertion::new(
                format!("{setting} {m}: triviality holds"),
                Relation::Eq,
                vec![flag(triv)],
                vec![1.0],
                0.0,
            ));
        }
    }
    let full = nu_d.full_mask();
    r.assertions.push(Assertion::new(
        "data table brackets",
        Relation::Eq,
        vec![nu_d.get(SubsetMask::EMPTY), nu_d.get(full)],
        vec![0.0, 1.0],
        1e-12,
    ));
    r
}

/// Conditional probabilities for the collider graph
/// `Smoking → Gum ← Earache`, `Smoking → Cancer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColliderParams {
    pub p_smoke: f64,
    pub p_earache: f64,
    /// `P(gum | smoke, earache)` indexed by `2·smoke + earache`.
    pub p_gum: [f64; 4],
    /// `P(cancer | smoke)` indexed by `smoke`.
    pub p_cancer: [f64; 2],
}

impl Default for ColliderParams {
    fn default() -> Self {
        ColliderParams { p_smoke: 0.3, p_earache: 0.2, p_gum: [0.1, 0.9, 0.9, 0.9], p_cancer: [0.05, 0.5] }
    }
}

impl ColliderParams {
    fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("p_smoke", self.p_smoke),
            ("p_earache", self.p_earache),
            ("p_gum_00", self.p_gum[0]),
            ("p_gum_01", self.p_gum[1]),
            ("p_gum_10", self.p_gum[2]),
            ("p_gum_11", self.p_gum[3]),
            ("p_cancer_0", self.p_cancer[0]),
            ("p_cancer_1", self.p_cancer[1]),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidParameter { name, value, reason: "must be a probability in [0, 1]" });
            }
        }
        Ok(())
    }
}

/// The three observed-feature datasets of the collider example, built from
/// the exact joint. Features are centred indicators, the target is the raw
/// cancer indicator, weights are cell probabilities.
pub struct ColliderDatasets {
    pub earache_only: Dataset,
    pub gum_only: Dataset,
    pub both: Dataset,
}

pub fn collider_datasets(p: &ColliderParams) -> Result<ColliderDatasets> {
    p.validate()?;
    let bern = |q: f64, x: usize| if x == 1 { q } else { 1.0 - q };
    // mass over (earache, gum, cancer), smoking marginalised out
    let mut cell = [[[0.0f64; 2]; 2]; 2];
    for s in 0..2 {
        for e in 0..2 {
            for g in 0..2 {
                for c in 0..2 {
                    cell[e][g][c] += bern(p.p_smoke, s)
                        * bern(p.p_earache, e)
                        * bern(p.p_gum[2 * s + e], g)
                        * bern(p.p_cancer[s], c);
                }
            }
        }
    }
    let mut mean_e = 0.0;
    let mut mean_g = 0.0;
    for e in 0..2 {
        for g in 0..2 {
            let mass = cell[e][g][0] + cell[e][g][1];
            if mass <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "p_gum",
                    value: mass,
                    reason: "every (earache, gum) combination needs positive probability",
                });
            }
            mean_e += mass * e as f64;
            mean_g += mass * g as f64;
        }
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for (e, by_g) in cell.iter().enumerate() {
        for (g, by_c) in by_g.iter().enumerate() {
            for (c, &mass) in by_c.iter().enumerate() {
                if mass > 0.0 {
                    rows.push((e as f64 - mean_e, g as f64 - mean_g));
                    y.push(c as f64);
                    w.push(mass);
                }
            }
        }
    }
    let col = |pick: &dyn Fn(&(f64, f64)) -> Vec<f64>| rows.iter().map(pick).collect::<Vec<_>>();
    let build = |r: Vec<Vec<f64>>| Dataset::from_rows(&r, y.clone(), Some(w.clone()));
    Ok(ColliderDatasets {
        earache_only: build(col(&|r| vec![r.0]))?,
        gum_only: build(col(&|r| vec![r.1]))?,
        both: build(col(&|r| vec![r.0, r.1]))?,
    })
}

/// Threshold for "nonzero importance" in the third setting.
pub const COLLIDER_MIN_IMPORTANCE: f64 = 1e-4;
/// Threshold for the Gum bivariate score in the second setting.
pub const COLLIDER_MIN_GUM: f64 = 1e-2;

pub fn demo_collider(p: &ColliderParams) -> Result<ScenarioReport> {
    let mut r = ScenarioReport::new("collider");
    for (name, value) in p.named() {
        r.parameters.push(Parameter { name: name.into(), value });
    }
    let d = collider_datasets(p)?;
    let one = r2_value_table(&d.earache_only)?;
    let two = r2_value_table(&d.gum_only)?;
    let three = r2_value_table(&d.both)?;
    r.add_table("earache", &one);
    r.add_table("gum", &two);
    r.add_table("earache+gum", &three);

    let e = SubsetMask::singleton(0);
    r.assertions.push(Assertion::new("setting one: value of earache is zero", Relation::Eq, vec![one.get(e)], vec![0.0], 1e-9));
    r.assertions.push(Assertion::new(
        "setting one: bivariate(earache) is zero",
        Relation::Eq,
        vec![score_vector(ScoreMethod::Bivariate, &one).scores[0]],
        vec![0.0],
        1e-9,
    ));
    r.assertions.push(Assertion::new(
        "setting two: bivariate(gum) is positive",
        Relation::Ge,
        vec![score_vector(ScoreMethod::Bivariate, &two).scores[0]],
        vec![COLLIDER_MIN_GUM],
        0.0,
    ));
    for m in ScoreMethod::ALL {
        r.assertions.push(Assertion::new(
            format!("setting three: {m}(earache) is positive"),
            Relation::Ge,
            vec![score_vector(m, &three).scores[0]],
            vec![COLLIDER_MIN_IMPORTANCE],
            0.0,
        ));
    }
    r.notes.push(
        "bivariate(earache) in setting three equals the setting-one value, so only context-dependent scores pick up the collider"
            .into(),
    );
    r.notes.push("only the R² value function and the four listed scores are checked".into());
    Ok(r)
}

/// The three-row toy dataset: `f0 = f1 = 1`, `f2 = (−1, 0, 1)`, and
/// `y = 1 + f2 + u` with `u` a unit vector orthogonal to the features.
pub fn toy_dataset() -> Dataset {
    let u = [(1.0f64 / 6.0).sqrt(), -(2.0f64 / 3.0).sqrt(), (1.0f64 / 6.0).sqrt()];
    let f2 = [-1.0, 0.0, 1.0];
    let rows: Vec<Vec<f64>> = f2.iter().map(|&x| vec![1.0, 1.0, x]).collect();
    let y = (0..3).map(|i| 1.0 + f2[i] + u[i]).collect();
    Dataset::from_rows(&rows, y, None).expect("static dataset")
}

pub const TOY_VALUES: [f64; 8] = [0.0, 0.5, 0.5, 0.5, 1.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0];

pub fn demo_toy_separable() -> Result<ScenarioReport> {
    let mut r = ScenarioReport::new("toy-separable");
    let tol = Tolerance::default();
    let t = r2_value_table(&toy_dataset())?;
    r.add_table("toy", &t);
    r.assertions.push(Assertion::new("value table", Relation::Eq, t.values().to_vec(), TOY_VALUES.to_vec(), 1e-9));
    let expected = [
        (ScoreMethod::Bivariate, [0.5, 0.5, 1.0 / 3.0]),
        (ScoreMethod::Ablation, [0.0, 0.0, 1.0 / 3.0]),
        (ScoreMethod::Shapley, [0.25, 0.25, 1.0 / 3.0]),
        (ScoreMethod::Mci, [0.5, 0.5, 1.0 / 3.0]),
    ];
    for (m, want) in expected {
        r.assertions.push(Assertion::new(
            format!("{m} scores"),
            Relation::Eq,
            score_vector(m, &t).scores,
            want.to_vec(),
            1e-9,
        ));
    }
    let shapley_sum: f64 = score_vector(ScoreMethod::Shapley, &t).scores.iter().sum();
    r.assertions.push(Assertion::new("shapley efficiency", Relation::Eq, vec![shapley_sum], vec![t.get(t.full_mask())], 1e-9));

    let p = maximal_partition(&t, tol)?;
    let blocks: Vec<f64> = p.blocks().iter().map(|b| b.bits() as f64).collect();
    r.assertions.push(Assertion::new("maximal partition masks", Relation::Eq, blocks, vec![3.0, 4.0], 0.0));
    let mut grouped = Vec::new();
    for m in ScoreMethod::ALL {
        let g = grouped_score_vector(m, &t, &p)?;
        r.assertions.push(Assertion::new(format!("{m} grouped scores"), Relation::Eq, g.clone(), vec![0.5, 1.0 / 3.0], 1e-9));
        grouped.push(ImportanceVector { method: m, scores: g, witnesses: None });
    }
    r.grouped_scores.push(NamedScores { table: "toy".into(), vectors: grouped });
    r.partition = Some(p);
    Ok(r)
}
