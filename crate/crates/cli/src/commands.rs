//! Subcommand handlers and the report bodies they emit.

use std::error::Error as StdError;
use std::fs;
use std::path::Path;

use featimp::axioms::{
    check_elimination, check_empty_set, check_marginal_contribution, check_minimalism, check_monotonicity,
    check_separable_importance, check_symmetry, check_triviality, AxiomReport, SeparableImportanceReport,
    SymmetryVariant, ENUMERATION_MAX_FEATURES,
};
use featimp::dataset::{r2_value_table, read_csv};
use featimp::importance::score_vector;
use featimp::io::{self, Input};
use featimp::report::Report;
use featimp::sample_space::{check_importance_consistency, check_value_consistency, global_table, SampleSpace};
use featimp::scenarios::{self, ColliderParams, ScenarioReport};
use featimp::separability::{maximal_partition, maximal_partition_oracle, validate_partition};
use featimp::{ImportanceVector, Partition, ScoreMethod, SeparabilityReport, Tolerance, ValueTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::render;
use crate::{ColliderOpts, Command, Common, DataOpts, Format, Scenario, EXIT_VIOLATION};

pub type BoxResult<T> = Result<T, Box<dyn StdError>>;

pub const TOOL: &str = "featimp";

/// What to print and which status to exit with.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Table,
    SampleSpace,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoresBody {
    pub source: Source,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
    pub vectors: Vec<ImportanceVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditBody {
    pub source: Source,
    pub n: usize,
    pub reports: Vec<AxiomReport>,
    pub separable_importance: Vec<SeparableImportanceReport>,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBody {
    pub n: usize,
    pub partition: Partition,
    pub validation: Vec<SeparabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalBody {
    pub n: usize,
    pub m: usize,
    pub feature_names: Vec<String>,
    pub target: String,
    pub empty_value: f64,
    pub full_value: f64,
    pub out: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_weight_sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn envelope<B>(command: &str, tol: f64, input_sha256: String, body: B) -> Report<B> {
    Report {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        tolerance: tol,
        input_sha256,
        body,
    }
}

fn emit<B: Serialize>(report: &Report<B>, format: Format, markdown: impl FnOnce(&Report<B>) -> String) -> BoxResult<String> {
    Ok(match format {
        Format::Json => io::to_json(report)?,
        Format::Markdown => markdown(report),
    })
}

/// A loaded input reduced to the table the checks run on.
pub struct Loaded {
    pub source: Source,
    pub table: ValueTable,
    pub space: Option<SampleSpace>,
    pub feature_names: Option<Vec<String>>,
    pub sha256: String,
    pub notes: Vec<String>,
}

fn weight_note(raw: Option<f64>) -> Option<String> {
    raw.filter(|s| (s - 1.0).abs() > 1e-12)
        .map(|s| format!("weight column summed to {s}; weights were normalized to sum to 1"))
}

pub fn load(path: &Path, data: &DataOpts) -> BoxResult<Loaded> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let sha256 = sha256_hex(&bytes);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if let Some(target) = &data.target {
        let c = read_csv(bytes.as_slice(), target, data.weight_col.as_deref())?;
        let table = r2_value_table(&c.dataset)?;
        return Ok(Loaded {
            source: Source::Csv,
            table,
            space: None,
            feature_names: Some(c.feature_names),
            sha256,
            notes: weight_note(c.raw_weight_sum).into_iter().collect(),
        });
    }
    if is_csv {
        return Err("CSV input needs --target".into());
    }
    if data.weight_col.is_some() {
        return Err("--weight-col applies only to CSV input with --target".into());
    }
    Ok(match io::parse_input(&bytes)? {
        Input::Table(table) => Loaded { source: Source::Table, table, space: None, feature_names: None, sha256, notes: vec![] },
        Input::SampleSpace(space) => Loaded {
            source: Source::SampleSpace,
            table: global_table(&space),
            space: Some(space),
            feature_names: None,
            sha256,
            notes: vec!["table checks run on the expected (global) table of the sample space".into()],
        },
    })
}

/// The CLI insists on a strictly positive tolerance.
fn tolerance(tol: f64) -> BoxResult<Tolerance> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(format!("--tol must be a positive number, got {tol}").into());
    }
    Ok(Tolerance::new(tol)?)
}

fn methods(common: &Common) -> Vec<ScoreMethod> {
    let mut m = if common.methods.is_empty() { ScoreMethod::ALL.to_vec() } else { common.methods.clone() };
    m.sort();
    m.dedup();
    m
}

pub fn run(command: Command) -> BoxResult<Outcome> {
    match command {
        Command::Scores { input, common, data } => scores(&input, &common, &data),
        Command::Audit { input, common, data, fail_on_violation, global } => {
            audit(&input, &common, &data, fail_on_violation, global.as_deref())
        }
        Command::Partition { input, common, data, with_oracle, out } => {
            partition(&input, &common, &data, with_oracle, out.as_deref())
        }
        Command::EvalDataset { csv, target, weight_col, out, output } => {
            eval_dataset(&csv, &target, weight_col.as_deref(), &out, output)
        }
        Command::Demo { scenario, output, collider } => demo(scenario, output, &collider),
    }
}

pub fn scores(input: &Path, common: &Common, data: &DataOpts) -> BoxResult<Outcome> {
    let tol = tolerance(common.tol)?;
    let l = load(input, data)?;
    let body = ScoresBody {
        source: l.source,
        n: l.table.n(),
        feature_names: l.feature_names,
        vectors: methods(common).into_iter().map(|m| score_vector(m, &l.table)).collect(),
        notes: l.notes,
    };
    let report = envelope("scores", tol.value(), l.sha256, body);
    Ok(Outcome { code: 0, text: emit(&report, common.output, render::scores)? })
}

/// Every applicable checker for one table and method set.
pub fn audit_table(
    t: &ValueTable,
    methods: &[ScoreMethod],
    tol: Tolerance,
) -> BoxResult<(Vec<AxiomReport>, Vec<SeparableImportanceReport>, Vec<String>)> {
    let n = t.n();
    let mut reports = vec![check_empty_set(t, tol), check_monotonicity(t, tol)];
    let mut separable = Vec::new();
    let mut notes = Vec::new();
    let enumerable = n <= ENUMERATION_MAX_FEATURES;
    if !enumerable {
        notes.push(format!(
            "elimination and separable importance skipped: n = {n} exceeds {ENUMERATION_MAX_FEATURES}"
        ));
    }
    let blocks = if enumerable {
        match maximal_partition(t, tol) {
            Ok(p) => p.blocks().to_vec(),
            Err(e) => {
                notes.push(format!("separable importance skipped: {e}"));
                vec![]
            }
        }
    } else {
        vec![]
    };
    for &m in methods {
        let v = score_vector(m, t);
        reports.push(check_triviality(t, &v, tol)?);
        reports.push(check_marginal_contribution(t, &v, tol)?);
        if enumerable {
            reports.push(check_elimination(t, m, tol)?);
        }
        reports.push(check_minimalism(t, &v, tol)?);
        reports.push(check_symmetry(t, &v, SymmetryVariant::ZEmpty, tol)?);
        reports.push(check_symmetry(t, &v, SymmetryVariant::ZPair, tol)?);
        for &b in &blocks {
            separable.push(check_separable_importance(t, m, b, tol)?);
        }
    }
    Ok((reports, separable, notes))
}

pub fn audit(
    input: &Path,
    common: &Common,
    data: &DataOpts,
    fail_on_violation: bool,
    global: Option<&Path>,
) -> BoxResult<Outcome> {
    let tol = tolerance(common.tol)?;
    let l = load(input, data)?;
    let ms = methods(common);
    let (mut reports, separable, mut notes) = audit_table(&l.table, &ms, tol)?;
    notes.splice(0..0, l.notes);
    match (&l.space, global) {
        (Some(space), claim) => {
            if let Some(path) = claim {
                let claim = io::read_table(path).map_err(|e| format!("{}: {e}", path.display()))?;
                reports.push(check_value_consistency(space, &claim, tol)?);
            } else {
                notes.push("value consistency skipped: no --global table given".into());
            }
            for &m in &ms {
                reports.push(check_importance_consistency(space, m, tol));
            }
        }
        (None, Some(_)) => return Err("--global applies only to sample-space input".into()),
        (None, None) => {}
    }
    let violations = reports.iter().filter(|r| !r.passed).count()
        + separable.iter().map(|s| usize::from(!s.split.passed) + usize::from(!s.converse.passed)).sum::<usize>();
    let body = AuditBody { source: l.source, n: l.table.n(), reports, separable_importance: separable, violations, notes };
    let report = envelope("audit", tol.value(), l.sha256, body);
    let code = if fail_on_violation && violations > 0 { EXIT_VIOLATION } else { 0 };
    Ok(Outcome { code, text: emit(&report, common.output, render::audit)? })
}

pub fn partition(
    input: &Path,
    common: &Common,
    data: &DataOpts,
    with_oracle: bool,
    out: Option<&Path>,
) -> BoxResult<Outcome> {
    let tol = tolerance(common.tol)?;
    let l = load(input, data)?;
    let p = maximal_partition(&l.table, tol)?;
    let validation = validate_partition(&l.table, &p, tol)?;
    let oracle_agrees = if with_oracle {
        let o = maximal_partition_oracle(&l.table, tol)?;
        if o != p {
            return Err(format!("partition {:?} disagrees with the exhaustive oracle {:?}", p.blocks(), o.blocks()).into());
        }
        Some(true)
    } else {
        None
    };
    if let Some(path) = out {
        io::write_json(path, &p).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let body = PartitionBody { n: l.table.n(), partition: p, validation, oracle_agrees };
    let report = envelope("partition", tol.value(), l.sha256, body);
    Ok(Outcome { code: 0, text: emit(&report, common.output, render::partition)? })
}

pub fn eval_dataset(csv: &Path, target: &str, weight_col: Option<&str>, out: &Path, format: Format) -> BoxResult<Outcome> {
    let bytes = fs::read(csv).map_err(|e| format!("{}: {e}", csv.display()))?;
    let c = read_csv(bytes.as_slice(), target, weight_col)?;
    let t = r2_value_table(&c.dataset)?;
    io::write_json(out, &t).map_err(|e| format!("{}: {e}", out.display()))?;
    let body = EvalBody {
        n: t.n(),
        m: c.dataset.n_instances(),
        feature_names: c.feature_names,
        target: c.target,
        empty_value: t.get(featimp::SubsetMask::EMPTY),
        full_value: t.get(t.full_mask()),
        out: out.display().to_string(),
        raw_weight_sum: c.raw_weight_sum,
        notes: weight_note(c.raw_weight_sum).into_iter().collect(),
    };
    let report = envelope("eval-dataset", Tolerance::DEFAULT, sha256_hex(&bytes), body);
    Ok(Outcome { code: 0, text: emit(&report, format, render::eval)? })
}

pub fn collider_params(o: &ColliderOpts) -> ColliderParams {
    let mut p = ColliderParams::default();
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut p.p_smoke, o.p_smoke);
    set(&mut p.p_earache, o.p_earache);
    set(&mut p.p_gum[0], o.p_gum_00);
    set(&mut p.p_gum[1], o.p_gum_01);
    set(&mut p.p_gum[2], o.p_gum_10);
    set(&mut p.p_gum[3], o.p_gum_11);
    set(&mut p.p_cancer[0], o.p_cancer_0);
    set(&mut p.p_cancer[1], o.p_cancer_1);
    p
}

pub fn run_scenario(scenario: Scenario, o: &ColliderOpts) -> BoxResult<(ScenarioReport, String)> {
    Ok(match scenario {
        Scenario::MciNonlinearity => (scenarios::demo_mci_nonlinearity(), sha256_hex(b"mci-nonlinearity")),
        Scenario::TwinFeatures => (scenarios::demo_twin_features(), sha256_hex(b"twin-features")),
        Scenario::ToySeparable => (scenarios::demo_toy_separable()?, sha256_hex(b"toy-separable")),
        Scenario::Collider => {
            let p = collider_params(o);
            let key = serde_json::to_vec(&p)?;
            (scenarios::demo_collider(&p)?, sha256_hex(&key))
        }
    })
}

pub fn demo(scenario: Scenario, format: Format, o: &ColliderOpts) -> BoxResult<Outcome> {
    let (body, hash) = run_scenario(scenario, o)?;
    let report = envelope("demo", Tolerance::DEFAULT, hash, body);
    Ok(Outcome { code: 0, text: emit(&report, format, render::demo)? })
}
