//! Markdown views of the command reports.

use featimp::axioms::render_markdown;
use featimp::report::{fmt_sig, kv_markdown, scores_markdown, Report};
use featimp::scenarios::ScenarioReport;

use crate::commands::{AuditBody, EvalBody, PartitionBody, ScoresBody};

fn header<B>(r: &Report<B>) -> String {
    format!(
        "# {} {}\n\n{}\n",
        r.tool,
        r.command,
        kv_markdown(&[
            ("version".into(), r.version.clone()),
            ("tolerance".into(), fmt_sig(r.tolerance)),
            ("input sha256".into(), r.input_sha256.clone()),
        ])
    )
}

fn notes(out: &mut String, notes: &[String]) {
    if !notes.is_empty() {
        out.push_str("\n## Notes\n\n");
        for n in notes {
            out.push_str(&format!("- {n}\n"));
        }
    }
}

pub fn scores(r: &Report<ScoresBody>) -> String {
    let mut out = header(r);
    if let Some(names) = &r.body.feature_names {
        out.push_str("## Features\n\n");
        let rows: Vec<_> = names.iter().enumerate().map(|(i, n)| (format!("f{i}"), n.clone())).collect();
        out.push_str(&kv_markdown(&rows));
        out.push('\n');
    }
    out.push_str("## Scores\n\n");
    out.push_str(&scores_markdown(&r.body.vectors));
    notes(&mut out, &r.body.notes);
    out
}

pub fn audit(r: &Report<AuditBody>) -> String {
    let mut out = header(r);
    out.push_str(&format!("## Checks ({} violations)\n\n", r.body.violations));
    out.push_str(&render_markdown(&r.body.reports));
    if !r.body.separable_importance.is_empty() {
        out.push_str("\n## Separable importance\n\n| set | axiom | method | status | residual | witness |\n|---|---|---|---|---|---|\n");
        for s in &r.body.separable_importance {
            for a in [&s.split, &s.converse] {
                let method = a.method.map_or("-".into(), |m| m.to_string());
                let witness = a.witness.as_ref().map_or("-".into(), |w| w.to_string());
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    s.set,
                    a.axiom,
                    method,
                    a.status(),
                    fmt_sig(a.residual),
                    witness
                ));
            }
        }
    }
    notes(&mut out, &r.body.notes);
    out
}

pub fn partition(r: &Report<PartitionBody>) -> String {
    let mut out = header(r);
    out.push_str("## Blocks\n\n| block | separable | worst T | residual |\n|---|---|---|---|\n");
    for v in &r.body.validation {
        out.push_str(&format!("| {} | {} | {} | {} |\n", v.set, v.separable, v.worst_t, fmt_sig(v.worst_residual)));
    }
    if let Some(agree) = r.body.oracle_agrees {
        out.push_str(&format!("\nOracle agrees: {agree}\n"));
    }
    out
}

pub fn eval(r: &Report<EvalBody>) -> String {
    let mut out = header(r);
    let b = &r.body;
    let mut rows = vec![
        ("features".into(), b.n.to_string()),
        ("instances".into(), b.m.to_string()),
        ("feature names".into(), b.feature_names.join(", ")),
        ("target".into(), b.target.clone()),
        ("ν(∅)".into(), fmt_sig(b.empty_value)),
        ("ν(F)".into(), fmt_sig(b.full_value)),
        ("table file".into(), b.out.clone()),
    ];
    if let Some(w) = b.raw_weight_sum {
        rows.push(("raw weight sum".into(), fmt_sig(w)));
    }
    out.push_str("## Summary\n\n");
    out.push_str(&kv_markdown(&rows));
    notes(&mut out, &b.notes);
    out
}

pub fn demo(r: &Report<ScenarioReport>) -> String {
    let mut out = header(r);
    let b = &r.body;
    out.push_str(&format!("## Scenario: {}\n\n", b.name));
    if !b.parameters.is_empty() {
        let rows: Vec<_> = b.parameters.iter().map(|p| (p.name.clone(), fmt_sig(p.value))).collect();
        out.push_str(&kv_markdown(&rows));
        out.push('\n');
    }
    out.push_str("## Value tables\n\n| table | values |\n|---|---|\n");
    for t in &b.tables {
        let vals: Vec<_> = t.table.values().iter().map(|v| fmt_sig(*v)).collect();
        out.push_str(&format!("| {} | {} |\n", t.name, vals.join(", ")));
    }
    for s in &b.scores {
        out.push_str(&format!("\n### Scores: {}\n\n", s.table));
        out.push_str(&scores_markdown(&s.vectors));
    }
    if let Some(p) = &b.partition {
        let blocks: Vec<_> = p.blocks().iter().map(|m| m.to_string()).collect();
        out.push_str(&format!("\n## Maximal partition\n\n{}\n", blocks.join(" | ")));
    }
    for s in &b.grouped_scores {
        out.push_str(&format!("\n### Grouped scores: {}\n\n", s.table));
        out.push_str(&scores_markdown(&s.vectors));
    }
    if !b.axioms.is_empty() {
        out.push_str("\n## Axioms\n\n| label | axiom | method | status | residual |\n|---|---|---|---|---|\n");
        for a in &b.axioms {
            let method = a.report.method.map_or("-".into(), |m| m.to_string());
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                a.label,
                a.report.axiom,
                method,
                a.report.status(),
                fmt_sig(a.report.residual)
            ));
        }
    }
    out.push_str("\n## Assertions\n\n| assertion | holds | lhs | rhs |\n|---|---|---|---|\n");
    for a in &b.assertions {
        let fmt = |v: &[f64]| v.iter().map(|x| fmt_sig(*x)).collect::<Vec<_>>().join(", ");
        out.push_str(&format!("| {} | {} | {} | {} |\n", a.name, a.holds, fmt(&a.lhs), fmt(&a.rhs)));
    }
    notes(&mut out, &b.notes);
    out
}
