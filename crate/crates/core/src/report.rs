//! Report envelope and Markdown rendering helpers.

use serde::{Deserialize, Serialize};

use crate::importance::ImportanceVector;

/// Significant digits used for human-readable numbers.
pub const MARKDOWN_DIGITS: usize = 12;

/// Rounds to twelve significant digits and prints the shortest decimal that
/// reads back as the rounded value, so `1/3` renders as `0.333333333333`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", MARKDOWN_DIGITS - 1, x).parse().unwrap_or(x);
    if (1e-4..1e15).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

/// Every report carries the tool identity, the tolerance in force and a
/// hash of its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<B> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub tolerance: f64,
    pub input_sha256: String,
    pub body: B,
}

/// `| method | f0 | f1 | .. |` with one row per vector.
pub fn scores_markdown(vectors: &[ImportanceVector]) -> String {
    let n = vectors.first().map_or(0, |v| v.n());
    let mut out = String::from("| method |");
    for f in 0..n {
        out.push_str(&format!(" f{f} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(n));
    out.push('\n');
    for v in vectors {
        out.push_str(&format!("| {} |", v.method));
        for s in &v.scores {
            out.push_str(&format!(" {} |", fmt_sig(*s)));
        }
        out.push('\n');
    }
    out
}

/// Two-column key/value table.
pub fn kv_markdown(rows: &[(String, String)]) -> String {
    let mut out = String::from("| key | value |\n|---|---|\n");
    for (k, v) in rows {
        out.push_str(&format!("| {k} | {v} |\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::importance::{score_vector, ScoreMethod};
    use crate::subset::ValueTable;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(5.0 / 6.0), "0.833333333333");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e-30), "6.66666666667e-31");
        assert_eq!(fmt_sig(1e-9), "1e-9");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
    }

    #[test]
    fn scores_table() {
        let t = ValueTable::new(1, vec![0.0, 1.0]).unwrap();
        let v: Vec<_> = ScoreMethod::ALL.iter().map(|&m| score_vector(m, &t)).collect();
        let md = scores_markdown(&v);
        assert_eq!(md.lines().next(), Some("| method | f0 |"));
        assert!(md.contains("| shapley | 1 |"));
        assert_eq!(md.lines().count(), 6);
    }
}
