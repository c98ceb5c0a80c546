//! Value tables from raw data.
//!
//! The built-in metric is the coefficient of determination of a weighted
//! least-squares fit without intercept:
//!
//! ```text
//! ν(S) = 1 − Σ_i w_i (ŷ_i^S − y_i)² / Σ_i w_i y_i²
//! ```
//!
//! `ŷ^S` is the minimum-norm fit on the columns in `S`. Duplicated or
//! collinear columns leave the fitted values (and so `ν`) well defined even
//! though the coefficients are not.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::subset::{SubsetMask, ValueTable, HARD_MAX_FEATURES};
use crate::{Error, Result};

/// Default feature cap for dataset-derived tables (one decomposition per
/// subset).
pub const DATASET_MAX_FEATURES: usize = 16;

/// Pivots of the QR factor below `RANK_CUTOFF` times the largest pivot count as zero.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Instances × features, a target per instance and normalized weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    w: Vec<f64>,
}

fn normalize_weights(w: Vec<f64>) -> Result<Vec<f64>> {
    if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {v} at row {i} is negative or not finite")));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

impl Dataset {
    /// `rows[i][j]` is feature `j` of instance `i`. Weights default to
    /// uniform and are normalized to sum to one.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, w: Option<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidDataset(format!("row {i} has {} features, expected {n}", r.len())));
        }
        let columns = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns(columns, y, w)
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, y: Vec<f64>, w: Option<Vec<f64>>) -> Result<Self> {
        let m = y.len();
        if m == 0 {
            return Err(Error::InvalidDataset("no instances".into()));
        }
        if columns.is_empty() {
            return Err(Error::NoFeatures);
        }
        for (j, c) in columns.iter().enumerate() {
            if c.len() != m {
                return Err(Error::InvalidDataset(format!("column {j} has {} rows, expected {m}", c.len())));
            }
            if let Some((i, v)) = c.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("non-finite value {v} at row {i}, column {j}")));
            }
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite target {v} at row {i}")));
        }
        let w = match w {
            Some(w) if w.len() != m => {
                return Err(Error::InvalidWeights(format!("{} weights for {m} rows", w.len())));
            }
            Some(w) => normalize_weights(w)?,
            None => vec![1.0 / m as f64; m],
        };
        Ok(Dataset { columns, y, w })
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_instances(&self) -> usize {
        self.y.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Same design and weights with the targets replaced.
    pub fn with_targets(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.y.len() {
            return Err(Error::InvalidDataset(format!(
                "{} targets for {} rows",
                y.len(),
                self.y.len()
            )));
        }
        Dataset::from_columns(self.columns.clone(), y, Some(self.w.clone()))
    }
}

/// A rule turning a restricted dataset into a scalar value.
pub trait ValueMetric: Sync {
    fn id(&self) -> &str;

    /// `columns` holds the feature columns of one subset (possibly none).
    fn evaluate(&self, columns: &[&[f64]], y: &[f64], w: &[f64]) -> Result<f64>;
}

/// Intercept-free weighted least-squares R².
#[derive(Clone, Copy, Debug, Default)]
pub struct R2NoIntercept;

impl ValueMetric for R2NoIntercept {
    fn id(&self) -> &str {
        "r2-no-intercept"
    }

    fn evaluate(&self, columns: &[&[f64]], y: &[f64], w: &[f64]) -> Result<f64> {
        let total: f64 = y.iter().zip(w).map(|(y, w)| w * y * y).sum();
        if total <= 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        if columns.is_empty() {
            return Ok(0.0);
        }
        let m = y.len();
        let sw: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
        let a = DMatrix::from_fn(m, columns.len(), |i, j| sw[i] * columns[j][i]);
        let b = DVector::from_fn(m, |i, _| sw[i] * y[i]);
        // pivoted QR: leading diagonal entries of R decide the numerical rank
        let qr = a.col_piv_qr();
        let r = qr.r();
        let q = qr.q();
        let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|j| r[(j, j)].abs()).collect();
        let cutoff = RANK_CUTOFF * diag.first().copied().unwrap_or(0.0);
        let rank = diag.iter().take_while(|&&d| d > cutoff && d > 0.0).count();
        let mut fitted = DVector::zeros(m);
        for j in 0..rank {
            let qj = q.column(j);
            fitted.axpy(qj.dot(&b), &qj, 1.0);
        }
        let rss = (fitted - &b).norm_squared();
        Ok(1.0 - rss / total)
    }
}

/// Value table of `d` under an arbitrary metric, one evaluation per subset.
pub fn value_table_with(d: &Dataset, metric: &dyn ValueMetric, cap: usize) -> Result<ValueTable> {
    let n = d.n_features();
    let cap = cap.min(HARD_MAX_FEATURES);
    if n > cap {
        return Err(Error::TooManyFeatures { n, cap });
    }
    let values = (0..1u32 << n)
        .into_par_iter()
        .map(|bits| {
            let cols: Vec<&[f64]> = SubsetMask(bits).iter().map(|j| d.column(j)).collect();
            metric.evaluate(&cols, &d.y, &d.w)
        })
        .collect::<Result<Vec<f64>>>()?;
    ValueTable::with_cap(n, values, cap)
}

/// `ν(S)` = intercept-free weighted R² of the fit on columns `S`.
pub fn r2_value_table(d: &Dataset) -> Result<ValueTable> {
    value_table_with(d, &R2NoIntercept, DATASET_MAX_FEATURES)
}

/// `ν^M`: the data metric with the targets replaced by model outputs.
pub fn model_value_table(d: &Dataset, model_outputs: &[f64]) -> Result<ValueTable> {
    r2_value_table(&d.with_targets(model_outputs.to_vec())?)
}

/// A model given by its output at every point of a finite product grid.
///
/// `outputs` is row-major in feature order: the last feature varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    domains: Vec<Vec<f64>>,
    outputs: Vec<f64>,
}

impl OutcomeTable {
    pub fn new(domains: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::NoFeatures);
        }
        for (f, d) in domains.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::NotAProductGrid(format!("feature {f} has an empty domain")));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::NotAProductGrid(format!("feature {f} has a non-finite domain value")));
            }
            for (i, a) in d.iter().enumerate() {
                if d[..i].contains(a) {
                    return Err(Error::NotAProductGrid(format!("feature {f} repeats domain value {a}")));
                }
            }
        }
        let size: usize = domains.iter().map(Vec::len).product();
        if outputs.len() != size {
            return Err(Error::NotAProductGrid(format!(
                "{} outputs for a grid of {size} points",
                outputs.len()
            )));
        }
        if outputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite model output".into()));
        }
        Ok(OutcomeTable { domains, outputs })
    }

    /// Evaluates `model` at every grid point.
    pub fn from_model(domains: Vec<Vec<f64>>, model: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let size: usize = domains.iter().map(Vec::len).product();
        let probe = OutcomeTable { domains, outputs: Vec::new() };
        let outputs = (0..size).map(|i| model(&probe.point(i))).collect();
        OutcomeTable::new(probe.domains, outputs)
    }

    /// Builds a grid from scattered `(point, output)` pairs, which must
    /// cover every combination of the observed per-feature values exactly
    /// once.
    pub fn from_points(points: &[(Vec<f64>, f64)]) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.0.len());
        if n == 0 {
            return Err(Error::NotAProductGrid("no points".into()));
        }
        let mut domains: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (x, _) in points {
            if x.len() != n {
                return Err(Error::NotAProductGrid("points of different dimension".into()));
            }
            for (d, v) in domains.iter_mut().zip(x) {
                if !d.contains(v) {
                    d.push(*v);
                }
            }
        }
        for d in &mut domains {
            d.sort_by(f64::total_cmp);
        }
        let size: usize = domains.iter().map(Vec::len).product();
        let mut outputs = vec![None; size];
        let probe = OutcomeTable { domains, outputs: Vec::new() };
        for (x, y) in points {
            let idx = probe.index_of(x).expect("domain built from points");
            if outputs[idx].replace(*y).is_some() {
                return Err(Error::NotAProductGrid(format!("point {x:?} appears twice")));
            }
        }
        let missing = outputs.iter().filter(|o| o.is_none()).count();
        if missing > 0 {
            return Err(Error::NotAProductGrid(format!("{missing} grid points have no output")));
        }
        OutcomeTable::new(probe.domains, outputs.into_iter().map(Option::unwrap).collect())
    }

    pub fn n_features(&self) -> usize {
        self.domains.len()
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn domains(&self) -> &[Vec<f64>] {
        &self.domains
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.domains.len()];
        for f in (0..self.domains.len().saturating_sub(1)).rev() {
            s[f] = s[f + 1] * self.domains[f + 1].len();
        }
        s
    }

    /// Coordinates of grid point `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let strides = self.strides();
        self.domains
            .iter()
            .zip(&strides)
            .map(|(d, s)| d[(index / s) % d.len()])
            .collect()
    }

    fn index_of(&self, x: &[f64]) -> Option<usize> {
        let strides = self.strides();
        let mut idx = 0;
        for ((d, s), v) in self.domains.iter().zip(&strides).zip(x) {
            idx += d.iter().position(|a| a == v)? * s;
        }
        Some(idx)
    }

    /// True if changing feature `f` alone never changes the output by more
    /// than `tol`.
    pub fn is_null_feature(&self, f: usize, tol: f64) -> bool {
        let strides = self.strides();
        let (stride, k) = (strides[f], self.domains[f].len());
        (0..self.outputs.len())
            .filter(|i| (i / stride) % k == 0)
            .all(|base| (1..k).all(|j| (self.outputs[base + j * stride] - self.outputs[base]).abs() <= tol))
    }
}

/// One dataset row per grid point, weighted by `weights`, with the model
/// output as target.
pub fn grid_to_dataset(g: &OutcomeTable, weights: &[f64]) -> Result<Dataset> {
    if weights.len() != g.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for a grid of {} points",
            weights.len(),
            g.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("grid weights sum to {total}, expected 1")));
    }
    let rows: Vec<Vec<f64>> = (0..g.len()).map(|i| g.point(i)).collect();
    Dataset::from_rows(&rows, g.outputs.clone(), Some(weights.to_vec()))
}

/// A dataset read from CSV plus the bookkeeping the CLI reports.
#[derive(Clone, Debug)]
pub struct CsvDataset {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    pub target: String,
    /// Sum of the raw weight column, when one was given.
    pub raw_weight_sum: Option<f64>,
}

/// Reads a headed CSV: `target` names the target column, `weight_col` an
/// optional weight column, every other column is a feature in file order.
/// Rows are numbered from 1 with the header as row 1.
pub fn read_csv<R: Read>(reader: R, target: &str, weight_col: Option<&str>) -> Result<CsvDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
            row: 1,
            column: name.to_owned(),
            message: "column not found in header".into(),
        })
    };
    let ti = find(target)?;
    let wi = weight_col.map(find).transpose()?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != ti && Some(i) != wi).collect();
    if feature_idx.is_empty() {
        return Err(Error::Csv { row: 1, column: target.to_owned(), message: "no feature columns".into() });
    }

    let mut columns = vec![Vec::new(); feature_idx.len()];
    let mut y = Vec::new();
    let mut w = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec?;
        let cell = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Csv {
                row,
                column: headers[i].clone(),
                message: format!("`{raw}` is not a finite number"),
            })
        };
        for (c, &i) in columns.iter_mut().zip(&feature_idx) {
            c.push(cell(i)?);
        }
        y.push(cell(ti)?);
        if let Some(i) = wi {
            w.push(cell(i)?);
        }
    }
    let raw_weight_sum = wi.map(|_| w.iter().sum());
    let dataset = Dataset::from_columns(columns, y, wi.map(|_| w))?;
    Ok(CsvDataset {
        dataset,
        feature_names: feature_idx.iter().map(|&i| headers[i].clone()).collect(),
        target: target.to_owned(),
        raw_weight_sum,
    })
}
