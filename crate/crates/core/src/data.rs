//! Dataset ingestion, encoding, and splitting.
//!
//! A [`TrainingSet`] holds the `(X, A, Y)` triples everything downstream
//! consumes: a dense feature matrix, a categorical protected attribute, and
//! binary labels. Ingestion one-hot encodes categorical columns (the
//! protected column is always encoded into the features *and* kept as a
//! separate vector, so learners may use it while constraint systems
//! condition on it), optionally standardizes numeric columns, and splits
//! deterministically by seed.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a flat row-major buffer. `data.len()` must equal
    /// `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "matrix buffer has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from per-row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Argument(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// How a raw column is mapped into the feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnRole {
    Numeric,
    Categorical,
    Protected,
    Label,
    Dropped,
}

/// Describes how to interpret a CSV file's columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub label_column: String,
    pub protected_column: String,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    /// Pinned category orders per encoded column. When a column appears
    /// here its indicator layout follows this list (unlisted cell values
    /// are errors); otherwise categories are taken in first-appearance
    /// order. Model artifacts pin these so evaluation data encodes
    /// identically to the training data.
    #[serde(default)]
    pub category_values: Vec<(String, Vec<String>)>,
}

impl DatasetSchema {
    pub fn new(label: impl Into<String>, protected: impl Into<String>) -> Self {
        DatasetSchema {
            label_column: label.into(),
            protected_column: protected.into(),
            categorical_columns: Vec::new(),
            drop_columns: Vec::new(),
            category_values: Vec::new(),
        }
    }

    pub fn with_category_values(mut self, values: Vec<(String, Vec<String>)>) -> Self {
        self.category_values = values;
        self
    }

    pub fn with_categorical(mut self, cols: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.categorical_columns = cols.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_drop(mut self, cols: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.drop_columns = cols.into_iter().map(Into::into).collect();
        self
    }

    /// Internal-consistency check: label != protected, nothing listed twice.
    pub fn validate(&self) -> Result<()> {
        if self.label_column == self.protected_column {
            return Err(Error::Schema(format!(
                "label column and protected column are both '{}'",
                self.label_column
            )));
        }
        let mut seen = BTreeSet::new();
        let listed = self
            .categorical_columns
            .iter()
            .chain(self.drop_columns.iter())
            .chain([&self.label_column, &self.protected_column]);
        for col in listed {
            // The protected column may also appear in categorical_columns
            // (it is one-hot encoded either way); all other repeats are
            // schema mistakes.
            if !seen.insert(col.clone()) && col != &self.protected_column {
                return Err(Error::Schema(format!("column '{}' listed twice", col)));
            }
        }
        if self.drop_columns.contains(&self.label_column)
            || self.drop_columns.contains(&self.protected_column)
        {
            return Err(Error::Schema(
                "label/protected columns cannot be dropped".into(),
            ));
        }
        Ok(())
    }
}

/// Per-column standardization parameters, recorded so that model artifacts
/// can replay the exact transform on evaluation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedColumn {
    /// Feature-matrix column index.
    pub index: usize,
    pub mean: f64,
    /// Divisor actually used; 1.0 for constant columns.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Standardization {
    pub columns: Vec<StandardizedColumn>,
}

/// The canonical in-memory dataset: features, protected attribute, labels.
///
/// Immutable after construction (the standardization methods consume or
/// mutate before the set is shared); safe to share across concurrent solver
/// runs.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub features: Matrix,
    /// Per-row index into `attribute_values`.
    pub protected: Vec<usize>,
    /// Binary labels, each 0 or 1.
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Distinct protected values in first-appearance order.
    pub attribute_values: Vec<String>,
    /// Location `(start, width)` of the protected one-hot block inside the
    /// feature matrix, when the features were produced by [`load_csv`].
    pub protected_block: Option<(usize, usize)>,
    /// `true` for one-hot indicator columns (excluded from standardization).
    pub indicator_columns: Vec<bool>,
    /// Observed category order per encoded source column (protected
    /// included), suitable for pinning via
    /// [`DatasetSchema::with_category_values`].
    pub categorical_values: Vec<(String, Vec<String>)>,
}

impl TrainingSet {
    /// Assemble a training set from pre-encoded parts, checking invariants.
    pub fn from_parts(
        features: Matrix,
        protected: Vec<usize>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        attribute_values: Vec<String>,
    ) -> Result<Self> {
        let n = features.rows();
        if n == 0 {
            return Err(Error::EmptyInput("training set has no rows".into()));
        }
        if protected.len() != n || labels.len() != n {
            return Err(Error::Argument(format!(
                "column lengths disagree: features {}, protected {}, labels {}",
                n,
                protected.len(),
                labels.len()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Argument(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if attribute_values.is_empty() {
            return Err(Error::Argument("no protected attribute values".into()));
        }
        if let Some(&bad) = protected.iter().find(|&&g| g >= attribute_values.len()) {
            return Err(Error::Argument(format!(
                "protected index {} out of range ({} values)",
                bad,
                attribute_values.len()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::Argument("labels must be 0 or 1".into()));
        }
        let cols = features.cols();
        Ok(TrainingSet {
            features,
            protected,
            labels,
            feature_names,
            attribute_values,
            protected_block: None,
            indicator_columns: vec![false; cols],
            categorical_values: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_groups(&self) -> usize {
        self.attribute_values.len()
    }

    /// Empirical share of each protected group, in `attribute_values` order.
    pub fn group_probs(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_groups()];
        for &g in &self.protected {
            counts[g] += 1;
        }
        counts
            .iter()
            .map(|&c| c as f64 / self.len() as f64)
            .collect()
    }

    /// New set containing the given rows in the given order. Keeps the full
    /// `attribute_values` list so group indices stay aligned across subsets.
    pub fn subset(&self, indices: &[usize]) -> Self {
        TrainingSet {
            features: self.features.select_rows(indices),
            protected: indices.iter().map(|&i| self.protected[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            attribute_values: self.attribute_values.clone(),
            protected_block: self.protected_block,
            indicator_columns: self.indicator_columns.clone(),
            categorical_values: self.categorical_values.clone(),
        }
    }

    /// Deterministic shuffled split into `(train, test)` with sizes
    /// `⌈fraction·n⌉` and `n − ⌈fraction·n⌉`. Row order within each side
    /// follows the original file. When the shuffle leaves the train side
    /// without some label class that could be represented, one row is
    /// swapped across to restore it.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Argument(format!(
                "train fraction must lie in (0,1), got {}",
                train_fraction
            )));
        }
        let n = self.len();
        let train_n = (train_fraction * n as f64).ceil() as usize;
        if train_n == 0 || train_n == n {
            return Err(Error::Argument(format!(
                "split of {} rows at fraction {} leaves an empty side",
                n, train_fraction
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut train_idx: Vec<usize> = order[..train_n].to_vec();
        let mut test_idx: Vec<usize> = order[train_n..].to_vec();
        self.rebalance_labels(&mut train_idx, &mut test_idx);
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        Ok((self.subset(&train_idx), self.subset(&test_idx)))
    }

    /// If the train side misses a label class that the test side has, swap
    /// in its first test occurrence for the first train row of the
    /// over-represented class.
    fn rebalance_labels(&self, train_idx: &mut [usize], test_idx: &mut [usize]) {
        for class in [0u8, 1u8] {
            if train_idx.iter().any(|&i| self.labels[i] == class) {
                continue;
            }
            let Some(tpos) = test_idx.iter().position(|&i| self.labels[i] == class) else {
                continue;
            };
            // All train labels are the other class here, so position 0 works,
            // but guard against single-class data.
            let Some(spos) = train_idx.iter().position(|&i| self.labels[i] != class) else {
                continue;
            };
            std::mem::swap(&mut train_idx[spos], &mut test_idx[tpos]);
        }
    }

    /// Standardize numeric (non-indicator) columns to zero mean and unit
    /// variance in place, returning the parameters used. Constant columns
    /// are shifted but not scaled.
    pub fn standardize(&mut self) -> Standardization {
        let n = self.len() as f64;
        let mut columns = Vec::new();
        for j in 0..self.features.cols() {
            if self.indicator_columns[j] {
                continue;
            }
            let mean = (0..self.len()).map(|i| self.features.get(i, j)).sum::<f64>() / n;
            let var = (0..self.len())
                .map(|i| {
                    let d = self.features.get(i, j) - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let std = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.len() {
                let v = self.features.get(i, j);
                self.features.set(i, j, (v - mean) / std);
            }
            columns.push(StandardizedColumn { index: j, mean, std });
        }
        Standardization { columns }
    }

    /// Replay previously recorded standardization parameters (e.g. from a
    /// model artifact) on this set.
    pub fn apply_standardization(&mut self, params: &Standardization) -> Result<()> {
        for col in &params.columns {
            if col.index >= self.features.cols() {
                return Err(Error::Argument(format!(
                    "standardization column {} out of range ({} features)",
                    col.index,
                    self.features.cols()
                )));
            }
            if col.std == 0.0 || !col.std.is_finite() || !col.mean.is_finite() {
                return Err(Error::Numeric(format!(
                    "bad standardization parameters for column {}",
                    col.index
                )));
            }
            for i in 0..self.len() {
                let v = self.features.get(i, col.index);
                self.features.set(i, col.index, (v - col.mean) / col.std);
            }
        }
        Ok(())
    }

    /// Raw protected value for row `i`.
    pub fn protected_value(&self, i: usize) -> &str {
        &self.attribute_values[self.protected[i]]
    }
}

/// Load a CSV file (UTF-8, comma separated, header row, RFC 4180 quoting)
/// into a [`TrainingSet`].
///
/// Categorical columns and the protected column are one-hot encoded in
/// place (one indicator column per distinct value, first-appearance order,
/// named `col=value`); numeric columns pass through; the label column is
/// parsed as 0/1 or, failing that, as exactly two distinct tokens mapped by
/// lexicographic order (lower → 0). Rows with missing cells are rejected.
pub fn load_csv(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<TrainingSet> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("cannot open {}: {}", path.as_ref().display(), e),
            )),
            _ => Error::Parse {
                row: 0,
                message: e.to_string(),
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::EmptyInput(format!("no header row: {}", e)))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(Error::EmptyInput("file has no columns".into()));
    }

    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column '{}'", name)))
    };
    let label_col = find(&schema.label_column)?;
    let protected_col = find(&schema.protected_column)?;
    for c in schema
        .categorical_columns
        .iter()
        .chain(schema.drop_columns.iter())
    {
        find(c)?;
    }

    let mut roles = vec![ColumnRole::Numeric; headers.len()];
    for (j, h) in headers.iter().enumerate() {
        if schema.categorical_columns.contains(h) {
            roles[j] = ColumnRole::Categorical;
        }
        if schema.drop_columns.contains(h) {
            roles[j] = ColumnRole::Dropped;
        }
    }
    roles[label_col] = ColumnRole::Label;
    roles[protected_col] = ColumnRole::Protected;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        records.push(rec.map_err(|e| Error::Parse {
            row: i + 1,
            message: e.to_string(),
        })?);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("file has a header but no data rows".into()));
    }
    let n = records.len();

    // Value order per encoded column: pinned by the schema when given,
    // first-appearance otherwise.
    let mut cat_values: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    let mut pinned = vec![false; headers.len()];
    for (j, role) in roles.iter().enumerate() {
        if matches!(role, ColumnRole::Categorical | ColumnRole::Protected) {
            if let Some((_, values)) = schema
                .category_values
                .iter()
                .find(|(col, _)| col == &headers[j])
            {
                cat_values[j] = values.clone();
                pinned[j] = true;
            }
        }
    }
    for (i, rec) in records.iter().enumerate() {
        for (j, role) in roles.iter().enumerate() {
            if matches!(role, ColumnRole::Categorical | ColumnRole::Protected) {
                let v = rec.get(j).unwrap_or("");
                if v.is_empty() {
                    return Err(Error::Parse {
                        row: i + 1,
                        message: format!("missing value in column '{}'", headers[j]),
                    });
                }
                if !cat_values[j].iter().any(|x| x == v) {
                    if pinned[j] {
                        return Err(Error::Parse {
                            row: i + 1,
                            message: format!(
                                "value '{}' in column '{}' is not among the pinned categories",
                                v, headers[j]
                            ),
                        });
                    }
                    cat_values[j].push(v.to_string());
                }
            }
        }
    }

    let labels = parse_labels(&records, label_col, &headers[label_col])?;

    // Feature layout: header order, categorical blocks expanded in place.
    let mut feature_names = Vec::new();
    let mut indicator_columns = Vec::new();
    let mut protected_block = None;
    // (source column, role, feature start)
    let mut layout: Vec<(usize, ColumnRole, usize)> = Vec::new();
    for (j, role) in roles.iter().enumerate() {
        match role {
            ColumnRole::Numeric => {
                layout.push((j, *role, feature_names.len()));
                feature_names.push(headers[j].clone());
                indicator_columns.push(false);
            }
            ColumnRole::Categorical | ColumnRole::Protected => {
                let start = feature_names.len();
                layout.push((j, *role, start));
                for v in &cat_values[j] {
                    feature_names.push(format!("{}={}", headers[j], v));
                    indicator_columns.push(true);
                }
                if *role == ColumnRole::Protected {
                    protected_block = Some((start, cat_values[j].len()));
                }
            }
            ColumnRole::Label | ColumnRole::Dropped => {}
        }
    }
    let d = feature_names.len();

    let mut features = Matrix::zeros(n, d);
    let mut protected = Vec::with_capacity(n);
    for (i, rec) in records.iter().enumerate() {
        for &(j, role, start) in &layout {
            let cell = rec.get(j).unwrap_or("");
            match role {
                ColumnRole::Numeric => {
                    if cell.is_empty() {
                        return Err(Error::Parse {
                            row: i + 1,
                            message: format!("missing value in column '{}'", headers[j]),
                        });
                    }
                    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                        row: i + 1,
                        message: format!("cannot parse '{}' in column '{}' as a number", cell, headers[j]),
                    })?;
                    features.set(i, start, v);
                }
                ColumnRole::Categorical | ColumnRole::Protected => {
                    let k = cat_values[j].iter().position(|v| v == cell).unwrap();
                    features.set(i, start + k, 1.0);
                    if role == ColumnRole::Protected {
                        protected.push(k);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let attribute_values = cat_values[protected_col].clone();
    let mut ts = TrainingSet::from_parts(features, protected, labels, feature_names, attribute_values)?;
    ts.protected_block = protected_block;
    ts.indicator_columns = indicator_columns;
    ts.categorical_values = roles
        .iter()
        .enumerate()
        .filter(|(_, role)| matches!(role, ColumnRole::Categorical | ColumnRole::Protected))
        .map(|(j, _)| (headers[j].clone(), cat_values[j].clone()))
        .collect();
    Ok(ts)
}

fn parse_labels(records: &[csv::StringRecord], col: usize, name: &str) -> Result<Vec<u8>> {
    let tokens: Vec<&str> = records.iter().map(|r| r.get(col).unwrap_or("")).collect();
    if let Some(pos) = tokens.iter().position(|t| t.is_empty()) {
        return Err(Error::Parse {
            row: pos + 1,
            message: format!("missing value in column '{}'", name),
        });
    }
    let as_binary: Option<Vec<u8>> = tokens
        .iter()
        .map(|t| match t.trim().parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        })
        .collect();
    if let Some(labels) = as_binary {
        return Ok(labels);
    }
    let mut distinct: Vec<&str> = Vec::new();
    for t in &tokens {
        if !distinct.contains(t) {
            distinct.push(t);
        }
    }
    if distinct.len() != 2 {
        return Err(Error::Schema(format!(
            "label column '{}' must contain 0/1 values or exactly two distinct tokens, found {}",
            name,
            distinct.len()
        )));
    }
    distinct.sort_unstable();
    Ok(tokens
        .iter()
        .map(|t| if *t == distinct[0] { 0 } else { 1 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn four_row_schema() -> DatasetSchema {
        DatasetSchema::new("y", "sex").with_categorical(["sex"])
    }

    #[test]
    fn one_hot_layout_and_dimensions() {
        let f = write_temp("x,sex,y\n0.5,F,0\n1.5,M,1\n2.5,F,0\n3.5,M,1\n");
        let ts = load_csv(f.path(), &four_row_schema()).unwrap();
        assert_eq!(ts.len(), 4);
        // d = 1 numeric + |A| indicators
        assert_eq!(ts.features.cols(), 1 + 2);
        assert_eq!(ts.feature_names, vec!["x", "sex=F", "sex=M"]);
        assert_eq!(ts.attribute_values, vec!["F", "M"]);
        assert_eq!(ts.protected, vec![0, 1, 0, 1]);
        assert_eq!(ts.labels, vec![0, 1, 0, 1]);
        assert_eq!(ts.protected_block, Some((1, 2)));
        // Exactly one indicator set per row.
        for i in 0..4 {
            let ones = ts.features.get(i, 1) + ts.features.get(i, 2);
            assert_eq!(ones, 1.0);
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let f = write_temp("x,sex\n1,F\n");
        let err = load_csv(f.path(), &four_row_schema()).unwrap_err();
        match err {
            Error::Schema(msg) => assert!(msg.contains("'y'"), "{}", msg),
            other => panic!("expected schema error, got {:?}", other),
        }
    }

    #[test]
    fn unparseable_numeric_cell_reports_row() {
        let f = write_temp("x,sex,y\n1.0,F,0\noops,M,1\n");
        let err = load_csv(f.path(), &four_row_schema()).unwrap_err();
        match err {
            Error::Parse { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn empty_data_is_empty_input_error() {
        let f = write_temp("x,sex,y\n");
        assert!(matches!(
            load_csv(f.path(), &four_row_schema()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn missing_cell_rejected() {
        let f = write_temp("x,sex,y\n1.0,,0\n2.0,M,1\n");
        assert!(matches!(
            load_csv(f.path(), &four_row_schema()),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn pinned_categories_override_first_appearance() {
        let f = write_temp("x,sex,y\n0.5,M,0\n1.5,F,1\n");
        let schema = four_row_schema()
            .with_category_values(vec![("sex".into(), vec!["F".into(), "M".into()])]);
        let ts = load_csv(f.path(), &schema).unwrap();
        // layout follows the pinned order even though M appears first
        assert_eq!(ts.feature_names, vec!["x", "sex=F", "sex=M"]);
        assert_eq!(ts.attribute_values, vec!["F", "M"]);
        assert_eq!(ts.protected, vec![1, 0]);
        // unseen values are rejected
        let g = write_temp("x,sex,y\n0.5,X,0\n1.5,F,1\n");
        assert!(matches!(
            load_csv(g.path(), &schema),
            Err(Error::Parse { row: 1, .. })
        ));
        // values are recorded for later pinning
        assert_eq!(
            ts.categorical_values,
            vec![("sex".to_string(), vec!["F".to_string(), "M".to_string()])]
        );
    }

    #[test]
    fn text_labels_map_by_sorted_order() {
        let f = write_temp("x,sex,y\n1,F,yes\n2,M,no\n3,F,no\n");
        let ts = load_csv(f.path(), &four_row_schema()).unwrap();
        // "no" < "yes" lexicographically, so no → 0, yes → 1.
        assert_eq!(ts.labels, vec![1, 0, 0]);
    }

    #[test]
    fn schema_rejects_label_equal_protected() {
        let s = DatasetSchema::new("a", "a");
        assert!(matches!(s.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let ts = TrainingSet::from_parts(
            Matrix::from_rows(&rows).unwrap(),
            (0..100).map(|i| i % 2).collect(),
            (0..100).map(|i| (i % 3 == 0) as u8).collect(),
            vec!["x".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let (tr, te) = ts.split(0.75, 1).unwrap();
        assert_eq!(tr.len(), 75);
        assert_eq!(te.len(), 25);
        let (tr2, te2) = ts.split(0.75, 1).unwrap();
        assert_eq!(tr.features, tr2.features);
        assert_eq!(te.features, te2.features);
        // partition: every original row appears exactly once
        let mut seen: Vec<f64> = Vec::new();
        for i in 0..tr.len() {
            seen.push(tr.features.get(i, 0));
        }
        for i in 0..te.len() {
            seen.push(te.features.get(i, 0));
        }
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ts = TrainingSet::from_parts(
            Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
            vec![0, 0],
            vec![0, 1],
            vec!["x".into()],
            vec!["a".into()],
        )
        .unwrap();
        assert!(matches!(ts.split(1.5, 0), Err(Error::Argument(_))));
        assert!(matches!(ts.split(0.0, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn split_puts_each_label_in_train_when_possible() {
        // 10 rows, single 1-label; every seed must land it in train.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let mut labels = vec![0u8; 10];
        labels[3] = 1;
        let ts = TrainingSet::from_parts(
            Matrix::from_rows(&rows).unwrap(),
            vec![0; 10],
            labels,
            vec!["x".into()],
            vec!["a".into()],
        )
        .unwrap();
        for seed in 0..30 {
            let (tr, _) = ts.split(0.5, seed).unwrap();
            assert!(tr.labels.contains(&1), "seed {}", seed);
        }
    }

    #[test]
    fn standardize_records_and_applies() {
        let f = write_temp("x,sex,y\n1,F,0\n2,M,1\n3,F,0\n4,M,1\n");
        let mut ts = load_csv(f.path(), &four_row_schema()).unwrap();
        let params = ts.standardize();
        assert_eq!(params.columns.len(), 1); // indicators untouched
        assert_eq!(params.columns[0].index, 0);
        let mean: f64 = (0..4).map(|i| ts.features.get(i, 0)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        // indicators still 0/1
        assert_eq!(ts.features.get(0, 1), 1.0);

        let mut raw = load_csv(f.path(), &four_row_schema()).unwrap();
        raw.apply_standardization(&params).unwrap();
        assert_eq!(raw.features, ts.features);
    }
}
