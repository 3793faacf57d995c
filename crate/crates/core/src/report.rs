//! Plot-ready CSV emission and dataset write-back.
//!
//! All numbers are written with Rust's shortest round-trip formatting, so
//! identical inputs produce byte-identical files and every value reloads
//! exactly.

use std::path::Path;

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::expgrad::GapRecord;
use crate::gridsearch::GridPointResult;

/// Render a float with full round-trip precision.
pub fn fmt_f64(v: f64) -> String {
    format!("{}", v)
}

/// Write a headered CSV with RFC 4180 quoting.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writer
        .write_record(header)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Argument(format!(
                "csv row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        writer
            .write_record(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a training set back to CSV so it reloads identically: feature
/// columns with the protected one-hot block replaced by the raw protected
/// column, then the label column. Reload with the same label/protected
/// names and no categorical columns.
pub fn write_training_set(
    ts: &TrainingSet,
    path: impl AsRef<Path>,
    protected_name: &str,
    label_name: &str,
) -> Result<()> {
    let (block_start, block_len) = ts
        .protected_block
        .unwrap_or((ts.features.cols(), 0));
    let mut header: Vec<String> = Vec::new();
    for (j, name) in ts.feature_names.iter().enumerate() {
        if j == block_start {
            header.push(protected_name.to_string());
        }
        if j < block_start || j >= block_start + block_len {
            header.push(name.clone());
        }
    }
    if block_start >= ts.features.cols() && block_len == 0 {
        header.push(protected_name.to_string());
    }
    header.push(label_name.to_string());

    let mut rows = Vec::with_capacity(ts.len());
    for i in 0..ts.len() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for j in 0..ts.features.cols() {
            if j == block_start {
                row.push(ts.protected_value(i).to_string());
            }
            if j < block_start || j >= block_start + block_len {
                row.push(fmt_f64(ts.features.get(i, j)));
            }
        }
        if block_start >= ts.features.cols() && block_len == 0 {
            row.push(ts.protected_value(i).to_string());
        }
        row.push(ts.labels[i].to_string());
        rows.push(row);
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &header_refs, &rows)
}

/// Export a solver trace: `t, nu_t, L, L_upper, L_lower, max_violation`.
pub fn write_gap_trace(path: impl AsRef<Path>, history: &[GapRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = history
        .iter()
        .map(|g| {
            vec![
                g.t.to_string(),
                fmt_f64(g.nu_t),
                fmt_f64(g.lagrangian),
                fmt_f64(g.upper),
                fmt_f64(g.lower),
                fmt_f64(g.max_violation),
            ]
        })
        .collect();
    write_csv(
        path,
        &["t", "nu_t", "L", "L_upper", "L_lower", "max_violation"],
        &rows,
    )
}

/// Export grid results, one row per point in enumeration order.
pub fn write_grid_results(
    path: impl AsRef<Path>,
    dim_labels: &[String],
    results: &[GridPointResult],
) -> Result<()> {
    let mut header: Vec<&str> = dim_labels.iter().map(String::as_str).collect();
    header.extend([
        "train_error",
        "train_violation",
        "test_error",
        "test_violation",
    ]);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.adjustments.iter().map(|&a| fmt_f64(a)).collect();
            row.push(fmt_f64(r.train_error));
            row.push(fmt_f64(r.train_violation));
            row.push(r.test_error.map(fmt_f64).unwrap_or_default());
            row.push(r.test_violation.map(fmt_f64).unwrap_or_default());
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Export an `(error, violation)` frontier with a pointer back to the run
/// that produced each point.
pub fn write_frontier(
    path: impl AsRef<Path>,
    points: &[(String, f64, f64)],
) -> Result<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|(id, err, viol)| vec![id.clone(), fmt_f64(*viol), fmt_f64(*err)])
        .collect();
    write_csv(path, &["run_id", "violation", "error"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_csv, DatasetSchema};
    use crate::synth;

    #[test]
    fn training_set_round_trips_through_writer() {
        let dir = tempfile::tempdir().unwrap();
        let raw = dir.path().join("raw.csv");
        std::fs::write(&raw, synth::adult_mimic_csv(80, 11)).unwrap();
        let schema = DatasetSchema::new("income", "grp").with_categorical(["grp"]);
        let mut ts = load_csv(&raw, &schema).unwrap();
        ts.standardize();

        let out = dir.path().join("written.csv");
        write_training_set(&ts, &out, "grp", "income").unwrap();
        let back = load_csv(&out, &DatasetSchema::new("income", "grp")).unwrap();

        assert_eq!(back.features, ts.features);
        assert_eq!(back.protected, ts.protected);
        assert_eq!(back.labels, ts.labels);
        assert_eq!(back.feature_names, ts.feature_names);
        assert_eq!(back.attribute_values, ts.attribute_values);
        // writing the reloaded set again is byte-identical
        let out2 = dir.path().join("written2.csv");
        write_training_set(&back, &out2, "grp", "income").unwrap();
        assert_eq!(
            std::fs::read(&out).unwrap(),
            std::fs::read(&out2).unwrap()
        );
    }

    #[test]
    fn csv_helper_checks_width() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let err = write_csv(&path, &["a", "b"], &[vec!["1".into()]]);
        assert!(err.is_err());
    }
}
