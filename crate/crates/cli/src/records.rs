//! Run records and their CSV/JSONL emission.

use std::path::Path;

use evenodds::error::{Error, Result};
use evenodds::report::{self, fmt_f64};
use serde::Serialize;

/// One solver run's resolved parameters and outcomes. The wall clock is
/// printed to stdout but kept out of report files so identical commands
/// produce byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub command: String,
    pub constraint: String,
    pub eps: String,
    pub learner: String,
    pub budget: f64,
    pub nu: f64,
    pub eta: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub final_nu: f64,
    pub train_error: f64,
    pub train_violation: f64,
    pub test_error: f64,
    pub test_violation: f64,
    pub model_path: String,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

pub const RUN_CSV_HEADER: [&str; 18] = [
    "run_id",
    "command",
    "constraint",
    "eps",
    "learner",
    "B",
    "nu",
    "eta",
    "max_iter",
    "seed",
    "iterations",
    "converged",
    "final_nu",
    "train_error",
    "train_violation",
    "test_error",
    "test_violation",
    "model_path",
];

impl RunRecord {
    fn csv_row(&self) -> Vec<String> {
        vec![
            self.run_id.clone(),
            self.command.clone(),
            self.constraint.clone(),
            self.eps.clone(),
            self.learner.clone(),
            fmt_f64(self.budget),
            fmt_f64(self.nu),
            fmt_f64(self.eta),
            self.max_iter.to_string(),
            self.seed.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            fmt_f64(self.final_nu),
            fmt_f64(self.train_error),
            fmt_f64(self.train_violation),
            fmt_f64(self.test_error),
            fmt_f64(self.test_violation),
            self.model_path.clone(),
        ]
    }

    /// One-line human summary for stdout.
    pub fn summary(&self) -> String {
        format!(
            "{}: eps={} train err={:.4} viol={:.4} | test err={:.4} viol={:.4} | {} in {} iters (nu_t={:.5}) [{:.2}s]",
            self.run_id,
            self.eps,
            self.train_error,
            self.train_violation,
            self.test_error,
            self.test_violation,
            if self.converged { "converged" } else { "capped" },
            self.iterations,
            self.final_nu,
            self.wall_clock_s,
        )
    }
}

/// Write the run table and its JSON-lines mirror.
pub fn write_records(dir: &Path, records: &[RunRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records.iter().map(RunRecord::csv_row).collect();
    report::write_csv(dir.join("runs.csv"), &RUN_CSV_HEADER, &rows)?;
    let mut jsonl = String::new();
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Artifact(format!("serialize run record: {}", e)))?;
        jsonl.push_str(&line);
        jsonl.push('\n');
    }
    std::fs::write(dir.join("runs.jsonl"), jsonl)?;
    Ok(())
}
