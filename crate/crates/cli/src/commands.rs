//! Implementations of the four subcommands.

use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use evenodds::data::{load_csv, DatasetSchema, TrainingSet};
use evenodds::error::{Error, Result};
use evenodds::evaluate::{dp_violation, eo_violation, error_of, ModelArtifact};
use evenodds::expgrad::{solve, SolverConfig};
use evenodds::gridsearch::{self, GridSpec};
use evenodds::learners::LearnerConfig;
use evenodds::report::{self, fmt_f64};

use crate::args::{EvalArgs, GridArgs, SweepArgs, TrainArgs};
use crate::pipeline::{self, EpsChoice, PreparedData};
use crate::records::{write_records, RunRecord};

/// Disparity metric matched to the constraint kind; file-based systems
/// report the demographic-parity metric.
fn kind_violation(constraint: &str, preds: &[f64], ts: &TrainingSet) -> Result<f64> {
    match constraint {
        "eo" => eo_violation(preds, &ts.protected, &ts.labels),
        _ => Ok(dp_violation(preds, &ts.protected)),
    }
}

struct SingleRun<'a> {
    prep: &'a PreparedData,
    constraint: &'a str,
    eps: EpsChoice,
    config: SolverConfig,
    command: String,
    run_id: String,
}

/// Solve once, write the model artifact and gap trace, return the record.
fn run_single(args: &SingleRun<'_>, out: &Path) -> Result<RunRecord> {
    let cs = pipeline::build_constraints(args.constraint, &args.prep.train, &args.eps)?;
    let started = Instant::now();
    let result = solve(&args.prep.train, &cs, &args.config)?;
    let wall_clock_s = started.elapsed().as_secs_f64();

    let train_preds = result.ensemble.predict_expected(&args.prep.train.features)?;
    let test_preds = result.ensemble.predict_expected(&args.prep.test.features)?;
    let train_error = error_of(&train_preds, &args.prep.train.labels);
    let test_error = error_of(&test_preds, &args.prep.test.labels);
    let train_violation = kind_violation(args.constraint, &train_preds, &args.prep.train)?;
    let test_violation = kind_violation(args.constraint, &test_preds, &args.prep.test)?;

    let model_path = format!("model_{}.json", args.run_id);
    let artifact = ModelArtifact::new(
        args.config.learner.name(),
        args.prep.train.feature_names.clone(),
        args.prep.standardization.clone(),
        Some(artifact_schema(args.prep)),
        &result.ensemble,
    );
    artifact.save(out.join(&model_path))?;
    report::write_gap_trace(out.join(format!("trace_{}.csv", args.run_id)), &result.gap_history)?;

    Ok(RunRecord {
        run_id: args.run_id.clone(),
        command: args.command.clone(),
        constraint: args.constraint.to_string(),
        eps: args.eps.label(),
        learner: args.config.learner.name().to_string(),
        budget: args.config.budget,
        nu: args.config.nu,
        eta: args.config.eta,
        max_iter: args.config.max_iter,
        seed: args.config.seed,
        iterations: result.iterations,
        converged: result.converged,
        final_nu: result.final_nu(),
        train_error,
        train_violation,
        test_error,
        test_violation,
        model_path,
        wall_clock_s,
    })
}

/// The training schema with category orders pinned to what was observed,
/// so evaluation re-encodes new files identically.
fn artifact_schema(prep: &PreparedData) -> DatasetSchema {
    prep.schema
        .clone()
        .with_category_values(prep.train.categorical_values.clone())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let prep = pipeline::prepare(&args.data, Some(&args.out))?;
    let eps = match args.eps {
        Some(e) => EpsChoice::Uniform(e),
        None => EpsChoice::Auto {
            c_prime: pipeline::DEFAULT_C_PRIME,
            alpha: pipeline::DEFAULT_ALPHA,
        },
    };
    let cs = pipeline::build_constraints(&args.solver.constraint, &prep.train, &eps)?;
    let config = pipeline::resolve_config(&args.solver, &prep.train, &cs, args.data.seed)?;
    let command = pipeline::command_echo(
        "train",
        &args.data,
        &args.solver.constraint,
        &eps,
        &config,
        &args.out,
    );
    let record = run_single(
        &SingleRun {
            prep: &prep,
            constraint: &args.solver.constraint,
            eps,
            config,
            command,
            run_id: "train-000".into(),
        },
        &args.out,
    )?;
    println!("{}", record.summary());
    write_records(&args.out, std::slice::from_ref(&record))?;
    Ok(())
}

/// Default sweep grid: 10 log-spaced slacks in [0.001, 0.1].
fn default_eps_grid() -> Vec<f64> {
    let (lo, hi, points) = (0.001f64, 0.1f64, 10usize);
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    (0..points).map(|i| lo * ratio.powi(i as i32)).collect()
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let eps_values = match &args.eps {
        Some(v) if !v.is_empty() => v.clone(),
        _ => default_eps_grid(),
    };
    let jobs = args.jobs.max(1);
    let prep = pipeline::prepare(&args.data, Some(&args.out))?;

    // Resolve per-ε runs up front so outputs are ordered and deterministic
    // regardless of scheduling.
    let mut planned = Vec::new();
    for (i, &e) in eps_values.iter().enumerate() {
        let eps = EpsChoice::Uniform(e);
        let cs = pipeline::build_constraints(&args.solver.constraint, &prep.train, &eps)?;
        let config = pipeline::resolve_config(&args.solver, &prep.train, &cs, args.data.seed)?;
        let command = pipeline::command_echo(
            "sweep",
            &args.data,
            &args.solver.constraint,
            &eps,
            &config,
            &args.out,
        );
        planned.push(SingleRun {
            prep: &prep,
            constraint: &args.solver.constraint,
            eps,
            config,
            command,
            run_id: format!("sweep-{:03}", i),
        });
    }

    let outcomes: Mutex<Vec<Option<std::result::Result<RunRecord, String>>>> =
        Mutex::new((0..planned.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for worker in 0..jobs.min(planned.len()) {
            let planned = &planned;
            let outcomes = &outcomes;
            let out = args.out.as_path();
            scope.spawn(move || {
                for (i, run) in planned.iter().enumerate() {
                    if i % jobs != worker {
                        continue;
                    }
                    let result = run_single(run, out).map_err(|e| e.to_string());
                    outcomes.lock().unwrap()[i] = Some(result);
                }
            });
        }
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_inner().unwrap().into_iter().enumerate() {
        match outcome.expect("every planned run is executed") {
            Ok(record) => {
                println!("{}", record.summary());
                records.push(record);
            }
            Err(message) => {
                let line = format!("sweep-{:03} (eps={}): {}", i, fmt_f64(eps_values[i]), message);
                eprintln!("error: {}", line);
                failures.push(line);
            }
        }
    }
    if !failures.is_empty() {
        std::fs::write(args.out.join("errors.txt"), failures.join("\n") + "\n")?;
    }
    if records.is_empty() {
        return Err(Error::Numeric("every sweep run failed".into()));
    }
    write_records(&args.out, &records)?;
    write_run_frontiers(&args.out, &records)?;
    Ok(())
}

fn write_run_frontiers(out: &Path, records: &[RunRecord]) -> Result<()> {
    let train_pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.train_error, r.train_violation))
        .collect();
    let frontier: Vec<(String, f64, f64)> = gridsearch::pareto_indices(&train_pts)
        .into_iter()
        .map(|i| (records[i].run_id.clone(), records[i].train_error, records[i].train_violation))
        .collect();
    report::write_frontier(out.join("frontier_train.csv"), &frontier)?;

    let test_pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.test_error, r.test_violation))
        .collect();
    let frontier: Vec<(String, f64, f64)> = gridsearch::pareto_indices(&test_pts)
        .into_iter()
        .map(|i| (records[i].run_id.clone(), records[i].test_error, records[i].test_violation))
        .collect();
    report::write_frontier(out.join("frontier_test.csv"), &frontier)?;
    Ok(())
}

pub fn grid(args: &GridArgs) -> Result<()> {
    if args.constraint != "dp" && args.constraint != "eo" {
        return Err(Error::NotApplicable(format!(
            "grid search supports the built-in dp/eo constraints, got '{}'",
            args.constraint
        )));
    }
    std::fs::create_dir_all(&args.out)?;
    let prep = pipeline::prepare(&args.data, Some(&args.out))?;
    // grids measure raw disparity; the slack stays zero
    let eps = EpsChoice::Uniform(0.0);
    let cs = pipeline::build_constraints(&args.constraint, &prep.train, &eps)?;
    let learner = LearnerConfig::parse(&args.learner)?;

    let range = match (args.grid_lo, args.grid_hi) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(-4.0), hi.unwrap_or(4.0))),
    };
    let spec = GridSpec::for_constraint(cs.kind(), &prep.train, range, args.grid_points)?;
    let mut results = gridsearch::grid_search(&prep.train, &cs, &spec, &learner)?;
    for point in &mut results {
        let preds: Vec<f64> = point
            .classifier
            .predict(&prep.test.features)?
            .into_iter()
            .map(f64::from)
            .collect();
        point.test_error = Some(error_of(&preds, &prep.test.labels));
        point.test_violation = Some(kind_violation(&args.constraint, &preds, &prep.test)?);
    }

    let labels: Vec<String> = spec.dims.iter().map(|d| d.label.clone()).collect();
    report::write_grid_results(args.out.join("grid.csv"), &labels, &results)?;
    let frontier = gridsearch::select_pareto(&results);
    let frontier_rows: Vec<(String, f64, f64)> = frontier
        .iter()
        .map(|p| {
            let id = p
                .adjustments
                .iter()
                .map(|&a| fmt_f64(a))
                .collect::<Vec<_>>()
                .join("/");
            (id, p.train_error, p.train_violation)
        })
        .collect();
    report::write_frontier(args.out.join("grid_frontier.csv"), &frontier_rows)?;
    println!(
        "grid: {} points, {} on the training frontier (best violation {})",
        results.len(),
        frontier.len(),
        frontier
            .first()
            .map(|p| fmt_f64(p.train_violation))
            .unwrap_or_default()
    );
    Ok(())
}

pub fn evaluate(args: &EvalArgs) -> Result<()> {
    let artifact = ModelArtifact::load(&args.model)?;
    let schema = artifact.schema.clone().ok_or_else(|| {
        Error::Artifact("model artifact carries no dataset schema".into())
    })?;
    let ts = load_for_artifact(&args.data, &artifact, &schema)?;

    // feature compatibility, reported by the first mismatch
    if ts.feature_names.len() != artifact.feature_names.len() {
        return Err(Error::Artifact(format!(
            "data encodes to {} features, model expects {}",
            ts.feature_names.len(),
            artifact.feature_names.len()
        )));
    }
    for (got, want) in ts.feature_names.iter().zip(&artifact.feature_names) {
        if got != want {
            return Err(Error::Artifact(format!(
                "feature mismatch: data has '{}' where model expects '{}'",
                got, want
            )));
        }
    }

    let ensemble = artifact.classifier()?;
    let preds = ensemble.predict_expected(&ts.features)?;
    let error = error_of(&preds, &ts.labels);
    let dp = dp_violation(&preds, &ts.protected);
    let eo = eo_violation(&preds, &ts.protected, &ts.labels)?;
    println!(
        "error={} dp_violation={} eo_violation={}",
        fmt_f64(error),
        fmt_f64(dp),
        fmt_f64(eo)
    );
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        report::write_csv(
            out.join("metrics.csv"),
            &["error", "dp_violation", "eo_violation"],
            &[vec![fmt_f64(error), fmt_f64(dp), fmt_f64(eo)]],
        )?;
    }
    Ok(())
}

/// Load an evaluation file. Files written by train/sweep are already
/// encoded and standardized (detected by their header); anything else is
/// treated as a raw file matching the artifact's schema.
fn load_for_artifact(
    path: &Path,
    artifact: &ModelArtifact,
    schema: &DatasetSchema,
) -> Result<TrainingSet> {
    let header = csv_header(path)?;
    if let Some(expected) = encoded_header(artifact, schema) {
        if header == expected {
            let pinned = schema
                .category_values
                .iter()
                .filter(|(col, _)| col == &schema.protected_column)
                .cloned()
                .collect();
            let enc_schema = DatasetSchema::new(&schema.label_column, &schema.protected_column)
                .with_category_values(pinned);
            return load_csv(path, &enc_schema);
        }
    }
    let mut ts = load_csv(path, schema)?;
    if let Some(params) = &artifact.standardization {
        ts.apply_standardization(params)?;
    }
    Ok(ts)
}

fn csv_header(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Artifact(format!("cannot open {}: {}", path.display(), e)))?;
    Ok(reader
        .headers()
        .map_err(|e| Error::EmptyInput(format!("no header row: {}", e)))?
        .iter()
        .map(str::to_string)
        .collect())
}

/// The header an encoded split file would carry for this artifact: the
/// protected one-hot block collapses back to the raw column, label last.
fn encoded_header(artifact: &ModelArtifact, schema: &DatasetSchema) -> Option<Vec<String>> {
    let values = schema
        .category_values
        .iter()
        .find(|(col, _)| col == &schema.protected_column)
        .map(|(_, v)| v.clone())?;
    let block: Vec<String> = values
        .iter()
        .map(|v| format!("{}={}", schema.protected_column, v))
        .collect();
    let start = artifact
        .feature_names
        .windows(block.len().max(1))
        .position(|w| w == block.as_slice())?;
    let mut header = Vec::new();
    for (j, name) in artifact.feature_names.iter().enumerate() {
        if j == start {
            header.push(schema.protected_column.clone());
        }
        if j < start || j >= start + block.len() {
            header.push(name.clone());
        }
    }
    header.push(schema.label_column.clone());
    Some(header)
}
