//! Shared plumbing: ingest, split, standardize, build constraints, resolve
//! solver settings.

use std::path::Path;

use evenodds::data::{load_csv, DatasetSchema, Standardization, TrainingSet};
use evenodds::error::{Error, Result};
use evenodds::expgrad::{self, SolverConfig};
use evenodds::learners::LearnerConfig;
use evenodds::moments::ConstraintSystem;
use evenodds::report;

use crate::args::{DataArgs, SolverArgs};

pub struct PreparedData {
    pub schema: DatasetSchema,
    pub train: TrainingSet,
    pub test: TrainingSet,
    pub standardization: Option<Standardization>,
}

/// Load, split, and (optionally) standardize; write both halves into the
/// output directory so every reported metric can be re-derived later.
pub fn prepare(args: &DataArgs, out: Option<&Path>) -> Result<PreparedData> {
    let schema = DatasetSchema::new(&args.label, &args.protected)
        .with_categorical(args.categorical.clone())
        .with_drop(args.drop.clone());
    let full = load_csv(&args.data, &schema)?;
    if args.test_frac.is_nan() || args.test_frac <= 0.0 || args.test_frac >= 1.0 {
        return Err(Error::Argument(format!(
            "--test-frac must lie in (0,1), got {}",
            args.test_frac
        )));
    }
    let (mut train, mut test) = full.split(1.0 - args.test_frac, args.seed)?;
    let standardization = if args.no_standardize {
        None
    } else {
        let params = train.standardize();
        test.apply_standardization(&params)?;
        Some(params)
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        report::write_training_set(&train, dir.join("train.csv"), &args.protected, &args.label)?;
        report::write_training_set(&test, dir.join("test.csv"), &args.protected, &args.label)?;
    }
    Ok(PreparedData {
        schema,
        train,
        test,
        standardization,
    })
}

/// How the slack vector was chosen; echoed into reports.
#[derive(Debug, Clone)]
pub enum EpsChoice {
    Uniform(f64),
    /// Count-scaled defaults `ε_k = C'·Σ_j |M_kj|·n_j^(−α)`.
    Auto { c_prime: f64, alpha: f64 },
}

impl EpsChoice {
    pub fn label(&self) -> String {
        match self {
            EpsChoice::Uniform(e) => report::fmt_f64(*e),
            EpsChoice::Auto { c_prime, alpha } => format!("auto[c'={},alpha={}]", c_prime, alpha),
        }
    }
}

pub const DEFAULT_C_PRIME: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Build the requested constraint system over the training rows and apply
/// the slack choice.
pub fn build_constraints(
    kind: &str,
    train: &TrainingSet,
    eps: &EpsChoice,
) -> Result<ConstraintSystem> {
    let mut cs = match kind {
        "dp" => ConstraintSystem::demographic_parity(train)?,
        "eo" => ConstraintSystem::equalized_odds(train)?,
        other => match other.strip_prefix("file:") {
            Some(path) => ConstraintSystem::from_file(path, train)?,
            None => {
                return Err(Error::Argument(format!(
                    "unknown constraint '{}' (expected dp, eo, or file:PATH)",
                    other
                )))
            }
        },
    };
    match eps {
        EpsChoice::Uniform(e) => {
            if e.is_nan() || *e < 0.0 {
                return Err(Error::Argument(format!(
                    "--eps must be nonnegative, got {}",
                    e
                )));
            }
            cs.set_uniform_epsilon(*e)?;
        }
        EpsChoice::Auto { c_prime, alpha } => {
            let defaults = cs.default_epsilon(*c_prime, *alpha);
            cs.set_epsilon(defaults)?;
        }
    }
    for warning in cs.warnings() {
        eprintln!("warning: {}", warning);
    }
    Ok(cs)
}

/// Resolve solver settings: scaling defaults, then explicit overrides.
/// `η` re-derives from the resolved `ν` and `B` unless given, and the
/// iteration cap re-derives from all three.
pub fn resolve_config(
    args: &SolverArgs,
    train: &TrainingSet,
    cs: &ConstraintSystem,
    seed: u64,
) -> Result<SolverConfig> {
    let learner = LearnerConfig::parse(&args.learner)?;
    let mut config = expgrad::default_config(train, cs, learner);
    config.seed = seed;
    if let Some(b) = args.budget {
        config.budget = b;
    }
    if let Some(nu) = args.nu {
        config.nu = nu;
    }
    let rho = cs.rho_bound();
    config.eta = match args.eta {
        Some(eta) => eta,
        None => config.nu / (2.0 * rho * rho * config.budget),
    };
    config.max_iter = match args.max_iter {
        Some(m) => m,
        None => expgrad::iteration_cap(rho, config.budget, cs.num_constraints(), config.nu)
            .clamp(1, 5000) as usize,
    };
    Ok(config)
}

/// Canonical parameter echo recorded with every run.
#[allow(clippy::too_many_arguments)]
pub fn command_echo(
    command: &str,
    data: &DataArgs,
    constraint: &str,
    eps: &EpsChoice,
    config: &SolverConfig,
    out: &Path,
) -> String {
    format!(
        "{} --data {} --label {} --protected {} --categorical {} --drop {} \
         --test-frac {} --seed {} --standardize {} --constraint {} --eps {} \
         --B {} --nu {} --eta {} --max-iter {} --learner {} --out {}",
        command,
        data.data.display(),
        data.label,
        data.protected,
        if data.categorical.is_empty() {
            "-".to_string()
        } else {
            data.categorical.join(",")
        },
        if data.drop.is_empty() {
            "-".to_string()
        } else {
            data.drop.join(",")
        },
        report::fmt_f64(data.test_frac),
        data.seed,
        !data.no_standardize,
        constraint,
        eps.label(),
        report::fmt_f64(config.budget),
        report::fmt_f64(config.nu),
        report::fmt_f64(config.eta),
        config.max_iter,
        config.learner.name(),
        out.display(),
    )
}
