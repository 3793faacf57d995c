//! Fair binary classification by reduction to weighted classification.
//!
//! `evenodds` learns randomized binary classifiers that minimize empirical
//! classification error subject to linear fairness constraints such as
//! demographic parity or equalized odds. The constrained problem is posed as
//! a saddle point of a Lagrangian and solved by playing an exponentiated
//! gradient algorithm for the dual variables against a best-response oracle
//! for the classifier, where each best response is a single call to a
//! cost-sensitive (equivalently weighted) classification learner.
//!
//! The crate is organized along the pipeline:
//!
//! * [`data`] — CSV ingestion, one-hot encoding, train/test splitting.
//! * [`moments`] — conditional-moment constraint systems (`M μ ≤ c + ε`),
//!   with builders for demographic parity and equalized odds.
//! * [`learners`] — the weighted-classification oracle contract and three
//!   built-in learners (logistic, boosted stumps, exhaustive 1-d threshold).
//! * [`reduction`] — per-example costs from dual variables, both
//!   best-response oracles, and Lagrangian evaluation.
//! * [`expgrad`] — the exponentiated-gradient saddle-point driver.
//! * [`gridsearch`] — deterministic-classifier alternative for binary
//!   protected attributes: sweep collapsed cost adjustments over a grid.
//! * [`evaluate`] — randomized-classifier semantics, error and disparity
//!   metrics, model artifacts.
//! * [`report`] — plot-ready CSV emission and dataset write-back.
//! * [`synth`] — deterministic synthetic data generators used by the test
//!   suite, the book, and the bundled demos.
//!
//! The companion book under `book/` walks through the method chapter by
//! chapter; its code snippets compile and run as doc-tests of this crate.

pub mod data;
pub mod error;
pub mod evaluate;
pub mod expgrad;
pub mod gridsearch;
pub mod learners;
pub mod moments;
pub mod reduction;
pub mod report;
pub mod synth;

pub use data::{load_csv, DatasetSchema, Matrix, Standardization, TrainingSet};
pub use error::{Error, Result};
pub use evaluate::{dp_violation, eo_violation, error_of, ModelArtifact, RandomizedClassifier};
pub use expgrad::{solve, SaddleResult, SolverConfig};
pub use learners::{cost_to_weighted, fit, BaseClassifier, LearnerConfig, WeightedSample};
pub use moments::{ConstraintKind, ConstraintSystem, GammaVector, MomentVector};
pub use reduction::{best_h, best_lambda, compute_costs, lagrangian, CostPairSet, LambdaVector};

// Keep the book honest: every fenced Rust block in the guide compiles and
// runs under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/grid-search.md")]
    mod grid_search {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
