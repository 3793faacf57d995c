//! Exponentiated-gradient saddle-point solver.
//!
//! The dual player runs exponentiated gradient over the budgeted simplex
//! (log-domain parameters `θ`, one spare coordinate of mass held back so
//! `‖λ‖₁ < B`), the classifier player best-responds through the
//! cost-sensitive reduction, and both plays are averaged uniformly. The
//! loop terminates once the averaged pair's suboptimality `ν_t` — measured
//! against each player's exact best response — falls below the target, or
//! at the iteration cap.
//!
//! Every iteration checks the regret envelope
//! `ν_t ≤ B·ln(|K|+1)/(η·t) + η·ρ̄²·B` (with `ρ̄` the system's violation
//! bound); a breach indicates a broken invariant and aborts the run.

use serde::{Deserialize, Serialize};

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::evaluate::{error_of, RandomizedClassifier};
use crate::learners::LearnerConfig;
use crate::moments::ConstraintSystem;
use crate::reduction::{self, LambdaVector};

/// Log-domain dual parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector(pub Vec<f64>);

impl ThetaVector {
    pub fn zeros(len: usize) -> Self {
        ThetaVector(vec![0.0; len])
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// ℓ₁ budget `B` for the dual variables.
    pub budget: f64,
    /// Target suboptimality `ν`.
    pub nu: f64,
    /// Learning rate `η` for the dual player.
    pub eta: f64,
    pub max_iter: usize,
    /// Recorded for reproducibility; the built-in learners are
    /// deterministic and do not consume it.
    pub seed: u64,
    pub learner: LearnerConfig,
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("budget", self.budget),
            ("nu", self.nu),
            ("eta", self.eta),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Argument(format!(
                    "solver {} must be positive, got {}",
                    name, v
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iteration's bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub t: usize,
    /// Suboptimality of the averaged pair.
    pub nu_t: f64,
    /// `L(Q̂_t, λ̂_t)`.
    pub lagrangian: f64,
    /// `L̄ = L(Q̂_t, bestλ(Q̂_t))`.
    pub upper: f64,
    /// `L̲ = L(besth(λ̂_t), λ̂_t)`.
    pub lower: f64,
    /// `max_k γ̂_k(Q̂_t) − ĉ_k` (signed; nonpositive means feasible).
    pub max_violation: f64,
    /// Regret envelope at this iteration.
    pub envelope: f64,
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct SaddleResult {
    /// Averaged classifier play `Q̂_t` (duplicates merged).
    pub ensemble: RandomizedClassifier,
    /// Averaged dual play `λ̂_t`.
    pub lambda_avg: LambdaVector,
    pub gap_history: Vec<GapRecord>,
    pub iterations: usize,
    /// Whether `ν_t ≤ ν` was reached before the iteration cap.
    pub converged: bool,
}

impl SaddleResult {
    /// Final measured suboptimality.
    pub fn final_nu(&self) -> f64 {
        self.gap_history.last().map_or(f64::INFINITY, |g| g.nu_t)
    }
}

/// Map log-domain parameters to dual variables:
/// `λ_k = B·exp(θ_k) / (1 + Σ_k' exp(θ_k'))`.
///
/// Computed with the maximum subtracted from every exponent (the implicit
/// spare coordinate has `θ = 0`), which is the same map up to floating
/// rounding but immune to overflow; `‖λ‖₁ = B·S/(1+S) < B` always.
pub fn lambda_from_theta(theta: &ThetaVector, budget: f64) -> Result<LambdaVector> {
    if theta.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite dual parameter".into()));
    }
    let m = theta.0.iter().fold(0.0f64, |a, &b| a.max(b));
    let denom: f64 = (-m).exp() + theta.0.iter().map(|&t| (t - m).exp()).sum::<f64>();
    let values: Vec<f64> = theta
        .0
        .iter()
        .map(|&t| budget * (t - m).exp() / denom)
        .collect();
    LambdaVector::new(values, budget)
}

/// Gradient step in the log domain: `θ + η·(γ̂(h) − ĉ)`.
pub fn theta_update(
    theta: &ThetaVector,
    gamma_h: &crate::moments::GammaVector,
    c_hat: &[f64],
    eta: f64,
) -> ThetaVector {
    ThetaVector(
        theta
            .0
            .iter()
            .zip(gamma_h.0.iter().zip(c_hat))
            .map(|(&t, (&g, &ch))| t + eta * (g - ch))
            .collect(),
    )
}

/// Iterations sufficient to reach suboptimality `ν` at the learning rate
/// `η = ν/(2ρ²B)`: `⌈4·ρ²·B²·ln(|K|+1)/ν²⌉`.
pub fn iteration_cap(rho: f64, budget: f64, num_constraints: usize, nu: f64) -> u64 {
    let raw = 4.0 * rho * rho * budget * budget * ((num_constraints as f64) + 1.0).ln()
        / (nu * nu);
    raw.ceil().min(1e18) as u64
}

/// Defaults scaled for `n` training rows (α = 1/2): `ν = n^(−1/2)/2`,
/// `B = 2√n`, `η = ν/(2ρ̄²B)`, iterations capped at 5000.
///
/// These scalings favor statistical consistency over wall-clock speed; at
/// desk scale a larger `η` and smaller `B` converge far sooner (see the
/// book's solver chapter).
pub fn default_config(
    ts: &TrainingSet,
    cs: &ConstraintSystem,
    learner: LearnerConfig,
) -> SolverConfig {
    let n = ts.len() as f64;
    let nu = 0.5 / n.sqrt();
    let budget = 2.0 * n.sqrt();
    let rho = cs.rho_bound();
    let eta = nu / (2.0 * rho * rho * budget);
    let cap = iteration_cap(rho, budget, cs.num_constraints(), nu).min(5000) as usize;
    SolverConfig {
        budget,
        nu,
        eta,
        max_iter: cap.max(1),
        seed: 0,
        learner,
    }
}

/// Run the saddle-point loop until the gap target or the iteration cap.
///
/// A run that hits the cap returns the current averages with
/// `converged = false` rather than erroring, so callers can still plot the
/// tradeoff reached.
pub fn solve(ts: &TrainingSet, cs: &ConstraintSystem, config: &SolverConfig) -> Result<SaddleResult> {
    config.validate()?;
    if cs.num_rows() != ts.len() {
        return Err(Error::Argument(format!(
            "constraint system built over {} rows, data has {}",
            cs.num_rows(),
            ts.len()
        )));
    }
    let n = ts.len();
    let num_k = cs.num_constraints();
    let c_hat = cs.c_hat();
    let rho = cs.rho_bound();
    let log_k1 = ((num_k as f64) + 1.0).ln();

    let mut theta = ThetaVector::zeros(num_k);
    let mut pred_sum = vec![0.0; n];
    let mut lambda_sum = vec![0.0; num_k];
    let mut played: Vec<crate::learners::BaseClassifier> = Vec::new();
    let mut gap_history = Vec::new();
    let mut converged = false;

    for t in 1..=config.max_iter {
        let lambda_t = lambda_from_theta(&theta, config.budget)?;
        // ‖λ_t‖₁ < B in exact arithmetic; extreme θ can saturate to B in floats
        debug_assert!(lambda_t.l1_norm() <= config.budget * (1.0 + 1e-12));

        let h_t = reduction::best_h(&lambda_t, ts, cs, &config.learner).map_err(|e| {
            Error::Solver {
                iteration: t,
                source: Box::new(e),
            }
        })?;
        let preds_t: Vec<f64> = h_t
            .predict(&ts.features)?
            .into_iter()
            .map(f64::from)
            .collect();
        played.push(h_t);

        for (s, p) in pred_sum.iter_mut().zip(&preds_t) {
            *s += p;
        }
        let q_preds: Vec<f64> = pred_sum.iter().map(|s| s / t as f64).collect();
        let q_err = error_of(&q_preds, &ts.labels);
        let q_gamma = cs.gamma(&cs.moment_of(&q_preds)?);
        let max_violation = cs.max_violation(&q_gamma);

        // L̄ = L(Q̂, bestλ(Q̂)): either no penalty or the full budget on the
        // most violated constraint.
        let upper = q_err + config.budget * max_violation.max(0.0);

        for (s, l) in lambda_sum.iter_mut().zip(lambda_t.values()) {
            *s += l;
        }
        let lambda_avg = LambdaVector::new(
            lambda_sum.iter().map(|s| s / t as f64).collect(),
            config.budget,
        )?;

        // L̲ = L(besth(λ̂), λ̂): the second oracle call of the iteration.
        let h_best = reduction::best_h(&lambda_avg, ts, cs, &config.learner).map_err(|e| {
            Error::Solver {
                iteration: t,
                source: Box::new(e),
            }
        })?;
        let best_preds: Vec<f64> = h_best
            .predict(&ts.features)?
            .into_iter()
            .map(f64::from)
            .collect();
        let lower = reduction::lagrangian(
            &best_preds,
            error_of(&best_preds, &ts.labels),
            cs,
            &lambda_avg,
        )?;

        let current = reduction::lagrangian(&q_preds, q_err, cs, &lambda_avg)?;
        if !current.is_finite() || !upper.is_finite() || !lower.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite Lagrangian at iteration {}",
                t
            )));
        }
        let nu_t = (current - lower).max(upper - current);
        let envelope = config.budget * log_k1 / (config.eta * t as f64)
            + config.eta * rho * rho * config.budget;
        if nu_t > envelope + 1e-9 {
            return Err(Error::Numeric(format!(
                "gap {} exceeded the regret envelope {} at iteration {}",
                nu_t, envelope, t
            )));
        }
        gap_history.push(GapRecord {
            t,
            nu_t,
            lagrangian: current,
            upper,
            lower,
            max_violation,
            envelope,
        });

        if nu_t <= config.nu {
            converged = true;
            break;
        }

        let gamma_h = cs.gamma(&cs.moment_of(&preds_t)?);
        theta = theta_update(&theta, &gamma_h, &c_hat, config.eta);
    }

    let iterations = gap_history.len();
    let ensemble =
        RandomizedClassifier::merged(played.into_iter().map(|h| (h, 1.0)).collect())?;
    let lambda_avg = LambdaVector::new(
        lambda_sum.iter().map(|s| s / iterations as f64).collect(),
        config.budget,
    )?;
    Ok(SaddleResult {
        ensemble,
        lambda_avg,
        gap_history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Matrix, TrainingSet};
    use crate::moments::GammaVector;

    fn d4() -> TrainingSet {
        TrainingSet::from_parts(
            Matrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0], vec![0.0]]).unwrap(),
            vec![0, 0, 1, 1],
            vec![0, 0, 1, 1],
            vec!["x".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn lambda_map_symmetric_case() {
        let lam = lambda_from_theta(&ThetaVector::zeros(3), 6.0).unwrap();
        assert_eq!(lam.values(), &[1.5, 1.5, 1.5]);
    }

    #[test]
    fn lambda_map_hand_values() {
        let theta = ThetaVector(vec![2.0f64.ln(), 0.0]);
        let lam = lambda_from_theta(&theta, 3.0).unwrap();
        assert!((lam.values()[0] - 1.5).abs() < 1e-12);
        assert!((lam.values()[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn lambda_map_limits_and_overflow() {
        let tiny = lambda_from_theta(&ThetaVector(vec![-800.0, -900.0]), 5.0).unwrap();
        assert!(tiny.values().iter().all(|&v| v < 1e-300));
        // large θ saturates at B without overflowing
        let big = lambda_from_theta(&ThetaVector(vec![800.0, 0.0]), 5.0).unwrap();
        assert!(big.values()[0] > 4.999999);
        assert!(big.l1_norm() <= 5.0);
        // strictly inside the budget at moderate θ
        let moderate = lambda_from_theta(&ThetaVector(vec![30.0, -2.0]), 5.0).unwrap();
        assert!(moderate.l1_norm() < 5.0);
    }

    #[test]
    fn theta_update_is_additive() {
        let theta = ThetaVector::zeros(2);
        let gamma = GammaVector(vec![0.25, -0.25]);
        let c_hat = vec![0.0, 0.0];
        let once = theta_update(&theta, &gamma, &c_hat, 1.0);
        assert_eq!(once.0, vec![0.25, -0.25]);
        let twice = theta_update(&once, &gamma, &c_hat, 1.0);
        assert_eq!(twice.0, vec![0.5, -0.5]);
        let frozen = theta_update(&twice, &gamma, &c_hat, 0.0);
        assert_eq!(frozen.0, twice.0);
    }

    #[test]
    fn iteration_cap_examples_and_scaling() {
        assert_eq!(iteration_cap(2.0, 1.0, 1, 1.0), 12); // ⌈16·ln 2⌉
        let base = iteration_cap(2.0, 1.0, 3, 0.1);
        // doubling ν divides the cap by 4 (before ceiling)
        let coarse = iteration_cap(2.0, 1.0, 3, 0.2);
        assert!((base as f64 / coarse as f64 - 4.0).abs() < 0.01);
        // doubling B multiplies by 4
        let big_b = iteration_cap(2.0, 2.0, 3, 0.1);
        assert!((big_b as f64 / base as f64 - 4.0).abs() < 0.01);
    }

    #[test]
    fn default_config_follows_scalings() {
        let ts = crate::synth::group_shifted(400, 0.5, 0.3, 7);
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let cfg = default_config(&ts, &cs, LearnerConfig::Threshold1d);
        assert!((cfg.nu - 0.025).abs() < 1e-15);
        assert!((cfg.budget - 40.0).abs() < 1e-15);
        let rho = cs.rho_bound();
        assert!((cfg.eta - cfg.nu / (2.0 * rho * rho * cfg.budget)).abs() < 1e-18);
    }

    #[test]
    fn single_group_converges_immediately() {
        let ts = TrainingSet::from_parts(
            Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap(),
            vec![0; 4],
            vec![0, 0, 1, 1],
            vec!["x".into()],
            vec!["a".into()],
        )
        .unwrap();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let config = SolverConfig {
            budget: 5.0,
            nu: 0.01,
            eta: 0.1,
            max_iter: 50,
            seed: 0,
            learner: LearnerConfig::Threshold1d,
        };
        let result = solve(&ts, &cs, &config).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 1);
        // Q̂ is the unconstrained fit: zero training error here.
        let preds = result.ensemble.predict_expected(&ts.features).unwrap();
        assert_eq!(error_of(&preds, &ts.labels), 0.0);
    }

    #[test]
    fn d4_run_meets_violation_bound() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let config = SolverConfig {
            budget: 10.0,
            nu: 0.01,
            eta: 0.02,
            max_iter: 20_000,
            seed: 0,
            learner: LearnerConfig::Threshold1d,
        };
        let result = solve(&ts, &cs, &config).unwrap();
        assert!(result.converged, "gap {}", result.final_nu());
        let preds = result.ensemble.predict_expected(&ts.features).unwrap();
        let gamma = cs.gamma(&cs.moment_of(&preds).unwrap());
        let bound = (1.0 + 2.0 * config.nu) / config.budget;
        assert!(
            cs.max_violation(&gamma) <= bound + 1e-9,
            "violation {} > {}",
            cs.max_violation(&gamma),
            bound
        );
    }

    #[test]
    fn gap_history_is_bitwise_reproducible() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let config = SolverConfig {
            budget: 3.0,
            nu: 0.05,
            eta: 0.1,
            max_iter: 2000,
            seed: 42,
            learner: LearnerConfig::Threshold1d,
        };
        let a = solve(&ts, &cs, &config).unwrap();
        let b = solve(&ts, &cs, &config).unwrap();
        assert_eq!(a.gap_history, b.gap_history);
        assert_eq!(a.converged, b.converged);
    }

    #[test]
    fn ensemble_weights_sum_to_one_and_lambda_within_budget() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let config = SolverConfig {
            budget: 2.0,
            nu: 0.2,
            eta: 0.2,
            max_iter: 500,
            seed: 0,
            learner: LearnerConfig::Threshold1d,
        };
        let result = solve(&ts, &cs, &config).unwrap();
        let total: f64 = result.ensemble.members().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(result.lambda_avg.l1_norm() < config.budget);
        assert_eq!(result.gap_history.len(), result.iterations);
    }

    #[test]
    fn rejects_bad_config() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let mut config = SolverConfig {
            budget: 1.0,
            nu: 0.1,
            eta: 0.1,
            max_iter: 10,
            seed: 0,
            learner: LearnerConfig::Threshold1d,
        };
        config.budget = -1.0;
        assert!(solve(&ts, &cs, &config).is_err());
        config.budget = 1.0;
        config.max_iter = 0;
        assert!(solve(&ts, &cs, &config).is_err());
    }
}
