//! Lagrangian machinery: dual-variable costs and both best responses.
//!
//! For dual variables `λ ≥ 0` the Lagrangian is
//! `L(Q, λ) = err̂(Q) + λᵀ(M μ̂(Q) − ĉ)`. Minimizing it over classifiers is
//! cost-sensitive classification with per-example costs
//!
//! ```text
//! C_i^ŷ = 1{Y_i ≠ ŷ} + Σ_{k,j} (M_kj λ_k / p_j) g_j(X_i, A_i, Y_i, ŷ) 1{i ∈ E_j}
//! ```
//!
//! and maximizing it over the λ budget ball puts the whole budget on the
//! most violated constraint (or plays 0 when all constraints hold). The
//! generic formulas over the constraint index are the single code path;
//! the collapsed closed forms for parity and odds live only in tests.

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::learners::{self, BaseClassifier, LearnerConfig};
use crate::moments::ConstraintSystem;

/// Nonnegative dual variables with an ℓ₁ budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaVector {
    values: Vec<f64>,
    budget: f64,
}

impl LambdaVector {
    pub fn new(values: Vec<f64>, budget: f64) -> Result<Self> {
        if !budget.is_finite() || budget <= 0.0 {
            return Err(Error::Argument(format!("budget must be positive, got {}", budget)));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Argument("dual variables must be nonnegative".into()));
        }
        let l1: f64 = values.iter().sum();
        if l1 > budget * (1.0 + 1e-12) {
            return Err(Error::Argument(format!(
                "dual variables exceed the budget: ‖λ‖₁ = {} > B = {}",
                l1, budget
            )));
        }
        Ok(LambdaVector { values, budget })
    }

    pub fn zeros(len: usize, budget: f64) -> Result<Self> {
        Self::new(vec![0.0; len], budget)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-example costs for predicting 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CostPairSet {
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
}

impl CostPairSet {
    /// Plain misclassification costs: `C⁰ = 1{Y≠0}`, `C¹ = 1{Y≠1}`.
    pub fn misclassification(labels: &[u8]) -> Self {
        CostPairSet {
            c0: labels.iter().map(|&y| f64::from(y)).collect(),
            c1: labels.iter().map(|&y| f64::from(1 - y)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.c0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c0.is_empty()
    }
}

/// Build the cost pairs induced by dual variables over a constraint system.
pub fn compute_costs(
    ts: &TrainingSet,
    cs: &ConstraintSystem,
    lambda: &LambdaVector,
) -> Result<CostPairSet> {
    if cs.num_rows() != ts.len() {
        return Err(Error::Argument(format!(
            "constraint system built over {} rows, data has {}",
            cs.num_rows(),
            ts.len()
        )));
    }
    if lambda.len() != cs.num_constraints() {
        return Err(Error::Argument(format!(
            "{} dual variables for {} constraints",
            lambda.len(),
            cs.num_constraints()
        )));
    }
    let mut costs = CostPairSet::misclassification(&ts.labels);
    for j in 0..cs.num_moments() {
        // (Mᵀλ)_j, then spread over the event's members scaled by 1/p_j
        let mut coef = 0.0;
        for (k, &lam) in lambda.values().iter().enumerate() {
            if lam != 0.0 {
                coef += cs.matrix().get(k, j) * lam;
            }
        }
        if coef == 0.0 {
            continue;
        }
        let scale = coef / cs.probs()[j];
        let (g0, g1) = cs.g_tables(j);
        for (idx, &i) in cs.members(j).iter().enumerate() {
            costs.c0[i as usize] += scale * g0[idx];
            costs.c1[i as usize] += scale * g1[idx];
        }
    }
    Ok(costs)
}

/// The classifier player's best response: one call to the weighted
/// classification oracle on the λ-induced costs.
pub fn best_h(
    lambda: &LambdaVector,
    ts: &TrainingSet,
    cs: &ConstraintSystem,
    learner: &LearnerConfig,
) -> Result<BaseClassifier> {
    let costs = compute_costs(ts, cs, lambda)?;
    let samples = learners::cost_to_weighted(&costs);
    learners::fit(learner, ts, &samples)
}

/// The dual player's best response to the (possibly fractional) predictions
/// of a randomized classifier: zero when feasible, otherwise the whole
/// budget on the most violated constraint (smallest index on ties).
pub fn best_lambda(
    q_predictions: &[f64],
    cs: &ConstraintSystem,
    budget: f64,
) -> Result<LambdaVector> {
    let mu = cs.moment_of(q_predictions)?;
    let gamma = cs.gamma(&mu);
    let c_hat = cs.c_hat();
    let mut best_k = 0usize;
    let mut best_violation = f64::NEG_INFINITY;
    for (k, (&g, &ch)) in gamma.0.iter().zip(&c_hat).enumerate() {
        let v = g - ch;
        if v > best_violation {
            best_violation = v;
            best_k = k;
        }
    }
    let mut values = vec![0.0; cs.num_constraints()];
    if best_violation > 0.0 {
        values[best_k] = budget;
    }
    LambdaVector::new(values, budget)
}

/// Evaluate `L(Q, λ) = err̂(Q) + λᵀ(γ̂(Q) − ĉ)` given the mixture's expected
/// predictions and its (matching) expected error.
pub fn lagrangian(
    q_predictions: &[f64],
    q_error: f64,
    cs: &ConstraintSystem,
    lambda: &LambdaVector,
) -> Result<f64> {
    if lambda.len() != cs.num_constraints() {
        return Err(Error::Argument(format!(
            "{} dual variables for {} constraints",
            lambda.len(),
            cs.num_constraints()
        )));
    }
    let mu = cs.moment_of(q_predictions)?;
    let gamma = cs.gamma(&mu);
    let c_hat = cs.c_hat();
    let penalty: f64 = lambda
        .values()
        .iter()
        .zip(gamma.0.iter().zip(&c_hat))
        .map(|(&lam, (&g, &ch))| lam * (g - ch))
        .sum();
    Ok(q_error + penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Matrix, TrainingSet};
    use crate::evaluate::error_of;
    use crate::moments::ConstraintSystem;

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

    fn d6() -> TrainingSet {
        TrainingSet::from_parts(
            Matrix::from_rows(&[
                vec![0.0],
                vec![1.0],
                vec![0.0],
                vec![1.0],
                vec![1.0],
                vec![0.0],
            ])
            .unwrap(),
            vec![0, 0, 1, 1, 0, 1],
            vec![0, 1, 0, 1, 0, 1],
            vec!["x".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn dp_costs_match_hand_computation() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        // λ on (a,+) only
        let lam = LambdaVector::new(vec![0.5, 0.0, 0.0, 0.0], 10.0).unwrap();
        let costs = compute_costs(&ts, &cs, &lam).unwrap();
        // row 0: (A=a, Y=0) → (0, 1.5)
        assert!((costs.c0[0] - 0.0).abs() < 1e-12);
        assert!((costs.c1[0] - 1.5).abs() < 1e-12);
        // row 3: (A=b, Y=1) → (1, −0.5)
        assert!((costs.c0[3] - 1.0).abs() < 1e-12);
        assert!((costs.c1[3] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_gives_misclassification_costs() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let lam = LambdaVector::zeros(4, 1.0).unwrap();
        let costs = compute_costs(&ts, &cs, &lam).unwrap();
        assert_eq!(costs, CostPairSet::misclassification(&ts.labels));
    }

    #[test]
    fn eo_costs_match_hand_computation() {
        let ts = d6();
        let cs = ConstraintSystem::equalized_odds(&ts).unwrap();
        // constraint order: a|y=0±, a|y=1±, b|y=0±, b|y=1±
        let k = cs
            .constraint_ids()
            .iter()
            .position(|id| id == "a|y=1:+")
            .unwrap();
        let mut values = vec![0.0; cs.num_constraints()];
        values[k] = 0.3;
        let lam = LambdaVector::new(values, 10.0).unwrap();
        let costs = compute_costs(&ts, &cs, &lam).unwrap();
        // row 1: (A=a, Y=1) → C¹ = 0 + 0.3/(1/6) − 0.3/(1/2) = 1.2
        assert!((costs.c1[1] - 1.2).abs() < 1e-12);
        // row 3: (A=b, Y=1) → C¹ = 0 + 0 − 0.3/(1/2) = −0.6
        assert!((costs.c1[3] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn best_lambda_selects_most_violated() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        // h = 1{x ≥ 0.5}: γ = (−0.25, 0.25, 0.25, −0.25); ties at k=1 and
        // k=2 resolve to the smaller index.
        let preds = [0.0, 0.0, 1.0, 0.0];
        let lam = best_lambda(&preds, &cs, 5.0).unwrap();
        assert_eq!(lam.values(), &[0.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn best_lambda_zero_when_feasible() {
        let ts = d4();
        let mut cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        cs.set_uniform_epsilon(0.5).unwrap();
        // constant predictions satisfy parity exactly
        let lam = best_lambda(&[1.0; 4], &cs, 5.0).unwrap();
        assert!(lam.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lagrangian_matches_hand_value() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let preds = [0.0, 0.0, 1.0, 0.0];
        let err = error_of(&preds, &ts.labels);
        assert!((err - 0.25).abs() < 1e-15);
        // λ = 2 on (b,+); γ_(b,+) = 0.25, ĉ = 0 → L = 0.25 + 2·0.25
        let lam = LambdaVector::new(vec![0.0, 0.0, 2.0, 0.0], 5.0).unwrap();
        let l = lagrangian(&preds, err, &cs, &lam).unwrap();
        assert!((l - 0.75).abs() < 1e-12);
        // λ = 0 returns the error exactly
        let zero = LambdaVector::zeros(4, 5.0).unwrap();
        assert_eq!(lagrangian(&preds, err, &cs, &zero).unwrap(), err);
    }

    #[test]
    fn feasible_q_bounds_lagrangian_by_error() {
        let ts = d4();
        let mut cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        cs.set_uniform_epsilon(0.1).unwrap();
        let preds = [0.5; 4]; // parity holds exactly
        let err = error_of(&preds, &ts.labels);
        for values in [vec![1.0, 0.0, 2.0, 0.5], vec![0.0, 3.0, 0.0, 0.0]] {
            let lam = LambdaVector::new(values, 5.0).unwrap();
            assert!(lagrangian(&preds, err, &cs, &lam).unwrap() <= err);
        }
    }

    #[test]
    fn best_h_with_zero_lambda_is_unconstrained_fit() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let lam = LambdaVector::zeros(4, 1.0).unwrap();
        let h = best_h(&lam, &ts, &cs, &LearnerConfig::Threshold1d).unwrap();
        let direct = crate::learners::fit(
            &LearnerConfig::Threshold1d,
            &ts,
            &crate::learners::cost_to_weighted(&CostPairSet::misclassification(&ts.labels)),
        )
        .unwrap();
        assert_eq!(h, direct);
    }

    #[test]
    fn large_lambda_suppresses_group_b_positives() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let zero = LambdaVector::zeros(4, 100.0).unwrap();
        let h0 = best_h(&zero, &ts, &cs, &LearnerConfig::Threshold1d).unwrap();
        let mu0 = cs
            .moment_of(&to_f64(&h0.predict(&ts.features).unwrap()))
            .unwrap();
        // heavy multiplier on (b,+) penalizes predicting 1 on group b
        let heavy = LambdaVector::new(vec![0.0, 0.0, 50.0, 0.0], 100.0).unwrap();
        let h1 = best_h(&heavy, &ts, &cs, &LearnerConfig::Threshold1d).unwrap();
        let mu1 = cs
            .moment_of(&to_f64(&h1.predict(&ts.features).unwrap()))
            .unwrap();
        assert!(mu1.0[1] <= mu0.0[1] + 1e-12);
    }

    #[test]
    fn constant_family_best_response_compares_totals() {
        let ts = d4();
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let lam = LambdaVector::new(vec![0.0, 0.0, 3.0, 0.0], 10.0).unwrap();
        let h = best_h(&lam, &ts, &cs, &LearnerConfig::ConstantOnly).unwrap();
        let costs = compute_costs(&ts, &cs, &lam).unwrap();
        let total0: f64 = costs.c0.iter().sum();
        let total1: f64 = costs.c1.iter().sum();
        let expect = u8::from(total1 <= total0);
        assert_eq!(h, BaseClassifier::Constant { bit: expect });
    }

    #[test]
    fn lambda_vector_validates() {
        assert!(LambdaVector::new(vec![-0.1], 1.0).is_err());
        assert!(LambdaVector::new(vec![0.6, 0.6], 1.0).is_err());
        assert!(LambdaVector::new(vec![0.5], 0.0).is_err());
        let l = LambdaVector::new(vec![0.5, 0.25], 1.0).unwrap();
        assert!((l.l1_norm() - 0.75).abs() < 1e-15);
    }

    fn to_f64(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| f64::from(b)).collect()
    }
}
