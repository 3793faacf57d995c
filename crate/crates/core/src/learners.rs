//! The weighted-classification oracle and its built-in learners.
//!
//! Cost-sensitive classification with per-example costs `(C⁰, C¹)` is
//! equivalent to weighted classification with `W = |C⁰ − C¹|` and target
//! `1{C⁰ ≥ C¹}`; [`cost_to_weighted`] performs that conversion. [`fit`]
//! then trains a [`BaseClassifier`] approximately minimizing
//! `Σ W_i · 1{h(X_i) ≠ target_i}` within its family:
//!
//! * `threshold1d` — exhaustive search over single-feature thresholds,
//!   exact by construction;
//! * `logistic` — weighted logistic loss by full-batch gradient descent
//!   with backtracking line search;
//! * `stumps` — boosted decision stumps with multiplicative reweighting.
//!
//! All learners are deterministic: identical inputs give identical
//! parameters.

use serde::{Deserialize, Serialize};

use crate::data::{Matrix, TrainingSet};
use crate::error::{Error, Result};
use crate::reduction::CostPairSet;

/// One row of a weighted classification problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    pub index: usize,
    /// Relabeled target in {0, 1}.
    pub target: u8,
    /// Nonnegative importance weight.
    pub weight: f64,
}

/// Reduce cost pairs to weighted samples: `W_i = |C⁰_i − C¹_i|`,
/// `target_i = 1{C⁰_i ≥ C¹_i}`. Ties produce target 1 with weight 0.
pub fn cost_to_weighted(costs: &CostPairSet) -> Vec<WeightedSample> {
    costs
        .c0
        .iter()
        .zip(&costs.c1)
        .enumerate()
        .map(|(i, (&c0, &c1))| WeightedSample {
            index: i,
            target: u8::from(c0 >= c1),
            weight: (c0 - c1).abs(),
        })
        .collect()
}

/// Which side of a threshold predicts 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Predict 1 when `x[feature] >= threshold`.
    Ge,
    /// Predict 1 when `x[feature] < threshold`.
    Lt,
}

/// One boosted stage: vote `left` below the threshold, `right` at or above
/// it, scaled by `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: u8,
    pub right: u8,
    pub weight: f64,
}

/// A fitted base classifier. Parameters serialize losslessly (JSON with
/// shortest round-trip floats), and equality of serialized parameters
/// coincides with `PartialEq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseClassifier {
    Constant {
        bit: u8,
    },
    Threshold1d {
        feature: usize,
        threshold: f64,
        polarity: Polarity,
    },
    Logistic {
        coefficients: Vec<f64>,
        intercept: f64,
    },
    BoostedStumps {
        stages: Vec<Stump>,
    },
}

impl BaseClassifier {
    /// Hard prediction for one feature row. Logistic scores and boosted
    /// vote sums break ties at exactly 0 toward 1.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        match self {
            BaseClassifier::Constant { bit } => *bit,
            BaseClassifier::Threshold1d {
                feature,
                threshold,
                polarity,
            } => {
                let above = row[*feature] >= *threshold;
                match polarity {
                    Polarity::Ge => u8::from(above),
                    Polarity::Lt => u8::from(!above),
                }
            }
            BaseClassifier::Logistic {
                coefficients,
                intercept,
            } => {
                let score: f64 = intercept
                    + coefficients
                        .iter()
                        .zip(row)
                        .map(|(c, x)| c * x)
                        .sum::<f64>();
                u8::from(score >= 0.0)
            }
            BaseClassifier::BoostedStumps { stages } => {
                let score: f64 = stages
                    .iter()
                    .map(|s| {
                        let vote = if row[s.feature] >= s.threshold {
                            s.right
                        } else {
                            s.left
                        };
                        s.weight * if vote == 1 { 1.0 } else { -1.0 }
                    })
                    .sum();
                u8::from(score >= 0.0)
            }
        }
    }

    /// Predictions for every row of `features`.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<u8>> {
        self.check_dimension(features.cols())?;
        Ok((0..features.rows())
            .map(|i| self.predict_row(features.row(i)))
            .collect())
    }

    fn check_dimension(&self, d: usize) -> Result<()> {
        let needed = match self {
            BaseClassifier::Constant { .. } => 0,
            BaseClassifier::Threshold1d { feature, .. } => feature + 1,
            BaseClassifier::Logistic { coefficients, .. } => {
                if coefficients.len() != d {
                    return Err(Error::Argument(format!(
                        "logistic classifier has {} coefficients, data has {} features",
                        coefficients.len(),
                        d
                    )));
                }
                0
            }
            BaseClassifier::BoostedStumps { stages } => {
                stages.iter().map(|s| s.feature + 1).max().unwrap_or(0)
            }
        };
        if needed > d {
            return Err(Error::Argument(format!(
                "classifier expects at least {} features, data has {}",
                needed, d
            )));
        }
        Ok(())
    }

    /// Self-describing text record of the classifier (kind tag plus
    /// parameter arrays at full decimal precision).
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("classifier serialization cannot fail")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Artifact(format!("classifier record: {}", e)))
    }
}

/// Settings for the logistic learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-6,
            max_iter: 5000,
            tol: 1e-8,
        }
    }
}

/// Settings for the boosted-stumps learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpsConfig {
    pub rounds: usize,
}

impl Default for StumpsConfig {
    fn default() -> Self {
        StumpsConfig { rounds: 50 }
    }
}

/// Which learner [`fit`] dispatches to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "kebab-case")]
pub enum LearnerConfig {
    Logistic(LogisticConfig),
    BoostedStumps(StumpsConfig),
    /// Exhaustive single-feature threshold search; exact within its family.
    Threshold1d,
    /// Picks the better of the two constant classifiers; handy for tests.
    ConstantOnly,
}

impl LearnerConfig {
    pub fn logistic() -> Self {
        LearnerConfig::Logistic(LogisticConfig::default())
    }

    pub fn stumps() -> Self {
        LearnerConfig::BoostedStumps(StumpsConfig::default())
    }

    /// Short name used in reports and artifacts.
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Logistic(_) => "logistic",
            LearnerConfig::BoostedStumps(_) => "stumps",
            LearnerConfig::Threshold1d => "threshold1d",
            LearnerConfig::ConstantOnly => "constant",
        }
    }

    /// Parse a CLI-style learner name with default settings.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "logistic" => Ok(Self::logistic()),
            "stumps" => Ok(Self::stumps()),
            "threshold1d" => Ok(LearnerConfig::Threshold1d),
            "constant" => Ok(LearnerConfig::ConstantOnly),
            other => Err(Error::Argument(format!(
                "unknown learner '{}' (expected logistic|stumps|threshold1d)",
                other
            ))),
        }
    }
}

/// Train a classifier approximately minimizing the weighted error
/// `Σ W_i · 1{h(X_i) ≠ target_i}`.
///
/// Samples are keyed by row index; rows without a sample get weight 0.
/// If every weight is zero any classifier is optimal and the constant 1 is
/// returned.
pub fn fit(
    config: &LearnerConfig,
    ts: &TrainingSet,
    samples: &[WeightedSample],
) -> Result<BaseClassifier> {
    let n = ts.len();
    let mut weights = vec![0.0; n];
    let mut targets = vec![0u8; n];
    for s in samples {
        if s.index >= n {
            return Err(Error::Argument(format!(
                "sample index {} out of range ({} rows)",
                s.index, n
            )));
        }
        if !s.weight.is_finite() {
            return Err(Error::Numeric(format!(
                "weight for row {} is not finite",
                s.index
            )));
        }
        if s.weight < 0.0 {
            return Err(Error::Argument(format!(
                "negative weight for row {}",
                s.index
            )));
        }
        weights[s.index] = s.weight;
        targets[s.index] = s.target;
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Ok(BaseClassifier::Constant { bit: 1 });
    }
    match config {
        LearnerConfig::Threshold1d => Ok(fit_threshold(&ts.features, &weights, &targets).0),
        LearnerConfig::ConstantOnly => Ok(fit_constant(&weights, &targets)),
        LearnerConfig::Logistic(cfg) => fit_logistic(cfg, &ts.features, &weights, &targets),
        LearnerConfig::BoostedStumps(cfg) => fit_stumps(cfg, &ts.features, &weights, &targets),
    }
}

fn fit_constant(weights: &[f64], targets: &[u8]) -> BaseClassifier {
    let err_of_one: f64 = weights
        .iter()
        .zip(targets)
        .map(|(w, &t)| if t == 0 { *w } else { 0.0 })
        .sum();
    let err_of_zero: f64 = weights
        .iter()
        .zip(targets)
        .map(|(w, &t)| if t == 1 { *w } else { 0.0 })
        .sum();
    BaseClassifier::Constant {
        bit: u8::from(err_of_one <= err_of_zero),
    }
}

/// Exhaustive weighted-error minimization over every `(feature, threshold,
/// polarity)` triple. Candidate thresholds sit below the minimum, between
/// consecutive distinct values, and above the maximum, so both constants
/// are in the family. Ties resolve to the smallest feature, then smallest
/// threshold, then `>=` polarity.
fn fit_threshold(features: &Matrix, weights: &[f64], targets: &[u8]) -> (BaseClassifier, f64) {
    let n = features.rows();
    let total_pos: f64 = (0..n).map(|i| weights[i] * f64::from(targets[i])).sum();
    let total_neg: f64 = (0..n)
        .map(|i| weights[i] * f64::from(1 - targets[i]))
        .sum();

    let mut best_err = f64::INFINITY;
    let mut best = BaseClassifier::Constant { bit: 1 };
    for f in 0..features.cols() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            features
                .get(a, f)
                .partial_cmp(&features.get(b, f))
                .unwrap()
                .then(a.cmp(&b))
        });
        // prefix sums over the sorted order
        let mut prefix_pos = Vec::with_capacity(n + 1);
        let mut prefix_neg = Vec::with_capacity(n + 1);
        prefix_pos.push(0.0);
        prefix_neg.push(0.0);
        for &i in &order {
            prefix_pos.push(prefix_pos.last().unwrap() + weights[i] * f64::from(targets[i]));
            prefix_neg.push(prefix_neg.last().unwrap() + weights[i] * f64::from(1 - targets[i]));
        }
        // candidate thresholds and how many sorted rows fall strictly below
        let lo = features.get(order[0], f);
        let hi = features.get(order[n - 1], f);
        let mut candidates: Vec<(f64, usize)> = vec![(lo - 1.0, 0)];
        for w in 1..n {
            let a = features.get(order[w - 1], f);
            let b = features.get(order[w], f);
            if a < b {
                candidates.push(((a + b) / 2.0, w));
            }
        }
        candidates.push((hi + 1.0, n));

        for &(threshold, k) in &candidates {
            // predict 1 at or above the threshold
            let err_ge = (total_neg - prefix_neg[k]) + prefix_pos[k];
            // predict 1 strictly below
            let err_lt = prefix_neg[k] + (total_pos - prefix_pos[k]);
            if err_ge < best_err {
                best_err = err_ge;
                best = BaseClassifier::Threshold1d {
                    feature: f,
                    threshold,
                    polarity: Polarity::Ge,
                };
            }
            if err_lt < best_err {
                best_err = err_lt;
                best = BaseClassifier::Threshold1d {
                    feature: f,
                    threshold,
                    polarity: Polarity::Lt,
                };
            }
        }
    }
    (best, best_err)
}

fn fit_logistic(
    cfg: &LogisticConfig,
    features: &Matrix,
    weights: &[f64],
    targets: &[u8],
) -> Result<BaseClassifier> {
    let n = features.rows();
    let d = features.cols();
    let total: f64 = weights.iter().sum();
    // normalized weights make the objective invariant to weight scaling
    let norm: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let signs: Vec<f64> = targets.iter().map(|&t| if t == 1 { 1.0 } else { -1.0 }).collect();

    // beta = [coefficients..., intercept]
    let mut beta = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    let mut trial = vec![0.0; d + 1];
    // per-row σ(−m_i z_i) at the current point, shared between the loss
    // pass that produced it and the gradient pass that follows
    let mut sig = vec![0.0; n];
    let mut sig_trial = vec![0.0; n];

    // weighted logistic loss at `beta`, filling `sig` as a byproduct
    let eval = |beta: &[f64], sig: &mut [f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            if norm[i] == 0.0 {
                sig[i] = 0.0;
                continue;
            }
            let row = features.row(i);
            let z: f64 = beta[d] + row.iter().zip(&beta[..d]).map(|(x, b)| x * b).sum::<f64>();
            let t = -signs[i] * z;
            let e = (-t.abs()).exp();
            // ln(1 + e^t), stable for large |t|
            acc += norm[i] * (t.max(0.0) + e.ln_1p());
            sig[i] = if t >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
        }
        let penalty: f64 = beta[..d].iter().map(|b| b * b).sum::<f64>();
        acc + 0.5 * cfg.l2 * penalty
    };

    let mut f0 = eval(&beta, &mut sig);
    if !f0.is_finite() {
        return Err(Error::Numeric("logistic loss is not finite".into()));
    }
    let mut step = 1.0f64;
    for _ in 0..cfg.max_iter {
        // dℓ_i/dz = −m_i σ(−m_i z_i), with σ taken from the last loss pass
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..n {
            if norm[i] == 0.0 {
                continue;
            }
            let coef = norm[i] * (-signs[i]) * sig[i];
            for (g, x) in grad[..d].iter_mut().zip(features.row(i)) {
                *g += coef * x;
            }
            grad[d] += coef;
        }
        for (g, b) in grad[..d].iter_mut().zip(&beta[..d]) {
            *g += cfg.l2 * b;
        }
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= cfg.tol {
            break;
        }
        // backtracking line search (Armijo), reusing the last accepted step
        step = (step * 2.0).min(1e8);
        let mut accepted = false;
        while step >= 1e-18 {
            for j in 0..=d {
                trial[j] = beta[j] - step * grad[j];
            }
            let f1 = eval(&trial, &mut sig_trial);
            if f1.is_finite() && f1 <= f0 - 1e-4 * step * gnorm2 {
                let plateau = f0 - f1 <= 1e-15 * f0.abs().max(1.0);
                beta.copy_from_slice(&trial);
                std::mem::swap(&mut sig, &mut sig_trial);
                f0 = f1;
                accepted = !plateau;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no progress at float precision
        }
    }
    let intercept = beta[d];
    beta.truncate(d);
    Ok(BaseClassifier::Logistic {
        coefficients: beta,
        intercept,
    })
}

fn fit_stumps(
    cfg: &StumpsConfig,
    features: &Matrix,
    weights: &[f64],
    targets: &[u8],
) -> Result<BaseClassifier> {
    let n = features.rows();
    let total: f64 = weights.iter().sum();
    let mut dist: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut stages = Vec::new();
    for _ in 0..cfg.rounds.max(1) {
        let (stump, err) = fit_threshold(features, &dist, targets);
        let BaseClassifier::Threshold1d {
            feature,
            threshold,
            polarity,
        } = stump
        else {
            unreachable!("threshold search returns a threshold classifier");
        };
        let (left, right) = match polarity {
            Polarity::Ge => (0u8, 1u8),
            Polarity::Lt => (1u8, 0u8),
        };
        let err = err.clamp(0.0, 1.0);
        if err >= 0.5 {
            // no remaining edge; a zero-weight stage keeps the ensemble
            // deterministic without changing predictions
            if stages.is_empty() {
                stages.push(Stump {
                    feature,
                    threshold,
                    left,
                    right,
                    weight: 0.0,
                });
            }
            break;
        }
        let bounded = err.max(1e-12);
        let alpha = 0.5 * ((1.0 - bounded) / bounded).ln();
        stages.push(Stump {
            feature,
            threshold,
            left,
            right,
            weight: alpha,
        });
        if err <= 1e-12 {
            break; // perfect stage
        }
        // multiplicative reweighting toward the mistakes
        let mut z = 0.0;
        for i in 0..n {
            let above = features.get(i, feature) >= threshold;
            let vote = if above { right } else { left };
            let agree = vote == targets[i];
            dist[i] *= if agree { (-alpha).exp() } else { alpha.exp() };
            z += dist[i];
        }
        if z <= 0.0 || !z.is_finite() {
            return Err(Error::Numeric("boosting weights degenerated".into()));
        }
        dist.iter_mut().for_each(|d| *d /= z);
    }
    Ok(BaseClassifier::BoostedStumps { stages })
}
