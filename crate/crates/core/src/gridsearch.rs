//! Grid-search alternative for small constraint systems.
//!
//! Instead of solving the saddle point, sweep the dual variables over a
//! grid and keep the best responses. For a binary protected attribute the
//! duals collapse: the costs for predicting 1 shift by a per-group
//! adjustment `δ` that must balance as `p_a·δ_a + p_a'·δ_a' = 0`, so a
//! demographic-parity search is one-dimensional in `δ_a` (two dimensions
//! for three groups) and an equalized-odds search is two-dimensional in
//! `(δ_(a,0), δ_(a,1))`. Beyond that the grid is ruled infeasible.

use serde::{Deserialize, Serialize};

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::learners::{self, BaseClassifier, LearnerConfig};
use crate::moments::{ConstraintKind, ConstraintSystem};
use crate::reduction::CostPairSet;

/// One axis of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDim {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridDim {
    fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![(self.lo + self.hi) / 2.0];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + step * i as f64).collect()
    }
}

/// Cartesian grid over cost adjustments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: Vec<GridDim>,
}

/// Default number of points per dimension.
pub const DEFAULT_GRID_POINTS: usize = 33;

impl GridSpec {
    pub fn new(dims: Vec<GridDim>) -> Result<Self> {
        for d in &dims {
            if d.points < 1 {
                return Err(Error::Argument(format!(
                    "grid dimension '{}' needs at least one point",
                    d.label
                )));
            }
            if d.lo.is_nan() || d.hi.is_nan() || d.lo > d.hi {
                return Err(Error::Argument(format!(
                    "grid dimension '{}' has lo {} > hi {}",
                    d.label, d.lo, d.hi
                )));
            }
        }
        Ok(GridSpec { dims })
    }

    /// Grid matched to a constraint kind and dataset: one `δ` dimension for
    /// binary-attribute parity, two for three-group parity, two for
    /// binary-attribute odds. The default range is `[−2ρ̄, 2ρ̄]`; beyond
    /// that the adjustments force constant behavior anyway.
    pub fn for_constraint(
        kind: ConstraintKind,
        ts: &TrainingSet,
        range: Option<(f64, f64)>,
        points: usize,
    ) -> Result<Self> {
        let rho = 2.0;
        let (lo, hi) = range.unwrap_or((-2.0 * rho, 2.0 * rho));
        let groups = ts.num_groups();
        let dim = |label: String| GridDim {
            label,
            lo,
            hi,
            points,
        };
        let dims = match kind {
            ConstraintKind::DemographicParity if groups == 2 => {
                vec![dim(format!("delta[{}]", ts.attribute_values[0]))]
            }
            ConstraintKind::DemographicParity if groups == 3 => vec![
                dim(format!("delta[{}]", ts.attribute_values[0])),
                dim(format!("delta[{}]", ts.attribute_values[1])),
            ],
            ConstraintKind::EqualizedOdds if groups == 2 => vec![
                dim(format!("delta[{}|y=0]", ts.attribute_values[0])),
                dim(format!("delta[{}|y=1]", ts.attribute_values[0])),
            ],
            ConstraintKind::DemographicParity => {
                return Err(Error::NotApplicable(format!(
                    "grid search over demographic parity supports 2 or 3 protected values, got {}",
                    groups
                )))
            }
            ConstraintKind::EqualizedOdds => {
                return Err(Error::NotApplicable(format!(
                    "grid search over equalized odds needs a binary protected attribute, got {} values",
                    groups
                )))
            }
            ConstraintKind::Custom => {
                return Err(Error::NotApplicable(
                    "grid search is defined only for the built-in parity/odds constraints".into(),
                ))
            }
        };
        GridSpec::new(dims)
    }

    /// Row-major cartesian product of the dimension values.
    pub fn enumerate(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self.dims.iter().map(GridDim::values).collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &v in axis {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

fn binary_group_probs(ts: &TrainingSet) -> Result<[f64; 2]> {
    if ts.num_groups() != 2 {
        return Err(Error::NotApplicable(format!(
            "needs a binary protected attribute, got {} values",
            ts.num_groups()
        )));
    }
    let p = ts.group_probs();
    if p.contains(&0.0) {
        return Err(Error::DegenerateData(
            "a protected group has no examples".into(),
        ));
    }
    Ok([p[0], p[1]])
}

/// Demographic-parity costs for a binary attribute: `C¹` shifts by `δ_a`
/// on the first group and by the balancing `δ_a' = −p_a·δ_a/p_a'` on the
/// second.
pub fn dp_adjust_costs(ts: &TrainingSet, delta_a: f64) -> Result<CostPairSet> {
    let [p_a, p_b] = binary_group_probs(ts)?;
    let deltas = [delta_a, -p_a * delta_a / p_b];
    let mut costs = CostPairSet::misclassification(&ts.labels);
    for (i, &g) in ts.protected.iter().enumerate() {
        costs.c1[i] += deltas[g];
    }
    Ok(costs)
}

/// Three-group demographic parity: two free adjustments, the third fixed
/// by `Σ_g p_g·δ_g = 0`.
pub fn dp_adjust_costs_three(ts: &TrainingSet, delta: [f64; 2]) -> Result<CostPairSet> {
    if ts.num_groups() != 3 {
        return Err(Error::NotApplicable(format!(
            "needs exactly three protected values, got {}",
            ts.num_groups()
        )));
    }
    let p = ts.group_probs();
    if p.contains(&0.0) {
        return Err(Error::DegenerateData(
            "a protected group has no examples".into(),
        ));
    }
    let deltas = [
        delta[0],
        delta[1],
        -(p[0] * delta[0] + p[1] * delta[1]) / p[2],
    ];
    let mut costs = CostPairSet::misclassification(&ts.labels);
    for (i, &g) in ts.protected.iter().enumerate() {
        costs.c1[i] += deltas[g];
    }
    Ok(costs)
}

/// Equalized-odds costs for a binary attribute: `C¹` shifts by
/// `δ_(A_i, Y_i)`, with the second group's adjustments balancing per label:
/// `δ_(a',y) = −p_(a,y)·δ_(a,y)/p_(a',y)`.
pub fn eo_adjust_costs(ts: &TrainingSet, delta_a0: f64, delta_a1: f64) -> Result<CostPairSet> {
    binary_group_probs(ts)?;
    let n = ts.len() as f64;
    let mut cell_counts = [[0usize; 2]; 2];
    for (&g, &y) in ts.protected.iter().zip(&ts.labels) {
        cell_counts[g][y as usize] += 1;
    }
    if cell_counts.iter().flatten().any(|&c| c == 0) {
        return Err(Error::DegenerateData(
            "every (group, label) cell must be nonempty for the odds grid".into(),
        ));
    }
    let p = |g: usize, y: usize| cell_counts[g][y] as f64 / n;
    let first = [delta_a0, delta_a1];
    let second = [
        -p(0, 0) * first[0] / p(1, 0),
        -p(0, 1) * first[1] / p(1, 1),
    ];
    let deltas = [first, second];
    let mut costs = CostPairSet::misclassification(&ts.labels);
    for (i, (&g, &y)) in ts.protected.iter().zip(&ts.labels).enumerate() {
        costs.c1[i] += deltas[g][y as usize];
    }
    Ok(costs)
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPointResult {
    /// Adjustment values in grid-dimension order.
    pub adjustments: Vec<f64>,
    pub classifier: BaseClassifier,
    pub train_error: f64,
    /// `max(0, max_k γ̂_k − ĉ_k)` on the training data.
    pub train_violation: f64,
    pub test_error: Option<f64>,
    pub test_violation: Option<f64>,
}

/// Fit one classifier per grid point and record its training tradeoff.
/// Results follow the grid's row-major enumeration order.
pub fn grid_search(
    ts: &TrainingSet,
    cs: &ConstraintSystem,
    spec: &GridSpec,
    learner: &LearnerConfig,
) -> Result<Vec<GridPointResult>> {
    let expected_dims = match (cs.kind(), ts.num_groups()) {
        (ConstraintKind::DemographicParity, 2) => 1,
        (ConstraintKind::DemographicParity, 3) => 2,
        (ConstraintKind::EqualizedOdds, 2) => 2,
        (kind, groups) => {
            return Err(Error::NotApplicable(format!(
                "grid search does not support {} constraints over {} protected values",
                kind, groups
            )))
        }
    };
    if spec.dims.len() != expected_dims {
        return Err(Error::Argument(format!(
            "grid has {} dimensions, constraint kind needs {}",
            spec.dims.len(),
            expected_dims
        )));
    }
    let mut out = Vec::new();
    for point in spec.enumerate() {
        let costs = match (cs.kind(), expected_dims) {
            (ConstraintKind::DemographicParity, 1) => dp_adjust_costs(ts, point[0])?,
            (ConstraintKind::DemographicParity, 2) => {
                dp_adjust_costs_three(ts, [point[0], point[1]])?
            }
            (ConstraintKind::EqualizedOdds, 2) => eo_adjust_costs(ts, point[0], point[1])?,
            _ => unreachable!(),
        };
        let samples = learners::cost_to_weighted(&costs);
        let classifier = learners::fit(learner, ts, &samples)?;
        let preds: Vec<f64> = classifier
            .predict(&ts.features)?
            .into_iter()
            .map(f64::from)
            .collect();
        let train_error = crate::evaluate::error_of(&preds, &ts.labels);
        let gamma = cs.gamma(&cs.moment_of(&preds)?);
        let train_violation = cs.max_violation(&gamma).max(0.0);
        out.push(GridPointResult {
            adjustments: point,
            classifier,
            train_error,
            train_violation,
            test_error: None,
            test_violation: None,
        });
    }
    Ok(out)
}

/// Indices of the points not dominated in `(error, violation)`, sorted by
/// violation ascending (then error, then original index). Exact ties are
/// all kept.
pub fn pareto_indices(points: &[(f64, f64)]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..points.len())
        .filter(|&i| {
            let (ei, vi) = points[i];
            !points.iter().any(|&(ej, vj)| {
                ej <= ei && vj <= vi && (ej < ei || vj < vi)
            })
        })
        .collect();
    keep.sort_by(|&a, &b| {
        points[a]
            .1
            .partial_cmp(&points[b].1)
            .unwrap()
            .then(points[a].0.partial_cmp(&points[b].0).unwrap())
            .then(a.cmp(&b))
    });
    keep
}

/// The non-dominated subset of grid results by training tradeoff.
pub fn select_pareto(results: &[GridPointResult]) -> Vec<GridPointResult> {
    let points: Vec<(f64, f64)> = results
        .iter()
        .map(|r| (r.train_error, r.train_violation))
        .collect();
    pareto_indices(&points)
        .into_iter()
        .map(|i| results[i].clone())
        .collect()
}
