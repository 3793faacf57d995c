//! Linear-moment fairness constraint systems.
//!
//! A constraint system materializes a family of conditional moments
//! `μ_j(h) = Ê[g_j(X, A, Y, h(X)) | E_j]` together with a linear system
//! `M μ ≤ c + ε`. Each moment is stored as its event's member rows plus the
//! value of `g_j` at both possible predictions, which makes cost
//! construction downstream a pure table lookup. Builders are provided for
//! demographic parity and equalized odds; arbitrary systems can be loaded
//! from a JSON description.

use serde::Deserialize;
use std::path::Path;

use crate::data::{Matrix, TrainingSet};
use crate::error::{Error, Result};

/// Which family of constraints a system encodes.
/// Per-moment `g` tables at predictions 0 and 1, aligned with members.
type GTables = (Vec<Vec<f64>>, Vec<Vec<f64>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
pub enum ConstraintKind {
    DemographicParity,
    EqualizedOdds,
    Custom,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintKind::DemographicParity => write!(f, "dp"),
            ConstraintKind::EqualizedOdds => write!(f, "eo"),
            ConstraintKind::Custom => write!(f, "custom"),
        }
    }
}

/// Conditional moment values `μ̂`, aligned with the system's moment index.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector(pub Vec<f64>);

/// Constraint values `γ̂ = M μ̂`, aligned with the constraint index.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaVector(pub Vec<f64>);

/// A materialized linear-moment constraint system.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    kind: ConstraintKind,
    n: usize,
    moment_ids: Vec<String>,
    /// Per-moment member rows (ascending).
    members: Vec<Vec<u32>>,
    /// `g_j` at prediction 0, aligned with `members`.
    g0: Vec<Vec<f64>>,
    /// `g_j` at prediction 1, aligned with `members`.
    g1: Vec<Vec<f64>>,
    constraint_ids: Vec<String>,
    m: Matrix,
    c: Vec<f64>,
    eps: Vec<f64>,
    counts: Vec<usize>,
    probs: Vec<f64>,
    warnings: Vec<String>,
}

impl ConstraintSystem {
    /// Demographic parity: one moment per protected group plus one for all
    /// rows, and a `(+, −)` inequality pair per group tying the group's
    /// selection rate to the overall rate.
    pub fn demographic_parity(ts: &TrainingSet) -> Result<Self> {
        let n = ts.len();
        let mut moment_ids = Vec::new();
        let mut members: Vec<Vec<u32>> = Vec::new();
        let mut group_cols = Vec::new(); // moment column per group index, if kept
        for (g, value) in ts.attribute_values.iter().enumerate() {
            let rows: Vec<u32> = (0..n as u32)
                .filter(|&i| ts.protected[i as usize] == g)
                .collect();
            if rows.is_empty() {
                group_cols.push(None);
                continue;
            }
            group_cols.push(Some(moment_ids.len()));
            moment_ids.push(value.clone());
            members.push(rows);
        }
        let star_col = moment_ids.len();
        moment_ids.push("*".to_string());
        members.push((0..n as u32).collect());

        let num_j = moment_ids.len();
        let mut constraint_ids = Vec::new();
        let mut m_rows: Vec<Vec<f64>> = Vec::new();
        for (g, value) in ts.attribute_values.iter().enumerate() {
            let Some(col) = group_cols[g] else { continue };
            let mut plus = vec![0.0; num_j];
            plus[col] = 1.0;
            plus[star_col] = -1.0;
            let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
            constraint_ids.push(format!("{}:+", value));
            m_rows.push(plus);
            constraint_ids.push(format!("{}:-", value));
            m_rows.push(minus);
        }
        Self::assemble(
            ConstraintKind::DemographicParity,
            n,
            moment_ids,
            members,
            None,
            constraint_ids,
            m_rows,
            Vec::new(),
        )
    }

    /// Equalized odds: moments per `(group, label)` cell plus per-label
    /// aggregates, with a `(+, −)` pair per nonempty cell. Empty cells drop
    /// their moment and constraints with a warning; a label class that is
    /// absent outright is an error.
    pub fn equalized_odds(ts: &TrainingSet) -> Result<Self> {
        let n = ts.len();
        let mut warnings = Vec::new();
        for y in [0u8, 1u8] {
            if !ts.labels.contains(&y) {
                return Err(Error::DegenerateData(format!(
                    "label class {} is absent; equalized odds needs both classes",
                    y
                )));
            }
        }
        let mut moment_ids = Vec::new();
        let mut members: Vec<Vec<u32>> = Vec::new();
        // column per (group, label), if kept
        let mut cell_cols = vec![[None, None]; ts.num_groups()];
        for (g, value) in ts.attribute_values.iter().enumerate() {
            for y in [0u8, 1u8] {
                let rows: Vec<u32> = (0..n as u32)
                    .filter(|&i| ts.protected[i as usize] == g && ts.labels[i as usize] == y)
                    .collect();
                if rows.is_empty() {
                    warnings.push(format!(
                        "dropped equalized-odds cell (A={}, Y={}): no examples",
                        value, y
                    ));
                    continue;
                }
                cell_cols[g][y as usize] = Some(moment_ids.len());
                moment_ids.push(format!("{}|y={}", value, y));
                members.push(rows);
            }
        }
        let mut star_cols = [0usize; 2];
        for y in [0u8, 1u8] {
            star_cols[y as usize] = moment_ids.len();
            moment_ids.push(format!("*|y={}", y));
            members.push(
                (0..n as u32)
                    .filter(|&i| ts.labels[i as usize] == y)
                    .collect(),
            );
        }

        let num_j = moment_ids.len();
        let mut constraint_ids = Vec::new();
        let mut m_rows: Vec<Vec<f64>> = Vec::new();
        for (g, value) in ts.attribute_values.iter().enumerate() {
            for y in [0u8, 1u8] {
                let Some(col) = cell_cols[g][y as usize] else {
                    continue;
                };
                let mut plus = vec![0.0; num_j];
                plus[col] = 1.0;
                plus[star_cols[y as usize]] = -1.0;
                let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
                constraint_ids.push(format!("{}|y={}:+", value, y));
                m_rows.push(plus);
                constraint_ids.push(format!("{}|y={}:-", value, y));
                m_rows.push(minus);
            }
        }
        Self::assemble(
            ConstraintKind::EqualizedOdds,
            n,
            moment_ids,
            members,
            None,
            constraint_ids,
            m_rows,
            warnings,
        )
    }

    /// Load a custom system from the JSON text schema (see the book's
    /// constraints chapter): a list of moments with member rows and `g`
    /// tables, plus `(M, c)` rows.
    pub fn from_file(path: impl AsRef<Path>, ts: &TrainingSet) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text, ts.len())
    }

    /// Parse a custom system from JSON, validating against `n` rows.
    pub fn from_json(text: &str, n: usize) -> Result<Self> {
        let parsed: FileSystem = serde_json::from_str(text)
            .map_err(|e| Error::Artifact(format!("constraint file: {}", e)))?;
        if parsed.moments.is_empty() {
            return Err(Error::Artifact("constraint file declares no moments".into()));
        }
        let mut moment_ids = Vec::new();
        let mut members = Vec::new();
        let mut g0 = Vec::new();
        let mut g1 = Vec::new();
        for m in parsed.moments {
            if m.members.is_empty() {
                return Err(Error::Artifact(format!("moment '{}' has no members", m.id)));
            }
            if m.g0.len() != m.members.len() || m.g1.len() != m.members.len() {
                return Err(Error::Artifact(format!(
                    "moment '{}': g tables must match member count",
                    m.id
                )));
            }
            if m.members.iter().any(|&i| i as usize >= n) {
                return Err(Error::Artifact(format!(
                    "moment '{}': member row out of range (n = {})",
                    m.id, n
                )));
            }
            if m.g0.iter().chain(m.g1.iter()).any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::Artifact(format!(
                    "moment '{}': g values must lie in [0,1]",
                    m.id
                )));
            }
            let mut rows = m.members;
            rows.sort_unstable();
            moment_ids.push(m.id);
            members.push(rows);
            g0.push(m.g0);
            g1.push(m.g1);
        }
        let num_j = moment_ids.len();
        let mut constraint_ids = Vec::new();
        let mut m_rows = Vec::new();
        let mut c = Vec::new();
        for k in parsed.constraints {
            if k.m.len() != num_j {
                return Err(Error::Artifact(format!(
                    "constraint '{}': M row has {} entries for {} moments",
                    k.id,
                    k.m.len(),
                    num_j
                )));
            }
            if k.m.iter().any(|v| !v.is_finite()) || !k.c.is_finite() {
                return Err(Error::Artifact(format!(
                    "constraint '{}': non-finite coefficient",
                    k.id
                )));
            }
            constraint_ids.push(k.id);
            m_rows.push(k.m);
            c.push(k.c);
        }
        if constraint_ids.is_empty() {
            return Err(Error::Artifact("constraint file declares no constraints".into()));
        }
        let mut cs = Self::assemble(
            ConstraintKind::Custom,
            n,
            moment_ids,
            members,
            Some((g0, g1)),
            constraint_ids,
            m_rows,
            Vec::new(),
        )?;
        cs.c = c;
        Ok(cs)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: ConstraintKind,
        n: usize,
        moment_ids: Vec<String>,
        members: Vec<Vec<u32>>,
        g_tables: Option<GTables>,
        constraint_ids: Vec<String>,
        m_rows: Vec<Vec<f64>>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("constraint system over empty data".into()));
        }
        let counts: Vec<usize> = members.iter().map(Vec::len).collect();
        debug_assert!(counts.iter().all(|&c| c >= 1));
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let (g0, g1) = g_tables.unwrap_or_else(|| {
            // Built-in systems use g_j(·) = h(X): 0 at prediction 0, 1 at 1.
            let g0 = members.iter().map(|m| vec![0.0; m.len()]).collect();
            let g1 = members.iter().map(|m| vec![1.0; m.len()]).collect();
            (g0, g1)
        });
        let num_k = constraint_ids.len();
        let m = Matrix::from_rows(&m_rows)?;
        Ok(ConstraintSystem {
            kind,
            n,
            moment_ids,
            members,
            g0,
            g1,
            constraint_ids,
            m,
            c: vec![0.0; num_k],
            eps: vec![0.0; num_k],
            counts,
            probs,
            warnings,
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    /// Number of rows the system was built over.
    pub fn num_rows(&self) -> usize {
        self.n
    }

    pub fn num_moments(&self) -> usize {
        self.moment_ids.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraint_ids.len()
    }

    pub fn moment_ids(&self) -> &[String] {
        &self.moment_ids
    }

    pub fn constraint_ids(&self) -> &[String] {
        &self.constraint_ids
    }

    /// Member rows of moment `j` (ascending row indices).
    pub fn members(&self, j: usize) -> &[u32] {
        &self.members[j]
    }

    /// `g_j` tables for moment `j` at predictions 0 and 1, aligned with
    /// [`ConstraintSystem::members`].
    pub fn g_tables(&self, j: usize) -> (&[f64], &[f64]) {
        (&self.g0[j], &self.g1[j])
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Event counts `n_j`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Event probabilities `p_j = n_j / n`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The effective bounds `ĉ = c + ε`.
    pub fn c_hat(&self) -> Vec<f64> {
        self.c.iter().zip(&self.eps).map(|(c, e)| c + e).collect()
    }

    /// Overwrite the slack vector; entries must be nonnegative and match
    /// the constraint count.
    pub fn set_epsilon(&mut self, eps: Vec<f64>) -> Result<()> {
        if eps.len() != self.num_constraints() {
            return Err(Error::Argument(format!(
                "{} slack values for {} constraints",
                eps.len(),
                self.num_constraints()
            )));
        }
        if eps.iter().any(|&e| !e.is_finite() || e < 0.0) {
            return Err(Error::Argument("slack values must be nonnegative".into()));
        }
        self.eps = eps;
        Ok(())
    }

    /// Set the same slack on every constraint.
    pub fn set_uniform_epsilon(&mut self, eps: f64) -> Result<()> {
        self.set_epsilon(vec![eps; self.num_constraints()])
    }

    /// Slack defaults scaled by event counts: `ε_k = C' Σ_j |M_kj| n_j^(−α)`.
    pub fn default_epsilon(&self, c_prime: f64, alpha: f64) -> Vec<f64> {
        (0..self.num_constraints())
            .map(|k| {
                c_prime
                    * (0..self.num_moments())
                        .map(|j| self.m.get(k, j).abs() * (self.counts[j] as f64).powf(-alpha))
                        .sum::<f64>()
            })
            .collect()
    }

    /// Empirical conditional moments of a prediction vector (entries may be
    /// fractional; the moment is the exact linear extension).
    pub fn moment_of(&self, predictions: &[f64]) -> Result<MomentVector> {
        if predictions.len() != self.n {
            return Err(Error::Argument(format!(
                "{} predictions for {} rows",
                predictions.len(),
                self.n
            )));
        }
        let mut mu = Vec::with_capacity(self.num_moments());
        for j in 0..self.num_moments() {
            let mut sum = 0.0;
            for (idx, &i) in self.members[j].iter().enumerate() {
                let p = predictions[i as usize];
                sum += (1.0 - p) * self.g0[j][idx] + p * self.g1[j][idx];
            }
            mu.push(sum / self.counts[j] as f64);
        }
        Ok(MomentVector(mu))
    }

    /// `γ̂ = M μ̂`.
    pub fn gamma(&self, mu: &MomentVector) -> GammaVector {
        debug_assert_eq!(mu.0.len(), self.num_moments());
        let mut out = Vec::with_capacity(self.num_constraints());
        for k in 0..self.num_constraints() {
            let mut acc = 0.0;
            for j in 0..self.num_moments() {
                let coef = self.m.get(k, j);
                if coef != 0.0 {
                    acc += coef * mu.0[j];
                }
            }
            out.push(acc);
        }
        GammaVector(out)
    }

    /// Largest signed violation `max_k (γ̂_k − ĉ_k)`; nonpositive means all
    /// constraints hold.
    pub fn max_violation(&self, gamma: &GammaVector) -> f64 {
        gamma
            .0
            .iter()
            .zip(self.c_hat())
            .map(|(g, ch)| g - ch)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Upper bound on `ρ = max_h ‖M μ̂(h) − ĉ‖_∞`.
    ///
    /// The parity/odds builders admit the bound 2 whenever every slack is at
    /// most 1; otherwise the generic bound `max_k (Σ_j |M_kj| + |ĉ_k|)`
    /// applies because every empirical moment lies in `[0, 1]`.
    pub fn rho_bound(&self) -> f64 {
        let builtin = matches!(
            self.kind,
            ConstraintKind::DemographicParity | ConstraintKind::EqualizedOdds
        );
        if builtin && self.eps.iter().all(|&e| e <= 1.0) {
            return 2.0;
        }
        (0..self.num_constraints())
            .map(|k| {
                let row_l1: f64 = (0..self.num_moments()).map(|j| self.m.get(k, j).abs()).sum();
                row_l1 + (self.c[k] + self.eps[k]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Deserialize)]
struct FileSystem {
    moments: Vec<FileMoment>,
    constraints: Vec<FileConstraint>,
}

#[derive(Deserialize)]
struct FileMoment {
    id: String,
    members: Vec<u32>,
    g0: Vec<f64>,
    g1: Vec<f64>,
}

#[derive(Deserialize)]
struct FileConstraint {
    id: String,
    m: Vec<f64>,
    c: f64,
}
