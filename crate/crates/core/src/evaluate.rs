//! Randomized-classifier semantics, disparity metrics, model artifacts.
//!
//! A randomized classifier is a distribution over base classifiers; its
//! error and conditional moments are the corresponding mixtures of the
//! members' values, so every metric here accepts fractional prediction
//! vectors (the expected predictions of the mixture). Sampled prediction
//! exists for deployment realism; reported metrics use expected
//! predictions, which removes sampling noise.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, Matrix, Standardization};
use crate::error::{Error, Result};
use crate::learners::BaseClassifier;

/// A weighted ensemble over base classifiers (weights positive, summing to
/// one, members distinct).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedClassifier {
    members: Vec<(BaseClassifier, f64)>,
}

impl RandomizedClassifier {
    /// Validate and wrap an ensemble. Weights must be positive and sum to
    /// 1 within 1e-12; members must be pairwise distinct.
    pub fn new(members: Vec<(BaseClassifier, f64)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Argument("ensemble has no members".into()));
        }
        if members.iter().any(|(_, w)| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Argument("ensemble weights must be positive".into()));
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!(
                "ensemble weights sum to {}, expected 1",
                total
            )));
        }
        for (i, (a, _)) in members.iter().enumerate() {
            if members[i + 1..].iter().any(|(b, _)| a == b) {
                return Err(Error::Argument("duplicate ensemble member".into()));
            }
        }
        Ok(RandomizedClassifier { members })
    }

    /// Wrap a single classifier as a degenerate mixture.
    pub fn single(h: BaseClassifier) -> Self {
        RandomizedClassifier {
            members: vec![(h, 1.0)],
        }
    }

    /// Merge duplicates by summing weights, drop zero-weight members, and
    /// normalize. Member order follows first appearance.
    pub fn merged(raw: Vec<(BaseClassifier, f64)>) -> Result<Self> {
        let mut members: Vec<(BaseClassifier, f64)> = Vec::new();
        for (h, w) in raw {
            if w == 0.0 {
                continue;
            }
            if let Some(slot) = members.iter_mut().find(|(m, _)| *m == h) {
                slot.1 += w;
            } else {
                members.push((h, w));
            }
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Argument("ensemble has no positive weight".into()));
        }
        for m in &mut members {
            m.1 /= total;
        }
        Self::new(members)
    }

    pub fn members(&self) -> &[(BaseClassifier, f64)] {
        &self.members
    }

    /// Expected predictions of the mixture, entrywise in `[0, 1]`.
    pub fn predict_expected(&self, features: &Matrix) -> Result<Vec<f64>> {
        let mut out = vec![0.0; features.rows()];
        for (h, w) in &self.members {
            let preds = h.predict(features)?;
            for (o, p) in out.iter_mut().zip(preds) {
                *o += w * f64::from(p);
            }
        }
        Ok(out)
    }

    /// Hard predictions with one member drawn independently per row.
    pub fn predict_sampled(&self, features: &Matrix, seed: u64) -> Result<Vec<u8>> {
        // check dimensions up front so failures do not depend on the draw
        for (h, _) in &self.members {
            h.predict(features)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(features.rows());
        for i in 0..features.rows() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = &self.members[self.members.len() - 1].0;
            for (h, w) in &self.members {
                acc += w;
                if u < acc {
                    chosen = h;
                    break;
                }
            }
            out.push(chosen.predict_row(features.row(i)));
        }
        Ok(out)
    }
}

/// Empirical misclassification error of (possibly fractional) predictions:
/// `(1/n) Σ pred_i (1 − Y_i) + (1 − pred_i) Y_i`.
pub fn error_of(predictions: &[f64], labels: &[u8]) -> f64 {
    debug_assert_eq!(predictions.len(), labels.len());
    let n = predictions.len() as f64;
    predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| p * f64::from(1 - y) + (1.0 - p) * f64::from(y))
        .sum::<f64>()
        / n
}

/// Demographic-parity disparity: `max_a |mean(pred | A=a) − mean(pred)|`
/// over the groups present.
pub fn dp_violation(predictions: &[f64], protected: &[usize]) -> f64 {
    debug_assert_eq!(predictions.len(), protected.len());
    let n = predictions.len();
    let groups = protected.iter().max().map_or(0, |&g| g + 1);
    let mut sums = vec![0.0; groups];
    let mut counts = vec![0usize; groups];
    let mut total = 0.0;
    for (&p, &g) in predictions.iter().zip(protected) {
        sums[g] += p;
        counts[g] += 1;
        total += p;
    }
    let overall = total / n as f64;
    let mut worst: f64 = 0.0;
    for g in 0..groups {
        if counts[g] > 0 {
            worst = worst.max((sums[g] / counts[g] as f64 - overall).abs());
        }
    }
    worst
}

/// Equalized-odds disparity:
/// `max_{a,y} |mean(pred | A=a, Y=y) − mean(pred | Y=y)|` over nonempty
/// cells. Errors if a label class is absent entirely.
pub fn eo_violation(predictions: &[f64], protected: &[usize], labels: &[u8]) -> Result<f64> {
    debug_assert_eq!(predictions.len(), protected.len());
    debug_assert_eq!(predictions.len(), labels.len());
    for y in [0u8, 1u8] {
        if !labels.contains(&y) {
            return Err(Error::DegenerateData(format!(
                "label class {} absent; equalized-odds disparity undefined",
                y
            )));
        }
    }
    let groups = protected.iter().max().map_or(0, |&g| g + 1);
    let mut cell_sums = vec![[0.0; 2]; groups];
    let mut cell_counts = vec![[0usize; 2]; groups];
    let mut label_sums = [0.0; 2];
    let mut label_counts = [0usize; 2];
    for i in 0..predictions.len() {
        let (g, y) = (protected[i], labels[i] as usize);
        cell_sums[g][y] += predictions[i];
        cell_counts[g][y] += 1;
        label_sums[y] += predictions[i];
        label_counts[y] += 1;
    }
    let mut worst: f64 = 0.0;
    for y in 0..2 {
        let base = label_sums[y] / label_counts[y] as f64;
        for g in 0..groups {
            if cell_counts[g][y] > 0 {
                worst = worst.max((cell_sums[g][y] / cell_counts[g][y] as f64 - base).abs());
            }
        }
    }
    Ok(worst)
}

/// One ensemble member as stored in a model artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMember {
    pub weight: f64,
    pub classifier: BaseClassifier,
}

/// On-disk model: a header describing how the features were produced plus
/// the ensemble. JSON with shortest round-trip floats, so save/load is
/// bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub learner_kind: String,
    pub feature_names: Vec<String>,
    pub standardization: Option<Standardization>,
    /// Schema of the raw file the model was trained from, when known;
    /// lets evaluation re-encode new raw files the same way.
    pub schema: Option<DatasetSchema>,
    pub members: Vec<ArtifactMember>,
}

pub const ARTIFACT_VERSION: u32 = 1;

impl ModelArtifact {
    pub fn new(
        learner_kind: impl Into<String>,
        feature_names: Vec<String>,
        standardization: Option<Standardization>,
        schema: Option<DatasetSchema>,
        ensemble: &RandomizedClassifier,
    ) -> Self {
        ModelArtifact {
            format_version: ARTIFACT_VERSION,
            learner_kind: learner_kind.into(),
            feature_names,
            standardization,
            schema,
            members: ensemble
                .members()
                .iter()
                .map(|(h, w)| ArtifactMember {
                    weight: *w,
                    classifier: h.clone(),
                })
                .collect(),
        }
    }

    /// Rebuild the ensemble, revalidating the stored weights.
    pub fn classifier(&self) -> Result<RandomizedClassifier> {
        RandomizedClassifier::new(
            self.members
                .iter()
                .map(|m| (m.classifier.clone(), m.weight))
                .collect(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Artifact(format!("serialize model: {}", e)))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let artifact: ModelArtifact = serde_json::from_str(&text)
            .map_err(|e| Error::Artifact(format!("model file: {}", e)))?;
        if artifact.format_version != ARTIFACT_VERSION {
            return Err(Error::Artifact(format!(
                "unsupported model format version {}",
                artifact.format_version
            )));
        }
        Ok(artifact)
    }
}
