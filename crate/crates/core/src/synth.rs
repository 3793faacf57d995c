//! Deterministic synthetic datasets with injected group disparity.
//!
//! These generators back the test suite, the book's runnable examples, and
//! the bundled demo fixture. All draws come from a counter-seeded ChaCha
//! stream, so a given `(n, seed)` always produces the same bytes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Matrix, TrainingSet};

/// Two groups, one numeric feature. Labels depend on the feature and the
/// group's base rate differs by `disparity`, so the unconstrained fit
/// exhibits a demographic-parity gap.
pub fn group_shifted(n: usize, minority_frac: f64, disparity: f64, seed: u64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.8).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut protected = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let g = usize::from(rng.random::<f64>() < minority_frac);
        let base = 0.5 - disparity * g as f64;
        let y = u8::from(rng.random::<f64>() < base);
        let x = 1.5 * f64::from(y) - 0.6 * g as f64 + noise.sample(&mut rng);
        rows.push(vec![x, f64::from(g == 0), f64::from(g == 1)]);
        protected.push(g);
        labels.push(y);
    }
    ensure_both_classes(&mut labels);
    ensure_both_groups(&mut protected, &mut rows);
    let mut ts = TrainingSet::from_parts(
        Matrix::from_rows(&rows).unwrap(),
        protected,
        labels,
        vec!["x".into(), "grp=a".into(), "grp=b".into()],
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    ts.protected_block = Some((1, 2));
    ts.indicator_columns = vec![false, true, true];
    ts.categorical_values = vec![("grp".into(), vec!["a".into(), "b".into()])];
    ts
}

/// Income-style generator: four numeric features, a binary group with a
/// 1/3 minority share, and labels from a logistic model whose intercept
/// favors the majority group. Mimics the shape of census income tasks at
/// desk scale.
pub fn adult_mimic(n: usize, seed: u64) -> TrainingSet {
    let (rows, protected, labels) = adult_mimic_rows(n, seed);
    let encoded: Vec<Vec<f64>> = rows
        .iter()
        .zip(&protected)
        .map(|(r, &g)| {
            vec![
                r[0],
                r[1],
                r[2],
                r[3],
                f64::from(g == 0),
                f64::from(g == 1),
            ]
        })
        .collect();
    let mut ts = TrainingSet::from_parts(
        Matrix::from_rows(&encoded).unwrap(),
        protected,
        labels,
        vec![
            "age".into(),
            "edu".into(),
            "hours".into(),
            "capital".into(),
            "grp=m".into(),
            "grp=f".into(),
        ],
        vec!["m".into(), "f".into()],
    )
    .unwrap();
    ts.protected_block = Some((4, 2));
    ts.indicator_columns = vec![false, false, false, false, true, true];
    ts.categorical_values = vec![("grp".into(), vec!["m".into(), "f".into()])];
    ts
}

/// The same generator rendered as a raw CSV (numeric columns, a string
/// group column, a 0/1 label column) for exercising the ingestion path.
pub fn adult_mimic_csv(n: usize, seed: u64) -> String {
    let (rows, protected, labels) = adult_mimic_rows(n, seed);
    let mut out = String::from("age,edu,hours,capital,grp,income\n");
    for i in 0..n {
        let g = if protected[i] == 0 { "m" } else { "f" };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rows[i][0], rows[i][1], rows[i][2], rows[i][3], g, labels[i]
        ));
    }
    out
}

#[allow(clippy::type_complexity)]
fn adult_mimic_rows(n: usize, seed: u64) -> (Vec<[f64; 4]>, Vec<usize>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut protected = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let g = usize::from(rng.random::<f64>() < 1.0 / 3.0);
        let z1 = std_normal.sample(&mut rng);
        let z2 = std_normal.sample(&mut rng);
        let z3 = std_normal.sample(&mut rng);
        let z4 = std_normal.sample(&mut rng);
        let score = 1.2 * z1 + 0.8 * z2 - 0.6 * z3 + 0.4 * z4 + 1.1 * f64::from(g == 0) - 1.0;
        let u: f64 = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12);
        let logistic_noise = (u / (1.0 - u)).ln();
        let y = u8::from(score + 0.7 * logistic_noise > 0.0);
        // readable magnitudes, still affine in the latent draws
        rows.push([
            38.0 + 12.0 * z1,
            10.0 + 2.5 * z2,
            40.0 + 10.0 * z3,
            1000.0 * z4,
        ]);
        protected.push(g);
        labels.push(y);
    }
    let mut groups_fixed = protected.clone();
    let mut dummy_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    ensure_both_classes(&mut labels);
    ensure_both_groups(&mut groups_fixed, &mut dummy_rows);
    (rows, groups_fixed, labels)
}

fn ensure_both_classes(labels: &mut [u8]) {
    for class in [0u8, 1u8] {
        if !labels.contains(&class) {
            if let Some(last) = labels.last_mut() {
                *last = class;
            }
        }
    }
}

fn ensure_both_groups(protected: &mut [usize], _rows: &mut [Vec<f64>]) {
    for g in [0usize, 1usize] {
        if !protected.contains(&g) {
            if let Some(first) = protected.first_mut() {
                *first = g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{dp_violation, error_of};
    use crate::learners::{cost_to_weighted, fit, LearnerConfig};
    use crate::reduction::CostPairSet;

    #[test]
    fn generators_are_deterministic() {
        let a = adult_mimic(200, 7);
        let b = adult_mimic(200, 7);
        assert_eq!(a.features, b.features);
        assert_eq!(a.labels, b.labels);
        let c = adult_mimic(200, 8);
        assert_ne!(a.features, c.features);
        assert_eq!(adult_mimic_csv(50, 3), adult_mimic_csv(50, 3));
    }

    #[test]
    fn unconstrained_fit_shows_disparity() {
        let mut ts = adult_mimic(2000, 1);
        ts.standardize();
        let costs = CostPairSet::misclassification(&ts.labels);
        let h = fit(
            &LearnerConfig::logistic(),
            &ts,
            &cost_to_weighted(&costs),
        )
        .unwrap();
        let preds: Vec<f64> = h
            .predict(&ts.features)
            .unwrap()
            .into_iter()
            .map(f64::from)
            .collect();
        let err = error_of(&preds, &ts.labels);
        let gap = dp_violation(&preds, &ts.protected);
        assert!(err < 0.35, "error {}", err);
        assert!(gap > 0.08, "disparity {}", gap);
    }

    #[test]
    fn csv_variant_has_both_label_tokens() {
        let text = adult_mimic_csv(100, 2);
        assert!(text.lines().count() == 101);
        assert!(text.lines().skip(1).any(|l| l.ends_with(",0")));
        assert!(text.lines().skip(1).any(|l| l.ends_with(",1")));
    }
}
