//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use evenodds::data::{Matrix, TrainingSet};

/// 4 rows, two groups: (x=0, a, 0), (x=0, a, 0), (x=1, b, 1), (x=0, b, 1).
pub fn d4() -> TrainingSet {
    TrainingSet::from_parts(
        Matrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0], vec![0.0]]).unwrap(),
        vec![0, 0, 1, 1],
        vec![0, 0, 1, 1],
        vec!["x".into()],
        vec!["a".into(), "b".into()],
    )
    .unwrap()
}

/// 6 rows, all four (group, label) cells nonempty:
/// (0,a,0), (1,a,1), (0,b,0), (1,b,1), (1,a,0), (0,b,1).
pub fn d6() -> TrainingSet {
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

/// A 1-d dataset from explicit columns.
pub fn one_dim(xs: &[f64], protected: &[usize], labels: &[u8], groups: usize) -> TrainingSet {
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let values: Vec<String> = (0..groups).map(|g| format!("g{}", g)).collect();
    TrainingSet::from_parts(
        Matrix::from_rows(&rows).unwrap(),
        protected.to_vec(),
        labels.to_vec(),
        vec!["x".into()],
        values,
    )
    .unwrap()
}
