//! Property tests for the algebraic identities the pipeline relies on.

mod common;

use common::{d4, d6, one_dim};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use evenodds::data::TrainingSet;
use evenodds::evaluate::{dp_violation, error_of, RandomizedClassifier};
use evenodds::learners::{cost_to_weighted, fit, BaseClassifier, LearnerConfig, Polarity};
use evenodds::moments::ConstraintSystem;
use evenodds::reduction::{best_lambda, compute_costs, lagrangian, CostPairSet, LambdaVector};

/// A small dataset where every group and both labels are represented.
fn arb_dataset() -> impl Strategy<Value = TrainingSet> {
    (2usize..=3, 8usize..=30).prop_flat_map(|(groups, n)| {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(0..groups, n),
            prop::collection::vec(0..2u8, n),
        )
            .prop_map(move |(xs, mut protected, mut labels)| {
                // every (group, label) cell nonempty so the closed-form
                // oracles need no drop handling
                let mut i = 0;
                for g in 0..groups {
                    for y in 0..2u8 {
                        protected[i] = g;
                        labels[i] = y;
                        i += 1;
                    }
                }
                one_dim(&xs, &protected, &labels, groups)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_of_is_linear(ts in arb_dataset(), alpha in 0.0..=1.0f64, seed in 0u64..1000) {
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1: Vec<f64> = (0..ts.len()).map(|_| rng.random()).collect();
        let p2: Vec<f64> = (0..ts.len()).map(|_| rng.random()).collect();
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let mu_mix = cs.moment_of(&mix).unwrap();
        let mu1 = cs.moment_of(&p1).unwrap();
        let mu2 = cs.moment_of(&p2).unwrap();
        for j in 0..cs.num_moments() {
            let expect = alpha * mu1.0[j] + (1.0 - alpha) * mu2.0[j];
            prop_assert!((mu_mix.0[j] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_of_matches_brute_force_conditional_means(ts in arb_dataset()) {
        let cs = ConstraintSystem::equalized_odds(&ts).unwrap();
        let preds: Vec<f64> = (0..ts.len()).map(|i| f64::from(ts.features.get(i, 0) >= 0.0)).collect();
        let mu = cs.moment_of(&preds).unwrap();
        for (j, id) in cs.moment_ids().iter().enumerate() {
            // recompute the conditional mean row by row from the id
            let (sel_g, sel_y): (Option<usize>, u8) = {
                let (head, tail) = id.split_once("|y=").unwrap();
                let y = tail.parse::<u8>().unwrap();
                if head == "*" {
                    (None, y)
                } else {
                    let g = ts.attribute_values.iter().position(|v| v == head).unwrap();
                    (Some(g), y)
                }
            };
            let mut total = 0.0;
            let mut count = 0usize;
            for (i, &pred) in preds.iter().enumerate() {
                if ts.labels[i] == sel_y && sel_g.is_none_or(|g| ts.protected[i] == g) {
                    total += pred;
                    count += 1;
                }
            }
            prop_assert!(count > 0);
            prop_assert!((mu.0[j] - total / count as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_predictions_respect_rho_bound(ts in arb_dataset(), seed in 0u64..1000) {
        let mut cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        cs.set_uniform_epsilon(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let preds: Vec<f64> = (0..ts.len()).map(|_| f64::from(rng.random::<bool>())).collect();
        let gamma = cs.gamma(&cs.moment_of(&preds).unwrap());
        let c_hat = cs.c_hat();
        let inf_norm = gamma.0.iter().zip(&c_hat).map(|(g, c)| (g - c).abs()).fold(0.0f64, f64::max);
        prop_assert!(inf_norm <= cs.rho_bound() + 1e-12);
    }

    #[test]
    fn reduction_identity_holds(n in 4usize..40, seed in 0u64..1000) {
        // Σ_i [h_i·C¹_i + (1−h_i)·C⁰_i] − Σ_i min(C⁰_i, C¹_i)
        //   = Σ_i W_i·1{h_i ≠ target_i}
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let c1: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let costs = CostPairSet { c0: c0.clone(), c1: c1.clone() };
        let samples = cost_to_weighted(&costs);
        for _ in 0..20 {
            let h: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
            let objective: f64 = (0..n)
                .map(|i| f64::from(h[i]) * c1[i] + f64::from(1 - h[i]) * c0[i])
                .sum();
            let min_sum: f64 = (0..n).map(|i| c0[i].min(c1[i])).sum();
            let weighted: f64 = samples
                .iter()
                .map(|s| if h[s.index] != s.target { s.weight } else { 0.0 })
                .sum();
            prop_assert!((objective - min_sum - weighted).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_fit_beats_every_family_member(n in 4usize..50, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
        let ts = one_dim(&xs, &vec![0; n], &labels, 1);
        let samples: Vec<_> = (0..n)
            .map(|i| evenodds::learners::WeightedSample { index: i, target: labels[i], weight: weights[i] })
            .collect();
        let fitted = fit(&LearnerConfig::Threshold1d, &ts, &samples).unwrap();
        let err_of = |h: &BaseClassifier| -> f64 {
            let preds = h.predict(&ts.features).unwrap();
            (0..n).map(|i| if preds[i] != labels[i] { weights[i] } else { 0.0 }).sum()
        };
        let fitted_err = err_of(&fitted);
        // independent family enumeration
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        let mut cands = vec![sorted[0] - 1.0, sorted[sorted.len() - 1] + 1.0];
        for w in sorted.windows(2) {
            cands.push((w[0] + w[1]) / 2.0);
        }
        for &t in &cands {
            for polarity in [Polarity::Ge, Polarity::Lt] {
                let h = BaseClassifier::Threshold1d { feature: 0, threshold: t, polarity };
                prop_assert!(err_of(&h) >= fitted_err - 1e-9);
            }
        }
    }

    #[test]
    fn lagrangian_is_bilinear(ts in arb_dataset(), alpha in 0.0..=1.0f64, seed in 0u64..1000) {
        let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1: Vec<f64> = (0..ts.len()).map(|_| rng.random()).collect();
        let p2: Vec<f64> = (0..ts.len()).map(|_| rng.random()).collect();
        let k = cs.num_constraints();
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let budget = raw.iter().sum::<f64>() + 1.0;
        let lam = LambdaVector::new(raw.clone(), budget).unwrap();

        // linear in the prediction vector
        let e1 = error_of(&p1, &ts.labels);
        let e2 = error_of(&p2, &ts.labels);
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let emix = alpha * e1 + (1.0 - alpha) * e2;
        let lhs = lagrangian(&mix, emix, &cs, &lam).unwrap();
        let rhs = alpha * lagrangian(&p1, e1, &cs, &lam).unwrap()
            + (1.0 - alpha) * lagrangian(&p2, e2, &cs, &lam).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);

        // linear in λ
        let scaled: Vec<f64> = raw.iter().map(|v| v * alpha).collect();
        let lam_scaled = LambdaVector::new(scaled, budget).unwrap();
        let zero = LambdaVector::zeros(k, budget).unwrap();
        let base = lagrangian(&p1, e1, &cs, &zero).unwrap();
        let full = lagrangian(&p1, e1, &cs, &lam).unwrap();
        let part = lagrangian(&p1, e1, &cs, &lam_scaled).unwrap();
        prop_assert!((part - (base + alpha * (full - base))).abs() < 1e-10);
    }

    #[test]
    fn ensemble_error_and_violation_are_mixtures(ts in arb_dataset(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..=10usize);
        let mut members = Vec::new();
        for idx in 0..m {
            let threshold = rng.random_range(-1.5..1.5);
            let polarity = if rng.random::<bool>() { Polarity::Ge } else { Polarity::Lt };
            // distinct thresholds keep members unique
            members.push((
                BaseClassifier::Threshold1d { feature: 0, threshold: threshold + idx as f64 * 1e-9, polarity },
                rng.random_range(0.1..1.0),
            ));
        }
        let q = RandomizedClassifier::merged(members.clone()).unwrap();
        let expected = q.predict_expected(&ts.features).unwrap();
        let direct = error_of(&expected, &ts.labels);
        let mixed: f64 = q
            .members()
            .iter()
            .map(|(h, w)| {
                let preds: Vec<f64> = h.predict(&ts.features).unwrap().into_iter().map(f64::from).collect();
                w * error_of(&preds, &ts.labels)
            })
            .sum();
        prop_assert!((direct - mixed).abs() < 1e-12);
    }

    #[test]
    fn split_is_a_partition(n in 10usize..80, frac in 0.1..0.9f64, seed in 0u64..500) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let ts = one_dim(&xs, &vec![0; n], &labels, 1);
        let (tr, te) = ts.split(frac, seed).unwrap();
        prop_assert_eq!(tr.len(), (frac * n as f64).ceil() as usize);
        let mut seen: Vec<f64> = (0..tr.len()).map(|i| tr.features.get(i, 0)).collect();
        seen.extend((0..te.len()).map(|i| te.features.get(i, 0)));
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(seen, xs);
    }
}

#[test]
fn best_lambda_maximizes_over_random_duals() {
    for ts in [d4(), d6()] {
        let mut cs = ConstraintSystem::demographic_parity(&ts).unwrap();
        cs.set_uniform_epsilon(0.05).unwrap();
        let budget = 7.0;
        let preds: Vec<f64> = (0..ts.len())
            .map(|i| f64::from(ts.features.get(i, 0) >= 0.5))
            .collect();
        let err = error_of(&preds, &ts.labels);
        let best = best_lambda(&preds, &cs, budget).unwrap();
        let best_value = lagrangian(&preds, err, &cs, &best).unwrap();
        let k = cs.num_constraints();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            // random point of the budget-scaled simplex (with slack mass)
            let mut draw: Vec<f64> = (0..k + 1).map(|_| -rng.random::<f64>().ln()).collect();
            let total: f64 = draw.iter().sum();
            draw.iter_mut().for_each(|v| *v *= budget / total);
            let lam = LambdaVector::new(draw[..k].to_vec(), budget).unwrap();
            let value = lagrangian(&preds, err, &cs, &lam).unwrap();
            assert!(value <= best_value + 1e-12, "{} > {}", value, best_value);
        }
    }
}

#[test]
fn generic_costs_match_dp_closed_form() {
    let ts = d4();
    let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
    let probs = ts.group_probs();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..3.0)).collect();
        let lam = LambdaVector::new(raw.clone(), 13.0).unwrap();
        let generic = compute_costs(&ts, &cs, &lam).unwrap();
        // collapsed multipliers: λ_a = λ_(a,+) − λ_(a,−)
        let signed = [raw[0] - raw[1], raw[2] - raw[3]];
        let total: f64 = signed.iter().sum();
        for i in 0..ts.len() {
            let g = ts.protected[i];
            let c0 = f64::from(ts.labels[i]);
            let c1 = f64::from(1 - ts.labels[i]) + signed[g] / probs[g] - total;
            assert!((generic.c0[i] - c0).abs() < 1e-12);
            assert!((generic.c1[i] - c1).abs() < 1e-12);
        }
    }
}

#[test]
fn generic_costs_match_eo_closed_form() {
    let ts = d6();
    let cs = ConstraintSystem::equalized_odds(&ts).unwrap();
    let n = ts.len() as f64;
    // cell and label probabilities, straight from the data
    let mut cell = [[0.0f64; 2]; 2];
    let mut label = [0.0f64; 2];
    for i in 0..ts.len() {
        cell[ts.protected[i]][ts.labels[i] as usize] += 1.0 / n;
        label[ts.labels[i] as usize] += 1.0 / n;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..3.0)).collect();
        let lam = LambdaVector::new(raw.clone(), 30.0).unwrap();
        let generic = compute_costs(&ts, &cs, &lam).unwrap();
        // K order: a|y=0±, a|y=1±, b|y=0±, b|y=1± → signed λ_(g,y)
        let signed = [[raw[0] - raw[1], raw[2] - raw[3]], [raw[4] - raw[5], raw[6] - raw[7]]];
        for i in 0..ts.len() {
            let (g, y) = (ts.protected[i], ts.labels[i] as usize);
            let c0 = f64::from(ts.labels[i]);
            let c1 = f64::from(1 - ts.labels[i]) + signed[g][y] / cell[g][y]
                - (signed[0][y] + signed[1][y]) / label[y];
            assert!((generic.c0[i] - c0).abs() < 1e-12);
            assert!((generic.c1[i] - c1).abs() < 1e-12, "{} vs {}", generic.c1[i], c1);
        }
    }
}

#[test]
fn dp_violation_agrees_with_constraint_system() {
    let ts = d6();
    let cs = ConstraintSystem::demographic_parity(&ts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let preds: Vec<f64> = (0..ts.len()).map(|_| rng.random()).collect();
        let metric = dp_violation(&preds, &ts.protected);
        let gamma = cs.gamma(&cs.moment_of(&preds).unwrap());
        // with ĉ = 0 the largest signed violation is the metric
        let system = cs.max_violation(&gamma);
        assert!((metric - system).abs() < 1e-12);
    }
}
