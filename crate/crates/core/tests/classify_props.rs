use dbinds_core::classify::{auc, objective, predict_proba, roc_curve, select_threshold, tpe_optimize, best_index, train_gbdt, Dimension, GbdtParams, SearchSpace, TpeConfig};
use dbinds_core::FeatureMatrix;
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec(((0u8..10).prop_map(|v| v as f64 / 10.0), any::<bool>()), 2..20)
        .prop_filter("both classes", |v| v.iter().any(|x| x.1) && v.iter().any(|x| !x.1))
        .prop_map(|v| v.into_iter().unzip())
}

fn tpr_at(scores: &[f64], y: &[bool], theta: f64) -> f64 {
    let pos = y.iter().filter(|&&b| b).count() as f64;
    scores.iter().zip(y).filter(|(&s, &b)| b && s >= theta).count() as f64 / pos
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_law(acc in 0.0f64..1.0, gdr in 0.0f64..1.0, tau in 0.0f64..1.0) {
        let j = objective(acc, gdr, tau);
        if gdr < tau {
            prop_assert_eq!(j, 0.0);
        } else {
            prop_assert_eq!(j, 0.7 * acc + 0.3 * gdr);
        }
    }

    #[test]
    fn threshold_meets_rate_when_possible((scores, y) in scored(), tau in 0.0f64..1.0) {
        let roc = roc_curve(&scores, &y).unwrap();
        let theta = select_threshold(&roc, tau);
        let mut candidates: Vec<f64> = scores.clone();
        candidates.sort_by(|a, b| b.total_cmp(a));
        candidates.dedup();
        let feasible: Vec<f64> = candidates.iter().copied().filter(|&t| tpr_at(&scores, &y, t) >= tau).collect();
        if let Some(&first) = feasible.first() {
            prop_assert!(tpr_at(&scores, &y, theta) >= tau);
            prop_assert_eq!(theta, first);
        }
    }

    #[test]
    fn roc_monotone_and_auc_matches_pairs((scores, y) in scored()) {
        let roc = roc_curve(&scores, &y).unwrap();
        prop_assert!(roc.tpr.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(roc.fpr.windows(2).all(|w| w[0] <= w[1]));
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &yi) in y.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                if yi && !yj {
                    pairs += 1.0;
                    wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        prop_assert!((auc(&roc) - wins / pairs).abs() < 1e-12);
    }

    #[test]
    fn gbdt_ignores_uniform_weight_scaling(c in prop::sample::select(vec![0.5, 2.0, 4.0, 0.25]), seed in any::<u64>()) {
        let n = 40;
        let data: Vec<f64> = (0..n * 2).map(|i| (((i as u64).wrapping_mul(seed | 1) >> 7) % 101) as f64 / 10.0).collect();
        let x = FeatureMatrix::new(vec!["a".into(), "b".into()], n, data).unwrap();
        let y: Vec<bool> = (0..n).map(|i| x.get(i, 0) + 0.3 * x.get(i, 1) > 6.0).collect();
        prop_assume!(y.iter().any(|&b| b) && y.iter().any(|&b| !b));
        let w: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let ws: Vec<f64> = w.iter().map(|v| v * c).collect();
        let p = GbdtParams { num_trees: 20, feature_fraction: 0.5, bagging_fraction: 0.8, ..Default::default() };
        let a = predict_proba(&train_gbdt(&x, &y, &w, &p, seed).unwrap(), &x).unwrap();
        let b = predict_proba(&train_gbdt(&x, &y, &ws, &p, seed).unwrap(), &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tpe_reports_the_argmax(seed in any::<u64>()) {
        let space = SearchSpace { dims: vec![Dimension::Uniform { name: "x".into(), lo: -1.0, hi: 1.0 }] };
        let h = tpe_optimize(&space, 25, &TpeConfig::default(), seed, |_, x| Ok((3.0 * x[0]).sin())).unwrap();
        let b = best_index(&h).unwrap();
        prop_assert!(h.iter().all(|o| o.value <= h[b].value));
    }
}
