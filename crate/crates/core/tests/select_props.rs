use std::collections::HashSet;

use dbinds_core::select::score::combine;
use dbinds_core::select::{assemble_combination, cross_enhance, forest_importance, variance_filter, CrossConfig, ForestConfig, Strategy as Combo};
use dbinds_core::FeatureMatrix;
use proptest::prelude::*;

fn columns(cols: usize, rows: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop_oneof![
            prop::collection::vec(-3.0f64..3.0, rows),
            (-3.0f64..3.0).prop_map(move |v| vec![v; rows]),
        ],
        cols,
    )
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{}.f{i}", ["energy", "texture", "correlation"][i % 3])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variance_filter_is_idempotent(cols in columns(8, 12)) {
        let kept = variance_filter(&cols, 1e-10);
        let sub: Vec<Vec<f64>> = kept.iter().map(|&j| cols[j].clone()).collect();
        prop_assert_eq!(variance_filter(&sub, 1e-10), (0..sub.len()).collect::<Vec<_>>());
    }

    #[test]
    fn combined_score_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, d in 0.0f64..0.5) {
        prop_assert!(combine((a + d).min(1.0), b) >= combine(a, b));
        prop_assert!(combine(a, (b + d).min(1.0)) >= combine(a, b));
    }

    #[test]
    fn cross_count_and_unique_names(top in 2usize..7, rows in 1usize..6, seed in any::<u64>()) {
        let f = 8;
        let data: Vec<f64> = (0..rows * f).map(|i| ((i as u64 ^ seed) % 23) as f64 - 11.0).collect();
        let m = FeatureMatrix::new(names(f), rows, data).unwrap();
        let imp: Vec<f64> = (0..f).map(|i| ((i as u64).wrapping_mul(seed | 1) % 17) as f64).collect();
        let cfg = CrossConfig { top_n: top, ..Default::default() };
        let (out, terms) = cross_enhance(&m, &imp, &cfg).unwrap();
        prop_assert_eq!(terms.len(), 3 * top * (top - 1) / 2);
        prop_assert_eq!(out.cols(), f + terms.len());
        let unique: HashSet<&String> = out.names().iter().collect();
        prop_assert_eq!(unique.len(), out.cols());
    }

    #[test]
    fn assembly_is_pure(imp in prop::collection::vec(0.0f64..1.0, 12), k in 1usize..12, which in 0usize..4) {
        let n = names(12);
        let s: Combo = ["all", "module:texture", "modules:energy,correlation", "fuzzy:f1,texture"][which].parse().unwrap();
        let first = assemble_combination(&s, &n, &imp).unwrap();
        prop_assert_eq!(&first, &assemble_combination(&s, &n, &imp).unwrap());
        let top = assemble_combination(&Combo::TopK(k), &n, &imp).unwrap();
        prop_assert_eq!(top.len(), k);
        prop_assert_eq!(top, assemble_combination(&Combo::TopK(k), &n, &imp).unwrap());
    }

    #[test]
    fn forest_is_reproducible(cols in columns(5, 20), seed in any::<u64>()) {
        let y: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let cfg = ForestConfig { n_trees: 15, seed, ..Default::default() };
        let a = forest_importance(&cols, &y, &cfg);
        let b = forest_importance(&cols, &y, &cfg);
        prop_assert_eq!(a.importances.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.importances.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let s: f64 = a.importances.iter().sum();
        prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
    }
}

#[test]
fn score_weights_are_recoverable() {
    assert_eq!(combine(1.0, 0.0), 0.4);
    assert_eq!(combine(0.0, 1.0), 0.6);
}
