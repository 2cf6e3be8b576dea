mod common;

use proptest::prelude::*;
use tactile_bci::swlda::{self, partial_f_pvalue, score, Dataset, SwldaModel, SwldaParams};

use common::{
    brute_force_stepwise, f1_survival_quadrature, random_small_dataset, separable_dataset,
};

#[test]
fn pvalue_matches_quadrature() {
    // oracle values: F = 4 on (1, 40) ~ 0.0522, F = 0.1 on (1, 10) ~ 0.758
    let q1 = f1_survival_quadrature(4.0, 40.0);
    let q2 = f1_survival_quadrature(0.1, 10.0);
    assert!((q1 - 0.0522).abs() < 5e-4, "{q1}");
    assert!((q2 - 0.758).abs() < 1e-3, "{q2}");
    let p1 = partial_f_pvalue(44.0, 40.0, 40).unwrap();
    let p2 = partial_f_pvalue(1.01, 1.0, 10).unwrap();
    assert!((p1 - q1).abs() < 1e-6, "{p1} vs {q1}");
    assert!((p2 - q2).abs() < 1e-6, "{p2} vs {q2}");
    for &(f, d) in &[(0.5, 3.0), (2.0, 15.0), (9.0, 100.0), (25.0, 7.0)] {
        let p = partial_f_pvalue(1.0 + f / d, 1.0, d as usize).unwrap();
        assert!(
            (p - f1_survival_quadrature(f, d)).abs() < 1e-6,
            "F={f} d={d}"
        );
    }
}

#[test]
fn stepwise_matches_brute_force_on_100_instances() {
    let params = SwldaParams {
        p_enter: 0.05,
        p_remove: 0.05,
        max_features: 60,
    };
    let mut removals_seen = 0;
    for seed in 0..100 {
        let data = random_small_dataset(seed);
        let model = swlda::train(&data, &params).unwrap();
        let (sel, w, b) = brute_force_stepwise(&data, 0.05, 0.05, 60);
        assert_eq!(model.selected, sel, "instance {seed}");
        for (a, e) in model.weights.iter().zip(&w) {
            assert!((a - e).abs() < 1e-8, "instance {seed}: {a} vs {e}");
        }
        assert!((model.intercept - b).abs() < 1e-8);
        if sel.len() < 6 && sel.contains(&0) != sel.contains(&5) {
            removals_seen += 1;
        }
    }
    assert!(removals_seen > 0);
}

#[test]
fn stepwise_matches_brute_force_with_default_thresholds() {
    for seed in 100..130 {
        let data = random_small_dataset(seed);
        let model = swlda::train(&data, &SwldaParams::default()).unwrap();
        let (sel, _, _) = brute_force_stepwise(&data, 0.10, 0.15, 60);
        assert_eq!(model.selected, sel, "instance {seed}");
    }
}

#[test]
fn separable_training_is_perfect() {
    for seed in 0..5 {
        let d = separable_dataset(240, 160, seed);
        let m = swlda::train(&d, &SwldaParams::default()).unwrap();
        assert_eq!(m.selected[0], 7);
        assert_eq!(m.training_accuracy(&d).unwrap(), 1.0);
        assert!(m.selected.len() <= 60);
    }
}

#[test]
fn training_is_deterministic() {
    let d = separable_dataset(120, 40, 3);
    let a = swlda::train(&d, &SwldaParams::default()).unwrap();
    let b = swlda::train(&d, &SwldaParams::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ties_break_to_lowest_index() {
    // features 2 and 4 are identical copies of the label signal
    let d = separable_dataset(60, 8, 9);
    let rows: Vec<Vec<f64>> = d
        .features()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r[2] = r[7];
            r[4] = r[7];
            r
        })
        .collect();
    let d = Dataset::new(rows, d.labels().to_vec()).unwrap();
    let m = swlda::train(&d, &SwldaParams::default()).unwrap();
    assert_eq!(m.selected[0], 2);
}

fn small_model(dim: usize) -> impl Strategy<Value = SwldaModel> {
    (
        proptest::sample::subsequence((0..dim).collect::<Vec<_>>(), 0..dim.min(6)),
        -5.0..5.0f64,
    )
        .prop_flat_map(move |(selected, intercept)| {
            let k = selected.len();
            (
                Just(selected),
                proptest::collection::vec(-3.0..3.0f64, k),
                Just(intercept),
            )
        })
        .prop_map(move |(selected, weights, intercept)| SwldaModel {
            selected,
            weights,
            intercept,
            p_enter: 0.1,
            p_remove: 0.15,
            max_features: 60,
            feature_dim: dim,
        })
}

proptest! {
    #[test]
    fn score_is_affine(
        model in small_model(12),
        u in proptest::collection::vec(-10.0..10.0f64, 12),
        v in proptest::collection::vec(-10.0..10.0f64, 12),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let s0 = |x: &[f64]| score(&model, x).unwrap() - model.intercept;
        let lhs = s0(&mix);
        let rhs = a * s0(&u) + b * s0(&v);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn decisions_survive_affine_feature_rescaling(
        seed in 0u64..1000,
        scales in proptest::collection::vec(0.1..10.0f64, 10),
        shifts in proptest::collection::vec(-50.0..50.0f64, 10),
    ) {
        let base = separable_dataset(90, 10, seed);
        // make feature 7 noisy so several features matter
        let noisy: Vec<Vec<f64>> = base.features().iter().enumerate().map(|(i, r)| {
            let mut r = r.clone();
            r[7] += r[i % 6] * 0.8;
            r
        }).collect();
        let data = Dataset::new(noisy.clone(), base.labels().to_vec()).unwrap();
        let rescale = |r: &Vec<f64>| -> Vec<f64> {
            r.iter().enumerate().map(|(j, v)| v * scales[j] + shifts[j]).collect()
        };
        let scaled = Dataset::new(noisy.iter().map(rescale).collect(), base.labels().to_vec()).unwrap();
        let m1 = swlda::train(&data, &SwldaParams::default()).unwrap();
        let m2 = swlda::train(&scaled, &SwldaParams::default()).unwrap();
        prop_assert_eq!(&m1.selected, &m2.selected);
        // argmax over groups of six candidates is unchanged
        for group in noisy.chunks(6) {
            let arg = |m: &SwldaModel, rows: &[Vec<f64>]| {
                rows.iter().map(|r| score(m, r).unwrap()).enumerate()
                    .max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
            };
            let scaled_rows: Vec<Vec<f64>> = group.iter().map(rescale).collect();
            prop_assert_eq!(arg(&m1, group), arg(&m2, &scaled_rows));
        }
    }
}
