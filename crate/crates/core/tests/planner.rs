use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use yoked::planner::*;

fn fit(k: usize) -> ScalingFit {
    ScalingFit::default_for(k).unwrap()
}

fn layout(dimension: usize, storage: Storage, d: usize, side: usize, blocks: usize) -> Layout {
    Layout { dimension, storage, d, side, blocks }
}

#[test]
fn prediction_examples() {
    let r = predict_rate(&fit(0), 11, 1.0, 1.0, 1.0);
    assert!((r - 3f64.powi(-11) / 20.0).abs() < 1e-20);
    assert!((r - 2.82e-7).abs() < 0.01e-7);
    let f1 = fit(1);
    let ratio = predict_rate(&f1, 12, 30.0, 1.0, 8.0) / predict_rate(&f1, 11, 30.0, 1.0, 8.0);
    assert!((ratio - 0.125).abs() < 1e-15);
    let f2 = fit(2);
    let ratio = predict_rate(&f2, 15, 200.0, 1.0, 64.0) / predict_rate(&f2, 15, 100.0, 1.0, 64.0);
    assert!((ratio - 16.0).abs() < 1e-12);
    assert_eq!(predict_rate(&fit(0), 3, 1e9, 10.0, 1.0), 1.0);
    assert!(ScalingFit::default_for(3).is_err());
    assert!(ScalingFit::new(1, 0.9, 1.0).is_err());
}

#[test]
fn fit_recovers_exact_data() {
    let truth = fit(1);
    let mut data = Vec::new();
    for d in [7, 9, 11, 13] {
        for (r_i, n) in [(30.0, 8.0), (60.0, 16.0)] {
            data.push(FitPoint { d, r_i, r_o: 10.0, n, rate: predict_rate(&truth, d, r_i, 10.0, n), weight: 1.0 });
        }
    }
    let f = fit_scaling(&data, 1).unwrap();
    assert!((f.lambda / 8.0 - 1.0).abs() < 0.01);
    assert!((f.prefactor * 500.0 - 1.0).abs() < 0.01);
}

#[test]
fn fit_tolerates_multiplicative_noise() {
    let truth = fit(1);
    let mut rng = Pcg64::seed_from_u64(3);
    let mut data = Vec::new();
    for d in [3, 5, 7, 9, 11] {
        for r_i in [20.0, 40.0, 80.0] {
            let noise = 0.8 + (1.25 - 0.8) * rng.random::<f64>();
            data.push(FitPoint { d, r_i, r_o: 1.0, n: 8.0, rate: predict_rate(&truth, d, r_i, 1.0, 8.0) * noise, weight: 1.0 });
        }
    }
    let f = fit_scaling(&data, 1).unwrap();
    assert!((f.lambda / 8.0 - 1.0).abs() < 0.1, "lambda {}", f.lambda);
}

#[test]
fn fit_rejects_degenerate_input() {
    let p = FitPoint { d: 5, r_i: 10.0, r_o: 1.0, n: 4.0, rate: 1e-3, weight: 1.0 };
    let e = fit_scaling(&[p, FitPoint { r_i: 20.0, ..p }], 1).unwrap_err();
    assert_eq!(e.kind(), "DegenerateData");
    assert!(fit_scaling(&[], 1).is_err());
    assert!(fit_scaling(&[FitPoint { rate: 0.0, ..p }], 1).is_err());
}

#[test]
fn footprint_examples() {
    let c = CostModel::default();
    let u = estimate_footprint(&layout(0, Storage::Cold, 25, 1, 1), &fit(0), &c).unwrap();
    assert_eq!(u.physical_qubits, 1352);
    assert_eq!(u.qubits_per_logical, 1352.0);

    let one = estimate_footprint(&layout(1, Storage::Cold, 9, 24, 8), &fit(1), &c).unwrap();
    assert_eq!(one.patches, 216);
    assert_eq!(one.logicals, 176);
    assert_eq!(one.cycle_rounds, 9 * (8 * 8 + 2));

    let two = estimate_footprint(&layout(2, Storage::Cold, 9, 8, 1), &fit(2), &c).unwrap();
    assert_eq!(two.patches, 81);
    assert_eq!(two.logicals, 34);
    assert_eq!(two.cycle_rounds, 25 * 9 * 8 + 4 * 9);

    let hot = estimate_footprint(&layout(1, Storage::Hot, 9, 24, 3), &fit(1), &c).unwrap();
    assert_eq!(hot.patches, 2 * 3 * 24);
    assert_eq!(hot.cycle_rounds, 450);

    let e = estimate_footprint(&layout(2, Storage::Cold, 9, 6, 1), &fit(2), &c).unwrap_err();
    assert_eq!(e.kind(), "DivisibilityError");
    assert!(estimate_footprint(&layout(1, Storage::Cold, 9, 24, 1), &fit(2), &c).is_err());
    assert!(estimate_footprint(&layout(1, Storage::Cold, 9, 2, 1), &fit(1), &c).is_err());
}

#[test]
fn unyoked_teraquop_plan() {
    let p = optimize_layout(1e-14, 0, Storage::Cold, &fit(0), &CostModel::default()).unwrap();
    assert_eq!(p.d, 27);
    assert_eq!(p.qubits_per_logical, 1568.0);
    // Independent scan for the smallest odd distance meeting the target.
    let d = (3..).step_by(2).find(|&d| 3f64.powi(-d) / 20.0 <= 1e-14).unwrap();
    assert_eq!(d, 27);
}

#[test]
fn yoked_plans_beat_unyoked() {
    let c = CostModel::default();
    let u = optimize_layout(1e-14, 0, Storage::Cold, &fit(0), &c).unwrap();
    let two = optimize_layout(1e-14, 2, Storage::Cold, &fit(2), &c).unwrap();
    assert!(two.qubits_per_logical < u.qubits_per_logical);
    assert!(two.logicals <= MAX_LOGICALS);
    let again = estimate_footprint(&layout(2, Storage::Cold, two.d, two.block[0], two.blocks), &fit(2), &c).unwrap();
    assert_eq!(again, two);
    assert!(again.predicted_rate <= 1e-14);
}

#[test]
fn loose_target_gives_smallest_plan() {
    let p = optimize_layout(0.9, 0, Storage::Cold, &fit(0), &CostModel::default()).unwrap();
    assert_eq!(p.d, 3);
    assert_eq!(p.physical_qubits, 32);
}

#[test]
fn impossible_target_is_infeasible() {
    let e = optimize_layout(1e-80, 0, Storage::Cold, &fit(0), &CostModel::default()).unwrap_err();
    assert_eq!(e.kind(), "Infeasible");
    assert!(optimize_layout(0.0, 0, Storage::Cold, &fit(0), &CostModel::default()).is_err());
    assert!(optimize_layout(1e-9, 2, Storage::Hot, &fit(2), &CostModel::default()).is_err());
}

#[test]
fn optimizer_matches_brute_force_scan() {
    let c = CostModel::default();
    for (k, s) in [(1, Storage::Cold), (1, Storage::Hot), (2, Storage::Cold)] {
        let best = optimize_layout(1e-12, k, s, &fit(k), &c).unwrap();
        let mut min = f64::INFINITY;
        for l in candidate_layouts(k, s) {
            let p = estimate_footprint(&l, &fit(k), &c).unwrap();
            if p.predicted_rate <= 1e-12 {
                min = min.min(p.qubits_per_logical);
            }
        }
        assert_eq!(best.qubits_per_logical, min);
    }
}

#[test]
fn csv_rows_have_every_column() {
    let p = optimize_layout(1e-10, 1, Storage::Cold, &fit(1), &CostModel::default()).unwrap();
    let row = csv_row(1e-10, &p);
    assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    assert!(row.starts_with("1e-10,1,cold,"));
}

proptest! {
    #[test]
    fn prediction_is_monotone(k in 0usize..3, d in 3usize..30, r in 1.0f64..500.0, n in 1.0f64..64.0) {
        let f = fit(k);
        let base = predict_rate(&f, d, r, 1.0, n);
        prop_assert!(predict_rate(&f, d, r * 1.5, 1.0, n) >= base);
        prop_assert!(predict_rate(&f, d, r, 2.0, n) >= base);
        prop_assert!(predict_rate(&f, d, r, 1.0, n + 1.0) >= base);
        prop_assert!(predict_rate(&f, d + 1, r, 1.0, n) <= base);
    }

    #[test]
    fn optimizer_output_round_trips(exp in 6i32..18, k in 0usize..3, hot in any::<bool>()) {
        let storage = if hot && k < 2 { Storage::Hot } else { Storage::Cold };
        let target = 10f64.powi(-exp);
        let c = CostModel::default();
        let p = optimize_layout(target, k, storage, &fit(k), &c).unwrap();
        let side = p.block.first().copied().unwrap_or(1);
        let again = estimate_footprint(&layout(k, storage, p.d, side, p.blocks), &fit(k), &c).unwrap();
        prop_assert!(again.predicted_rate <= target);
        prop_assert_eq!(again, p);
    }
}
