mod common;

use std::f64::consts::PI;

use cquant::distortion::{build_partition, distortion_value, gradient};
use cquant::solver::{solve, solve_sequence, stationarity_check, stationarity_in, SolverConfig};
use cquant::{Codebook, Family, UniformMeasure};
use proptest::prelude::*;

fn quick() -> SolverConfig {
    SolverConfig {
        starts: 4,
        ..Default::default()
    }
}

#[test]
fn clamped_sequence_matches_formula() {
    let fam = Family::Clamped;
    let seq = solve_sequence(&fam.measure(), &fam.constraint(), fam.window(), 10, &quick()).unwrap();
    for r in &seq[2..] {
        let n = r.n as f64;
        let want = (25.0 * n * n - 50.0 * n + 26.0) / (24.0 * (n - 1.0).powi(2));
        assert!((r.value - want).abs() < 1e-8, "n={}: {} vs {want}", r.n, r.value);
    }
}

#[test]
fn concentric_unit_circle_sequence_matches_formula() {
    let fam = Family::CircleCircle { radius: 1.0 };
    let seq = solve_sequence(&fam.measure(), &fam.constraint(), fam.window(), 12, &quick()).unwrap();
    for r in &seq[2..] {
        let n = r.n as f64;
        let want = 2.0 - (2.0 * n / PI) * (PI / n).sin();
        assert!((r.value - want).abs() < 1e-8, "n={}: {} vs {want}", r.n, r.value);
    }
}

#[test]
fn sequences_are_monotone_and_full_rank() {
    for fam in [Family::OneSided, Family::Chord, Family::CircleCircle { radius: 0.5 }] {
        let seq = solve_sequence(&fam.measure(), &fam.constraint(), fam.window(), 10, &quick()).unwrap();
        for w in seq.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        for r in &seq {
            assert_eq!(r.effective_n, r.n, "{:?} n={}", fam.id(), r.n);
        }
    }
}

#[test]
fn same_seed_same_result() {
    let fam = Family::Chord;
    let cfg = SolverConfig {
        seed: 99,
        ..quick()
    };
    let a = solve(&fam.measure(), &fam.constraint(), fam.window(), 6, &cfg).unwrap();
    let b = solve(&fam.measure(), &fam.constraint(), fam.window(), 6, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn result_invariants_and_json_shape() {
    let fam = Family::OneSided;
    let r = solve(&fam.measure(), &fam.constraint(), fam.window(), 9, &quick()).unwrap();
    assert!((distortion_value(&fam.measure(), &r.codebook) - r.value).abs() <= 1e-12);
    assert!(r.start_values.iter().all(|&v| r.value <= v + 1e-12));
    let json = serde_json::to_value(&r).unwrap();
    for key in ["n", "effective_n", "params", "points", "value", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["points"][0].as_array().unwrap().len(), 2);
}

#[test]
fn clamped_optimum_is_stationary() {
    let fam = Family::Clamped;
    let cf = fam.closed_form(5).unwrap();
    let s = stationarity_in(&fam.measure(), &cf.codebook, fam.window(), 1e-6);
    let d = &s.derivatives;
    for &x in &d[1..4] {
        assert!(x.abs() < 1e-6, "{d:?}");
    }
    // End points sit on the window bounds with derivatives pointing outward.
    assert!(d[0] >= -1e-6 && -d[4] >= -1e-6, "{d:?}");
    assert!(s.max_violation < 1e-6);
}

#[test]
fn concentric_optimum_is_stationary() {
    let fam = Family::CircleCircle { radius: 2.0 };
    let cf = fam.closed_form(6).unwrap();
    assert!(stationarity_check(&fam.measure(), &cf.codebook) < 1e-6);
}

#[test]
fn solver_output_is_stationary() {
    let fam = Family::Chord;
    let r = solve(&fam.measure(), &fam.constraint(), fam.window(), 5, &quick()).unwrap();
    assert!(stationarity_check(&fam.measure(), &r.codebook) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn envelope_gradient_matches_differences(
        support in common::segment(),
        (constraint, fr) in (common::curve(), prop::collection::vec(0.02..0.98f64, 1..8)),
    ) {
        let measure = UniformMeasure::new(support);
        let (lo, hi) = constraint.param_range();
        let cb = Codebook::new(constraint, fr.iter().map(|f| lo + f * (hi - lo)).collect()).unwrap();
        let g = gradient(&measure, &cb, &build_partition(&measure, &cb));
        let h = 1e-6;
        for i in 0..cb.len() {
            let at = |dt: f64| {
                let mut p = cb.params().to_vec();
                p[i] += dt;
                distortion_value(&measure, &Codebook::new(constraint, p).unwrap())
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6, "i={i}: fd {fd} vs {}", g[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn segment_line_solver_matches_closed_form(f in common::admissible_segment_line(), n in 2usize..=12) {
        let fam = Family::SegmentLine(f);
        let cf = fam.closed_form(n).unwrap();
        let r = solve(&fam.measure(), &fam.constraint(), fam.window(), n, &quick()).unwrap();
        prop_assert!((r.value - cf.value).abs() <= 1e-6 * cf.value);
        prop_assert!(r.value >= cf.value - 1e-9);
        prop_assert_eq!(r.effective_n, n);
    }
}
