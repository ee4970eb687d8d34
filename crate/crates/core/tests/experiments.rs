use qcap_core::channels::{rocket_sampled, tensor};
use qcap_core::experiments::*;
use qcap_core::infomeasures::coherent_information;
use qcap_core::qmat::random::rng_from_seed;
use qcap_core::{Exec, Tolerance};
use rand::Rng;

#[test]
fn rocket_erasure_at_full_erasure_is_minus_log_d() {
    let input = build_private_input(2).unwrap();
    let e = erasure_branch(2, 1.0).unwrap();
    let r = rocket_sampled(2, 4, 3).unwrap();
    let q = coherent_information(&tensor(&r, &e), &input, &PRIVATE_CHANNEL_INPUTS).unwrap();
    assert!((q.value + 1.0).abs() < 1e-9);
}

#[test]
fn sampled_mixture_equals_each_branch() {
    let input = build_private_input(2).unwrap();
    let e = erasure_branch(2, 0.3).unwrap();
    let r = rocket_sampled(2, 4, 9).unwrap();
    let q = coherent_information(&tensor(&e, &r), &input, &PRIVATE_CHANNEL_INPUTS).unwrap();
    for i in 0..4 {
        assert!((q.components[&format!("branch_{i}")] - q.value).abs() < 1e-9);
    }
}

#[test]
fn region_delta_matches_achievable_when_converse_vanishes() {
    let mut rng = rng_from_seed(99);
    for _ in 0..200 {
        let q: f64 = rng.random();
        let p: f64 = 0.5 + 0.5 * rng.random::<f64>();
        let expected = q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p));
        assert_eq!(region_delta(q, p, RegionMode::Asymptotic), expected);
    }
}

#[test]
fn region_boundaries_are_non_positive() {
    for i in 0..=100 {
        let t = i as f64 / 100.0;
        assert!(region_delta(0.0, t, RegionMode::Asymptotic) <= 0.0);
        assert!(region_delta(t, 1.0, RegionMode::Asymptotic) <= 0.0);
    }
}

#[test]
fn region_scan_maximum_near_centre() {
    let grid = region_scan(101, RegionMode::Asymptotic, Exec::default()).unwrap();
    let best = grid.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.delta));
    let centre = grid.iter().find(|r| r.q == 0.5 && r.p == 0.5).unwrap();
    assert_eq!(centre.delta, 0.125);
    assert!(best >= 0.125);
}

#[test]
fn env_branches_for_several_dimensions() {
    for d in 2..=5 {
        let v = env_branches(d, Exec::default()).unwrap();
        let log_d = (d as f64).log2();
        assert!((v[0] - env_n1n1_value(d)).abs() < 1e-9, "d={d}");
        assert!((v[1] - 2.0 * log_d).abs() < 1e-9);
        assert!((v[2] - 2.0 * log_d).abs() < 1e-9);
        assert!(v[3].abs() < 1e-9);
    }
}

#[test]
fn env_even_dimension_is_reported_without_total() {
    let r = env_experiment(&EnvParams { d: 4, p: 0.5 }).unwrap();
    assert!(r.pass);
    assert!(!r.analytic.contains_key("rate"));
    assert!((r.numeric["n1n1"] - 1.0).abs() < 1e-9);
}

#[test]
fn functional_beats_erasure_capacity_for_nonconvex_triple() {
    let params = PrivateParams {
        d: 2,
        q: 0.5,
        p: 0.5,
        n_samples: 4,
        seed: 42,
    };
    let r = functional_experiment(&params, Tolerance::default()).unwrap();
    assert_eq!(r.analytic["erasure_private"], 0.0);
    assert!(r.numeric["functional"] > 0.0);
    assert!(r.pass);
}

#[test]
fn reports_are_deterministic_across_execution_modes() {
    let params = PrivateParams {
        d: 2,
        q: 0.4,
        p: 0.2,
        n_samples: 3,
        seed: 5,
    };
    let mut a = private_experiment_with(&params, Tolerance::default(), Exec::Parallel).unwrap();
    let mut b = private_experiment_with(&params, Tolerance::default(), Exec::Sequential).unwrap();
    a.runtime_ms = 0.0;
    b.runtime_ms = 0.0;
    assert_eq!(a, b);
}
