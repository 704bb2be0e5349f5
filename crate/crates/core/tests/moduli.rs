use approx::assert_relative_eq;
use instanton_weld::fields::{AdForm, Degree, GroupElement, Grid};
use instanton_weld::moduli::*;
use instanton_weld::welding::GluingParameter;
use proptest::prelude::*;
use rand::SeedableRng;

#[test]
fn worst_case_recurrence_stays_below_ten_eps_k() {
    let state = RecurrenceState { epsilon: 0.01, k: 1.0, alpha0: 0.01, s0: 1.0 };
    let r = recurrence_verify(&state, RecurrenceMode::WorstCase).unwrap();
    assert!(r.pass);
    assert!(r.max_alpha <= r.bound);
    assert!(r.max_alpha - state.alpha0 <= proof_checkpoint(0.01, 1.0));
    assert!(r.steps < MAX_STEPS);
}

#[test]
fn proof_series_converges_to_the_checkpoint() {
    let (eps, k) = (0.01, 2.0);
    assert_relative_eq!(proof_series(eps, k, 200), proof_checkpoint(eps, k), max_relative = 1e-12);
    assert!(proof_checkpoint(eps, k) <= 7.0 * eps * k);
}

#[test]
fn inadmissible_states_are_rejected() {
    let bad = [
        RecurrenceState { epsilon: 0.02, k: 1.0, alpha0: 0.0, s0: 0.0 },
        RecurrenceState { epsilon: 0.01, k: 1.0, alpha0: 0.02, s0: 0.0 },
        RecurrenceState { epsilon: 0.01, k: 1.0, alpha0: 0.0, s0: 2.0 },
        RecurrenceState { epsilon: 0.01, k: 0.0, alpha0: 0.0, s0: 0.0 },
    ];
    for s in bad {
        assert!(recurrence_verify(&s, RecurrenceMode::WorstCase).is_err(), "{s:?}");
    }
}

#[test]
fn recurrence_state_uses_capital_k_in_json() {
    let s: RecurrenceState = serde_json::from_str(r#"{"epsilon":0.01,"K":1.0,"alpha0":0.0,"s0":0.5}"#).unwrap();
    assert_eq!(s.k, 1.0);
}

#[test]
fn fuzz_is_deterministic() {
    assert_eq!(recurrence_fuzz(200, 9, true).unwrap(), recurrence_fuzz(200, 9, true).unwrap());
}

#[test]
fn geodesic_path_hits_its_endpoints() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let a = GluingParameter::random(3, &mut rng);
    let b = GluingParameter::random(3, &mut rng);
    let path = geodesic_path(&a, &b).unwrap();
    assert!(separation(&path.at(0.0), &a).unwrap() <= 1e-12);
    assert!(separation(&path.at(1.0), &b).unwrap() <= 1e-12);
    assert!(geodesic_path(&a, &GluingParameter::identity(2)).is_err());
}

#[test]
fn antipodal_geodesic_is_well_defined() {
    let a = GluingParameter::identity(1);
    let b = GluingParameter { rho: vec![GroupElement::MINUS_IDENTITY] };
    let mid = geodesic_path(&a, &b).unwrap().at(0.5);
    assert!(mid.validate(1).is_ok());
    assert!(chordal(&mid.rho[0], &a.rho[0]) > 1.0);
}

#[test]
fn central_chain_closes_for_an_even_number_of_flips() {
    assert_eq!(central_gauge_chain(&[true, true, false, false])[4], GroupElement::IDENTITY);
    assert_eq!(central_gauge_chain(&[true, false, false, false])[4], GroupElement::MINUS_IDENTITY);
}

#[test]
fn holonomy_of_the_zero_connection_is_trivial() {
    let a = AdForm::zeros(Grid::new(12, 3.0), Degree::One);
    assert_eq!(loop_holonomy(&a, [1.5; 4]), GroupElement::IDENTITY);
}

#[test]
fn holonomy_trace_detects_curvature() {
    let g = Grid::new(16, 4.0);
    let a = instanton_weld::fields::bpst_background(g, [2.0; 4], 0.5, None);
    let t = loop_holonomy(&a, [2.0; 4]).trace();
    assert!(t < 1.9, "trace {t}");
}

#[test]
fn noise_floor_is_never_below_roundoff() {
    let fp = Fingerprint { profiles: vec![[1.0; PROFILE_BINS]], holonomy: vec![[2.0; 3]] };
    assert!(noise_floor(&[0.0], &fp) > 0.0);
    assert_eq!(noise_floor(&[1e-3], &fp), 1e-3);
    assert_eq!(fp.distance(&fp).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn sampled_runs_never_exceed_the_bound(eps in 0.0f64..=0.01, k in 1e-3f64..1e3, a in 0.0f64..=1.0, s in 0.0f64..=1.0, seed in any::<u64>()) {
        let state = RecurrenceState { epsilon: eps, k, alpha0: a * eps * k, s0: s * k };
        let worst = recurrence_verify(&state, RecurrenceMode::WorstCase).unwrap();
        let sampled = recurrence_verify(&state, RecurrenceMode::Sampled { seed }).unwrap();
        prop_assert!(worst.pass && sampled.pass);
        prop_assert!(sampled.max_alpha <= worst.max_alpha * (1.0 + 1e-12));
    }

    #[test]
    fn separation_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = GluingParameter::random(4, &mut rng);
        let b = GluingParameter::random(4, &mut rng);
        let k = separation(&a, &b).unwrap();
        prop_assert_eq!(k, separation(&b, &a).unwrap());
        prop_assert!((0.0..=2.0).contains(&k));
    }
}
