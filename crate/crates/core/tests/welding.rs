mod common;

use common::bundled;
use instanton_weld::cli::Scenario;
use instanton_weld::fields::GroupElement;
use instanton_weld::welding::*;
use instanton_weld::WeldError;
use proptest::prelude::*;
use rand::SeedableRng;

fn flat_scenario() -> Scenario {
    let mut s = bundled();
    s.blocks = vec!["flat".into(); 4];
    s.rho = instanton_weld::cli::RhoSpec::Identity;
    s
}

#[test]
fn all_flat_identity_chain_converges_at_pass_zero() {
    let s = flat_scenario();
    let run = weld(s.chain().unwrap(), s.rho().unwrap(), 5, 1e-6, &WeldConfig::default()).unwrap();
    assert!(run.trace.converged);
    assert_eq!(run.trace.records.len(), 1);
    assert!(run.trace.delta0() <= run.trace.floor.max(0.0));
    assert!(run.connection.a.iter().all(|a| a.data.iter().all(|v| *v == 0.0)));
}

#[test]
fn periodic_windows_must_be_even() {
    let mut s = bundled();
    s.blocks = vec!["flat".into(); 3];
    assert!(s.validate().is_err());
    assert!(s.chain().is_err());
}

#[test]
fn open_chains_have_one_neck_fewer() {
    let mut s = flat_scenario();
    s.periodic = false;
    s.blocks = vec!["flat".into(); 3];
    let cfg = s.chain().unwrap();
    assert_eq!(cfg.necks(), 2);
    assert_eq!(cfg.neck_blocks(1), (1, 2));
}

#[test]
fn gluing_parameters_are_validated() {
    let bad = GluingParameter { rho: vec![GroupElement([2.0, 0.0, 0.0, 0.0])] };
    assert!(matches!(bad.validate(1), Err(WeldError::Precondition(_))));
    assert!(GluingParameter::identity(2).validate(3).is_err());
}

#[test]
fn flat_neighbours_make_the_parameter_irrelevant() {
    let s = flat_scenario();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let rho = GluingParameter::random(4, &mut rng);
    let run = weld(s.chain().unwrap(), rho, 2, 1e-6, &WeldConfig::default()).unwrap();
    assert!(run.trace.converged);
    assert_eq!(run.trace.delta0(), 0.0);
}

#[test]
fn weld_config_rejects_unknown_keys() {
    assert!(serde_json::from_str::<WeldConfig>(r#"{"stop_at_floor": false}"#).is_ok());
    assert!(serde_json::from_str::<WeldConfig>(r#"{"stop_at_flor": false}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_parameters_are_unit_and_center_action_is_an_involution(seed in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 4)) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rho = GluingParameter::random(4, &mut rng);
        prop_assert!(rho.validate(4).is_ok());
        let twisted = rho.center_action(&flips);
        prop_assert!(twisted.validate(4).is_ok());
        prop_assert_eq!(twisted.center_action(&flips), rho);
    }
}
