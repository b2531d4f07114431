mod common;

use inviscid_lab::config::BetaSpec;
use inviscid_lab::{DatumSpec, Domain, Exponent, LabError, LadderConfig};
use proptest::prelude::*;

const MINIMAL: &str = r#"{
    "domain": "torus",
    "initial_datum": {"name": "taylor-green"},
    "nus": [0.01, 0.001],
    "T": 0.5,
    "N": 32,
    "dt": 0.001,
    "p_list": [1.3, 2, "inf"]
}"#;

#[test]
fn minimal_config_gets_documented_defaults() {
    let c = LadderConfig::from_json(MINIMAL).unwrap();
    assert_eq!(c.domain, Domain::Torus);
    assert_eq!(c.checkpoints, 50);
    assert_eq!(c.replicas, 0);
    assert_eq!(c.p_list[2], Exponent(f64::INFINITY));
    assert_eq!(c.beta, BetaSpec::TruncatedPower { q: 2.0, eta: None });
    assert!(c.checks.errors && !c.checks.flows);
}

#[test]
fn unknown_keys_are_rejected() {
    let typo = MINIMAL.replace("\"dt\"", "\"dT\"");
    assert!(matches!(LadderConfig::from_json(&typo), Err(LabError::Config(_))));
    let nested = MINIMAL.replace("\"p_list\"", "\"checks\": {\"flow\": true}, \"p_list\"");
    assert!(matches!(LadderConfig::from_json(&nested), Err(LabError::Config(_))));
}

#[test]
fn invariants_are_enforced() {
    let mut c = LadderConfig::from_json(MINIMAL).unwrap();
    c.nus = vec![1e-3, 1e-2];
    assert!(matches!(c.validate(), Err(LabError::Config(m)) if m.contains("decreasing")));
    c.nus = vec![1e-2, 1e-2];
    assert!(c.validate().is_err());
    c.nus = vec![1e-2, 0.0];
    assert!(c.validate().is_err());
    c.nus = vec![1e-2];
    c.p_list = vec![Exponent(0.5)];
    assert!(c.validate().is_err());
    c.p_list = vec![Exponent(1.0)];
    c.t_end = 0.0;
    assert!(c.validate().is_err());
    c.t_end = 1.0;
    c.n = 48;
    assert!(c.validate().is_err());
    c.n = 32;
    c.checks.flows = true;
    assert!(c.validate().is_err(), "flows need replicas");
    c.replicas = 4;
    c.validate().unwrap();
    c.domain = Domain::Freespace;
    assert!(c.validate().is_err(), "flows are torus-only");
}

#[test]
fn singular_datum_outside_lp_is_a_config_error() {
    let mut c = LadderConfig::from_json(MINIMAL).unwrap();
    c.initial_datum = DatumSpec::new("lp-singular").with("alpha", 1.5);
    c.p_list = vec![Exponent(1.2)];
    c.validate().unwrap();
    c.p_list = vec![Exponent(1.5)];
    assert!(matches!(c.validate(), Err(LabError::NotInLp { .. })));
    c.p_list = vec![Exponent(1.0)];
    c.initial_datum = c.initial_datum.clone().with("p", 1.5);
    assert!(matches!(c.validate(), Err(LabError::NotInLp { .. })));
}

#[test]
fn schedule_puts_checkpoints_on_steps() {
    let mut c = LadderConfig::from_json(MINIMAL).unwrap();
    for (t, dt, k) in [(0.5, 1e-3, 50), (1.0, 0.03, 7), (0.2, 0.5, 4)] {
        c.t_end = t;
        c.dt = dt;
        c.checkpoints = k;
        let (steps, every, h) = c.schedule();
        assert_eq!(steps, every * k);
        assert!(h <= dt * (1.0 + 1e-12));
        assert!((h * steps as f64 - t).abs() < 1e-12);
    }
}

fn arb_config() -> impl Strategy<Value = LadderConfig> {
    (
        prop::collection::vec(1e-6f64..1.0, 0..5),
        0.01f64..5.0,
        3u32..8,
        1e-4f64..0.1,
        prop::collection::vec(prop_oneof![(1.0f64..10.0).prop_map(Exponent), Just(Exponent(f64::INFINITY))], 1..4),
        any::<u64>(),
        any::<[bool; 8]>(),
        1usize..100,
    )
        .prop_map(|(mut nus, t, logn, dt, p_list, seed, flags, k)| {
            nus.sort_by(|a, b| b.partial_cmp(a).unwrap());
            nus.dedup();
            let mut c = common::small_config();
            c.nus = nus;
            c.t_end = t;
            c.n = 1 << logn;
            c.dt = dt;
            c.p_list = p_list;
            c.master_seed = seed;
            c.checkpoints = k;
            c.replicas = 3;
            c.checks.errors = flags[0];
            c.checks.energy = flags[1];
            c.checks.enstrophy = flags[2];
            c.checks.flows = flags[3];
            c.checks.renormalization = flags[4];
            c.checks.resolution_doubling = flags[5];
            c.beta = if flags[6] {
                BetaSpec::Convex { eta: Some(dt) }
            } else {
                BetaSpec::Bounded { scale: t, eta: None }
            };
            c
        })
}

proptest! {
    #[test]
    fn parse_of_serialize_is_identity(c in arb_config()) {
        c.validate().unwrap();
        let back = LadderConfig::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }
}
