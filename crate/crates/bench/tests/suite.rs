use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rta_bench::{generate_states, BenchError, Suite, SuiteParams, TestCase};
use rta_core::dynamics::CwParams;
use rta_core::safety::{self, SafetyParams};

fn params() -> (SafetyParams, CwParams) {
    let cw = CwParams::default();
    (SafetyParams::for_vehicle(&cw), cw)
}

fn digest(cases: &[TestCase]) -> u64 {
    let mut hasher = DefaultHasher::new();
    for c in cases {
        for v in c
            .state
            .iter()
            .chain(c.random_action.iter())
            .chain(c.inspection.r_ups.iter())
        {
            v.to_bits().hash(&mut hasher);
        }
        c.sun.theta().to_bits().hash(&mut hasher);
        c.inspection.n_points.hash(&mut hasher);
    }
    hasher.finish()
}

#[test]
fn every_safe_state_clears_the_margin() {
    let (sp, cw) = params();
    let suite = SuiteParams::default();
    let cases = generate_states(Suite::Safe, 1000, 3, &sp, &cw, &suite).unwrap();
    assert_eq!(cases.len(), 1000);
    for c in &cases {
        assert!(safety::is_safe(&c.state, &sp).safe);
        assert!(safety::evaluate(&c.state, &sp)
            .iter()
            .all(|&h| h >= suite.safe_margin));
        assert!(c.random_action.amax() <= cw.u_max);
        assert!(c.inspection.n_points <= 99);
    }
}

#[test]
fn suites_are_determined_by_the_seed() {
    let (sp, cw) = params();
    let suite = SuiteParams::default();
    for kind in [Suite::Safe, Suite::NotSafe] {
        let a = generate_states(kind, 200, 11, &sp, &cw, &suite).unwrap();
        let b = generate_states(kind, 200, 11, &sp, &cw, &suite).unwrap();
        let c = generate_states(kind, 200, 12, &sp, &cw, &suite).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_ne!(digest(&a), digest(&c));
    }
}

#[test]
fn not_safe_suite_reaches_outside_the_safe_set() {
    let (sp, cw) = params();
    let cases =
        generate_states(Suite::NotSafe, 10_000, 5, &sp, &cw, &SuiteParams::default()).unwrap();
    let unsafe_count = cases
        .iter()
        .filter(|c| !safety::is_safe(&c.state, &sp).safe)
        .count();
    assert!(unsafe_count > 0);
    assert!(
        unsafe_count < cases.len(),
        "suite should also contain safe states"
    );
}

#[test]
fn impossible_margin_reports_rejection_failure() {
    let (sp, cw) = params();
    let suite = SuiteParams {
        safe_margin: 1e6,
        ..SuiteParams::default()
    };
    match generate_states(Suite::Safe, 1, 0, &sp, &cw, &suite) {
        Err(BenchError::Rejection { attempts }) => assert_eq!(attempts, 1_000_000),
        other => panic!("expected rejection failure, got {other:?}"),
    }
}

#[test]
fn zero_cases_is_rejected() {
    let (sp, cw) = params();
    assert!(matches!(
        generate_states(Suite::Safe, 0, 0, &sp, &cw, &SuiteParams::default()),
        Err(BenchError::Config(_))
    ));
}
