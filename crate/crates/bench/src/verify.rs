//! Quick invariant checks run by `rta-bench verify`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::dynamics::{Control3, CwParams};
use rta_core::filters::{Filter, FilterConfig, FilterKind};
use rta_core::policy::{ObservationVariant, PolicyNetwork};
use rta_core::safety::{self, SafetyParams};
use rta_core::solvers::SolveStatus;

use crate::stats::compute_stats;
use crate::suite::{generate_states, Suite, SuiteParams};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

fn filters() -> Vec<FilterConfig> {
    vec![
        FilterConfig::explicit(),
        FilterConfig::implicit(1.0, 20.0),
        FilterConfig::implicit(10.0, 20.0),
        FilterConfig::discrete(1.0, 1e-4),
        FilterConfig::discrete(10.0, 1e-3),
    ]
}

fn post_solve_floor(config: &FilterConfig) -> f64 {
    match config.kind {
        FilterKind::Discrete => -config.tolerance,
        _ => -1e-8,
    }
}

/// Run every invariant check with `cases` states per suite.
pub fn run_invariants(cases: usize, seed: u64) -> Vec<Check> {
    let cw = CwParams::default();
    let safety_params = SafetyParams::for_vehicle(&cw);
    let sp = SuiteParams::default();
    let mut out = Vec::new();

    match generate_states(Suite::Safe, cases, seed, &safety_params, &cw, &sp) {
        Ok(safe) => {
            let unsafe_count = safe
                .iter()
                .filter(|c| !safety::is_safe(&c.state, &safety_params).safe)
                .count();
            out.push(check(
                "safe suite is safe",
                unsafe_count == 0,
                format!("{unsafe_count} of {cases} outside the safe set"),
            ));
            let again = generate_states(Suite::Safe, cases, seed, &safety_params, &cw, &sp);
            out.push(check(
                "suite determinism",
                again.map(|a| a == safe).unwrap_or(false),
                "same seed, same suite",
            ));

            for config in filters() {
                let label = config.kind.as_str();
                let mut filter =
                    Filter::new(config.clone()).expect("reference configuration is valid");
                let (mut checked, mut worst) = (0, 0.0f64);
                for case in &safe {
                    let u = case.random_action;
                    if filter
                        .check_barrier(&case.state, &u)
                        .iter()
                        .all(|&r| r >= 0.0)
                    {
                        checked += 1;
                        worst = worst.max((filter.filter(&case.state, &u).u_act - u).amax());
                    }
                }
                let bound = if config.kind == FilterKind::Discrete {
                    config.tolerance
                } else {
                    1e-6
                };
                out.push(check(
                    "minimal invasiveness",
                    worst <= bound,
                    format!(
                        "{label} dt={}: max deviation {worst:.3e} over {checked} feasible actions",
                        config.dt
                    ),
                ));
            }
        }
        Err(e) => out.push(check("safe suite is safe", false, e.to_string())),
    }

    match generate_states(Suite::NotSafe, cases, seed, &safety_params, &cw, &sp) {
        Ok(rough) => {
            for config in filters() {
                let floor = post_solve_floor(&config);
                let mut filter =
                    Filter::new(config.clone()).expect("reference configuration is valid");
                let (mut optimal, mut bad) = (0, 0);
                for case in &rough {
                    let r = filter.filter(&case.state, &case.random_action);
                    if r.status() == SolveStatus::Optimal && !r.fallback {
                        optimal += 1;
                        let worst = filter
                            .check_barrier(&case.state, &r.u_act)
                            .into_iter()
                            .fold(f64::INFINITY, f64::min);
                        if worst < floor {
                            bad += 1;
                        }
                    }
                }
                out.push(check(
                    "post-solve feasibility",
                    bad == 0,
                    format!(
                        "{} dt={}: {bad} of {optimal} optimal solves violate",
                        config.kind.as_str(),
                        config.dt
                    ),
                ));
            }
        }
        Err(e) => out.push(check("post-solve feasibility", false, e.to_string())),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=257);
        let v: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let s = compute_stats(&v).expect("non-empty");
        stats_ok &= s.min <= s.iqm && s.iqm <= s.moet && s.min <= s.median && s.median <= s.moet;
    }
    out.push(check(
        "statistics ordering",
        stats_ok,
        "min <= iqm, median <= moet",
    ));

    let mut easif = Filter::new(FilterConfig::explicit()).expect("valid");
    let mut zero = Filter::new(FilterConfig::implicit(1.0, 0.0)).expect("valid");
    let mut identical = true;
    for _ in 0..50 {
        let s = rta_core::dynamics::State6::from_fn(|i, _| {
            if i < 3 {
                rng.random_range(-500.0..500.0)
            } else {
                rng.random_range(-0.5..0.5)
            }
        });
        identical &= easif.explicit_rows(&s) == zero.implicit_rows(&s);
    }
    out.push(check(
        "implicit filter with zero horizon",
        identical,
        "constraint rows equal the explicit filter's",
    ));

    let net = PolicyNetwork::seeded(ObservationVariant::AllSensors, seed);
    let round = PolicyNetwork::from_text(&net.to_text())
        .map(|n| n == net)
        .unwrap_or(false)
        && PolicyNetwork::from_bytes(&net.to_bytes())
            .map(|n| n == net)
            .unwrap_or(false);
    out.push(check(
        "policy round trip",
        round,
        "text and binary encodings",
    ));

    let mut config = FilterConfig::discrete(1.0, 1e-12);
    config.time_limit = Duration::from_millis(50);
    config.max_iterations = usize::MAX;
    let mut filter = Filter::new(config).expect("valid");
    let hard = rta_core::dynamics::State6::new(20.0, 0.0, 0.0, -3.0, 0.0, 0.0);
    let start = Instant::now();
    let r = filter.filter_dasif(&hard, &Control3::new(-1.0, 0.0, 0.0));
    let took = start.elapsed();
    out.push(check(
        "discrete filter liveness",
        took < Duration::from_millis(200),
        format!(
            "returned {} in {:.1} ms",
            r.status(),
            took.as_secs_f64() * 1e3
        ),
    ));
    out
}
