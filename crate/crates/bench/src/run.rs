//! The timed controller → filter pipeline.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::dynamics::Control3;
use rta_core::filters::{Filter, FilterResult};
use rta_core::policy::{build_observation, PolicyNetwork, PolicyScratch};
use rta_core::solvers::SolveStatus;

use crate::config::{BenchConfig, ControllerKind, PolicySource};
use crate::error::BenchError;
use crate::stats::{compute_stats, TimingReport};
use crate::suite::{generate_states, TestCase};

/// Extra random draws tried when pre-checking a safe action.
const SAFE_ACTION_DRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingSample {
    pub case: usize,
    /// Seconds from receiving the inputs to producing the output.
    pub wall_time: f64,
    pub intervened: bool,
    pub fallback: bool,
    /// `None` when no optimization was needed (no filter, or an already
    /// feasible desired action).
    pub status: Option<SolveStatus>,
    pub u_act: Control3,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub label: String,
    /// The first call, excluded from statistics (cold caches and lazy setup).
    pub first_call: TimingSample,
    pub samples: Vec<TimingSample>,
}

impl RunOutput {
    pub fn wall_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.wall_time).collect()
    }

    pub fn report(&self) -> Result<TimingReport, BenchError> {
        Ok(TimingReport::new(
            self.label.clone(),
            compute_stats(&self.wall_times())?,
            self.first_call.wall_time,
        ))
    }

    pub fn count_status(&self, status: SolveStatus) -> usize {
        self.all().filter(|s| s.status == Some(status)).count()
    }

    pub fn fallbacks(&self) -> usize {
        self.all().filter(|s| s.fallback).count()
    }

    fn all(&self) -> impl Iterator<Item = &TimingSample> {
        std::iter::once(&self.first_call).chain(&self.samples)
    }
}

pub fn load_policy(config: &BenchConfig) -> Result<Option<PolicyNetwork>, BenchError> {
    let Some(variant) = config.controller.variant() else {
        return Ok(None);
    };
    let network = match &config.policy {
        PolicySource::Seeded(seed) => PolicyNetwork::seeded(variant, *seed),
        PolicySource::File(path) => PolicyNetwork::load(path)?,
    };
    if network.input_width() != variant.width() {
        return Err(BenchError::Config(format!(
            "policy takes {} inputs but the {} controller provides {}",
            network.input_width(),
            config.controller,
            variant.width()
        )));
    }
    Ok(Some(network))
}

/// Desired actions prepared before timing: the random draw, or for the
/// safe-random controller an action satisfying every barrier residual.
fn prepare_actions(
    config: &BenchConfig,
    cases: &[TestCase],
    filter: Option<&mut Filter>,
) -> Vec<Control3> {
    let mut actions: Vec<Control3> = cases.iter().map(|c| c.random_action).collect();
    if config.controller != ControllerKind::SafeRandom {
        return actions;
    }
    let Some(filter) = filter else {
        return actions;
    };
    let u_max = filter.config().cw.u_max;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5AFE_AC71);
    for (case, action) in cases.iter().zip(actions.iter_mut()) {
        let feasible = |f: &mut Filter, u: &Control3| {
            f.check_barrier(&case.state, u).iter().all(|&r| r >= 0.0)
        };
        if feasible(filter, action) {
            continue;
        }
        let mut found = false;
        for _ in 0..SAFE_ACTION_DRAWS {
            let u = Control3::from_fn(|_, _| rng.random_range(-u_max..=u_max));
            if feasible(filter, &u) {
                *action = u;
                found = true;
                break;
            }
        }
        if !found {
            *action = filter.filter(&case.state, action).u_act;
        }
    }
    actions
}

/// Run the configuration on freshly generated cases.
pub fn run_config(config: &BenchConfig) -> Result<RunOutput, BenchError> {
    config.validate()?;
    let cases = generate_states(
        config.suite,
        config.cases,
        config.seed,
        &config.safety,
        &config.cw,
        &config.suite_params,
    )?;
    run_cases(config, &cases)
}

/// Run the configuration on the given cases, single-threaded. Solver
/// failures are recorded per sample and never abort the run.
pub fn run_cases(config: &BenchConfig, cases: &[TestCase]) -> Result<RunOutput, BenchError> {
    config.validate()?;
    if cases.is_empty() {
        return Err(BenchError::Config("no test cases".into()));
    }
    let policy = load_policy(config)?;
    let mut filter = config.rta.clone().map(Filter::new).transpose()?;
    let actions = prepare_actions(config, cases, filter.as_mut());
    // Pre-check calls above must not warm the timed filter's first call.
    if config.controller == ControllerKind::SafeRandom {
        filter = config.rta.clone().map(Filter::new).transpose()?;
    }
    let cw = config.rta.as_ref().map_or(config.cw, |r| r.cw);
    let variant = config.controller.variant();
    let mut scratch = PolicyScratch::default();

    let mut samples = Vec::with_capacity(cases.len());
    for (index, (case, random)) in cases.iter().zip(&actions).enumerate() {
        let start = Instant::now();
        let u_des = match (&policy, variant) {
            (Some(net), Some(v)) => {
                let obs = build_observation(&case.state, &case.sun, Some(&case.inspection), v)?;
                net.act_with(obs.as_slice(), &cw, &mut scratch)?
            }
            _ => *random,
        };
        let result = match filter.as_mut() {
            Some(f) => f.filter(&case.state, &u_des),
            None => FilterResult {
                u_act: u_des,
                intervened: false,
                fallback: false,
                solver: None,
                active_constraints: Vec::new(),
            },
        };
        let wall_time = start.elapsed().as_secs_f64();
        samples.push(TimingSample {
            case: index,
            wall_time,
            intervened: result.intervened,
            fallback: result.fallback,
            status: result.solver.as_ref().map(|s| s.status),
            u_act: result.u_act,
        });
    }
    let first_call = samples.remove(0);
    Ok(RunOutput {
        label: config.label.clone(),
        first_call,
        samples,
    })
}

/// Run several configurations, sequentially by default. With `parallel`,
/// each configuration gets its own thread; co-scheduled runs contend for
/// cores and caches, so their timings are not comparable to sequential ones.
pub fn run_many(configs: &[BenchConfig], parallel: bool) -> Vec<Result<RunOutput, BenchError>> {
    if !parallel {
        return configs.iter().map(run_config).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run_config(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(BenchError::Config("benchmark thread panicked".into())))
            })
            .collect()
    })
}
