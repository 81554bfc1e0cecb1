//! Seeded generation of benchmark test cases.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::dynamics::{position, Control3, CwParams, State6, SunState};
use rta_core::inspection::{
    nearest_uninspected_cluster, update_inspection, InspectionSummary, PointSphere,
    DEFAULT_CLUSTERS,
};
use rta_core::safety::{self, SafetyParams};

use crate::error::BenchError;

/// Attempts allowed per state before the safe-suite sampler gives up.
pub const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    /// States strictly inside the safe set.
    Safe,
    /// States drawn from widened ranges with no safety check.
    NotSafe,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Safe => "safe",
            Suite::NotSafe => "unsafe",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "safe" => Ok(Suite::Safe),
            "unsafe" | "not-safe" | "not_safe" => Ok(Suite::NotSafe),
            other => Err(format!("unknown suite `{other}` (expected safe or unsafe)")),
        }
    }
}

/// Sampling ranges for both suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteParams {
    /// Distance kept from the collision and keep-in radii in the safe suite (m).
    pub radius_margin: f64,
    /// Minimum barrier value required of every safe-suite state.
    pub safe_margin: f64,
    /// Per-axis velocity half-range of the safe suite, as a multiple of `v_max`.
    pub safe_velocity_scale: f64,
    /// Not-safe radial range as multiples of the collision radius and `r_max`.
    pub unsafe_radius_scale: (f64, f64),
    /// Per-axis velocity half-range of the not-safe suite, as a multiple of `v_max`.
    pub unsafe_velocity_scale: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            radius_margin: 10.0,
            safe_margin: 0.01,
            safe_velocity_scale: 1.0,
            unsafe_radius_scale: (0.5, 1.1),
            unsafe_velocity_scale: 2.0,
        }
    }
}

/// Everything the pipeline receives for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub state: State6,
    pub sun: SunState,
    pub inspection: InspectionSummary,
    /// Uniform sample from the thrust box, used by the random controller.
    pub random_action: Control3,
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

fn sample_state(rng: &mut ChaCha8Rng, radii: (f64, f64), speed: f64) -> State6 {
    let r = rng.random_range(radii.0..=radii.1);
    let p = unit_vector(rng) * r;
    let mut v = [0.0; 3];
    for c in &mut v {
        *c = rng.random_range(-speed..=speed);
    }
    State6::new(p.x, p.y, p.z, v[0], v[1], v[2])
}

fn sample_inspection(rng: &mut ChaCha8Rng, state: &State6, sun: &SunState) -> InspectionSummary {
    let seen: f64 = rng.random();
    let mut sphere = PointSphere::fibonacci();
    for i in 0..sphere.points().len() {
        if rng.random::<f64>() < seen {
            sphere = sphere.with_inspected(i);
        }
    }
    let pos = position(state);
    let (sphere, _) = update_inspection(&sphere, &pos, sun);
    nearest_uninspected_cluster(&sphere, &pos, DEFAULT_CLUSTERS)
}

/// Generate `count` cases; `(suite, count, seed)` fully determines the output.
pub fn generate_states(
    suite: Suite,
    count: usize,
    seed: u64,
    safety_params: &SafetyParams,
    cw: &CwParams,
    params: &SuiteParams,
) -> Result<Vec<TestCase>, BenchError> {
    if count == 0 {
        return Err(BenchError::Config("case count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_sum = safety_params.collision_radius();
    let mut cases = Vec::with_capacity(count);
    for _ in 0..count {
        let state = match suite {
            Suite::Safe => {
                let radii = (
                    r_sum + params.radius_margin,
                    safety_params.r_max - params.radius_margin,
                );
                if !(radii.0 < radii.1) {
                    return Err(BenchError::Config(format!("empty safe annulus {radii:?}")));
                }
                let speed = params.safe_velocity_scale * safety_params.v_max;
                let mut attempts = 0;
                loop {
                    if attempts == MAX_REJECTION_ATTEMPTS {
                        return Err(BenchError::Rejection { attempts });
                    }
                    attempts += 1;
                    let s = sample_state(&mut rng, radii, speed);
                    if safety::evaluate(&s, safety_params)
                        .iter()
                        .all(|&h| h >= params.safe_margin)
                    {
                        break s;
                    }
                }
            }
            Suite::NotSafe => {
                let (lo, hi) = params.unsafe_radius_scale;
                let radii = (lo * r_sum, hi * safety_params.r_max);
                sample_state(
                    &mut rng,
                    radii,
                    params.unsafe_velocity_scale * safety_params.v_max,
                )
            }
        };
        let sun = SunState::new(rng.random_range(0.0..TAU));
        let inspection = sample_inspection(&mut rng, &state, &sun);
        let u = cw.u_max;
        let random_action = Control3::new(
            rng.random_range(-u..=u),
            rng.random_range(-u..=u),
            rng.random_range(-u..=u),
        );
        cases.push(TestCase {
            state,
            sun,
            inspection,
            random_action,
        });
    }
    Ok(cases)
}
