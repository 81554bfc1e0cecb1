//! The six inspection-task barrier functions and the safe set they define.
//!
//! | index | constraint                                   |
//! |-------|----------------------------------------------|
//! | 1     | collision avoidance with the chief           |
//! | 2     | keep-in zone around the chief                |
//! | 3     | distance-dependent speed limit               |
//! | 4–6   | per-axis speed limits on `vx`, `vy`, `vz`    |
//!
//! Functions are indexed from 0 in code (`h[0]` is the collision constraint).

use nalgebra::{Vector3, Vector6};

use crate::dynamics::{position, velocity, CwParams, State6};
use crate::error::ConfigError;

pub const NUM_CONSTRAINTS: usize = 6;

/// Smallest square-root argument used when differentiating `√(2 a s)`.
const SQRT_ARG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyParams {
    /// Braking acceleration assumed available (m/s²).
    pub a_max: f64,
    /// Deputy collision radius (m).
    pub r_deputy: f64,
    /// Chief collision radius (m).
    pub r_chief: f64,
    /// Keep-in radius (m).
    pub r_max: f64,
    /// Allowable speed at the origin (m/s).
    pub nu0: f64,
    /// Allowable speed growth with distance (1/s).
    pub nu1: f64,
    /// Per-axis speed cap (m/s).
    pub v_max: f64,
}

impl SafetyParams {
    /// Defaults tied to the vehicle: `a_max = u_max / m` and `nu1 = 2 n`.
    pub fn for_vehicle(cw: &CwParams) -> Self {
        Self {
            a_max: cw.u_max / cw.mass,
            r_deputy: 5.0,
            r_chief: 10.0,
            r_max: 1000.0,
            nu0: 0.2,
            nu1: 2.0 * cw.n,
            v_max: 1.0,
        }
    }

    pub fn collision_radius(&self) -> f64 {
        self.r_deputy + self.r_chief
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("a_max", self.a_max),
            ("r_deputy", self.r_deputy),
            ("r_chief", self.r_chief),
            ("r_max", self.r_max),
            ("nu1", self.nu1),
            ("v_max", self.v_max),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.nu0 >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "nu0 must be non-negative, got {}",
                self.nu0
            )));
        }
        if self.collision_radius() >= self.r_max {
            return Err(ConfigError::Invalid(format!(
                "collision radius {} must be below keep-in radius {}",
                self.collision_radius(),
                self.r_max
            )));
        }
        Ok(())
    }
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self::for_vehicle(&CwParams::default())
    }
}

/// Linear class-K strengthening `α_i(h) = c_i h`, one coefficient per constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSpec {
    /// Continuous-time coefficients (1/s), used by the explicit and implicit filters.
    pub continuous: [f64; NUM_CONSTRAINTS],
    /// Discrete-time fractions in `(0, 1)`, used by the discrete filter.
    pub discrete: [f64; NUM_CONSTRAINTS],
}

impl Default for AlphaSpec {
    fn default() -> Self {
        Self {
            continuous: [0.1; NUM_CONSTRAINTS],
            discrete: [0.5; NUM_CONSTRAINTS],
        }
    }
}

impl AlphaSpec {
    pub fn uniform(continuous: f64, discrete: f64) -> Self {
        Self {
            continuous: [continuous; NUM_CONSTRAINTS],
            discrete: [discrete; NUM_CONSTRAINTS],
        }
    }

    pub fn continuous(&self, index: usize, h: f64) -> f64 {
        self.continuous[index] * h
    }

    pub fn discrete(&self, index: usize, h: f64) -> f64 {
        self.discrete[index] * h
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, &c) in self.continuous.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "continuous alpha[{i}] must be positive, got {c}"
                )));
            }
        }
        for (i, &g) in self.discrete.iter().enumerate() {
            if !(g > 0.0 && g < 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "discrete alpha[{i}] must lie in (0, 1), got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// Velocity axis for the per-axis speed constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// `sign(s) √(2 a |s|)`: the braking-distance term, extended oddly past its domain.
fn braking_speed(a_max: f64, s: f64) -> f64 {
    (2.0 * a_max * s.abs()).sqrt().copysign(s)
}

/// Derivative of [`braking_speed`] with respect to `s`.
fn braking_speed_slope(a_max: f64, s: f64) -> f64 {
    a_max / (2.0 * a_max * s.abs().max(SQRT_ARG_FLOOR)).sqrt()
}

struct Radial {
    range: f64,
    /// Unit line of sight, zero at the origin.
    dir: Vector3<f64>,
    /// Range rate `p·v / |p|`, zero at the origin.
    rate: f64,
}

fn radial(state: &State6) -> Radial {
    let p = position(state);
    let v = velocity(state);
    let range = p.norm();
    if range > 0.0 {
        let dir = p / range;
        Radial {
            range,
            dir,
            rate: dir.dot(&v),
        }
    } else {
        Radial {
            range,
            dir: Vector3::zeros(),
            rate: 0.0,
        }
    }
}

/// h1: the deputy can still brake before reaching the collision radius.
pub fn h_collision(state: &State6, params: &SafetyParams) -> f64 {
    let r = radial(state);
    braking_speed(params.a_max, r.range - params.collision_radius()) + r.rate
}

/// h2: the deputy can still brake before leaving the keep-in sphere.
pub fn h_keepin(state: &State6, params: &SafetyParams) -> f64 {
    let r = radial(state);
    braking_speed(params.a_max, params.r_max - r.range) - r.rate
}

/// h3: speed must shrink as the deputy approaches the chief.
pub fn h_slowdown(state: &State6, params: &SafetyParams) -> f64 {
    params.nu0 + params.nu1 * position(state).norm() - velocity(state).norm()
}

/// h4, h5, h6: per-axis speed caps.
pub fn h_axis_speed(state: &State6, axis: Axis, params: &SafetyParams) -> f64 {
    let v = state[3 + axis.index()];
    params.v_max * params.v_max - v * v
}

/// All six barrier values.
pub fn evaluate(state: &State6, params: &SafetyParams) -> [f64; NUM_CONSTRAINTS] {
    let r = radial(state);
    let speed = velocity(state).norm();
    let vmax2 = params.v_max * params.v_max;
    [
        braking_speed(params.a_max, r.range - params.collision_radius()) + r.rate,
        braking_speed(params.a_max, params.r_max - r.range) - r.rate,
        params.nu0 + params.nu1 * r.range - speed,
        vmax2 - state[3] * state[3],
        vmax2 - state[4] * state[4],
        vmax2 - state[5] * state[5],
    ]
}

/// Barrier value `h_index` for `index` in `0..6`.
pub fn h(index: usize, state: &State6, params: &SafetyParams) -> f64 {
    match index {
        0 => h_collision(state, params),
        1 => h_keepin(state, params),
        2 => h_slowdown(state, params),
        3 => h_axis_speed(state, Axis::X, params),
        4 => h_axis_speed(state, Axis::Y, params),
        5 => h_axis_speed(state, Axis::Z, params),
        _ => panic!("barrier index {index} out of range"),
    }
}

/// Analytic gradients of all six barriers with respect to the state.
///
/// At the singular points `p = 0` and `v = 0` the terms involving `p/|p|` and
/// `v/|v|` are replaced by zero.
pub fn gradients(state: &State6, params: &SafetyParams) -> [Vector6<f64>; NUM_CONSTRAINTS] {
    let r = radial(state);
    let v = velocity(state);
    let speed = v.norm();

    // ∂(range rate)/∂p = (v - dir * rate) / range
    let rate_dp = if r.range > 0.0 {
        (v - r.dir * r.rate) / r.range
    } else {
        Vector3::zeros()
    };

    let slope1 = braking_speed_slope(params.a_max, r.range - params.collision_radius());
    let slope2 = braking_speed_slope(params.a_max, params.r_max - r.range);

    let mut grads = [Vector6::zeros(); NUM_CONSTRAINTS];

    let gp = r.dir * slope1 + rate_dp;
    grads[0].fixed_rows_mut::<3>(0).copy_from(&gp);
    grads[0].fixed_rows_mut::<3>(3).copy_from(&r.dir);

    let gp = -r.dir * slope2 - rate_dp;
    grads[1].fixed_rows_mut::<3>(0).copy_from(&gp);
    grads[1].fixed_rows_mut::<3>(3).copy_from(&(-r.dir));

    grads[2]
        .fixed_rows_mut::<3>(0)
        .copy_from(&(r.dir * params.nu1));
    if speed > 0.0 {
        grads[2].fixed_rows_mut::<3>(3).copy_from(&(-v / speed));
    }

    for axis in 0..3 {
        grads[3 + axis][3 + axis] = -2.0 * state[3 + axis];
    }
    grads
}

/// Gradient of `h_index` for `index` in `0..6`.
pub fn grad_h(index: usize, state: &State6, params: &SafetyParams) -> Vector6<f64> {
    gradients(state, params)[index]
}

/// Safe-set membership with the six margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyCheck {
    pub safe: bool,
    pub margins: [f64; NUM_CONSTRAINTS],
}

impl SafetyCheck {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn is_safe(state: &State6, params: &SafetyParams) -> SafetyCheck {
    let margins = evaluate(state, params);
    let safe = margins.iter().all(|&m| m >= 0.0);
    SafetyCheck { safe, margins }
}
