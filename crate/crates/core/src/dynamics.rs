//! Clohessy-Wiltshire relative motion in Hill's frame.
//!
//! The state is `[x, y, z, vx, vy, vz]` with `x` radially outward from the
//! chief, `y` along-track and `z` cross-track. Control is the thrust vector
//! in newtons, bounded per axis by `u_max`.

use std::f64::consts::TAU;

use nalgebra::{Matrix6, Matrix6x3, Vector3, Vector6};

/// Relative state `[x, y, z, vx, vy, vz]` (m, m/s).
pub type State6 = Vector6<f64>;
/// Thrust vector `[Fx, Fy, Fz]` (N).
pub type Control3 = Vector3<f64>;

/// Orbit and vehicle constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwParams {
    /// Mean motion of the chief's circular orbit (rad/s).
    pub n: f64,
    /// Deputy mass (kg).
    pub mass: f64,
    /// Maximum thrust per axis (N).
    pub u_max: f64,
}

impl Default for CwParams {
    fn default() -> Self {
        Self {
            n: 0.001027,
            mass: 12.0,
            u_max: 1.0,
        }
    }
}

impl CwParams {
    pub fn is_valid(&self) -> bool {
        self.n > 0.0 && self.mass > 0.0 && self.u_max > 0.0
    }

    /// Continuous-time system matrix `A`.
    pub fn a_matrix(&self) -> Matrix6<f64> {
        let n = self.n;
        let mut a = Matrix6::zeros();
        a[(0, 3)] = 1.0;
        a[(1, 4)] = 1.0;
        a[(2, 5)] = 1.0;
        a[(3, 0)] = 3.0 * n * n;
        a[(3, 4)] = 2.0 * n;
        a[(4, 3)] = -2.0 * n;
        a[(5, 2)] = -n * n;
        a
    }

    /// Input matrix `B`.
    pub fn b_matrix(&self) -> Matrix6x3<f64> {
        let mut b = Matrix6x3::zeros();
        let inv_m = 1.0 / self.mass;
        b[(3, 0)] = inv_m;
        b[(4, 1)] = inv_m;
        b[(5, 2)] = inv_m;
        b
    }

    /// Clamp each thrust component to `[-u_max, u_max]`.
    pub fn clamp_control(&self, u: &Control3) -> Control3 {
        u.map(|c| c.clamp(-self.u_max, self.u_max))
    }
}

pub fn position(state: &State6) -> Vector3<f64> {
    state.fixed_rows::<3>(0).into_owned()
}

pub fn velocity(state: &State6) -> Vector3<f64> {
    state.fixed_rows::<3>(3).into_owned()
}

/// Free (uncontrolled) drift `A x`.
pub fn drift(state: &State6, params: &CwParams) -> State6 {
    let n = params.n;
    State6::new(
        state[3],
        state[4],
        state[5],
        3.0 * n * n * state[0] + 2.0 * n * state[4],
        -2.0 * n * state[3],
        -n * n * state[2],
    )
}

/// State derivative `A x + B u`.
pub fn derivative(state: &State6, control: &Control3, params: &CwParams) -> State6 {
    let mut rate = drift(state, params);
    let inv_m = 1.0 / params.mass;
    rate[3] += control[0] * inv_m;
    rate[4] += control[1] * inv_m;
    rate[5] += control[2] * inv_m;
    rate
}

/// Zero-order-hold discretization of the CW equations over one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrices {
    pub dt: f64,
    /// State transition matrix.
    pub phi: Matrix6<f64>,
    /// Input matrix for a thrust held constant over the interval.
    pub gamma: Matrix6x3<f64>,
}

impl TransitionMatrices {
    pub fn propagate(&self, state: &State6, control: &Control3) -> State6 {
        self.phi * state + self.gamma * control
    }
}

/// Closed-form CW transition matrices for a step of `dt` seconds.
pub fn transition_matrices(dt: f64, params: &CwParams) -> TransitionMatrices {
    let n = params.n;
    let nt = n * dt;
    let (s, c) = nt.sin_cos();
    // 1 - cos(nt) without cancellation
    let omc = 2.0 * (0.5 * nt).sin().powi(2);
    // t - sin(nt)/n, series for small arguments
    let t_minus_s = if nt.abs() < 1e-3 {
        let nt2 = nt * nt;
        dt * nt2 / 6.0 * (1.0 - nt2 / 20.0 * (1.0 - nt2 / 42.0))
    } else {
        dt - s / n
    };

    #[rustfmt::skip]
    let phi = Matrix6::new(
        4.0 - 3.0 * c,            0.0, 0.0,      s / n,          2.0 * omc / n,         0.0,
        6.0 * (s - nt),           1.0, 0.0,      -2.0 * omc / n, (4.0 * s - 3.0 * nt) / n, 0.0,
        0.0,                      0.0, c,        0.0,            0.0,                   s / n,
        3.0 * n * s,              0.0, 0.0,      c,              2.0 * s,               0.0,
        -6.0 * n * omc,           0.0, 0.0,      -2.0 * s,       4.0 * c - 3.0,         0.0,
        0.0,                      0.0, -n * s,   0.0,            0.0,                   c,
    );

    // Integral of the velocity columns of phi over [0, dt].
    let n2 = n * n;
    #[rustfmt::skip]
    let integral = Matrix6x3::new(
        omc / n2,              2.0 * t_minus_s / n,                          0.0,
        -2.0 * t_minus_s / n,  4.0 * omc / n2 - 1.5 * dt * dt,               0.0,
        0.0,                   0.0,                                          omc / n2,
        s / n,                 2.0 * omc / n,                                0.0,
        -2.0 * omc / n,        4.0 * s / n - 3.0 * dt,                       0.0,
        0.0,                   0.0,                                          s / n,
    );
    let gamma = integral / params.mass;

    TransitionMatrices { dt, phi, gamma }
}

/// Exact ZOH propagation of `state` under constant `control` for `dt` seconds.
pub fn propagate(state: &State6, control: &Control3, dt: f64, params: &CwParams) -> State6 {
    transition_matrices(dt, params).propagate(state, control)
}

/// One classic RK4 step of `rate`, starting at `state`.
pub fn rk4_step<F>(state: &State6, step: f64, mut rate: F) -> State6
where
    F: FnMut(&State6) -> State6,
{
    let k1 = rate(state);
    let k2 = rate(&(state + k1 * (0.5 * step)));
    let k3 = rate(&(state + k2 * (0.5 * step)));
    let k4 = rate(&(state + k3 * step));
    state + (k1 + (k2 + k3) * 2.0 + k4) * (step / 6.0)
}

/// Integrate the closed loop `x' = A x + B u(x)` with fixed-step RK4.
///
/// The control law is re-evaluated at every stage. The returned trajectory has
/// `steps + 1` entries, starting with `state`.
pub fn integrate_rk4<L>(
    state: &State6,
    mut control_law: L,
    step: f64,
    steps: usize,
    params: &CwParams,
) -> Vec<State6>
where
    L: FnMut(&State6) -> Control3,
{
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(*state);
    let mut current = *state;
    for _ in 0..steps {
        current = rk4_step(&current, step, |x| derivative(x, &control_law(x), params));
        trajectory.push(current);
    }
    trajectory
}

/// Sun angle in Hill's frame, wrapped to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SunState {
    theta: f64,
}

impl SunState {
    pub fn new(theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let wrapped = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Unit vector from the chief to the Sun, `[cos θ, sin θ, 0]`.
pub fn sun_vector(sun: &SunState) -> Vector3<f64> {
    let (s, c) = sun.theta.sin_cos();
    Vector3::new(c, s, 0.0)
}

/// The Sun rotates at `-n` in Hill's frame.
pub fn advance_sun(sun: &SunState, dt: f64, params: &CwParams) -> SunState {
    SunState::new(sun.theta - params.n * dt)
}
