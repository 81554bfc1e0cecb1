//! Active set invariance filters.
//!
//! Each filter maps a state and a desired thrust to the closest thrust (in the
//! Euclidean sense) that satisfies the barrier constraints of the six safety
//! functions:
//!
//! * explicit: `∇h_i(x)(f(x) + g(x)u) + α_i(h_i(x)) ≥ 0`, a QP;
//! * implicit: the same condition pulled back along a simulated trajectory of
//!   the backup law through its sensitivity matrices, a larger QP;
//! * discrete: `(h_i(x⁺) - h_i(x))/Δt + α_i(h_i(x)) ≥ 0` with `x⁺` the exact
//!   zero-order-hold successor, a nonlinear program.
//!
//! When the optimizer cannot produce a feasible answer the filter returns the
//! backup control.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use nalgebra::{Matrix3x6, Matrix6, Vector3, Vector6};

use crate::dynamics::{
    derivative, drift, position, transition_matrices, velocity, Control3, CwParams, State6,
    TransitionMatrices,
};
use crate::error::ConfigError;
use crate::safety::{self, AlphaSpec, SafetyParams, NUM_CONSTRAINTS};
use crate::solvers::{NlpModel, NlpOptions, NlpSolver, QpProblem, QpSolver, SolveStatus};

/// `u_act` counts as modified when it differs from `u_des` by more than this (∞-norm).
pub const INTERVENTION_TOL: f64 = 1e-9;

/// Longest RK4 substep used for backup trajectories (s).
const MAX_SUBSTEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Explicit,
    Implicit,
    Discrete,
}

impl FilterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterKind::Explicit => "easif",
            FilterKind::Implicit => "iasif",
            FilterKind::Discrete => "dasif",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easif" | "explicit" => Ok(FilterKind::Explicit),
            "iasif" | "implicit" => Ok(FilterKind::Implicit),
            "dasif" | "discrete" => Ok(FilterKind::Discrete),
            other => Err(ConfigError::Invalid(format!(
                "unknown filter kind `{other}`"
            ))),
        }
    }
}

/// Saturated PD backup law gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackupParams {
    /// Closed-loop natural frequency (rad/s).
    pub omega: f64,
    /// Hold distance beyond the collision radius (m).
    pub standoff: f64,
}

impl Default for BackupParams {
    fn default() -> Self {
        Self {
            omega: 0.05,
            standoff: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub kind: FilterKind,
    /// Backup-trajectory node spacing (implicit) or look-ahead step (discrete), s.
    pub dt: f64,
    /// Backup-trajectory length (implicit only), s.
    pub horizon: f64,
    /// Relative and absolute solver tolerance (discrete only).
    pub tolerance: f64,
    /// Wall-clock limit per discrete solve.
    pub time_limit: Duration,
    pub max_iterations: usize,
    pub alpha: AlphaSpec,
    pub safety: SafetyParams,
    pub cw: CwParams,
    pub backup: BackupParams,
}

impl FilterConfig {
    pub fn new(kind: FilterKind) -> Self {
        let cw = CwParams::default();
        Self {
            kind,
            dt: 1.0,
            horizon: 20.0,
            tolerance: 1e-4,
            time_limit: Duration::from_secs(60),
            max_iterations: 100,
            alpha: AlphaSpec::default(),
            safety: SafetyParams::for_vehicle(&cw),
            cw,
            backup: BackupParams::default(),
        }
    }

    pub fn explicit() -> Self {
        Self::new(FilterKind::Explicit)
    }

    pub fn implicit(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            ..Self::new(FilterKind::Implicit)
        }
    }

    pub fn discrete(dt: f64, tolerance: f64) -> Self {
        Self {
            dt,
            tolerance,
            ..Self::new(FilterKind::Discrete)
        }
    }

    /// Number of backup-trajectory steps `J = T / dt`.
    pub fn trajectory_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Number of barrier residuals produced by [`Filter::check_barrier`].
    pub fn num_barrier_rows(&self) -> usize {
        match self.kind {
            FilterKind::Implicit => NUM_CONSTRAINTS * (self.trajectory_steps() + 1),
            _ => NUM_CONSTRAINTS,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.cw.is_valid() {
            return Err(ConfigError::Invalid(format!(
                "orbit parameters must be positive: {:?}",
                self.cw
            )));
        }
        self.safety.validate()?;
        self.alpha.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.kind == FilterKind::Implicit {
            let steps = self.horizon / self.dt;
            if !(steps >= 0.0) || (steps - steps.round()).abs() > 1e-9 {
                return Err(ConfigError::Invalid(format!(
                    "horizon {} must be a whole number of {} s steps",
                    self.horizon, self.dt
                )));
            }
        }
        if self.kind == FilterKind::Discrete {
            if !(self.tolerance > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance must be positive, got {}",
                    self.tolerance
                )));
            }
            if self.time_limit.is_zero() {
                return Err(ConfigError::Invalid("time limit must be positive".into()));
            }
        }
        if !(self.backup.omega > 0.0) || !(self.backup.standoff >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "invalid backup gains {:?}",
                self.backup
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub max_violation: f64,
    pub elapsed: Duration,
    pub diagnostic: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult {
    pub u_act: Control3,
    pub intervened: bool,
    /// The backup control was returned because the optimizer failed.
    pub fallback: bool,
    /// `None` when the desired control was accepted without calling a solver.
    pub solver: Option<SolverReport>,
    /// Barrier rows active at the solution.
    pub active_constraints: Vec<usize>,
}

impl FilterResult {
    /// Optimizer status, treating a skipped solve as optimal.
    pub fn status(&self) -> SolveStatus {
        self.solver
            .as_ref()
            .map_or(SolveStatus::Optimal, |s| s.status)
    }
}

/// Backup-law trajectory samples and their sensitivities to the initial state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BackupTrajectory {
    pub nodes: Vec<State6>,
    pub sensitivities: Vec<Matrix6<f64>>,
}

fn hold_radius(config: &FilterConfig) -> f64 {
    config.safety.collision_radius() + config.backup.standoff
}

/// Unsaturated PD command `-K_v v - K_p (p - p_hold)`.
fn backup_command(state: &State6, config: &FilterConfig) -> Vector3<f64> {
    let m = config.cw.mass;
    let w = config.backup.omega;
    let kv = 2.0 * m * w;
    let kp = m * w * w;
    let p = position(state);
    let v = velocity(state);
    let range = p.norm();
    let hold = hold_radius(config);
    let offset = if range > 0.0 && range < hold {
        p * (1.0 - hold / range)
    } else {
        Vector3::zeros()
    };
    -v * kv - offset * kp
}

/// Saturated PD backup law: damp relative velocity and back away to the hold
/// radius when closer than it.
pub fn backup_control(state: &State6, config: &FilterConfig) -> Control3 {
    config.cw.clamp_control(&backup_command(state, config))
}

/// `∂u_b/∂x`; saturated channels have zero rows.
fn backup_jacobian(state: &State6, config: &FilterConfig) -> Matrix3x6<f64> {
    let m = config.cw.mass;
    let w = config.backup.omega;
    let kv = 2.0 * m * w;
    let kp = m * w * w;
    let u_max = config.cw.u_max;
    let p = position(state);
    let range = p.norm();
    let hold = hold_radius(config);

    let mut jac = Matrix3x6::zeros();
    if range > 0.0 && range < hold {
        let e = p / range;
        let proj = nalgebra::Matrix3::identity() - e * e.transpose();
        let dp = (nalgebra::Matrix3::identity() - proj * (hold / range)) * (-kp);
        jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&dp);
    }
    for i in 0..3 {
        jac[(i, 3 + i)] = -kv;
    }

    let raw = backup_command(state, config);
    for i in 0..3 {
        let excess = raw[i].abs() - u_max;
        if excess.abs() <= 1e-12 * u_max {
            // on the saturation corner: central difference of the clamped channel
            let eps = 1e-7;
            for k in 0..6 {
                let mut hi = *state;
                let mut lo = *state;
                hi[k] += eps;
                lo[k] -= eps;
                let fh = backup_command(&hi, config)[i].clamp(-u_max, u_max);
                let fl = backup_command(&lo, config)[i].clamp(-u_max, u_max);
                jac[(i, k)] = (fh - fl) / (2.0 * eps);
            }
        } else if excess > 0.0 {
            for k in 0..6 {
                jac[(i, k)] = 0.0;
            }
        }
    }
    jac
}

/// Closed-loop Jacobian `A + B ∂u_b/∂x`.
fn closed_loop_jacobian(state: &State6, config: &FilterConfig) -> Matrix6<f64> {
    let mut jac = config.cw.a_matrix();
    let du = backup_jacobian(state, config) / config.cw.mass;
    let mut lower = jac.fixed_view_mut::<3, 6>(3, 0);
    lower += du;
    jac
}

fn closed_loop_rate(state: &State6, config: &FilterConfig) -> State6 {
    derivative(state, &backup_control(state, config), &config.cw)
}

/// Simulate the backup law for `J = T/dt` steps with RK4, integrating the
/// sensitivity `D' = J_cl(φ) D` alongside. Node `j` is the state at `j·dt`.
pub fn compute_backup_trajectory(state: &State6, config: &FilterConfig) -> BackupTrajectory {
    let mut out = BackupTrajectory::default();
    compute_backup_trajectory_into(state, config, &mut out);
    out
}

pub fn compute_backup_trajectory_into(
    state: &State6,
    config: &FilterConfig,
    out: &mut BackupTrajectory,
) {
    let steps = config.trajectory_steps();
    out.nodes.clear();
    out.sensitivities.clear();
    out.nodes.push(*state);
    out.sensitivities.push(Matrix6::identity());

    let substeps = (config.dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h = config.dt / substeps as f64;

    let mut x = *state;
    let mut d = Matrix6::identity();
    for _ in 0..steps {
        for _ in 0..substeps {
            let k1x = closed_loop_rate(&x, config);
            let k1d = closed_loop_jacobian(&x, config) * d;
            let x2 = x + k1x * (0.5 * h);
            let d2 = d + k1d * (0.5 * h);
            let k2x = closed_loop_rate(&x2, config);
            let k2d = closed_loop_jacobian(&x2, config) * d2;
            let x3 = x + k2x * (0.5 * h);
            let d3 = d + k2d * (0.5 * h);
            let k3x = closed_loop_rate(&x3, config);
            let k3d = closed_loop_jacobian(&x3, config) * d3;
            let x4 = x + k3x * h;
            let d4 = d + k3d * h;
            let k4x = closed_loop_rate(&x4, config);
            let k4d = closed_loop_jacobian(&x4, config) * d4;
            x += (k1x + (k2x + k3x) * 2.0 + k4x) * (h / 6.0);
            d += (k1d + (k2d + k3d) * 2.0 + k4d) * (h / 6.0);
        }
        out.nodes.push(x);
        out.sensitivities.push(d);
    }
}

/// Append the barrier rows for `h_i` evaluated at `node` and pulled back through `sens`:
/// `G = ∇h(node) D g`, `b = ∇h(node) D f(x) + α(h(node))`.
fn push_barrier_rows(
    qp: &mut QpProblem,
    node: &State6,
    sens: &Matrix6<f64>,
    state_drift: &State6,
    config: &FilterConfig,
) {
    let values = safety::evaluate(node, &config.safety);
    let grads = safety::gradients(node, &config.safety);
    let inv_m = 1.0 / config.cw.mass;
    for i in 0..NUM_CONSTRAINTS {
        let w: Vector6<f64> = sens.tr_mul(&grads[i]);
        let row = [w[3] * inv_m, w[4] * inv_m, w[5] * inv_m];
        let offset = w.dot(state_drift) + config.alpha.continuous(i, values[i]);
        qp.push_row(&row, offset);
    }
}

/// Discrete barrier residuals for a fixed state, as an NLP in the thrust.
struct DiscreteBarrier<'a> {
    state: State6,
    target: Control3,
    h_now: [f64; NUM_CONSTRAINTS],
    stm: &'a TransitionMatrices,
    config: &'a FilterConfig,
}

impl DiscreteBarrier<'_> {
    fn residuals(&self, u: &Control3, out: &mut [f64]) {
        let next = self.stm.propagate(&self.state, u);
        let h_next = safety::evaluate(&next, &self.config.safety);
        let dt = self.config.dt;
        for i in 0..NUM_CONSTRAINTS {
            out[i] =
                (h_next[i] - self.h_now[i]) / dt + self.config.alpha.discrete(i, self.h_now[i]);
        }
    }
}

impl NlpModel for DiscreteBarrier<'_> {
    fn dim(&self) -> usize {
        3
    }
    fn num_constraints(&self) -> usize {
        NUM_CONSTRAINTS
    }
    fn objective(&self, u: &[f64]) -> f64 {
        (0..3).map(|i| (u[i] - self.target[i]).powi(2)).sum()
    }
    fn constraints(&self, u: &[f64], out: &mut [f64]) {
        self.residuals(&Control3::new(u[0], u[1], u[2]), out);
    }
}

/// A configured safety filter with its solver workspaces.
///
/// Not shareable across threads; build one per thread from a shared config.
#[derive(Debug)]
pub struct Filter {
    config: FilterConfig,
    qp: QpProblem,
    qp_solver: QpSolver,
    nlp_solver: NlpSolver,
    nlp_options: NlpOptions,
    stm: TransitionMatrices,
    trajectory: BackupTrajectory,
}

impl Filter {
    pub fn new(config: FilterConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let u_max = config.cw.u_max;
        let mut qp = QpProblem::new(3);
        qp.set_bounds(&[-u_max; 3], &[u_max; 3]);
        let mut nlp_options = NlpOptions::new(vec![-u_max; 3], vec![u_max; 3], config.tolerance);
        nlp_options.time_limit = config.time_limit;
        nlp_options.max_iterations = config.max_iterations;
        let stm = transition_matrices(config.dt, &config.cw);
        Ok(Self {
            config,
            qp,
            qp_solver: QpSolver::new(),
            nlp_solver: NlpSolver::new(),
            nlp_options,
            stm,
            trajectory: BackupTrajectory::default(),
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    /// The backup trajectory from the most recent implicit-filter call.
    pub fn last_trajectory(&self) -> &BackupTrajectory {
        &self.trajectory
    }

    /// Filter `u_des` with the configured method.
    pub fn filter(&mut self, state: &State6, u_des: &Control3) -> FilterResult {
        match self.config.kind {
            FilterKind::Explicit => self.filter_easif(state, u_des),
            FilterKind::Implicit => self.filter_iasif(state, u_des),
            FilterKind::Discrete => self.filter_dasif(state, u_des),
        }
    }

    /// Build the explicit barrier rows at `state` (`G u + b ≥ 0`).
    pub fn explicit_rows(&mut self, state: &State6) -> &QpProblem {
        self.qp.clear_rows();
        let f = drift(state, &self.config.cw);
        push_barrier_rows(&mut self.qp, state, &Matrix6::identity(), &f, &self.config);
        &self.qp
    }

    /// Build the implicit barrier rows at `state`, node-major (`6` rows per node).
    pub fn implicit_rows(&mut self, state: &State6) -> &QpProblem {
        compute_backup_trajectory_into(state, &self.config, &mut self.trajectory);
        self.qp.clear_rows();
        let f = drift(state, &self.config.cw);
        for (node, sens) in self
            .trajectory
            .nodes
            .iter()
            .zip(&self.trajectory.sensitivities)
        {
            push_barrier_rows(&mut self.qp, node, sens, &f, &self.config);
        }
        &self.qp
    }

    pub fn filter_easif(&mut self, state: &State6, u_des: &Control3) -> FilterResult {
        self.explicit_rows(state);
        self.solve_qp(state, u_des)
    }

    pub fn filter_iasif(&mut self, state: &State6, u_des: &Control3) -> FilterResult {
        self.implicit_rows(state);
        self.solve_qp(state, u_des)
    }

    fn solve_qp(&mut self, state: &State6, u_des: &Control3) -> FilterResult {
        self.qp.set_least_distance(u_des.as_slice());
        let out = self.qp_solver.solve(&self.qp);
        let report = SolverReport {
            status: out.status,
            iterations: out.iterations,
            max_violation: out.max_violation,
            elapsed: out.elapsed,
            diagnostic: out.diagnostic,
        };
        let rows = self.qp.num_rows();
        if out.is_optimal() {
            let u_act = Control3::from_column_slice(&out.solution);
            FilterResult {
                u_act,
                intervened: (u_act - u_des).amax() > INTERVENTION_TOL,
                fallback: false,
                solver: Some(report),
                active_constraints: out.active.iter().copied().filter(|&k| k < rows).collect(),
            }
        } else {
            self.fallback(state, report)
        }
    }

    fn fallback(&self, state: &State6, report: SolverReport) -> FilterResult {
        let u_act = backup_control(state, &self.config);
        FilterResult {
            u_act,
            intervened: true,
            fallback: true,
            solver: Some(report),
            active_constraints: Vec::new(),
        }
    }

    pub fn filter_dasif(&mut self, state: &State6, u_des: &Control3) -> FilterResult {
        let model = DiscreteBarrier {
            state: *state,
            target: *u_des,
            h_now: safety::evaluate(state, &self.config.safety),
            stm: &self.stm,
            config: &self.config,
        };
        let start = self.config.cw.clamp_control(u_des);

        let mut residuals = [0.0; NUM_CONSTRAINTS];
        model.residuals(&start, &mut residuals);
        if residuals.iter().all(|&r| r >= 0.0) {
            return FilterResult {
                u_act: start,
                intervened: (start - u_des).amax() > INTERVENTION_TOL,
                fallback: false,
                solver: None,
                active_constraints: Vec::new(),
            };
        }

        let out = self
            .nlp_solver
            .solve(&model, start.as_slice(), &self.nlp_options);
        let report = SolverReport {
            status: out.status,
            iterations: out.iterations,
            max_violation: out.max_violation,
            elapsed: out.elapsed,
            diagnostic: out.diagnostic,
        };
        let usable = match out.status {
            SolveStatus::Optimal => true,
            SolveStatus::Timeout | SolveStatus::IterationLimit => {
                out.max_violation <= 10.0 * self.config.tolerance
            }
            SolveStatus::Infeasible => false,
        };
        if !usable {
            return self.fallback(state, report);
        }
        let u_act = Control3::from_column_slice(&out.solution);
        FilterResult {
            u_act,
            intervened: (u_act - u_des).amax() > INTERVENTION_TOL,
            fallback: false,
            solver: Some(report),
            active_constraints: out.active,
        }
    }

    /// Every barrier residual of the configured filter at thrust `u`.
    pub fn check_barrier(&mut self, state: &State6, u: &Control3) -> Vec<f64> {
        match self.config.kind {
            FilterKind::Explicit => self.explicit_rows(state).residuals(u.as_slice()),
            FilterKind::Implicit => self.implicit_rows(state).residuals(u.as_slice()),
            FilterKind::Discrete => {
                let model = DiscreteBarrier {
                    state: *state,
                    target: *u,
                    h_now: safety::evaluate(state, &self.config.safety),
                    stm: &self.stm,
                    config: &self.config,
                };
                let mut out = vec![0.0; NUM_CONSTRAINTS];
                model.residuals(u, &mut out);
                out
            }
        }
    }
}
