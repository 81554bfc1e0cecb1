use std::time::{Duration, Instant};

use super::qp::{QpProblem, QpSolver};
use super::{SolveOutcome, SolveStatus};

/// A smooth inequality-constrained problem given as black-box functions.
///
/// Constraints are satisfied when every residual is `≥ 0`. Derivatives are
/// taken by forward differences.
pub trait NlpModel {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn objective(&self, u: &[f64]) -> f64;
    fn constraints(&self, u: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlpOptions {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub time_limit: Duration,
    pub max_iterations: usize,
}

impl NlpOptions {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, tol: f64) -> Self {
        Self {
            lower,
            upper,
            rel_tol: tol,
            abs_tol: tol,
            time_limit: Duration::from_secs(60),
            max_iterations: 100,
        }
    }
}

struct Iterate {
    u: Vec<f64>,
    f: f64,
    c: Vec<f64>,
    violation: f64,
}

/// SQP with damped BFGS updates and an ℓ1 merit line search.
#[derive(Debug, Default)]
pub struct NlpSolver {
    qp: QpSolver,
    subproblem: Option<QpProblem>,
    elastic: Option<QpProblem>,
    hessian: Vec<f64>,
    grad: Vec<f64>,
    jac: Vec<f64>,
    grad_new: Vec<f64>,
    jac_new: Vec<f64>,
    scratch: Vec<f64>,
    probe: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;

fn violation_of(c: &[f64]) -> f64 {
    c.iter().fold(0.0_f64, |w, &ci| w.max(-ci))
}

fn penalty_of(c: &[f64]) -> f64 {
    c.iter().map(|&ci| (-ci).max(0.0)).sum()
}

impl NlpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve<M: NlpModel + ?Sized>(
        &mut self,
        model: &M,
        start: &[f64],
        options: &NlpOptions,
    ) -> SolveOutcome {
        let clock = Instant::now();
        let d = model.dim();
        let m = model.num_constraints();
        assert_eq!(start.len(), d);
        assert_eq!(options.lower.len(), d);
        assert_eq!(options.upper.len(), d);

        let u0: Vec<f64> = start
            .iter()
            .zip(options.lower.iter().zip(&options.upper))
            .map(|(&x, (&lo, &hi))| x.clamp(lo, hi))
            .collect();
        let mut current = self.evaluate(model, u0, m);
        let mut best_u = current.u.clone();
        let mut best_key = (current.violation, current.f);

        self.hessian.clear();
        self.hessian.resize(d * d, 0.0);
        for i in 0..d {
            self.hessian[i * d + i] = 1.0;
        }
        self.grad.resize(d, 0.0);
        self.jac.resize(m * d, 0.0);
        self.grad_new.resize(d, 0.0);
        self.jac_new.resize(m * d, 0.0);
        let mut grad = std::mem::take(&mut self.grad);
        let mut jac = std::mem::take(&mut self.jac);
        self.differentiate(model, &current, &mut grad, &mut jac);

        let mut penalty_weight: f64 = 1.0;
        let mut multipliers = vec![0.0; m];
        let mut status = SolveStatus::IterationLimit;
        let mut diagnostic = Some("iteration cap reached");
        let mut iterations = 0;

        while iterations < options.max_iterations {
            if clock.elapsed() >= options.time_limit {
                status = SolveStatus::Timeout;
                diagnostic = Some("wall-clock limit reached");
                break;
            }
            iterations += 1;

            let (step, sub_mult, relaxed) =
                match self.search_direction(&current, &grad, &jac, options) {
                    Some(found) => found,
                    None => {
                        diagnostic = Some("search direction subproblem failed");
                        break;
                    }
                };
            multipliers.copy_from_slice(&sub_mult[..m]);

            let u_scale = current.u.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            let step_tol = options.abs_tol + options.rel_tol * u_scale;
            let step_norm = step.iter().fold(0.0_f64, |a, x| a.max(x.abs()));

            if !relaxed && step_norm <= step_tol && current.violation <= options.abs_tol {
                // Converged; take the final step when it keeps feasibility.
                let trial: Vec<f64> = current.u.iter().zip(&step).map(|(u, s)| u + s).collect();
                let trial = self.evaluate(model, trial, m);
                if trial.violation <= options.abs_tol && trial.f <= current.f + options.abs_tol {
                    current = trial;
                }
                status = SolveStatus::Optimal;
                diagnostic = None;
                break;
            }

            let lambda_max = multipliers.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
            if penalty_weight < 1.5 * lambda_max {
                penalty_weight = (2.0 * lambda_max).max(0.5 * (penalty_weight + lambda_max));
            }
            let merit0 = current.f + penalty_weight * penalty_of(&current.c);
            let slope = dot(&grad, &step) - penalty_weight * penalty_of(&current.c);

            let mut alpha = 1.0;
            let mut accepted = None;
            let mut timed_out = false;
            loop {
                let trial: Vec<f64> = current
                    .u
                    .iter()
                    .zip(&step)
                    .zip(options.lower.iter().zip(&options.upper))
                    .map(|((u, s), (&lo, &hi))| (u + alpha * s).clamp(lo, hi))
                    .collect();
                let trial = self.evaluate(model, trial, m);
                let merit = trial.f + penalty_weight * penalty_of(&trial.c);
                if merit <= merit0 + ARMIJO * alpha * slope.min(0.0) || alpha < MIN_STEP {
                    accepted = Some(trial);
                    break;
                }
                if clock.elapsed() >= options.time_limit {
                    timed_out = true;
                    break;
                }
                alpha *= 0.5;
            }
            let Some(next) = accepted else {
                debug_assert!(timed_out);
                status = SolveStatus::Timeout;
                diagnostic = Some("wall-clock limit reached");
                break;
            };

            let mut grad_new = std::mem::take(&mut self.grad_new);
            let mut jac_new = std::mem::take(&mut self.jac_new);
            self.differentiate(model, &next, &mut grad_new, &mut jac_new);
            self.update_hessian(
                &current,
                &next,
                &grad,
                &grad_new,
                &jac,
                &jac_new,
                &multipliers,
            );

            let key = (next.violation, next.f);
            if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
                best_key = key;
                best_u.clear();
                best_u.extend_from_slice(&next.u);
            }

            current = next;
            std::mem::swap(&mut grad, &mut grad_new);
            std::mem::swap(&mut jac, &mut jac_new);
            self.grad_new = grad_new;
            self.jac_new = jac_new;
        }

        self.grad = grad;
        self.jac = jac;

        let (solution, max_violation) = if status == SolveStatus::Optimal {
            (current.u, current.violation)
        } else {
            let key = (current.violation, current.f);
            if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
                (current.u, current.violation)
            } else {
                (best_u, best_key.0)
            }
        };
        let active = multipliers
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(i, _)| i)
            .collect();
        SolveOutcome {
            status,
            solution,
            max_violation,
            iterations,
            elapsed: clock.elapsed(),
            multipliers,
            active,
            diagnostic,
        }
    }

    fn evaluate<M: NlpModel + ?Sized>(&self, model: &M, u: Vec<f64>, m: usize) -> Iterate {
        let f = model.objective(&u);
        let mut c = vec![0.0; m];
        model.constraints(&u, &mut c);
        let violation = violation_of(&c);
        Iterate { u, f, c, violation }
    }

    /// Forward-difference gradient of the objective and Jacobian (row-major) of the constraints.
    fn differentiate<M: NlpModel + ?Sized>(
        &mut self,
        model: &M,
        at: &Iterate,
        grad: &mut [f64],
        jac: &mut [f64],
    ) {
        let d = at.u.len();
        let m = at.c.len();
        self.probe.clear();
        self.probe.extend_from_slice(&at.u);
        self.scratch.resize(m, 0.0);
        for j in 0..d {
            let h = f64::EPSILON.sqrt() * at.u[j].abs().max(1.0);
            let saved = self.probe[j];
            self.probe[j] = saved + h;
            let h = self.probe[j] - saved;
            grad[j] = (model.objective(&self.probe) - at.f) / h;
            model.constraints(&self.probe, &mut self.scratch);
            for i in 0..m {
                jac[i * d + j] = (self.scratch[i] - at.c[i]) / h;
            }
            self.probe[j] = saved;
        }
    }

    /// Solves the QP subproblem; falls back to an elastic relaxation when the
    /// linearized constraints are inconsistent. Returns `(step, multipliers, relaxed)`.
    fn search_direction(
        &mut self,
        at: &Iterate,
        grad: &[f64],
        jac: &[f64],
        options: &NlpOptions,
    ) -> Option<(Vec<f64>, Vec<f64>, bool)> {
        let d = at.u.len();
        let m = at.c.len();
        let lower: Vec<f64> = options
            .lower
            .iter()
            .zip(&at.u)
            .map(|(lo, u)| lo - u)
            .collect();
        let upper: Vec<f64> = options
            .upper
            .iter()
            .zip(&at.u)
            .map(|(hi, u)| hi - u)
            .collect();

        let sub = self.subproblem.get_or_insert_with(|| QpProblem::new(d));
        if sub.dim() != d {
            *sub = QpProblem::new(d);
        }
        sub.hessian.copy_from_slice(&self.hessian);
        sub.linear.copy_from_slice(grad);
        sub.clear_rows();
        for i in 0..m {
            sub.push_row(&jac[i * d..(i + 1) * d], at.c[i]);
        }
        sub.set_bounds(&lower, &upper);
        let out = self.qp.solve(sub);
        if out.is_optimal() {
            return Some((out.solution, out.multipliers, false));
        }

        // Elastic mode: one extra variable ξ ∈ [0, 1] relaxing the violated rows.
        let grad_scale = grad.iter().fold(1.0_f64, |a, g| a.max(g.abs()));
        let e = self.elastic.get_or_insert_with(|| QpProblem::new(d + 1));
        if e.dim() != d + 1 {
            *e = QpProblem::new(d + 1);
        }
        e.hessian.iter_mut().for_each(|h| *h = 0.0);
        for r in 0..d {
            for c in 0..d {
                e.hessian[r * (d + 1) + c] = self.hessian[r * d + c];
            }
            e.linear[r] = grad[r];
        }
        e.hessian[d * (d + 1) + d] = 1.0;
        e.linear[d] = 1e3 * grad_scale;
        e.clear_rows();
        let mut row = vec![0.0; d + 1];
        for i in 0..m {
            row[..d].copy_from_slice(&jac[i * d..(i + 1) * d]);
            row[d] = (-at.c[i]).max(0.0);
            e.push_row(&row, at.c[i]);
        }
        let mut lo = lower;
        let mut hi = upper;
        lo.push(0.0);
        hi.push(1.0);
        e.set_bounds(&lo, &hi);
        let out = self.qp.solve(e);
        if !out.is_optimal() {
            return None;
        }
        let mut step = out.solution;
        step.truncate(d);
        Some((step, out.multipliers, true))
    }

    #[allow(clippy::too_many_arguments)]
    fn update_hessian(
        &mut self,
        old: &Iterate,
        new: &Iterate,
        grad_old: &[f64],
        grad_new: &[f64],
        jac_old: &[f64],
        jac_new: &[f64],
        lambda: &[f64],
    ) {
        let d = old.u.len();
        let m = old.c.len();
        let s: Vec<f64> = new.u.iter().zip(&old.u).map(|(a, b)| a - b).collect();
        // y = ∇L(new) - ∇L(old), L = f - λᵀc
        let mut y: Vec<f64> = grad_new.iter().zip(grad_old).map(|(a, b)| a - b).collect();
        for i in 0..m {
            if lambda[i] != 0.0 {
                for j in 0..d {
                    y[j] -= lambda[i] * (jac_new[i * d + j] - jac_old[i * d + j]);
                }
            }
        }
        let bs: Vec<f64> = (0..d)
            .map(|r| (0..d).map(|c| self.hessian[r * d + c] * s[c]).sum())
            .collect();
        let sbs = dot(&s, &bs);
        if !(sbs > 1e-16) {
            return;
        }
        // Powell damping keeps the update positive definite.
        let sy = dot(&s, &y);
        let theta = if sy >= 0.2 * sbs {
            1.0
        } else {
            0.8 * sbs / (sbs - sy)
        };
        let r: Vec<f64> = y
            .iter()
            .zip(&bs)
            .map(|(yi, bi)| theta * yi + (1.0 - theta) * bi)
            .collect();
        let sr = dot(&s, &r);
        if !(sr > 1e-16) {
            return;
        }
        for a in 0..d {
            for b in 0..d {
                self.hessian[a * d + b] += r[a] * r[b] / sr - bs[a] * bs[b] / sbs;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct NormWithFloor;

    impl NlpModel for NormWithFloor {
        fn dim(&self) -> usize {
            3
        }
        fn num_constraints(&self) -> usize {
            1
        }
        fn objective(&self, u: &[f64]) -> f64 {
            u.iter().map(|x| x * x).sum()
        }
        fn constraints(&self, u: &[f64], out: &mut [f64]) {
            out[0] = u[0] - 1.0;
        }
    }

    struct Disk;

    impl NlpModel for Disk {
        fn dim(&self) -> usize {
            2
        }
        fn num_constraints(&self) -> usize {
            1
        }
        fn objective(&self, u: &[f64]) -> f64 {
            (u[0] - 2.0).powi(2) + (u[1] - 2.0).powi(2)
        }
        fn constraints(&self, u: &[f64], out: &mut [f64]) {
            out[0] = 1.0 - u[0] * u[0] - u[1] * u[1];
        }
    }

    struct Impossible;

    impl NlpModel for Impossible {
        fn dim(&self) -> usize {
            1
        }
        fn num_constraints(&self) -> usize {
            1
        }
        fn objective(&self, u: &[f64]) -> f64 {
            u[0] * u[0]
        }
        fn constraints(&self, u: &[f64], out: &mut [f64]) {
            out[0] = -1.0 - u[0] * u[0];
        }
    }

    #[test]
    fn linear_floor_on_first_axis() {
        let opts = NlpOptions::new(vec![-5.0; 3], vec![5.0; 3], 1e-6);
        let out = NlpSolver::new().solve(&NormWithFloor, &[0.0, 0.3, -0.2], &opts);
        assert!(out.is_optimal(), "{out:?}");
        assert_relative_eq!(
            out.solution.as_slice(),
            [1.0, 0.0, 0.0].as_slice(),
            epsilon = 1e-5
        );
    }

    #[test]
    fn nonlinear_disk_projection() {
        let opts = NlpOptions::new(vec![-5.0; 2], vec![5.0; 2], 1e-8);
        let out = NlpSolver::new().solve(&Disk, &[0.0, 0.0], &opts);
        assert!(out.is_optimal(), "{out:?}");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(out.solution.as_slice(), [h, h].as_slice(), epsilon = 1e-6);
        assert!(out.max_violation <= 1e-8);
    }

    #[test]
    fn feasible_start_at_unconstrained_minimum_stops_immediately() {
        let opts = NlpOptions::new(vec![-5.0; 3], vec![5.0; 3], 1e-4);
        let out = NlpSolver::new().solve(&NormWithFloor, &[1.5, 0.0, 0.0], &opts);
        assert!(out.is_optimal());
        // objective gradient is 2u, so the start is not the minimizer; it must move to u0 = 1
        assert_relative_eq!(out.solution[0], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn infeasible_problem_hits_a_limit() {
        let mut opts = NlpOptions::new(vec![-5.0], vec![5.0], 1e-4);
        opts.time_limit = Duration::from_millis(50);
        let t = Instant::now();
        let out = NlpSolver::new().solve(&Impossible, &[3.0], &opts);
        assert!(matches!(
            out.status,
            SolveStatus::IterationLimit | SolveStatus::Timeout
        ));
        assert!(t.elapsed() < Duration::from_millis(200));
        assert!(out.max_violation >= 1.0);

        opts.max_iterations = usize::MAX;
        let t = Instant::now();
        let out = NlpSolver::new().solve(&Impossible, &[3.0], &opts);
        assert_eq!(out.status, SolveStatus::Timeout);
        assert!(t.elapsed() < Duration::from_millis(200));
    }

    #[test]
    fn deterministic() {
        let opts = NlpOptions::new(vec![-5.0; 2], vec![5.0; 2], 1e-6);
        let a = NlpSolver::new().solve(&Disk, &[0.1, -0.4], &opts);
        let b = NlpSolver::new().solve(&Disk, &[0.1, -0.4], &opts);
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.iterations, b.iterations);
    }
}
