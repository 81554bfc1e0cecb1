use std::time::Instant;

use super::{SolveOutcome, SolveStatus};

/// Violation allowed at an optimal QP solution.
pub const QP_FEASIBILITY_TOL: f64 = 1e-8;

/// Constraints with slack below `-ADD_TOL` are pulled into the active set.
const ADD_TOL: f64 = 1e-11;

/// `½ uᵀ H u + qᵀ u` subject to `G u + b ≥ 0` and `lower ≤ u ≤ upper`.
///
/// Matrices are dense and row-major. Infinite bounds are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    dim: usize,
    pub hessian: Vec<f64>,
    pub linear: Vec<f64>,
    pub rows: Vec<f64>,
    pub offsets: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QpProblem {
    /// Identity Hessian, zero linear term, no rows and unbounded box.
    pub fn new(dim: usize) -> Self {
        let mut hessian = vec![0.0; dim * dim];
        for i in 0..dim {
            hessian[i * dim + i] = 1.0;
        }
        Self {
            dim,
            hessian,
            linear: vec![0.0; dim],
            rows: Vec::new(),
            offsets: Vec::new(),
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    /// Objective `‖u - target‖²`, i.e. `H = 2I`, `q = -2 target`.
    pub fn least_distance(target: &[f64]) -> Self {
        let mut qp = Self::new(target.len());
        qp.set_least_distance(target);
        qp
    }

    pub fn set_least_distance(&mut self, target: &[f64]) {
        assert_eq!(target.len(), self.dim);
        let d = self.dim;
        self.hessian.iter_mut().for_each(|h| *h = 0.0);
        for i in 0..d {
            self.hessian[i * d + i] = 2.0;
            self.linear[i] = -2.0 * target[i];
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    /// Append the inequality `row · u + offset ≥ 0`.
    pub fn push_row(&mut self, row: &[f64], offset: f64) {
        assert_eq!(row.len(), self.dim);
        self.rows.extend_from_slice(row);
        self.offsets.push(offset);
    }

    pub fn clear_rows(&mut self) {
        self.rows.clear();
        self.offsets.clear();
    }

    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        self.lower.copy_from_slice(lower);
        self.upper.copy_from_slice(upper);
    }

    pub fn objective(&self, u: &[f64]) -> f64 {
        let d = self.dim;
        let mut value = 0.0;
        for i in 0..d {
            let hu: f64 = (0..d).map(|j| self.hessian[i * d + j] * u[j]).sum();
            value += 0.5 * u[i] * hu + self.linear[i] * u[i];
        }
        value
    }

    /// Residuals `G u + b` of the inequality rows.
    pub fn residuals(&self, u: &[f64]) -> Vec<f64> {
        (0..self.num_rows())
            .map(|i| dot(self.row(i), u) + self.offsets[i])
            .collect()
    }

    /// Largest violation of rows and bounds at `u`.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.num_rows() {
            worst = worst.max(-(dot(self.row(i), u) + self.offsets[i]));
        }
        for j in 0..self.dim {
            worst = worst.max(self.lower[j] - u[j]).max(u[j] - self.upper[j]);
        }
        worst
    }

    /// Total number of constraints seen by the solver: rows, lower bounds, upper bounds.
    pub fn num_constraints(&self) -> usize {
        self.num_rows() + 2 * self.dim
    }

    /// Constraint `k` in the form `normalᵀ u ≥ rhs`, written into `normal`.
    fn constraint(&self, k: usize, normal: &mut [f64]) -> f64 {
        let m = self.num_rows();
        let d = self.dim;
        if k < m {
            normal.copy_from_slice(self.row(k));
            -self.offsets[k]
        } else if k < m + d {
            let j = k - m;
            normal.iter_mut().for_each(|x| *x = 0.0);
            normal[j] = 1.0;
            self.lower[j]
        } else {
            let j = k - m - d;
            normal.iter_mut().for_each(|x| *x = 0.0);
            normal[j] = -1.0;
            -self.upper[j]
        }
    }

    /// Slack `normalᵀ u - rhs`; infinite bounds are never binding.
    fn slack(&self, k: usize, u: &[f64]) -> f64 {
        let m = self.num_rows();
        let d = self.dim;
        if k < m {
            dot(self.row(k), u) + self.offsets[k]
        } else if k < m + d {
            let j = k - m;
            if self.lower[j].is_finite() {
                u[j] - self.lower[j]
            } else {
                f64::INFINITY
            }
        } else {
            let j = k - m - d;
            if self.upper[j].is_finite() {
                self.upper[j] - u[j]
            } else {
                f64::INFINITY
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns `(c, s, r)` with `[c s; -s c] [a; b] = [r; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        (1.0, 0.0, 0.0)
    } else {
        (a / r, b / r, r)
    }
}

/// Goldfarb–Idnani dual active-set solver with reusable workspace.
///
/// Not shareable across threads while solving; create one per thread.
#[derive(Debug, Default)]
pub struct QpSolver {
    // J (column-major d×d): orthogonal-ish factor with Jᵀ H J = I
    j: Vec<f64>,
    // R (column-major d×d), upper triangular in its leading `nact` columns
    r: Vec<f64>,
    x: Vec<f64>,
    normal: Vec<f64>,
    dvec: Vec<f64>,
    z: Vec<f64>,
    rdir: Vec<f64>,
    active: Vec<usize>,
    mult: Vec<f64>,
    chol: Vec<f64>,
    pub max_iterations: Option<usize>,
}

enum Breakdown {
    NotPositiveDefinite,
}

impl QpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, problem: &QpProblem) -> SolveOutcome {
        let start = Instant::now();
        let d = problem.dim();
        let total = problem.num_constraints();

        if let Err(Breakdown::NotPositiveDefinite) = self.initialize(problem) {
            return SolveOutcome {
                status: SolveStatus::Infeasible,
                solution: vec![f64::NAN; d],
                max_violation: f64::INFINITY,
                iterations: 0,
                elapsed: start.elapsed(),
                multipliers: vec![0.0; total],
                active: Vec::new(),
                diagnostic: Some("hessian is not positive definite"),
            };
        }

        for j in 0..d {
            if problem.lower[j] > problem.upper[j] {
                return self.finish(
                    problem,
                    start,
                    0,
                    SolveStatus::Infeasible,
                    Some("empty box"),
                );
            }
        }

        let max_iter = self.max_iterations.unwrap_or(10 * (total + d) + 20);
        let mut iterations = 0;

        loop {
            // Step 1: pick the most violated constraint, lowest index on ties.
            let mut p = usize::MAX;
            let mut worst = -ADD_TOL;
            for k in 0..total {
                if self.active.contains(&k) {
                    continue;
                }
                let s = problem.slack(k, &self.x);
                if s < worst {
                    worst = s;
                    p = k;
                }
            }
            if p == usize::MAX {
                return self.finish(problem, start, iterations, SolveStatus::Optimal, None);
            }

            let rhs = {
                let mut normal = std::mem::take(&mut self.normal);
                let rhs = problem.constraint(p, &mut normal);
                self.normal = normal;
                rhs
            };
            let mut slack_p = dot(&self.normal, &self.x) - rhs;
            let mut mult_p = 0.0;

            // Step 2: move along primal/dual directions until p can be added.
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return self.finish(
                        problem,
                        start,
                        iterations,
                        SolveStatus::IterationLimit,
                        Some("active-set iteration cap reached"),
                    );
                }

                let nact = self.active.len();
                self.compute_directions(d, nact);

                // partial (dual) step
                let mut t1 = f64::INFINITY;
                let mut drop_at = usize::MAX;
                for i in 0..nact {
                    if self.rdir[i] > 0.0 {
                        let ratio = self.mult[i] / self.rdir[i];
                        if ratio < t1 {
                            t1 = ratio;
                            drop_at = i;
                        }
                    }
                }

                // full (primal) step
                let d2_norm2: f64 = self.dvec[nact..d].iter().map(|v| v * v).sum();
                let d_norm2: f64 = self.dvec.iter().map(|v| v * v).sum();
                let primal_blocked = d2_norm2 <= 1e-20 * d_norm2.max(f64::MIN_POSITIVE);
                let t2 = if primal_blocked {
                    f64::INFINITY
                } else {
                    -slack_p / d2_norm2
                };

                let t = t1.min(t2);
                if !t.is_finite() {
                    return self.finish(
                        problem,
                        start,
                        iterations,
                        SolveStatus::Infeasible,
                        Some("constraints are inconsistent"),
                    );
                }

                if !primal_blocked {
                    for i in 0..d {
                        self.x[i] += t * self.z[i];
                    }
                    slack_p += t * d2_norm2;
                }
                for i in 0..nact {
                    self.mult[i] -= t * self.rdir[i];
                }
                mult_p += t;

                if !primal_blocked && t2 <= t1 {
                    self.add_constraint(d, p, mult_p);
                    break;
                }
                self.drop_constraint(d, drop_at);
            }
        }
    }

    fn initialize(&mut self, problem: &QpProblem) -> Result<(), Breakdown> {
        let d = problem.dim();
        self.active.clear();
        self.mult.clear();
        self.x.resize(d, 0.0);
        self.normal.resize(d, 0.0);
        self.dvec.resize(d, 0.0);
        self.z.resize(d, 0.0);
        self.rdir.resize(d, 0.0);
        self.r.clear();
        self.r.resize(d * d, 0.0);

        // Cholesky H = L Lᵀ, L stored row-major in `chol`.
        self.chol.clear();
        self.chol.extend_from_slice(&problem.hessian);
        let l = &mut self.chol;
        for i in 0..d {
            for k in 0..=i {
                let mut sum = l[i * d + k];
                for m in 0..k {
                    sum -= l[i * d + m] * l[k * d + m];
                }
                if i == k {
                    if !(sum > 0.0) {
                        return Err(Breakdown::NotPositiveDefinite);
                    }
                    l[i * d + i] = sum.sqrt();
                } else {
                    l[i * d + k] = sum / l[k * d + k];
                }
            }
            for k in i + 1..d {
                l[i * d + k] = 0.0;
            }
        }

        // J = L⁻ᵀ (column-major): solve Lᵀ J = I column by column.
        self.j.clear();
        self.j.resize(d * d, 0.0);
        for col in 0..d {
            for row in (0..d).rev() {
                let mut sum = if row == col { 1.0 } else { 0.0 };
                for m in row + 1..d {
                    sum -= l[m * d + row] * self.j[col * d + m];
                }
                self.j[col * d + row] = sum / l[row * d + row];
            }
        }

        // Unconstrained minimizer x = -J Jᵀ q.
        for i in 0..d {
            self.dvec[i] = (0..d).map(|r| self.j[i * d + r] * problem.linear[r]).sum();
        }
        for r in 0..d {
            self.x[r] = -(0..d)
                .map(|i| self.j[i * d + r] * self.dvec[i])
                .sum::<f64>();
        }
        Ok(())
    }

    /// `d = Jᵀ n`, `z = J₂ d₂`, `r = R⁻¹ d₁`.
    fn compute_directions(&mut self, d: usize, nact: usize) {
        for i in 0..d {
            self.dvec[i] = (0..d)
                .map(|row| self.j[i * d + row] * self.normal[row])
                .sum();
        }
        for row in 0..d {
            self.z[row] = (nact..d).map(|i| self.j[i * d + row] * self.dvec[i]).sum();
        }
        for i in (0..nact).rev() {
            let mut sum = self.dvec[i];
            for k in i + 1..nact {
                sum -= self.r[k * d + i] * self.rdir[k];
            }
            self.rdir[i] = sum / self.r[i * d + i];
        }
    }

    fn rotate_j_columns(&mut self, d: usize, a: usize, b: usize, c: f64, s: f64) {
        for row in 0..d {
            let ja = self.j[a * d + row];
            let jb = self.j[b * d + row];
            self.j[a * d + row] = c * ja + s * jb;
            self.j[b * d + row] = -s * ja + c * jb;
        }
    }

    fn add_constraint(&mut self, d: usize, p: usize, mult_p: f64) {
        let nact = self.active.len();
        for i in (nact + 1..d).rev() {
            let (c, s, r) = givens(self.dvec[i - 1], self.dvec[i]);
            self.dvec[i - 1] = r;
            self.dvec[i] = 0.0;
            self.rotate_j_columns(d, i - 1, i, c, s);
        }
        for i in 0..=nact {
            self.r[nact * d + i] = self.dvec[i];
        }
        self.active.push(p);
        self.mult.push(mult_p);
    }

    fn drop_constraint(&mut self, d: usize, at: usize) {
        let nact = self.active.len();
        if at >= nact {
            return;
        }
        self.active.remove(at);
        self.mult.remove(at);
        // shift R columns left
        for col in at..nact - 1 {
            for row in 0..d {
                self.r[col * d + row] = self.r[(col + 1) * d + row];
            }
        }
        for row in 0..d {
            self.r[(nact - 1) * d + row] = 0.0;
        }
        // restore triangularity
        for col in at..nact - 1 {
            let (c, s, r) = givens(self.r[col * d + col], self.r[col * d + col + 1]);
            self.r[col * d + col] = r;
            self.r[col * d + col + 1] = 0.0;
            for k in col + 1..nact - 1 {
                let a = self.r[k * d + col];
                let b = self.r[k * d + col + 1];
                self.r[k * d + col] = c * a + s * b;
                self.r[k * d + col + 1] = -s * a + c * b;
            }
            self.rotate_j_columns(d, col, col + 1, c, s);
        }
    }

    fn finish(
        &self,
        problem: &QpProblem,
        start: Instant,
        iterations: usize,
        mut status: SolveStatus,
        diagnostic: Option<&'static str>,
    ) -> SolveOutcome {
        let total = problem.num_constraints();
        let mut multipliers = vec![0.0; total];
        for (&k, &m) in self.active.iter().zip(&self.mult) {
            multipliers[k] = m;
        }
        let max_violation = problem.max_violation(&self.x);
        if status == SolveStatus::Optimal && !(max_violation <= QP_FEASIBILITY_TOL) {
            status = SolveStatus::Infeasible;
        }
        SolveOutcome {
            status,
            solution: self.x.clone(),
            max_violation,
            iterations,
            elapsed: start.elapsed(),
            multipliers,
            active: self.active.clone(),
            diagnostic: if status == SolveStatus::Infeasible && diagnostic.is_none() {
                Some("optimal point exceeds feasibility tolerance")
            } else {
                diagnostic
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unconstrained_projection_onto_box() {
        let mut qp = QpProblem::least_distance(&[0.3, -2.0, 5.0]);
        qp.set_bounds(&[-1.0; 3], &[1.0; 3]);
        let out = QpSolver::new().solve(&qp);
        assert!(out.is_optimal());
        assert_relative_eq!(
            out.solution.as_slice(),
            [0.3, -1.0, 1.0].as_slice(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_upper_constraint() {
        let mut qp = QpProblem::least_distance(&[1.0]);
        qp.push_row(&[-1.0], 0.5);
        let out = QpSolver::new().solve(&qp);
        assert!(out.is_optimal());
        assert_relative_eq!(out.solution[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(out.multipliers[0], 1.0, epsilon = 1e-12);
        assert_eq!(out.active, vec![0]);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        let mut qp = QpProblem::least_distance(&[0.0]);
        qp.push_row(&[1.0], -1.0);
        qp.push_row(&[-1.0], -1.0);
        let out = QpSolver::new().solve(&qp);
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert!(out.diagnostic.is_some());
    }

    #[test]
    fn constraint_conflicting_with_box_is_infeasible() {
        let mut qp = QpProblem::least_distance(&[0.0, 0.0]);
        qp.set_bounds(&[-1.0, -1.0], &[1.0, 1.0]);
        qp.push_row(&[1.0, 1.0], -3.0);
        let out = QpSolver::new().solve(&qp);
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn degenerate_zero_row_with_positive_offset_is_ignored() {
        let mut qp = QpProblem::least_distance(&[0.2, 0.1, 0.0]);
        qp.push_row(&[0.0, 0.0, 0.0], 1.0);
        let out = QpSolver::new().solve(&qp);
        assert!(out.is_optimal());
        assert_relative_eq!(out.solution.as_slice(), [0.2, 0.1, 0.0].as_slice());
    }

    #[test]
    fn general_hessian_with_two_active_rows() {
        // min x² + xy + y² - x   s.t. x ≥ 1, y ≥ 1
        let mut qp = QpProblem::new(2);
        qp.hessian = vec![2.0, 1.0, 1.0, 2.0];
        qp.linear = vec![-1.0, 0.0];
        qp.push_row(&[1.0, 0.0], -1.0);
        qp.push_row(&[0.0, 1.0], -1.0);
        let out = QpSolver::new().solve(&qp);
        assert!(out.is_optimal());
        assert_relative_eq!(
            out.solution.as_slice(),
            [1.0, 1.0].as_slice(),
            epsilon = 1e-12
        );
        // stationarity: H u + q = Σ λ n
        assert_relative_eq!(out.multipliers[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(out.multipliers[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn not_positive_definite_is_reported() {
        let mut qp = QpProblem::new(2);
        qp.hessian = vec![1.0, 2.0, 2.0, 1.0];
        let out = QpSolver::new().solve(&qp);
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn workspace_reuse_gives_identical_results() {
        let mut solver = QpSolver::new();
        let mut qp = QpProblem::least_distance(&[0.9, -0.4, 0.7]);
        qp.set_bounds(&[-1.0; 3], &[1.0; 3]);
        qp.push_row(&[-1.0, -1.0, 0.0], 0.2);
        qp.push_row(&[0.0, 1.0, -2.0], 0.1);
        let first = solver.solve(&qp);
        let mut other = QpProblem::least_distance(&[5.0, 5.0, 5.0]);
        other.push_row(&[-1.0, 0.0, 0.0], 1.0);
        solver.solve(&other);
        let again = solver.solve(&qp);
        assert_eq!(first.solution, again.solution);
        assert_eq!(first.active, again.active);
    }
}
