//! Small dense optimizers used by the safety filters.
//!
//! [`QpSolver`] is a Goldfarb–Idnani dual active-set method for strictly
//! convex quadratic programs. [`NlpSolver`] is an SQP method with a damped
//! BFGS Hessian and an ℓ1 merit line search that solves its subproblems with
//! the same QP solver.

mod nlp;
mod qp;

use std::time::Duration;

pub use nlp::{NlpModel, NlpOptions, NlpSolver};
pub use qp::{QpProblem, QpSolver, QP_FEASIBILITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Timeout,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
            SolveStatus::IterationLimit => "iteration-limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub solution: Vec<f64>,
    /// Largest violation over all inequality rows and bounds, `max(0, -residual)`.
    pub max_violation: f64,
    pub iterations: usize,
    pub elapsed: Duration,
    /// Multipliers of the inequality rows, followed by the lower then upper
    /// bounds (QP only; the NLP reports the multipliers of its last subproblem).
    pub multipliers: Vec<f64>,
    /// Indices (same layout as `multipliers`) of constraints active at the solution.
    pub active: Vec<usize>,
    pub diagnostic: Option<&'static str>,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
