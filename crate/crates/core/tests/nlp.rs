use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::solvers::{NlpModel, NlpOptions, NlpSolver, QpProblem, QpSolver, SolveStatus};

/// `‖u - target‖²` subject to linear rows `G u + b ≥ 0`.
struct LinearModel {
    target: [f64; 3],
    rows: Vec<([f64; 3], f64)>,
}

impl NlpModel for LinearModel {
    fn dim(&self) -> usize {
        3
    }
    fn num_constraints(&self) -> usize {
        self.rows.len()
    }
    fn objective(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).powi(2))
            .sum()
    }
    fn constraints(&self, u: &[f64], out: &mut [f64]) {
        for (o, (g, b)) in out.iter_mut().zip(&self.rows) {
            *o = g.iter().zip(u).map(|(a, x)| a * x).sum::<f64>() + b;
        }
    }
}

/// Stay outside a sphere: `‖u - c‖² ≥ r²`.
struct SphereModel {
    target: [f64; 3],
    center: [f64; 3],
    radius: f64,
}

impl NlpModel for SphereModel {
    fn dim(&self) -> usize {
        3
    }
    fn num_constraints(&self) -> usize {
        1
    }
    fn objective(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).powi(2))
            .sum()
    }
    fn constraints(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
            - self.radius.powi(2);
    }
}

fn random_linear(rng: &mut ChaCha8Rng) -> LinearModel {
    LinearModel {
        target: std::array::from_fn(|_| rng.random_range(-2.0..2.0)),
        rows: (0..rng.random_range(1..=4))
            .map(|_| {
                (
                    std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
                    rng.random_range(-0.5..1.0),
                )
            })
            .collect(),
    }
}

#[test]
fn agrees_with_qp_on_linear_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut nlp = NlpSolver::new();
    let mut qp_solver = QpSolver::new();
    let mut compared = 0;
    for _ in 0..200 {
        let model = random_linear(&mut rng);
        let mut qp = QpProblem::least_distance(&model.target);
        qp.set_bounds(&[-1.0; 3], &[1.0; 3]);
        for (g, b) in &model.rows {
            qp.push_row(g, *b);
        }
        let reference = qp_solver.solve(&qp);
        if reference.status != SolveStatus::Optimal {
            continue;
        }
        let start: Vec<f64> = model.target.iter().map(|t| t.clamp(-1.0, 1.0)).collect();
        let out = nlp.solve(
            &model,
            &start,
            &NlpOptions::new(vec![-1.0; 3], vec![1.0; 3], 1e-4),
        );
        assert_eq!(out.status, SolveStatus::Optimal);
        let err = out
            .solution
            .iter()
            .zip(&reference.solution)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(
            err <= 1e-4,
            "nlp {:?} vs qp {:?}",
            out.solution,
            reference.solution
        );
        compared += 1;
    }
    assert!(compared > 100);
}

#[test]
fn tightening_tolerance_never_increases_violation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nlp = NlpSolver::new();
    for _ in 0..200 {
        let model = SphereModel {
            target: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            center: std::array::from_fn(|_| rng.random_range(-0.5..0.5)),
            radius: rng.random_range(0.2..0.9),
        };
        let start = model.target.to_vec();
        let loose = nlp.solve(
            &model,
            &start,
            &NlpOptions::new(vec![-2.0; 3], vec![2.0; 3], 1e-3),
        );
        let tight = nlp.solve(
            &model,
            &start,
            &NlpOptions::new(vec![-2.0; 3], vec![2.0; 3], 1e-4),
        );
        assert!(
            tight.max_violation <= loose.max_violation,
            "tight {} > loose {}",
            tight.max_violation,
            loose.max_violation
        );
        assert!(tight.max_violation <= 1e-4);
    }
}

#[test]
fn floor_constraint_by_hand() {
    let model = LinearModel {
        target: [0.0; 3],
        rows: vec![([1.0, 0.0, 0.0], -1.0)],
    };
    let out = NlpSolver::new().solve(
        &model,
        &[0.0; 3],
        &NlpOptions::new(vec![-5.0; 3], vec![5.0; 3], 1e-6),
    );
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!((out.solution[0] - 1.0).abs() < 1e-6);
    assert!(out.solution[1].abs() < 1e-6 && out.solution[2].abs() < 1e-6);
}
