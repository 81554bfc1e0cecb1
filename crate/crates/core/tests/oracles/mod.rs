//! Reference implementations used only as test oracles. Each is written
//! independently of the library code path it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.iter().map(|x| x.abs()).fold(0.0, f64::max) * m.nrows() as f64;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.01 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let n = m.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Clohessy-Wiltshire system matrix written out from the equations of motion.
pub fn cw_a(n: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(6, 6);
    a[(0, 3)] = 1.0;
    a[(1, 4)] = 1.0;
    a[(2, 5)] = 1.0;
    a[(3, 0)] = 3.0 * n * n;
    a[(3, 4)] = 2.0 * n;
    a[(4, 3)] = -2.0 * n;
    a[(5, 2)] = -n * n;
    a
}

pub fn cw_b(mass: f64) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(6, 3);
    for i in 0..3 {
        b[(3 + i, i)] = 1.0 / mass;
    }
    b
}

/// Zero-order-hold transition pair from the exponential of the augmented
/// matrix `[[A, B], [0, 0]]`.
pub fn zoh(n: f64, mass: f64, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut aug = DMatrix::zeros(9, 9);
    aug.view_mut((0, 0), (6, 6)).copy_from(&(cw_a(n) * dt));
    aug.view_mut((0, 6), (6, 3)).copy_from(&(cw_b(mass) * dt));
    let e = expm(&aug);
    (
        e.view((0, 0), (6, 6)).into_owned(),
        e.view((0, 6), (6, 3)).into_owned(),
    )
}

/// A dense convex QP `½uᵀHu + qᵀu` s.t. `a_k·u ≥ c_k`, in plain arrays.
pub struct PlainQp {
    pub h: DMatrix<f64>,
    pub q: DVector<f64>,
    pub normals: Vec<DVector<f64>>,
    pub rhs: Vec<f64>,
}

impl PlainQp {
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        0.5 * u.dot(&(&self.h * u)) + self.q.dot(u)
    }

    pub fn violation(&self, u: &DVector<f64>) -> f64 {
        self.normals
            .iter()
            .zip(&self.rhs)
            .map(|(a, c)| c - a.dot(u))
            .fold(0.0, f64::max)
    }
}

/// Brute-force active-set enumeration: every subset of at most `d`
/// constraints is treated as equalities, the KKT system is solved, and the
/// feasible candidate with the lowest objective wins. Returns `None` when no
/// candidate is feasible.
pub fn brute_force_qp(qp: &PlainQp, feas_tol: f64) -> Option<(DVector<f64>, f64)> {
    let d = qp.q.len();
    let m = qp.normals.len();
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut subset = Vec::new();
    fn recurse(
        start: usize,
        subset: &mut Vec<usize>,
        d: usize,
        m: usize,
        qp: &PlainQp,
        tol: f64,
        best: &mut Option<(DVector<f64>, f64)>,
    ) {
        if let Some(u) = solve_equality(qp, subset) {
            if qp.violation(&u) <= tol {
                let f = qp.objective(&u);
                if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
                    *best = Some((u, f));
                }
            }
        }
        if subset.len() == d {
            return;
        }
        for k in start..m {
            subset.push(k);
            recurse(k + 1, subset, d, m, qp, tol, best);
            subset.pop();
        }
    }
    recurse(0, &mut subset, d, m, qp, feas_tol, &mut best);
    best
}

fn solve_equality(qp: &PlainQp, active: &[usize]) -> Option<DVector<f64>> {
    let d = qp.q.len();
    let k = active.len();
    let mut kkt = DMatrix::zeros(d + k, d + k);
    let mut rhs = DVector::zeros(d + k);
    kkt.view_mut((0, 0), (d, d)).copy_from(&qp.h);
    for i in 0..d {
        rhs[i] = -qp.q[i];
    }
    for (r, &c) in active.iter().enumerate() {
        for j in 0..d {
            kkt[(j, d + r)] = -qp.normals[c][j];
            kkt[(d + r, j)] = qp.normals[c][j];
        }
        rhs[d + r] = qp.rhs[c];
    }
    let lu = kkt.full_piv_lu();
    if !lu.is_invertible() {
        return None;
    }
    // reject nearly singular active sets (linearly dependent normals)
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|x| x.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot < 1e-10 {
        return None;
    }
    lu.solve(&rhs).map(|x| x.rows(0, d).into_owned())
}

/// Straight-line forward pass over explicit layer descriptions
/// `(inputs, outputs, weights row-major, bias, tanh?)`.
pub fn mlp_forward(layers: &[(usize, usize, &[f64], &[f64], bool)], input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for &(inputs, outputs, w, b, tanh) in layers {
        assert_eq!(x.len(), inputs);
        let mut y = vec![0.0; outputs];
        for o in 0..outputs {
            let mut acc = b[o];
            for i in 0..inputs {
                acc += w[o * inputs + i] * x[i];
            }
            y[o] = if tanh {
                let e = (2.0 * acc).exp();
                if e.is_infinite() {
                    1.0
                } else {
                    (e - 1.0) / (e + 1.0)
                }
            } else {
                acc
            };
        }
        x = y;
    }
    x
}

/// Sort-and-slice interquartile mean.
pub fn iqm(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut = s.len() / 4;
    let kept = &s[cut..s.len() - cut];
    kept.iter().sum::<f64>() / kept.len() as f64
}
