use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::dynamics::{CwParams, State6};
use rta_core::safety::{self, SafetyParams, NUM_CONSTRAINTS};

fn safe_state(rng: &mut ChaCha8Rng, params: &SafetyParams) -> State6 {
    loop {
        let r = rng.random_range(params.collision_radius() + 1.0..params.r_max - 1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let x = State6::new(
            r * s * phi.cos(),
            r * s * phi.sin(),
            r * z,
            v[0],
            v[1],
            v[2],
        );
        if safety::is_safe(&x, params).safe {
            return x;
        }
    }
}

#[test]
fn gradients_match_central_differences() {
    let params = SafetyParams::for_vehicle(&CwParams::default());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let x = safe_state(&mut rng, &params);
        let grads = safety::gradients(&x, &params);
        for i in 0..NUM_CONSTRAINTS {
            let mut fd = State6::zeros();
            for k in 0..6 {
                let eps = 1e-6 * x[k].abs().max(1.0);
                let mut plus = x;
                let mut minus = x;
                plus[k] += eps;
                minus[k] -= eps;
                fd[k] =
                    (safety::h(i, &plus, &params) - safety::h(i, &minus, &params)) / (2.0 * eps);
            }
            let rel = (grads[i] - fd).norm() / fd.norm().max(1e-8);
            assert!(rel <= 1e-4, "h{} at {x:?}: relative error {rel}", i + 1);
        }
    }
}

#[test]
fn barrier_values_by_hand() {
    let params = SafetyParams::default();
    // at rest 100 m out along x
    let x = State6::new(100.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let h = safety::evaluate(&x, &params);
    let a = params.a_max;
    assert!((h[0] - (2.0 * a * (100.0 - params.collision_radius())).sqrt()).abs() < 1e-12);
    assert!((h[1] - (2.0 * a * (params.r_max - 100.0)).sqrt()).abs() < 1e-12);
    assert!((h[2] - (params.nu0 + params.nu1 * 100.0)).abs() < 1e-12);
    assert_eq!(&h[3..], &[1.0, 1.0, 1.0]);
    // approaching the chief lowers the collision barrier by the closing speed
    let closing = State6::new(100.0, 0.0, 0.0, -0.3, 0.0, 0.0);
    assert!((safety::evaluate(&closing, &params)[0] - (h[0] - 0.3)).abs() < 1e-12);
}

#[test]
fn inside_collision_radius_is_unsafe() {
    let params = SafetyParams::default();
    let x = State6::new(params.collision_radius() * 0.5, 0.0, 0.0, 0.0, 0.0, 0.0);
    assert!(!safety::is_safe(&x, &params).safe);
    assert!(safety::h_collision(&x, &params) < 0.0);
}

#[test]
fn gradient_is_finite_at_degenerate_points() {
    let params = SafetyParams::default();
    for x in [
        State6::zeros(),
        State6::new(params.collision_radius(), 0.0, 0.0, 0.0, 0.0, 0.0),
    ] {
        for g in safety::gradients(&x, &params) {
            assert!(g.iter().all(|v| v.is_finite()));
        }
    }
}
