use proptest::prelude::*;
use rta_bench::{compute_stats, BenchError};

fn oracle_iqm(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len() / 4;
    let middle = &v[k..v.len() - k];
    middle.iter().sum::<f64>() / middle.len() as f64
}

#[test]
fn worked_example() {
    let s = compute_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
    assert_eq!((s.iqm, s.moet, s.min, s.median), (2.5, 4.0, 1.0, 2.5));
    assert_eq!(s.n, 4);
}

#[test]
fn constant_samples() {
    let s = compute_stats(&[0.75; 9]).unwrap();
    assert_eq!([s.iqm, s.mean, s.median, s.min, s.moet], [0.75; 5]);
    assert_eq!(s.std, 0.0);
}

#[test]
fn empty_input_is_an_error() {
    assert!(matches!(compute_stats(&[]), Err(BenchError::EmptySamples)));
}

proptest! {
    #[test]
    fn iqm_matches_sort_and_slice(samples in prop::collection::vec(0.0f64..1.0, 1..257)) {
        let s = compute_stats(&samples).unwrap();
        prop_assert_eq!(s.iqm, oracle_iqm(&samples));
        prop_assert!(s.min <= s.iqm && s.iqm <= s.moet);
        prop_assert!(s.min <= s.median && s.median <= s.moet);
        prop_assert!(s.std >= 0.0);
    }
}
