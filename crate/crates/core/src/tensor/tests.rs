use std::sync::Arc;

use ndarray::arr2;

use super::*;
use crate::error::Error;

fn toy_features() -> Mat {
    arr2(&[
        [0.5, 0.5],
        [1.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.5],
    ])
}

fn toy_edges() -> Arc<Vec<(usize, usize)>> {
    Arc::new(vec![(0, 2), (0, 3), (0, 4)])
}

#[test]
fn neighbor_sum_matches_hand_aggregation() {
    let mut tape = Tape::new();
    let x = tape.constant(toy_features());
    let w = tape.constant(Mat::from_elem((3, 1), 1.0));
    let ns = tape.neighbor_sum(x, w, toy_edges()).unwrap();
    // Node 0 (three neighbours): sum of rows 2, 3, 4 = (1.5, 1.5); divided
    // by its degree this is the (0.5, 0.5) neighbourhood mean. Node 1 is
    // isolated and receives nothing.
    let v = tape.value(ns);
    assert_eq!(v.row(0).to_vec(), vec![1.5, 1.5]);
    assert_eq!(v.row(1).to_vec(), vec![0.0, 0.0]);
    assert_eq!(v.row(2).to_vec(), vec![0.5, 0.5]);
    let divided: Vec<f64> = v.row(0).iter().map(|t| t / 3.0).collect();
    assert_eq!(divided, vec![0.5, 0.5]);
}

#[test]
fn sigmoid_gradient_at_zero_is_quarter() {
    let mut tape = Tape::new();
    let x = tape.input(Mat::zeros((1, 1)), true);
    let s = tape.sigmoid(x).unwrap();
    let grads = tape.backward(s, Mode::Standard).unwrap();
    assert!((grads.get(x).unwrap()[(0, 0)] - 0.25).abs() < 1e-15);
}

#[test]
fn grad_check_on_sum_of_squares() {
    let x = arr2(&[[0.3, -1.2, 0.7], [2.0, -0.1, 0.4]]);
    let report = grad_check(
        |tape, vars| {
            let sq = tape.mul(vars[0], vars[0])?;
            tape.sum_all(sq)
        },
        &[x],
        1e-4,
    )
    .unwrap();
    assert_eq!(report.compared, 6);
    assert!(report.max_rel_error < 1e-6, "error {}", report.max_rel_error);
}

#[test]
fn relu_gradient_is_zero_at_the_origin() {
    let mut tape = Tape::new();
    let x = tape.input(Mat::zeros((1, 1)), true);
    let r = tape.relu(x).unwrap();
    let s = tape.sum_all(r).unwrap();
    let grads = tape.backward(s, Mode::Standard).unwrap();
    assert_eq!(grads.get(x).unwrap()[(0, 0)], 0.0);
}

#[test]
fn deconv_rectifies_incoming_gradient_through_relu() {
    // Forward input -1 kills the standard gradient; deconvolution instead
    // rectifies the incoming gradient of 2 and passes it on.
    let mut tape = Tape::new();
    let x = tape.input(Mat::from_elem((1, 1), -1.0), true);
    let r = tape.relu(x).unwrap();
    let doubled = tape.scale(r, 2.0).unwrap();
    let out = tape.sum_all(doubled).unwrap();

    let standard = tape.backward(out, Mode::Standard).unwrap();
    assert_eq!(standard.get(x).unwrap()[(0, 0)], 0.0);
    let deconv = tape.backward(out, Mode::Deconv).unwrap();
    assert_eq!(deconv.get(x).unwrap()[(0, 0)], 2.0);
}

#[test]
fn deconv_equals_standard_without_relu() {
    let mut tape = Tape::new();
    let x = tape.input(arr2(&[[0.4, -0.3], [0.1, 0.9]]), true);
    let s = tape.sigmoid(x).unwrap();
    let d = tape.dot_rows(s, x).unwrap();
    let out = tape.sum_all(d).unwrap();
    let a = tape.backward(out, Mode::Standard).unwrap();
    let b = tape.backward(out, Mode::Deconv).unwrap();
    assert_eq!(a.get(x).unwrap(), b.get(x).unwrap());
}

#[test]
fn lrp_splits_single_linear_layer_by_contribution() {
    // y = 2a + 3b at a = b = 1: shares 0.4 / 0.6 of the output relevance.
    let mut tape = Tape::new();
    let x = tape.input(arr2(&[[1.0, 1.0]]), true);
    let w = tape.constant(arr2(&[[2.0], [3.0]]));
    let y = tape.matmul(x, w).unwrap();
    let rel = tape.lrp_backward(y, 1e-9).unwrap();
    let r = rel.get(x).unwrap();
    let ry = tape.scalar(y);
    assert!((r[(0, 0)] / ry - 0.4).abs() < 1e-8);
    assert!((r[(0, 1)] / ry - 0.6).abs() < 1e-8);
}

#[test]
fn lrp_gives_zero_relevance_to_zero_activations() {
    let mut tape = Tape::new();
    let x = tape.input(arr2(&[[0.0, 1.0]]), true);
    let w = tape.constant(arr2(&[[5.0], [3.0]]));
    let y = tape.matmul(x, w).unwrap();
    let rel = tape.lrp_backward(y, 1e-6).unwrap();
    let r = rel.get(x).unwrap();
    assert_eq!(r[(0, 0)], 0.0);
    assert!(r[(0, 1)] > 0.0);
}

#[test]
fn lrp_conservation_error_shrinks_with_epsilon() {
    // Positive two-layer net: all pre-activations strictly positive, no
    // biases, so the only leakage is the stabilizer itself.
    let x = arr2(&[[0.5, 1.0, 1.5, 2.0]]);
    let w1 = Mat::from_shape_fn((4, 5), |(i, j)| 0.1 + 0.05 * ((i + 2 * j) % 7) as f64);
    let w2 = Mat::from_shape_fn((5, 1), |(i, _)| 0.2 + 0.1 * (i % 3) as f64);

    let run = |eps: f64| -> f64 {
        let mut tape = Tape::new();
        let xv = tape.input(x.clone(), true);
        let w1v = tape.constant(w1.clone());
        let w2v = tape.constant(w2.clone());
        let h = tape.matmul(xv, w1v).unwrap();
        let a = tape.relu(h).unwrap();
        let y = tape.matmul(a, w2v).unwrap();
        let rel = tape.lrp_backward(y, eps).unwrap();
        let total: f64 = rel.get(xv).unwrap().sum();
        (total - tape.scalar(y)).abs()
    };

    let errs: Vec<f64> = [1e-2, 1e-4, 1e-6].iter().map(|&e| run(e)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "errors {errs:?}");
    assert!(errs[2] < 1e-4);
}

#[test]
fn finite_guard_trips_on_nan() {
    let mut tape = Tape::new();
    let x = tape.constant(arr2(&[[-1.0]]));
    match tape.log(x) {
        Err(Error::NonFinite("log")) => {}
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn backward_requires_scalar_output() {
    let mut tape = Tape::new();
    let x = tape.input(Mat::zeros((2, 2)), true);
    assert!(tape.backward(x, Mode::Standard).is_err());
}

#[test]
fn shape_mismatch_is_reported() {
    let mut tape = Tape::new();
    let a = tape.constant(Mat::zeros((2, 3)));
    let b = tape.constant(Mat::zeros((2, 3)));
    assert!(matches!(tape.matmul(a, b), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn composite_network_passes_grad_check() {
    // Touches neighbor_sum, sigmoid, relu, row_normalize, gather_rows,
    // dot_rows, mean_rows, exp, rsqrt, mul, concat_rows, scale, add.
    let edges = Arc::new(vec![(0usize, 1usize), (1, 2), (2, 3)]);
    let x = Mat::from_shape_fn((4, 3), |(i, j)| 0.1 * ((3 * i + 7 * j) % 11) as f64 - 0.4);
    let w = arr2(&[[0.9], [0.4], [0.7]]);
    let idx = Arc::new(vec![0usize, 2, 1, 3]);

    let report = grad_check(
        move |tape, vars| {
            let (x, w) = (vars[0], vars[1]);
            let sg = tape.sigmoid(x)?;
            let shifted = tape.add_scalar(x, 0.05)?;
            let rl = tape.relu(shifted)?;
            let h = tape.add(sg, rl)?;
            let ns = tape.neighbor_sum(h, w, Arc::clone(&edges))?;
            let lifted = tape.add_scalar(ns, 0.5)?;
            let rn = tape.row_normalize(lifted)?;
            let g = tape.gather_rows(rn, Arc::clone(&idx))?;
            let d = tape.dot_rows(g, h)?;
            let m0 = tape.scale(d, 0.3)?;
            let m1 = tape.exp(m0)?;
            let m = tape.mean_rows(m1)?;
            let c = tape.concat_rows(d, d)?;
            let s1 = tape.sum_all(c)?;
            let dd = tape.mul(d, d)?;
            let dd1 = tape.add_scalar(dd, 1.0)?;
            let rs = tape.rsqrt(dd1)?;
            let s2 = tape.sum_all(rs)?;
            let t1 = tape.scale(s1, 0.1)?;
            let t2 = tape.scale(s2, 0.5)?;
            let t3 = tape.add(t1, t2)?;
            tape.add(t3, m)
        },
        &[x, w],
        1e-5,
    )
    .unwrap();
    assert!(report.compared >= 12);
    assert!(report.max_rel_error < 1e-5, "error {}", report.max_rel_error);
}

#[test]
fn broadcast_ops_pass_grad_check() {
    let m = Mat::from_shape_fn((3, 4), |(i, j)| 0.2 * ((2 * i + j) % 5) as f64 - 0.3);
    let col = arr2(&[[0.5], [-0.8], [1.1]]);
    let row = arr2(&[[0.3, -0.2, 0.9, 0.4]]);

    let report = grad_check(
        |tape, vars| {
            let a = tape.row_scale(vars[0], vars[1])?;
            let b = tape.col_scale(a, vars[2])?;
            let c = tape.add_row(b, vars[2])?;
            let s = tape.sigmoid(c)?;
            let lifted = tape.add_scalar(s, 0.5)?;
            let d = tape.log(lifted)?;
            let cl = tape.clamp(d, -0.4, 0.35)?;
            tape.sum_all(cl)
        },
        &[m, col, row],
        1e-5,
    )
    .unwrap();
    assert!(report.compared > 0);
    assert!(report.max_rel_error < 1e-5, "error {}", report.max_rel_error);
}

#[test]
fn kinked_function_is_flagged_not_failed() {
    // relu kink exactly at the probe origin: the point is excluded.
    let x = Mat::zeros((1, 1));
    let report = grad_check(
        |tape, vars| {
            let r = tape.relu(vars[0])?;
            tape.sum_all(r)
        },
        &[x],
        1e-5,
    )
    .unwrap();
    assert_eq!(report.skipped_kinks, 1);
    assert_eq!(report.compared, 0);
}

#[test]
fn row_normalize_zeroes_stay_zero() {
    let mut tape = Tape::new();
    let x = tape.input(arr2(&[[3.0, 4.0], [0.0, 0.0]]), true);
    let n = tape.row_normalize(x).unwrap();
    let v = tape.value(n);
    assert!((v[(0, 0)] - 0.6).abs() < 1e-15);
    assert!((v[(0, 1)] - 0.8).abs() < 1e-15);
    assert_eq!(v.row(1).to_vec(), vec![0.0, 0.0]);
    let s = tape.sum_all(n).unwrap();
    let grads = tape.backward(s, Mode::Standard).unwrap();
    assert_eq!(grads.get(x).unwrap().row(1).to_vec(), vec![0.0, 0.0]);
}

#[test]
fn gather_rows_accumulates_duplicate_indices() {
    let mut tape = Tape::new();
    let x = tape.input(arr2(&[[1.0, 2.0], [3.0, 4.0]]), true);
    let g = tape.gather_rows(x, Arc::new(vec![0, 0, 1])).unwrap();
    let s = tape.sum_all(g).unwrap();
    let grads = tape.backward(s, Mode::Standard).unwrap();
    assert_eq!(grads.get(x).unwrap().row(0).to_vec(), vec![2.0, 2.0]);
    assert_eq!(grads.get(x).unwrap().row(1).to_vec(), vec![1.0, 1.0]);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_smooth_networks_pass_grad_check(seed in 0u64..1000) {
            let mut rng = crate::rng::rng_from(seed);
            use rand::Rng;
            let n = rng.gen_range(2..5usize);
            let d = rng.gen_range(2..4usize);
            let x = Mat::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
            let w = Mat::from_shape_fn((d, 3), |_| rng.gen_range(-1.0..1.0));
            let report = grad_check(
                |tape, vars| {
                    let h = tape.matmul(vars[0], vars[1])?;
                    let s = tape.sigmoid(h)?;
                    let d = tape.dot_rows(s, s)?;
                    tape.sum_all(d)
                },
                &[x, w],
                1e-5,
            ).unwrap();
            prop_assert!(report.max_rel_error < 1e-5);
        }
    }
}
