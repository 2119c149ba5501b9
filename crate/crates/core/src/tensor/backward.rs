//! Vector-Jacobian products for the tape ops. The deconvolution mode only
//! changes the relu rule; everything else shares the standard derivatives.

use ndarray::Axis;

use super::{Gradients, Mat, Mode, Op, Tape, Var};

pub(super) fn run(tape: &Tape, out: Var, mode: Mode) -> Gradients {
    let mut grads = Gradients::new(tape.len());
    if !tape.needs_grad_idx(out.0) {
        return grads;
    }
    grads.accumulate(out.0, Mat::from_elem((1, 1), 1.0));

    for idx in (0..tape.len()).rev() {
        let g = match grads.get(Var(idx)) {
            Some(g) => g.clone(),
            None => continue,
        };
        match tape.op(idx) {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, g.dot(&tape.val_idx(*b).t()));
                }
                if tape.needs_grad_idx(*b) {
                    grads.accumulate(*b, tape.val_idx(*a).t().dot(&g));
                }
            }
            Op::Add(a, b) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, g.clone());
                }
                if tape.needs_grad_idx(*b) {
                    grads.accumulate(*b, g);
                }
            }
            Op::AddRow(m, r) => {
                if tape.needs_grad_idx(*m) {
                    grads.accumulate(*m, g.clone());
                }
                if tape.needs_grad_idx(*r) {
                    grads.accumulate(*r, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
            }
            Op::Mul(a, b) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, &g * tape.val_idx(*b));
                }
                if tape.needs_grad_idx(*b) {
                    grads.accumulate(*b, &g * tape.val_idx(*a));
                }
            }
            Op::RowScale(m, c) => {
                let col = tape.val_idx(*c);
                if tape.needs_grad_idx(*m) {
                    grads.accumulate(*m, &g * &col.broadcast(g.raw_dim()).unwrap());
                }
                if tape.needs_grad_idx(*c) {
                    let prod = &g * tape.val_idx(*m);
                    grads.accumulate(*c, prod.sum_axis(Axis(1)).insert_axis(Axis(1)));
                }
            }
            Op::ColScale(m, r) => {
                let row = tape.val_idx(*r);
                if tape.needs_grad_idx(*m) {
                    grads.accumulate(*m, &g * &row.broadcast(g.raw_dim()).unwrap());
                }
                if tape.needs_grad_idx(*r) {
                    let prod = &g * tape.val_idx(*m);
                    grads.accumulate(*r, prod.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
            }
            Op::Scale(a, c) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, &g * *c);
                }
            }
            Op::AddScalar(a) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, g);
                }
            }
            Op::Relu(a) => {
                if tape.needs_grad_idx(*a) {
                    let delta = match mode {
                        // relu'(0) = 0: gate strictly positive activations.
                        Mode::Standard => {
                            let gate = tape.val_idx(*a).mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                            &g * &gate
                        }
                        Mode::Deconv => g.mapv(|v| v.max(0.0)),
                    };
                    grads.accumulate(*a, delta);
                }
            }
            Op::Sigmoid(a) => {
                if tape.needs_grad_idx(*a) {
                    let y = tape.val_idx(idx);
                    grads.accumulate(*a, &g * &y.mapv(|v| v * (1.0 - v)));
                }
            }
            Op::Log(a) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, &g / tape.val_idx(*a));
                }
            }
            Op::Exp(a) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, &g * tape.val_idx(idx));
                }
            }
            Op::Rsqrt(a) => {
                if tape.needs_grad_idx(*a) {
                    let y = tape.val_idx(idx);
                    grads.accumulate(*a, &g * &y.mapv(|v| -0.5 * v * v * v));
                }
            }
            Op::Clamp(a, lo, hi) => {
                if tape.needs_grad_idx(*a) {
                    let gate = tape.val_idx(*a).mapv(|v| if v >= *lo && v <= *hi { 1.0 } else { 0.0 });
                    grads.accumulate(*a, &g * &gate);
                }
            }
            Op::SumAll(a) => {
                if tape.needs_grad_idx(*a) {
                    let shape = tape.val_idx(*a).raw_dim();
                    grads.accumulate(*a, Mat::from_elem(shape, g[(0, 0)]));
                }
            }
            Op::MeanRows(a) => {
                if tape.needs_grad_idx(*a) {
                    let src = tape.val_idx(*a);
                    let n = src.nrows() as f64;
                    let scaled = &g / n;
                    grads.accumulate(*a, scaled.broadcast(src.raw_dim()).unwrap().to_owned());
                }
            }
            Op::GatherRows(a, indices) => {
                if tape.needs_grad_idx(*a) {
                    let mut delta = Mat::zeros(tape.val_idx(*a).raw_dim());
                    for (k, &i) in indices.iter().enumerate() {
                        delta.row_mut(i).scaled_add(1.0, &g.row(k));
                    }
                    grads.accumulate(*a, delta);
                }
            }
            Op::ConcatRows(a, b) => {
                let na = tape.val_idx(*a).nrows();
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, g.slice(ndarray::s![..na, ..]).to_owned());
                }
                if tape.needs_grad_idx(*b) {
                    grads.accumulate(*b, g.slice(ndarray::s![na.., ..]).to_owned());
                }
            }
            Op::DotRows(a, b) => {
                if tape.needs_grad_idx(*a) {
                    grads.accumulate(*a, tape.val_idx(*b) * &g.broadcast(tape.val_idx(*b).raw_dim()).unwrap());
                }
                if tape.needs_grad_idx(*b) {
                    grads.accumulate(*b, tape.val_idx(*a) * &g.broadcast(tape.val_idx(*a).raw_dim()).unwrap());
                }
            }
            Op::RowNormalize(a) => {
                if tape.needs_grad_idx(*a) {
                    let src = tape.val_idx(*a);
                    let normed = tape.val_idx(idx);
                    let mut delta = Mat::zeros(src.raw_dim());
                    for i in 0..src.nrows() {
                        let norm = src.row(i).dot(&src.row(i)).sqrt();
                        if norm > 0.0 {
                            let unit = normed.row(i);
                            let gi = g.row(i);
                            let along = unit.dot(&gi);
                            for j in 0..src.ncols() {
                                delta[(i, j)] = (gi[j] - unit[j] * along) / norm;
                            }
                        }
                    }
                    grads.accumulate(*a, delta);
                }
            }
            Op::NeighborSum { h, w, edges } => {
                let hv = tape.val_idx(*h);
                let wv = tape.val_idx(*w);
                if tape.needs_grad_idx(*h) {
                    let mut delta = Mat::zeros(hv.raw_dim());
                    for (e, &(u, v)) in edges.iter().enumerate() {
                        let we = wv[(e, 0)];
                        delta.row_mut(v).scaled_add(we, &g.row(u));
                        delta.row_mut(u).scaled_add(we, &g.row(v));
                    }
                    grads.accumulate(*h, delta);
                }
                if tape.needs_grad_idx(*w) {
                    let mut delta = Mat::zeros((edges.len(), 1));
                    for (e, &(u, v)) in edges.iter().enumerate() {
                        delta[(e, 0)] = g.row(u).dot(&hv.row(v)) + g.row(v).dot(&hv.row(u));
                    }
                    grads.accumulate(*w, delta);
                }
            }
        }
    }
    grads
}
