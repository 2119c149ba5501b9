//! Epsilon-stabilized relevance propagation over the tape.
//!
//! Linear ops redistribute relevance in proportion to the stabilized share
//! each input term contributes to the output: for z_j = sum_i a_i w_ij,
//! R_i = sum_j a_i w_ij / (z_j + eps * sign(z_j)) * R_j. Elementwise
//! nonlinearities pass relevance through unchanged. Two constructions need
//! a documented convention:
//!
//! * products of two *activations* (`mul`, `dot_rows`) are treated as linear
//!   in either factor and symmetrized by averaging the two assignments;
//! * `row_normalize` transports relevance with its exact Jacobian. A
//!   componentwise pass-through would drop the coupling between components
//!   introduced by the norm, losing the sign information that distinguishes
//!   evidence pulling an embedding toward a neighbour from evidence pushing
//!   it away.
//!
//! `matmul`, `row_scale` and `col_scale` route relevance into their first
//! argument (the activations); the second argument acts as weights.

use ndarray::Axis;

use super::{Gradients, Mat, Op, Tape, Var};

fn stab(z: f64, eps: f64) -> f64 {
    if z >= 0.0 {
        z + eps
    } else {
        z - eps
    }
}

pub(super) fn run(tape: &Tape, out: Var, eps: f64) -> Gradients {
    let mut rel = Gradients::new(tape.len());
    if !tape.needs_grad_idx(out.0) {
        return rel;
    }
    rel.accumulate(out.0, tape.val_idx(out.0).clone());

    for idx in (0..tape.len()).rev() {
        let r = match rel.get(Var(idx)) {
            Some(r) => r.clone(),
            None => continue,
        };
        let z = tape.val_idx(idx);
        match tape.op(idx) {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if tape.needs_grad_idx(*a) {
                    let s = share(&r, z, eps);
                    rel.accumulate(*a, tape.val_idx(*a) * &s.dot(&tape.val_idx(*b).t()));
                }
            }
            Op::Add(a, b) => {
                let s = share(&r, z, eps);
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, tape.val_idx(*a) * &s);
                }
                if tape.needs_grad_idx(*b) {
                    rel.accumulate(*b, tape.val_idx(*b) * &s);
                }
            }
            Op::AddRow(m, row) => {
                let s = share(&r, z, eps);
                if tape.needs_grad_idx(*m) {
                    rel.accumulate(*m, tape.val_idx(*m) * &s);
                }
                if tape.needs_grad_idx(*row) {
                    let rv = tape.val_idx(*row);
                    let scaled = &s * &rv.broadcast(s.raw_dim()).unwrap();
                    rel.accumulate(*row, scaled.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
            }
            Op::Mul(a, b) => {
                // Bilinear in two activations: split evenly.
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, &r * 0.5);
                }
                if tape.needs_grad_idx(*b) {
                    rel.accumulate(*b, &r * 0.5);
                }
            }
            Op::RowScale(m, _) | Op::ColScale(m, _) => {
                if tape.needs_grad_idx(*m) {
                    // Single-term products: the activation keeps the whole
                    // (stabilized) share, the scaling acts as weights.
                    rel.accumulate(*m, z.mapv(|v| v / stab(v, eps)) * &r);
                }
            }
            Op::Scale(a, _) => {
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, z.mapv(|v| v / stab(v, eps)) * &r);
                }
            }
            Op::AddScalar(a) => {
                if tape.needs_grad_idx(*a) {
                    // The constant absorbs its share, like a bias.
                    let s = share(&r, z, eps);
                    rel.accumulate(*a, tape.val_idx(*a) * &s);
                }
            }
            Op::Relu(a)
            | Op::Sigmoid(a)
            | Op::Log(a)
            | Op::Exp(a)
            | Op::Rsqrt(a)
            | Op::Clamp(a, _, _) => {
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, r);
                }
            }
            Op::SumAll(a) => {
                if tape.needs_grad_idx(*a) {
                    let s = r[(0, 0)] / stab(z[(0, 0)], eps);
                    rel.accumulate(*a, tape.val_idx(*a) * s);
                }
            }
            Op::MeanRows(a) => {
                if tape.needs_grad_idx(*a) {
                    let src = tape.val_idx(*a);
                    let n = src.nrows() as f64;
                    let s = share(&r, z, eps);
                    rel.accumulate(*a, (src / n) * &s.broadcast(src.raw_dim()).unwrap());
                }
            }
            Op::GatherRows(a, indices) => {
                if tape.needs_grad_idx(*a) {
                    let mut delta = Mat::zeros(tape.val_idx(*a).raw_dim());
                    for (k, &i) in indices.iter().enumerate() {
                        delta.row_mut(i).scaled_add(1.0, &r.row(k));
                    }
                    rel.accumulate(*a, delta);
                }
            }
            Op::ConcatRows(a, b) => {
                let na = tape.val_idx(*a).nrows();
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, r.slice(ndarray::s![..na, ..]).to_owned());
                }
                if tape.needs_grad_idx(*b) {
                    rel.accumulate(*b, r.slice(ndarray::s![na.., ..]).to_owned());
                }
            }
            Op::DotRows(a, b) => {
                let av = tape.val_idx(*a);
                let bv = tape.val_idx(*b);
                let mut delta = Mat::zeros(av.raw_dim());
                for i in 0..av.nrows() {
                    let s = r[(i, 0)] / stab(z[(i, 0)], eps);
                    for j in 0..av.ncols() {
                        delta[(i, j)] = 0.5 * av[(i, j)] * bv[(i, j)] * s;
                    }
                }
                if tape.needs_grad_idx(*a) {
                    rel.accumulate(*a, delta.clone());
                }
                if tape.needs_grad_idx(*b) {
                    rel.accumulate(*b, delta);
                }
            }
            Op::RowNormalize(a) => {
                if tape.needs_grad_idx(*a) {
                    let src = tape.val_idx(*a);
                    let normed = z;
                    let mut delta = Mat::zeros(src.raw_dim());
                    for i in 0..src.nrows() {
                        let norm = src.row(i).dot(&src.row(i)).sqrt();
                        if norm > 0.0 {
                            let unit = normed.row(i);
                            let ri = r.row(i);
                            let along = unit.dot(&ri);
                            for j in 0..src.ncols() {
                                delta[(i, j)] = (ri[j] - unit[j] * along) / norm;
                            }
                        }
                    }
                    rel.accumulate(*a, delta);
                }
            }
            Op::NeighborSum { h, w, edges } => {
                let hv = tape.val_idx(*h);
                let wv = tape.val_idx(*w);
                let s = share(&r, z, eps);
                let track_h = tape.needs_grad_idx(*h);
                let track_w = tape.needs_grad_idx(*w);
                let mut delta_h = Mat::zeros(hv.raw_dim());
                let mut delta_w = Mat::zeros((edges.len(), 1));
                for (e, &(u, v)) in edges.iter().enumerate() {
                    let we = wv[(e, 0)];
                    let mut through_edge = 0.0;
                    for c in 0..hv.ncols() {
                        // Term w_e * h[v, c] feeds out[u, c]; its share flows
                        // to the source node and is also booked on the edge
                        // that carried it.
                        let t_uv = we * hv[(v, c)] * s[(u, c)];
                        let t_vu = we * hv[(u, c)] * s[(v, c)];
                        delta_h[(v, c)] += t_uv;
                        delta_h[(u, c)] += t_vu;
                        through_edge += t_uv + t_vu;
                    }
                    delta_w[(e, 0)] = through_edge;
                }
                if track_h {
                    rel.accumulate(*h, delta_h);
                }
                if track_w {
                    rel.accumulate(*w, delta_w);
                }
            }
        }
    }
    rel
}

/// R / (z + eps * sign(z)), elementwise.
fn share(r: &Mat, z: &Mat, eps: f64) -> Mat {
    let mut s = r.clone();
    s.zip_mut_with(z, |ri, &zi| *ri /= stab(zi, eps));
    s
}
