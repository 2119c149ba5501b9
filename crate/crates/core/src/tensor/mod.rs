//! Dense f64 tensors on a reverse-mode tape.
//!
//! The tape records every forward primitive; `backward` replays it in
//! reverse under one of two rules (standard vector-Jacobian products, or
//! deconvolution where relu backward rectifies the incoming gradient), and
//! `lrp_backward` replays it as epsilon-stabilized relevance propagation.
//! Every forward op validates shapes and rejects non-finite results, so a
//! NaN surfaces at the op that produced it rather than three modules later.

mod backward;
mod check;
mod lrp;

pub use check::{grad_check, GradCheck};

use std::sync::Arc;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

pub type Mat = Array2<f64>;

/// Handle to a tensor on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// Backward rule selection for `Tape::backward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Standard,
    Deconv,
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    /// (n, d) + broadcast (1, d)
    AddRow(usize, usize),
    /// Elementwise product of same-shape tensors.
    Mul(usize, usize),
    /// (n, d) scaled per row by (n, 1)
    RowScale(usize, usize),
    /// (n, d) scaled per column by (1, d)
    ColScale(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    Relu(usize),
    Sigmoid(usize),
    Log(usize),
    Exp(usize),
    /// x^(-1/2), elementwise
    Rsqrt(usize),
    Clamp(usize, f64, f64),
    /// Sum of all entries -> (1, 1)
    SumAll(usize),
    /// Column means -> (1, d)
    MeanRows(usize),
    GatherRows(usize, Arc<Vec<usize>>),
    ConcatRows(usize, usize),
    /// Row-wise dot product of same-shape tensors -> (n, 1)
    DotRows(usize, usize),
    /// Row-wise L2 normalization; zero rows stay zero.
    RowNormalize(usize),
    /// out[u] = sum over edges (u, v) of w_e * h[v], both directions.
    NeighborSum {
        h: usize,
        w: usize,
        edges: Arc<Vec<(usize, usize)>>,
    },
}

pub struct Tape {
    vals: Vec<Mat>,
    ops: Vec<Op>,
    needs_grad: Vec<bool>,
}

/// Per-variable output of a backward pass: gradients for `Mode::Standard`
/// and `Mode::Deconv`, relevance for `lrp_backward`. Only variables on the
/// differentiable path from a grad-enabled leaf carry a value.
pub struct Gradients {
    map: Vec<Option<Mat>>,
}

impl Gradients {
    pub(crate) fn new(len: usize) -> Self {
        Gradients {
            map: (0..len).map(|_| None).collect(),
        }
    }

    pub fn get(&self, v: Var) -> Option<&Mat> {
        self.map[v.0].as_ref()
    }

    pub(crate) fn accumulate(&mut self, idx: usize, delta: Mat) {
        match &mut self.map[idx] {
            Some(g) => *g += &delta,
            slot => *slot = Some(delta),
        }
    }
}

fn check_finite(m: &Mat, op: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

fn shape_err(expected: String, m: &Mat, context: &'static str) -> Error {
    Error::ShapeMismatch {
        expected,
        got: format!("{}x{}", m.nrows(), m.ncols()),
        context,
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            vals: Vec::new(),
            ops: Vec::new(),
            needs_grad: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Register a leaf tensor. Gradients and relevance are only tracked
    /// through subgraphs rooted at grad-enabled leaves.
    pub fn input(&mut self, value: Mat, requires_grad: bool) -> Var {
        self.vals.push(value);
        self.ops.push(Op::Leaf);
        self.needs_grad.push(requires_grad);
        Var(self.vals.len() - 1)
    }

    /// Leaf that never receives gradients (model parameters at explanation
    /// time, structural constants, ...).
    pub fn constant(&mut self, value: Mat) -> Var {
        self.input(value, false)
    }

    pub fn scalar_input(&mut self, value: f64, requires_grad: bool) -> Var {
        self.input(Mat::from_elem((1, 1), value), requires_grad)
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.vals[v.0]
    }

    /// Value of a (1, 1) tensor.
    pub fn scalar(&self, v: Var) -> f64 {
        self.vals[v.0][(0, 0)]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let m = &self.vals[v.0];
        (m.nrows(), m.ncols())
    }

    fn push(&mut self, value: Mat, op: Op, needs: bool, name: &'static str) -> Result<Var> {
        check_finite(&value, name)?;
        self.vals.push(value);
        self.ops.push(op);
        self.needs_grad.push(needs);
        Ok(Var(self.vals.len() - 1))
    }

    fn needs(&self, vs: &[Var]) -> bool {
        vs.iter().any(|v| self.needs_grad[v.0])
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        if av.ncols() != bv.nrows() {
            return Err(shape_err(format!("{}x? rows", av.ncols()), bv, "matmul"));
        }
        let out = av.dot(bv);
        self.push(out, Op::MatMul(a.0, b.0), self.needs(&[a, b]), "matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        if av.dim() != bv.dim() {
            return Err(shape_err(format!("{}x{}", av.nrows(), av.ncols()), bv, "add"));
        }
        let out = av + bv;
        self.push(out, Op::Add(a.0, b.0), self.needs(&[a, b]), "add")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let neg = self.scale(b, -1.0)?;
        self.add(a, neg)
    }

    pub fn add_row(&mut self, m: Var, row: Var) -> Result<Var> {
        let (mv, rv) = (&self.vals[m.0], &self.vals[row.0]);
        if rv.nrows() != 1 || rv.ncols() != mv.ncols() {
            return Err(shape_err(format!("1x{}", mv.ncols()), rv, "add_row"));
        }
        let out = mv + &rv.broadcast(mv.raw_dim()).unwrap();
        self.push(out, Op::AddRow(m.0, row.0), self.needs(&[m, row]), "add_row")
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        if av.dim() != bv.dim() {
            return Err(shape_err(format!("{}x{}", av.nrows(), av.ncols()), bv, "mul"));
        }
        let out = av * bv;
        self.push(out, Op::Mul(a.0, b.0), self.needs(&[a, b]), "mul")
    }

    pub fn row_scale(&mut self, m: Var, col: Var) -> Result<Var> {
        let (mv, cv) = (&self.vals[m.0], &self.vals[col.0]);
        if cv.ncols() != 1 || cv.nrows() != mv.nrows() {
            return Err(shape_err(format!("{}x1", mv.nrows()), cv, "row_scale"));
        }
        let out = mv * &cv.broadcast(mv.raw_dim()).unwrap();
        self.push(out, Op::RowScale(m.0, col.0), self.needs(&[m, col]), "row_scale")
    }

    pub fn col_scale(&mut self, m: Var, row: Var) -> Result<Var> {
        let (mv, rv) = (&self.vals[m.0], &self.vals[row.0]);
        if rv.nrows() != 1 || rv.ncols() != mv.ncols() {
            return Err(shape_err(format!("1x{}", mv.ncols()), rv, "col_scale"));
        }
        let out = mv * &rv.broadcast(mv.raw_dim()).unwrap();
        self.push(out, Op::ColScale(m.0, row.0), self.needs(&[m, row]), "col_scale")
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let out = &self.vals[a.0] * c;
        self.push(out, Op::Scale(a.0, c), self.needs(&[a]), "scale")
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        let out = &self.vals[a.0] + c;
        self.push(out, Op::AddScalar(a.0), self.needs(&[a]), "add_scalar")
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.vals[a.0].mapv(|v| v.max(0.0));
        self.push(out, Op::Relu(a.0), self.needs(&[a]), "relu")
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.vals[a.0].mapv(|v| {
            if v >= 0.0 {
                1.0 / (1.0 + (-v).exp())
            } else {
                let e = v.exp();
                e / (1.0 + e)
            }
        });
        self.push(out, Op::Sigmoid(a.0), self.needs(&[a]), "sigmoid")
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        let out = self.vals[a.0].mapv(f64::ln);
        self.push(out, Op::Log(a.0), self.needs(&[a]), "log")
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        let out = self.vals[a.0].mapv(f64::exp);
        self.push(out, Op::Exp(a.0), self.needs(&[a]), "exp")
    }

    pub fn rsqrt(&mut self, a: Var) -> Result<Var> {
        let out = self.vals[a.0].mapv(|v| 1.0 / v.sqrt());
        self.push(out, Op::Rsqrt(a.0), self.needs(&[a]), "rsqrt")
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        let out = self.vals[a.0].mapv(|v| v.clamp(lo, hi));
        self.push(out, Op::Clamp(a.0, lo, hi), self.needs(&[a]), "clamp")
    }

    pub fn sum_all(&mut self, a: Var) -> Result<Var> {
        let out = Mat::from_elem((1, 1), self.vals[a.0].sum());
        self.push(out, Op::SumAll(a.0), self.needs(&[a]), "sum_all")
    }

    /// Column-wise mean over rows: (n, d) -> (1, d).
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let av = &self.vals[a.0];
        if av.nrows() == 0 {
            return Err(shape_err("at least one row".into(), av, "mean_rows"));
        }
        let out = av
            .mean_axis(Axis(0))
            .expect("non-empty")
            .insert_axis(Axis(0));
        self.push(out, Op::MeanRows(a.0), self.needs(&[a]), "mean_rows")
    }

    pub fn gather_rows(&mut self, a: Var, indices: Arc<Vec<usize>>) -> Result<Var> {
        let av = &self.vals[a.0];
        for &i in indices.iter() {
            if i >= av.nrows() {
                return Err(Error::InvalidArgument(format!(
                    "gather_rows index {i} outside 0..{}",
                    av.nrows()
                )));
            }
        }
        let mut out = Mat::zeros((indices.len(), av.ncols()));
        for (k, &i) in indices.iter().enumerate() {
            out.row_mut(k).assign(&av.row(i));
        }
        self.push(out, Op::GatherRows(a.0, indices), self.needs(&[a]), "gather_rows")
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        if av.ncols() != bv.ncols() {
            return Err(shape_err(format!("?x{}", av.ncols()), bv, "concat_rows"));
        }
        let mut out = Mat::zeros((av.nrows() + bv.nrows(), av.ncols()));
        out.slice_mut(ndarray::s![..av.nrows(), ..]).assign(av);
        out.slice_mut(ndarray::s![av.nrows().., ..]).assign(bv);
        self.push(out, Op::ConcatRows(a.0, b.0), self.needs(&[a, b]), "concat_rows")
    }

    pub fn dot_rows(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.vals[a.0], &self.vals[b.0]);
        if av.dim() != bv.dim() {
            return Err(shape_err(format!("{}x{}", av.nrows(), av.ncols()), bv, "dot_rows"));
        }
        let mut out = Mat::zeros((av.nrows(), 1));
        for i in 0..av.nrows() {
            out[(i, 0)] = av.row(i).dot(&bv.row(i));
        }
        self.push(out, Op::DotRows(a.0, b.0), self.needs(&[a, b]), "dot_rows")
    }

    pub fn row_normalize(&mut self, a: Var) -> Result<Var> {
        let av = &self.vals[a.0];
        let mut out = av.clone();
        for mut row in out.rows_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v / norm);
            }
        }
        self.push(out, Op::RowNormalize(a.0), self.needs(&[a]), "row_normalize")
    }

    /// Weighted neighbour aggregation over an undirected edge list:
    /// `out[u] += w_e * h[v]` and `out[v] += w_e * h[u]` for each edge
    /// `e = (u, v)`. `w` has shape (num_edges, 1), `h` is (num_nodes, d).
    pub fn neighbor_sum(&mut self, h: Var, w: Var, edges: Arc<Vec<(usize, usize)>>) -> Result<Var> {
        let (hv, wv) = (&self.vals[h.0], &self.vals[w.0]);
        if wv.ncols() != 1 || wv.nrows() != edges.len() {
            return Err(shape_err(format!("{}x1", edges.len()), wv, "neighbor_sum"));
        }
        let n = hv.nrows();
        for &(u, v) in edges.iter() {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "neighbor_sum edge ({u}, {v}) outside 0..{n}"
                )));
            }
        }
        let mut out = Mat::zeros(hv.raw_dim());
        for (e, &(u, v)) in edges.iter().enumerate() {
            let we = wv[(e, 0)];
            out.row_mut(u).scaled_add(we, &hv.row(v));
            out.row_mut(v).scaled_add(we, &hv.row(u));
        }
        self.push(
            out,
            Op::NeighborSum {
                h: h.0,
                w: w.0,
                edges,
            },
            self.needs(&[h, w]),
            "neighbor_sum",
        )
    }

    /// Reverse pass from a scalar output. `Mode::Deconv` replaces the relu
    /// rule: the incoming gradient is rectified instead of being gated by
    /// the forward activation sign.
    pub fn backward(&self, out: Var, mode: Mode) -> Result<Gradients> {
        let shape = self.shape(out);
        if shape != (1, 1) {
            return Err(Error::InvalidArgument(format!(
                "backward needs a scalar output, got {}x{}",
                shape.0, shape.1
            )));
        }
        Ok(backward::run(self, out, mode))
    }

    /// Epsilon-stabilized relevance propagation from a scalar output, seeded
    /// with the output's own value.
    pub fn lrp_backward(&self, out: Var, epsilon: f64) -> Result<Gradients> {
        let shape = self.shape(out);
        if shape != (1, 1) {
            return Err(Error::InvalidArgument(format!(
                "lrp_backward needs a scalar output, got {}x{}",
                shape.0, shape.1
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lrp epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(lrp::run(self, out, epsilon))
    }

    pub(crate) fn op(&self, idx: usize) -> &Op {
        &self.ops[idx]
    }

    pub(crate) fn needs_grad_idx(&self, idx: usize) -> bool {
        self.needs_grad[idx]
    }

    pub(crate) fn val_idx(&self, idx: usize) -> &Mat {
        &self.vals[idx]
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests;
