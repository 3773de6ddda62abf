//! Reverse-mode gradient tape over [`Tensor`] values.
//!
//! Every primitive records its output and inputs; [`Tape::backward`] walks the
//! records in exact reverse order. Broadcasting is limited to scalar factors
//! and adding a 1×n bias row to every row of a matrix.

use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn id(self) -> usize {
        self.0
    }
}

/// Elementwise function with a user-supplied derivative rule.
#[derive(Clone, Copy)]
pub struct ElementwiseFn {
    pub name: &'static str,
    pub forward: fn(f64) -> f64,
    /// Derivative given the input `x` and output `y`.
    pub derivative: fn(f64, f64) -> f64,
}

#[derive(Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    ScalarMul(Var, f64),
    AddScalar(Var),
    Concat { inputs: Vec<Var>, axis: usize },
    Slice { input: Var, axis: usize, start: usize },
    Transpose(Var),
    Tanh(Var),
    Sigmoid(Var),
    LnClamped(Var, f64),
    Softmax { input: Var, axis: usize },
    Sum(Var),
    Mean(Var),
    GatherRows { table: Var, rows: Vec<usize> },
    Elementwise(Var, ElementwiseFn),
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records primitive applications for one forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar output with respect to every recorded node.
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient for `v`; zero when `v` does not influence the output.
    pub fn get(&self, v: Var) -> Tensor {
        let shape = &self.shapes[v.0];
        match &self.grads[v.0] {
            Some(g) => Tensor::new(shape.clone(), g.clone()).expect("gradient shape"),
            None => Tensor::zeros(shape),
        }
    }

    pub fn is_reached(&self, v: Var) -> bool {
        self.grads[v.0].is_some()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape()))
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records an input value.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        let (m, k) = av.dims2("matmul")?;
        let (k2, n) = bv.dims2("matmul")?;
        if k != k2 {
            return Err(mismatch("matmul", av, bv));
        }
        let out = matmul_raw(av.data(), bv.data(), m, k, n);
        let value = Tensor::matrix(m, n, out)?;
        Ok(self.push(value, Op::MatMul(a, b), &[a, b]))
    }

    fn zip_same(&mut self, op: &'static str, a: Var, b: Var, f: fn(f64, f64) -> f64) -> Result<Tensor> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(mismatch(op, av, bv));
        }
        Tensor::new(
            av.shape().to_vec(),
            av.data().iter().zip(bv.data()).map(|(x, y)| f(*x, *y)).collect(),
        )
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("add", a, b, |x, y| x + y)?;
        Ok(self.push(v, Op::Add(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("sub", a, b, |x, y| x - y)?;
        Ok(self.push(v, Op::Sub(a, b), &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("mul", a, b, |x, y| x * y)?;
        Ok(self.push(v, Op::Mul(a, b), &[a, b]))
    }

    /// Adds a 1×n row to every row of an m×n matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (av, rv) = (self.value(a), self.value(row));
        let (m, n) = av.dims2("add_row")?;
        if rv.shape() != [1, n] {
            return Err(mismatch("add_row", av, rv));
        }
        let mut data = av.data().to_vec();
        for r in 0..m {
            for (x, b) in data[r * n..(r + 1) * n].iter_mut().zip(rv.data()) {
                *x += b;
            }
        }
        let v = Tensor::matrix(m, n, data)?;
        Ok(self.push(v, Op::AddRow(a, row), &[a, row]))
    }

    pub fn scalar_mul(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| x * s);
        self.push(v, Op::ScalarMul(a, s), &[a])
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| x + s);
        self.push(v, Op::AddScalar(a), &[a])
    }

    /// Concatenates matrices along `axis` (0 = rows, 1 = columns).
    pub fn concat(&mut self, inputs: &[Var], axis: usize) -> Result<Var> {
        let first = inputs
            .first()
            .ok_or_else(|| Error::shape("concat", "no inputs"))?;
        let (r0, c0) = self.value(*first).dims2("concat")?;
        let value = match axis {
            0 => {
                let mut data = Vec::new();
                let mut rows = 0;
                for &v in inputs {
                    let t = self.value(v);
                    let (r, c) = t.dims2("concat")?;
                    if c != c0 {
                        return Err(mismatch("concat", self.value(*first), t));
                    }
                    rows += r;
                    data.extend_from_slice(t.data());
                }
                Tensor::matrix(rows, c0, data)?
            }
            1 => {
                let mut cols = 0;
                for &v in inputs {
                    let t = self.value(v);
                    let (r, c) = t.dims2("concat")?;
                    if r != r0 {
                        return Err(mismatch("concat", self.value(*first), t));
                    }
                    cols += c;
                }
                let mut data = Vec::with_capacity(r0 * cols);
                for r in 0..r0 {
                    for &v in inputs {
                        data.extend_from_slice(self.value(v).row_slice(r));
                    }
                }
                Tensor::matrix(r0, cols, data)?
            }
            _ => return Err(Error::shape("concat", format!("axis {axis} on a matrix"))),
        };
        Ok(self.push(
            value,
            Op::Concat {
                inputs: inputs.to_vec(),
                axis,
            },
            inputs,
        ))
    }

    /// `len` rows (axis 0) or columns (axis 1) starting at `start`.
    pub fn slice(&mut self, a: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let t = self.value(a);
        let (r, c) = t.dims2("slice")?;
        let value = match axis {
            0 if start + len <= r => {
                Tensor::matrix(len, c, t.data()[start * c..(start + len) * c].to_vec())?
            }
            1 if start + len <= c => {
                let mut data = Vec::with_capacity(r * len);
                for row in 0..r {
                    data.extend_from_slice(&t.row_slice(row)[start..start + len]);
                }
                Tensor::matrix(r, len, data)?
            }
            _ => {
                return Err(Error::shape(
                    "slice",
                    format!("[{start}, {}) on axis {axis} of {:?}", start + len, t.shape()),
                ))
            }
        };
        Ok(self.push(value, Op::Slice { input: a, axis, start }, &[a]))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a);
        let (r, c) = t.dims2("transpose")?;
        let value = Tensor::matrix(c, r, transpose_raw(t.data(), r, c))?;
        Ok(self.push(value, Op::Transpose(a), &[a]))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).map(libm::tanh);
        self.push(v, Op::Tanh(a), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).map(sigmoid);
        self.push(v, Op::Sigmoid(a), &[a])
    }

    /// `ln(max(x, floor))`; the gradient is zero where the floor applies.
    pub fn ln_clamped(&mut self, a: Var, floor: f64) -> Var {
        let v = self.value(a).map(|x| libm::log(x.max(floor)));
        self.push(v, Op::LnClamped(a, floor), &[a])
    }

    /// Softmax along `axis` of a matrix (1 = within each row, 0 = within
    /// each column), computed after subtracting the max.
    pub fn softmax(&mut self, a: Var, axis: usize) -> Result<Var> {
        let t = self.value(a);
        let (r, c) = t.dims2("softmax")?;
        let value = match axis {
            1 => Tensor::matrix(r, c, softmax_rows(t.data(), r, c))?,
            0 => {
                let tr = transpose_raw(t.data(), r, c);
                Tensor::matrix(r, c, transpose_raw(&softmax_rows(&tr, c, r), c, r))?
            }
            _ => return Err(Error::shape("softmax", format!("axis {axis} on a matrix"))),
        };
        Ok(self.push(value, Op::Softmax { input: a, axis }, &[a]))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Tensor::scalar(self.value(a).sum());
        self.push(v, Op::Sum(a), &[a])
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let v = Tensor::scalar(t.sum() / t.numel() as f64);
        self.push(v, Op::Mean(a), &[a])
    }

    /// Rows of `table` selected by index (an embedding lookup).
    pub fn gather_rows(&mut self, table: Var, rows: &[usize]) -> Result<Var> {
        let t = self.value(table);
        let (r, c) = t.dims2("gather_rows")?;
        let mut data = Vec::with_capacity(rows.len() * c);
        for &i in rows {
            if i >= r {
                return Err(Error::IndexOutOfBounds { index: i, len: r });
            }
            data.extend_from_slice(t.row_slice(i));
        }
        let value = Tensor::matrix(rows.len(), c, data)?;
        Ok(self.push(
            value,
            Op::GatherRows {
                table,
                rows: rows.to_vec(),
            },
            &[table],
        ))
    }

    /// Applies a custom elementwise function with its own derivative rule.
    pub fn elementwise(&mut self, a: Var, f: ElementwiseFn) -> Var {
        let v = self.value(a).map(f.forward);
        self.push(v, Op::Elementwise(a, f), &[a])
    }

    /// Gradients of the scalar `output` with respect to every node.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        let out = self.value(output);
        if !out.is_scalar() {
            return Err(Error::NonScalarOutput(out.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(vec![1.0]);

        for i in (0..=output.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if node.needs_grad {
                self.propagate(node, &g, &mut grads);
            }
            grads[i] = Some(g);
        }
        // Only nodes that depend on a requires-grad leaf carry meaningful
        // gradients; the rest read as zero.
        for (g, node) in grads.iter_mut().zip(&self.nodes) {
            if !node.needs_grad {
                *g = None;
            }
        }
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape().to_vec()).collect(),
        })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !self.nodes[v.0].needs_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; self.nodes[v.0].value.numel()]);
            f(slot);
        };
        let y = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let (m, k) = (av.rows(), av.cols());
                let n = bv.cols();
                // dA = G Bᵀ, dB = Aᵀ G
                acc(*a, &mut |s| {
                    let bt = transpose_raw(bv.data(), k, n);
                    add_into(s, &matmul_raw(g, &bt, m, n, k));
                });
                acc(*b, &mut |s| {
                    let at = transpose_raw(av.data(), m, k);
                    add_into(s, &matmul_raw(&at, g, k, m, n));
                });
            }
            Op::Add(a, b) => {
                acc(*a, &mut |s| add_into(s, g));
                acc(*b, &mut |s| add_into(s, g));
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |s| add_into(s, g));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(x, d)| *x -= d));
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * bv[i];
                    }
                });
                acc(*b, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * av[i];
                    }
                });
            }
            Op::AddRow(a, row) => {
                let n = y.cols();
                acc(*a, &mut |s| add_into(s, g));
                acc(*row, &mut |s| {
                    for chunk in g.chunks(n) {
                        add_into(s, chunk);
                    }
                });
            }
            Op::ScalarMul(a, c) => acc(*a, &mut |s| {
                s.iter_mut().zip(g).for_each(|(x, d)| *x += c * d)
            }),
            Op::AddScalar(a) => acc(*a, &mut |s| add_into(s, g)),
            Op::Concat { inputs, axis } => {
                let total_cols = y.cols();
                let mut offset = 0;
                for &v in inputs {
                    let t = self.value(v);
                    let (r, c) = (t.rows(), t.cols());
                    match axis {
                        0 => acc(v, &mut |s| add_into(s, &g[offset * total_cols..(offset + r) * total_cols])),
                        _ => acc(v, &mut |s| {
                            for row in 0..r {
                                let src = &g[row * total_cols + offset..row * total_cols + offset + c];
                                add_into(&mut s[row * c..(row + 1) * c], src);
                            }
                        }),
                    }
                    offset += if *axis == 0 { r } else { c };
                }
            }
            Op::Slice { input, axis, start } => {
                let src = self.value(*input);
                let c = src.cols();
                let (yr, yc) = (y.rows(), y.cols());
                acc(*input, &mut |s| match axis {
                    0 => add_into(&mut s[start * c..(start + yr) * c], g),
                    _ => {
                        for row in 0..yr {
                            add_into(&mut s[row * c + start..row * c + start + yc], &g[row * yc..(row + 1) * yc]);
                        }
                    }
                });
            }
            Op::Transpose(a) => {
                let (r, c) = (y.rows(), y.cols());
                acc(*a, &mut |s| add_into(s, &transpose_raw(g, r, c)));
            }
            Op::Tanh(a) => acc(*a, &mut |s| {
                for i in 0..s.len() {
                    s[i] += g[i] * (1.0 - y.data()[i] * y.data()[i]);
                }
            }),
            Op::Sigmoid(a) => acc(*a, &mut |s| {
                for i in 0..s.len() {
                    let p = y.data()[i];
                    s[i] += g[i] * p * (1.0 - p);
                }
            }),
            Op::LnClamped(a, floor) => {
                let x = self.value(*a).data();
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        if x[i] > *floor {
                            s[i] += g[i] / x[i];
                        }
                    }
                })
            }
            Op::Softmax { input, axis } => {
                let (r, c) = (y.rows(), y.cols());
                let yd = y.data();
                acc(*input, &mut |s| {
                    // dx = y ⊙ (g − Σ g⊙y) along the softmax axis
                    let (outer, inner, stride_o, stride_i) = if *axis == 1 { (r, c, c, 1) } else { (c, r, 1, c) };
                    for o in 0..outer {
                        let dot: f64 = (0..inner).map(|i| g[o * stride_o + i * stride_i] * yd[o * stride_o + i * stride_i]).sum();
                        for i in 0..inner {
                            let idx = o * stride_o + i * stride_i;
                            s[idx] += yd[idx] * (g[idx] - dot);
                        }
                    }
                });
            }
            Op::Sum(a) => acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0])),
            Op::Mean(a) => {
                let n = self.value(*a).numel() as f64;
                acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0] / n))
            }
            Op::GatherRows { table, rows } => {
                let c = y.cols();
                acc(*table, &mut |s| {
                    for (k, &r) in rows.iter().enumerate() {
                        add_into(&mut s[r * c..(r + 1) * c], &g[k * c..(k + 1) * c]);
                    }
                });
            }
            Op::Elementwise(a, f) => {
                let x = self.value(*a).data();
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * (f.derivative)(x[i], y.data()[i]);
                    }
                })
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            for (o, bv) in row.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                *o += aip * bv;
            }
        }
    }
    out
}

fn transpose_raw(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

fn softmax_rows(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(r * c);
    for row in a.chunks(c.max(1)).take(r) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|x| libm::exp(x - max)).collect();
        let z: f64 = exps.iter().sum();
        out.extend(exps.iter().map(|e| e / z));
    }
    out
}
