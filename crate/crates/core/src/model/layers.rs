//! Building blocks recorded on a [`Tape`].

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Attention parameters: projection `w` (d×d), bias `b` (1×d), context `u` (d×1).
#[derive(Debug, Clone, Copy)]
pub struct AttentionVars {
    pub w: Var,
    pub b: Var,
    pub u: Var,
}

/// One GRU direction: input maps `w*` (in×h), recurrent maps `u*` (h×h),
/// biases `b*` (1×h) for the update, reset and candidate gates.
#[derive(Debug, Clone, Copy)]
pub struct GruVars {
    pub wz: Var,
    pub wr: Var,
    pub wn: Var,
    pub uz: Var,
    pub ur: Var,
    pub un: Var,
    pub bz: Var,
    pub br: Var,
    pub bn: Var,
}

pub fn linear(t: &mut Tape, x: Var, w: Var, b: Var) -> Result<Var> {
    let y = t.matmul(x, w)?;
    t.add_row(y, b)
}

/// Attention pooling over the rows of `v` (n×d).
///
/// Returns the n×1 weights `softmax(tanh(v W + b) u)` and the 1×d pooled
/// vector `weightsᵀ v`.
pub fn attention_pool(t: &mut Tape, v: Var, att: AttentionVars) -> Result<(Var, Var)> {
    if t.value(v).rows() == 0 {
        return Err(Error::shape("attention_pool", "no rows to pool"));
    }
    let proj = linear(t, v, att.w, att.b)?;
    let proj = t.tanh(proj);
    let scores = t.matmul(proj, att.u)?;
    let weights = t.softmax(scores, 0)?;
    let wt = t.transpose(weights)?;
    let pooled = t.matmul(wt, v)?;
    Ok((weights, pooled))
}

/// Runs one GRU direction over the rows of `seq`, returning per-row hidden
/// states in sequence order and the final state.
fn gru_run(t: &mut Tape, seq: Var, g: GruVars, h0: Var, reverse: bool) -> Result<(Vec<Var>, Var)> {
    let m = t.value(seq).rows();
    let xz = linear(t, seq, g.wz, g.bz)?;
    let xr = linear(t, seq, g.wr, g.br)?;
    let xn = linear(t, seq, g.wn, g.bn)?;
    let mut h = h0;
    let mut states = vec![h0; m];
    let order: Vec<usize> = if reverse { (0..m).rev().collect() } else { (0..m).collect() };
    for i in order {
        let hz = t.matmul(h, g.uz)?;
        let z = t.slice(xz, 0, i, 1)?;
        let z = t.add(z, hz)?;
        let z = t.sigmoid(z);

        let hr = t.matmul(h, g.ur)?;
        let r = t.slice(xr, 0, i, 1)?;
        let r = t.add(r, hr)?;
        let r = t.sigmoid(r);

        let rh = t.mul(r, h)?;
        let hn = t.matmul(rh, g.un)?;
        let n = t.slice(xn, 0, i, 1)?;
        let n = t.add(n, hn)?;
        let n = t.tanh(n);

        // h' = (1 − z) ⊙ n + z ⊙ h = n + z ⊙ (h − n)
        let diff = t.sub(h, n)?;
        let zd = t.mul(z, diff)?;
        h = t.add(n, zd)?;
        states[i] = h;
    }
    Ok((states, h))
}

/// Bidirectional GRU over the rows of `seq` (m×in).
///
/// Returns the m×2h outputs (forward state then backward state per row) and
/// the final forward and backward states.
pub fn bigru_encode(
    t: &mut Tape,
    seq: Var,
    fwd: GruVars,
    bwd: GruVars,
    h0_fwd: Var,
    h0_bwd: Var,
) -> Result<(Var, (Var, Var))> {
    if t.value(seq).rows() == 0 {
        return Err(Error::shape("bigru_encode", "empty sequence"));
    }
    let (f, f_last) = gru_run(t, seq, fwd, h0_fwd, false)?;
    let (b, b_last) = gru_run(t, seq, bwd, h0_bwd, true)?;
    let rows = f
        .into_iter()
        .zip(b)
        .map(|(f, b)| t.concat(&[f, b], 1))
        .collect::<Result<Vec<_>>>()?;
    let out = t.concat(&rows, 0)?;
    Ok((out, (f_last, b_last)))
}

/// A 1×h zero state.
pub fn zero_state(t: &mut Tape, h: usize) -> Var {
    t.constant(Tensor::zeros(&[1, h]))
}

/// Dot-product interaction between `h` (m×w) and `g` (p×w).
///
/// With `e = h gᵀ`, each row of `h′` attends over `g` with the row softmax
/// of `e`, and each row of `g′` attends over `h` with the column softmax.
pub fn interaction(t: &mut Tape, h: Var, g: Var) -> Result<(Var, Var)> {
    let gt = t.transpose(g)?;
    let e = t.matmul(h, gt)?;
    let row = t.softmax(e, 1)?;
    let h2 = t.matmul(row, g)?;
    let col = t.softmax(e, 0)?;
    let col_t = t.transpose(col)?;
    let g2 = t.matmul(col_t, h)?;
    Ok((h2, g2))
}

/// Row-wise `[v, v′, v − v′, v ⊙ v′]`.
pub fn merge_quadruple(t: &mut Tape, v: Var, v2: Var) -> Result<Var> {
    let diff = t.sub(v, v2)?;
    let prod = t.mul(v, v2)?;
    t.concat(&[v, v2, diff, prod], 1)
}
