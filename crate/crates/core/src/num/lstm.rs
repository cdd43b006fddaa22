use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::ops::sigmoid;
use crate::num::tensor::ParamTensor;

/// Gate order used everywhere: input, forget, output, candidate.
pub const GATES: [&str; 4] = ["i", "f", "o", "c"];

/// LSTM cell parameters: per-gate input weights (H x D), recurrent
/// weights (H x H) and biases (H).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LstmParams {
    pub w: [ParamTensor; 4],
    pub u: [ParamTensor; 4],
    pub b: [ParamTensor; 4],
    pub hidden: usize,
    pub input: usize,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = GATES.map(|g| ParamTensor::zeros(format!("lstm.w_{g}"), &[hidden, input]));
        let u = GATES.map(|g| ParamTensor::zeros(format!("lstm.u_{g}"), &[hidden, hidden]));
        let b = GATES.map(|g| ParamTensor::zeros(format!("lstm.b_{g}"), &[hidden]));
        LstmParams {
            w,
            u,
            b,
            hidden,
            input,
        }
    }

    /// Uniform init; forget-gate bias starts at 1 so early training does not
    /// wipe the cell state.
    pub fn init(hidden: usize, input: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut p = LstmParams::zeros(hidden, input);
        for k in 0..4 {
            for v in p.w[k].values.iter_mut() {
                *v = rng.gen_range(-scale..=scale);
            }
            for v in p.u[k].values.iter_mut() {
                *v = rng.gen_range(-scale..=scale);
            }
        }
        for v in p.b[1].values.iter_mut() {
            *v = 1.0;
        }
        p
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut ParamTensor> {
        let mut out = Vec::with_capacity(12);
        out.extend(self.w.iter_mut());
        out.extend(self.u.iter_mut());
        out.extend(self.b.iter_mut());
        out
    }

    pub fn tensors(&self) -> Vec<&ParamTensor> {
        let mut out = Vec::with_capacity(12);
        out.extend(self.w.iter());
        out.extend(self.u.iter());
        out.extend(self.b.iter());
        out
    }

    pub fn zero_grad(&mut self) {
        for t in self.tensors_mut() {
            t.zero_grad();
        }
    }
}

/// Per-timestep activations recorded during the forward pass; everything the
/// backward pass needs to reproduce exact gradients.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Vec<Vec<f64>>,
    pub gate_i: Vec<Vec<f64>>,
    pub gate_f: Vec<Vec<f64>>,
    pub gate_o: Vec<Vec<f64>>,
    pub gate_g: Vec<Vec<f64>>,
    pub cell: Vec<Vec<f64>>,
    pub tanh_cell: Vec<Vec<f64>>,
    pub hidden: Vec<Vec<f64>>,
    pub init_h: Vec<f64>,
    pub init_c: Vec<f64>,
}

impl ForwardCache {
    pub fn timesteps(&self) -> usize {
        self.inputs.len()
    }

    fn h_prev(&self, t: usize) -> &[f64] {
        if t == 0 {
            &self.init_h
        } else {
            &self.hidden[t - 1]
        }
    }

    fn c_prev(&self, t: usize) -> &[f64] {
        if t == 0 {
            &self.init_c
        } else {
            &self.cell[t - 1]
        }
    }
}

// y += M x for an H-major flat matrix of shape rows x cols.
fn mat_vec_add(m: &[f64], x: &[f64], rows: usize, cols: usize, y: &mut [f64]) {
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (mv, xv) in row.iter().zip(x) {
            acc += mv * xv;
        }
        y[r] += acc;
    }
}

// y += M^T d for M of shape rows x cols (d has rows entries, y has cols).
fn mat_t_vec_add(m: &[f64], d: &[f64], rows: usize, cols: usize, y: &mut [f64]) {
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        let dr = d[r];
        for (yv, mv) in y.iter_mut().zip(row) {
            *yv += mv * dr;
        }
    }
}

/// Runs the LSTM recurrence over an input sequence.
///
/// Returns the hidden state at every timestep, the final hidden state, and
/// the cache for the backward pass.
pub fn lstm_forward(
    params: &LstmParams,
    inputs: &[Vec<f64>],
    init_state: (&[f64], &[f64]),
) -> Result<(Vec<Vec<f64>>, Vec<f64>, ForwardCache)> {
    let (h, d) = (params.hidden, params.input);
    if inputs.is_empty() {
        return Err(Error::invalid("lstm_forward on empty sequence"));
    }
    for (t, x) in inputs.iter().enumerate() {
        if x.len() != d {
            return Err(Error::shape(format!(
                "input at timestep {t} has width {}, expected {d}",
                x.len()
            )));
        }
    }
    if init_state.0.len() != h || init_state.1.len() != h {
        return Err(Error::shape("init state width does not match hidden size"));
    }

    let steps = inputs.len();
    let mut cache = ForwardCache {
        inputs: inputs.to_vec(),
        gate_i: Vec::with_capacity(steps),
        gate_f: Vec::with_capacity(steps),
        gate_o: Vec::with_capacity(steps),
        gate_g: Vec::with_capacity(steps),
        cell: Vec::with_capacity(steps),
        tanh_cell: Vec::with_capacity(steps),
        hidden: Vec::with_capacity(steps),
        init_h: init_state.0.to_vec(),
        init_c: init_state.1.to_vec(),
    };

    let mut h_prev = init_state.0.to_vec();
    let mut c_prev = init_state.1.to_vec();
    for x in inputs {
        // Pre-activations per gate: W x + U h_prev + b.
        let mut pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
        for k in 0..4 {
            pre[k].copy_from_slice(&params.b[k].values);
            mat_vec_add(&params.w[k].values, x, h, d, &mut pre[k]);
            mat_vec_add(&params.u[k].values, &h_prev, h, h, &mut pre[k]);
        }
        let gi: Vec<f64> = pre[0].iter().map(|&a| sigmoid(a)).collect();
        let gf: Vec<f64> = pre[1].iter().map(|&a| sigmoid(a)).collect();
        let go: Vec<f64> = pre[2].iter().map(|&a| sigmoid(a)).collect();
        let gg: Vec<f64> = pre[3].iter().map(|&a| a.tanh()).collect();
        let mut c = vec![0.0; h];
        for j in 0..h {
            c[j] = gf[j] * c_prev[j] + gi[j] * gg[j];
        }
        let tc: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
        let mut hv = vec![0.0; h];
        for j in 0..h {
            hv[j] = go[j] * tc[j];
        }
        cache.gate_i.push(gi);
        cache.gate_f.push(gf);
        cache.gate_o.push(go);
        cache.gate_g.push(gg);
        cache.cell.push(c.clone());
        cache.tanh_cell.push(tc);
        cache.hidden.push(hv.clone());
        h_prev = hv;
        c_prev = c;
    }

    let final_hidden = h_prev;
    Ok((cache.hidden.clone(), final_hidden, cache))
}

/// Backpropagation through time from a gradient on the final hidden state.
///
/// Parameter gradients are accumulated into the tensors' grad buffers;
/// returns the gradient w.r.t. each input vector.
pub fn lstm_backward(
    params: &mut LstmParams,
    cache: &ForwardCache,
    upstream_grad: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let (h, d) = (params.hidden, params.input);
    if upstream_grad.len() != h {
        return Err(Error::shape(format!(
            "upstream grad width {} does not match hidden size {h}",
            upstream_grad.len()
        )));
    }
    let steps = cache.timesteps();
    if steps == 0 {
        return Err(Error::invalid("empty cache"));
    }
    if cache.init_h.len() != h || cache.inputs[0].len() != d {
        return Err(Error::shape("cache does not match params"));
    }

    let mut dx = vec![vec![0.0; d]; steps];
    let mut dh = upstream_grad.to_vec();
    let mut dc = vec![0.0; h];

    for t in (0..steps).rev() {
        let gi = &cache.gate_i[t];
        let gf = &cache.gate_f[t];
        let go = &cache.gate_o[t];
        let gg = &cache.gate_g[t];
        let tc = &cache.tanh_cell[t];
        let c_prev = cache.c_prev(t);
        let h_prev = cache.h_prev(t).to_vec();
        let x = &cache.inputs[t];

        // Gate pre-activation gradients.
        let mut da = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
        let mut dc_prev = vec![0.0; h];
        for j in 0..h {
            let dcj = dc[j] + dh[j] * go[j] * (1.0 - tc[j] * tc[j]);
            let do_j = dh[j] * tc[j];
            let di_j = dcj * gg[j];
            let df_j = dcj * c_prev[j];
            let dg_j = dcj * gi[j];
            da[0][j] = di_j * gi[j] * (1.0 - gi[j]);
            da[1][j] = df_j * gf[j] * (1.0 - gf[j]);
            da[2][j] = do_j * go[j] * (1.0 - go[j]);
            da[3][j] = dg_j * (1.0 - gg[j] * gg[j]);
            dc_prev[j] = dcj * gf[j];
        }

        let mut dh_prev = vec![0.0; h];
        for k in 0..4 {
            // dW += da x^T, dU += da h_prev^T, db += da.
            for j in 0..h {
                let daj = da[k][j];
                if daj == 0.0 {
                    continue;
                }
                let wrow = &mut params.w[k].grad[j * d..(j + 1) * d];
                for (gw, xv) in wrow.iter_mut().zip(x) {
                    *gw += daj * xv;
                }
                let urow = &mut params.u[k].grad[j * h..(j + 1) * h];
                for (gu, hv) in urow.iter_mut().zip(&h_prev) {
                    *gu += daj * hv;
                }
                params.b[k].grad[j] += daj;
            }
            mat_t_vec_add(&params.w[k].values, &da[k], h, d, &mut dx[t]);
            mat_t_vec_add(&params.u[k].values, &da[k], h, h, &mut dh_prev);
        }

        dh = dh_prev;
        dc = dc_prev;
    }

    Ok(dx)
}
