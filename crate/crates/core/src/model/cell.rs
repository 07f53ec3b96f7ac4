//! A single LSTM step and its exact local gradient.
//!
//! ```text
//! z  = W·x + U·h + b            (4H, blocks [i, f, g, o])
//! i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o)
//! c' = f ⊙ c + i ⊙ g
//! h' = o ⊙ tanh(c')
//! ```

use super::{LstmLayerParams, ModelError};
use crate::numerics::{matvec_acc, matvec_t_acc, outer_acc, sigmoid};

/// Intermediates kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`, `4H`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

impl CellCache {
    pub fn h(&self) -> Vec<f64> {
        let hidden = self.c.len();
        let o = &self.gates[3 * hidden..];
        o.iter().zip(&self.tanh_c).map(|(o, t)| o * t).collect()
    }
}

/// Checked forward step. Returns `(h', c', cache)`.
pub fn lstm_cell_forward(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    params: &LstmLayerParams,
) -> Result<(Vec<f64>, Vec<f64>, CellCache), ModelError> {
    let hidden = params.hidden_size();
    if x.len() != params.input_size() || h.len() != hidden || c.len() != hidden {
        return Err(ModelError::ShapeMismatch(format!(
            "cell expects x:{} h:{hidden} c:{hidden}, got x:{} h:{} c:{}",
            params.input_size(),
            x.len(),
            h.len(),
            c.len()
        )));
    }
    let all = [x, h, c];
    if all.iter().any(|v| v.iter().any(|e| !e.is_finite())) {
        return Err(ModelError::NonFinite("lstm_cell_forward input"));
    }
    let cache = cell_forward(x.to_vec(), h.to_vec(), c.to_vec(), params);
    Ok((cache.h(), cache.c.clone(), cache))
}

pub(crate) fn cell_forward(
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    params: &LstmLayerParams,
) -> CellCache {
    let hidden = params.hidden_size();
    let mut z = params.b.data().to_vec();
    matvec_acc(&params.w, &x, &mut z);
    matvec_acc(&params.u, &h_prev, &mut z);

    let (ifo_and_g, o) = z.split_at_mut(3 * hidden);
    let (i_f, g) = ifo_and_g.split_at_mut(2 * hidden);
    i_f.iter_mut().for_each(|v| *v = sigmoid(*v));
    g.iter_mut().for_each(|v| *v = v.tanh());
    o.iter_mut().for_each(|v| *v = sigmoid(*v));

    let mut c = vec![0.0; hidden];
    let mut tanh_c = vec![0.0; hidden];
    for k in 0..hidden {
        c[k] = z[hidden + k] * c_prev[k] + z[k] * z[2 * hidden + k];
        tanh_c[k] = c[k].tanh();
    }
    CellCache {
        x,
        h_prev,
        c_prev,
        gates: z,
        c,
        tanh_c,
    }
}

/// Backward through one step.
///
/// `dh` is the total gradient reaching `h'` and `dc_next` the gradient reaching
/// `c'` from the following step. Parameter gradients are accumulated into
/// `grads`; returns `(dx, dh_prev, dc_prev)`.
pub(crate) fn cell_backward(
    cache: &CellCache,
    dh: &[f64],
    dc_next: &[f64],
    params: &LstmLayerParams,
    grads: &mut LstmLayerParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hidden = cache.c.len();
    let (gi, gf, gg, go) = (
        &cache.gates[..hidden],
        &cache.gates[hidden..2 * hidden],
        &cache.gates[2 * hidden..3 * hidden],
        &cache.gates[3 * hidden..],
    );
    let mut dz = vec![0.0; 4 * hidden];
    let mut dc_prev = vec![0.0; hidden];
    for k in 0..hidden {
        let tc = cache.tanh_c[k];
        let d_o = dh[k] * tc;
        let dc = dc_next[k] + dh[k] * go[k] * (1.0 - tc * tc);
        let d_i = dc * gg[k];
        let d_g = dc * gi[k];
        let d_f = dc * cache.c_prev[k];
        dc_prev[k] = dc * gf[k];
        dz[k] = d_i * gi[k] * (1.0 - gi[k]);
        dz[hidden + k] = d_f * gf[k] * (1.0 - gf[k]);
        dz[2 * hidden + k] = d_g * (1.0 - gg[k] * gg[k]);
        dz[3 * hidden + k] = d_o * go[k] * (1.0 - go[k]);
    }
    outer_acc(&mut grads.w, &dz, &cache.x);
    outer_acc(&mut grads.u, &dz, &cache.h_prev);
    for (b, d) in grads.b.data_mut().iter_mut().zip(&dz) {
        *b += d;
    }
    let mut dx = vec![0.0; cache.x.len()];
    matvec_t_acc(&params.w, &dz, &mut dx);
    let mut dh_prev = vec![0.0; hidden];
    matvec_t_acc(&params.u, &dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}
