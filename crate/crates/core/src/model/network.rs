use super::cell::{cell_backward, cell_forward, CellCache};
use super::{ModelError, ModelParams};
use crate::corpus::TokenId;
use crate::numerics::{axpy, dropout_mask, matvec_acc, matvec_t_acc, outer_acc, Matrix, Rng};

/// Whether dropout is active for a forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Inference,
    /// Inverted dropout after each LSTM layer, masks drawn from `seed`.
    Training { dropout: f64, seed: u64 },
}

/// Everything `backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    ids: Vec<TokenId>,
    layer1: Vec<CellCache>,
    layer2: Vec<CellCache>,
    masks1: Vec<Vec<f64>>,
    masks2: Vec<Vec<f64>>,
    /// Projection inputs (layer-2 output after dropout).
    top: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.ids
    }

    /// Hidden output of the top layer at step `t`, as fed to the projection.
    pub fn top(&self, t: usize) -> &[f64] {
        &self.top[t]
    }
}

#[derive(Debug, Clone)]
pub struct Forward {
    /// `T × V`
    pub logits: Matrix,
    pub cache: ForwardCache,
}

fn check_ids(params: &ModelParams, ids: &[TokenId]) -> Result<(), ModelError> {
    if ids.is_empty() {
        return Err(ModelError::EmptySequence);
    }
    let vocab = params.dims().vocab;
    match ids.iter().find(|&&id| id as usize >= vocab) {
        Some(&id) => Err(ModelError::InvalidTokenId { id, vocab }),
        None => Ok(()),
    }
}

/// Runs the whole stack over `ids` from a zero state.
pub fn forward(params: &ModelParams, ids: &[TokenId], mode: Mode) -> Result<Forward, ModelError> {
    check_ids(params, ids)?;
    let dims = params.dims();
    let hidden = dims.hidden;
    let (rate, mut rng) = match mode {
        Mode::Training { dropout, seed } if dropout > 0.0 => {
            if !(0.0..1.0).contains(&dropout) {
                return Err(ModelError::InvalidDropout(dropout));
            }
            (dropout, Some(Rng::seed_from(seed)))
        }
        _ => (0.0, None),
    };

    let steps = ids.len();
    let mut cache = ForwardCache {
        ids: ids.to_vec(),
        layer1: Vec::with_capacity(steps),
        layer2: Vec::with_capacity(steps),
        masks1: Vec::new(),
        masks2: Vec::new(),
        top: Vec::with_capacity(steps),
    };
    let mut logits = Matrix::zeros(steps, dims.vocab)?;
    let (mut h1, mut c1) = (vec![0.0; hidden], vec![0.0; hidden]);
    let (mut h2, mut c2) = (vec![0.0; hidden], vec![0.0; hidden]);

    for (t, &id) in ids.iter().enumerate() {
        let x = params.embedding.row(id as usize).to_vec();
        let l1 = cell_forward(x, h1, c1, &params.layer1);
        h1 = l1.h();
        c1 = l1.c.clone();
        let mut into2 = h1.clone();
        if let Some(rng) = rng.as_mut() {
            let mask = dropout_mask(hidden, rate, rng);
            into2.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
            cache.masks1.push(mask);
        }
        let l2 = cell_forward(into2, h2, c2, &params.layer2);
        h2 = l2.h();
        c2 = l2.c.clone();
        let mut top = h2.clone();
        if let Some(rng) = rng.as_mut() {
            let mask = dropout_mask(hidden, rate, rng);
            top.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
            cache.masks2.push(mask);
        }
        let row = logits.row_mut(t);
        row.copy_from_slice(params.proj_b.data());
        matvec_acc(&params.proj_w, &top, row);

        cache.layer1.push(l1);
        cache.layer2.push(l2);
        cache.top.push(top);
    }
    if !logits.is_finite() {
        return Err(ModelError::NonFinite("forward logits"));
    }
    Ok(Forward { logits, cache })
}

/// Exact gradients of `Σ_t dlogits[t] · logits[t]` with respect to every
/// parameter, by backpropagation through time.
pub fn backward(
    params: &ModelParams,
    cache: &ForwardCache,
    dlogits: &Matrix,
) -> Result<ModelParams, ModelError> {
    let mut grads = ModelParams::zeros(params.dims())?;
    backward_into(params, cache, dlogits, &mut grads)?;
    Ok(grads)
}

/// Like [`backward`] but accumulates into `grads`.
pub fn backward_into(
    params: &ModelParams,
    cache: &ForwardCache,
    dlogits: &Matrix,
    grads: &mut ModelParams,
) -> Result<(), ModelError> {
    let dims = params.dims();
    if dlogits.shape() != (cache.len(), dims.vocab) {
        return Err(ModelError::CacheMismatch {
            expected: (cache.len(), dims.vocab),
            got: dlogits.shape(),
        });
    }
    if grads.dims() != dims || cache.layer1.first().is_some_and(|c| c.c.len() != dims.hidden) {
        return Err(ModelError::ShapeMismatch("gradient buffer does not match model".into()));
    }
    let hidden = dims.hidden;
    let mut dh1_next = vec![0.0; hidden];
    let mut dc1_next = vec![0.0; hidden];
    let mut dh2_next = vec![0.0; hidden];
    let mut dc2_next = vec![0.0; hidden];

    for t in (0..cache.len()).rev() {
        let dl = dlogits.row(t);
        let mut dh2 = dh2_next;
        if dl.iter().any(|&v| v != 0.0) {
            outer_acc(&mut grads.proj_w, dl, &cache.top[t]);
            axpy(1.0, dl, grads.proj_b.data_mut());
            let mut dtop = vec![0.0; hidden];
            matvec_t_acc(&params.proj_w, dl, &mut dtop);
            if let Some(mask) = cache.masks2.get(t) {
                dtop.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
            }
            axpy(1.0, &dtop, &mut dh2);
        }
        let (mut dx2, dh2_prev, dc2_prev) =
            cell_backward(&cache.layer2[t], &dh2, &dc2_next, &params.layer2, &mut grads.layer2);
        if let Some(mask) = cache.masks1.get(t) {
            dx2.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
        }
        let mut dh1 = dh1_next;
        axpy(1.0, &dx2, &mut dh1);
        let (dx1, dh1_prev, dc1_prev) =
            cell_backward(&cache.layer1[t], &dh1, &dc1_next, &params.layer1, &mut grads.layer1);
        axpy(1.0, &dx1, grads.embedding.row_mut(cache.ids[t] as usize));

        dh1_next = dh1_prev;
        dc1_next = dc1_prev;
        dh2_next = dh2_prev;
        dc2_next = dc2_prev;
    }
    Ok(())
}

/// Recurrent state of both layers during incremental decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h1: Vec<f64>,
    pub c1: Vec<f64>,
    pub h2: Vec<f64>,
    pub c2: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h1: vec![0.0; hidden],
            c1: vec![0.0; hidden],
            h2: vec![0.0; hidden],
            c2: vec![0.0; hidden],
        }
    }
}

/// One inference step: feeds `id`, advances `state` and returns the logits.
pub fn step(params: &ModelParams, state: &mut HiddenState, id: TokenId) -> Result<Vec<f64>, ModelError> {
    check_ids(params, &[id])?;
    let x = params.embedding.row(id as usize).to_vec();
    let l1 = cell_forward(x, std::mem::take(&mut state.h1), std::mem::take(&mut state.c1), &params.layer1);
    state.h1 = l1.h();
    state.c1 = l1.c;
    let l2 = cell_forward(
        state.h1.clone(),
        std::mem::take(&mut state.h2),
        std::mem::take(&mut state.c2),
        &params.layer2,
    );
    state.h2 = l2.h();
    state.c2 = l2.c;
    let mut logits = params.proj_b.data().to_vec();
    matvec_acc(&params.proj_w, &state.h2, &mut logits);
    Ok(logits)
}
