//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use lynwerk_core::corpus::TokenId;
use lynwerk_core::model::{backward, forward, ModelParams, Mode};
use lynwerk_core::numerics::Matrix;

/// Total cross-entropy computed straight from the logits, without the
/// library's loss code.
pub fn total_cross_entropy(logits: &Matrix, targets: &[TokenId]) -> f64 {
    targets
        .iter()
        .enumerate()
        .map(|(t, &target)| {
            let row = logits.row(t);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[target as usize]
        })
        .sum()
}

fn upstream_gradient(logits: &Matrix, targets: &[TokenId]) -> Matrix {
    let mut d = logits.clone();
    for (t, &target) in targets.iter().enumerate() {
        let row = d.row_mut(t);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        for v in row.iter_mut() {
            *v = (*v - max).exp() / sum;
        }
        row[target as usize] -= 1.0;
    }
    d
}

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps gradients that are zero
/// up to rounding from dominating.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-6;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

pub struct GradCheck {
    /// Worst relative error per tensor, in declaration order.
    pub per_tensor: Vec<f64>,
    pub checked: usize,
}

impl GradCheck {
    pub fn max(&self) -> f64 {
        self.per_tensor.iter().cloned().fold(0.0, f64::max)
    }
}

/// Compares BPTT gradients with central differences on every parameter.
pub fn gradient_check(params: &ModelParams, inputs: &[TokenId], targets: &[TokenId], mode: Mode, eps: f64) -> GradCheck {
    let out = forward(params, inputs, mode).unwrap();
    let dlogits = upstream_gradient(&out.logits, targets);
    let analytic = backward(params, &out.cache, &dlogits).unwrap();

    let loss_at = |p: &ModelParams| total_cross_entropy(&forward(p, inputs, mode).unwrap().logits, targets);
    let mut probe = params.clone();
    let mut per_tensor = Vec::new();
    let mut checked = 0;
    for k in 0..analytic.tensors().len() {
        let mut worst: f64 = 0.0;
        for i in 0..analytic.tensors()[k].len() {
            let original = probe.tensors()[k].data()[i];
            probe.tensors_mut()[k].data_mut()[i] = original + eps;
            let plus = loss_at(&probe);
            probe.tensors_mut()[k].data_mut()[i] = original - eps;
            let minus = loss_at(&probe);
            probe.tensors_mut()[k].data_mut()[i] = original;
            let numeric = (plus - minus) / (2.0 * eps);
            worst = worst.max(relative_error(analytic.tensors()[k].data()[i], numeric));
            checked += 1;
        }
        per_tensor.push(worst);
    }
    GradCheck { per_tensor, checked }
}

/// Longest contiguous run of `probe` found inside any line, by scanning every
/// substring of the probe against every corpus position.
pub fn brute_force_overlap(probe: &[TokenId], corpus: &[Vec<TokenId>]) -> usize {
    let mut best = 0;
    for start in 0..probe.len() {
        for end in (start + 1)..=probe.len() {
            let needle = &probe[start..end];
            if needle.len() <= best {
                continue;
            }
            if corpus.iter().any(|line| line.windows(needle.len()).any(|w| w == needle)) {
                best = needle.len();
            }
        }
    }
    best
}

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Small, briefly trained model over the hand-written sample text: fluent
/// enough to produce word sequences, far from memorizing them.
pub fn sample_checkpoint() -> lynwerk_core::model::Checkpoint {
    use lynwerk_core::corpus::{load_corpus, segment_lines};
    use lynwerk_core::trainer::{train, TrainConfig};
    let corpus = segment_lines(load_corpus(&fixtures_dir().join("af_sample.txt")).unwrap()).unwrap();
    let config = TrainConfig {
        embedding_dim: 16,
        hidden: 16,
        epochs: 4,
        seed: 1,
        ..TrainConfig::default()
    };
    train(&corpus, &config).unwrap().0
}
