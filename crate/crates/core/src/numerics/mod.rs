//! Dense linear algebra, activations, losses, seeded randomness and Adam.
//!
//! Everything the model needs is implemented here over plain `f64` storage.

mod adam;
mod matrix;
mod rng;

pub use adam::{AdamConfig, AdamState};
pub use matrix::Matrix;
pub(crate) use matrix::{axpy, matvec_acc, matvec_t_acc, outer_acc};
pub use rng::{derive_seed, Rng};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid matrix dimensions {rows}x{cols}")]
    InvalidDimension { rows: usize, cols: usize },
    #[error("{op}: non-finite value")]
    NonFinite { op: &'static str },
    #[error("non-finite gradient in tensor {tensor}")]
    NonFiniteGradient { tensor: usize },
    #[error("target id {target} out of range for {classes} classes")]
    InvalidTarget { target: usize, classes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Matrix of i.i.d. `N(mean, std²)` draws from a stream seeded by `seed`.
pub fn gaussian_init(
    rows: usize,
    cols: usize,
    mean: f64,
    std: f64,
    seed: u64,
) -> Result<Matrix, NumericsError> {
    let mut rng = Rng::seed_from(seed);
    gaussian_init_with(rows, cols, mean, std, &mut rng)
}

pub(crate) fn gaussian_init_with(
    rows: usize,
    cols: usize,
    mean: f64,
    std: f64,
    rng: &mut Rng,
) -> Result<Matrix, NumericsError> {
    if !(std > 0.0 && std.is_finite()) || !mean.is_finite() {
        return Err(NumericsError::InvalidParameter(format!(
            "gaussian_init needs finite mean and std > 0, got mean={mean} std={std}"
        )));
    }
    let mut m = Matrix::zeros(rows, cols)?;
    for v in m.data_mut() {
        *v = mean + std * rng.next_normal();
    }
    Ok(m)
}

/// Numerically stable softmax over a slice.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if logits.is_empty() {
        return Err(NumericsError::InvalidDimension { rows: 0, cols: 0 });
    }
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(NumericsError::NonFinite { op: "softmax" });
    }
    let mut out = vec![0.0; logits.len()];
    softmax_into(logits, &mut out);
    Ok(out)
}

pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|o| *o *= inv);
}

/// Cross-entropy of a single logit vector against `target`.
///
/// Returns `(-ln p[target], p - onehot(target))` with the gradient shaped like
/// `logits`.
pub fn softmax_cross_entropy(
    logits: &Matrix,
    target: usize,
) -> Result<(f64, Matrix), NumericsError> {
    if target >= logits.len() {
        return Err(NumericsError::InvalidTarget {
            target,
            classes: logits.len(),
        });
    }
    if !logits.is_finite() {
        return Err(NumericsError::NonFinite {
            op: "softmax_cross_entropy",
        });
    }
    let mut grad = Matrix::zeros(logits.rows(), logits.cols())?;
    let loss = softmax_xent_into(logits.data(), target, grad.data_mut());
    Ok((loss, grad))
}

/// Writes `p - onehot(target)` into `grad` and returns the loss.
pub(crate) fn softmax_xent_into(logits: &[f64], target: usize, grad: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (g, &l) in grad.iter_mut().zip(logits) {
        *g = (l - max).exp();
        sum += *g;
    }
    let inv = 1.0 / sum;
    grad.iter_mut().for_each(|g| *g *= inv);
    grad[target] -= 1.0;
    // log-sum-exp form keeps precision when p[target] is close to 1.
    sum.ln() - (logits[target] - max)
}

fn check_rate(rate: f64) -> Result<(), NumericsError> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(NumericsError::InvalidParameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )))
    }
}

/// Inverted dropout. Identity when `training` is false or `rate` is 0.
pub fn dropout(
    input: &Matrix,
    rate: f64,
    training: bool,
    seed: u64,
) -> Result<Matrix, NumericsError> {
    check_rate(rate)?;
    if !input.is_finite() {
        return Err(NumericsError::NonFinite { op: "dropout" });
    }
    if !training || rate == 0.0 {
        return Ok(input.clone());
    }
    let mut rng = Rng::seed_from(seed);
    let mask = dropout_mask(input.len(), rate, &mut rng);
    let data = input.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
    Matrix::from_vec(input.rows(), input.cols(), data)
}

/// Per-element multipliers: `0` with probability `rate`, else `1 / (1 - rate)`.
pub(crate) fn dropout_mask(len: usize, rate: f64, rng: &mut Rng) -> Vec<f64> {
    let keep_scale = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.next_f64() < rate { 0.0 } else { keep_scale })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_init_is_deterministic() {
        let a = gaussian_init(4, 5, 0.0, 0.01, 9).unwrap();
        let b = gaussian_init(4, 5, 0.0, 0.01, 9).unwrap();
        assert_eq!(a, b);
        let c = gaussian_init(4, 5, 0.0, 0.01, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_init_statistics() {
        let n = 10_000.0;
        let std = 0.01;
        let m = gaussian_init(100, 100, 0.0, std, 2024).unwrap();
        let mean = m.data().iter().sum::<f64>() / n;
        let var = m.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * std / n.sqrt(), "sample mean {mean}");
        assert!((var.sqrt() - std).abs() < 0.05 * std, "sample std {}", var.sqrt());
    }

    #[test]
    fn gaussian_init_rejects_bad_std() {
        assert!(matches!(
            gaussian_init(2, 2, 0.0, 0.0, 1),
            Err(NumericsError::InvalidParameter(_))
        ));
        assert!(matches!(
            gaussian_init(0, 2, 0.0, 1.0, 1),
            Err(NumericsError::InvalidDimension { .. })
        ));
    }

    #[test]
    fn uniform_logits_give_log_v() {
        let v = 7;
        let logits = Matrix::from_vec(1, v, vec![0.3; v]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, 2).unwrap();
        assert!((loss - (v as f64).ln()).abs() < 1e-12);
        assert!(grad.data().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_matches_high_precision_reference() {
        // mpmath at 50 digits: -ln(e^10 / (e^10 + 2)).
        let reference = 0.000_090_795_737_467_244_446_275;
        let logits = Matrix::from_vec(1, 3, vec![10.0, 0.0, 0.0]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, 0).unwrap();
        assert!(((loss - reference) / reference).abs() < 1e-10, "{loss}");
        assert!(grad.data().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_rejects_bad_target_and_nan() {
        let logits = Matrix::from_vec(1, 3, vec![0.0; 3]).unwrap();
        assert!(matches!(
            softmax_cross_entropy(&logits, 3),
            Err(NumericsError::InvalidTarget { target: 3, classes: 3 })
        ));
        let mut bad = logits.clone();
        bad.data_mut()[1] = f64::NAN;
        assert!(matches!(
            softmax_cross_entropy(&bad, 0),
            Err(NumericsError::NonFinite { .. })
        ));
        assert!(matches!(softmax(&[1.0, f64::INFINITY]), Err(NumericsError::NonFinite { .. })));
    }

    #[test]
    fn dropout_identities() {
        let x = gaussian_init(3, 3, 0.0, 1.0, 5).unwrap();
        assert_eq!(dropout(&x, 0.0, true, 1).unwrap(), x);
        assert_eq!(dropout(&x, 0.5, false, 1).unwrap(), x);
        assert!(dropout(&x, 1.0, true, 1).is_err());
        assert!(dropout(&x, -0.1, true, 1).is_err());
    }

    #[test]
    fn dropout_preserves_expectation() {
        let ones = Matrix::from_vec(1, 100_000, vec![1.0; 100_000]).unwrap();
        let out = dropout(&ones, 0.2, true, 77).unwrap();
        let mean = out.data().iter().sum::<f64>() / 100_000.0;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        let zeros = out.data().iter().filter(|&&v| v == 0.0).count();
        assert!((zeros as f64 / 100_000.0 - 0.2).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(logits in prop::collection::vec(-50.0f64..50.0, 1..40)) {
            let p = softmax(&logits).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
