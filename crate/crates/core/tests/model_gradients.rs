mod common;

use common::{fixtures_dir, gradient_check};
use lynwerk_core::model::{forward, ModelDims, ModelParams, Mode};
use lynwerk_core::numerics::{Matrix, Rng};

#[test]
fn bptt_matches_finite_differences_v7_e4_h3_t5() {
    let dims = ModelDims { vocab: 7, embed: 4, hidden: 3 };
    let params = ModelParams::init(dims, 0.4, 17).unwrap();
    let inputs = [2, 4, 6, 5, 4];
    let targets = [4, 6, 5, 4, 3];
    let check = gradient_check(&params, &inputs, &targets, Mode::Inference, 1e-5);
    assert_eq!(check.checked, dims.parameter_count());
    assert!(check.max() < 1e-4, "per-tensor errors {:?}", check.per_tensor);
}

#[test]
fn bptt_matches_finite_differences_with_dropout_masks() {
    // Masks are fixed by the seed, so the loss stays a smooth function of the
    // parameters and central differences apply.
    let dims = ModelDims { vocab: 8, embed: 5, hidden: 4 };
    let params = ModelParams::init(dims, 0.4, 23).unwrap();
    let mode = Mode::Training { dropout: 0.2, seed: 99 };
    let check = gradient_check(&params, &[2, 5, 7, 4], &[5, 7, 4, 3], mode, 1e-5);
    assert!(check.max() < 1e-4, "per-tensor errors {:?}", check.per_tensor);
}

#[test]
fn bptt_matches_finite_differences_on_random_configurations() {
    let mut rng = Rng::seed_from(2718);
    for _ in 0..5 {
        let vocab = 5 + rng.below(6) as usize;
        let embed = 1 + rng.below(6) as usize;
        let hidden = 1 + rng.below(4) as usize;
        let len = 1 + rng.below(6) as usize;
        let dims = ModelDims { vocab, embed, hidden };
        let params = ModelParams::init(dims, 0.5, rng.next_u64()).unwrap();
        let ids: Vec<u32> = (0..=len).map(|_| rng.below(vocab as u64) as u32).collect();
        let check = gradient_check(&params, &ids[..len], &ids[1..], Mode::Inference, 1e-5);
        assert!(check.max() < 1e-4, "{dims:?} T={len}: {:?}", check.per_tensor);
    }
}

/// Parameters of the frozen 6-word fixture model, by the same closed formula
/// as `tests/oracles/tiny_model_logits.py`.
fn fixture_model() -> ModelParams {
    let dims = ModelDims { vocab: 6, embed: 4, hidden: 3 };
    let mut p = ModelParams::zeros(dims).unwrap();
    for (k, tensor) in p.tensors_mut().into_iter().enumerate() {
        for (i, v) in tensor.data_mut().iter_mut().enumerate() {
            *v = 0.3 * (1.7 * (i as f64 + 1.0) + 0.9 * k as f64).sin();
        }
    }
    p
}

#[test]
fn fixture_model_logits_match_reference_file() {
    let text = std::fs::read_to_string(fixtures_dir().join("tiny_model_logits.txt")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    let reference = Matrix::from_rows(&rows).unwrap();
    let out = forward(&fixture_model(), &[2, 4, 5], Mode::Inference).unwrap();
    assert_eq!(out.logits.shape(), reference.shape());
    for (a, b) in out.logits.data().iter().zip(reference.data()) {
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
}
