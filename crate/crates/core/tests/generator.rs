mod common;

use std::collections::HashSet;

use common::brute_force_overlap;
use lynwerk_core::corpus::{Corpus, TokenId, Vocabulary};
use lynwerk_core::generator::{
    generate_batch, generate_set, ngram_overlap, sample_line, sample_token, CorpusIndex, Decoding, GenConfig,
    GenError,
};
use lynwerk_core::model::{Checkpoint, ModelDims, ModelParams};
use lynwerk_core::numerics::{softmax, Rng};
use lynwerk_core::trainer::{train, TrainConfig};
use proptest::prelude::*;

fn overfit_abc() -> Checkpoint {
    let corpus = Corpus::from_text_segmented("abc", &"a b c.\n".repeat(64)).unwrap();
    let config = TrainConfig {
        embedding_dim: 16,
        hidden: 16,
        epochs: 150,
        seed: 2,
        ..TrainConfig::default()
    };
    train(&corpus, &config).unwrap().0
}

fn random_model(vocab_words: usize, seed: u64) -> (ModelParams, Vocabulary) {
    let vocab = Vocabulary::from_tokens((0..vocab_words).map(|i| format!("w{i}"))).unwrap();
    let dims = ModelDims { vocab: vocab.len(), embed: 6, hidden: 5 };
    (ModelParams::init(dims, 1.0, seed).unwrap(), vocab)
}

#[test]
fn six_line_corpus_shares_one_trigram() {
    let corpus: Vec<Vec<TokenId>> = vec![
        vec![10, 11, 12, 13],
        vec![14, 15, 16],
        vec![17, 18, 19, 20, 21],
        vec![22, 23],
        vec![11, 24, 25, 26],
        vec![27, 28, 29, 30],
    ];
    let probe = [31, 18, 19, 20, 32, 11];
    let index = CorpusIndex::build(&corpus);
    assert_eq!(brute_force_overlap(&probe, &corpus), 3);
    assert_eq!(ngram_overlap(&probe, &index), 3);
    assert_eq!(ngram_overlap(&corpus[2], &index), 5);
    assert_eq!(ngram_overlap(&[40, 41], &index), 0);
}

proptest! {
    #[test]
    fn index_agrees_with_brute_force(
        corpus in prop::collection::vec(prop::collection::vec(4u32..9, 0..8), 0..8),
        probe in prop::collection::vec(4u32..9, 0..10),
    ) {
        let index = CorpusIndex::build(&corpus);
        prop_assert_eq!(ngram_overlap(&probe, &index), brute_force_overlap(&probe, &corpus));
    }
}

#[test]
fn temperature_one_sampling_matches_softmax() {
    let logits = [1.2, -0.4, 0.3, 2.0, -1.5];
    let probs = softmax(&logits).unwrap();
    let draws = 50_000;
    let mut counts = [0usize; 5];
    let mut rng = Rng::seed_from(8128);
    for _ in 0..draws {
        counts[sample_token(&logits, 1.0, &mut rng)] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let expected = p * draws as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    // Upper 1% point of chi-square with 4 degrees of freedom.
    assert!(chi2 < 13.277, "chi2 = {chi2}, counts {counts:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn greedy_lines_survive_logit_scaling(seed in any::<u64>(), scale in 0.05f64..20.0) {
        let (params, vocab) = random_model(12, seed);
        let mut scaled = params.clone();
        scaled.proj_w.data_mut().iter_mut().for_each(|v| *v *= scale);
        scaled.proj_b.data_mut().iter_mut().for_each(|v| *v *= scale);
        let a = sample_line(&params, &vocab, Decoding::Greedy, 12, false, &mut Rng::seed_from(1)).unwrap();
        let b = sample_line(&scaled, &vocab, Decoding::Greedy, 12, false, &mut Rng::seed_from(2)).unwrap();
        prop_assert_eq!(a.token_ids, b.token_ids);
    }
}

#[test]
fn same_seed_same_line() {
    let (params, vocab) = random_model(15, 4);
    let decoding = Decoding::Sample { temperature: 0.9 };
    let a = sample_line(&params, &vocab, decoding, 10, false, &mut Rng::seed_from(77)).unwrap();
    let b = sample_line(&params, &vocab, decoding, 10, false, &mut Rng::seed_from(77)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.log_probs.len(), a.tokens.len());
    assert!(a.log_probs.iter().all(|&l| l <= 0.0));
    let g1 = sample_line(&params, &vocab, Decoding::Greedy, 10, false, &mut Rng::seed_from(1)).unwrap();
    let g2 = sample_line(&params, &vocab, Decoding::Greedy, 10, false, &mut Rng::seed_from(2)).unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn overfit_model_reproduces_its_line_and_cannot_pass_a_zero_cap() {
    let ckpt = overfit_abc();
    let line = sample_line(&ckpt.params, &ckpt.vocab, Decoding::Greedy, 10, false, &mut Rng::seed_from(0)).unwrap();
    assert_eq!(line.tokens, ["a", "b", "c", "."]);
    assert_eq!(line.text, "a b c.");

    let index = CorpusIndex::build(&ckpt.corpus_lines);
    let config = GenConfig {
        count: 10,
        max_ngram_overlap: 0,
        ..GenConfig::default()
    };
    let err = generate_set(&ckpt.params, &ckpt.vocab, &index, &config).unwrap_err();
    assert!(matches!(err, GenError::RetryBudgetExhausted { requested: 10, attempts: 500, .. }), "{err}");
}

#[test]
fn duplicates_are_case_insensitive() {
    let (params, vocab) = random_model(15, 9);
    let index = CorpusIndex::build(&[]);
    let config = GenConfig {
        count: 1,
        greedy: true,
        min_words: 0,
        ..GenConfig::default()
    };
    let first = generate_set(&params, &vocab, &index, &config).unwrap().remove(0);
    let taken: HashSet<String> = [first.text.to_uppercase().to_lowercase()].into();
    let again = generate_batch(&params, &vocab, &index, &config, &mut Rng::seed_from(0), &taken);
    assert!(matches!(again, Err(GenError::RetryBudgetExhausted { accepted: 0, .. })));
    // Greedy decoding can never yield a second distinct line.
    let two = GenConfig { count: 2, ..config };
    assert!(matches!(
        generate_set(&params, &vocab, &index, &two),
        Err(GenError::RetryBudgetExhausted { accepted: 1, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn accepted_lines_satisfy_the_filter(
        seed in any::<u64>(),
        cap in 1usize..5,
        corpus_seed in any::<u64>(),
    ) {
        let (params, vocab) = random_model(10, seed);
        let mut rng = Rng::seed_from(corpus_seed);
        let corpus: Vec<Vec<TokenId>> = (0..12)
            .map(|_| (0..2 + rng.below(6)).map(|_| 4 + rng.below(10) as TokenId).collect())
            .collect();
        let index = CorpusIndex::build(&corpus);
        let config = GenConfig { count: 6, max_tokens: 10, max_ngram_overlap: cap, seed, ..GenConfig::default() };
        let lines = match generate_set(&params, &vocab, &index, &config) {
            Ok(lines) => lines,
            Err(GenError::RetryBudgetExhausted { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(lines.len(), 6);
        let mut keys = HashSet::new();
        for line in &lines {
            prop_assert!(keys.insert(line.text.to_lowercase()));
            prop_assert!(line.word_count() >= 2);
            prop_assert!(!line.text.is_empty());
            let oracle = brute_force_overlap(&line.token_ids, &corpus);
            prop_assert_eq!(line.overlap_score, oracle);
            prop_assert!(oracle <= cap);
        }
    }
}
