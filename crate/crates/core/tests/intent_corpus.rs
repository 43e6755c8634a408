mod support;

use mltv_core::intent::{evaluate, parse_corpus, split_corpus, strip_wake_prefix, IntentLabel, IntentModel, DEFAULT_CORPUS};
use mltv_core::text::normalize;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::sample_models;

fn corpus() -> Vec<(String, IntentLabel)> {
    parse_corpus(DEFAULT_CORPUS).unwrap()
}

#[test]
fn every_training_utterance_parses_to_its_label() {
    let models = sample_models();
    let misses: Vec<_> = corpus()
        .into_iter()
        .filter(|(text, label)| models.parse(text).intent != *label)
        .collect();
    assert!(misses.is_empty(), "{misses:?}");
}

#[test]
fn held_out_accuracy_is_frozen() {
    let (train, test) = split_corpus(&corpus(), 42);
    assert_eq!((train.len(), test.len()), (218, 54));
    let model = IntentModel::train(&train).unwrap();
    let report = evaluate(&model, &test, 0.5);
    assert_eq!((report.correct, report.total), (52, 54));
    assert!(report.accuracy() >= 0.90);
}

#[test]
fn split_is_stratified_and_disjoint() {
    let all = corpus();
    let (train, test) = split_corpus(&all, 42);
    assert_eq!(train.len() + test.len(), all.len());
    for label in IntentLabel::ALL {
        let n = all.iter().filter(|(_, l)| *l == label).count();
        let held = test.iter().filter(|(_, l)| *l == label).count();
        assert_eq!(held, (n as f64 * 0.2).round() as usize, "{label:?}");
    }
    assert_ne!(split_corpus(&all, 7).1, test);
}

// Three documents; posteriors worked out as exact fractions by hand.
//   FindMovies: "show action", "show comedy"   MoreResults: "show more"
//   vocabulary of 7 unigram+bigram features, alpha = 1
#[test]
fn hand_computed_posteriors() {
    let model = IntentModel::train(&[
        ("show action", IntentLabel::FindMovies),
        ("show comedy", IntentLabel::FindMovies),
        ("show more", IntentLabel::MoreResults),
    ])
    .unwrap();
    assert_eq!(model.vocabulary().len(), 7);
    let post = |text: &str, label| {
        model.posteriors(&normalize(text)).into_iter().find(|(l, _)| *l == label).unwrap().1
    };
    assert!((post("show more", IntentLabel::MoreResults) - 2197.0 / 2947.0).abs() < 1e-12);
    assert!((post("action", IntentLabel::FindMovies) - 40.0 / 53.0).abs() < 1e-12);
    // "more comedy" is an unseen bigram and is ignored
    assert!((post("more comedy", IntentLabel::FindMovies) - 600.0 / 1107.0).abs() < 1e-12);
}

#[test]
fn training_ignores_corpus_order() {
    let mut shuffled = corpus();
    let reference = IntentModel::train(&shuffled).unwrap().to_bytes();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        shuffled.shuffle(&mut rng);
        assert_eq!(IntentModel::train(&shuffled).unwrap().to_bytes(), reference);
    }
}

#[test]
fn likelihoods_are_distributions() {
    let model = IntentModel::train(&corpus()).unwrap();
    for label in model.labels().collect::<Vec<_>>() {
        let total: f64 = model.likelihoods(label).unwrap().values().sum();
        assert!((total - 1.0).abs() < 1e-9, "{label:?}: {total}");
    }
    assert!(model.likelihoods(IntentLabel::Unknown).is_none());
}

#[test]
fn model_file_round_trip_is_exact() {
    let model = IntentModel::train(&corpus()).unwrap();
    let bytes = model.to_bytes();
    let back = IntentModel::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes(), bytes);
    for (text, _) in corpus().iter().take(40) {
        let tokens = normalize(text);
        let a: Vec<u64> = model.posteriors(&tokens).iter().map(|(_, p)| p.to_bits()).collect();
        let b: Vec<u64> = back.posteriors(&tokens).iter().map(|(_, p)| p.to_bits()).collect();
        assert_eq!(a, b, "{text}");
    }
}

proptest! {
    #[test]
    fn posteriors_sum_to_one(words in proptest::collection::vec("(show|more|back|trailer|stop|home|action|like|zzz|[a-z]{1,6})", 1..8)) {
        let models = sample_models();
        let post = models.intent.posteriors(&words);
        let total: f64 = post.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(post.iter().all(|(_, p)| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn wake_prefix_stripping_is_idempotent(text in "((alexa|Alexa,|ask movielens to|open MovieLens|tell movie lens to) ){0,3}[a-z ,.!]{0,30}") {
        let once = strip_wake_prefix(&text);
        prop_assert_eq!(strip_wake_prefix(&once), once);
    }
}
