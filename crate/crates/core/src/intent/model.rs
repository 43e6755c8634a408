//! Multinomial naive Bayes over unigram and bigram features.
//!
//! The model stores raw counts; log probabilities are derived on load, so
//! the serialized form round-trips byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{strip_wake_prefix, IntentLabel};
use crate::error::{Error, Result};
use crate::text::normalize;

pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.5;
pub const SMOOTHING: f64 = 1.0;

const FORMAT: &str = "mltv-intent-model";
const VERSION: u32 = 1;

/// Unigrams followed by space-joined bigrams.
pub fn features(tokens: &[String]) -> Vec<String> {
    let mut out: Vec<String> = tokens.to_vec();
    out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassCounts {
    label: IntentLabel,
    documents: u32,
    feature_counts: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    alpha: f64,
    vocabulary: BTreeSet<String>,
    classes: Vec<ClassCounts>,
}

#[derive(Debug, Clone)]
pub struct IntentModel {
    alpha: f64,
    vocabulary: BTreeSet<String>,
    classes: Vec<ClassCounts>,
    log_priors: Vec<f64>,
    /// Per class: feature -> ln P(feature | class).
    log_likelihoods: Vec<BTreeMap<String, f64>>,
}

impl PartialEq for IntentModel {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha
            && self.vocabulary == other.vocabulary
            && self.classes == other.classes
    }
}

impl IntentModel {
    /// Trains on `(utterance, label)` pairs. The result does not depend on
    /// corpus order.
    pub fn train<S: AsRef<str>>(corpus: &[(S, IntentLabel)]) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut by_label: BTreeMap<IntentLabel, ClassCounts> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        for (i, (text, label)) in corpus.iter().enumerate() {
            if *label == IntentLabel::Unknown {
                return Err(Error::UnknownLabelInCorpus { line: i + 1 });
            }
            let class = by_label.entry(*label).or_insert_with(|| ClassCounts {
                label: *label,
                documents: 0,
                feature_counts: BTreeMap::new(),
            });
            class.documents += 1;
            let tokens = normalize(&strip_wake_prefix(text.as_ref()));
            for f in features(&tokens) {
                *class.feature_counts.entry(f.clone()).or_default() += 1;
                vocabulary.insert(f);
            }
        }
        Ok(Self::from_counts(SMOOTHING, vocabulary, by_label.into_values().collect()))
    }

    fn from_counts(alpha: f64, vocabulary: BTreeSet<String>, classes: Vec<ClassCounts>) -> Self {
        let total_docs: u32 = classes.iter().map(|c| c.documents).sum();
        let v = vocabulary.len() as f64;
        let log_priors = classes
            .iter()
            .map(|c| (f64::from(c.documents) / f64::from(total_docs)).ln())
            .collect();
        let log_likelihoods = classes
            .iter()
            .map(|c| {
                let total: u64 = c.feature_counts.values().map(|&n| u64::from(n)).sum();
                let denom = total as f64 + alpha * v;
                vocabulary
                    .iter()
                    .map(|f| {
                        let n = c.feature_counts.get(f).copied().unwrap_or(0);
                        (f.clone(), ((f64::from(n) + alpha) / denom).ln())
                    })
                    .collect()
            })
            .collect();
        IntentModel {
            alpha,
            vocabulary,
            classes,
            log_priors,
            log_likelihoods,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = IntentLabel> + '_ {
        self.classes.iter().map(|c| c.label)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn knows(&self, token: &str) -> bool {
        self.vocabulary.contains(token)
    }

    /// `P(feature | class)` for every vocabulary feature of `label`.
    pub fn likelihoods(&self, label: IntentLabel) -> Option<BTreeMap<&str, f64>> {
        let i = self.classes.iter().position(|c| c.label == label)?;
        Some(
            self.log_likelihoods[i]
                .iter()
                .map(|(f, lp)| (f.as_str(), lp.exp()))
                .collect(),
        )
    }

    /// Normalized class posteriors for already-normalized tokens. Features
    /// outside the vocabulary are ignored.
    pub fn posteriors(&self, tokens: &[String]) -> Vec<(IntentLabel, f64)> {
        let feats = features(tokens);
        let scores: Vec<f64> = self
            .log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(prior, ll)| prior + feats.iter().filter_map(|f| ll.get(f)).sum::<f64>())
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        self.classes
            .iter()
            .zip(exp)
            .map(|(c, e)| (c.label, e / z))
            .collect()
    }

    pub fn classify(&self, text: &str) -> (IntentLabel, f64) {
        self.classify_with_threshold(text, DEFAULT_CONFIDENCE_THRESHOLD)
    }

    pub fn classify_with_threshold(&self, text: &str, threshold: f64) -> (IntentLabel, f64) {
        self.classify_tokens(&normalize(text), threshold)
    }

    /// Argmax class and its posterior; `Unknown` when the posterior is under
    /// `threshold` or there are no tokens. Ties go to the lower label.
    pub fn classify_tokens(&self, tokens: &[String], threshold: f64) -> (IntentLabel, f64) {
        if tokens.is_empty() {
            return (IntentLabel::Unknown, 0.0);
        }
        let (label, confidence) = self
            .posteriors(tokens)
            .into_iter()
            .fold((IntentLabel::Unknown, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        if confidence < threshold {
            (IntentLabel::Unknown, confidence)
        } else {
            (label, confidence)
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            alpha: self.alpha,
            vocabulary: self.vocabulary.clone(),
            classes: self.classes.clone(),
        };
        let mut out = serde_json::to_vec_pretty(&file).expect("model serializes");
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_slice(bytes).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::Model(format!("unexpected format {:?}", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::Model(format!("unsupported version {}", file.version)));
        }
        if file.classes.is_empty() {
            return Err(Error::Model("no classes".into()));
        }
        for c in &file.classes {
            if let Some(f) = c.feature_counts.keys().find(|f| !file.vocabulary.contains(*f)) {
                return Err(Error::Model(format!("feature {f:?} missing from vocabulary")));
            }
        }
        Ok(Self::from_counts(file.alpha, file.vocabulary, file.classes))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
