use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{IntentLabel, IntentModel};
use crate::error::{Error, Result};

/// The bundled labeled utterance fixture.
pub const DEFAULT_CORPUS: &str = include_str!("../../data/intents.tsv");

pub type LabeledUtterance = (String, IntentLabel);

/// Parses `label<TAB>utterance` lines; `#` comments and blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<LabeledUtterance>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            file: "corpus".into(),
            line: i as u64 + 1,
            message,
        };
        let (label, utterance) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected label<TAB>utterance".into()))?;
        let label: IntentLabel = label.trim().parse().map_err(malformed)?;
        out.push((utterance.trim().to_string(), label));
    }
    Ok(out)
}

/// Stratified 80/20 split: each label's utterances are shuffled with one
/// seeded generator (labels visited in order) and a fifth, rounded, is held out.
pub fn split_corpus(
    corpus: &[LabeledUtterance],
    seed: u64,
) -> (Vec<LabeledUtterance>, Vec<LabeledUtterance>) {
    let mut by_label: BTreeMap<IntentLabel, Vec<&LabeledUtterance>> = BTreeMap::new();
    for item in corpus {
        by_label.entry(item.1).or_default().push(item);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for items in by_label.values_mut() {
        items.shuffle(&mut rng);
        let held_out = (items.len() as f64 * 0.2).round() as usize;
        let held_out = held_out.min(items.len().saturating_sub(1));
        test.extend(items[..held_out].iter().map(|&i| i.clone()));
        train.extend(items[held_out..].iter().map(|&i| i.clone()));
    }
    (train, test)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    /// (expected, predicted) -> count
    pub confusion: BTreeMap<(IntentLabel, IntentLabel), usize>,
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            return 1.0;
        }
        self.correct as f64 / self.total as f64
    }
}

pub fn evaluate(model: &IntentModel, test: &[LabeledUtterance], threshold: f64) -> EvalReport {
    let mut report = EvalReport {
        total: 0,
        correct: 0,
        confusion: BTreeMap::new(),
    };
    for (text, expected) in test {
        let (predicted, _) = model.classify_with_threshold(&super::strip_wake_prefix(text), threshold);
        report.total += 1;
        if predicted == *expected {
            report.correct += 1;
        }
        *report.confusion.entry((*expected, predicted)).or_default() += 1;
    }
    report
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "accuracy: {:.4} ({}/{})",
            self.accuracy(),
            self.correct,
            self.total
        )?;
        let labels: Vec<IntentLabel> = IntentLabel::ALL
            .into_iter()
            .filter(|l| self.confusion.keys().any(|(e, p)| e == l || p == l))
            .collect();
        let width = labels.iter().map(|l| l.name().len()).max().unwrap_or(8).max(8);
        write!(f, "{:width$}", "expected\\predicted")?;
        for l in &labels {
            write!(f, " {:>5}", &l.name()[..5.min(l.name().len())])?;
        }
        writeln!(f)?;
        for e in &labels {
            write!(f, "{:width$}", e.name())?;
            for p in &labels {
                let n = self.confusion.get(&(*e, *p)).copied().unwrap_or(0);
                write!(f, " {n:>5}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
