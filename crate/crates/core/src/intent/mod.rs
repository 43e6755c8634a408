//! Utterance text to structured request: wake-phrase stripping, intent
//! classification, and slot extraction.

mod corpus;
mod model;
mod slots;

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use corpus::{evaluate, parse_corpus, split_corpus, EvalReport, LabeledUtterance, DEFAULT_CORPUS};
pub use model::{features, IntentModel, DEFAULT_CONFIDENCE_THRESHOLD, SMOOTHING};
pub use slots::{detect_refinement, extract_slots, SlotSet, REFINEMENT_MARKERS};

use crate::entities::Lexicons;
use crate::text::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntentLabel {
    FindMovies,
    SimilarMovies,
    MoreResults,
    ShowDetails,
    PlayTrailer,
    GoBack,
    Home,
    Stop,
    /// Fallback for low-confidence or empty parses; never trained.
    Unknown,
}

impl IntentLabel {
    pub const ALL: [IntentLabel; 9] = [
        IntentLabel::FindMovies,
        IntentLabel::SimilarMovies,
        IntentLabel::MoreResults,
        IntentLabel::ShowDetails,
        IntentLabel::PlayTrailer,
        IntentLabel::GoBack,
        IntentLabel::Home,
        IntentLabel::Stop,
        IntentLabel::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntentLabel::FindMovies => "FindMovies",
            IntentLabel::SimilarMovies => "SimilarMovies",
            IntentLabel::MoreResults => "MoreResults",
            IntentLabel::ShowDetails => "ShowDetails",
            IntentLabel::PlayTrailer => "PlayTrailer",
            IntentLabel::GoBack => "GoBack",
            IntentLabel::Home => "Home",
            IntentLabel::Stop => "Stop",
            IntentLabel::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntentLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown intent label {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredRequest {
    pub intent: IntentLabel,
    pub slots: SlotSet,
    pub confidence: f64,
    pub raw_text: String,
}

impl StructuredRequest {
    pub fn new(intent: IntentLabel, slots: SlotSet) -> Self {
        StructuredRequest {
            intent,
            slots,
            confidence: 1.0,
            raw_text: String::new(),
        }
    }
}

static WAKE_WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^alexa\b[\s,.!:;]*").unwrap());
static SKILL_INVOCATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:(?:ask|tell)\s+movie\s?lens\s+to|open\s+movie\s?lens)\b[\s,.!:;]*")
        .unwrap()
});

/// Removes a leading activation word and skill invocation phrase
/// ("Alexa, ask MovieLens to ..."). Applied to a fixed point, so it is
/// idempotent.
pub fn strip_wake_prefix(text: &str) -> String {
    let mut current = text.trim().to_string();
    loop {
        let mut next = WAKE_WORD.replace(&current, "").into_owned();
        next = SKILL_INVOCATION.replace(&next, "").trim().to_string();
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Under this share of recognized tokens an utterance is treated as out of
/// domain, whatever the classifier posterior says.
pub const MIN_TOKEN_COVERAGE: f64 = 0.5;

/// Full text-to-request pipeline.
pub fn parse(
    model: &IntentModel,
    lexicons: &Lexicons,
    raw_text: &str,
    threshold: f64,
) -> StructuredRequest {
    let stripped = strip_wake_prefix(raw_text);
    let tokens = normalize(&stripped);
    if tokens.is_empty() {
        return StructuredRequest {
            intent: IntentLabel::Home,
            slots: SlotSet::default(),
            confidence: 1.0,
            raw_text: raw_text.to_string(),
        };
    }

    let (mut intent, mut confidence) = model.classify_tokens(&tokens, threshold);
    let (slots, consumed) = slots::extract(lexicons, &tokens, intent);

    let covered = tokens
        .iter()
        .zip(&consumed)
        .filter(|(t, &c)| c || model.knows(t))
        .count();
    let coverage = covered as f64 / tokens.len() as f64;
    if coverage < MIN_TOKEN_COVERAGE {
        intent = IntentLabel::Unknown;
        confidence *= coverage;
    }

    StructuredRequest {
        intent,
        slots,
        confidence,
        raw_text: raw_text.to_string(),
    }
}
