use std::collections::BTreeSet;

use super::IntentLabel;
use crate::catalog::{Genre, SortKey};
use crate::entities::{Lexicons, TitleMatch};

/// Phrases marking a request that narrows the current results.
pub const REFINEMENT_MARKERS: [&[&str]; 5] = [
    &["of", "those"],
    &["of", "these"],
    &["only", "the"],
    &["just", "the"],
    &["from", "those"],
];

/// A title match this strong is kept even for intents that do not need one.
const CONFIDENT_TITLE: f64 = 0.9;

const PERSON_MARKERS: [&str; 4] = ["with", "starring", "featuring", "actor"];

const FUNCTION_WORDS: [&str; 24] = [
    "a", "an", "the", "and", "or", "of", "in", "on", "to", "for", "from", "with", "me", "some",
    "movies", "movie", "films", "film", "ones", "one", "that", "this", "please", "is",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotSet {
    pub genres: BTreeSet<Genre>,
    pub descriptor_terms: Vec<String>,
    pub title_match: Option<TitleMatch>,
    pub person_span: Option<String>,
    pub sort: Option<SortKey>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
    pub refinement: bool,
}

impl SlotSet {
    pub fn is_empty(&self) -> bool {
        *self == SlotSet::default()
    }
}

fn marker_positions(tokens: &[String]) -> Vec<usize> {
    let mut out = Vec::new();
    for start in 0..tokens.len() {
        for marker in REFINEMENT_MARKERS {
            let end = start + marker.len();
            if end <= tokens.len() && tokens[start..end].iter().zip(marker).all(|(t, m)| t == m) {
                out.extend(start..end);
            }
        }
    }
    out
}

pub fn detect_refinement(tokens: &[String]) -> bool {
    !marker_positions(tokens).is_empty()
}

pub fn extract_slots(lexicons: &Lexicons, tokens: &[String], intent_hint: IntentLabel) -> SlotSet {
    extract(lexicons, tokens, intent_hint).0
}

fn year_token(token: &str) -> Option<i32> {
    if token.len() != 4 || !token.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i32 = token.parse().ok()?;
    (1900..=2099).contains(&year).then_some(year)
}

fn decade_token(token: &str) -> Option<(i32, i32)> {
    let start = match token {
        "twenties" => 1920,
        "thirties" => 1930,
        "forties" => 1940,
        "fifties" => 1950,
        "sixties" => 1960,
        "seventies" => 1970,
        "eighties" => 1980,
        "nineties" => 1990,
        _ => {
            let digits = token.strip_suffix('s')?;
            if !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            match digits.len() {
                2 => {
                    let d: i32 = digits.parse().ok()?;
                    if d % 10 != 0 {
                        return None;
                    }
                    if d >= 20 {
                        1900 + d
                    } else {
                        2000 + d
                    }
                }
                4 => {
                    let d: i32 = digits.parse().ok()?;
                    if d % 10 != 0 || !(1900..=2090).contains(&d) {
                        return None;
                    }
                    d
                }
                _ => return None,
            }
        }
    };
    Some((start, start + 9))
}

/// Slots plus a per-token flag marking tokens accounted for by some slot.
pub(crate) fn extract(
    lexicons: &Lexicons,
    tokens: &[String],
    intent_hint: IntentLabel,
) -> (SlotSet, Vec<bool>) {
    let mut slots = SlotSet::default();
    let mut consumed = vec![false; tokens.len()];
    let mark = |consumed: &mut Vec<bool>, range: std::ops::Range<usize>| {
        consumed[range].iter_mut().for_each(|c| *c = true);
    };

    let matches = lexicons.resolve_title(tokens);
    let wants_title = matches!(
        intent_hint,
        IntentLabel::SimilarMovies | IntentLabel::ShowDetails
    );
    let year_hint = tokens.iter().enumerate().find_map(|(i, t)| {
        let in_span = matches.first().is_some_and(|m| m.span.contains(&i));
        (!in_span).then(|| year_token(t)).flatten()
    });
    if let Some(best) = lexicons.pick_title(&matches, year_hint) {
        if wants_title {
            mark(&mut consumed, best.span.clone());
            slots.title_match = Some(best);
        } else if best.score >= CONFIDENT_TITLE {
            slots.title_match = Some(best);
        }
    }

    for (span, genre) in lexicons.genre_spans(tokens) {
        if consumed[span.clone()].iter().any(|&c| c) {
            continue;
        }
        slots.genres.insert(genre);
        mark(&mut consumed, span);
    }

    for (i, token) in tokens.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        if let Some(key) = lexicons.sort_keyword(token) {
            slots.sort.get_or_insert(key);
            consumed[i] = true;
        }
    }

    for i in 0..tokens.len() {
        if consumed[i] {
            continue;
        }
        let modifier = i.checked_sub(1).map(|p| tokens[p].as_str());
        if let Some(year) = year_token(&tokens[i]) {
            let (lo, hi) = match modifier {
                Some("after") => (Some(year + 1), None),
                Some("since") => (Some(year), None),
                Some("before") => (None, Some(year - 1)),
                _ => (Some(year), Some(year)),
            };
            if lo.is_some() {
                slots.year_min = lo;
            }
            if hi.is_some() {
                slots.year_max = hi;
            }
        } else if let Some((lo, hi)) = decade_token(&tokens[i]) {
            slots.year_min = Some(lo);
            slots.year_max = Some(hi);
        } else {
            continue;
        }
        consumed[i] = true;
        if matches!(modifier, Some("after" | "since" | "before" | "from" | "in")) {
            consumed[i - 1] = true;
        }
    }

    for i in marker_positions(tokens) {
        slots.refinement = true;
        consumed[i] = true;
    }

    for (span, tag) in lexicons.tag_spans(tokens, &consumed) {
        slots.descriptor_terms.push(tag);
        mark(&mut consumed, span);
    }

    for (i, token) in tokens.iter().enumerate() {
        if consumed[i] || !PERSON_MARKERS.contains(&token.as_str()) {
            continue;
        }
        let run: Vec<usize> = (i + 1..tokens.len())
            .take_while(|&j| !consumed[j] && !FUNCTION_WORDS.contains(&tokens[j].as_str()))
            .take(4)
            .collect();
        if let (Some(&first), Some(&last)) = (run.first(), run.last()) {
            slots.person_span = Some(tokens[first..=last].join(" "));
            mark(&mut consumed, i..last + 1);
            break;
        }
    }

    (slots, consumed)
}
