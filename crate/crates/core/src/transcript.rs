//! Scripted dialogues: one utterance per line, `@sleep <seconds>` to move
//! the simulated clock, `#` comments. Output is a plain-text transcript.

use std::fmt::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::protocol::{RenderMessage, SkillResponse, View};
use crate::service::{ManualClock, Models, Service};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptStep {
    Say(String),
    Sleep(u64),
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.strip_prefix('@') {
            Some(directive) => {
                let mut parts = directive.split_whitespace();
                let secs = match (parts.next(), parts.next(), parts.next()) {
                    (Some("sleep"), Some(n), None) => n.parse().ok(),
                    _ => None,
                };
                let secs = secs.ok_or_else(|| Error::Malformed {
                    file: "script".into(),
                    line: i as u64 + 1,
                    message: format!("expected `@sleep <seconds>`, got {line:?}"),
                })?;
                steps.push(ScriptStep::Sleep(secs));
            }
            None => steps.push(ScriptStep::Say(line.to_string())),
        }
    }
    Ok(steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub utterance: String,
    pub response: SkillResponse,
    pub message: RenderMessage,
}

/// Runs every step against one session. Sleeps only move `clock`.
pub fn run_script(
    service: &Service,
    clock: &ManualClock,
    steps: &[ScriptStep],
    session_id: &str,
    user_id: &str,
) -> Vec<Turn> {
    let mut turns = Vec::new();
    for step in steps {
        match step {
            ScriptStep::Sleep(secs) => clock.advance(*secs),
            ScriptStep::Say(text) => {
                let (response, message) = service.handle(session_id, user_id, text);
                turns.push(Turn {
                    utterance: text.clone(),
                    response,
                    message,
                });
            }
        }
    }
    turns
}

/// Session and user the scripted REPL talks as.
pub const REPL_SESSION: &str = "repl";
pub const REPL_USER: &str = "1";

/// Runs a whole script on a fresh service with a simulated clock starting
/// at zero. Same inputs, same transcript.
pub fn run_script_text(models: Arc<Models>, script: &str) -> Result<Vec<Turn>> {
    let steps = parse_script(script)?;
    let clock = Arc::new(ManualClock::new(0));
    let service = Service::new(models, clock.clone(), "repl");
    Ok(run_script(&service, &clock, &steps, REPL_SESSION, REPL_USER))
}

fn year(y: Option<i32>) -> String {
    y.map_or_else(String::new, |y| format!(" ({y})"))
}

fn rating(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |r| format!("{r:.2}"))
}

fn genres(g: &[crate::catalog::Genre]) -> String {
    if g.is_empty() {
        return "-".into();
    }
    g.iter().map(|g| g.label()).collect::<Vec<_>>().join("|")
}

/// Plain-text rendering of one pushed view.
pub fn render_view(message: &RenderMessage) -> String {
    let mut out = String::new();
    match &message.view {
        View::Home(p) => {
            let state = if p.session_open { "open" } else { "closed" };
            let _ = writeln!(out, "[home #{}] session {state}", message.seq);
            for e in &p.examples {
                let _ = writeln!(out, "  try: \"{e}\"");
            }
        }
        View::Explore(p) => {
            let shown = if p.movies.is_empty() {
                format!("0 of {}", p.total)
            } else {
                format!("{}-{} of {}", p.offset + 1, p.offset + p.movies.len(), p.total)
            };
            let _ = write!(out, "[explore #{}] {shown}", message.seq);
            if let Some(seed) = &p.seed {
                let _ = write!(out, ", like {}{}", seed.title, year(seed.year));
            }
            out.push('\n');
            for (i, card) in p.movies.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {:>3}. {}{} | {} | {}",
                    p.offset + i + 1,
                    card.title,
                    year(card.year),
                    genres(&card.genres),
                    rating(card.mean_rating)
                );
            }
        }
        View::Details(p) => {
            let m = &p.movie;
            let _ = writeln!(out, "[details #{}] {}{}", message.seq, m.title, year(m.year));
            let _ = writeln!(out, "  genres: {}", genres(&m.genres));
            let _ = writeln!(
                out,
                "  rating: {} from {} ratings",
                rating(m.mean_rating),
                m.rating_count
            );
            if !m.tags.is_empty() {
                let _ = writeln!(out, "  tags: {}", m.tags.join(", "));
            }
            if p.trailer {
                let status = m.trailer_url.as_deref().unwrap_or("no trailer available");
                let _ = writeln!(out, "  trailer: {status}");
            }
        }
    }
    out
}

pub fn format_transcript(turns: &[Turn]) -> String {
    let mut out = String::new();
    for turn in turns {
        let _ = writeln!(out, "> {}", turn.utterance);
        let _ = writeln!(out, "< {}", turn.response.speech_text);
        out.push_str(&render_view(&turn.message));
    }
    out
}
