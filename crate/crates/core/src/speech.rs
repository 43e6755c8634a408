//! Spoken-response templates.

use crate::catalog::{Genre, SortKey};
use crate::intent::{IntentLabel, SlotSet};

/// What a handled request amounted to, as far as speech is concerned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Welcome,
    Listed { count: usize },
    Similar { title: String, count: usize },
    MorePage,
    EndOfList,
    NothingToPage,
    SeedNotRecognized,
    SeedWithoutContent { title: String },
    Details { title: String },
    NoDetailsTarget,
    Trailer { title: String, available: bool },
    NotOnDetails,
    Back { to: BackTarget },
    AlreadyHome,
    Goodbye,
    NotUnderstood,
    PersonUnsupported,
    SessionClosed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackTarget {
    Home,
    Results,
    Movie(String),
}

pub const NO_RESULTS: &str = "I couldn't find any movies matching that";

fn join_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => (*one).to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

fn genre_list(genres: impl IntoIterator<Item = Genre>) -> String {
    let spoken: Vec<&str> = genres.into_iter().map(Genre::spoken).collect();
    join_list(&spoken)
}

fn listing(slots: &SlotSet) -> String {
    let sort = match slots.sort {
        Some(SortKey::Popular) => "popular ",
        Some(SortKey::Recent) => "recent ",
        None => "",
    };
    let genres = genre_list(slots.genres.iter().copied());
    let descriptors: Vec<&str> = slots.descriptor_terms.iter().map(String::as_str).collect();
    let descriptors = join_list(&descriptors);
    match (genres.is_empty(), descriptors.is_empty()) {
        (true, false) if sort.is_empty() => {
            format!("Here are some movies that I think are {descriptors}")
        }
        (true, false) => format!("Here are some {sort}movies that I think are {descriptors}"),
        (false, false) => {
            format!("Here are some {sort}{genres} movies that I think are {descriptors}")
        }
        (false, true) => format!("Here are some {sort}{genres} movies"),
        (true, true) if !sort.is_empty() => format!("Here are some {sort}movies"),
        (true, true) => "Here are some movies I think you'll like".to_string(),
    }
}

/// Deterministic template fill for one handled request.
pub fn speech_for(intent: IntentLabel, slots: &SlotSet, outcome: &Outcome) -> String {
    match outcome {
        Outcome::Welcome => {
            "Welcome to MovieLens. Try saying \"show action movies\" or \"what are some popular comedies?\"".into()
        }
        Outcome::Listed { count: 0 } | Outcome::Similar { count: 0, .. } => NO_RESULTS.into(),
        Outcome::Listed { .. } if intent == IntentLabel::FindMovies => listing(slots),
        Outcome::Listed { .. } => "Here are some movies".into(),
        Outcome::Similar { title, .. } => format!("Here are movies like {title}"),
        Outcome::MorePage => "Here are more results".into(),
        Outcome::EndOfList => "That's everything I found".into(),
        Outcome::NothingToPage => {
            "There's nothing to show more of yet. Try saying \"show action movies\"".into()
        }
        Outcome::SeedNotRecognized => "Sorry, I didn't recognize that movie title".into(),
        Outcome::SeedWithoutContent { title } => {
            format!("Sorry, I don't know enough about {title} to find similar movies")
        }
        Outcome::Details { title } => format!("Here is {title}"),
        Outcome::NoDetailsTarget => {
            "Which movie? Say \"tell me about\" and then the title".into()
        }
        Outcome::Trailer { title, available: true } => format!("Playing the trailer for {title}"),
        Outcome::Trailer { title, available: false } => {
            format!("Sorry, I don't have a trailer for {title}")
        }
        Outcome::NotOnDetails => {
            "Open a movie first, then say \"play the trailer\"".into()
        }
        Outcome::Back { to: BackTarget::Home } => "Back to the home screen".into(),
        Outcome::Back { to: BackTarget::Results } => "Back to your results".into(),
        Outcome::Back { to: BackTarget::Movie(title) } => format!("Back to {title}"),
        Outcome::AlreadyHome => "You're already on the home screen".into(),
        Outcome::Goodbye => "Goodbye".into(),
        Outcome::NotUnderstood => {
            "Sorry, I didn't understand that. You can say \"show action movies\" or \"show me more like Pitch Black\"".into()
        }
        Outcome::PersonUnsupported => "Sorry, I can't search by person yet".into(),
        Outcome::SessionClosed => {
            "MovieLens has closed. Say \"Alexa, open MovieLens\" to start again".into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slots() -> SlotSet {
        SlotSet::default()
    }

    #[test]
    fn descriptor_template() {
        let s = SlotSet {
            descriptor_terms: vec!["futuristic".into()],
            ..slots()
        };
        assert_eq!(
            speech_for(IntentLabel::FindMovies, &s, &Outcome::Listed { count: 12 }),
            "Here are some movies that I think are futuristic"
        );
    }

    #[test]
    fn genre_templates() {
        let s = SlotSet {
            genres: [Genre::Action].into(),
            ..slots()
        };
        assert_eq!(
            speech_for(IntentLabel::FindMovies, &s, &Outcome::Listed { count: 5 }),
            "Here are some action movies"
        );
        assert_eq!(
            speech_for(IntentLabel::FindMovies, &s, &Outcome::Listed { count: 0 }),
            "I couldn't find any movies matching that"
        );
        let s = SlotSet {
            genres: [Genre::Comedy, Genre::Romance, Genre::Drama].into(),
            sort: Some(SortKey::Popular),
            ..slots()
        };
        assert_eq!(
            speech_for(IntentLabel::FindMovies, &s, &Outcome::Listed { count: 5 }),
            "Here are some popular comedy, drama and romance movies"
        );
    }

    #[test]
    fn similar_template() {
        let out = Outcome::Similar {
            title: "Pitch Black".into(),
            count: 10,
        };
        assert_eq!(
            speech_for(IntentLabel::SimilarMovies, &slots(), &out),
            "Here are movies like Pitch Black"
        );
    }

    #[test]
    fn paging_and_fallbacks() {
        assert_eq!(speech_for(IntentLabel::MoreResults, &slots(), &Outcome::MorePage), "Here are more results");
        assert_eq!(speech_for(IntentLabel::MoreResults, &slots(), &Outcome::EndOfList), "That's everything I found");
        let help = speech_for(IntentLabel::Unknown, &slots(), &Outcome::NotUnderstood);
        assert!(help.contains("\"show action movies\"") && help.contains("\"show me more like Pitch Black\""));
    }
}
