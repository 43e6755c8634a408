//! JSON wire types: the skill request/response pair and the render
//! messages pushed to browser clients.

use serde::{Deserialize, Serialize};

use crate::catalog::{Genre, Movie, MovieId};

/// Example queries shown on the home screen.
pub const HOME_EXAMPLES: [&str; 4] = [
    "show action movies",
    "show me more like Pitch Black",
    "what are some popular comedies?",
    "I'm looking for futuristic movies",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillRequest {
    pub session_id: String,
    pub user_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillResponse {
    pub speech_text: String,
    pub keep_session_open: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieCard {
    pub id: MovieId,
    pub title: String,
    pub year: Option<i32>,
    pub genres: Vec<Genre>,
    pub mean_rating: Option<f64>,
}

impl From<&Movie> for MovieCard {
    fn from(m: &Movie) -> Self {
        MovieCard {
            id: m.id,
            title: m.title.clone(),
            year: m.year,
            genres: m.genres.iter().copied().collect(),
            mean_rating: m.mean_rating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieDetails {
    pub id: MovieId,
    pub title: String,
    pub year: Option<i32>,
    pub genres: Vec<Genre>,
    pub mean_rating: Option<f64>,
    pub tags: Vec<String>,
    pub rating_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trailer_url: Option<String>,
}

impl From<&Movie> for MovieDetails {
    fn from(m: &Movie) -> Self {
        // most-applied tags first
        let mut tags: Vec<(&String, &u32)> = m.tags.iter().collect();
        tags.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        MovieDetails {
            id: m.id,
            title: m.title.clone(),
            year: m.year,
            genres: m.genres.iter().copied().collect(),
            mean_rating: m.mean_rating,
            tags: tags.into_iter().map(|(t, _)| t.clone()).collect(),
            rating_count: m.rating_count,
            trailer_url: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomePayload {
    pub examples: Vec<String>,
    pub session_open: bool,
}

impl HomePayload {
    pub fn new(session_open: bool) -> Self {
        HomePayload {
            examples: HOME_EXAMPLES.iter().map(|s| s.to_string()).collect(),
            session_open,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorePayload {
    pub movies: Vec<MovieCard>,
    /// Index of the first card within the full result list.
    pub offset: usize,
    pub total: usize,
    pub page_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<MovieCard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailsPayload {
    pub movie: MovieDetails,
    /// Set when the user asked to play the trailer.
    pub trailer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "view", content = "payload", rename_all = "lowercase")]
pub enum View {
    Home(HomePayload),
    Explore(ExplorePayload),
    Details(DetailsPayload),
}

impl View {
    pub fn kind(&self) -> &'static str {
        match self {
            View::Home(_) => "home",
            View::Explore(_) => "explore",
            View::Details(_) => "details",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageType {
    Render,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    pub seq: u64,
    #[serde(flatten)]
    pub view: View,
    pub speech_text: String,
    pub utterance_echo: String,
}

impl RenderMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("render message serializes")
    }
}

/// Messages a browser client may send over the push channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Utterance { text: String },
}
