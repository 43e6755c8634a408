//! Per-session dialogue state: the view stack, paging, and the
//! inactivity window.

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, MovieId, QuerySpec, SortOrder, UserProfile};
use crate::entities::Lexicons;
use crate::intent::{IntentLabel, SlotSet, StructuredRequest};
use crate::protocol::{DetailsPayload, ExplorePayload, HomePayload, MovieCard, MovieDetails, View};
use crate::recsys::{rank_topn, ContentIndex, ItemNeighborhood, SimilarityError};
use crate::speech::{speech_for, BackTarget, Outcome};

pub const DEFAULT_PAGE_SIZE: usize = 8;
pub const DEFAULT_SESSION_TIMEOUT_S: u64 = 120;
pub const DEFAULT_MAX_RESULTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueConfig {
    pub page_size: usize,
    pub session_timeout_s: u64,
    /// Cap on the ranked list kept per Explore frame.
    pub max_results: usize,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        DialogueConfig {
            page_size: DEFAULT_PAGE_SIZE,
            session_timeout_s: DEFAULT_SESSION_TIMEOUT_S,
            max_results: DEFAULT_MAX_RESULTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreFrame {
    pub query: QuerySpec,
    pub ranked: Vec<MovieId>,
    pub page_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewFrame {
    Home,
    Explore(ExploreFrame),
    Details { movie: MovieId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    pub session_id: String,
    pub user_id: String,
    pub view_stack: Vec<ViewFrame>,
    /// Seconds on whatever clock the caller uses.
    pub last_activity: u64,
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewUpdate {
    pub view: View,
    pub speech_text: String,
}

/// Shared, read-only inputs to [`handle`].
#[derive(Clone, Copy)]
pub struct Deps<'a> {
    pub catalog: &'a Catalog,
    pub lexicons: &'a Lexicons,
    pub neighborhood: &'a ItemNeighborhood,
    pub content: &'a ContentIndex,
    pub profile: &'a UserProfile,
    pub config: &'a DialogueConfig,
}

pub fn open_session(session_id: &str, user_id: &str, now: u64) -> SessionState {
    SessionState {
        session_id: session_id.to_string(),
        user_id: user_id.to_string(),
        view_stack: vec![ViewFrame::Home],
        last_activity: now,
        open: true,
    }
}

impl SessionState {
    pub fn top(&self) -> &ViewFrame {
        self.view_stack.last().unwrap_or(&ViewFrame::Home)
    }

    /// Marks the session closed once it has been idle for more than
    /// `timeout_s`. Returns whether this call found it expired.
    pub fn check_expiry(&mut self, now: u64, timeout_s: u64) -> bool {
        let expired = now.saturating_sub(self.last_activity) > timeout_s;
        if expired {
            self.open = false;
        }
        expired
    }

    /// Current view without any state change, used for push snapshots.
    pub fn snapshot(&self, deps: &Deps<'_>) -> View {
        render(self.top(), self.open, false, deps)
    }
}

fn render(frame: &ViewFrame, open: bool, trailer: bool, deps: &Deps<'_>) -> View {
    match frame {
        ViewFrame::Home => View::Home(HomePayload::new(open)),
        ViewFrame::Explore(e) => {
            let end = (e.page_offset + deps.config.page_size).min(e.ranked.len());
            let movies = e.ranked[e.page_offset.min(end)..end]
                .iter()
                .filter_map(|id| deps.catalog.get(*id))
                .map(MovieCard::from)
                .collect();
            View::Explore(ExplorePayload {
                movies,
                offset: e.page_offset,
                total: e.ranked.len(),
                page_size: deps.config.page_size,
                seed: e
                    .query
                    .seed_movie
                    .and_then(|id| deps.catalog.get(id))
                    .map(MovieCard::from),
            })
        }
        ViewFrame::Details { movie } => {
            let details = match deps.catalog.get(*movie) {
                Some(m) => MovieDetails::from(m),
                None => MovieDetails {
                    id: *movie,
                    title: String::new(),
                    year: None,
                    genres: Vec::new(),
                    mean_rating: None,
                    tags: Vec::new(),
                    rating_count: 0,
                    trailer_url: None,
                },
            };
            View::Details(DetailsPayload {
                movie: details,
                trailer,
            })
        }
    }
}

fn title_of(deps: &Deps<'_>, id: MovieId) -> String {
    deps.catalog.get(id).map_or_else(|| id.to_string(), |m| m.title.clone())
}

fn query_from_slots(slots: &SlotSet) -> QuerySpec {
    QuerySpec {
        genre_filter: slots.genres.clone(),
        descriptor_terms: slots.descriptor_terms.clone(),
        year_min: slots.year_min,
        year_max: slots.year_max,
        sort: slots.sort.map_or(SortOrder::Personalized, SortOrder::from),
        seed_movie: None,
        person_filter: slots.person_span.clone(),
    }
}

/// Applies one request. Pure: the result depends only on the arguments.
///
/// A closed or expired session only reacts to Home, which reopens it;
/// anything else gets the reopen prompt and leaves the state as is.
pub fn handle(
    state: &SessionState,
    request: &StructuredRequest,
    deps: &Deps<'_>,
    now: u64,
) -> (SessionState, ViewUpdate) {
    let mut next = state.clone();
    let intent = request.intent;
    let slots = &request.slots;

    if !next.open || next.check_expiry(now, deps.config.session_timeout_s) {
        if intent == IntentLabel::Home {
            let fresh = open_session(&state.session_id, &state.user_id, now);
            let view = fresh.snapshot(deps);
            let speech_text = speech_for(intent, slots, &Outcome::Welcome);
            return (fresh, ViewUpdate { view, speech_text });
        }
        next.view_stack = vec![ViewFrame::Home];
        let speech_text = speech_for(intent, slots, &Outcome::SessionClosed);
        let view = next.snapshot(deps);
        return (next, ViewUpdate { view, speech_text });
    }

    next.last_activity = now.max(state.last_activity);
    let mut trailer = false;

    let outcome = match intent {
        IntentLabel::Home => {
            next.view_stack = vec![ViewFrame::Home];
            Outcome::Welcome
        }
        IntentLabel::Stop => {
            next.open = false;
            next.view_stack = vec![ViewFrame::Home];
            Outcome::Goodbye
        }
        IntentLabel::Unknown => Outcome::NotUnderstood,
        IntentLabel::FindMovies => find_movies(&mut next, slots, deps),
        IntentLabel::SimilarMovies => similar_movies(&mut next, slots, deps),
        IntentLabel::MoreResults => match next.view_stack.last_mut() {
            Some(ViewFrame::Explore(e)) => {
                let advanced = e.page_offset + deps.config.page_size;
                if advanced < e.ranked.len() {
                    e.page_offset = advanced;
                    Outcome::MorePage
                } else {
                    Outcome::EndOfList
                }
            }
            _ => Outcome::NothingToPage,
        },
        IntentLabel::ShowDetails => {
            let target = slots.title_match.as_ref().map(|t| t.movie_id).or_else(|| {
                match next.top() {
                    ViewFrame::Explore(e) => {
                        let end = (e.page_offset + deps.config.page_size).min(e.ranked.len());
                        match &e.ranked[e.page_offset.min(end)..end] {
                            [only] => Some(*only),
                            _ => None,
                        }
                    }
                    ViewFrame::Details { movie } => Some(*movie),
                    ViewFrame::Home => None,
                }
            });
            match target {
                Some(movie) => {
                    // asking again for the movie already shown does not stack it twice
                    if next.top() != &(ViewFrame::Details { movie }) {
                        next.view_stack.push(ViewFrame::Details { movie });
                    }
                    Outcome::Details {
                        title: title_of(deps, movie),
                    }
                }
                None => Outcome::NoDetailsTarget,
            }
        }
        IntentLabel::PlayTrailer => match next.top() {
            ViewFrame::Details { movie } => {
                let movie = *movie;
                trailer = true;
                Outcome::Trailer {
                    title: title_of(deps, movie),
                    available: false,
                }
            }
            _ => Outcome::NotOnDetails,
        },
        IntentLabel::GoBack => {
            if next.view_stack.len() > 1 {
                next.view_stack.pop();
                Outcome::Back {
                    to: match next.top() {
                        ViewFrame::Home => BackTarget::Home,
                        ViewFrame::Explore(_) => BackTarget::Results,
                        ViewFrame::Details { movie } => BackTarget::Movie(title_of(deps, *movie)),
                    },
                }
            } else {
                Outcome::AlreadyHome
            }
        }
    };

    // refinements are spoken with the merged constraints
    let spoken_slots;
    let speech_slots = match (intent, next.top()) {
        (IntentLabel::FindMovies, ViewFrame::Explore(e)) if slots.refinement => {
            spoken_slots = SlotSet {
                genres: e.query.genre_filter.clone(),
                descriptor_terms: e.query.descriptor_terms.clone(),
                sort: e.query.sort.key(),
                ..slots.clone()
            };
            &spoken_slots
        }
        _ => slots,
    };
    let speech_text = speech_for(intent, speech_slots, &outcome);
    let view = render(next.top(), next.open, trailer, deps);
    (next, ViewUpdate { view, speech_text })
}

fn find_movies(state: &mut SessionState, slots: &SlotSet, deps: &Deps<'_>) -> Outcome {
    let person_only = slots.person_span.is_some()
        && slots.genres.is_empty()
        && slots.descriptor_terms.is_empty()
        && slots.year_min.is_none()
        && slots.year_max.is_none()
        && slots.sort.is_none();
    if person_only {
        return Outcome::PersonUnsupported;
    }

    let synonyms = deps.lexicons.genre_synonyms();
    let frame = match state.top() {
        ViewFrame::Explore(prev) if slots.refinement => {
            let narrow = query_from_slots(slots);
            let keep: std::collections::BTreeSet<MovieId> = deps
                .catalog
                .filter_candidates(&narrow, synonyms)
                .into_iter()
                .collect();
            let mut ranked: Vec<MovieId> =
                prev.ranked.iter().copied().filter(|id| keep.contains(id)).collect();
            let mut query = prev.query.clone();
            query.genre_filter.extend(narrow.genre_filter.iter().copied());
            for term in &narrow.descriptor_terms {
                if !query.descriptor_terms.contains(term) {
                    query.descriptor_terms.push(term.clone());
                }
            }
            query.year_min = query.year_min.max(narrow.year_min);
            query.year_max = match (query.year_max, narrow.year_max) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if let Some(key) = slots.sort {
                ranked = deps.catalog.order_by(&ranked, key);
                query.sort = key.into();
            }
            ExploreFrame {
                query,
                ranked,
                page_offset: 0,
            }
        }
        _ => {
            let query = query_from_slots(slots);
            let candidates = deps.catalog.filter_candidates(&query, synonyms);
            let ranked = rank_topn(
                deps.profile,
                &candidates,
                &query,
                deps.neighborhood,
                deps.catalog,
                deps.config.max_results,
            );
            ExploreFrame {
                query,
                ranked,
                page_offset: 0,
            }
        }
    };
    let count = frame.ranked.len();
    state.view_stack.push(ViewFrame::Explore(frame));
    Outcome::Listed { count }
}

fn similar_movies(state: &mut SessionState, slots: &SlotSet, deps: &Deps<'_>) -> Outcome {
    let Some(seed) = slots.title_match.as_ref().map(|t| t.movie_id) else {
        return Outcome::SeedNotRecognized;
    };
    let mut query = query_from_slots(slots);
    query.seed_movie = Some(seed);
    let candidates = deps
        .catalog
        .filter_candidates(&query, deps.lexicons.genre_synonyms());
    match deps
        .content
        .similar_items(seed, &candidates, deps.catalog, deps.config.max_results)
    {
        Ok(scored) => {
            let ranked: Vec<MovieId> = scored.into_iter().map(|(id, _)| id).collect();
            let count = ranked.len();
            state.view_stack.push(ViewFrame::Explore(ExploreFrame {
                query,
                ranked,
                page_offset: 0,
            }));
            Outcome::Similar {
                title: title_of(deps, seed),
                count,
            }
        }
        Err(SimilarityError::SeedWithoutContent(_)) => Outcome::SeedWithoutContent {
            title: title_of(deps, seed),
        },
        Err(SimilarityError::UnknownSeed(_)) => Outcome::SeedNotRecognized,
    }
}
