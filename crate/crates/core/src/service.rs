//! Sessions, push subscribers and the shared models behind both the
//! network gateway and the scripted REPL.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{load_catalog, load_sample, Catalog, RatingsMatrix, UserId, UserProfile};
use crate::config::Config;
use crate::dialogue::{handle, open_session, DialogueConfig, Deps, SessionState};
use crate::entities::{parse_genre_synonyms, Lexicons, DEFAULT_GENRE_SYNONYMS};
use crate::error::Result;
use crate::intent::{parse, parse_corpus, IntentModel, StructuredRequest, DEFAULT_CORPUS};
use crate::protocol::{MessageType, RenderMessage, SkillRequest, SkillResponse};
use crate::recsys::{build_item_model, ContentIndex, ItemNeighborhood};

/// Immutable data and models shared by every session.
pub struct Models {
    pub catalog: Catalog,
    pub ratings: RatingsMatrix,
    pub lexicons: Lexicons,
    pub intent: IntentModel,
    pub neighborhood: ItemNeighborhood,
    pub content: ContentIndex,
    pub dialogue: DialogueConfig,
    pub confidence_threshold: f64,
}

impl Models {
    pub fn build(catalog: Catalog, ratings: RatingsMatrix, intent: IntentModel, cfg: &Config) -> Result<Self> {
        let synonyms = parse_genre_synonyms(DEFAULT_GENRE_SYNONYMS)?;
        let lexicons = Lexicons::build(&catalog, synonyms).with_title_threshold(cfg.title_threshold);
        let neighborhood = build_item_model(&ratings, cfg.k, cfg.min_support);
        let content = ContentIndex::build(&catalog);
        Ok(Models {
            catalog,
            ratings,
            lexicons,
            intent,
            neighborhood,
            content,
            dialogue: cfg.dialogue(),
            confidence_threshold: cfg.confidence_threshold,
        })
    }

    /// Loads data and the intent model as the config says, training on the
    /// corpus when no model file is given.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let (catalog, ratings) = match &cfg.data_dir {
            Some(dir) => {
                let tags = dir.join("tags.csv");
                load_catalog(
                    &dir.join("movies.csv"),
                    &dir.join("ratings.csv"),
                    tags.exists().then_some(tags.as_path()),
                )?
            }
            None => load_sample()?,
        };
        let intent = match (&cfg.intent_model, &cfg.corpus) {
            (Some(model), _) => IntentModel::load(model)?,
            (None, corpus) => IntentModel::train(&load_corpus(corpus.as_deref())?)?,
        };
        Models::build(catalog, ratings, intent, cfg)
    }

    pub fn parse(&self, text: &str) -> StructuredRequest {
        parse(&self.intent, &self.lexicons, text, self.confidence_threshold)
    }

    /// Numeric ids map onto rating-matrix users; anything else is a user
    /// with no history.
    pub fn profile(&self, user_id: &str) -> UserProfile {
        match user_id.trim().parse::<u32>() {
            Ok(n) => self.ratings.profile(UserId(n)),
            Err(_) => UserProfile::default(),
        }
    }

    fn deps<'a>(&'a self, profile: &'a UserProfile) -> Deps<'a> {
        Deps {
            catalog: &self.catalog,
            lexicons: &self.lexicons,
            neighborhood: &self.neighborhood,
            content: &self.content,
            profile,
            config: &self.dialogue,
        }
    }
}

pub fn load_corpus(path: Option<&Path>) -> Result<Vec<(String, crate::intent::IntentLabel)>> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| crate::Error::io(p, e))?;
            parse_corpus(&text)
        }
        None => parse_corpus(DEFAULT_CORPUS),
    }
}

/// Source of "now", in whole seconds.
pub trait Clock: Send + Sync {
    fn now(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    }
}

/// Clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: u64) -> Self {
        ManualClock(AtomicU64::new(start))
    }

    pub fn advance(&self, secs: u64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }

    pub fn set(&self, now: u64) {
        self.0.store(now, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PushError {
    #[error("client queue is full")]
    Full,
    #[error("client is gone")]
    Closed,
}

/// A subscriber's outgoing queue. Must never block; a sink that errors is
/// dropped from the session.
pub trait PushSink: Send + Sync {
    fn try_push(&self, message: &RenderMessage) -> Result<(), PushError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subscription {
    pub session_id: String,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubscribeError {
    #[error("no such session")]
    UnknownSession,
    #[error("token does not match session")]
    BadToken,
    #[error("client could not take the snapshot")]
    SnapshotRejected(PushError),
}

struct Session {
    state: SessionState,
    seq: u64,
    last_speech: String,
    last_echo: String,
    subscribers: Vec<(u64, Arc<dyn PushSink>)>,
}

/// `hex(sha256("<secret>:<session_id>"))`.
pub fn session_token(secret: &str, session_id: &str) -> String {
    hex::encode(Sha256::digest(format!("{secret}:{session_id}").as_bytes()))
}

pub struct Service {
    models: Arc<Models>,
    clock: Arc<dyn Clock>,
    token_secret: String,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_subscriber: AtomicU64,
}

impl Service {
    pub fn new(models: Arc<Models>, clock: Arc<dyn Clock>, token_secret: impl Into<String>) -> Self {
        Service {
            models,
            clock,
            token_secret: token_secret.into(),
            sessions: Mutex::new(HashMap::new()),
            next_subscriber: AtomicU64::new(1),
        }
    }

    pub fn models(&self) -> &Models {
        &self.models
    }

    pub fn token_for(&self, session_id: &str) -> String {
        session_token(&self.token_secret, session_id)
    }

    fn session(&self, session_id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().unwrap().get(session_id).cloned()
    }

    /// Parses and applies one utterance, pushes the resulting render
    /// message to the session's subscribers and returns both halves.
    /// Unseen session ids are opened on the spot.
    pub fn handle(&self, session_id: &str, user_id: &str, text: &str) -> (SkillResponse, RenderMessage) {
        let now = self.clock.now();
        let slot = self
            .sessions
            .lock()
            .unwrap()
            .entry(session_id.to_string())
            .or_insert_with(|| {
                Arc::new(Mutex::new(Session {
                    state: open_session(session_id, user_id, now),
                    seq: 0,
                    last_speech: String::new(),
                    last_echo: String::new(),
                    subscribers: Vec::new(),
                }))
            })
            .clone();

        // held through the push so every subscriber sees emission order
        let mut session = slot.lock().unwrap();
        let request = self.models.parse(text);
        let profile = self.models.profile(&session.state.user_id);
        let deps = self.models.deps(&profile);
        let (state, update) = handle(&session.state, &request, &deps, now);
        session.state = state;
        session.seq += 1;
        session.last_speech = update.speech_text.clone();
        session.last_echo = text.trim().to_string();

        let message = RenderMessage {
            kind: MessageType::Render,
            seq: session.seq,
            view: update.view,
            speech_text: update.speech_text.clone(),
            utterance_echo: session.last_echo.clone(),
        };
        session
            .subscribers
            .retain(|(_, sink)| sink.try_push(&message).is_ok());

        let response = SkillResponse {
            speech_text: update.speech_text,
            keep_session_open: session.state.open,
        };
        (response, message)
    }

    pub fn handle_skill_request(&self, request: &SkillRequest) -> SkillResponse {
        self.handle(&request.session_id, &request.user_id, &request.text).0
    }

    /// An utterance typed into a subscribed browser; routed exactly like a
    /// skill request for the session's own user.
    pub fn handle_utterance(&self, session_id: &str, text: &str) -> Option<SkillResponse> {
        let user_id = self.session(session_id)?.lock().unwrap().state.user_id.clone();
        Some(self.handle(session_id, &user_id, text).0)
    }

    /// Registers a push client. It gets a snapshot of the current view,
    /// carrying the current seq, before any later message.
    pub fn subscribe(
        &self,
        session_id: &str,
        token: &str,
        sink: Arc<dyn PushSink>,
    ) -> Result<Subscription, SubscribeError> {
        let slot = self.session(session_id).ok_or(SubscribeError::UnknownSession)?;
        if token != self.token_for(session_id) {
            return Err(SubscribeError::BadToken);
        }
        let mut session = slot.lock().unwrap();
        sink.try_push(&self.snapshot_of(&session))
            .map_err(SubscribeError::SnapshotRejected)?;
        let id = self.next_subscriber.fetch_add(1, Ordering::Relaxed);
        session.subscribers.push((id, sink));
        Ok(Subscription {
            session_id: session_id.to_string(),
            id,
        })
    }

    pub fn unsubscribe(&self, subscription: &Subscription) {
        if let Some(slot) = self.session(&subscription.session_id) {
            slot.lock()
                .unwrap()
                .subscribers
                .retain(|(id, _)| *id != subscription.id);
        }
    }

    fn snapshot_of(&self, session: &Session) -> RenderMessage {
        let profile = self.models.profile(&session.state.user_id);
        RenderMessage {
            kind: MessageType::Render,
            seq: session.seq,
            view: session.state.snapshot(&self.models.deps(&profile)),
            speech_text: session.last_speech.clone(),
            utterance_echo: session.last_echo.clone(),
        }
    }

    pub fn snapshot(&self, session_id: &str) -> Option<RenderMessage> {
        let slot = self.session(session_id)?;
        let session = slot.lock().unwrap();
        Some(self.snapshot_of(&session))
    }

    pub fn session_state(&self, session_id: &str) -> Option<SessionState> {
        Some(self.session(session_id)?.lock().unwrap().state.clone())
    }

    pub fn subscriber_count(&self, session_id: &str) -> usize {
        self.session(session_id)
            .map_or(0, |s| s.lock().unwrap().subscribers.len())
    }
}
