//! Core of the mltv voice-driven movie recommender.
//!
//! Transcribed utterance text goes in through [`intent::parse`], the
//! [`dialogue`] state machine turns the structured request into a view
//! update and speech text, and [`service::Service`] ties sessions, push
//! subscribers and the shared models together for the network gateway and
//! the scripted REPL.

pub mod catalog;
pub mod config;
pub mod dialogue;
pub mod entities;
pub mod error;
pub mod intent;
pub mod protocol;
pub mod recsys;
pub mod service;
pub mod speech;
pub mod text;
pub mod transcript;

pub use error::{Error, Result};
