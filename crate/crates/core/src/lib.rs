//! Probabilistic slang word choice.

pub mod error;
pub mod lexicon;

pub use error::{Error, Result};
pub mod embedding;
pub mod contrastive;
pub mod choice;
pub mod priors;
pub mod eval;
pub mod synthetic;
pub mod pipeline;
pub mod config;
pub mod cli;
