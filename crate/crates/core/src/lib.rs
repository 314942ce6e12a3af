//! Harness for reasoning-augmented code translation.
//!
//! The crate covers everything around a translation model except training:
//!
//! - [`corpus`]: source programs, test suites and reasoning triplets, plus
//!   quality/leakage filtering and JSONL persistence.
//! - [`prompt_kit`]: prompt rendering and completion parsing.
//! - [`gateway`]: chat-completion client with token/latency accounting and a
//!   scripted offline mock.
//! - [`sandbox`]: multi-language (Python, Java, C++) driver generation and
//!   sandboxed test execution.
//! - [`reward`]: execution and length rewards, and the HTTP reward service.
//! - [`metrics`]: CA, APR, CodeBLEU, token and latency aggregates.
//! - [`synthesis`], [`agent`], [`eval`]: the pipelines built on top.

pub mod agent;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod gateway;
pub mod lang;
pub mod metrics;
pub mod prompt_kit;
pub mod report;
pub mod reward;
pub mod sandbox;
pub mod synthesis;

pub use error::{Error, Result};
pub use lang::{LanguageId, LanguagePair};
