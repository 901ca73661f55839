//! Rights-based audit of LLM news-headline generation.
//!
//! Pipeline: load a [`corpus`], generate headlines across models and prompt
//! variants ([`genclient`]), label them ([`annotate`]), embed them
//! ([`embed`]), score partisanship along a learned [`axis`], aggregate
//! [`metrics`], and rate risks per right ([`rights`]).

pub mod annotate;
pub mod axis;
pub mod corpus;
pub mod embed;
pub mod genclient;
pub mod hashing;
pub mod metrics;
pub mod rights;
