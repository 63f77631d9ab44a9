//! Deterministic daily backtesting for crypto assets.
//!
//! The crate is organized around a simple daily loop: load date-aligned
//! market/on-chain/news data ([`dataio`]), compute technical indicators over
//! open prices ([`indicators`]), execute fractional trade actions with
//! proportional fees ([`engine`]), evaluate runs ([`metrics`]), and drive the
//! loop either with classical baseline strategies ([`strategies`]) or with an
//! LLM agent pipeline against a pluggable chat backend ([`agents`]).
//!
//! All classical and mock-backed paths are fully deterministic: identical
//! inputs produce byte-identical run artifacts.

pub mod agents;
pub mod cli;
pub mod dataio;
pub mod engine;
pub mod indicators;
pub mod metrics;
pub mod strategies;
pub mod synth;
