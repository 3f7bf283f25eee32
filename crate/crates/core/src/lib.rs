//! Synthetic statute generation and statutory-reasoning evaluation for
//! text-completion models.
//!
//! The crate generates balanced definitional statutes with known answers
//! ([`statute`], [`oracle`]), builds prompts and parses answers ([`prompt`]),
//! talks to completion backends with a persistent cache ([`backend`]), runs the
//! SARA entailment harness ([`sara`]) and U.S. Code knowledge probes ([`usc`]),
//! and aggregates results into accuracy tables ([`stats`]).

pub mod rng;
pub mod statute;
pub mod oracle;
pub mod prompt;
pub mod backend;
pub mod eval;
pub mod stats;
pub mod sara;
pub mod usc;
pub mod cli;
