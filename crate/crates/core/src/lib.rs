//! CoLT team rating and the ACE adaptive ensemble for Codenames, with a
//! rules engine, embedding-based base agents and an experiment harness.

pub mod agents;
pub mod colt;
pub mod embeddings;
pub mod ensemble;
pub mod error;
pub mod game;
pub mod harness;
pub mod outcome;
pub mod rng;
pub mod sim;
pub mod synthetic;
pub mod training;

pub use colt::{ColtWeights, Provenance};
pub use embeddings::{cosine_distance, EmbeddingModel};
pub use error::{Error, Result};
pub use outcome::{
    counts_to_distribution, outcome_index, Adverse, OutcomeCounts, OutcomeDistribution,
    OutcomeIndex, TurnOutcome,
};
