//! Collective-judgment aggregation over sparse will matrices.
//!
//! * [`matrix`] and [`io`]: the participant x statement vote matrix and its
//!   JSON Lines files.
//! * [`synthpop`]: seeded synthetic populations with known latent structure.
//! * [`spectral`]: PCA projection, opinion groups, representativeness and
//!   group-informed consensus.
//! * [`factor`]: intercept-plus-rank-one factorization, helpfulness status
//!   and group-minimum bridging.
//! * [`ballots`]: plurality, Borda, Condorcet and Schulze over ranked ballots.
//! * [`slates`]: greedy proportional slates and justified-representation checks.
//! * [`pipeline`]: multi-round deliberation with pluggable generation and
//!   prediction.

pub mod ballots;
pub mod error;
pub mod factor;
pub mod fixtures;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod rng;
pub mod slates;
pub mod spectral;
pub mod synthpop;

pub use error::{AgoraError, Result};
pub use matrix::{DatasetSummary, Participant, Schema, Statement, Vote, WillMatrix};
