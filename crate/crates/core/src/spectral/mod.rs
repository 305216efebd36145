//! Opinion-space analysis of a ternary will matrix: principal-component
//! projection, k-means opinion groups chosen by silhouette, per-group
//! representativeness and group-informed consensus.

mod cluster;
mod pca;
mod repness;

pub use cluster::{cluster, kmeans, silhouette, KScore, OpinionGroups};
pub use pca::{reduce, Impute, Projection};
pub use repness::{
    group_informed_consensus, repness, smoothed_probability, ConsensusEntry, ConsensusReport, Orientation,
    RepnessOptions, RepnessReport, VoteValue,
};
