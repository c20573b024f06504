//! Clustering of quantitative and qualitative variables.
//!
//! Variables are grouped so that each cluster is well summarized by one quantitative
//! synthetic variable, the first principal component of PCAMIX on the cluster. The link
//! between a variable and a synthetic variable is the squared correlation (quantitative)
//! or the correlation ratio (qualitative); a cluster's homogeneity is the sum of these
//! links, which equals the first PCAMIX eigenvalue.
//!
//! - [`hierarchy::hclustvar`] builds the agglomerative hierarchy and [`hierarchy::cut`]
//!   extracts a partition from it.
//! - [`kmeans::kmeansvar`] runs the k-means type relocation algorithm.
//! - [`stability::bootstrap_stability`] scores the nested partitions on bootstrap
//!   resamples of the observations.
//!
//! The crate is `no_std` and needs only `alloc`. Reading files lives in the `clustvar`
//! companion crate.
#![no_std]

extern crate alloc;

pub mod data;
pub mod error;
pub mod hierarchy;
pub mod kmeans;
pub mod partition;
pub mod pcamix;
pub mod similarity;
pub mod stability;

pub use data::{build_indicator, impute_missing, IndicatorMatrix, Qualitative, Quantitative, Variable, VariableKind, VariableSet};
pub use error::{Error, Result};
pub use hierarchy::{aggregation_levels, cut, hclustvar, merge_dissimilarity, to_newick, Hierarchy, Merge};
pub use kmeans::{init_random, kmeansvar, KmeansConfig, KmeansInit, KmeansResult, KmeansRun};
pub use partition::{ClusterPartition, ClusterSummary};
pub use pcamix::{
    cluster_homogeneity, correlation_ratio, gain_in_cohesion, leading_component, partition_homogeneity, recode, synthetic_variable,
    RecodedMatrix, SquaredLoading, SyntheticVariable,
};
pub use similarity::{canonical_corr, cluster_sim_matrix, mixed_var_sim, SimilarityMatrix};
pub use stability::{bootstrap_stability, rand_indices, RandIndices, Sampling, StabilityConfig, StabilityResult};
