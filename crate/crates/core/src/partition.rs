//! Partitions of variables and their PCAMIX summaries.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::data::VariableSet;
use crate::error::{Error, Result};
use crate::pcamix::{cluster_homogeneity, gain_from_homogeneities, synthetic_variable, SyntheticVariable};
use crate::similarity::{cluster_sim_matrix, SimilarityMatrix};

/// Checks that `clusters` are nonempty, disjoint and cover `0..p`.
pub fn validate_clusters(p: usize, clusters: &[Vec<usize>]) -> Result<()> {
    let mut seen = alloc::vec![false; p];
    for c in clusters {
        if c.is_empty() {
            return Err(Error::InvalidPartition("empty cluster".to_string()));
        }
        for &v in c {
            if v >= p {
                return Err(Error::VariableIndex { index: v, p });
            }
            if seen[v] {
                return Err(Error::InvalidPartition(alloc::format!(
                    "variable {v} appears in two clusters"
                )));
            }
            seen[v] = true;
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(alloc::format!(
            "variable {v} is not in any cluster"
        )));
    }
    Ok(())
}

/// Cluster member lists from a 0-based membership vector over `k` clusters.
pub fn membership_to_clusters(membership: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    let mut clusters = alloc::vec![Vec::new(); k];
    for (v, &c) in membership.iter().enumerate() {
        if c >= k {
            return Err(Error::InvalidPartition(alloc::format!(
                "cluster index {c} out of range for {k} clusters"
            )));
        }
        clusters[c].push(v);
    }
    validate_clusters(membership.len(), &clusters)?;
    Ok(clusters)
}

/// Relabels clusters 0, 1, ... in order of their first variable.
pub fn renumber_by_first_appearance(membership: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    membership
        .iter()
        .map(|&c| match map.iter().find(|(old, _)| *old == c) {
            Some(&(_, new)) => new,
            None => {
                map.push((c, map.len()));
                map.len() - 1
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterSummary {
    /// Variable indices in increasing order.
    pub members: Vec<usize>,
    pub synthetic: SyntheticVariable,
    pub similarity: Option<SimilarityMatrix>,
}

/// A partition into K clusters with per-cluster synthetic variables.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterPartition {
    /// 0-based cluster of each variable.
    pub membership: Vec<usize>,
    pub clusters: Vec<ClusterSummary>,
    /// Partition homogeneity, the sum of the clusters' first eigenvalues.
    pub homogeneity: f64,
    /// Homogeneity of the one-cluster partition.
    pub single_cluster_homogeneity: f64,
    /// Gain in cohesion, in percent.
    pub gain: f64,
}

impl ClusterPartition {
    /// Summarizes `membership` (0-based, `k` clusters).
    ///
    /// `single_cluster_homogeneity` is recomputed when not supplied.
    pub fn build(
        vs: &VariableSet,
        membership: &[usize],
        k: usize,
        single_cluster_homogeneity: Option<f64>,
        with_sim: bool,
    ) -> Result<Self> {
        if membership.len() != vs.len() {
            return Err(Error::InvalidPartition(alloc::format!(
                "membership covers {} variables, expected {}",
                membership.len(),
                vs.len()
            )));
        }
        let lists = membership_to_clusters(membership, k)?;
        let clusters = lists
            .into_iter()
            .map(|members| {
                let synthetic = synthetic_variable(vs, &members)?;
                let similarity = if with_sim {
                    Some(cluster_sim_matrix(vs, &members)?)
                } else {
                    None
                };
                Ok(ClusterSummary {
                    members,
                    synthetic,
                    similarity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let homogeneity = clusters.iter().map(|c| c.synthetic.eigenvalue).sum();
        let single = match single_cluster_homogeneity {
            Some(h) => h,
            None => {
                let all: Vec<usize> = (0..vs.len()).collect();
                cluster_homogeneity(vs, &all)?
            }
        };
        let gain = gain_from_homogeneities(homogeneity, single, vs.len())?;
        Ok(ClusterPartition {
            membership: membership.to_vec(),
            clusters,
            homogeneity,
            single_cluster_homogeneity: single,
            gain,
        })
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.members.len()).collect()
    }

    pub fn member_lists(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// n x K table of synthetic variables, row-major.
    pub fn scores(&self) -> Vec<Vec<f64>> {
        let n = self.clusters.first().map_or(0, |c| c.synthetic.scores.len());
        (0..n)
            .map(|i| self.clusters.iter().map(|c| c.synthetic.scores[i]).collect())
            .collect()
    }
}
