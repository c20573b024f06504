//! Machine-readable views of results. Cluster numbers are 1-based; floats keep full
//! double precision.

use std::collections::BTreeMap;

use clustvar_core::kmeans::KmeansResult;
use clustvar_core::{ClusterPartition, Hierarchy, StabilityResult, VariableSet};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeJson {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub k: usize,
    pub height: f64,
}

/// Leaves are nodes `0..p` in label order; merge `i` creates node `p + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyJson {
    pub labels: Vec<String>,
    pub merges: Vec<MergeJson>,
    pub levels: Vec<LevelJson>,
    pub root_homogeneity: f64,
    /// Indices of merges lower than one of their children.
    pub inversions: Vec<usize>,
}

impl HierarchyJson {
    pub fn new(h: &Hierarchy) -> Self {
        HierarchyJson {
            labels: h.labels.clone(),
            merges: h
                .merges
                .iter()
                .map(|m| MergeJson {
                    left: m.left,
                    right: m.right,
                    height: m.height,
                    size: m.size,
                })
                .collect(),
            levels: h
                .aggregation_levels()
                .into_iter()
                .map(|(k, height)| LevelJson { k, height })
                .collect(),
            root_homogeneity: h.root_homogeneity,
            inversions: h.inversions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingJson {
    pub variable: String,
    pub squared_loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterJson {
    pub cluster: usize,
    pub eigenvalue: f64,
    pub loadings: Vec<LoadingJson>,
    /// All PCAMIX eigenvalues of the cluster, decreasing.
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimJson {
    pub cluster: usize,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresJson {
    pub rows: Option<Vec<String>>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansJson {
    pub init: String,
    pub n_starts: usize,
    pub seed: Option<u64>,
    pub max_iter: usize,
    pub iterations: usize,
    pub converged: bool,
    pub best_start: usize,
    pub start_homogeneities: Vec<f64>,
    pub homogeneity_trace: Vec<f64>,
    pub repairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub k: usize,
    pub variables: Vec<String>,
    /// Cluster of each entry of `variables`, 1-based.
    pub cluster: Vec<usize>,
    pub var: Vec<ClusterJson>,
    pub sim: Option<Vec<SimJson>>,
    pub wss: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub size: Vec<usize>,
    pub scores: ScoresJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kmeans: Option<KmeansJson>,
}

pub fn cluster_names(k: usize) -> Vec<String> {
    (1..=k).map(|c| format!("cluster{c}")).collect()
}

impl PartitionJson {
    pub fn new(vs: &VariableSet, part: &ClusterPartition) -> Self {
        let names: Vec<String> = vs.names().map(str::to_string).collect();
        let var = part
            .clusters
            .iter()
            .enumerate()
            .map(|(c, s)| ClusterJson {
                cluster: c + 1,
                eigenvalue: s.synthetic.eigenvalue,
                loadings: s
                    .synthetic
                    .loadings
                    .iter()
                    .map(|l| LoadingJson {
                        variable: names[l.variable].clone(),
                        squared_loading: l.value,
                    })
                    .collect(),
                spectrum: s.synthetic.spectrum.clone(),
            })
            .collect();
        let sim = part
            .clusters
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.similarity.as_ref().map(|m| SimJson {
                    cluster: c + 1,
                    names: m.names.clone(),
                    values: m.values.clone(),
                })
            })
            .collect::<Option<Vec<_>>>();
        PartitionJson {
            k: part.k(),
            variables: names,
            cluster: part.membership.iter().map(|c| c + 1).collect(),
            var,
            sim,
            wss: part.homogeneity,
            e: part.gain,
            size: part.sizes(),
            scores: ScoresJson {
                rows: vs.obs_labels().map(<[String]>::to_vec),
                columns: cluster_names(part.k()),
                values: part.scores(),
            },
            kmeans: None,
        }
    }

    pub fn with_kmeans(vs: &VariableSet, res: &KmeansResult, init: &str, max_iter: usize) -> Self {
        let mut json = PartitionJson::new(vs, &res.partition);
        json.kmeans = Some(KmeansJson {
            init: init.to_string(),
            n_starts: res.start_homogeneities.len(),
            seed: res.seed,
            max_iter,
            iterations: res.run.iterations,
            converged: res.run.converged,
            best_start: res.best_start,
            start_homogeneities: res.start_homogeneities.clone(),
            homogeneity_trace: res.run.homogeneity_trace.clone(),
            repairs: res.run.repairs,
        });
        json
    }

    /// 0-based membership over the variables of `vs`, matched by name.
    pub fn membership_for(&self, vs: &VariableSet) -> CliResult<(usize, Vec<usize>)> {
        if self.variables.len() != self.cluster.len() {
            return Err(CliError::input("partition file: `variables` and `cluster` differ in length"));
        }
        let by_name: BTreeMap<&str, usize> = self
            .variables
            .iter()
            .map(String::as_str)
            .zip(self.cluster.iter().copied())
            .collect();
        let membership = vs
            .names()
            .map(|name| match by_name.get(name) {
                Some(&c) if c >= 1 => Ok(c - 1),
                Some(_) => Err(CliError::input(format!("partition file: cluster of '{name}' must be >= 1"))),
                None => Err(CliError::input(format!("partition file does not assign variable '{name}'"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok((self.k, membership))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedJson {
    pub replicate: usize,
    pub attempts: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityJson {
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub strict: bool,
    pub ks: Vec<usize>,
    pub mean_adjusted_rand: Vec<f64>,
    /// One row per replicate; `null` for failed replicates.
    #[serde(rename = "matCR")]
    pub matcr: Vec<Option<Vec<f64>>>,
    pub failed: Vec<FailedJson>,
    pub redrawn: usize,
}

impl StabilityJson {
    pub fn new(res: &StabilityResult, strict: bool) -> Self {
        StabilityJson {
            b: res.replicates,
            seed: res.seed,
            strict,
            ks: res.ks.clone(),
            mean_adjusted_rand: res.mean_adjusted_rand.clone(),
            matcr: res.matcr.clone(),
            failed: res
                .failed
                .iter()
                .map(|f| FailedJson {
                    replicate: f.replicate,
                    attempts: f.attempts,
                    reason: f.reason.clone(),
                })
                .collect(),
            redrawn: res.redrawn,
        }
    }
}
