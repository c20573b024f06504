use std::collections::BTreeMap;

use clustvar_core::{VariableKind, VariableSet};
use serde::{Deserialize, Serialize};

use crate::export::{HierarchyJson, PartitionJson, StabilityJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n: usize,
    pub p: usize,
    /// Quantitative variables.
    pub p1: usize,
    /// Qualitative variables.
    pub p2: usize,
    pub excluded: Vec<String>,
    /// Missing entries per variable, replaced by the column mean (quantitative) or by
    /// an all-zero indicator row (qualitative).
    pub imputed: BTreeMap<String, usize>,
    /// Unparseable cells of quantitative columns, read as missing.
    pub coerced: BTreeMap<String, usize>,
}

impl DatasetSummary {
    pub fn new(source: &str, vs: &VariableSet, excluded: &[String], coerced: BTreeMap<String, usize>) -> Self {
        let imputed = vs
            .variables()
            .iter()
            .filter(|v| v.missing_count() > 0)
            .map(|v| (v.name().to_string(), v.missing_count()))
            .collect();
        DatasetSummary {
            source: source.to_string(),
            n: vs.n_obs(),
            p: vs.len(),
            p1: vs.n_quantitative(),
            p2: vs.n_qualitative(),
            excluded: excluded.to_vec(),
            imputed,
            coerced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableInfo {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub missing: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<f64>,
    /// Biased (1/n) standard deviation over observed entries.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<Vec<LevelCount>>,
}

pub fn describe(vs: &VariableSet) -> Vec<VariableInfo> {
    vs.variables()
        .iter()
        .map(|v| match v.kind() {
            VariableKind::Quantitative(q) => {
                let observed: Vec<f64> = q
                    .values()
                    .iter()
                    .zip(q.missing())
                    .filter(|(_, &m)| !m)
                    .map(|(&x, _)| x)
                    .collect();
                let n = observed.len() as f64;
                let mean = observed.iter().sum::<f64>() / n;
                let var = observed.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                VariableInfo {
                    name: v.name().to_string(),
                    kind: "quanti".to_string(),
                    missing: q.missing_count(),
                    mean: Some(mean),
                    sd: Some(var.sqrt()),
                    levels: None,
                }
            }
            VariableKind::Qualitative(z) => VariableInfo {
                name: v.name().to_string(),
                kind: "quali".to_string(),
                missing: z.missing_count(),
                mean: None,
                sd: None,
                levels: Some(
                    z.levels()
                        .iter()
                        .zip(z.level_counts())
                        .map(|(l, count)| LevelCount {
                            level: l.clone(),
                            count,
                        })
                        .collect(),
                ),
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "result", rename_all = "lowercase")]
pub enum Payload {
    Hierarchy(HierarchyJson),
    Partition(Box<PartitionJson>),
    Stability(StabilityJson),
    Similarity { a: String, b: String, value: f64 },
    Inspect { variables: Vec<VariableInfo> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub dataset: DatasetSummary,
    pub payload: Payload,
    pub warnings: Vec<String>,
    pub timing_ms: f64,
}
