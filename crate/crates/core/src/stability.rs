//! Bootstrap stability of the nested partitions of a hierarchy.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::VariableSet;
use crate::error::{Error, Result};
use crate::hierarchy::{hclustvar, Hierarchy};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandIndices {
    pub rand: f64,
    pub adjusted: f64,
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Rand and Hubert-Arabie adjusted Rand indices of two labelings of the same items.
pub fn rand_indices(a: &[usize], b: &[usize]) -> Result<RandIndices> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            variable: "<partition>".to_string(),
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewVariables {
            required: 2,
            found: a.len(),
        });
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let total = pairs(a.len() as u64);
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| pairs(c)).sum();

    let rand = (total + 2.0 * index - sum_rows - sum_cols) / total;
    let expected = sum_rows * sum_cols / total;
    let max = 0.5 * (sum_rows + sum_cols);
    let adjusted = if max == expected {
        if index == max {
            1.0
        } else {
            0.0
        }
    } else {
        (index - expected) / (max - expected)
    };
    Ok(RandIndices { rand, adjusted })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sampling {
    /// n rows drawn with replacement.
    Bootstrap,
    /// Rows 0..n in order; every replicate reproduces the original hierarchy.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Fail on the first rare-category resample instead of redrawing.
    pub strict: bool,
    /// Redraws allowed per replicate after a rare-category failure.
    pub max_retries: usize,
    pub sampling: Sampling,
}

impl StabilityConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        StabilityConfig {
            replicates,
            seed,
            strict: false,
            max_retries: 10,
            sampling: Sampling::Bootstrap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FailedReplicate {
    pub replicate: usize,
    pub attempts: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityResult {
    /// Numbers of clusters compared: 2..=p-1.
    pub ks: Vec<usize>,
    /// Mean adjusted Rand index per K over successful replicates.
    pub mean_adjusted_rand: Vec<f64>,
    /// One row per replicate, `None` for failed replicates.
    pub matcr: Vec<Option<Vec<f64>>>,
    pub failed: Vec<FailedReplicate>,
    /// Replicates that succeeded only after at least one redraw.
    pub redrawn: usize,
    pub replicates: usize,
    pub seed: u64,
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Adjusted Rand index between each K-cut of `boot` and of `reference`, K = 2..=p-1.
fn compare_cuts(reference: &[Vec<usize>], boot: &Hierarchy) -> Result<Vec<f64>> {
    reference
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(rand_indices(r, &boot.cut_membership(i + 2)?)?.adjusted))
        .collect()
}

/// Resamples the observations `config.replicates` times, rebuilds the hierarchy on each
/// resample and scores its K-cuts against the K-cuts of the hierarchy of `vs`.
///
/// Missing values are imputed once on the full data. Replicate `b` draws from ChaCha8
/// seeded with `config.seed` on stream `b`, so results do not depend on evaluation order.
pub fn bootstrap_stability(vs: &VariableSet, config: &StabilityConfig) -> Result<StabilityResult> {
    if config.replicates == 0 {
        return Err(Error::InvalidConfig("at least one replicate is required".to_string()));
    }
    vs.ensure_min_variables(3)?;
    let vs = vs.impute_missing()?;
    let p = vs.len();
    let n = vs.n_obs();
    let reference_tree = hclustvar(&vs)?;
    let ks: Vec<usize> = (2..p).collect();
    let reference = ks
        .iter()
        .map(|&k| reference_tree.cut_membership(k))
        .collect::<Result<Vec<_>>>()?;

    let mut matcr = Vec::with_capacity(config.replicates);
    let mut failed = Vec::new();
    let mut redrawn = 0;
    let mut last_error = None;
    for b in 0..config.replicates {
        let mut rng = replicate_rng(config.seed, b);
        let mut attempt = 0;
        let row = loop {
            attempt += 1;
            let rows: Vec<usize> = match config.sampling {
                Sampling::Bootstrap => (0..n).map(|_| rng.random_range(0..n)).collect(),
                Sampling::Identity => (0..n).collect(),
            };
            match hclustvar(&vs.resample(&rows)) {
                Ok(tree) => break Some(compare_cuts(&reference, &tree)?),
                Err(e) if e.is_rare_category() => {
                    if config.strict {
                        return Err(e);
                    }
                    if attempt > config.max_retries {
                        failed.push(FailedReplicate {
                            replicate: b,
                            attempts: attempt,
                            reason: e.to_string(),
                        });
                        last_error = Some(e);
                        break None;
                    }
                }
                Err(e) => return Err(e),
            }
        };
        if row.is_some() && attempt > 1 {
            redrawn += 1;
        }
        matcr.push(row);
    }

    let successes: Vec<&Vec<f64>> = matcr.iter().flatten().collect();
    if let (true, Some(last)) = (successes.is_empty(), last_error) {
        return Err(Error::AllReplicatesFailed {
            replicates: config.replicates,
            last: alloc::boxed::Box::new(last),
        });
    }
    let mean_adjusted_rand = (0..ks.len())
        .map(|c| successes.iter().map(|r| r[c]).sum::<f64>() / successes.len() as f64)
        .collect();

    Ok(StabilityResult {
        ks,
        mean_adjusted_rand,
        matcr,
        failed,
        redrawn,
        replicates: config.replicates,
        seed: config.seed,
    })
}
