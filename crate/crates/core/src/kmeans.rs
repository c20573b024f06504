//! k-means type partitioning of variables around PCAMIX synthetic variables.
//!
//! Each iteration alternates a representation step (first PCAMIX component of every
//! cluster) and an allocation step (every variable joins the cluster whose synthetic
//! variable it is most similar to). Partition homogeneity never decreases.

use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::VariableSet;
use crate::error::{Error, Result};
use crate::partition::{membership_to_clusters, ClusterPartition};
use crate::pcamix::{synthetic_variable, SyntheticVariable};
use crate::similarity::{canonical_corr, variable_block, vector_block};

pub const DEFAULT_MAX_ITER: usize = 150;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KmeansInit {
    /// `n_starts` random draws of K center variables. Start `s` uses ChaCha8 seeded with
    /// `seed` on stream `s`.
    Random { n_starts: usize, seed: u64 },
    /// 0-based cluster of each variable.
    Partition(Vec<usize>),
    /// K distinct variables used as initial centers.
    Centers(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KmeansConfig {
    pub k: usize,
    pub init: KmeansInit,
    pub max_iter: usize,
    pub with_sim: bool,
}

impl KmeansConfig {
    pub fn random(k: usize, n_starts: usize, seed: u64) -> Self {
        KmeansConfig {
            k,
            init: KmeansInit::Random { n_starts, seed },
            max_iter: DEFAULT_MAX_ITER,
            with_sim: false,
        }
    }

    pub fn from_partition(k: usize, membership: Vec<usize>) -> Self {
        KmeansConfig {
            k,
            init: KmeansInit::Partition(membership),
            max_iter: DEFAULT_MAX_ITER,
            with_sim: false,
        }
    }

    pub fn from_centers(centers: Vec<usize>) -> Self {
        KmeansConfig {
            k: centers.len(),
            init: KmeansInit::Centers(centers),
            max_iter: DEFAULT_MAX_ITER,
            with_sim: false,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.k == 0 || self.k > p {
            return Err(Error::InvalidK { k: self.k, p });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".to_string()));
        }
        match &self.init {
            KmeansInit::Random { n_starts, .. } if *n_starts == 0 => Err(Error::InvalidConfig(
                "n_starts must be at least 1".to_string(),
            )),
            KmeansInit::Partition(m) if m.len() != p => Err(Error::InvalidPartition(
                alloc::format!("initial partition covers {} variables, expected {p}", m.len()),
            )),
            KmeansInit::Centers(c) if c.len() != self.k => Err(Error::InvalidConfig(
                alloc::format!("{} centers given for K = {}", c.len(), self.k),
            )),
            _ => Ok(()),
        }
    }
}

/// One run from one initial partition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KmeansRun {
    pub initial: Vec<usize>,
    pub membership: Vec<usize>,
    /// Number of allocation steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Partition homogeneity at every representation step, starting with the initial
    /// partition; the last entry belongs to `membership`.
    pub homogeneity_trace: Vec<f64>,
    /// Sum over variables of the similarity to the chosen cluster, per allocation step.
    pub allocation_trace: Vec<f64>,
    /// Allocation steps that had to refill an emptied cluster.
    pub repairs: usize,
}

impl KmeansRun {
    pub fn homogeneity(&self) -> f64 {
        *self.homogeneity_trace.last().expect("trace starts non-empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KmeansResult {
    pub partition: ClusterPartition,
    pub run: KmeansRun,
    /// Final homogeneity of every start, in start order.
    pub start_homogeneities: Vec<f64>,
    pub best_start: usize,
    pub seed: Option<u64>,
}

/// Precomputed recoded blocks of every variable, divided by `sqrt(n)`.
struct Blocks(Vec<DMatrix<f64>>);

impl Blocks {
    fn new(vs: &VariableSet) -> Result<Self> {
        (0..vs.len())
            .map(|i| variable_block(vs, i))
            .collect::<Result<Vec<_>>>()
            .map(Blocks)
    }

    /// Same value as `mixed_var_sim(i, j)`.
    fn between(&self, i: usize, j: usize) -> Result<f64> {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        canonical_corr(&self.0[a], &self.0[b])
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn allocate_to_centers(blocks: &Blocks, centers: &[usize]) -> Result<Vec<usize>> {
    (0..blocks.0.len())
        .map(|j| {
            if let Some(c) = centers.iter().position(|&c| c == j) {
                return Ok(c);
            }
            let sims = centers
                .iter()
                .map(|&c| blocks.between(j, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(argmax_lowest(&sims))
        })
        .collect()
}

fn random_centers(p: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    index::sample(rng, p, k).into_vec()
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

/// Random initial partition: K distinct center variables, every other variable joins
/// the most similar center (lowest center index on ties).
pub fn init_random(vs: &VariableSet, k: usize, seed: u64) -> Result<Vec<usize>> {
    let p = vs.len();
    if k == 0 || k > p {
        return Err(Error::InvalidK { k, p });
    }
    let blocks = Blocks::new(vs)?;
    allocate_to_centers(&blocks, &random_centers(p, k, &mut start_rng(seed, 0)))
}

fn represent(vs: &VariableSet, membership: &[usize], k: usize) -> Result<Vec<SyntheticVariable>> {
    membership_to_clusters(membership, k)?
        .iter()
        .map(|members| synthetic_variable(vs, members))
        .collect()
}

fn run_from(
    vs: &VariableSet,
    blocks: &Blocks,
    initial: Vec<usize>,
    k: usize,
    max_iter: usize,
) -> Result<KmeansRun> {
    let p = vs.len();
    let mut membership = initial.clone();
    let mut reps = represent(vs, &membership, k)?;
    let mut homogeneity_trace = alloc::vec![reps.iter().map(|r| r.eigenvalue).sum::<f64>()];
    let mut allocation_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut repairs = 0;

    while iterations < max_iter {
        iterations += 1;
        let score_blocks = reps
            .iter()
            .map(|r| vector_block(&r.scores))
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::with_capacity(p);
        let mut fit = Vec::with_capacity(p);
        for j in 0..p {
            let sims = score_blocks
                .iter()
                .map(|f| canonical_corr(&blocks.0[j], f))
                .collect::<Result<Vec<_>>>()?;
            let best = sims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let current = membership[j];
            let chosen = if sims[current] == best {
                current
            } else {
                argmax_lowest(&sims)
            };
            next.push(chosen);
            fit.push(sims[chosen]);
        }
        allocation_trace.push(fit.iter().sum());

        let mut repaired = false;
        for c in 0..k {
            if next.contains(&c) {
                continue;
            }
            let mut sizes = alloc::vec![0usize; k];
            next.iter().for_each(|&m| sizes[m] += 1);
            let worst = (0..p)
                .filter(|&j| sizes[next[j]] > 1)
                .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)))
                .expect("K <= p leaves a cluster with two members");
            next[worst] = c;
            fit[worst] = 1.0;
            repaired = true;
        }
        repairs += usize::from(repaired);

        if next == membership {
            converged = true;
            break;
        }
        membership = next;
        reps = represent(vs, &membership, k)?;
        homogeneity_trace.push(reps.iter().map(|r| r.eigenvalue).sum());
    }

    Ok(KmeansRun {
        initial,
        membership,
        iterations,
        converged,
        homogeneity_trace,
        allocation_trace,
        repairs,
    })
}

/// Partitions the variables of `vs` into `config.k` clusters.
///
/// With several random starts the run with the highest final homogeneity is kept;
/// the earliest start wins ties.
pub fn kmeansvar(vs: &VariableSet, config: &KmeansConfig) -> Result<KmeansResult> {
    let p = vs.len();
    config.validate(p)?;
    let k = config.k;
    let blocks = Blocks::new(vs)?;

    let (runs, seed) = match &config.init {
        KmeansInit::Random { n_starts, seed } => {
            let runs = (0..*n_starts)
                .map(|s| {
                    let centers = random_centers(p, k, &mut start_rng(*seed, s));
                    let initial = allocate_to_centers(&blocks, &centers)?;
                    run_from(vs, &blocks, initial, k, config.max_iter)
                })
                .collect::<Result<Vec<_>>>()?;
            (runs, Some(*seed))
        }
        KmeansInit::Partition(membership) => {
            membership_to_clusters(membership, k)?;
            (
                alloc::vec![run_from(vs, &blocks, membership.clone(), k, config.max_iter)?],
                None,
            )
        }
        KmeansInit::Centers(centers) => {
            for (i, &c) in centers.iter().enumerate() {
                if c >= p {
                    return Err(Error::VariableIndex { index: c, p });
                }
                if centers[..i].contains(&c) {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "center {c} listed twice"
                    )));
                }
            }
            let initial = allocate_to_centers(&blocks, centers)?;
            (
                alloc::vec![run_from(vs, &blocks, initial, k, config.max_iter)?],
                None,
            )
        }
    };

    let start_homogeneities: Vec<f64> = runs.iter().map(KmeansRun::homogeneity).collect();
    let best_start = argmax_lowest(&start_homogeneities);
    let run = runs.into_iter().nth(best_start).expect("at least one start");
    let partition = ClusterPartition::build(vs, &run.membership, k, None, config.with_sim)?;
    Ok(KmeansResult {
        partition,
        run,
        start_homogeneities,
        best_start,
        seed,
    })
}
