//! PCAMIX recoding of a group of mixed variables and its first principal component.
//!
//! Quantitative columns are centered and scaled by their biased (1/n) standard deviation.
//! A qualitative variable with levels s contributes its centered indicator columns scaled
//! by `sqrt(n / n_s)`, i.e. `J G D^(-1/2)` with `D` the diagonal of relative frequencies.
//! Eigenvalues are those of `M'M / n`, i.e. the squared singular values of `M / sqrt(n)`,
//! so the biased variance of the first score vector equals the first eigenvalue.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::{build_indicator, Qualitative, Quantitative, VariableKind, VariableSet};
use crate::error::{Error, Result};
use crate::partition::validate_clusters;

/// Columns contributed by one source variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub variable: usize,
    pub quantitative: bool,
    pub columns: Range<usize>,
}

/// The recoded matrix `M_k` of a group of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RecodedMatrix {
    pub matrix: DMatrix<f64>,
    pub blocks: Vec<Block>,
    pub n_obs: usize,
}

impl RecodedMatrix {
    /// Source variable index of every column.
    pub fn column_owner(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .flat_map(|b| b.columns.clone().map(move |_| b.variable))
            .collect()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// `M / sqrt(n)`.
    pub fn scaled(&self) -> DMatrix<f64> {
        &self.matrix / libm::sqrt(self.n_obs as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquaredLoading {
    pub variable: usize,
    pub value: f64,
}

/// First PCAMIX component of a cluster.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticVariable {
    pub scores: Vec<f64>,
    pub eigenvalue: f64,
    /// Quantitative members first, then qualitative, each in member order.
    pub loadings: Vec<SquaredLoading>,
    /// All eigenvalues, decreasing.
    pub spectrum: Vec<f64>,
}

impl SyntheticVariable {
    pub fn loading_of(&self, variable: usize) -> Option<f64> {
        self.loadings
            .iter()
            .find(|l| l.variable == variable)
            .map(|l| l.value)
    }
}

pub(crate) fn standardize(name: &str, q: &Quantitative) -> Result<Vec<f64>> {
    let values = q.filled_values();
    let n = values.len() as f64;
    let first = values.first().copied().unwrap_or(0.0);
    if values.iter().all(|&v| v == first) {
        return Err(Error::RareCategory {
            variable: name.to_string(),
            level: None,
        });
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Centered indicator columns scaled by `sqrt(n / n_s)`; one `Vec` per level.
pub(crate) fn standardize_indicator(name: &str, z: &Qualitative) -> Result<Vec<Vec<f64>>> {
    let g = build_indicator(name, z)?;
    let n = z.len() as f64;
    Ok(g
        .level_counts
        .iter()
        .enumerate()
        .map(|(s, &count)| {
            let freq = count as f64 / n;
            let scale = libm::sqrt(n / count as f64);
            g.matrix.column(s).iter().map(|&v| (v - freq) * scale).collect()
        })
        .collect())
}

fn check_members(vs: &VariableSet, members: &[usize]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::InvalidPartition("empty cluster".to_string()));
    }
    for (i, &m) in members.iter().enumerate() {
        vs.variable(m)?;
        if members[..i].contains(&m) {
            return Err(Error::InvalidPartition(alloc::format!(
                "variable {m} listed twice"
            )));
        }
    }
    Ok(())
}

/// Builds `M_k` for `members`: quantitative columns first, then qualitative blocks,
/// both in member order.
pub fn recode(vs: &VariableSet, members: &[usize]) -> Result<RecodedMatrix> {
    check_members(vs, members)?;
    let n = vs.n_obs();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut blocks = Vec::with_capacity(members.len());
    let quanti = members.iter().filter(|&&m| vs.variables()[m].is_quantitative());
    let quali = members.iter().filter(|&&m| !vs.variables()[m].is_quantitative());
    for &m in quanti.chain(quali) {
        let v = &vs.variables()[m];
        let start = columns.len();
        match v.kind() {
            VariableKind::Quantitative(q) => columns.push(standardize(v.name(), q)?),
            VariableKind::Qualitative(z) => columns.extend(standardize_indicator(v.name(), z)?),
        }
        blocks.push(Block {
            variable: m,
            quantitative: v.is_quantitative(),
            columns: start..columns.len(),
        });
    }
    let matrix = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    Ok(RecodedMatrix {
        matrix,
        blocks,
        n_obs: n,
    })
}

struct Decomposition {
    /// Eigenvalues of `M'M / n`, decreasing; equal to the squared singular values of
    /// `M / sqrt(n)`.
    spectrum: Vec<f64>,
    /// Unscaled first principal component, `M v_1` or the matching left vector.
    leading: Option<Vec<f64>>,
}

/// Symmetric eigendecomposition of the smaller Gram matrix, `M'M / n` (m x m) or
/// `M M' / n` (n x n).
fn decompose(m: &RecodedMatrix, want_vector: bool) -> Decomposition {
    let n = m.n_obs as f64;
    let columns_side = m.ncols() <= m.n_obs;
    let gram = if columns_side {
        m.matrix.tr_mul(&m.matrix) / n
    } else {
        &m.matrix * m.matrix.transpose() / n
    };
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[top].max(0.0);
    let leading = want_vector.then(|| {
        let v = eig.eigenvectors.column(top);
        if columns_side {
            (&m.matrix * v).iter().copied().collect()
        } else {
            let scale = libm::sqrt(n * lambda);
            v.iter().map(|u| u * scale).collect()
        }
    });
    let mut spectrum: Vec<f64> = eig.eigenvalues.iter().map(|&e| e.max(0.0)).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    Decomposition { spectrum, leading }
}

/// First principal component of `M_k`: scores, eigenvalue, squared loadings and spectrum.
///
/// Scores are oriented so the quantitative member with the largest squared loading
/// (earliest on ties) correlates positively; a cluster without quantitative members
/// has its first nonzero score made positive.
pub fn leading_component(m: &RecodedMatrix) -> Result<SyntheticVariable> {
    if m.ncols() == 0 || m.n_obs == 0 {
        return Err(Error::ZeroBlock);
    }
    let n = m.n_obs as f64;
    let dec = decompose(m, true);
    let eigenvalue = dec.spectrum[0];
    if eigenvalue <= 0.0 {
        return Err(Error::ZeroBlock);
    }
    let mut scores: Vec<f64> = dec.leading.expect("vector requested");

    // (column . y)^2 / (n^2 lambda) summed over a variable's columns; these add up to lambda.
    let projections: Vec<f64> = m
        .matrix
        .column_iter()
        .map(|col| col.iter().zip(&scores).map(|(a, b)| a * b).sum())
        .collect();
    let denom = n * n * eigenvalue;
    let loadings: Vec<SquaredLoading> = m
        .blocks
        .iter()
        .map(|b| SquaredLoading {
            variable: b.variable,
            value: projections[b.columns.clone()]
                .iter()
                .map(|p| p * p)
                .sum::<f64>()
                / denom,
        })
        .collect();

    let mut anchor: Option<(usize, f64)> = None;
    for (b, l) in m.blocks.iter().zip(&loadings) {
        if b.quantitative && anchor.map_or(true, |(_, best)| l.value > best) {
            anchor = Some((b.columns.start, l.value));
        }
    }
    let flip = match anchor {
        Some((col, _)) => projections[col] < 0.0,
        None => scores
            .iter()
            .find(|s| s.abs() > 1e-12)
            .is_some_and(|&s| s < 0.0),
    };
    if flip {
        scores.iter_mut().for_each(|s| *s = -*s);
    }

    Ok(SyntheticVariable {
        scores,
        eigenvalue,
        loadings,
        spectrum: dec.spectrum,
    })
}

/// Share of the variance of `u` explained by the levels of `z`.
///
/// Rows where `z` is missing belong to no level but still count in the total.
pub fn correlation_ratio(u: &[f64], z: &Qualitative) -> Result<f64> {
    if u.len() != z.len() {
        return Err(Error::LengthMismatch {
            variable: "<vector>".to_string(),
            expected: z.len(),
            found: u.len(),
        });
    }
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    let total: f64 = u.iter().map(|x| (x - mean) * (x - mean)).sum();
    if total <= 0.0 {
        return Err(Error::ConstantVector);
    }
    let k = z.levels().len();
    let mut sums = alloc::vec![0.0; k];
    let mut counts = alloc::vec![0usize; k];
    for (x, code) in u.iter().zip(z.codes()) {
        if let Some(c) = code {
            sums[*c] += x;
            counts[*c] += 1;
        }
    }
    let between: f64 = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| {
            let d = s / c as f64 - mean;
            c as f64 * d * d
        })
        .sum();
    Ok((between / total).clamp(0.0, 1.0))
}

/// Squared Pearson correlation of two vectors.
pub fn squared_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            variable: "<vector>".to_string(),
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok((sxy * sxy / (sxx * syy)).min(1.0))
}

/// H(C) for a single-variable cluster is 1 whenever its block is fully standardized.
fn singleton_is_exact(vs: &VariableSet, members: &[usize]) -> bool {
    members.len() == 1 && {
        let v = &vs.variables()[members[0]];
        v.is_quantitative() || v.missing_count() == 0
    }
}

/// Homogeneity of a cluster: the first PCAMIX eigenvalue of its members.
/// Synthetic variable of `members`. A singleton that is quantitative or fully observed
/// gets eigenvalue and squared loading exactly 1.
pub fn synthetic_variable(vs: &VariableSet, members: &[usize]) -> Result<SyntheticVariable> {
    let mut y = leading_component(&recode(vs, members)?)?;
    if singleton_is_exact(vs, members) {
        y.eigenvalue = 1.0;
        y.spectrum[0] = 1.0;
        y.loadings[0].value = 1.0;
    }
    Ok(y)
}

pub fn cluster_homogeneity(vs: &VariableSet, members: &[usize]) -> Result<f64> {
    let m = recode(vs, members)?;
    if singleton_is_exact(vs, members) {
        return Ok(1.0);
    }
    Ok(decompose(&m, false).spectrum[0])
}

/// Sum of cluster homogeneities.
pub fn partition_homogeneity(vs: &VariableSet, clusters: &[Vec<usize>]) -> Result<f64> {
    validate_clusters(vs.len(), clusters)?;
    clusters
        .iter()
        .map(|c| cluster_homogeneity(vs, c))
        .sum()
}

/// Percentage gain in cohesion from the homogeneities of the K-partition and the
/// one-cluster partition.
pub fn gain_from_homogeneities(h_partition: f64, h_single: f64, p: usize) -> Result<f64> {
    let room = p as f64 - h_single;
    if room.abs() <= 1e-12 * p as f64 {
        return Err(Error::DegenerateGain);
    }
    Ok(100.0 * (h_partition - h_single) / room)
}

/// Gain in cohesion of a partition, in percent.
pub fn gain_in_cohesion(vs: &VariableSet, clusters: &[Vec<usize>]) -> Result<f64> {
    let h_partition = partition_homogeneity(vs, clusters)?;
    let all: Vec<usize> = (0..vs.len()).collect();
    let h_single = cluster_homogeneity(vs, &all)?;
    gain_from_homogeneities(h_partition, h_single, vs.len())
}
