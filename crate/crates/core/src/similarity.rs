//! Squared canonical correlation between variables of any type.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::VariableSet;
use crate::error::{Error, Result};
use crate::pcamix::recode;

/// Pairwise similarities within a group of variables.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimilarityMatrix {
    pub names: Vec<String>,
    /// Row-major, symmetric, unit diagonal.
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn largest_eigenvalue(a: DMatrix<f64>) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)];
    }
    SymmetricEigen::new(a).eigenvalues.max()
}

/// First eigenvalue of the smallest of `E E' F F'` (n x n), `E' F F' E` (r1 x r1) and
/// `F' E E' F` (r2 x r2), clamped to [0, 1]. All three share their nonzero eigenvalues.
///
/// Both blocks must be recoded and divided by `sqrt(n)`.
pub fn canonical_corr(e: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<f64> {
    if e.nrows() != f.nrows() {
        return Err(Error::LengthMismatch {
            variable: "<block>".to_string(),
            expected: e.nrows(),
            found: f.nrows(),
        });
    }
    if e.iter().all(|&v| v == 0.0) || f.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroBlock);
    }
    let (n, r1, r2) = (e.nrows(), e.ncols(), f.ncols());
    let value = if r1 == 1 && r2 == 1 {
        let d = e.column(0).dot(&f.column(0));
        d * d
    } else if r1 <= r2 && r1 <= n {
        let c = e.tr_mul(f);
        largest_eigenvalue(&c * c.transpose())
    } else if r2 <= n {
        let c = f.tr_mul(e);
        largest_eigenvalue(&c * c.transpose())
    } else {
        // n x n: E E' F F' shares its nonzero eigenvalues with E' F F' E
        let product = (e * e.transpose()) * (f * f.transpose());
        product
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(0.0, f64::max)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Recoded single-variable block divided by `sqrt(n)`.
pub fn variable_block(vs: &VariableSet, index: usize) -> Result<DMatrix<f64>> {
    Ok(recode(vs, &[index])?.scaled())
}

/// Block of an arbitrary quantitative vector (e.g. a synthetic variable).
pub fn vector_block(values: &[f64]) -> Result<DMatrix<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::ConstantVector);
    }
    let scale = libm::sqrt(var) * libm::sqrt(n);
    Ok(DMatrix::from_iterator(
        values.len(),
        1,
        values.iter().map(|v| (v - mean) / scale),
    ))
}

/// Similarity of variables `i` and `j`: r^2, the correlation ratio, or the
/// subspace closeness of two qualitative variables.
pub fn mixed_var_sim(vs: &VariableSet, i: usize, j: usize) -> Result<f64> {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    canonical_corr(&variable_block(vs, a)?, &variable_block(vs, b)?)
}

/// Similarity between variable `i` and a quantitative vector such as cluster scores.
pub fn sim_to_vector(vs: &VariableSet, i: usize, values: &[f64]) -> Result<f64> {
    canonical_corr(&variable_block(vs, i)?, &vector_block(values)?)
}

/// All pairwise similarities among `members`.
pub fn cluster_sim_matrix(vs: &VariableSet, members: &[usize]) -> Result<SimilarityMatrix> {
    let blocks = members
        .iter()
        .map(|&m| variable_block(vs, m))
        .collect::<Result<Vec<_>>>()?;
    let k = members.len();
    let mut values = alloc::vec![alloc::vec![0.0; k]; k];
    for a in 0..k {
        values[a][a] = 1.0;
        for b in a + 1..k {
            let s = if members[a] <= members[b] {
                canonical_corr(&blocks[a], &blocks[b])?
            } else {
                canonical_corr(&blocks[b], &blocks[a])?
            };
            values[a][b] = s;
            values[b][a] = s;
        }
    }
    Ok(SimilarityMatrix {
        names: members
            .iter()
            .map(|&m| vs.variables()[m].name().to_string())
            .collect(),
        values,
    })
}
