//! Mixed-type data table: quantitative and qualitative columns with a missing mask.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A quantitative column. Missing entries hold `NaN` until imputed; the mask is kept afterwards.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quantitative {
    values: Vec<f64>,
    missing: Vec<bool>,
}

/// A qualitative column stored as level codes. `None` marks a missing entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Qualitative {
    codes: Vec<Option<usize>>,
    levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VariableKind {
    Quantitative(Quantitative),
    Qualitative(Qualitative),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Variable {
    name: String,
    kind: VariableKind,
}

/// The n x p table of variables to cluster.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariableSet {
    n_obs: usize,
    variables: Vec<Variable>,
    obs_labels: Option<Vec<String>>,
}

/// 0/1 encoding of a qualitative variable, one column per level.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    pub matrix: DMatrix<f64>,
    pub level_counts: Vec<usize>,
    pub level_names: Vec<String>,
}

impl Quantitative {
    pub fn new(values: &[Option<f64>]) -> Self {
        let missing = values.iter().map(|v| v.is_none()).collect();
        let values = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Quantitative { values, missing }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw values; unimputed missing entries are `NaN`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    fn observed(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.missing)
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
    }

    /// Mean over observed entries, `None` when nothing is observed.
    pub fn observed_mean(&self) -> Option<f64> {
        let (sum, count) = self.observed().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    fn is_constant(&self) -> bool {
        let mut it = self.observed();
        match it.next() {
            Some(first) => it.all(|v| v == first),
            None => true,
        }
    }

    /// Values with unimputed gaps replaced by the observed mean.
    pub fn filled_values(&self) -> Vec<f64> {
        let mean = self.observed_mean().unwrap_or(0.0);
        self.values
            .iter()
            .map(|&v| if v.is_nan() { mean } else { v })
            .collect()
    }

    fn impute(&self) -> Option<Quantitative> {
        let mean = self.observed_mean()?;
        let values = self
            .values
            .iter()
            .map(|&v| if v.is_nan() { mean } else { v })
            .collect();
        Some(Quantitative {
            values,
            missing: self.missing.clone(),
        })
    }

    fn resample(&self, rows: &[usize]) -> Quantitative {
        Quantitative {
            values: rows.iter().map(|&i| self.values[i]).collect(),
            missing: rows.iter().map(|&i| self.missing[i]).collect(),
        }
    }
}

impl Qualitative {
    /// Builds a column from raw tokens; levels are numbered by first appearance.
    pub fn new<S: AsRef<str>>(values: &[Option<S>]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let codes = values
            .iter()
            .map(|v| {
                v.as_ref().map(|s| {
                    let s = s.as_ref();
                    match levels.iter().position(|l| l == s) {
                        Some(i) => i,
                        None => {
                            levels.push(s.to_string());
                            levels.len() - 1
                        }
                    }
                })
            })
            .collect();
        Qualitative { codes, levels }
    }

    /// Builds a column from codes into a declared level list. Unobserved levels are kept.
    pub fn from_codes(codes: Vec<Option<usize>>, levels: Vec<String>) -> Result<Self> {
        if let Some(bad) = codes.iter().flatten().find(|&&c| c >= levels.len()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "level code {bad} out of range for {} levels",
                levels.len()
            )));
        }
        Ok(Qualitative { codes, levels })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[Option<usize>] {
        &self.codes
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn level_of(&self, row: usize) -> Option<&str> {
        self.codes[row].map(|c| self.levels[c].as_str())
    }

    pub fn missing_count(&self) -> usize {
        self.codes.iter().filter(|c| c.is_none()).count()
    }

    /// Observed count per declared level.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.levels.len()];
        for c in self.codes.iter().flatten() {
            counts[*c] += 1;
        }
        counts
    }

    pub fn observed_level_count(&self) -> usize {
        self.level_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Drops declared levels with no observation and renumbers codes.
    fn prune_levels(&self) -> Qualitative {
        let counts = self.level_counts();
        let mut remap = alloc::vec![None; self.levels.len()];
        let mut levels = Vec::new();
        for (i, name) in self.levels.iter().enumerate() {
            if counts[i] > 0 {
                remap[i] = Some(levels.len());
                levels.push(name.clone());
            }
        }
        let codes = self.codes.iter().map(|c| c.and_then(|c| remap[c])).collect();
        Qualitative { codes, levels }
    }

    fn resample(&self, rows: &[usize]) -> Qualitative {
        Qualitative {
            codes: rows.iter().map(|&i| self.codes[i]).collect(),
            levels: self.levels.clone(),
        }
    }
}

/// Indicator matrix of `z`. Missing rows are all zero.
///
/// Columns follow the declared level order; a declared level with no observation is
/// reported as [`Error::RareCategory`] under the name `variable`.
pub fn build_indicator(variable: &str, z: &Qualitative) -> Result<IndicatorMatrix> {
    let counts = z.level_counts();
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::RareCategory {
            variable: variable.to_string(),
            level: Some(z.levels[i].clone()),
        });
    }
    if counts.len() < 2 {
        return Err(Error::TooFewLevels {
            variable: variable.to_string(),
            observed: counts.len(),
        });
    }
    let mut matrix = DMatrix::zeros(z.len(), z.levels.len());
    for (row, code) in z.codes.iter().enumerate() {
        if let Some(c) = code {
            matrix[(row, *c)] = 1.0;
        }
    }
    Ok(IndicatorMatrix {
        matrix,
        level_counts: counts,
        level_names: z.levels.clone(),
    })
}

impl Variable {
    pub fn quantitative(name: impl Into<String>, values: &[Option<f64>]) -> Self {
        Variable {
            name: name.into(),
            kind: VariableKind::Quantitative(Quantitative::new(values)),
        }
    }

    /// Fully observed quantitative column.
    pub fn quantitative_complete(name: impl Into<String>, values: &[f64]) -> Self {
        let values: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
        Self::quantitative(name, &values)
    }

    pub fn qualitative<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        Variable {
            name: name.into(),
            kind: VariableKind::Qualitative(Qualitative::new(values)),
        }
    }

    /// Fully observed qualitative column.
    pub fn qualitative_complete<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        let values: Vec<Option<&str>> = values.iter().map(|v| Some(v.as_ref())).collect();
        Self::qualitative(name, &values)
    }

    pub fn from_kind(name: impl Into<String>, kind: VariableKind) -> Self {
        Variable {
            name: name.into(),
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &VariableKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            VariableKind::Quantitative(q) => q.len(),
            VariableKind::Qualitative(q) => q.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_quantitative(&self) -> bool {
        matches!(self.kind, VariableKind::Quantitative(_))
    }

    pub fn as_quantitative(&self) -> Option<&Quantitative> {
        match &self.kind {
            VariableKind::Quantitative(q) => Some(q),
            VariableKind::Qualitative(_) => None,
        }
    }

    pub fn as_qualitative(&self) -> Option<&Qualitative> {
        match &self.kind {
            VariableKind::Qualitative(q) => Some(q),
            VariableKind::Quantitative(_) => None,
        }
    }

    pub fn missing_count(&self) -> usize {
        match &self.kind {
            VariableKind::Quantitative(q) => q.missing_count(),
            VariableKind::Qualitative(q) => q.missing_count(),
        }
    }

    fn resample(&self, rows: &[usize]) -> Variable {
        let kind = match &self.kind {
            VariableKind::Quantitative(q) => VariableKind::Quantitative(q.resample(rows)),
            VariableKind::Qualitative(q) => VariableKind::Qualitative(q.resample(rows)),
        };
        Variable {
            name: self.name.clone(),
            kind,
        }
    }
}

impl VariableSet {
    /// Validates and assembles a table.
    ///
    /// Unobserved declared levels of qualitative columns are dropped. Columns must share one
    /// length, names must be unique and non-empty, qualitative columns need two observed
    /// levels and quantitative columns must not be constant.
    pub fn new(variables: Vec<Variable>, obs_labels: Option<Vec<String>>) -> Result<Self> {
        let n_obs = variables
            .first()
            .map(Variable::len)
            .or(obs_labels.as_ref().map(Vec::len))
            .unwrap_or(0);
        let mut seen = BTreeSet::new();
        let mut checked = Vec::with_capacity(variables.len());
        for mut v in variables {
            if v.name.is_empty() {
                return Err(Error::EmptyName);
            }
            if !seen.insert(v.name.clone()) {
                return Err(Error::DuplicateName(v.name));
            }
            if v.len() != n_obs {
                let found = v.len();
                return Err(Error::LengthMismatch {
                    variable: v.name,
                    expected: n_obs,
                    found,
                });
            }
            match &mut v.kind {
                VariableKind::Quantitative(q) => {
                    if q.missing_count() == q.len() {
                        return Err(Error::AllMissing(v.name));
                    }
                    if q.is_constant() {
                        return Err(Error::ZeroVariance(v.name));
                    }
                }
                VariableKind::Qualitative(q) => {
                    *q = q.prune_levels();
                    if q.missing_count() == q.len() {
                        return Err(Error::AllMissing(v.name));
                    }
                    if q.levels.len() < 2 {
                        return Err(Error::TooFewLevels {
                            variable: v.name,
                            observed: q.levels.len(),
                        });
                    }
                }
            }
            checked.push(v);
        }
        if let Some(labels) = &obs_labels {
            if labels.len() != n_obs {
                return Err(Error::LengthMismatch {
                    variable: String::from("<row labels>"),
                    expected: n_obs,
                    found: labels.len(),
                });
            }
        }
        Ok(VariableSet {
            n_obs,
            variables: checked,
            obs_labels,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Number of variables p.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> Result<&Variable> {
        self.variables.get(index).ok_or(Error::VariableIndex {
            index,
            p: self.variables.len(),
        })
    }

    pub fn obs_labels(&self) -> Option<&[String]> {
        self.obs_labels.as_deref()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(Variable::name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn n_quantitative(&self) -> usize {
        self.variables.iter().filter(|v| v.is_quantitative()).count()
    }

    pub fn n_qualitative(&self) -> usize {
        self.len() - self.n_quantitative()
    }

    pub fn missing_counts(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::missing_count).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.variables.iter().any(|v| v.missing_count() > 0)
    }

    /// Table restricted to the given variable indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<VariableSet> {
        let variables = indices
            .iter()
            .map(|&i| self.variable(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        VariableSet::new(variables, self.obs_labels.clone())
    }

    /// Rows `rows` (repetitions allowed) without re-validating the columns.
    ///
    /// A resample may lose a level or flatten a column; that surfaces later as
    /// [`Error::RareCategory`] when the columns are standardized.
    pub fn resample(&self, rows: &[usize]) -> VariableSet {
        VariableSet {
            n_obs: rows.len(),
            variables: self.variables.iter().map(|v| v.resample(rows)).collect(),
            obs_labels: self
                .obs_labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    pub fn ensure_min_variables(&self, required: usize) -> Result<()> {
        if self.len() < required {
            return Err(Error::TooFewVariables {
                required,
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Missing quantitative entries take the observed mean; qualitative gaps stay as
    /// all-zero indicator rows. The missing mask is retained.
    pub fn impute_missing(&self) -> Result<VariableSet> {
        let variables = self
            .variables
            .iter()
            .map(|v| {
                let kind = match &v.kind {
                    VariableKind::Quantitative(q) => VariableKind::Quantitative(
                        q.impute().ok_or_else(|| Error::AllMissing(v.name.clone()))?,
                    ),
                    VariableKind::Qualitative(q) => {
                        if q.missing_count() == q.len() {
                            return Err(Error::AllMissing(v.name.clone()));
                        }
                        VariableKind::Qualitative(q.clone())
                    }
                };
                Ok(Variable {
                    name: v.name.clone(),
                    kind,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VariableSet {
            n_obs: self.n_obs,
            variables,
            obs_labels: self.obs_labels.clone(),
        })
    }
}

/// Free-function form of [`VariableSet::impute_missing`].
pub fn impute_missing(vs: &VariableSet) -> Result<VariableSet> {
    vs.impute_missing()
}
