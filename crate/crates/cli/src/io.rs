//! CSV ingestion and export of mixed-type tables.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use clustvar_core::{Variable, VariableKind, VariableSet};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Quanti,
    Quali,
}

/// Sidecar mapping column name to type, e.g. `{"Soil": "quali", "Acidity": "quanti"}`.
pub type Schema = BTreeMap<String, ColumnType>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QualiColumns {
    /// A column holding any non-numeric, non-missing token is qualitative.
    Infer,
    Names(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub quali: QualiColumns,
    pub na_token: String,
    pub schema: Option<Schema>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            quali: QualiColumns::Infer,
            na_token: "NA".to_string(),
            schema: None,
        }
    }
}

impl LoadOptions {
    pub fn with_quali<S: AsRef<str>>(names: &[S]) -> Self {
        LoadOptions {
            quali: QualiColumns::Names(names.iter().map(|s| s.as_ref().to_string()).collect()),
            ..Default::default()
        }
    }
}

/// What the loader had to do besides parsing.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadSummary {
    /// Cells of quantitative columns that did not parse as numbers and were read as missing.
    pub coerced: BTreeMap<String, usize>,
    pub row_labels: bool,
}

pub fn read_schema(path: &Path) -> CliResult<Schema> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read schema {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("invalid schema {}: {e}", path.display())))
}

pub fn load_csv(path: &Path, options: &LoadOptions) -> CliResult<VariableSet> {
    Ok(load_csv_detailed(path, options)?.0)
}

pub fn load_csv_detailed(path: &Path, options: &LoadOptions) -> CliResult<(VariableSet, LoadSummary)> {
    let file = File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, options).map_err(|e| e.context(&path.display().to_string()))
}

fn is_missing(cell: &str, na_token: &str) -> bool {
    cell.is_empty() || cell == na_token
}

/// Parses CSV text. An empty first header cell marks a column of row labels.
pub fn read_csv<R: Read>(reader: R, options: &LoadOptions) -> CliResult<(VariableSet, LoadSummary)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::input(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::input("missing header row"));
    }
    let row_labels = headers[0].is_empty();
    let names: Vec<String> = headers[usize::from(row_labels)..].to_vec();

    let mut seen = HashSet::new();
    for name in &names {
        if name.is_empty() {
            return Err(CliError::input("empty column name in header"));
        }
        if !seen.insert(name.as_str()) {
            return Err(CliError::input(format!("duplicate column name '{name}'")));
        }
    }

    let mut labels = Vec::new();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("row {}: {e}", line + 2)))?;
        if record.len() != headers.len() {
            return Err(CliError::input(format!(
                "row {} has {} fields, header has {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut fields = record.iter();
        if row_labels {
            labels.push(fields.next().unwrap_or_default().to_string());
        }
        for (column, cell) in cells.iter_mut().zip(fields) {
            column.push(cell.to_string());
        }
    }

    let types = resolve_types(&names, &cells, options)?;
    let na = options.na_token.as_str();
    let mut summary = LoadSummary {
        row_labels,
        ..Default::default()
    };
    let variables = names
        .iter()
        .zip(&cells)
        .zip(&types)
        .map(|((name, column), ty)| match ty {
            ColumnType::Quanti => {
                let mut bad = 0;
                let values: Vec<Option<f64>> = column
                    .iter()
                    .map(|c| {
                        if is_missing(c, na) {
                            return None;
                        }
                        let v = c.parse::<f64>().ok().filter(|v| v.is_finite());
                        bad += usize::from(v.is_none());
                        v
                    })
                    .collect();
                if bad > 0 {
                    summary.coerced.insert(name.clone(), bad);
                }
                Variable::quantitative(name.clone(), &values)
            }
            ColumnType::Quali => {
                let values: Vec<Option<&str>> = column
                    .iter()
                    .map(|c| (!is_missing(c, na)).then_some(c.as_str()))
                    .collect();
                Variable::qualitative(name.clone(), &values)
            }
        })
        .collect();
    let set = VariableSet::new(variables, row_labels.then_some(labels)).map_err(CliError::from_data)?;
    Ok((set, summary))
}

fn resolve_types(names: &[String], cells: &[Vec<String>], options: &LoadOptions) -> CliResult<Vec<ColumnType>> {
    let known: HashSet<&str> = names.iter().map(String::as_str).collect();
    let check = |name: &str, what: &str| {
        if known.contains(name) {
            Ok(())
        } else {
            Err(CliError::input(format!("{what} names unknown column '{name}'")))
        }
    };
    let mut types: Vec<Option<ColumnType>> = vec![None; names.len()];
    if let Some(schema) = &options.schema {
        for (name, ty) in schema {
            check(name, "schema")?;
            let i = names.iter().position(|n| n == name).expect("checked");
            types[i] = Some(*ty);
        }
    }
    match &options.quali {
        QualiColumns::Names(list) => {
            for name in list {
                check(name, "--quali")?;
                let i = names.iter().position(|n| n == name).expect("checked");
                if types[i] == Some(ColumnType::Quanti) {
                    return Err(CliError::input(format!(
                        "column '{name}' is quantitative in the schema but listed as qualitative"
                    )));
                }
                types[i] = Some(ColumnType::Quali);
            }
            Ok(types.into_iter().map(|t| t.unwrap_or(ColumnType::Quanti)).collect())
        }
        QualiColumns::Infer => Ok(types
            .into_iter()
            .zip(cells)
            .map(|(t, column)| {
                t.unwrap_or_else(|| {
                    let textual = column
                        .iter()
                        .any(|c| !is_missing(c, &options.na_token) && c.parse::<f64>().is_err());
                    if textual {
                        ColumnType::Quali
                    } else {
                        ColumnType::Quanti
                    }
                })
            })
            .collect()),
    }
}

/// Column types of a set, usable as a schema sidecar for reloading.
pub fn schema_of(vs: &VariableSet) -> Schema {
    vs.variables()
        .iter()
        .map(|v| {
            let ty = if v.is_quantitative() {
                ColumnType::Quanti
            } else {
                ColumnType::Quali
            };
            (v.name().to_string(), ty)
        })
        .collect()
}

/// Writes `vs` as CSV; missing cells are written as `na_token`.
pub fn write_csv<W: Write>(vs: &VariableSet, writer: W, na_token: &str) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let labels = vs.obs_labels();
    let mut header: Vec<&str> = Vec::new();
    if labels.is_some() {
        header.push("");
    }
    header.extend(vs.names());
    w.write_record(&header).map_err(CliError::io)?;
    for i in 0..vs.n_obs() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if let Some(l) = labels {
            row.push(l[i].clone());
        }
        for v in vs.variables() {
            row.push(match v.kind() {
                VariableKind::Quantitative(q) if q.missing()[i] => na_token.to_string(),
                VariableKind::Quantitative(q) => q.values()[i].to_string(),
                VariableKind::Qualitative(z) => z.level_of(i).unwrap_or(na_token).to_string(),
            });
        }
        w.write_record(&row).map_err(CliError::io)?;
    }
    w.flush().map_err(|e| CliError::io(e.into()))
}

/// Writes a numeric table with a header row and optional row labels.
pub fn write_table<W: Write>(
    writer: W,
    header: &[String],
    row_labels: Option<&[String]>,
    rows: &[Vec<f64>],
) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut head: Vec<&str> = Vec::new();
    if row_labels.is_some() {
        head.push("");
    }
    head.extend(header.iter().map(String::as_str));
    w.write_record(&head).map_err(CliError::io)?;
    for (i, row) in rows.iter().enumerate() {
        let mut out: Vec<String> = Vec::with_capacity(head.len());
        if let Some(l) = row_labels {
            out.push(l[i].clone());
        }
        out.extend(row.iter().map(|v| if v.is_nan() { "NA".to_string() } else { v.to_string() }));
        w.write_record(&out).map_err(CliError::io)?;
    }
    w.flush().map_err(|e| CliError::io(e.into()))
}
