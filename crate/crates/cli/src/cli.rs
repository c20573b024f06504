//! Argument parsing and the six commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use clustvar_core::kmeans::DEFAULT_MAX_ITER;
use clustvar_core::{
    bootstrap_stability, cut, hclustvar, kmeansvar, mixed_var_sim, KmeansConfig, KmeansInit, StabilityConfig,
    VariableSet,
};

use crate::error::{CliError, CliResult};
use crate::export::{cluster_names, HierarchyJson, PartitionJson, StabilityJson};
use crate::io::{load_csv_detailed, read_schema, write_table, LoadOptions, QualiColumns};
use crate::report::{describe, DatasetSummary, Payload, RunReport};
use crate::svg;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "clustvar", version, about = "Clustering of quantitative and qualitative variables")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Qualitative columns (comma separated). Without it, columns holding any
    /// non-numeric token are qualitative; an empty list makes every column quantitative.
    #[arg(long, global = true, value_delimiter = ',')]
    pub quali: Option<Vec<String>>,
    /// Cell text read as missing (empty cells are always missing).
    #[arg(long, global = true, default_value = "NA")]
    pub na_token: String,
    /// JSON sidecar {"column": "quanti" | "quali"} overriding type inference.
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed of the random starts and bootstrap draws.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Columns to drop after loading (comma separated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Also print the run report as JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the hierarchy of the variables.
    Hclust {
        csv: PathBuf,
        /// Write tree.nwk.
        #[arg(long)]
        newick: bool,
        /// Write levels.csv (K, height).
        #[arg(long)]
        levels_csv: bool,
        /// Write dendrogram.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Cut the hierarchy into K clusters.
    Cut {
        csv: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Also compute the similarity matrix of every cluster.
        #[arg(long)]
        matsim: bool,
    },
    /// k-means type partition into K clusters.
    Kmeans {
        csv: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Number of random starts; the most homogeneous result is kept.
        #[arg(long, default_value_t = 1)]
        nstart: usize,
        /// Start from the `cluster` field of a partition JSON file instead of random centers.
        #[arg(long)]
        init_from: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        matsim: bool,
    },
    /// Bootstrap stability of the partitions of the hierarchy.
    Stability {
        csv: PathBuf,
        /// Number of bootstrap replicates.
        #[arg(long = "B", default_value_t = 100)]
        b: usize,
        /// Fail on the first resample where a category vanishes instead of redrawing it.
        #[arg(long)]
        strict_rare: bool,
        /// Redraws allowed per replicate.
        #[arg(long, default_value_t = 10)]
        max_retries: usize,
        /// Write stability.svg with the mean curve.
        #[arg(long)]
        svg: bool,
    },
    /// Similarity of two variables.
    Sim { csv: PathBuf, a: String, b: String },
    /// Summary of the columns as loaded.
    Inspect { csv: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Hclust { .. } => "hclust",
            Command::Cut { .. } => "cut",
            Command::Kmeans { .. } => "kmeans",
            Command::Stability { .. } => "stability",
            Command::Sim { .. } => "sim",
            Command::Inspect { .. } => "inspect",
        }
    }

    fn csv(&self) -> &Path {
        match self {
            Command::Hclust { csv, .. }
            | Command::Cut { csv, .. }
            | Command::Kmeans { csv, .. }
            | Command::Stability { csv, .. }
            | Command::Sim { csv, .. }
            | Command::Inspect { csv } => csv,
        }
    }
}

/// Fixed-point text with 7 significant digits.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (6 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

struct Loaded {
    vs: VariableSet,
    summary: DatasetSummary,
    warnings: Vec<String>,
}

fn load(global: &GlobalArgs, csv: &Path) -> CliResult<Loaded> {
    let quali = match &global.quali {
        None => QualiColumns::Infer,
        Some(list) => QualiColumns::Names(list.iter().filter(|s| !s.is_empty()).cloned().collect()),
    };
    let schema = global.schema.as_deref().map(read_schema).transpose()?;
    let options = LoadOptions {
        quali,
        na_token: global.na_token.clone(),
        schema,
    };
    let (vs, details) = load_csv_detailed(csv, &options)?;
    let vs = if global.exclude.is_empty() {
        vs
    } else {
        let mut keep = Vec::new();
        for name in &global.exclude {
            if vs.index_of(name).is_none() {
                return Err(CliError::input(format!("--exclude names unknown column '{name}'")));
            }
        }
        for (i, name) in vs.names().enumerate() {
            if !global.exclude.iter().any(|e| e == name) {
                keep.push(i);
            }
        }
        vs.select(&keep)?
    };
    let mut warnings = Vec::new();
    for (name, count) in &details.coerced {
        warnings.push(format!("column '{name}': {count} non-numeric cell(s) read as missing"));
    }
    let summary = DatasetSummary::new(&csv.display().to_string(), &vs, &global.exclude, details.coerced);
    let imputed: usize = summary.imputed.values().sum();
    if imputed > 0 {
        warnings.push(format!("{imputed} missing value(s) imputed"));
    }
    Ok(Loaded { vs, summary, warnings })
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn table_bytes(header: &[String], labels: Option<&[String]>, rows: &[Vec<f64>]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_table(&mut buf, header, labels, rows)?;
    Ok(buf)
}

fn partition_text(json: &PartitionJson) -> String {
    let mut out = String::new();
    for c in &json.var {
        let _ = writeln!(out, "cluster{}  eigenvalue {}", c.cluster, sig7(c.eigenvalue));
        let width = c.loadings.iter().map(|l| l.variable.len()).max().unwrap_or(0);
        for l in &c.loadings {
            let _ = writeln!(out, "  {:width$}  {}", l.variable, sig7(l.squared_loading));
        }
    }
    if let Some(sims) = &json.sim {
        for s in sims {
            let _ = writeln!(out, "similarity cluster{}", s.cluster);
            for (name, row) in s.names.iter().zip(&s.values) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
                let _ = writeln!(out, "  {name}  {}", cells.join(" "));
            }
        }
    }
    let _ = writeln!(out, "wss {}", sig7(json.wss));
    let _ = writeln!(out, "E {}", sig7(json.e));
    out
}

/// Runs the parsed command. Human-readable text goes to `stdout`.
pub fn run(cli: Cli, argv: Vec<String>, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let started = Instant::now();
    let global = &cli.global;
    let Loaded {
        vs,
        summary,
        mut warnings,
    } = load(global, cli.command.csv())?;
    let out = &global.out;
    let writes_files = !matches!(cli.command, Command::Sim { .. } | Command::Inspect { .. });
    if writes_files {
        fs::create_dir_all(out).map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;
    }
    let mut text = String::new();

    let payload = match &cli.command {
        Command::Hclust {
            newick,
            levels_csv,
            svg,
            ..
        } => {
            let tree = hclustvar(&vs)?;
            if !tree.inversions.is_empty() {
                warnings.push(format!("hierarchy has inversions at merges {:?}", tree.inversions));
            }
            let json = HierarchyJson::new(&tree);
            write_file(out, "hierarchy.json", serde_json::to_string_pretty(&json)?.as_bytes())?;
            if *newick {
                write_file(out, "tree.nwk", format!("{}\n", tree.to_newick()).as_bytes())?;
            }
            if *levels_csv {
                let rows: Vec<Vec<f64>> = json.levels.iter().map(|l| vec![l.k as f64, l.height]).collect();
                let header = ["K".to_string(), "height".to_string()];
                write_file(out, "levels.csv", &table_bytes(&header, None, &rows)?)?;
            }
            if *svg {
                write_file(out, "dendrogram.svg", svg::dendrogram(&tree, "Cluster dendrogram").as_bytes())?;
            }
            let _ = writeln!(text, "K  height");
            for l in &json.levels {
                let _ = writeln!(text, "{:<2} {}", l.k, sig7(l.height));
            }
            Payload::Hierarchy(json)
        }
        Command::Cut { k, matsim, .. } => {
            let tree = hclustvar(&vs)?;
            let part = cut(&tree, &vs, *k, *matsim)?;
            let json = PartitionJson::new(&vs, &part);
            write_partition(out, &json)?;
            text.push_str(&partition_text(&json));
            Payload::Partition(Box::new(json))
        }
        Command::Kmeans {
            k,
            nstart,
            init_from,
            max_iter,
            matsim,
            ..
        } => {
            let (init, label) = match init_from {
                Some(path) => {
                    let file = fs::read_to_string(path)
                        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
                    let given: PartitionJson = serde_json::from_str(&file)?;
                    let (given_k, membership) = given.membership_for(&vs)?;
                    if given_k != *k {
                        return Err(CliError::input(format!(
                            "--init-from holds {given_k} clusters but -k is {k}"
                        )));
                    }
                    (KmeansInit::Partition(membership), "partition")
                }
                None => (
                    KmeansInit::Random {
                        n_starts: *nstart,
                        seed: global.seed.unwrap_or(DEFAULT_SEED),
                    },
                    "random",
                ),
            };
            let config = KmeansConfig {
                k: *k,
                init,
                max_iter: *max_iter,
                with_sim: *matsim,
            };
            let res = kmeansvar(&vs, &config)?;
            if !res.run.converged {
                warnings.push(format!("no convergence within {max_iter} iterations"));
            }
            if res.run.repairs > 0 {
                warnings.push(format!("an emptied cluster was refilled in {} iteration(s)", res.run.repairs));
            }
            let json = PartitionJson::with_kmeans(&vs, &res, label, *max_iter);
            write_partition(out, &json)?;
            text.push_str(&partition_text(&json));
            let _ = writeln!(
                text,
                "iterations {}  converged {}",
                res.run.iterations, res.run.converged
            );
            Payload::Partition(Box::new(json))
        }
        Command::Stability {
            b,
            strict_rare,
            max_retries,
            svg,
            ..
        } => {
            let mut config = StabilityConfig::new(*b, global.seed.unwrap_or(DEFAULT_SEED));
            config.strict = *strict_rare;
            config.max_retries = *max_retries;
            let res = bootstrap_stability(&vs, &config).map_err(|e| {
                let rare = e.is_rare_category();
                let mut err = CliError::from(e);
                if rare {
                    err = err.context("bootstrap resample left a category without observations (strict mode)");
                }
                err
            })?;
            if !res.failed.is_empty() {
                warnings.push(format!(
                    "{} of {} replicates failed after {} redraws and are excluded from the means",
                    res.failed.len(),
                    res.replicates,
                    config.max_retries
                ));
            }
            let json = StabilityJson::new(&res, *strict_rare);
            write_file(out, "stability.json", serde_json::to_string_pretty(&json)?.as_bytes())?;
            let mean_rows: Vec<Vec<f64>> = res
                .ks
                .iter()
                .zip(&res.mean_adjusted_rand)
                .map(|(&k, &m)| vec![k as f64, m])
                .collect();
            let header = ["K".to_string(), "mean_ARI".to_string()];
            write_file(out, "stability_mean.csv", &table_bytes(&header, None, &mean_rows)?)?;
            let width = res.ks.len();
            let matcr: Vec<Vec<f64>> = res
                .matcr
                .iter()
                .map(|row| row.clone().unwrap_or_else(|| vec![f64::NAN; width]))
                .collect();
            let header: Vec<String> = res.ks.iter().map(|k| k.to_string()).collect();
            write_file(out, "stability_matcr.csv", &table_bytes(&header, None, &matcr)?)?;
            if *svg {
                let points: Vec<(usize, f64)> = res.ks.iter().copied().zip(res.mean_adjusted_rand.iter().copied()).collect();
                write_file(
                    out,
                    "stability.svg",
                    svg::curve(&points, "Stability of the partitions", "mean adjusted Rand").as_bytes(),
                )?;
            }
            let _ = writeln!(text, "K  mean_ARI");
            for (k, m) in res.ks.iter().zip(&res.mean_adjusted_rand) {
                let _ = writeln!(text, "{k:<2} {}", sig7(*m));
            }
            Payload::Stability(json)
        }
        Command::Sim { a, b, .. } => {
            let find = |name: &str| {
                vs.index_of(name)
                    .ok_or_else(|| CliError::input(format!("unknown variable '{name}'")))
            };
            let value = mixed_var_sim(&vs, find(a)?, find(b)?)?;
            let _ = writeln!(text, "{value:.7}");
            Payload::Similarity {
                a: a.clone(),
                b: b.clone(),
                value,
            }
        }
        Command::Inspect { .. } => {
            let variables = describe(&vs);
            let _ = writeln!(text, "n {}  p {}  quanti {}  quali {}", vs.n_obs(), vs.len(), summary.p1, summary.p2);
            for v in &variables {
                let detail = match (&v.levels, v.mean, v.sd) {
                    (Some(levels), _, _) => levels
                        .iter()
                        .map(|l| format!("{}:{}", l.level, l.count))
                        .collect::<Vec<_>>()
                        .join(" "),
                    (None, Some(m), Some(s)) => format!("mean {}  sd {}", sig7(m), sig7(s)),
                    _ => String::new(),
                };
                let _ = writeln!(text, "{}  {}  missing {}  {}", v.name, v.kind, v.missing, detail);
            }
            Payload::Inspect { variables }
        }
    };

    let report = RunReport {
        command: argv,
        dataset: summary,
        payload,
        warnings,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    if writes_files {
        let name = format!("{}_report.json", cli.command.name());
        write_file(out, &name, serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    if global.json {
        text = serde_json::to_string_pretty(&report)? + "\n";
    }
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn write_partition(out: &Path, json: &PartitionJson) -> CliResult<()> {
    write_file(out, "partition.json", serde_json::to_string_pretty(json)?.as_bytes())?;
    let scores = table_bytes(&cluster_names(json.k), json.scores.rows.as_deref(), &json.scores.values)?;
    write_file(out, "scores.csv", &scores)
}
