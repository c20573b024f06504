//! Acceptance suite. Runs without the libtest harness and prints one PASS/FAIL line per
//! criterion; the process exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clustvar::{load_csv, LoadOptions};
use clustvar_core::pcamix::squared_correlation;
use clustvar_core::{
    bootstrap_stability, cluster_homogeneity, cut, hclustvar, kmeansvar, leading_component, merge_dissimilarity,
    mixed_var_sim, rand_indices, recode, synthetic_variable, ClusterPartition, Hierarchy, KmeansConfig, Sampling,
    StabilityConfig, VariableSet,
};
use common::{brute_force_hierarchy, eta_squared, lambda1, pearson_r, random_dataset, to_variable_set, Column};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn decathlon() -> VariableSet {
    load_csv(&data("decathlon.csv"), &LoadOptions::default()).expect("decathlon loads")
}

fn wine_without_scores() -> VariableSet {
    let vs = load_csv(&data("wine.csv"), &LoadOptions::with_quali(&["Label", "Soil"])).expect("wine loads");
    let keep: Vec<usize> = vs
        .names()
        .enumerate()
        .filter(|(_, n)| *n != "Overall.quality" && *n != "Typical")
        .map(|(i, _)| i)
        .collect();
    vs.select(&keep).expect("selection is valid")
}

fn decathlon_k3() -> (VariableSet, ClusterPartition) {
    let vs = decathlon();
    let tree = hclustvar(&vs).expect("hierarchy");
    let part = cut(&tree, &vs, 3, true).expect("cut");
    (vs, part)
}

fn names_of(vs: &VariableSet, members: &[usize]) -> BTreeSet<String> {
    members.iter().map(|&j| vs.variables()[j].name().to_string()).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const DECATHLON_GROUPS: [&[&str]; 3] = [
    &["100m", "Long.jump", "400m", "110m.hurdle"],
    &["Shot.put", "High.jump", "Discus", "Javeline"],
    &["Pole.vault", "1500m"],
];

fn memberships() -> Outcome {
    let (vs, part) = decathlon_k3();
    let got: BTreeSet<BTreeSet<String>> = part.clusters.iter().map(|c| names_of(&vs, &c.members)).collect();
    let want: BTreeSet<BTreeSet<String>> = DECATHLON_GROUPS
        .iter()
        .map(|g| g.iter().map(|s| s.to_string()).collect())
        .collect();
    ensure(got == want, || format!("clusters {got:?}"))?;
    Ok("three clusters identical".into())
}

fn loadings() -> Outcome {
    let (vs, part) = decathlon_k3();
    let expected = [
        ("100m", 0.6822349),
        ("Long.jump", 0.6873076),
        ("400m", 0.6652279),
        ("110m.hurdle", 0.6427661),
        ("Shot.put", 0.7861012),
        ("High.jump", 0.4991778),
        ("Discus", 0.6023186),
        ("Javeline", 0.2546550),
        ("Pole.vault", 0.6237239),
        ("1500m", 0.6237239),
    ];
    let mut worst = 0.0f64;
    for (name, want) in expected {
        let j = vs.index_of(name).ok_or(format!("{name} missing"))?;
        let c = part.membership[j];
        let got = part.clusters[c].synthetic.loading_of(j).ok_or(format!("no loading for {name}"))?;
        worst = worst.max((got - want).abs());
    }
    ensure(worst < 1e-6, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("10 loadings, max deviation {worst:.2e} (tol 1e-6)"))
}

fn similarity_matrix() -> Outcome {
    let (vs, part) = decathlon_k3();
    let order = DECATHLON_GROUPS[0];
    let c = part.membership[vs.index_of("100m").unwrap()];
    let cluster = &part.clusters[c];
    let sim = cluster.similarity.as_ref().ok_or("similarity not computed")?;
    let pos = |name: &str| {
        let j = vs.index_of(name).unwrap();
        cluster.members.iter().position(|&m| m == j).unwrap()
    };
    let reference = [
        [1.00, 0.36, 0.27, 0.34],
        [0.36, 1.00, 0.36, 0.26],
        [0.27, 0.36, 1.00, 0.30],
        [0.34, 0.26, 0.30, 1.00],
    ];
    for (a, row) in reference.iter().enumerate() {
        for (b, &want) in row.iter().enumerate() {
            let got = sim.get(pos(order[a]), pos(order[b]));
            let rounded = (got * 100.0).round() / 100.0;
            ensure((rounded - want).abs() < 1e-9, || {
                format!("{} / {}: {got:.4} rounds to {rounded}", order[a], order[b])
            })?;
        }
    }
    Ok("4x4 matrix equal after rounding to 2 decimals".into())
}

fn scores() -> Outcome {
    let (vs, part) = decathlon_k3();
    let reference = [
        ("SEBRLE", [0.2640687, -1.0353928, -1.4405915]),
        ("CLAY", [1.3816943, -0.3454687, -1.7840860]),
        ("KARPOV", [1.1098485, -0.7209119, -1.7043603]),
        ("BERNARD", [-0.1949061, 0.7082857, -1.5017373]),
        ("YURKOV", [-2.0319539, -1.8850107, 0.2702640]),
        ("WARNERS", [1.1385110, 1.0929346, -0.3490226]),
    ];
    let table = part.scores();
    ensure(table.len() == 41 && table.iter().all(|r| r.len() == 3), || "table is not 41x3".into())?;
    let labels = vs.obs_labels().ok_or("no row labels")?;
    let rows: Vec<usize> = reference
        .iter()
        .map(|(name, _)| labels.iter().position(|l| l == name).ok_or(format!("{name} missing")))
        .collect::<Result<_, _>>()?;
    // reference columns: clusters of 100m, Shot.put, Pole.vault
    let columns: Vec<usize> = ["100m", "Shot.put", "Pole.vault"]
        .iter()
        .map(|n| part.membership[vs.index_of(n).unwrap()])
        .collect();
    let mut worst = 0.0f64;
    let mut flipped = Vec::new();
    for (k, &col) in columns.iter().enumerate() {
        let dot: f64 = rows.iter().zip(&reference).map(|(&r, (_, v))| table[r][col] * v[k]).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        if sign < 0.0 {
            flipped.push(k + 1);
        }
        for (&r, (_, v)) in rows.iter().zip(&reference) {
            worst = worst.max((sign * table[r][col] - v[k]).abs());
        }
    }
    ensure(worst < 1e-3, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("6 rows x 3 columns, max deviation {worst:.2e}, sign flipped on columns {flipped:?}"))
}

fn wine_hierarchy() -> Outcome {
    let vs = wine_without_scores();
    ensure(vs.len() == 29, || format!("{} variables", vs.len()))?;
    let tree = hclustvar(&vs).map_err(|e| e.to_string())?;
    let part = cut(&tree, &vs, 6, false).map_err(|e| e.to_string())?;
    ensure((part.gain - 56.84082).abs() <= 0.05, || format!("E = {}", part.gain))?;
    let soil = vs.index_of("Soil").unwrap();
    let cluster = &part.clusters[part.membership[soil]];
    let members = names_of(&vs, &cluster.members);
    for name in ["Odor.Intensity", "Spice.before.shaking", "Odor.Intensity.1", "Spice", "Bitterness"] {
        ensure(members.contains(name), || format!("{name} not with Soil: {members:?}"))?;
    }
    let l = cluster.synthetic.loading_of(soil).unwrap();
    ensure((l - 0.7768805).abs() < 1e-3, || format!("Soil loading {l}"))?;
    Ok(format!("E = {:.5}, Soil loading {l:.7}", part.gain))
}

fn wine_kmeans() -> Outcome {
    let vs = wine_without_scores();
    let mut lowest_gap = f64::INFINITY;
    for seed in 1..=20u64 {
        let single = kmeansvar(&vs, &KmeansConfig::random(6, 1, seed)).map_err(|e| e.to_string())?;
        let best = kmeansvar(&vs, &KmeansConfig::random(6, 10, seed)).map_err(|e| e.to_string())?;
        for (label, res) in [("single", &single), ("best", &best)] {
            let run = &res.run;
            for w in run.homogeneity_trace.windows(2) {
                ensure(w[1] >= w[0] - 1e-10, || format!("seed {seed} {label}: H fell {} -> {}", w[0], w[1]))?;
            }
            ensure(run.converged && run.iterations <= 150, || {
                format!("seed {seed} {label}: {} iterations, converged {}", run.iterations, run.converged)
            })?;
            let e = res.partition.gain;
            ensure(e > 0.0 && e < 100.0, || format!("seed {seed} {label}: E = {e}"))?;
        }
        let gap = best.partition.gain - single.partition.gain;
        ensure(gap >= 0.0, || format!("seed {seed}: best-of-10 E below single start by {}", -gap))?;
        lowest_gap = lowest_gap.min(gap);
    }
    Ok(format!("seeds 1..=20, smallest best-minus-single gain {lowest_gap:.3e}"))
}

fn decathlon_stability() -> Outcome {
    let vs = decathlon();
    let result = bootstrap_stability(&vs, &StabilityConfig::new(40, 7)).map_err(|e| e.to_string())?;
    ensure(result.matcr.len() == 40, || format!("{} rows", result.matcr.len()))?;
    for row in &result.matcr {
        let row = row.as_ref().ok_or("failed replicate")?;
        ensure(row.len() == 8, || format!("row of {}", row.len()))?;
    }
    let m = &result.mean_adjusted_rand;
    let at = |k: usize| m[k - 2];
    ensure(at(5) > at(4) && at(5) > at(6), || format!("no local maximum at K=5: {m:?}"))?;
    let rank = m.iter().filter(|&&v| v > at(5)).count() + 1;
    ensure(rank <= 2, || format!("K=5 ranks {rank}: {m:?}"))?;

    let mut identity = StabilityConfig::new(5, 7);
    identity.sampling = Sampling::Identity;
    let id = bootstrap_stability(&vs, &identity).map_err(|e| e.to_string())?;
    ensure(
        id.matcr.iter().flatten().flatten().all(|&v| v == 1.0) && id.matcr.iter().all(Option::is_some),
        || "identity resampling gave ARI != 1".into(),
    )?;
    Ok(format!("seed 7, matCR 40x8, K=5 mean ARI {:.3} ranks {rank}, identity hook all 1", at(5)))
}

fn members_under(h: &Hierarchy, node: usize) -> Vec<usize> {
    let p = h.n_leaves();
    if node < p {
        return vec![node];
    }
    let m = &h.merges[node - p];
    let mut out = members_under(h, m.left);
    out.extend(members_under(h, m.right));
    out.sort_unstable();
    out
}

fn oracle_equivalence() -> Outcome {
    let mut pairs = (0usize, 0usize);
    for seed in 0..50u64 {
        let cols = random_dataset(seed, 7, 30);
        let vs = to_variable_set(&cols);
        let tree = hclustvar(&vs).map_err(|e| e.to_string())?;
        let oracle = brute_force_hierarchy(&cols);
        ensure(tree.merges.len() == oracle.len(), || format!("seed {seed}: merge count"))?;
        for (m, o) in tree.merges.iter().zip(&oracle) {
            let (a, b) = (members_under(&tree, m.left), members_under(&tree, m.right));
            ensure(a == o.a && b == o.b, || format!("seed {seed}: merged {a:?}+{b:?}, oracle {:?}+{:?}", o.a, o.b))?;
            ensure((m.height - o.height).abs() < 1e-10, || {
                format!("seed {seed}: height {} vs {}", m.height, o.height)
            })?;
        }

        let all: Vec<usize> = (0..cols.len()).collect();
        let l1 = leading_component(&recode(&vs, &all).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .eigenvalue;
        let dense = lambda1(&cols, &all);
        ensure((l1 - dense).abs() < 1e-10, || format!("seed {seed}: lambda1 {l1} vs {dense}"))?;

        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let s = mixed_var_sim(&vs, i, j).map_err(|e| e.to_string())?;
                match (&cols[i], &cols[j]) {
                    (Column::Num(x), Column::Num(y)) => {
                        let r = pearson_r(x, y);
                        ensure((s - r * r).abs() < 1e-10, || format!("seed {seed}: r2 {s} vs {}", r * r))?;
                        pairs.0 += 1;
                    }
                    (Column::Cat(c, l), Column::Num(x)) => {
                        let eta = eta_squared(x, c, *l);
                        ensure((s - eta).abs() < 1e-10, || format!("seed {seed}: eta2 {s} vs {eta}"))?;
                        pairs.1 += 1;
                    }
                    _ => {}
                }
            }
        }
    }
    ensure(pairs.0 > 0 && pairs.1 > 0, || format!("pair coverage {pairs:?}"))?;
    Ok(format!("50 datasets, {} r2 pairs, {} eta2 pairs", pairs.0, pairs.1))
}

fn invariants() -> Outcome {
    let wine = wine_without_scores();
    for name in ["Soil", "Label", "Odor.Intensity"] {
        let j = wine.index_of(name).unwrap();
        let h = cluster_homogeneity(&wine, &[j]).map_err(|e| e.to_string())?;
        ensure(h == 1.0, || format!("H({name}) = {h}"))?;
    }

    let all: Vec<usize> = (0..wine.len()).collect();
    let sv = synthetic_variable(&wine, &all).map_err(|e| e.to_string())?;
    let total: f64 = sv.loadings.iter().map(|l| l.value).sum();
    ensure((total - sv.eigenvalue).abs() < 1e-10, || format!("sum {total} vs lambda1 {}", sv.eigenvalue))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut lowest = f64::INFINITY;
    let mut checked = 0;
    let mut seed = 500;
    while checked < 1000 {
        let cols = random_dataset(seed, 7, 30);
        seed += 1;
        let vs = to_variable_set(&cols);
        let p = vs.len();
        for _ in 0..25 {
            let labels: Vec<u8> = (0..p).map(|_| rng.random_range(0..3u8)).collect();
            let a: Vec<usize> = (0..p).filter(|&j| labels[j] == 0).collect();
            let b: Vec<usize> = (0..p).filter(|&j| labels[j] == 1).collect();
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let d = merge_dissimilarity(&vs, &a, &b).map_err(|e| e.to_string())?;
            lowest = lowest.min(d);
            checked += 1;
        }
        for members in [vec![0], vec![0, 1]] {
            let sv = synthetic_variable(&vs, &members).map_err(|e| e.to_string())?;
            let total: f64 = sv.loadings.iter().map(|l| l.value).sum();
            ensure((total - sv.eigenvalue).abs() < 1e-10, || format!("seed {seed}: loadings sum {total}"))?;
        }
        if let (Column::Num(x), Column::Num(y)) = (&cols[0], &cols[1]) {
            let h = cluster_homogeneity(&vs, &[0, 1]).map_err(|e| e.to_string())?;
            let r = squared_correlation(x, y).map_err(|e| e.to_string())?.sqrt();
            ensure((h - 1.0 - r).abs() < 1e-10, || format!("seed {seed}: lambda1 {h} vs 1+|r| {}", 1.0 + r))?;
        }
    }
    ensure(lowest >= -1e-10, || format!("d = {lowest}"))?;

    let ari = rand_indices(&[1, 1, 2, 2], &[1, 2, 1, 2]).map_err(|e| e.to_string())?.adjusted;
    ensure((ari + 0.5).abs() < 1e-12, || format!("ARI {ari}"))?;
    let same = rand_indices(&[1, 1, 2, 2], &[1, 1, 2, 2]).map_err(|e| e.to_string())?.adjusted;
    ensure(same == 1.0, || format!("self ARI {same}"))?;
    Ok(format!("1000 pairs, min d {lowest:.2e}; ARI examples -0.5 and 1"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 decathlon K=3 memberships", memberships),
        ("2 decathlon K=3 squared loadings", loadings),
        ("3 decathlon cluster1 similarity matrix", similarity_matrix),
        ("4 decathlon K=3 scores", scores),
        ("5 wine hierarchical K=6", wine_hierarchy),
        ("6 wine kmeans K=6 seed suite", wine_kmeans),
        ("7 decathlon bootstrap stability", decathlon_stability),
        ("8 oracle equivalence", oracle_equivalence),
        ("9 invariant suite", invariants),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
