// Independent reference computations. Nothing here calls into the library except to
// build a `VariableSet` from the same raw columns.
#![allow(dead_code)]

use clustvar_core::{Variable, VariableSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub enum Column {
    Num(Vec<f64>),
    /// Level index per row; every level in 0..levels occurs at least once.
    Cat(Vec<usize>, usize),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Num(v) => v.len(),
            Column::Cat(c, _) => c.len(),
        }
    }
}

pub fn to_variable_set(cols: &[Column]) -> VariableSet {
    let vars = cols
        .iter()
        .enumerate()
        .map(|(j, c)| match c {
            Column::Num(v) => Variable::quantitative_complete(format!("v{j}"), v),
            Column::Cat(codes, _) => {
                let labels: Vec<String> = codes.iter().map(|c| format!("L{c}")).collect();
                Variable::qualitative_complete(format!("v{j}"), &labels)
            }
        })
        .collect();
    VariableSet::new(vars, None).unwrap()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Between-group over total sum of squares.
pub fn eta_squared(u: &[f64], codes: &[usize], levels: usize) -> f64 {
    let m = mean(u);
    let mut sums = vec![0.0; levels];
    let mut counts = vec![0usize; levels];
    for (&x, &c) in u.iter().zip(codes) {
        sums[c] += x;
        counts[c] += 1;
    }
    let between: f64 = (0..levels)
        .filter(|&s| counts[s] > 0)
        .map(|s| {
            let ms = sums[s] / counts[s] as f64;
            counts[s] as f64 * (ms - m) * (ms - m)
        })
        .sum();
    let total: f64 = u.iter().map(|x| (x - m) * (x - m)).sum();
    between / total
}

/// Columns of the recoded matrix for one raw column, written out from the definitions.
pub fn recoded_columns(col: &Column) -> Vec<Vec<f64>> {
    match col {
        Column::Num(v) => {
            let n = v.len() as f64;
            let m = mean(v);
            let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
            vec![v.iter().map(|x| (x - m) / sd).collect()]
        }
        Column::Cat(codes, levels) => {
            let n = codes.len() as f64;
            (0..*levels)
                .map(|s| {
                    let ns = codes.iter().filter(|&&c| c == s).count() as f64;
                    let f = ns / n;
                    codes
                        .iter()
                        .map(|&c| ((c == s) as u8 as f64 - f) / f.sqrt())
                        .collect()
                })
                .collect()
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, decreasing.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Largest eigenvalue of (1/n) M'M for the given members.
pub fn lambda1(cols: &[Column], members: &[usize]) -> f64 {
    let m: Vec<Vec<f64>> = members.iter().flat_map(|&j| recoded_columns(&cols[j])).collect();
    let n = cols[0].len() as f64;
    let gram: Vec<Vec<f64>> = m
        .iter()
        .map(|a| {
            m.iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n)
                .collect()
        })
        .collect();
    jacobi_eigenvalues(gram)[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMerge {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub height: f64,
}

/// Agglomeration recomputing every candidate loss from scratch at every step.
/// Ties go to the pair with the lowest (smallest member of A, smallest member of B).
pub fn brute_force_hierarchy(cols: &[Column]) -> Vec<OracleMerge> {
    let mut clusters: Vec<Vec<usize>> = (0..cols.len()).map(|j| vec![j]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in 0..clusters.len() {
                if clusters[i][0] >= clusters[j][0] {
                    continue;
                }
                let mut u = clusters[i].clone();
                u.extend(&clusters[j]);
                u.sort_unstable();
                let d = lambda1(cols, &clusters[i]) + lambda1(cols, &clusters[j]) - lambda1(cols, &u);
                let key = (clusters[i][0], clusters[j][0]);
                let better = match best {
                    None => true,
                    Some((bd, bk, _, _)) => d < bd || (d == bd && key < bk),
                };
                if better {
                    best = Some((d, key, i, j));
                }
            }
        }
        let (d, _, i, j) = best.unwrap();
        let a = clusters[i].clone();
        let b = clusters[j].clone();
        let mut u = a.clone();
        u.extend(&b);
        u.sort_unstable();
        out.push(OracleMerge {
            a,
            b,
            height: if d < 0.0 && d > -1e-10 { 0.0 } else { d },
        });
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        clusters.remove(hi);
        clusters[lo] = u;
    }
    out
}

/// Random mixed data: p in 2..=max_p, n in 12..=max_n, columns correlated through
/// two latent factors, qualitative columns with 2 to 4 levels.
pub fn random_dataset(seed: u64, max_p: usize, max_n: usize) -> Vec<Column> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(2..=max_p);
    let n = rng.random_range(12..=max_n);
    let f1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..p)
        .map(|_| {
            let w1: f64 = rng.random_range(-1.0..1.0);
            let w2: f64 = rng.random_range(-1.0..1.0);
            let raw: Vec<f64> = (0..n)
                .map(|i| w1 * f1[i] + w2 * f2[i] + 0.7 * rng.random_range(-1.0..1.0))
                .collect();
            if rng.random_bool(0.35) {
                let levels = rng.random_range(2..=4usize);
                // cut points at quantiles of `raw`, so every level is populated
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
                let mut codes = vec![0; n];
                for (rank, &i) in order.iter().enumerate() {
                    codes[i] = rank * levels / n;
                }
                Column::Cat(codes, levels)
            } else {
                Column::Num(raw)
            }
        })
        .collect()
}

/// Every way of splitting `items` into two nonempty groups (each split once).
pub fn two_splits(items: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let m = items.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << (m - 1)) {
        let (mut a, mut b) = (vec![items[m - 1]], Vec::new());
        for (i, &x) in items[..m - 1].iter().enumerate() {
            if mask & (1 << i) != 0 {
                b.push(x);
            } else {
                a.push(x);
            }
        }
        a.sort_unstable();
        out.push((a, b));
    }
    out
}
