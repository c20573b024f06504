//! Agglomerative clustering of variables by loss of homogeneity.
//!
//! Node ids follow the usual dendrogram convention: leaves are `0..p`, the node created
//! by merge `i` is `p + i`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::data::VariableSet;
use crate::error::{Error, Result};
use crate::partition::ClusterPartition;
use crate::pcamix::cluster_homogeneity;

const HEIGHT_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Merge {
    /// Node holding the smaller variable index.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Number of variables under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hierarchy {
    pub labels: Vec<String>,
    /// p - 1 merges in order.
    pub merges: Vec<Merge>,
    /// Homogeneity of the single cluster holding every variable.
    pub root_homogeneity: f64,
    /// Merges lower than one of their child merges.
    pub inversions: Vec<usize>,
}

fn clamp_height(d: f64) -> f64 {
    if d < 0.0 && d > -HEIGHT_CLAMP {
        0.0
    } else {
        d
    }
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u
}

/// Homogeneity lost when merging `a` and `b`.
pub fn merge_dissimilarity(vs: &VariableSet, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::InvalidPartition("clusters overlap".to_string()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let union = sorted_union(&a, &b);
    Ok(clamp_height(
        cluster_homogeneity(vs, &a)? + cluster_homogeneity(vs, &b)? - cluster_homogeneity(vs, &union)?,
    ))
}

struct Active {
    node: usize,
    members: Vec<usize>,
    homogeneity: f64,
}

/// Builds the hierarchy of all variables of `vs`, merging at each step the pair of
/// clusters with the smallest loss of homogeneity.
///
/// Equal losses go to the pair whose smallest variable index is lowest, then to the
/// lowest smallest index of the other cluster.
pub fn hclustvar(vs: &VariableSet) -> Result<Hierarchy> {
    vs.ensure_min_variables(2)?;
    let p = vs.len();
    let at_step = |step: usize| move |e: Error| Error::MergeStep {
        step,
        source: alloc::boxed::Box::new(e),
    };

    let mut active: Vec<Active> = (0..p)
        .map(|i| {
            Ok(Active {
                node: i,
                members: alloc::vec![i],
                homogeneity: cluster_homogeneity(vs, &[i])?,
            })
        })
        .collect::<Result<_>>()
        .map_err(at_step(1))?;

    // (node, node) with the first node holding the smaller variable -> (loss, union homogeneity)
    let mut table: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let pair = |a: &Active, b: &Active| -> Result<((usize, usize), (f64, f64))> {
        let union = sorted_union(&a.members, &b.members);
        let h = cluster_homogeneity(vs, &union)?;
        let key = if a.members[0] < b.members[0] {
            (a.node, b.node)
        } else {
            (b.node, a.node)
        };
        Ok((key, (clamp_height(a.homogeneity + b.homogeneity - h), h)))
    };
    for i in 0..p {
        for j in i + 1..p {
            let (k, v) = pair(&active[i], &active[j]).map_err(at_step(1))?;
            table.insert(k, v);
        }
    }

    let mut merges = Vec::with_capacity(p - 1);
    let mut heights: Vec<f64> = Vec::with_capacity(p - 1);
    let mut root_homogeneity = 1.0;
    for step in 1..p {
        let min_of = |node: usize| {
            active
                .iter()
                .find(|a| a.node == node)
                .map(|a| a.members[0])
                .expect("active node")
        };
        let mut best: Option<((usize, usize), f64, f64, (usize, usize))> = None;
        for (&(l, r), &(d, h)) in &table {
            let tie_key = (min_of(l), min_of(r));
            let better = match &best {
                None => true,
                Some((_, bd, _, bk)) => d < *bd || (d == *bd && tie_key < *bk),
            };
            if better {
                best = Some(((l, r), d, h, tie_key));
            }
        }
        let ((left, right), height, h_union, _) = best.expect("at least one pair remains");

        let take = |active: &mut Vec<Active>, node: usize| {
            let pos = active.iter().position(|a| a.node == node).expect("active node");
            active.remove(pos)
        };
        let a = take(&mut active, left);
        let b = take(&mut active, right);
        table.retain(|&(l, r), _| l != left && l != right && r != left && r != right);

        let merged = Active {
            node: p + step - 1,
            members: sorted_union(&a.members, &b.members),
            homogeneity: h_union,
        };
        merges.push(Merge {
            left,
            right,
            height,
            size: merged.members.len(),
        });
        heights.push(height);
        root_homogeneity = h_union;

        if step + 1 < p {
            for other in &active {
                let (k, v) = pair(&merged, other).map_err(at_step(step + 1))?;
                table.insert(k, v);
            }
        }
        active.push(merged);
    }

    let inversions = merges
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            [m.left, m.right]
                .iter()
                .any(|&c| c >= p && heights[c - p] > m.height)
        })
        .map(|(i, _)| i)
        .collect();

    Ok(Hierarchy {
        labels: vs.names().map(ToString::to_string).collect(),
        merges,
        root_homogeneity,
        inversions,
    })
}

impl Hierarchy {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// 0-based membership of the K-cluster partition, clusters numbered by their first
    /// variable.
    pub fn cut_membership(&self, k: usize) -> Result<Vec<usize>> {
        let p = self.n_leaves();
        if k == 0 || k > p {
            return Err(Error::InvalidK { k, p });
        }
        let mut parent: Vec<usize> = (0..2 * p - 1).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, m) in self.merges.iter().take(p - k).enumerate() {
            let node = p + i;
            let l = find(&mut parent, m.left);
            let r = find(&mut parent, m.right);
            parent[l] = node;
            parent[r] = node;
        }
        let roots: Vec<usize> = (0..p).map(|v| find(&mut parent, v)).collect();
        Ok(crate::partition::renumber_by_first_appearance(&roots))
    }

    /// Merge heights paired with the number of clusters before each merge.
    pub fn aggregation_levels(&self) -> Vec<(usize, f64)> {
        let p = self.n_leaves();
        self.merges
            .iter()
            .enumerate()
            .map(|(i, m)| (p - i, m.height))
            .collect()
    }

    pub fn height_of(&self, node: usize) -> f64 {
        let p = self.n_leaves();
        if node < p {
            0.0
        } else {
            self.merges[node - p].height
        }
    }

    /// Newick text with branch lengths from heights (negative lengths floored at 0).
    pub fn to_newick(&self) -> String {
        let p = self.n_leaves();
        let mut out = String::new();
        let root = p + self.merges.len() - 1;
        self.write_node(&mut out, root);
        out.push(';');
        out
    }

    fn write_node(&self, out: &mut String, node: usize) {
        let p = self.n_leaves();
        if node < p {
            out.push_str(&newick_label(&self.labels[node]));
            return;
        }
        let m = &self.merges[node - p];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_node(out, child);
            let length = (m.height - self.height_of(child)).max(0.0);
            let _ = write!(out, ":{length}");
        }
        out.push(')');
    }
}

fn newick_label(name: &str) -> String {
    let plain = !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if plain {
        name.to_string()
    } else {
        let mut s = String::from("'");
        s.push_str(&name.replace('\'', "''"));
        s.push('\'');
        s
    }
}

/// Cuts `h` into `k` clusters and summarizes them on `vs`.
pub fn cut(h: &Hierarchy, vs: &VariableSet, k: usize, with_sim: bool) -> Result<ClusterPartition> {
    if h.n_leaves() != vs.len() {
        return Err(Error::InvalidPartition(alloc::format!(
            "hierarchy has {} leaves but the data has {} variables",
            h.n_leaves(),
            vs.len()
        )));
    }
    let membership = h.cut_membership(k)?;
    ClusterPartition::build(vs, &membership, k, Some(h.root_homogeneity), with_sim)
}

/// Free-function form of [`Hierarchy::aggregation_levels`].
pub fn aggregation_levels(h: &Hierarchy) -> Vec<(usize, f64)> {
    h.aggregation_levels()
}

/// Free-function form of [`Hierarchy::to_newick`].
pub fn to_newick(h: &Hierarchy) -> String {
    h.to_newick()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn manual(labels: &[&str], merges: &[(usize, usize, f64)]) -> Hierarchy {
        Hierarchy {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            merges: merges
                .iter()
                .map(|&(left, right, height)| Merge {
                    left,
                    right,
                    height,
                    size: 0,
                })
                .collect(),
            root_homogeneity: 1.0,
            inversions: vec![],
        }
    }

    #[test]
    fn newick_two_and_three_leaves() {
        assert_eq!(manual(&["a", "b"], &[(0, 1, 0.4)]).to_newick(), "(a:0.4,b:0.4);");
        assert_eq!(
            manual(&["a", "b", "c"], &[(0, 1, 0.2), (3, 2, 0.5)]).to_newick(),
            "((a:0.2,b:0.2):0.3,c:0.5);"
        );
    }

    #[test]
    fn newick_quotes_awkward_labels_and_floors_inversions() {
        let h = manual(&["x y", "it's", "c"], &[(0, 1, 0.6), (3, 2, 0.5)]);
        assert_eq!(h.to_newick(), "(('x y':0.6,'it''s':0.6):0,c:0.5);");
    }

    #[test]
    fn cut_membership_numbers_by_first_variable() {
        let h = manual(&["a", "b", "c", "d"], &[(1, 3, 0.1), (0, 2, 0.2), (4, 5, 0.9)]);
        assert_eq!(h.cut_membership(4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(h.cut_membership(3).unwrap(), vec![0, 1, 2, 1]);
        assert_eq!(h.cut_membership(2).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(h.cut_membership(1).unwrap(), vec![0, 0, 0, 0]);
        assert!(h.cut_membership(0).is_err());
        assert!(h.cut_membership(5).is_err());
    }

    #[test]
    fn dissimilarity_of_uncorrelated_and_duplicated_pairs() {
        let vs = VariableSet::new(
            vec![
                Variable::quantitative_complete("a", &[1.0, -1.0, 1.0, -1.0]),
                Variable::quantitative_complete("b", &[1.0, 1.0, -1.0, -1.0]),
                Variable::quantitative_complete("c", &[2.0, -2.0, 2.0, -2.0]),
            ],
            None,
        )
        .unwrap();
        assert_abs_diff_eq!(merge_dissimilarity(&vs, &[0], &[1]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(merge_dissimilarity(&vs, &[0], &[2]).unwrap(), 0.0, epsilon = 1e-12);
        assert!(merge_dissimilarity(&vs, &[0, 1], &[1]).is_err());
    }

    #[test]
    fn two_variables_single_merge() {
        let vs = VariableSet::new(
            vec![
                Variable::quantitative_complete("a", &[1.0, 2.0, 3.0, 5.0]),
                Variable::quantitative_complete("b", &[2.0, 1.0, 4.0, 3.0]),
            ],
            None,
        )
        .unwrap();
        let h = hclustvar(&vs).unwrap();
        assert_eq!(h.merges.len(), 1);
        let d = merge_dissimilarity(&vs, &[0], &[1]).unwrap();
        assert_eq!(h.merges[0].height, d);
        assert_eq!(h.aggregation_levels(), vec![(2, d)]);
        assert_eq!((h.merges[0].left, h.merges[0].right), (0, 1));
    }

    #[test]
    fn rare_category_reports_the_merge_step() {
        let vs = VariableSet::new(
            vec![
                Variable::qualitative_complete("z", &["a", "a", "b", "b"]),
                Variable::quantitative_complete("x", &[1.0, 2.0, 3.0, 5.0]),
            ],
            None,
        )
        .unwrap();
        let err = hclustvar(&vs.resample(&[0, 1, 1, 0])).unwrap_err();
        assert!(err.is_rare_category(), "{err:?}");
        assert!(matches!(err, Error::MergeStep { step: 1, .. }));
    }
}
