//! Best-k-pruning of the single-linkage tree by dynamic programming, and the
//! end-to-end solver built from it.
//!
//! A k-pruning picks k tree nodes whose member sets partition the leaves.
//! The recurrence is
//! `best(T, k) = min over 0 < k' < k of best(left, k') + best(right, k - k')`
//! with `+` replaced by `max` for max-aggregation objectives (k-center).
//! Per-node single-cluster costs are computed incrementally up the tree: for
//! data-point centers each node carries a per-candidate score vector combined
//! from its children, which yields the O(n^2) cost-table term; the DP itself
//! adds O(n k^2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkage::{single_linkage_tree, Dendrogram};
use crate::metric::{CenterPolicy, Instance};
use crate::objective::{
    aggregate, cluster_cost, point_term, Aggregation, Center, ClusterCost, Objective, ObjectiveKind,
};

/// A k-partition with chosen centers and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster id in `[0, k)` per point.
    pub labels: Vec<usize>,
    /// One center per cluster id.
    pub centers: Vec<Center>,
    /// Aggregate of the per-cluster costs; recomputable from the labels.
    pub total_cost: f64,
    pub k: usize,
    pub objective: Objective,
}

impl Clustering {
    /// Build a clustering from labels, recomputing centers and the total
    /// cost. Labels must use every id in `[0, k)` at least once.
    pub fn from_labels(inst: &Instance, labels: Vec<usize>, obj: &Objective) -> Result<Self> {
        if labels.len() != inst.n() {
            return Err(Error::LabelLengthMismatch {
                got: labels.len(),
                expected: inst.n(),
            });
        }
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        if k == 0 {
            return Err(Error::EmptyMembers);
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (p, &id) in labels.iter().enumerate() {
            blocks[id].push(p);
        }
        if let Some(id) = blocks.iter().position(|b| b.is_empty()) {
            return Err(Error::EmptyCluster { id });
        }
        let costs: Vec<ClusterCost> = blocks
            .iter()
            .map(|b| cluster_cost(inst, b, obj))
            .collect::<Result<_>>()?;
        let total_cost = aggregate(&costs, obj)?;
        Ok(Clustering {
            labels,
            centers: costs.into_iter().map(|c| c.center).collect(),
            total_cost,
            k,
            objective: obj.clone(),
        })
    }

    /// Member lists per cluster id.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); self.k];
        for (p, &id) in self.labels.iter().enumerate() {
            blocks[id].push(p);
        }
        blocks
    }

    /// Blocks sorted by smallest member, for label-independent comparison.
    pub fn canonical_blocks(&self) -> Vec<Vec<usize>> {
        canonical_partition(&self.labels)
    }

    /// True if both clusterings induce the same partition of points,
    /// ignoring label numbering.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.labels.len() == other.labels.len()
            && canonical_partition(&self.labels) == canonical_partition(&other.labels)
    }
}

/// Partition of `labels` as blocks sorted by their smallest member.
pub fn canonical_partition(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (p, &id) in labels.iter().enumerate() {
        blocks[id].push(p);
    }
    blocks.retain(|b| !b.is_empty());
    blocks.sort_by_key(|b| b[0]);
    blocks
}

// ---------------------------------------------------------------------------
// Clustering JSON files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ClusteringFile {
    labels: Vec<usize>,
    centers: Vec<Center>,
    cost: f64,
    k: usize,
    objective: ObjectiveKind,
}

impl Clustering {
    pub fn to_json(&self) -> String {
        let file = ClusteringFile {
            labels: self.labels.clone(),
            centers: self.centers.clone(),
            cost: self.total_cost,
            k: self.k,
            objective: self.objective.kind,
        };
        serde_json::to_string_pretty(&file).expect("clustering serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ClusteringFile = serde_json::from_str(text)
            .map_err(|e| Error::BadGeneratorParam(format!("clustering json: {e}")))?;
        Ok(Clustering {
            labels: file.labels,
            centers: file.centers,
            total_cost: file.cost,
            k: file.k,
            objective: Objective::new(file.objective),
        })
    }

    /// Check the clustering is well-formed for `inst` and that its recorded
    /// cost matches a recomputation from the labels.
    pub fn validate_against(&self, inst: &Instance) -> Result<()> {
        let recomputed = Clustering::from_labels(inst, self.labels.clone(), &self.objective)?;
        if self.k != recomputed.k {
            return Err(Error::InvalidClustering(format!(
                "k = {} but labels span {} clusters",
                self.k, recomputed.k
            )));
        }
        let scale = self.total_cost.abs().max(recomputed.total_cost.abs());
        if (self.total_cost - recomputed.total_cost).abs() > 1e-9 * scale.max(1e-300) {
            return Err(Error::InvalidClustering(format!(
                "recorded cost {} differs from recomputed {}",
                self.total_cost, recomputed.total_cost
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The dynamic program
// ---------------------------------------------------------------------------

/// DP table over tree nodes: best cost and chosen split for each `k'`.
/// Entries with `k'` exceeding a node's member count are infeasible (+inf).
pub struct PruningTable {
    k: usize,
    cost: Vec<Vec<f64>>,
    split: Vec<Vec<u32>>,
}

impl PruningTable {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Best cost of splitting `node` into exactly `kp` clusters.
    pub fn cost(&self, node: usize, kp: usize) -> f64 {
        self.cost[node][kp - 1]
    }

    /// Left share of the best split at `node` for `kp >= 2` clusters.
    pub fn split(&self, node: usize, kp: usize) -> Option<usize> {
        if kp < 2 || !self.cost[node][kp - 1].is_finite() {
            None
        } else {
            Some(self.split[node][kp - 1] as usize)
        }
    }
}

fn uniform_weight(obj: &Objective) -> Result<()> {
    if let Some(w) = &obj.weights {
        if w.windows(2).any(|pair| pair[0] != pair[1]) {
            return Err(Error::WeightsUnsupported(
                "the pruning DP needs uniform weights: per-cluster weights depend on cluster \
                 identity, which is unknown until the pruning is chosen",
            ));
        }
    }
    Ok(())
}

/// Single-cluster cost of every tree node, computed bottom-up.
fn node_base_costs(tree: &Dendrogram, inst: &Instance, obj: &Objective) -> Result<Vec<f64>> {
    let total = tree.len();
    let mut base = vec![0.0f64; total];

    match inst.center_policy() {
        CenterPolicy::DataPointsOnly => {
            let source = inst.source_metric();
            let kind = obj.kind;
            let max_agg = kind.aggregation() == Aggregation::Max;
            let leaf_state = |id: usize| -> Vec<f64> {
                let point = match *tree.node(id) {
                    crate::linkage::DendroNode::Leaf { point } => point,
                    _ => unreachable!("ids below n are leaves"),
                };
                inst.row(point)
                    .iter()
                    .map(|&d| point_term(kind, source, d))
                    .collect()
            };
            // Per-candidate score vectors, filled for internal nodes and
            // dropped once their parent has consumed them.
            let mut states: Vec<Option<Vec<f64>>> = vec![None; total];
            for id in tree.merges() {
                let (l, r) = tree.children(id).expect("internal node");
                let mut acc = if tree.is_leaf(l) {
                    leaf_state(l)
                } else {
                    states[l].take().expect("children precede parents")
                };
                if tree.is_leaf(r) {
                    let point = match *tree.node(r) {
                        crate::linkage::DendroNode::Leaf { point } => point,
                        _ => unreachable!(),
                    };
                    let row = inst.row(point);
                    for (c, slot) in acc.iter_mut().enumerate() {
                        let term = point_term(kind, source, row[c]);
                        if max_agg {
                            if term > *slot {
                                *slot = term;
                            }
                        } else {
                            *slot += term;
                        }
                    }
                } else {
                    let rs = states[r].take().expect("children precede parents");
                    for (slot, &term) in acc.iter_mut().zip(&rs) {
                        if max_agg {
                            if term > *slot {
                                *slot = term;
                            }
                        } else {
                            *slot += term;
                        }
                    }
                }
                base[id] = acc.iter().cloned().fold(f64::INFINITY, f64::min);
                states[id] = Some(acc);
            }
        }
        CenterPolicy::SteinerCentroid => {
            if obj.kind != ObjectiveKind::KMeans {
                return Err(Error::SteinerUnsupported(
                    "steiner centers support the k-means objective only",
                ));
            }
            let points = inst
                .points()
                .ok_or(Error::SteinerUnsupported("instance has no coordinates"))?;
            struct Moments {
                sum: Vec<f64>,
                sumsq: f64,
                count: f64,
            }
            let leaf_state = |id: usize| -> Moments {
                let p = &points[id];
                Moments {
                    sum: p.clone(),
                    sumsq: p.iter().map(|x| x * x).sum(),
                    count: 1.0,
                }
            };
            let mut states: Vec<Option<Moments>> = (0..total).map(|_| None).collect();
            for id in tree.merges() {
                let (l, r) = tree.children(id).expect("internal node");
                let mut acc = if tree.is_leaf(l) {
                    leaf_state(l)
                } else {
                    states[l].take().expect("children precede parents")
                };
                let rs = if tree.is_leaf(r) {
                    leaf_state(r)
                } else {
                    states[r].take().expect("children precede parents")
                };
                for (a, b) in acc.sum.iter_mut().zip(&rs.sum) {
                    *a += b;
                }
                acc.sumsq += rs.sumsq;
                acc.count += rs.count;
                let norm_sq: f64 = acc.sum.iter().map(|x| x * x).sum();
                base[id] = (acc.sumsq - norm_sq / acc.count).max(0.0);
                states[id] = Some(acc);
            }
        }
    }
    Ok(base)
}

/// Fill the DP table for prunings of up to `k` clusters.
pub fn pruning_table(
    tree: &Dendrogram,
    inst: &Instance,
    obj: &Objective,
    k: usize,
) -> Result<PruningTable> {
    let n = tree.n();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    uniform_weight(obj)?;
    let base = node_base_costs(tree, inst, obj)?;
    let total = tree.len();
    let max_agg = obj.kind.aggregation() == Aggregation::Max;
    let mut cost = vec![vec![f64::INFINITY; k]; total];
    let mut split = vec![vec![0u32; k]; total];
    for id in 0..total {
        cost[id][0] = base[id];
    }
    for id in tree.merges() {
        let (l, r) = tree.children(id).expect("internal node");
        let (cl, cr) = (tree.member_count(l), tree.member_count(r));
        let top = k.min(cl + cr);
        for kp in 2..=top {
            let lo = kp.saturating_sub(cr).max(1);
            let hi = (kp - 1).min(cl);
            let mut best = f64::INFINITY;
            let mut best_s = 0u32;
            for s in lo..=hi {
                let a = cost[l][s - 1];
                let b = cost[r][kp - s - 1];
                let cand = if max_agg { a.max(b) } else { a + b };
                if cand < best {
                    best = cand;
                    best_s = s as u32;
                }
            }
            cost[id][kp - 1] = best;
            split[id][kp - 1] = best_s;
        }
    }
    Ok(PruningTable { k, cost, split })
}

/// Optimal k-pruning of the tree: a clustering whose every cluster is
/// exactly one tree node's member set, of minimal aggregate cost among all
/// such k-prunings.
pub fn best_k_pruning(
    tree: &Dendrogram,
    inst: &Instance,
    obj: &Objective,
    k: usize,
) -> Result<Clustering> {
    let table = pruning_table(tree, inst, obj, k)?;
    let n = tree.n();
    let mut labels = vec![usize::MAX; n];
    let mut next_id = 0usize;
    let mut stack = vec![(tree.root(), k)];
    while let Some((node, kp)) = stack.pop() {
        if kp == 1 {
            for p in tree.members(node) {
                labels[p] = next_id;
            }
            next_id += 1;
        } else {
            let s = table.split(node, kp).expect("feasible split exists");
            let (l, r) = tree.children(node).expect("kp >= 2 needs an internal node");
            stack.push((r, kp - s));
            stack.push((l, s));
        }
    }
    debug_assert_eq!(next_id, k);
    let clustering = Clustering::from_labels(inst, labels, obj)?;
    // the DP runs unweighted; a uniform weight scales the final total
    let weight_scale = match (&obj.weights, obj.kind.aggregation()) {
        (Some(w), Aggregation::Sum) => w[0],
        _ => 1.0,
    };
    debug_assert!(
        (clustering.total_cost - weight_scale * table.cost(tree.root(), k)).abs()
            <= 1e-9 * clustering.total_cost.abs().max(1.0),
        "DP value {} differs from recomputed cost {}",
        weight_scale * table.cost(tree.root(), k),
        clustering.total_cost
    );
    Ok(clustering)
}

/// The end-to-end solver: full single-linkage tree, then best k-pruning.
/// On instances whose optimal clustering is min-stable this recovers the
/// exact optimum.
pub fn solve(inst: &Instance, obj: &Objective, k: usize) -> Result<Clustering> {
    let tree = single_linkage_tree(inst);
    best_k_pruning(&tree, inst, obj, k)
}

/// Like [`solve`] but reusing an already-built tree.
pub fn solve_with_tree(
    tree: &Dendrogram,
    inst: &Instance,
    obj: &Objective,
    k: usize,
) -> Result<Clustering> {
    best_k_pruning(tree, inst, obj, k)
}

/// The classic baseline: stop the single-linkage merge sequence once k
/// clusters remain and return that partition (labels in first-occurrence
/// order). Provided for comparison; it fails on instances where the solver
/// succeeds.
pub fn naive_single_linkage_at_k(inst: &Instance, k: usize) -> Result<Vec<usize>> {
    let n = inst.n();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let tree = single_linkage_tree(inst);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    let mut clusters = n;
    for id in tree.merges() {
        if clusters == k {
            break;
        }
        let (l, r) = tree.children(id).expect("internal node");
        let (pl, pr) = (first_leaf(&tree, l), first_leaf(&tree, r));
        let (rl, rr) = (find(&mut parent, pl), find(&mut parent, pr));
        debug_assert_ne!(rl, rr);
        parent[rr] = rl;
        clusters -= 1;
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0usize;
    let mut map = vec![usize::MAX; n];
    for p in 0..n {
        let root = find(&mut parent, p);
        if map[root] == usize::MAX {
            map[root] = next;
            next += 1;
        }
        labels[p] = map[root];
    }
    debug_assert_eq!(next, k);
    Ok(labels)
}

fn first_leaf(tree: &Dendrogram, mut node: usize) -> usize {
    while let Some((l, _)) = tree.children(node) {
        node = l;
    }
    match *tree.node(node) {
        crate::linkage::DendroNode::Leaf { point } => point,
        _ => unreachable!(),
    }
}
