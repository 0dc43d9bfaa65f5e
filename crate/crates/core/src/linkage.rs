//! The full single-linkage merge tree.
//!
//! Single linkage repeatedly merges the two clusters `C, C'` minimizing
//! `d_min(C, C')` until one cluster remains, recording every merge in a
//! binary dendrogram. The implementation runs Prim's algorithm over the
//! dense matrix (O(n^2)), sorts the spanning-tree edges, and replays them
//! through a union-find: the multiset of merge heights equals the multiset
//! of MST edge weights, and heights are copied verbatim from matrix entries
//! so the monotonicity invariant is exact.
//!
//! Ties between equal merge heights are broken by the smallest
//! (min-leaf-index of the first cluster, then of the second) pair, and every
//! merge performed at a height shared with another pending candidate is
//! counted in [`Dendrogram::tie_merges`]. No recovery guarantee is claimed
//! under ties; the count is diagnostic.

use serde::Serialize;

use crate::metric::Instance;

/// One node of the merge tree: either an input point or a recorded merge.
#[derive(Debug, Clone, PartialEq)]
pub enum DendroNode {
    Leaf {
        point: usize,
    },
    Internal {
        left: usize,
        right: usize,
        height: f64,
        count: usize,
    },
}

/// The complete single-linkage tree: `n` leaves (ids `0..n`) followed by
/// `n - 1` internal nodes (ids `n..2n-1`) in merge order; the root is the
/// last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    nodes: Vec<DendroNode>,
    tie_merges: usize,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total node count, `2n - 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: usize) -> &DendroNode {
        &self.nodes[id]
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        id < self.n
    }

    /// Internal node ids in the order the merges happened.
    pub fn merges(&self) -> std::ops::Range<usize> {
        self.n..self.nodes.len()
    }

    pub fn member_count(&self, id: usize) -> usize {
        match self.nodes[id] {
            DendroNode::Leaf { .. } => 1,
            DendroNode::Internal { count, .. } => count,
        }
    }

    pub fn height(&self, id: usize) -> f64 {
        match self.nodes[id] {
            DendroNode::Leaf { .. } => 0.0,
            DendroNode::Internal { height, .. } => height,
        }
    }

    pub fn children(&self, id: usize) -> Option<(usize, usize)> {
        match self.nodes[id] {
            DendroNode::Leaf { .. } => None,
            DendroNode::Internal { left, right, .. } => Some((left, right)),
        }
    }

    /// Leaf point indices under `id`, sorted ascending.
    pub fn members(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.member_count(id));
        let mut stack = vec![id];
        while let Some(node) = stack.pop() {
            match self.nodes[node] {
                DendroNode::Leaf { point } => out.push(point),
                DendroNode::Internal { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Merge heights in merge order.
    pub fn merge_heights(&self) -> Vec<f64> {
        self.merges().map(|id| self.height(id)).collect()
    }

    /// Number of merges performed at a height shared with at least one other
    /// pending merge candidate (distance ties).
    pub fn tie_merges(&self) -> usize {
        self.tie_merges
    }

    /// JSON dump: one record per node, `{"id", "kind", "children", "height"}`.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct DumpNode {
            id: usize,
            kind: &'static str,
            children: Vec<usize>,
            height: f64,
        }
        let nodes: Vec<DumpNode> = (0..self.len())
            .map(|id| DumpNode {
                id,
                kind: if self.is_leaf(id) { "leaf" } else { "internal" },
                children: self
                    .children(id)
                    .map(|(l, r)| vec![l, r])
                    .unwrap_or_default(),
                height: self.height(id),
            })
            .collect();
        serde_json::to_string_pretty(&nodes).expect("dendrogram serialization cannot fail")
    }
}

struct Dsu {
    parent: Vec<usize>,
    /// Smallest leaf index in the component, only meaningful at roots.
    min_leaf: Vec<usize>,
    /// Dendrogram node id currently representing the component.
    node: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
            min_leaf: (0..n).collect(),
            node: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize, new_node: usize) {
        let (a, b) = (self.find(a), self.find(b));
        debug_assert_ne!(a, b);
        self.parent[b] = a;
        self.min_leaf[a] = self.min_leaf[a].min(self.min_leaf[b]);
        self.node[a] = new_node;
    }
}

/// Build the complete single-linkage tree of an instance.
///
/// Deterministic: equal-height merges are processed in order of the
/// (min-leaf of first cluster, min-leaf of second cluster) pair key.
pub fn single_linkage_tree(inst: &Instance) -> Dendrogram {
    let n = inst.n();
    let mut nodes: Vec<DendroNode> = (0..n).map(|point| DendroNode::Leaf { point }).collect();
    if n == 1 {
        return Dendrogram {
            n,
            nodes,
            tie_merges: 0,
        };
    }

    // Prim over the dense matrix, O(n^2) time, O(n) extra space.
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    in_tree[0] = true;
    for v in 1..n {
        best_dist[v] = inst.d(0, v);
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best_dist[v] < pick_d {
                pick = v;
                pick_d = best_dist[v];
            }
        }
        in_tree[pick] = true;
        edges.push((pick_d, best_from[pick], pick));
        for v in 0..n {
            if !in_tree[v] {
                let d = inst.d(pick, v);
                if d < best_dist[v] {
                    best_dist[v] = d;
                    best_from[v] = pick;
                }
            }
        }
    }

    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut dsu = Dsu::new(n);
    let mut tie_merges = 0usize;
    let mut i = 0;
    while i < edges.len() {
        let h = edges[i].0;
        let mut j = i + 1;
        while j < edges.len() && edges[j].0 == h {
            j += 1;
        }
        let group = j - i;
        if group > 1 {
            tie_merges += group;
        }
        // Replay the equal-height group smallest cluster-pair key first,
        // re-evaluating keys after every merge since components change.
        let mut pending: Vec<(usize, usize)> = edges[i..j].iter().map(|e| (e.1, e.2)).collect();
        while !pending.is_empty() {
            let mut best = 0;
            let mut best_key = (usize::MAX, usize::MAX);
            for (idx, &(u, v)) in pending.iter().enumerate() {
                let (ru, rv) = (dsu.find(u), dsu.find(v));
                let (a, b) = (dsu.min_leaf[ru], dsu.min_leaf[rv]);
                let key = (a.min(b), a.max(b));
                if key < best_key {
                    best_key = key;
                    best = idx;
                }
            }
            let (u, v) = pending.swap_remove(best);
            let (ru, rv) = (dsu.find(u), dsu.find(v));
            debug_assert_ne!(ru, rv, "spanning-tree edges never close a cycle");
            // child order: smaller min-leaf first
            let (first, second) = if dsu.min_leaf[ru] <= dsu.min_leaf[rv] {
                (ru, rv)
            } else {
                (rv, ru)
            };
            let new_id = nodes.len();
            nodes.push(DendroNode::Internal {
                left: dsu.node[first],
                right: dsu.node[second],
                height: h,
                count: dsu_count(&nodes, dsu.node[first]) + dsu_count(&nodes, dsu.node[second]),
            });
            dsu.union(ru, rv, new_id);
        }
        i = j;
    }

    Dendrogram {
        n,
        nodes,
        tie_merges,
    }
}

fn dsu_count(nodes: &[DendroNode], id: usize) -> usize {
    match nodes[id] {
        DendroNode::Leaf { .. } => 1,
        DendroNode::Internal { count, .. } => count,
    }
}
