//! Ground-truth optimal clustering by exhaustive set-partition enumeration.
//!
//! Partitions are enumerated as restricted-growth strings in lexicographic
//! order, each partition of `[0, n)` into exactly `k` nonempty blocks
//! appearing exactly once; the count is the Stirling number of the second
//! kind S(n, k). Used to verify the solver, the figure instances, and the
//! stability checkers at small n.

use crate::error::{Error, Result};
use crate::metric::Instance;
use crate::objective::{aggregate, cluster_cost, ClusterCost, Objective};
use crate::pruning::Clustering;

/// Default cap on the number of partitions an oracle call may enumerate.
pub const DEFAULT_PARTITION_BUDGET: u128 = 10_000_000;

/// Stirling number of the second kind, saturating at `u128::MAX`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    if k == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    if k > n {
        return 0;
    }
    // S(n, k) = k S(n-1, k) + S(n-1, k-1)
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = (j as u128)
                .saturating_mul(row[j])
                .saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

/// Iterator over restricted-growth strings with exactly `k` blocks.
///
/// `advance` steps to the next partition; `labels` exposes the current one
/// without allocating. The `Iterator` impl clones the labels per item.
pub struct PartitionIter {
    n: usize,
    k: usize,
    /// Restricted-growth string: `a[0] = 0`, `a[i] <= max(a[..i]) + 1`.
    a: Vec<usize>,
    /// `m[i]` = number of distinct values in `a[..=i]`.
    m: Vec<usize>,
    started: bool,
    done: bool,
}

impl PartitionIter {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        Ok(PartitionIter {
            n,
            k,
            a: vec![0; n],
            m: vec![0; n],
            started: false,
            done: false,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.a
    }

    /// Fill positions `from..n` with the lexicographically smallest
    /// completion reaching exactly `k` blocks: zeros until the remaining
    /// slots are all forced to open new blocks.
    fn fill_suffix(&mut self, from: usize) {
        let mut blocks = if from == 0 { 0 } else { self.m[from - 1] };
        for j in from..self.n {
            let keep = blocks.max(1); // block count after choosing value 0
            if keep + (self.n - j - 1) >= self.k {
                self.a[j] = 0;
                blocks = keep;
            } else {
                self.a[j] = blocks;
                blocks += 1;
            }
            self.m[j] = blocks;
        }
        debug_assert_eq!(blocks, self.k);
    }

    /// Step to the next partition; false when exhausted.
    ///
    /// At an incrementable position of a valid string the single increment
    /// is always completable to exactly `k` blocks, so the scan never needs
    /// to skip values.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            self.fill_suffix(0);
            return true;
        }
        for i in (1..self.n).rev() {
            let cap = self.m[i - 1].min(self.k - 1);
            if self.a[i] < cap {
                self.a[i] += 1;
                self.m[i] = self.m[i - 1].max(self.a[i] + 1);
                self.fill_suffix(i + 1);
                return true;
            }
        }
        self.done = true;
        false
    }
}

impl Iterator for PartitionIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.advance() {
            Some(self.a.clone())
        } else {
            None
        }
    }
}

/// Enumerate all partitions of `[0, n)` into exactly `k` nonempty blocks,
/// rejecting requests whose partition count exceeds `budget`.
pub fn enumerate_partitions(n: usize, k: usize, budget: u128) -> Result<PartitionIter> {
    let count = stirling2(n, k);
    if count > budget {
        return Err(Error::BudgetExceeded {
            required: count,
            budget,
            unit: "partitions",
            hint: "raise the oracle budget or shrink the instance",
        });
    }
    PartitionIter::new(n, k)
}

/// Result of the brute-force oracle.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub clustering: Clustering,
    /// True iff no other partition attains exactly the same cost.
    pub unique: bool,
    /// True iff some other partition comes within 1e-12 relative of the
    /// optimum without tying it exactly (floating-point caution flag).
    pub near_tie: bool,
    pub partitions_examined: u128,
}

/// Exhaustively find the minimum-cost k-partition. Ties keep the first
/// partition in restricted-growth-string order.
pub fn optimal_clustering_bruteforce(
    inst: &Instance,
    obj: &Objective,
    k: usize,
    budget: u128,
) -> Result<OracleSolution> {
    let n = inst.n();
    let mut iter = enumerate_partitions(n, k, budget)?;
    let mut best_cost = f64::INFINITY;
    let mut best_labels: Vec<usize> = Vec::new();
    let mut ties = 0u64;
    let mut runner_up = f64::INFINITY;
    let mut examined = 0u128;
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    while iter.advance() {
        examined += 1;
        let labels = iter.labels();
        for b in blocks.iter_mut() {
            b.clear();
        }
        for (p, &id) in labels.iter().enumerate() {
            blocks[id].push(p);
        }
        let mut costs: Vec<ClusterCost> = Vec::with_capacity(k);
        for b in &blocks {
            costs.push(cluster_cost(inst, b, obj)?);
        }
        let total = aggregate(&costs, obj)?;
        if total < best_cost {
            if best_cost.is_finite() {
                runner_up = runner_up.min(best_cost);
            }
            best_cost = total;
            best_labels = labels.to_vec();
            ties = 0;
        } else if total == best_cost {
            ties += 1;
        } else {
            runner_up = runner_up.min(total);
        }
    }
    let clustering = Clustering::from_labels(inst, best_labels, obj)?;
    let near_tie = runner_up.is_finite()
        && runner_up != best_cost
        && (runner_up - best_cost) <= 1e-12 * best_cost.abs().max(runner_up.abs());
    Ok(OracleSolution {
        clustering,
        unique: ties == 0,
        near_tie,
        partitions_examined: examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CenterPolicy, SourceMetric};
    use crate::pruning::{canonical_partition, solve};
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn stirling_table() {
        assert_eq!(stirling2(3, 2), 3);
        assert_eq!(stirling2(4, 2), 7);
        assert_eq!(stirling2(5, 3), 25);
        assert_eq!(stirling2(10, 3), 9330);
        assert_eq!(stirling2(12, 4), 611_501);
        assert_eq!(stirling2(0, 0), 1);
        assert_eq!(stirling2(5, 0), 0);
        assert_eq!(stirling2(3, 4), 0);
    }

    #[test]
    fn partitions_of_three_into_two() {
        let got: Vec<Vec<usize>> = PartitionIter::new(3, 2).unwrap().collect();
        assert_eq!(got, vec![vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]],);
    }

    #[test]
    fn partition_counts_match_stirling_recurrence() {
        // duplicate-free exhaustive enumeration for every (n, k) up to 12
        for n in 1..=12usize {
            let mut bell = 0u128;
            for k in 1..=n {
                let mut seen = HashSet::new();
                let mut iter = PartitionIter::new(n, k).unwrap();
                let mut count = 0u128;
                while iter.advance() {
                    let labels = iter.labels().to_vec();
                    // valid restricted-growth string with exactly k blocks
                    assert_eq!(labels[0], 0);
                    let mut maxv = 0;
                    for w in labels.windows(2) {
                        assert!(w[1] <= maxv + 1);
                        maxv = maxv.max(w[1]);
                    }
                    assert_eq!(maxv + 1, k);
                    assert!(seen.insert(labels));
                    count += 1;
                }
                assert_eq!(count, stirling2(n, k), "n={n} k={k}");
                bell += count;
            }
            // cross-check the row sum against the Bell recurrence oracle
            let expected_bell: u128 = (1..=n).map(|k| stirling2(n, k)).sum();
            assert_eq!(bell, expected_bell);
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            enumerate_partitions(30, 10, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    fn line(coords: &[f64]) -> Instance {
        Instance::from_points(
            "line",
            coords.iter().map(|&x| vec![x]).collect(),
            SourceMetric::Euclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap()
    }

    #[test]
    fn uniqueness_and_near_tie_flags() {
        // two exactly tied optimal partitions: {0,1},{2,3} and {0,2},{1,3}
        let tied = Instance::from_matrix(
            "tied",
            vec![
                vec![0.0, 1.0, 1.0, 5.0],
                vec![1.0, 0.0, 5.0, 1.0],
                vec![1.0, 5.0, 0.0, 1.0],
                vec![5.0, 1.0, 1.0, 0.0],
            ],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let sol = optimal_clustering_bruteforce(&tied, &Objective::kmedian(), 2, 1000).unwrap();
        assert_eq!(sol.clustering.total_cost, 2.0);
        assert!(!sol.unique);

        // optimal 2, runner-up 2 + 2e-13: within the 1e-12 relative window
        let eps = 1e-13;
        let near = Instance::from_matrix(
            "near",
            vec![
                vec![0.0, 1.0, 1.0 + eps, 5.0],
                vec![1.0, 0.0, 5.0, 1.0 + eps],
                vec![1.0 + eps, 5.0, 0.0, 1.0],
                vec![5.0, 1.0 + eps, 1.0, 0.0],
            ],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let sol = optimal_clustering_bruteforce(&near, &Objective::kmedian(), 2, 1000).unwrap();
        assert!(sol.unique);
        assert!(sol.near_tie);
    }

    #[test]
    fn oracle_on_a_line() {
        let inst = line(&[0.0, 1.0, 10.0]);
        let sol =
            optimal_clustering_bruteforce(&inst, &Objective::kmedian(), 2, 1_000_000).unwrap();
        assert_eq!(sol.clustering.canonical_blocks(), vec![vec![0, 1], vec![2]]);
        assert_eq!(sol.clustering.total_cost, 1.0);
        assert!(sol.unique);
        assert_eq!(sol.partitions_examined, 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_oracle_cost_is_a_lower_bound_for_solve(
            points in (2usize..=8).prop_flat_map(|n| proptest::collection::vec(
                proptest::collection::vec(-20.0f64..20.0, 2), n)),
            k in 1usize..=3,
        ) {
            let inst = Instance::from_points("p", points, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let k = k.min(inst.n());
            for obj in [Objective::kmedian(), Objective::kcenter()] {
                let oracle = optimal_clustering_bruteforce(&inst, &obj, k, 1_000_000).unwrap();
                let tree_sol = solve(&inst, &obj, k).unwrap();
                prop_assert!(oracle.clustering.total_cost <= tree_sol.total_cost + 1e-9);
            }
        }

        #[test]
        fn prop_oracle_invariant_under_relabeling(
            points in (3usize..=7).prop_flat_map(|n| proptest::collection::vec(
                proptest::collection::vec(-20.0f64..20.0, 2), n)),
            rot in 0usize..7,
        ) {
            let n = points.len();
            let k = 2;
            let inst = Instance::from_points("p", points.clone(), SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let sol = optimal_clustering_bruteforce(&inst, &Objective::kmedian(), k, 1_000_000).unwrap();
            // permute points by a rotation, solve, and map the partition back
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let permuted: Vec<Vec<f64>> = (0..n).map(|i| points[perm[i]].clone()).collect();
            let pinst = Instance::from_points("q", permuted, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let psol = optimal_clustering_bruteforce(&pinst, &Objective::kmedian(), k, 1_000_000).unwrap();
            if sol.unique {
                let mut unmapped = vec![0usize; n];
                for i in 0..n {
                    unmapped[perm[i]] = psol.clustering.labels[i];
                }
                prop_assert_eq!(
                    canonical_partition(&unmapped),
                    sol.clustering.canonical_blocks()
                );
            }
        }
    }
}
