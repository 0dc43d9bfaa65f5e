//! Exact center-based clustering for perturbation-stable instances.
//!
//! Center-based objectives (k-median, k-means, k-center) are NP-hard in
//! general, but instances whose optimal clustering survives bounded
//! multiplicative distortion of the metric are solvable exactly: build the
//! *complete* single-linkage merge tree, then pick the best k-pruning of it
//! by dynamic programming. This crate implements that solver together with
//! the diagnostics needed to tell when its answer is trustworthy, a
//! brute-force oracle for desk-scale verification, and generators for the
//! instance families used throughout the test suite.
//!
//! Module map:
//!
//! * [`metric`] — instances (dense symmetric matrices, optional coordinate
//!   backing), metric validation, multiplicative perturbation operators.
//! * [`linkage`] — the full single-linkage dendrogram.
//! * [`objective`] — per-cluster costs and sum/max aggregation.
//! * [`pruning`] — the best-k-pruning DP, the solver, and the naive
//!   stop-at-k single-linkage baseline.
//! * [`stability`] — center-proximity factor, separation check,
//!   min-stability (exact and via the tree), randomized resilience probe.
//! * [`oracle`] — exhaustive set-partition enumeration.
//! * [`generate`] — counterexample metrics, well-separated instance
//!   families, and the coverage-reduction metric.
//!
//! # Example
//!
//! ```
//! use stablecluster::{Instance, Objective, SourceMetric, CenterPolicy};
//! use stablecluster::{solve, optimal_clustering_bruteforce};
//!
//! // two tight groups on a line
//! let points = vec![vec![0.0], vec![0.6], vec![10.0], vec![10.7]];
//! let inst = Instance::from_points(
//!     "pairs", points, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly,
//! ).unwrap();
//!
//! let clustering = solve(&inst, &Objective::kmedian(), 2).unwrap();
//! let oracle = optimal_clustering_bruteforce(&inst, &Objective::kmedian(), 2, 1_000).unwrap();
//! assert!(clustering.same_partition(&oracle.clustering));
//! ```

pub mod error;
pub mod generate;
pub mod linkage;
pub mod metric;
pub mod objective;
pub mod oracle;
pub mod pruning;
pub mod stability;

pub use error::{Error, Result};
pub use generate::{
    fig2, fig2_optimal_labels, fig3, fig3_analytic_cost, fig3_component_ranges, fig3_default,
    fig3_intended_labels, gen_coverage, gen_resilient, Fig3Accounting, ResilientInstance,
    ResilientParams,
};
pub use linkage::{single_linkage_tree, DendroNode, Dendrogram};
pub use metric::{
    blowup_within_cluster, d_min, mix_seed, perturb, validate_metric, CenterPolicy, Instance,
    MetricReport, MetricViolation, PerturbMode, PerturbationSpec, SourceMetric, MAX_POINTS,
};
pub use objective::{
    aggregate, cluster_cost, Aggregation, Center, ClusterCost, Objective, ObjectiveKind,
};
pub use oracle::{
    enumerate_partitions, optimal_clustering_bruteforce, stirling2, OracleSolution, PartitionIter,
    DEFAULT_PARTITION_BUDGET,
};
pub use pruning::{
    best_k_pruning, canonical_partition, naive_single_linkage_at_k, pruning_table, solve,
    solve_with_tree, Clustering, PruningTable,
};
pub use stability::{
    check_corollary_separation, check_min_stability_exact, check_min_stability_via_tree,
    proximity_factor, resilience_probe, stability_report, verify_witness, MinStabilityOutcome,
    MinStabilityWitness, ProbeOptions, ProbeReport, SeparationCheck, StabilityReport,
    DEFAULT_PROBE_ORACLE_MAX_N, DEFAULT_SUBSET_BUDGET,
};
