//! Stability diagnostics: the center-proximity factor, the inter-cluster
//! separation check it implies, min-stability (exact subset enumeration and
//! the single-linkage-tree shortcut), and a randomized perturbation-
//! resilience probe.
//!
//! All distance ratios are taken in the underlying metric: on
//! squared-euclidean instances the square root of the stored entry is used,
//! and coordinate centers are measured with the euclidean norm.
//! Min-stability compares raw stored entries, which is equivalent under any
//! monotone rescaling.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linkage::single_linkage_tree;
use crate::metric::{mix_seed, perturb, point_to_coords, CenterPolicy, Instance, PerturbationSpec};
use crate::objective::{Center, Objective};
use crate::oracle::{optimal_clustering_bruteforce, stirling2, DEFAULT_PARTITION_BUDGET};
use crate::pruning::{solve, Clustering};

/// Default cap on subset evaluations for the exact min-stability checker:
/// clusters of up to 20 points.
pub const DEFAULT_SUBSET_BUDGET: u128 = 1 << 20;

/// Largest instance the resilience probe will re-solve with the oracle
/// unless the caller opts into the tree solver.
pub const DEFAULT_PROBE_ORACLE_MAX_N: usize = 12;

fn point_center_distance(inst: &Instance, p: usize, center: &Center) -> Result<f64> {
    match center {
        Center::Point(c) => {
            if *c >= inst.n() {
                return Err(Error::IndexOutOfRange {
                    index: *c,
                    n: inst.n(),
                });
            }
            Ok(inst.metric_d(p, *c))
        }
        Center::Coords(x) => {
            let points = inst.points().ok_or(Error::SteinerUnsupported(
                "coordinate centers need a coordinate-backed instance",
            ))?;
            Ok(point_to_coords(&points[p], x))
        }
    }
}

/// Largest alpha for which the clustering satisfies alpha-center proximity:
/// the minimum over points `p` and non-home centers `c_j` of
/// `d(p, c_j) / d(p, c_home)`.
///
/// Degenerate ratios: home distance zero with a positive other distance
/// contributes +inf; two zeros contribute 1.
pub fn proximity_factor(inst: &Instance, clustering: &Clustering) -> Result<f64> {
    if clustering.k < 2 {
        return Err(Error::KTooSmall {
            k: clustering.k,
            min: 2,
        });
    }
    if clustering.labels.len() != inst.n() {
        return Err(Error::LabelLengthMismatch {
            got: clustering.labels.len(),
            expected: inst.n(),
        });
    }
    let mut factor = f64::INFINITY;
    for (p, &home) in clustering.labels.iter().enumerate() {
        let d_home = point_center_distance(inst, p, &clustering.centers[home])?;
        for (j, center) in clustering.centers.iter().enumerate() {
            if j == home {
                continue;
            }
            let d_other = point_center_distance(inst, p, center)?;
            let ratio = if d_home == 0.0 {
                if d_other == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                d_other / d_home
            };
            if ratio < factor {
                factor = ratio;
            }
        }
    }
    Ok(factor)
}

/// Result of the separation check implied by alpha-center proximity.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationCheck {
    /// All ordered inter-cluster pairs satisfy
    /// `d(p, p') > (alpha - 1) d(p, c_home(p))`.
    pub ok: bool,
    /// Minimum over ordered inter-cluster pairs of
    /// `d(p, p') / d(p, c_home(p))` (ratio conventions as in
    /// [`proximity_factor`]).
    pub margin: f64,
    /// The pair (p, p') minimizing the ratio.
    pub worst_pair: Option<(usize, usize)>,
}

/// Check `d(p, p') > (alpha - 1) d(p, c_home(p))` for every ordered
/// inter-cluster pair.
pub fn check_corollary_separation(
    inst: &Instance,
    clustering: &Clustering,
    alpha: f64,
) -> Result<SeparationCheck> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if clustering.labels.len() != inst.n() {
        return Err(Error::LabelLengthMismatch {
            got: clustering.labels.len(),
            expected: inst.n(),
        });
    }
    let n = inst.n();
    let mut home_dist = Vec::with_capacity(n);
    for (p, &home) in clustering.labels.iter().enumerate() {
        home_dist.push(point_center_distance(inst, p, &clustering.centers[home])?);
    }
    let mut ok = true;
    let mut margin = f64::INFINITY;
    let mut worst = None;
    for p in 0..n {
        for q in 0..n {
            if p == q || clustering.labels[p] == clustering.labels[q] {
                continue;
            }
            let d = inst.metric_d(p, q);
            if !(d > (alpha - 1.0) * home_dist[p]) {
                ok = false;
            }
            let ratio = if home_dist[p] == 0.0 {
                if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                d / home_dist[p]
            };
            if ratio < margin {
                margin = ratio;
                worst = Some((p, q));
            }
        }
    }
    Ok(SeparationCheck {
        ok,
        margin,
        worst_pair: worst,
    })
}

/// A reproducible violation of min-stability: for subset `A` of cluster
/// `cluster`, the nearest outside point lies in cluster `other` rather than
/// in the rest of `cluster`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinStabilityWitness {
    pub cluster: usize,
    pub subset: Vec<usize>,
    pub other: usize,
    /// `d_min(A, C \ A)` in stored units.
    pub within: f64,
    /// `d_min(A, C')` in stored units.
    pub across: f64,
}

/// Verdict of the exact min-stability checker.
#[derive(Debug, Clone)]
pub struct MinStabilityOutcome {
    pub stable: bool,
    pub witness: Option<MinStabilityWitness>,
    /// Some binding comparison held with equality; tree recovery under
    /// distance ties is not guaranteed either way.
    pub ties: bool,
    pub subsets_checked: u128,
}

/// Exact Def.-style check: for every cluster `C`, every proper nonempty
/// subset `A` of `C`, and every other cluster `C'`,
/// `d_min(A, C \ A) <= d_min(A, C')`.
///
/// Subsets are enumerated per cluster in Gray-code order; the inner pair
/// scan stops early once the within-distance provably beats the outside
/// distance. Rejects inputs whose total subset count exceeds `budget`
/// (use [`check_min_stability_via_tree`] instead for those).
pub fn check_min_stability_exact(
    inst: &Instance,
    clustering: &Clustering,
    budget: u128,
) -> Result<MinStabilityOutcome> {
    if clustering.labels.len() != inst.n() {
        return Err(Error::LabelLengthMismatch {
            got: clustering.labels.len(),
            expected: inst.n(),
        });
    }
    let blocks = clustering.blocks();
    let mut required: u128 = 0;
    for b in &blocks {
        if b.len() >= 2 {
            required = required.saturating_add(1u128 << b.len().min(127));
        }
    }
    if required > budget || blocks.iter().any(|b| b.len() > 62) {
        return Err(Error::BudgetExceeded {
            required,
            budget,
            unit: "subset evaluations",
            hint: "use check_min_stability_via_tree for large clusters",
        });
    }

    let mut ties = false;
    let mut subsets_checked: u128 = 0;
    for (ci, members) in blocks.iter().enumerate() {
        let s = members.len();
        if s < 2 {
            continue;
        }
        // nearest point in each other cluster, per member
        let mut min_out = vec![vec![f64::INFINITY; blocks.len()]; s];
        for (a, &p) in members.iter().enumerate() {
            for (cj, other) in blocks.iter().enumerate() {
                if cj == ci {
                    continue;
                }
                let mut best = f64::INFINITY;
                for &q in other {
                    let d = inst.d(p, q);
                    if d < best {
                        best = d;
                    }
                }
                min_out[a][cj] = best;
            }
        }
        // Gray-code walk over proper nonempty subsets of the cluster
        let full: u64 = (1u64 << s) - 1;
        for i in 1..(1u64 << s) {
            let mask = i ^ (i >> 1);
            if mask == full {
                continue;
            }
            subsets_checked += 1;
            // d_min(A, every other cluster), then take the binding one
            let mut out_best = f64::INFINITY;
            let mut out_cluster = usize::MAX;
            for cj in 0..blocks.len() {
                if cj == ci {
                    continue;
                }
                let mut d = f64::INFINITY;
                let mut bits = mask;
                while bits != 0 {
                    let a = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if min_out[a][cj] < d {
                        d = min_out[a][cj];
                    }
                }
                if d < out_best {
                    out_best = d;
                    out_cluster = cj;
                }
            }
            // d_min(A, C \ A); stop as soon as it drops strictly below
            let mut within = f64::INFINITY;
            let mut bits = mask;
            'scan: while bits != 0 {
                let a = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let comp = full & !mask;
                let mut cbits = comp;
                while cbits != 0 {
                    let b = cbits.trailing_zeros() as usize;
                    cbits &= cbits - 1;
                    let d = inst.d(members[a], members[b]);
                    if d < within {
                        within = d;
                        if within < out_best {
                            break 'scan;
                        }
                    }
                }
            }
            if within > out_best {
                let subset: Vec<usize> = (0..s)
                    .filter(|&a| mask & (1 << a) != 0)
                    .map(|a| members[a])
                    .collect();
                return Ok(MinStabilityOutcome {
                    stable: false,
                    witness: Some(MinStabilityWitness {
                        cluster: ci,
                        subset,
                        other: out_cluster,
                        within,
                        across: out_best,
                    }),
                    ties,
                    subsets_checked,
                });
            }
            if within == out_best {
                ties = true;
            }
        }
    }
    Ok(MinStabilityOutcome {
        stable: true,
        witness: None,
        ties,
        subsets_checked,
    })
}

/// Re-evaluate a witness against the instance; true iff it indeed violates
/// min-stability.
pub fn verify_witness(
    inst: &Instance,
    clustering: &Clustering,
    witness: &MinStabilityWitness,
) -> Result<bool> {
    let blocks = clustering.blocks();
    let cluster = blocks.get(witness.cluster).ok_or(Error::InvalidClustering(
        "witness cluster out of range".into(),
    ))?;
    let rest: Vec<usize> = cluster
        .iter()
        .copied()
        .filter(|p| !witness.subset.contains(p))
        .collect();
    let other = blocks.get(witness.other).ok_or(Error::InvalidClustering(
        "witness other-cluster out of range".into(),
    ))?;
    let within = crate::metric::d_min(inst, &witness.subset, &rest)?;
    let across = crate::metric::d_min(inst, &witness.subset, other)?;
    Ok(within > across)
}

/// Tree shortcut: the clustering is min-stable-recoverable iff every one of
/// its clusters appears as a node of the single-linkage tree.
pub fn check_min_stability_via_tree(inst: &Instance, clustering: &Clustering) -> Result<bool> {
    if clustering.labels.len() != inst.n() {
        return Err(Error::LabelLengthMismatch {
            got: clustering.labels.len(),
            expected: inst.n(),
        });
    }
    let tree = single_linkage_tree(inst);
    let node_sets: std::collections::HashSet<Vec<usize>> =
        (0..tree.len()).map(|id| tree.members(id)).collect();
    Ok(clustering
        .canonical_blocks()
        .into_iter()
        .all(|block| node_sets.contains(&block)))
}

/// Options for [`resilience_probe`].
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    /// Re-solve with the oracle only up to this size.
    pub oracle_max_n: usize,
    /// Partition budget for oracle re-solves.
    pub partition_budget: u128,
    /// Fall back to the tree solver above `oracle_max_n`. The tree solver
    /// is exact only under stability, so probe failures reported through it
    /// are indicative, not conclusive.
    pub allow_tree_solver: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            oracle_max_n: DEFAULT_PROBE_ORACLE_MAX_N,
            partition_budget: DEFAULT_PARTITION_BUDGET,
            allow_tree_solver: false,
        }
    }
}

/// Outcome of the randomized resilience probe. Zero failures is necessary
/// evidence of alpha-perturbation resilience, never proof: the definition
/// quantifies over every perturbation, the probe samples finitely many.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: u32,
    pub alpha: f64,
    pub failures: u32,
    pub failing_seeds: Vec<u64>,
    /// True when re-solves used the tree solver instead of the oracle.
    pub used_tree_solver: bool,
}

/// Sample `trials` random alpha-perturbations, re-solve each, and count the
/// trials whose optimal partition differs from the unperturbed optimum.
/// Each trial's perturbation seed derives from `(seed, trial index)`;
/// failing seeds reproduce via [`perturb`] with `random_uniform`.
pub fn resilience_probe(
    inst: &Instance,
    obj: &Objective,
    k: usize,
    alpha: f64,
    trials: u32,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if inst.center_policy() == CenterPolicy::SteinerCentroid {
        return Err(Error::PerturbSteiner);
    }
    let n = inst.n();
    let use_oracle = n <= opts.oracle_max_n && stirling2(n, k) <= opts.partition_budget;
    if !use_oracle && !opts.allow_tree_solver {
        return Err(Error::BudgetExceeded {
            required: stirling2(n, k),
            budget: opts.partition_budget,
            unit: "partitions per probe trial",
            hint:
                "set allow_tree_solver to probe with the tree solver (exact only under stability)",
        });
    }
    let resolve = |instance: &Instance| -> Result<Clustering> {
        if use_oracle {
            Ok(optimal_clustering_bruteforce(instance, obj, k, opts.partition_budget)?.clustering)
        } else {
            solve(instance, obj, k)
        }
    };
    let baseline = resolve(inst)?;
    let outcomes: Vec<Result<Option<u64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = mix_seed(seed, t as u64);
            let perturbed = perturb(inst, &PerturbationSpec::random_uniform(alpha, trial_seed))?;
            let re_solved = resolve(&perturbed)?;
            Ok((!re_solved.same_partition(&baseline)).then_some(trial_seed))
        })
        .collect();
    let mut failing_seeds = Vec::new();
    for outcome in outcomes {
        if let Some(s) = outcome? {
            failing_seeds.push(s);
        }
    }
    Ok(ProbeReport {
        trials,
        alpha,
        failures: failing_seeds.len() as u32,
        failing_seeds,
        used_tree_solver: !use_oracle,
    })
}

/// Everything the `check` command reports about a clustering.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub proximity_factor: f64,
    pub min_stable: bool,
    /// "exact" or "tree", depending on which checker ran.
    pub min_stability_method: &'static str,
    pub witness: Option<MinStabilityWitness>,
    /// Equality ties seen by the exact checker (tree recovery under ties is
    /// unresolved, so these deserve attention).
    pub ties: bool,
    pub corollary_margin: f64,
    pub corollary_worst_pair: Option<(usize, usize)>,
    /// Separation check verdict at the requested alpha, when one was given.
    pub corollary_ok_at_alpha: Option<bool>,
    pub alpha: Option<f64>,
    pub probe: Option<ProbeReport>,
}

/// Build the full report: proximity factor, min-stability (exact within
/// `subset_budget`, tree fallback otherwise), the separation margin, and
/// optionally a probe.
pub fn stability_report(
    inst: &Instance,
    clustering: &Clustering,
    alpha: Option<f64>,
    subset_budget: u128,
    probe: Option<(u32, u64, &ProbeOptions)>,
) -> Result<StabilityReport> {
    let factor = proximity_factor(inst, clustering)?;
    let (min_stable, method, witness, ties) =
        match check_min_stability_exact(inst, clustering, subset_budget) {
            Ok(outcome) => (outcome.stable, "exact", outcome.witness, outcome.ties),
            Err(e) if e.is_budget() => {
                let ok = check_min_stability_via_tree(inst, clustering)?;
                (ok, "tree", None, false)
            }
            Err(e) => return Err(e),
        };
    let separation = check_corollary_separation(inst, clustering, alpha.unwrap_or(1.0))?;
    let probe_report = match probe {
        Some((trials, seed, opts)) if trials > 0 => Some(resilience_probe(
            inst,
            &clustering.objective,
            clustering.k,
            alpha.unwrap_or(1.0),
            trials,
            seed,
            opts,
        )?),
        _ => None,
    };
    Ok(StabilityReport {
        proximity_factor: factor,
        min_stable,
        min_stability_method: method,
        witness,
        ties,
        corollary_margin: separation.margin,
        corollary_worst_pair: separation.worst_pair,
        corollary_ok_at_alpha: alpha.map(|_| separation.ok),
        alpha,
        probe: probe_report,
    })
}

impl Serialize for StabilityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        fn finite_or_string<S: SerializeStruct>(
            s: &mut S,
            key: &'static str,
            v: f64,
        ) -> std::result::Result<(), S::Error> {
            // JSON has no infinity; non-finite factors serialize as strings
            if v.is_finite() {
                s.serialize_field(key, &v)
            } else {
                s.serialize_field(key, &format!("{v}"))
            }
        }
        let mut s = serializer.serialize_struct("StabilityReport", 10)?;
        finite_or_string(&mut s, "proximity_factor", self.proximity_factor)?;
        s.serialize_field("min_stable", &self.min_stable)?;
        s.serialize_field("min_stability_method", &self.min_stability_method)?;
        s.serialize_field("witness", &self.witness)?;
        s.serialize_field("ties", &self.ties)?;
        finite_or_string(&mut s, "corollary_margin", self.corollary_margin)?;
        s.serialize_field("corollary_worst_pair", &self.corollary_worst_pair)?;
        s.serialize_field("corollary_ok_at_alpha", &self.corollary_ok_at_alpha)?;
        s.serialize_field("alpha", &self.alpha)?;
        s.serialize_field("probe", &self.probe)?;
        s.end()
    }
}
