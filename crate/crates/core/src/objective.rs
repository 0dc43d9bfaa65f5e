//! Separable center-based objectives: per-cluster scores with a chosen
//! center, aggregated by a (weighted) sum or a maximum.
//!
//! With data-point centers the candidate set is *all* `n` points, not just
//! the cluster's members — a cluster's best medoid may lie outside it on
//! pathological inputs, and the pruning DP needs costs to be well-defined
//! for arbitrary clusters. Ties among candidate centers go to the lowest
//! index; a singleton's center is the point itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{CenterPolicy, Instance, SourceMetric};

/// Objective family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[serde(rename = "kmedian")]
    KMedian,
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "kcenter")]
    KCenter,
}

/// How per-cluster scores combine into the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Max,
}

impl ObjectiveKind {
    /// Aggregation is a pure function of the kind: sum for k-median and
    /// k-means, max for k-center.
    pub fn aggregation(self) -> Aggregation {
        match self {
            ObjectiveKind::KMedian | ObjectiveKind::KMeans => Aggregation::Sum,
            ObjectiveKind::KCenter => Aggregation::Max,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::KMedian => "kmedian",
            ObjectiveKind::KMeans => "kmeans",
            ObjectiveKind::KCenter => "kcenter",
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmedian" => Ok(ObjectiveKind::KMedian),
            "kmeans" => Ok(ObjectiveKind::KMeans),
            "kcenter" => Ok(ObjectiveKind::KCenter),
            other => Err(Error::BadGeneratorParam(format!(
                "unknown objective {other:?} (expected kmedian|kmeans|kcenter)"
            ))),
        }
    }
}

/// An objective: a kind plus optional positive per-cluster weights
/// (sum aggregation only; defaults to all ones).
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub weights: Option<Vec<f64>>,
}

impl Objective {
    pub fn new(kind: ObjectiveKind) -> Self {
        Objective {
            kind,
            weights: None,
        }
    }

    pub fn kmedian() -> Self {
        Self::new(ObjectiveKind::KMedian)
    }

    pub fn kmeans() -> Self {
        Self::new(ObjectiveKind::KMeans)
    }

    pub fn kcenter() -> Self {
        Self::new(ObjectiveKind::KCenter)
    }

    pub fn with_weights(kind: ObjectiveKind, weights: Vec<f64>) -> Result<Self> {
        if kind.aggregation() == Aggregation::Max {
            return Err(Error::WeightsUnsupported(
                "max aggregation (k-center) takes no weights",
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::WeightsUnsupported("weights must be positive reals"));
        }
        Ok(Objective {
            kind,
            weights: Some(weights),
        })
    }
}

/// A cluster center: a data-point index or free coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Point(usize),
    Coords(Vec<f64>),
}

/// Score of a single cluster together with the center achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCost {
    pub value: f64,
    pub center: Center,
}

/// Per-point contribution under a data-point center, in stored matrix units.
///
/// k-means on a squared-euclidean source uses the entries as-is (they are
/// already squared); on explicit or euclidean sources it squares them.
#[inline]
pub(crate) fn point_term(kind: ObjectiveKind, source: SourceMetric, d: f64) -> f64 {
    match kind {
        ObjectiveKind::KMedian | ObjectiveKind::KCenter => d,
        ObjectiveKind::KMeans => match source {
            SourceMetric::SquaredEuclidean => d,
            _ => d * d,
        },
    }
}

/// Score one cluster: the minimum over candidate centers of the summed (or
/// maximal, for k-center) point terms, or the centroid cost under the
/// steiner policy.
pub fn cluster_cost(inst: &Instance, members: &[usize], obj: &Objective) -> Result<ClusterCost> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let n = inst.n();
    for &index in members {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    match inst.center_policy() {
        CenterPolicy::DataPointsOnly => {
            if members.len() == 1 {
                return Ok(ClusterCost {
                    value: 0.0,
                    center: Center::Point(members[0]),
                });
            }
            let source = inst.source_metric();
            let mut best = f64::INFINITY;
            let mut best_center = 0usize;
            for c in 0..n {
                let row = inst.row(c);
                let score = match obj.kind.aggregation() {
                    Aggregation::Sum => members
                        .iter()
                        .map(|&p| point_term(obj.kind, source, row[p]))
                        .sum::<f64>(),
                    Aggregation::Max => members
                        .iter()
                        .map(|&p| point_term(obj.kind, source, row[p]))
                        .fold(0.0, f64::max),
                };
                if score < best {
                    best = score;
                    best_center = c;
                }
            }
            Ok(ClusterCost {
                value: best,
                center: Center::Point(best_center),
            })
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
            let dim = points[0].len();
            let mut mean = vec![0.0; dim];
            for &p in members {
                for (m, x) in mean.iter_mut().zip(&points[p]) {
                    *m += x;
                }
            }
            let count = members.len() as f64;
            for m in mean.iter_mut() {
                *m /= count;
            }
            let value = members
                .iter()
                .map(|&p| {
                    points[p]
                        .iter()
                        .zip(&mean)
                        .map(|(x, m)| (x - m) * (x - m))
                        .sum::<f64>()
                })
                .sum();
            Ok(ClusterCost {
                value,
                center: Center::Coords(mean),
            })
        }
    }
}

/// Combine per-cluster scores into the objective total.
pub fn aggregate(costs: &[ClusterCost], obj: &Objective) -> Result<f64> {
    if costs.is_empty() {
        return Err(Error::EmptyMembers);
    }
    match obj.kind.aggregation() {
        Aggregation::Sum => {
            if let Some(weights) = &obj.weights {
                if weights.len() != costs.len() {
                    return Err(Error::WeightsLengthMismatch {
                        got: weights.len(),
                        expected: costs.len(),
                    });
                }
                Ok(costs.iter().zip(weights).map(|(c, w)| c.value * w).sum())
            } else {
                Ok(costs.iter().map(|c| c.value).sum())
            }
        }
        Aggregation::Max => {
            if obj.weights.is_some() {
                return Err(Error::WeightsUnsupported(
                    "max aggregation (k-center) takes no weights",
                ));
            }
            Ok(costs.iter().map(|c| c.value).fold(0.0, f64::max))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

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
    fn singleton_costs_zero_with_self_center() {
        let inst = line(&[0.0, 1.0, 3.0]);
        for obj in [
            Objective::kmedian(),
            Objective::kmeans(),
            Objective::kcenter(),
        ] {
            let c = cluster_cost(&inst, &[1], &obj).unwrap();
            assert_eq!(c.value, 0.0);
            assert_eq!(c.center, Center::Point(1));
        }
    }

    #[test]
    fn line_median_center() {
        let inst = line(&[0.0, 1.0, 3.0]);
        let c = cluster_cost(&inst, &[0, 1, 2], &Objective::kmedian()).unwrap();
        assert_eq!(c.center, Center::Point(1));
        assert_eq!(c.value, 3.0);
    }

    #[test]
    fn steiner_centroid_cost() {
        let inst = Instance::from_points(
            "s",
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]],
            SourceMetric::SquaredEuclidean,
            CenterPolicy::SteinerCentroid,
        )
        .unwrap();
        let c = cluster_cost(&inst, &[0, 1, 2], &Objective::kmeans()).unwrap();
        match &c.center {
            Center::Coords(v) => {
                assert!((v[0] - 2.0 / 3.0).abs() < 1e-12);
                assert!((v[1] - 2.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("expected coords center, got {other:?}"),
        }
        // hand check via sum ||p||^2 - n ||mean||^2
        let expected = (0.0 + 4.0 + 4.0) - 3.0 * (8.0 / 9.0);
        assert!((c.value - expected).abs() < 1e-12);
        assert!((c.value - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_agrees_across_source_encodings() {
        // squaring euclidean entries on the fly must match reading
        // already-squared entries directly
        let points = vec![
            vec![0.0, 0.0],
            vec![3.0, 4.0],
            vec![1.0, 7.0],
            vec![2.0, 2.0],
        ];
        let euclid = Instance::from_points(
            "e",
            points.clone(),
            SourceMetric::Euclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let squared = Instance::from_points(
            "s",
            points,
            SourceMetric::SquaredEuclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let members = [0usize, 1, 2, 3];
        let a = cluster_cost(&euclid, &members, &Objective::kmeans()).unwrap();
        let b = cluster_cost(&squared, &members, &Objective::kmeans()).unwrap();
        assert_eq!(a.center, b.center);
        assert!((a.value - b.value).abs() <= 1e-9 * a.value.max(1.0));
    }

    #[test]
    fn aggregate_examples() {
        let costs = vec![
            ClusterCost {
                value: 3.0,
                center: Center::Point(0),
            },
            ClusterCost {
                value: 5.0,
                center: Center::Point(1),
            },
        ];
        assert_eq!(aggregate(&costs, &Objective::kmedian()).unwrap(), 8.0);
        assert_eq!(aggregate(&costs, &Objective::kcenter()).unwrap(), 5.0);
        let weighted = Objective::with_weights(ObjectiveKind::KMedian, vec![2.0, 1.0]).unwrap();
        assert_eq!(aggregate(&costs, &weighted).unwrap(), 11.0);
        assert!(aggregate(&[], &Objective::kmedian()).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(Objective::with_weights(ObjectiveKind::KCenter, vec![1.0]).is_err());
        assert!(Objective::with_weights(ObjectiveKind::KMedian, vec![0.0]).is_err());
        assert!(Objective::with_weights(ObjectiveKind::KMedian, vec![-1.0]).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (3usize..=10).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(-20.0f64..20.0, 2), n).prop_map(
                |pts| {
                    Instance::from_points(
                        "p",
                        pts,
                        SourceMetric::Euclidean,
                        CenterPolicy::DataPointsOnly,
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn prop_cost_monotone_under_adding_points(inst in arb_instance(), extra in 0usize..10) {
            let n = inst.n();
            let extra = extra % n;
            let members: Vec<usize> = (0..n).filter(|&i| i != extra).collect();
            let mut enlarged = members.clone();
            if !enlarged.contains(&extra) {
                enlarged.push(extra);
            }
            for obj in [Objective::kmedian(), Objective::kmeans(), Objective::kcenter()] {
                let small = cluster_cost(&inst, &members, &obj).unwrap();
                let big = cluster_cost(&inst, &enlarged, &obj).unwrap();
                prop_assert!(big.value >= small.value - 1e-12);
            }
        }

        #[test]
        fn prop_scaling_laws(inst in arb_instance(), lambda in 0.1f64..10.0) {
            let n = inst.n();
            let members: Vec<usize> = (0..n).collect();
            let scaled_points: Vec<Vec<f64>> = inst
                .points()
                .unwrap()
                .iter()
                .map(|p| p.iter().map(|x| x * lambda).collect())
                .collect();
            let scaled = Instance::from_points(
                "s",
                scaled_points,
                SourceMetric::Euclidean,
                CenterPolicy::DataPointsOnly,
            )
            .unwrap();
            for (obj, power) in [
                (Objective::kmedian(), 1),
                (Objective::kmeans(), 2),
                (Objective::kcenter(), 1),
            ] {
                let base = cluster_cost(&inst, &members, &obj).unwrap();
                let big = cluster_cost(&scaled, &members, &obj).unwrap();
                let factor = lambda.powi(power);
                prop_assert!((big.value - base.value * factor).abs() <= 1e-7 * (1.0 + base.value * factor));
                prop_assert_eq!(big.center, base.center);
            }
        }
    }

    #[test]
    fn centroid_beats_random_alternatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
            .collect();
        let inst = Instance::from_points(
            "c",
            points.clone(),
            SourceMetric::SquaredEuclidean,
            CenterPolicy::SteinerCentroid,
        )
        .unwrap();
        let members: Vec<usize> = (0..points.len()).collect();
        let best = cluster_cost(&inst, &members, &Objective::kmeans()).unwrap();
        for _ in 0..1000 {
            let alt = vec![rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
            let alt_cost: f64 = members
                .iter()
                .map(|&p| {
                    points[p]
                        .iter()
                        .zip(&alt)
                        .map(|(x, m)| (x - m) * (x - m))
                        .sum::<f64>()
                })
                .sum();
            assert!(best.value <= alt_cost + 1e-9);
        }
    }
}
