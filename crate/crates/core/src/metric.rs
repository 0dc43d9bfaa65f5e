//! Clustering instances: a dense symmetric distance matrix, optional backing
//! coordinates, metric validation, and the multiplicative perturbation
//! operators used by the stability probes.
//!
//! Distances are stored as a full row-major `n x n` matrix of `f64`. The base
//! matrix of an instance is expected to be a metric (validated by
//! [`validate_metric`]); perturbed instances carry a flag that exempts them
//! from the triangle-inequality and coordinate-consistency checks, since a
//! multiplicative perturbation need not preserve either.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on instance size. The solver is quadratic in `n`, so anything
/// beyond this is out of scope for a dense-matrix representation.
pub const MAX_POINTS: usize = 20_000;

/// How the distance matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceMetric {
    /// Distances supplied directly as a matrix, declared to be a metric.
    ExplicitMatrix,
    /// Pairwise euclidean distances of the backing points.
    Euclidean,
    /// Pairwise *squared* euclidean distances of the backing points.
    /// Squared distances are not a metric, so triangle validation is skipped.
    SquaredEuclidean,
}

/// Where cluster centers may live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterPolicy {
    /// Centers are chosen among the data points themselves.
    DataPointsOnly,
    /// Centers are coordinate means (k-means with steiner centers).
    /// Requires backing points and a squared-euclidean source.
    SteinerCentroid,
}

/// A clustering instance: `n` points with a symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    n: usize,
    /// Row-major `n x n`, symmetric, zero diagonal.
    dist: Vec<f64>,
    points: Option<Vec<Vec<f64>>>,
    source_metric: SourceMetric,
    center_policy: CenterPolicy,
    perturbed: bool,
}

impl Instance {
    /// Build an instance from coordinate vectors.
    ///
    /// `source_metric` must be [`SourceMetric::Euclidean`] or
    /// [`SourceMetric::SquaredEuclidean`]; the matrix is filled with the
    /// corresponding pairwise distances.
    pub fn from_points(
        name: impl Into<String>,
        points: Vec<Vec<f64>>,
        source_metric: SourceMetric,
        center_policy: CenterPolicy,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                min: 2,
                got: points.len(),
            });
        }
        if points.len() > MAX_POINTS {
            return Err(Error::TooManyPoints {
                got: points.len(),
                cap: MAX_POINTS,
            });
        }
        if source_metric == SourceMetric::ExplicitMatrix {
            return Err(Error::ExplicitFromPoints);
        }
        if center_policy == CenterPolicy::SteinerCentroid
            && source_metric != SourceMetric::SquaredEuclidean
        {
            return Err(Error::SteinerUnsupported(
                "center_policy steiner needs source_metric sq_euclidean",
            ));
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate { index });
            }
        }
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = match source_metric {
                    SourceMetric::Euclidean => euclidean(&points[i], &points[j]),
                    SourceMetric::SquaredEuclidean => squared_euclidean(&points[i], &points[j]),
                    SourceMetric::ExplicitMatrix => unreachable!(),
                };
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Instance {
            name: name.into(),
            n,
            dist,
            points: Some(points),
            source_metric,
            center_policy,
            perturbed: false,
        })
    }

    /// Build an instance from an explicit distance matrix, declared a metric.
    ///
    /// Rejects non-square, asymmetric, negative, non-finite or
    /// nonzero-diagonal matrices. The triangle inequality is *not* checked
    /// here; call [`validate_metric`] for that.
    pub fn from_matrix(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        center_policy: CenterPolicy,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TooFewPoints { min: 1, got: 0 });
        }
        if rows.len() > MAX_POINTS {
            return Err(Error::TooManyPoints {
                got: rows.len(),
                cap: MAX_POINTS,
            });
        }
        if center_policy == CenterPolicy::SteinerCentroid {
            return Err(Error::SteinerUnsupported(
                "matrix instances have no coordinates",
            ));
        }
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = rows[i][j];
                if !v.is_finite() {
                    return Err(Error::BadMatrixEntry {
                        i,
                        j,
                        value: v,
                        reason: "non-finite",
                    });
                }
                if v < 0.0 {
                    return Err(Error::BadMatrixEntry {
                        i,
                        j,
                        value: v,
                        reason: "negative",
                    });
                }
                if i == j && v != 0.0 {
                    return Err(Error::BadMatrixEntry {
                        i,
                        j,
                        value: v,
                        reason: "nonzero diagonal",
                    });
                }
                if rows[j][i] != v {
                    return Err(Error::BadMatrixEntry {
                        i,
                        j,
                        value: v,
                        reason: "asymmetric",
                    });
                }
                dist[i * n + j] = v;
            }
        }
        Ok(Instance {
            name: name.into(),
            n,
            dist,
            points: None,
            source_metric: SourceMetric::ExplicitMatrix,
            center_policy,
            perturbed: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored distance between points `i` and `j`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> Option<&[Vec<f64>]> {
        self.points.as_deref()
    }

    pub fn source_metric(&self) -> SourceMetric {
        self.source_metric
    }

    pub fn center_policy(&self) -> CenterPolicy {
        self.center_policy
    }

    /// True once the matrix has been produced by a perturbation operator.
    /// Perturbed matrices are exempt from metric validation.
    pub fn is_perturbed(&self) -> bool {
        self.perturbed
    }

    /// Largest matrix entry (0 for a single point).
    pub fn max_distance(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance in the underlying *metric* rather than in stored units:
    /// identical to [`Instance::d`] except on squared-euclidean instances,
    /// where the square root is taken. Stability ratios are computed in
    /// these units.
    #[inline]
    pub fn metric_d(&self, i: usize, j: usize) -> f64 {
        match self.source_metric {
            SourceMetric::SquaredEuclidean => self.d(i, j).sqrt(),
            _ => self.d(i, j),
        }
    }

    /// Default triangle-inequality tolerance: `1e-9` times the largest entry.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.max_distance()
    }

    /// Same instance under a different center policy. Switching to steiner
    /// centers needs coordinates and a squared-euclidean source.
    pub fn with_center_policy(mut self, policy: CenterPolicy) -> Result<Instance> {
        if policy == CenterPolicy::SteinerCentroid
            && (self.points.is_none() || self.source_metric != SourceMetric::SquaredEuclidean)
        {
            return Err(Error::SteinerUnsupported(
                "switching to steiner centers needs points and a sq_euclidean source",
            ));
        }
        self.center_policy = policy;
        Ok(self)
    }

    fn with_matrix(&self, name: String, dist: Vec<f64>) -> Instance {
        Instance {
            name,
            n: self.n,
            dist,
            points: None,
            source_metric: self.source_metric,
            center_policy: self.center_policy,
            perturbed: true,
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between a backing point and an arbitrary coordinate.
pub fn point_to_coords(point: &[f64], coords: &[f64]) -> f64 {
    euclidean(point, coords)
}

// ---------------------------------------------------------------------------
// Metric validation
// ---------------------------------------------------------------------------

/// A single violated invariant found by [`validate_metric`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MetricViolation {
    Diagonal {
        i: usize,
        value: f64,
    },
    Asymmetry {
        i: usize,
        j: usize,
        a: f64,
        b: f64,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    NonFinite {
        i: usize,
        j: usize,
        value: f64,
    },
    /// `d(i,k) > d(i,j) + d(j,k) + tol`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        lhs: f64,
        rhs: f64,
    },
    /// Stored entry disagrees with the distance recomputed from points.
    PointsMismatch {
        i: usize,
        j: usize,
        stored: f64,
        derived: f64,
    },
}

/// Outcome of [`validate_metric`]; empty `violations` means the instance
/// satisfies its invariants within `tol`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub violations: Vec<MetricViolation>,
    /// True if the scan stopped early after collecting too many violations.
    pub truncated: bool,
    pub tol: f64,
}

impl MetricReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 64;

/// Check the instance invariants and return every violation found (up to a
/// reporting cap).
///
/// Basic shape checks (zero diagonal, symmetry, non-negativity, finiteness)
/// always run. For unperturbed instances, coordinate-backed matrices are
/// checked for consistency with their points (which implies the triangle
/// inequality for euclidean sources), and explicit matrices get a full
/// triangle scan. Perturbed instances skip both, since an alpha-perturbation
/// need not be a metric.
pub fn validate_metric(inst: &Instance, tol: f64) -> MetricReport {
    let n = inst.n();
    let mut violations = Vec::new();
    let mut truncated = false;
    let push = |violations: &mut Vec<MetricViolation>, v: MetricViolation| -> bool {
        if violations.len() >= MAX_REPORTED_VIOLATIONS {
            return false;
        }
        violations.push(v);
        true
    };

    'basic: for i in 0..n {
        if inst.d(i, i) != 0.0 {
            if !push(
                &mut violations,
                MetricViolation::Diagonal {
                    i,
                    value: inst.d(i, i),
                },
            ) {
                truncated = true;
                break 'basic;
            }
        }
        for j in (i + 1)..n {
            let a = inst.d(i, j);
            let b = inst.d(j, i);
            let v = if !a.is_finite() {
                Some(MetricViolation::NonFinite { i, j, value: a })
            } else if a < 0.0 {
                Some(MetricViolation::Negative { i, j, value: a })
            } else if a != b {
                Some(MetricViolation::Asymmetry { i, j, a, b })
            } else {
                None
            };
            if let Some(v) = v {
                if !push(&mut violations, v) {
                    truncated = true;
                    break 'basic;
                }
            }
        }
    }

    if !inst.is_perturbed() && !truncated {
        if let Some(points) = inst.points() {
            'pts: for i in 0..n {
                for j in (i + 1)..n {
                    let derived = match inst.source_metric() {
                        SourceMetric::Euclidean => euclidean(&points[i], &points[j]),
                        SourceMetric::SquaredEuclidean => squared_euclidean(&points[i], &points[j]),
                        SourceMetric::ExplicitMatrix => break 'pts,
                    };
                    let stored = inst.d(i, j);
                    if (stored - derived).abs() > tol {
                        if !push(
                            &mut violations,
                            MetricViolation::PointsMismatch {
                                i,
                                j,
                                stored,
                                derived,
                            },
                        ) {
                            truncated = true;
                            break 'pts;
                        }
                    }
                }
            }
        }
        if inst.source_metric() == SourceMetric::ExplicitMatrix {
            'tri: for j in 0..n {
                for i in 0..n {
                    if i == j {
                        continue;
                    }
                    let dij = inst.d(i, j);
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let lhs = inst.d(i, k);
                        let rhs = dij + inst.d(j, k);
                        if lhs > rhs + tol {
                            if !push(
                                &mut violations,
                                MetricViolation::Triangle { i, j, k, lhs, rhs },
                            ) {
                                truncated = true;
                                break 'tri;
                            }
                        }
                    }
                }
            }
        }
    }

    MetricReport {
        violations,
        truncated,
        tol,
    }
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// How [`perturb`] rewrites the matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbMode {
    /// Independent factor `u ~ Uniform[1, alpha]` per unordered pair.
    RandomUniform,
    /// Scale every pair inside `members` by exactly `alpha` (the
    /// perturbation used to derive center proximity from resilience).
    WithinClusterBlowup { members: Vec<usize> },
    /// Scale exactly the listed unordered pairs by `alpha`.
    CustomMask { pairs: Vec<(usize, usize)> },
}

/// A multiplicative perturbation: every output entry lies in
/// `[d, alpha * d]` pairwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub alpha: f64,
    pub mode: PerturbMode,
    /// Drives `RandomUniform`; ignored by the deterministic modes.
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn random_uniform(alpha: f64, seed: u64) -> Self {
        PerturbationSpec {
            alpha,
            mode: PerturbMode::RandomUniform,
            seed,
        }
    }
}

/// Apply a multiplicative perturbation to the stored distance matrix.
///
/// The output is marked perturbed (skipping metric validation), keeps the
/// source-metric tag for cost semantics, and drops the backing points since
/// the matrix no longer agrees with them. Deterministic given `spec.seed`.
pub fn perturb(inst: &Instance, spec: &PerturbationSpec) -> Result<Instance> {
    if !(spec.alpha >= 1.0) || !spec.alpha.is_finite() {
        return Err(Error::BadAlpha(spec.alpha));
    }
    if inst.center_policy() == CenterPolicy::SteinerCentroid {
        return Err(Error::PerturbSteiner);
    }
    let n = inst.n();
    match &spec.mode {
        PerturbMode::RandomUniform => {
            let mut dist = inst.dist.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let factor = Uniform::new_inclusive(1.0, spec.alpha);
            for i in 0..n {
                for j in (i + 1)..n {
                    let u = factor.sample(&mut rng);
                    let d = dist[i * n + j] * u;
                    dist[i * n + j] = d;
                    dist[j * n + i] = d;
                }
            }
            let name = format!(
                "{}|perturb(alpha={},seed={})",
                inst.name(),
                spec.alpha,
                spec.seed
            );
            Ok(inst.with_matrix(name, dist))
        }
        PerturbMode::WithinClusterBlowup { members } => {
            blowup_within_cluster(inst, members, spec.alpha)
        }
        PerturbMode::CustomMask { pairs } => {
            let mut dist = inst.dist.clone();
            for &(i, j) in pairs {
                for &index in &[i, j] {
                    if index >= n {
                        return Err(Error::IndexOutOfRange { index, n });
                    }
                }
                if i == j {
                    continue;
                }
                let d = dist[i * n + j] * spec.alpha;
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
            let name = format!("{}|mask(alpha={})", inst.name(), spec.alpha);
            Ok(inst.with_matrix(name, dist))
        }
    }
}

/// Scale all pairwise distances *within* `members` by `alpha`, leaving every
/// other entry untouched.
pub fn blowup_within_cluster(inst: &Instance, members: &[usize], alpha: f64) -> Result<Instance> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    if inst.center_policy() == CenterPolicy::SteinerCentroid {
        return Err(Error::PerturbSteiner);
    }
    let n = inst.n();
    for &index in members {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    let mut dist = inst.dist.clone();
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            if i == j {
                continue;
            }
            let d = dist[i * n + j] * alpha;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let name = format!(
        "{}|blowup(alpha={},m={})",
        inst.name(),
        alpha,
        members.len()
    );
    Ok(inst.with_matrix(name, dist))
}

/// `d_min(A, B)`: the minimum distance between two nonempty disjoint sets.
pub fn d_min(inst: &Instance, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let n = inst.n();
    let mut in_a = vec![false; n];
    for &i in a {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        in_a[i] = true;
    }
    let mut best = f64::INFINITY;
    for &j in b {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        if in_a[j] {
            return Err(Error::OverlappingSets(j));
        }
        for &i in a {
            let d = inst.d(i, j);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Derive a child seed from a base seed and an index (splitmix64 finalizer).
/// Used wherever per-trial or per-retry RNG streams are needed.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Instance JSON files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    center_policy: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    perturbed: bool,
}

impl Instance {
    /// Parse an instance from its JSON file form: either
    /// `{"name", "points", "metric", "center_policy"}` or
    /// `{"name", "matrix", "center_policy"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::BadGeneratorParam(format!("instance json: {e}")))?;
        let policy = match file.center_policy.as_str() {
            "data" => CenterPolicy::DataPointsOnly,
            "steiner" => CenterPolicy::SteinerCentroid,
            other => {
                return Err(Error::BadGeneratorParam(format!(
                    "unknown center_policy {other:?} (expected \"data\" or \"steiner\")"
                )))
            }
        };
        match (file.points, file.matrix) {
            (Some(points), None) => {
                let metric = match file.metric.as_deref() {
                    Some("euclidean") => SourceMetric::Euclidean,
                    Some("sq_euclidean") => SourceMetric::SquaredEuclidean,
                    Some(other) => {
                        return Err(Error::BadGeneratorParam(format!(
                            "unknown metric {other:?} (expected \"euclidean\" or \"sq_euclidean\")"
                        )))
                    }
                    None => {
                        return Err(Error::BadGeneratorParam(
                            "points instances need a \"metric\" field".into(),
                        ))
                    }
                };
                let inst = Instance::from_points(file.name, points, metric, policy)?;
                Ok(inst)
            }
            (None, Some(matrix)) => {
                let mut inst = Instance::from_matrix(file.name, matrix, policy)?;
                inst.perturbed = file.perturbed;
                // perturbed matrices keep the source tag of the instance
                // they came from, so k-means cost semantics survive the
                // round trip
                match (file.metric.as_deref(), file.perturbed) {
                    (None, _) => {}
                    (Some("euclidean"), true) => inst.source_metric = SourceMetric::Euclidean,
                    (Some("sq_euclidean"), true) => {
                        inst.source_metric = SourceMetric::SquaredEuclidean
                    }
                    (Some(other), true) => {
                        return Err(Error::BadGeneratorParam(format!(
                            "unknown metric {other:?} on a perturbed matrix instance"
                        )))
                    }
                    (Some(_), false) => {
                        return Err(Error::BadGeneratorParam(
                            "matrix instances take no \"metric\" field (distances are explicit)"
                                .into(),
                        ))
                    }
                }
                Ok(inst)
            }
            (Some(_), Some(_)) => Err(Error::BadGeneratorParam(
                "instance json must have either points or matrix, not both".into(),
            )),
            (None, None) => Err(Error::BadGeneratorParam(
                "instance json must have points or matrix".into(),
            )),
        }
    }

    /// Serialize to the JSON file form. Coordinate-backed unperturbed
    /// instances are written as points; everything else as a matrix.
    pub fn to_json(&self) -> String {
        let policy = match self.center_policy {
            CenterPolicy::DataPointsOnly => "data",
            CenterPolicy::SteinerCentroid => "steiner",
        };
        let file = if let (Some(points), false) = (self.points.as_ref(), self.perturbed) {
            InstanceFile {
                name: self.name.clone(),
                points: Some(points.clone()),
                matrix: None,
                metric: Some(match self.source_metric {
                    SourceMetric::Euclidean => "euclidean".into(),
                    SourceMetric::SquaredEuclidean => "sq_euclidean".into(),
                    SourceMetric::ExplicitMatrix => unreachable!("points imply a derived metric"),
                }),
                center_policy: policy.into(),
                perturbed: false,
            }
        } else {
            let rows = (0..self.n).map(|i| self.row(i).to_vec()).collect();
            let metric = match (self.perturbed, self.source_metric) {
                (true, SourceMetric::Euclidean) => Some("euclidean".into()),
                (true, SourceMetric::SquaredEuclidean) => Some("sq_euclidean".into()),
                _ => None,
            };
            InstanceFile {
                name: self.name.clone(),
                points: None,
                matrix: Some(rows),
                metric,
                center_policy: policy.into(),
                perturbed: self.perturbed,
            }
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

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
    fn two_point_line() {
        let inst = line(&[0.0, 3.0]);
        assert_eq!(inst.d(0, 1), 3.0);
        assert_eq!(inst.d(1, 0), 3.0);
        assert_eq!(inst.d(0, 0), 0.0);
    }

    #[test]
    fn three_four_five_triangle() {
        let inst = Instance::from_points(
            "t",
            vec![vec![0.0, 0.0], vec![3.0, 4.0]],
            SourceMetric::Euclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        assert_eq!(inst.d(0, 1), 5.0);
    }

    #[test]
    fn squared_distances() {
        let inst = Instance::from_points(
            "sq",
            vec![vec![0.0], vec![1.0], vec![3.0]],
            SourceMetric::SquaredEuclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        assert_eq!(inst.d(0, 2), 9.0);
        assert_eq!(inst.d(0, 1), 1.0);
    }

    #[test]
    fn from_points_rejects_bad_input() {
        assert!(matches!(
            Instance::from_points(
                "x",
                vec![vec![0.0]],
                SourceMetric::Euclidean,
                CenterPolicy::DataPointsOnly
            ),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            Instance::from_points(
                "x",
                vec![vec![0.0], vec![0.0, 1.0]],
                SourceMetric::Euclidean,
                CenterPolicy::DataPointsOnly
            ),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Instance::from_points(
                "x",
                vec![vec![0.0], vec![f64::NAN]],
                SourceMetric::Euclidean,
                CenterPolicy::DataPointsOnly
            ),
            Err(Error::NonFiniteCoordinate { .. })
        ));
        assert!(matches!(
            Instance::from_points(
                "x",
                vec![vec![0.0], vec![1.0]],
                SourceMetric::Euclidean,
                CenterPolicy::SteinerCentroid
            ),
            Err(Error::SteinerUnsupported(_))
        ));
    }

    #[test]
    fn validate_clean_matrix() {
        let inst = Instance::from_matrix(
            "m",
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        assert!(validate_metric(&inst, 0.0).is_clean());
    }

    #[test]
    fn validate_catches_triangle_violation() {
        let inst = Instance::from_matrix(
            "bad",
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let report = validate_metric(&inst, 1e-12);
        assert!(!report.is_clean());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            MetricViolation::Triangle {
                i: 0,
                j: 1,
                k: 2,
                ..
            }
        )));
    }

    #[test]
    fn loader_rejects_asymmetric_matrix() {
        let err = Instance::from_matrix(
            "m",
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::BadMatrixEntry {
                reason: "asymmetric",
                ..
            }
        ));
    }

    #[test]
    fn perturb_alpha_one_is_identity() {
        let inst = line(&[0.0, 1.0, 3.0, 7.0]);
        for seed in [0u64, 1, 99] {
            let p = perturb(&inst, &PerturbationSpec::random_uniform(1.0, seed)).unwrap();
            assert_eq!(p.dist, inst.dist);
            assert!(p.is_perturbed());
        }
    }

    #[test]
    fn perturb_bounds_and_symmetry() {
        let inst = line(&[0.0, 1.0, 3.0, 7.0, 20.0]);
        let alpha = 3.0;
        let p = perturb(&inst, &PerturbationSpec::random_uniform(alpha, 42)).unwrap();
        for i in 0..inst.n() {
            for j in 0..inst.n() {
                assert!(p.d(i, j) >= inst.d(i, j));
                assert!(p.d(i, j) <= alpha * inst.d(i, j) || inst.d(i, j) == 0.0);
                assert_eq!(p.d(i, j), p.d(j, i));
            }
        }
        // deterministic given the seed
        let q = perturb(&inst, &PerturbationSpec::random_uniform(alpha, 42)).unwrap();
        assert_eq!(p.dist, q.dist);
    }

    #[test]
    fn custom_mask_touches_one_pair() {
        let inst = line(&[0.0, 1.0, 3.0]);
        let spec = PerturbationSpec {
            alpha: 2.0,
            mode: PerturbMode::CustomMask {
                pairs: vec![(0, 2)],
            },
            seed: 0,
        };
        let p = perturb(&inst, &spec).unwrap();
        assert_eq!(p.d(0, 2), 6.0);
        assert_eq!(p.d(0, 1), 1.0);
        assert_eq!(p.d(1, 2), 2.0);
    }

    #[test]
    fn blowup_singleton_is_noop() {
        let inst = line(&[0.0, 1.0, 3.0]);
        let b = blowup_within_cluster(&inst, &[1], 3.0).unwrap();
        assert_eq!(b.dist, inst.dist);
    }

    #[test]
    fn blowup_all_points_doubles_offdiagonal() {
        let inst = line(&[0.0, 1.0, 3.0]);
        let b = blowup_within_cluster(&inst, &[0, 1, 2], 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.d(i, j), 2.0 * inst.d(i, j));
            }
        }
    }

    #[test]
    fn blowup_rejects_empty() {
        let inst = line(&[0.0, 1.0]);
        assert!(matches!(
            blowup_within_cluster(&inst, &[], 2.0),
            Err(Error::EmptyMembers)
        ));
    }

    #[test]
    fn d_min_examples() {
        let inst = line(&[0.0, 1.0, 3.0, 7.0]);
        assert_eq!(d_min(&inst, &[0, 1], &[2, 3]).unwrap(), 2.0);
        assert_eq!(d_min(&inst, &[0], &[3]).unwrap(), 7.0);
        let m = Instance::from_matrix(
            "m",
            vec![
                vec![0.0, 4.0, 9.0],
                vec![4.0, 0.0, 1.0],
                vec![9.0, 1.0, 0.0],
            ],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        assert_eq!(d_min(&m, &[0], &[1, 2]).unwrap(), 4.0);
        assert!(matches!(
            d_min(&m, &[0, 1], &[1]),
            Err(Error::OverlappingSets(1))
        ));
        assert!(matches!(d_min(&m, &[], &[1]), Err(Error::EmptyMembers)));
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::from_points(
            "rt",
            vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![1.0, 1.0]],
            SourceMetric::Euclidean,
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);

        let m = Instance::from_matrix(
            "mat",
            vec![vec![0.0, 2.5], vec![2.5, 0.0]],
            CenterPolicy::DataPointsOnly,
        )
        .unwrap();
        let back = Instance::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);

        // perturbed instances round-trip through the matrix form with the flag
        let p = perturb(&inst, &PerturbationSpec::random_uniform(2.0, 7)).unwrap();
        let back = Instance::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(back.is_perturbed());
    }

    fn arb_points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 2), n)
        })
    }

    proptest! {
        #[test]
        fn prop_perturb_envelope_exact(points in arb_points(12), alpha in 1.0f64..4.0, seed in any::<u64>()) {
            let inst = Instance::from_points("p", points, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let p = perturb(&inst, &PerturbationSpec::random_uniform(alpha, seed)).unwrap();
            for i in 0..inst.n() {
                for j in 0..inst.n() {
                    prop_assert!(p.d(i, j) >= inst.d(i, j));
                    prop_assert!(p.d(i, j) <= alpha * inst.d(i, j));
                }
            }
        }

        #[test]
        fn prop_blowup_disjoint_commutes(points in arb_points(10), alpha in 1.0f64..3.0) {
            let inst = Instance::from_points("b", points, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let n = inst.n();
            let half = n / 2;
            let a: Vec<usize> = (0..half).collect();
            let b: Vec<usize> = (half..n).collect();
            if a.is_empty() || b.is_empty() { return Ok(()); }
            let ab = blowup_within_cluster(&blowup_within_cluster(&inst, &a, alpha).unwrap(), &b, alpha).unwrap();
            let ba = blowup_within_cluster(&blowup_within_cluster(&inst, &b, alpha).unwrap(), &a, alpha).unwrap();
            prop_assert_eq!(ab.dist, ba.dist);
        }

        #[test]
        fn prop_d_min_symmetric_and_monotone(points in arb_points(10)) {
            let inst = Instance::from_points("d", points, SourceMetric::Euclidean, CenterPolicy::DataPointsOnly).unwrap();
            let n = inst.n();
            let a: Vec<usize> = (0..n / 2).collect();
            let b: Vec<usize> = (n / 2..n).collect();
            if a.is_empty() || b.is_empty() { return Ok(()); }
            let ab = d_min(&inst, &a, &b).unwrap();
            let ba = d_min(&inst, &b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            // enlarging either set can only shrink the minimum
            if a.len() > 1 {
                let smaller = &a[..a.len() - 1];
                prop_assert!(d_min(&inst, smaller, &b).unwrap() >= ab);
            }
        }
    }
}
