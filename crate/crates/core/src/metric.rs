//! Point clouds, finite metric spaces and the elementary metric quantities
//! built on them: diameters, radii, minimum enclosing balls, Hausdorff
//! distances and the Kuratowski embedding into `l_inf^n`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for every distance comparison in the crate.
pub const TOLERANCE: f64 = 1e-9;

/// Ambient norm of a point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
    L1,
}

impl Norm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Linf => diffs.fold(0.0, f64::max),
            Norm::L1 => diffs.sum(),
        }
    }

    pub fn length(self, v: &[f64]) -> f64 {
        match self {
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
            Norm::L1 => "l1",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" | "euclidean" => Ok(Norm::L2),
            "linf" | "l_inf" | "max" => Ok(Norm::Linf),
            "l1" | "manhattan" => Ok(Norm::L1),
            other => Err(Error::InvalidParameter(format!("unknown norm '{other}'"))),
        }
    }
}

/// A finite, nonempty subset of `R^N` carrying one ambient norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    norm: Norm,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, norm: Norm) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { points, norm })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.norm.distance(&self.points[i], &self.points[j])
    }

    /// Distance from an arbitrary point of the ambient space to the cloud.
    pub fn distance_to(&self, y: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| self.norm.distance(p, y))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn with_norm(&self, norm: Norm) -> Self {
        Self {
            points: self.points.clone(),
            norm,
        }
    }

    /// The sub-cloud on the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.points[i].clone()).collect(), self.norm)
    }
}

/// A finite metric space stored as a dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, positive off-diagonal entries and
    /// the triangle inequality (within [`TOLERANCE`]).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty matrix".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        let ms = Self { n, dist };
        ms.validate()?;
        Ok(ms)
    }

    pub(crate) fn from_flat_unchecked(n: usize, dist: Vec<f64>) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        Self { n, dist }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() {
                    return Err(Error::InvalidMetric(format!("non-finite entry ({i},{j})")));
                }
                if d != self.get(j, i) {
                    return Err(Error::InvalidMetric(format!("asymmetric entry ({i},{j})")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "points {i} and {j} are at distance {d}"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.get(i, k) > self.get(i, j) + self.get(j, k) + TOLERANCE {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest distance from `i` to any other point.
    pub fn eccentricity(&self, i: usize) -> f64 {
        self.row(i).iter().copied().fold(0.0, f64::max)
    }

    /// Restriction of the metric to the given indices.
    pub fn subspace(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                dist.push(self.get(i, j));
            }
        }
        Self { n: m, dist }
    }
}

/// Minimum enclosing ball of a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub norm: Norm,
}

impl Ball {
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.norm.distance(&self.center, p) <= self.radius + tol
    }
}

pub fn pairwise_distances(cloud: &PointCloud) -> Result<FiniteMetricSpace> {
    let n = cloud.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cloud.distance(i, j);
            if d == 0.0 {
                return Err(Error::DuplicatePoints { first: i, second: j });
            }
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    Ok(FiniteMetricSpace::from_flat_unchecked(n, dist))
}

pub fn diameter(ms: &FiniteMetricSpace) -> f64 {
    ms.dist.iter().copied().fold(0.0, f64::max)
}

/// `min_y max_x d(x, y)` with the center restricted to the space itself.
pub fn radius(ms: &FiniteMetricSpace) -> f64 {
    (0..ms.len())
        .map(|i| ms.eccentricity(i))
        .fold(f64::INFINITY, f64::min)
}

pub fn min_enclosing_ball(cloud: &PointCloud) -> Result<Ball> {
    match cloud.norm() {
        Norm::L2 => {
            let refs: Vec<&[f64]> = cloud.points().iter().map(Vec::as_slice).collect();
            let (center, radius) = min_ball_l2(&refs);
            Ok(Ball {
                center,
                radius,
                norm: Norm::L2,
            })
        }
        Norm::Linf => {
            let refs: Vec<&[f64]> = cloud.points().iter().map(Vec::as_slice).collect();
            let (center, radius) = min_ball_linf(&refs);
            Ok(Ball {
                center,
                radius,
                norm: Norm::Linf,
            })
        }
        Norm::L1 => Err(Error::UnsupportedNorm(Norm::L1)),
    }
}

pub fn circumradius(cloud: &PointCloud) -> Result<f64> {
    min_enclosing_ball(cloud).map(|b| b.radius)
}

/// Exact `l_inf` enclosing ball: the center of the bounding box.
pub(crate) fn min_ball_linf(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let dim = points[0].len();
    let mut center = vec![0.0; dim];
    let mut radius: f64 = 0.0;
    for (c, slot) in center.iter_mut().enumerate() {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[c]), hi.max(p[c]))
            });
        *slot = (lo + hi) / 2.0;
        radius = radius.max((hi - lo) / 2.0);
    }
    (center, radius)
}

/// Euclidean minimum enclosing ball by Welzl's move-to-front recursion on a
/// seeded random permutation.
pub(crate) fn min_ball_l2(points: &[&[f64]]) -> (Vec<f64>, f64) {
    match points.len() {
        0 => return (Vec::new(), 0.0),
        1 => return (points[0].to_vec(), 0.0),
        2 => {
            let c: Vec<f64> = points[0].iter().zip(points[1]).map(|(a, b)| (a + b) / 2.0).collect();
            return (c, Norm::L2.distance(points[0], points[1]) / 2.0);
        }
        _ => {}
    }
    let mut order: Vec<&[f64]> = points.to_vec();
    if order.len() > 8 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        order.shuffle(&mut rng);
    }
    let dim = points[0].len();
    let mut support: Vec<&[f64]> = Vec::with_capacity(dim + 1);
    let end = order.len();
    mtf_ball(&mut order, end, &mut support, dim)
}

fn mtf_ball<'a>(
    points: &mut Vec<&'a [f64]>,
    end: usize,
    support: &mut Vec<&'a [f64]>,
    dim: usize,
) -> (Vec<f64>, f64) {
    let mut ball = circumball(support, dim);
    if support.len() == dim + 1 {
        return ball;
    }
    let mut i = 0;
    while i < end {
        let p = points[i];
        let outside =
            ball.0.is_empty() || Norm::L2.distance(&ball.0, p) > ball.1 * (1.0 + 1e-12) + 1e-14;
        if outside {
            support.push(p);
            ball = mtf_ball(points, i, support, dim);
            support.pop();
            // move to front
            let q = points.remove(i);
            points.insert(0, q);
        }
        i += 1;
    }
    ball
}

/// Smallest ball having every support point on its boundary; the center lies
/// in the affine hull of the support. An empty support yields an empty ball.
fn circumball(support: &[&[f64]], dim: usize) -> (Vec<f64>, f64) {
    match support.len() {
        0 => (Vec::new(), f64::NEG_INFINITY),
        1 => (support[0].to_vec(), 0.0),
        m => {
            let p0 = support[0];
            let vs: Vec<Vec<f64>> = support[1..]
                .iter()
                .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let k = m - 1;
            let gram = DMatrix::from_fn(k, k, |a, b| 2.0 * dot(&vs[a], &vs[b]));
            let rhs = DVector::from_fn(k, |a, _| dot(&vs[a], &vs[a]));
            let lambda = gram
                .clone()
                .lu()
                .solve(&rhs)
                .filter(|x| x.iter().all(|v| v.is_finite()))
                .unwrap_or_else(|| {
                    gram.svd(true, true)
                        .solve(&rhs, 1e-12)
                        .unwrap_or_else(|_| DVector::zeros(k))
                });
            let mut center = p0.to_vec();
            for (l, v) in lambda.iter().zip(&vs) {
                for d in 0..dim {
                    center[d] += l * v[d];
                }
            }
            let r = support
                .iter()
                .map(|p| Norm::L2.distance(&center, p))
                .fold(0.0, f64::max);
            (center, r)
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::AmbientMismatch(format!(
            "dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.norm() != b.norm() {
        return Err(Error::AmbientMismatch(format!("norms {} and {}", a.norm(), b.norm())));
    }
    let directed = |from: &PointCloud, to: &PointCloud| {
        from.points()
            .iter()
            .map(|p| to.distance_to(p))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Embeds the space isometrically into `l_inf^n`: point `i` becomes row `i`
/// of the distance matrix.
pub fn kuratowski_embed(ms: &FiniteMetricSpace) -> PointCloud {
    PointCloud {
        points: ms.rows(),
        norm: Norm::Linf,
    }
}
