//! Synthetic datasets. Every generator is deterministic for a fixed seed and
//! places its samples exactly on the target shape up to rounding.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{pairwise_distances, FiniteMetricSpace, Norm, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Ellipse,
    LinfSphere,
    Ellipsoid,
    EllipsoidWithHandles,
    Torus,
    Uniform,
    TreeMetric,
    TripodWithLoops,
}

impl Shape {
    pub const ALL: [Shape; 9] = [
        Shape::Circle,
        Shape::Ellipse,
        Shape::LinfSphere,
        Shape::Ellipsoid,
        Shape::EllipsoidWithHandles,
        Shape::Torus,
        Shape::Uniform,
        Shape::TreeMetric,
        Shape::TripodWithLoops,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Ellipse => "ellipse",
            Shape::LinfSphere => "linf_sphere",
            Shape::Ellipsoid => "ellipsoid",
            Shape::EllipsoidWithHandles => "ellipsoid_with_handles",
            Shape::Torus => "torus",
            Shape::Uniform => "uniform",
            Shape::TreeMetric => "tree_metric",
            Shape::TripodWithLoops => "tripod_with_loops",
        }
    }

    /// Parameter names with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Shape::Circle => &[("r", 1.0)],
            Shape::Ellipse => &[("a", 2.0), ("b", 1.0)],
            Shape::LinfSphere => &[],
            Shape::Ellipsoid => &[("a", 3.0), ("b", 2.0), ("c", 1.0)],
            Shape::EllipsoidWithHandles => &[("a", 3.0), ("b", 2.0), ("c", 1.0), ("handles", 1.0)],
            Shape::Torus => &[("major", 2.0), ("minor", 0.5)],
            Shape::Uniform => &[("dim", 2.0), ("side", 1.0)],
            Shape::TreeMetric => &[("min_edge", 0.5), ("max_edge", 1.5)],
            Shape::TripodWithLoops => &[("leg", 1.0), ("loop_radius", 0.3)],
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown shape '{s}'")))
    }
}

/// Named real parameters, e.g. parsed from `a=2,b=1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("parameter {k} is not a number")))?;
            map.insert(k.trim().to_string(), v);
        }
        Ok(Self(map))
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    /// Defaults of `shape` overridden by the given values; unknown keys and
    /// non-positive values are errors.
    fn resolve(&self, shape: Shape) -> Result<BTreeMap<&'static str, f64>> {
        let defaults = shape.defaults();
        for k in self.0.keys() {
            if !defaults.iter().any(|(d, _)| d == k) {
                return Err(Error::InvalidParameter(format!("shape {shape} has no parameter '{k}'")));
            }
        }
        let mut out = BTreeMap::new();
        for &(k, d) in defaults {
            let v = self.get(k).unwrap_or(d);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("parameter {k} must be positive, got {v}")));
            }
            out.insert(k, v);
        }
        Ok(out)
    }
}

/// Input data: coordinates with a norm, or a bare distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Cloud(PointCloud),
    Metric(FiniteMetricSpace),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Cloud(c) => c.len(),
            Dataset::Metric(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cloud(&self) -> Option<&PointCloud> {
        match self {
            Dataset::Cloud(c) => Some(c),
            Dataset::Metric(_) => None,
        }
    }

    /// The distance matrix, computed from coordinates if needed.
    pub fn metric(&self) -> Result<FiniteMetricSpace> {
        match self {
            Dataset::Cloud(c) => pairwise_distances(c),
            Dataset::Metric(m) => Ok(m.clone()),
        }
    }
}

pub fn generate(shape: Shape, params: &Params, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let p = params.resolve(shape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud = |points: Vec<Vec<f64>>, norm: Norm| PointCloud::new(points, norm).map(Dataset::Cloud);
    match shape {
        Shape::Circle => {
            let r = p["r"];
            let phase = rng.random::<f64>() * TAU / n as f64;
            let pts = (0..n)
                .map(|i| {
                    let t = phase + TAU * i as f64 / n as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect();
            cloud(pts, Norm::L2)
        }
        Shape::Ellipse => {
            let (a, b) = (p["a"], p["b"]);
            let pts = (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    vec![a * t.cos(), b * t.sin()]
                })
                .collect();
            cloud(pts, Norm::L2)
        }
        Shape::LinfSphere => cloud((0..n).map(|i| square_boundary(8.0 * i as f64 / n as f64)).collect(), Norm::Linf),
        Shape::Ellipsoid => {
            let axes = [p["a"], p["b"], p["c"]];
            cloud((0..n).map(|_| on_ellipsoid(axes, &unit_vector(&mut rng, 3))).collect(), Norm::L2)
        }
        Shape::EllipsoidWithHandles => {
            let axes = [p["a"], p["b"], p["c"]];
            let handles = p["handles"].round().max(1.0) as usize;
            cloud(ellipsoid_with_handles(&mut rng, axes, handles, n), Norm::L2)
        }
        Shape::Torus => {
            let (big, small) = (p["major"], p["minor"]);
            let pts = (0..n)
                .map(|_| {
                    let (u, v) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
                    vec![(big + small * v.cos()) * u.cos(), (big + small * v.cos()) * u.sin(), small * v.sin()]
                })
                .collect();
            cloud(pts, Norm::L2)
        }
        Shape::Uniform => {
            let dim = p["dim"].round() as usize;
            let side = p["side"];
            let pts = (0..n).map(|_| (0..dim).map(|_| side * rng.random::<f64>()).collect()).collect();
            cloud(pts, Norm::L2)
        }
        Shape::TreeMetric => {
            let (lo, hi) = (p["min_edge"], p["max_edge"]);
            if lo > hi {
                return Err(Error::InvalidParameter("min_edge exceeds max_edge".into()));
            }
            tree_metric(&mut rng, n, lo, hi).map(Dataset::Metric)
        }
        Shape::TripodWithLoops => cloud(tripod(&mut rng, n, p["leg"], p["loop_radius"]), Norm::L2),
    }
}

/// Point at arc length `s` in `[0, 8)` along the boundary of `[-1, 1]^2`,
/// counterclockwise from the corner `(-1, -1)`.
fn square_boundary(s: f64) -> Vec<f64> {
    match s {
        s if s < 2.0 => vec![-1.0 + s, -1.0],
        s if s < 4.0 => vec![1.0, -1.0 + (s - 2.0)],
        s if s < 6.0 => vec![1.0 - (s - 4.0), 1.0],
        s => vec![-1.0, 1.0 - (s - 6.0)],
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-9 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn on_ellipsoid(axes: [f64; 3], u: &[f64]) -> Vec<f64> {
    vec![axes[0] * u[0], axes[1] * u[1], axes[2] * u[2]]
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// A tube of radius `radius` around the half circle from `a` to `b` that
/// bulges along `up`.
struct Handle {
    a: Vec<f64>,
    b: Vec<f64>,
    center: Vec<f64>,
    half: Vec<f64>,
    up: Vec<f64>,
    binormal: Vec<f64>,
    radius: f64,
}

impl Handle {
    fn new(a: Vec<f64>, b: Vec<f64>, axes: [f64; 3]) -> Self {
        let center: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
        let half = sub(&a, &center);
        let len = norm(&half);
        let e = scaled(&half, 1.0 / len);
        // outward normal of the ellipsoid near the midpoint, made orthogonal
        // to the chord
        let grad: Vec<f64> = (0..3).map(|i| center[i] / (axes[i] * axes[i])).collect();
        let along: f64 = grad.iter().zip(&e).map(|(g, x)| g * x).sum();
        let up = sub(&grad, &scaled(&e, along));
        let up = scaled(&up, len / norm(&up));
        let binormal = cross3(&e, &scaled(&up, 1.0 / len));
        Self {
            radius: 0.3 * len,
            a,
            b,
            center,
            half,
            up,
            binormal,
        }
    }

    fn point(&self, tau: f64, psi: f64) -> Vec<f64> {
        let (s, c) = (PI * tau).sin_cos();
        let tangent: Vec<f64> = (0..3).map(|i| -s * self.half[i] + c * self.up[i]).collect();
        let tangent = scaled(&tangent, 1.0 / norm(&tangent));
        let n2 = cross3(&tangent, &self.binormal);
        (0..3)
            .map(|i| {
                self.center[i]
                    + c * self.half[i]
                    + s * self.up[i]
                    + self.radius * (psi.cos() * self.binormal[i] + psi.sin() * n2[i])
            })
            .collect()
    }

    fn in_cap(&self, p: &[f64]) -> bool {
        norm(&sub(p, &self.a)) < self.radius || norm(&sub(p, &self.b)) < self.radius
    }
}

/// Ellipsoid surface with a disk removed around both feet of each handle
/// and a tube glued in; a quarter of the points go to the tubes.
fn ellipsoid_with_handles(rng: &mut ChaCha8Rng, axes: [f64; 3], handles: usize, n: usize) -> Vec<Vec<f64>> {
    let spherical = |theta: f64, phi: f64| vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let tubes: Vec<Handle> = (0..handles)
        .map(|j| {
            let phi = TAU * j as f64 / handles as f64;
            let gap = PI / (2.0 * handles as f64).max(3.0);
            let a = on_ellipsoid(axes, &spherical(PI / 4.0, phi - gap / 2.0));
            let b = on_ellipsoid(axes, &spherical(PI / 4.0, phi + gap / 2.0));
            Handle::new(a, b, axes)
        })
        .collect();
    let n_tube = n / 4;
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n - n_tube {
        let p = on_ellipsoid(axes, &unit_vector(rng, 3));
        if !tubes.iter().any(|t| t.in_cap(&p)) {
            pts.push(p);
        }
    }
    for i in 0..n_tube {
        let t = &tubes[i % handles];
        pts.push(t.point(rng.random::<f64>(), rng.random::<f64>() * TAU));
    }
    pts
}

/// Random weighted tree on `n` nodes, each attached to an earlier one.
fn tree_metric(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<FiniteMetricSpace> {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 1..n {
        let parent = rng.random_range(0..i);
        let w = lo + (hi - lo) * rng.random::<f64>();
        for k in 0..i {
            let d = w + rows[parent][k];
            rows[i][k] = d;
            rows[k][i] = d;
        }
    }
    FiniteMetricSpace::from_rows(rows)
}

/// Three legs from the origin, each ending in a loop tangent to its tip.
fn tripod(rng: &mut ChaCha8Rng, n: usize, leg: f64, loop_radius: f64) -> Vec<Vec<f64>> {
    let dirs: Vec<[f64; 2]> = [90.0f64, 210.0, 330.0]
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            [t.cos(), t.sin()]
        })
        .collect();
    let arm = leg + TAU * loop_radius;
    (0..n)
        .map(|_| {
            let s = rng.random::<f64>() * 3.0 * arm;
            let j = ((s / arm) as usize).min(2);
            let s = s - j as f64 * arm;
            let d = dirs[j];
            if s < leg {
                vec![s * d[0], s * d[1]]
            } else {
                // angle measured from the tip, as seen from the loop center
                let theta = (s - leg) / loop_radius;
                let c = [(leg + loop_radius) * d[0], (leg + loop_radius) * d[1]];
                let (sn, cs) = theta.sin_cos();
                let r = [-d[0] * cs + d[1] * sn, -d[1] * cs - d[0] * sn];
                vec![c[0] + loop_radius * r[0], c[1] + loop_radius * r[1]]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(shape: Shape, params: &str, n: usize, seed: u64) -> PointCloud {
        match generate(shape, &Params::parse(params).unwrap(), n, seed).unwrap() {
            Dataset::Cloud(c) => c,
            Dataset::Metric(_) => panic!("expected a cloud"),
        }
    }

    #[test]
    fn circle_points_are_on_the_circle() {
        let c = points(Shape::Circle, "", 120, 7);
        assert_eq!(c.len(), 120);
        for p in c.points() {
            assert!((p[0].hypot(p[1]) - 1.0).abs() <= 1e-12);
        }
        assert_eq!(c, points(Shape::Circle, "", 120, 7));
        assert_ne!(c, points(Shape::Circle, "", 120, 8));
    }

    #[test]
    fn linf_sphere_has_unit_max_norm() {
        let c = points(Shape::LinfSphere, "", 80, 0);
        assert_eq!(c.norm(), Norm::Linf);
        for p in c.points() {
            assert_eq!(Norm::Linf.length(p), 1.0);
        }
        assert_eq!(c.point(0), &[-1.0, -1.0]);
    }

    #[test]
    fn ellipse_equation() {
        let c = points(Shape::Ellipse, "a=2,b=1", 150, 0);
        for p in c.points() {
            assert!((p[0] * p[0] / 4.0 + p[1] * p[1] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn surfaces_in_space() {
        let e = points(Shape::Ellipsoid, "", 200, 3);
        for p in e.points() {
            assert!((p[0] * p[0] / 9.0 + p[1] * p[1] / 4.0 + p[2] * p[2] - 1.0).abs() <= 1e-12);
        }
        let t = points(Shape::Torus, "major=2,minor=0.5", 100, 3);
        for p in t.points() {
            let ring = p[0].hypot(p[1]) - 2.0;
            assert!((ring.hypot(p[2]) - 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn handles_are_tubes() {
        let axes = [3.0, 2.0, 1.0];
        let c = points(Shape::EllipsoidWithHandles, "handles=2", 200, 1);
        assert_eq!(c.len(), 200);
        let on_surface = c
            .points()
            .iter()
            .filter(|p| (p[0] * p[0] / 9.0 + p[1] * p[1] / 4.0 + p[2] * p[2] - 1.0).abs() <= 1e-12)
            .count();
        assert_eq!(on_surface, 150);
        let h = Handle::new(on_ellipsoid(axes, &[0.6, 0.0, 0.8]), on_ellipsoid(axes, &[0.0, 0.6, 0.8]), axes);
        for k in 0..20 {
            let tau = k as f64 / 19.0;
            let p = h.point(tau, 1.3 * k as f64);
            let axis_point: Vec<f64> = (0..3)
                .map(|i| h.center[i] + (PI * tau).cos() * h.half[i] + (PI * tau).sin() * h.up[i])
                .collect();
            assert!((norm(&sub(&p, &axis_point)) - h.radius).abs() <= 1e-12);
        }
    }

    #[test]
    fn tripod_lies_on_legs_and_loops() {
        let c = points(Shape::TripodWithLoops, "", 90, 5);
        for p in c.points() {
            let on_piece = [90.0f64, 210.0, 330.0].iter().any(|deg| {
                let t = deg.to_radians();
                let d = [t.cos(), t.sin()];
                let along = p[0] * d[0] + p[1] * d[1];
                let off = (p[0] * d[1] - p[1] * d[0]).abs();
                let on_leg = off <= 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&along);
                let on_loop = ((p[0] - 1.3 * d[0]).hypot(p[1] - 1.3 * d[1]) - 0.3).abs() <= 1e-12;
                on_leg || on_loop
            });
            assert!(on_piece, "{p:?}");
        }
    }

    #[test]
    fn tree_metric_is_a_metric() {
        let Dataset::Metric(m) = generate(Shape::TreeMetric, &Params::default(), 12, 4).unwrap() else {
            panic!()
        };
        assert_eq!(m.len(), 12);
        // four-point condition of tree metrics
        for (x, y, z, w) in [(0, 1, 2, 3), (4, 5, 6, 7), (1, 5, 9, 11)] {
            let mut s = [m.get(x, y) + m.get(z, w), m.get(x, z) + m.get(y, w), m.get(x, w) + m.get(y, z)];
            s.sort_by(f64::total_cmp);
            assert!((s[2] - s[1]).abs() <= 1e-9);
        }
    }

    #[test]
    fn bad_requests() {
        assert!("blob".parse::<Shape>().is_err());
        assert_eq!("linf-sphere".parse::<Shape>().unwrap(), Shape::LinfSphere);
        assert!(generate(Shape::Circle, &Params::parse("q=1").unwrap(), 10, 0).is_err());
        assert!(generate(Shape::Circle, &Params::parse("r=-1").unwrap(), 10, 0).is_err());
        assert!(generate(Shape::Circle, &Params::default(), 0, 0).is_err());
        assert!(Params::parse("a").is_err());
    }
}
