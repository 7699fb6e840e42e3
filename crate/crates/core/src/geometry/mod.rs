//! Convex-hull and tight-span geometry: convexity deficiency, medial axes of
//! convex polygons, hyperconvexity deficiency and convex-core lifespan caps.

mod cdef;
mod medial;
mod tightspan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Norm, PointCloud};
use crate::widths::{Certificate, SimplicialCore};

pub use cdef::{convexity_deficiency, ConvexityDeficiency};
pub use medial::medial_axis_core;
pub use tightspan::{
    hyperconvexity_deficiency, tight_span_membership, HyperconvexityDeficiency, TightSpanPoint,
    DEFAULT_HCDEF_EXACT_LIMIT,
};

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2D {
    vertices: Vec<[f64; 2]>,
}

pub(crate) fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon2D {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::DegeneratePolygon(format!("{m} vertices")));
        }
        for i in 0..m {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]);
            if a == b {
                return Err(Error::DegeneratePolygon(format!("repeated vertex {i}")));
            }
            if cross(a, b, c) < -1e-12 {
                return Err(Error::DegeneratePolygon("not convex or not counterclockwise".into()));
            }
        }
        let area: f64 = (0..m).map(|i| cross([0.0, 0.0], vertices[i], vertices[(i + 1) % m])).sum();
        if area <= 0.0 {
            return Err(Error::DegeneratePolygon("zero or negative area".into()));
        }
        Ok(Self { vertices })
    }

    /// Axis-parallel rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let m = self.vertices.len();
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % m]))
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            cross(a, b, p) / len >= -tol
        })
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1])).sum()
    }

    /// `n` points evenly spaced by arc length along the boundary, starting
    /// at the first vertex.
    pub fn sample_boundary(&self, n: usize) -> Vec<[f64; 2]> {
        let total = self.perimeter();
        let edges: Vec<_> = self.edges().collect();
        let mut out = Vec::with_capacity(n);
        let (mut e, mut start) = (0, 0.0);
        for i in 0..n {
            let s = total * i as f64 / n as f64;
            loop {
                let (a, b) = edges[e];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                if s <= start + len || e + 1 == edges.len() {
                    let t = ((s - start) / len).clamp(0.0, 1.0);
                    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    break;
                }
                start += len;
                e += 1;
            }
        }
        out
    }

    /// The polygon as a filled convex core.
    pub fn to_core(&self) -> Result<SimplicialCore> {
        SimplicialCore::convex_polygon(self.vertices.iter().map(|v| v.to_vec()).collect())
    }
}

/// Convex hull of a planar point set, including its degenerate forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Hull2D {
    Point([f64; 2]),
    Segment([f64; 2], [f64; 2]),
    Polygon(Polygon2D),
}

/// Andrew's monotone chain; collinear boundary points are dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Result<Hull2D> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() == 1 {
        return Ok(Hull2D::Point(p[0]));
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        let (a, b) = (p[0], p[p.len() - 1]);
        return Ok(Hull2D::Segment(a, b));
    }
    Ok(Hull2D::Polygon(Polygon2D::new(hull)?))
}

pub(crate) fn planar(cloud: &PointCloud) -> Result<Vec<[f64; 2]>> {
    if cloud.dim() != 2 {
        return Err(Error::InvalidParameter(format!("expected planar points, got dimension {}", cloud.dim())));
    }
    Ok(cloud.points().iter().map(|p| [p[0], p[1]]).collect())
}

/// Lifespan cap from a convex core: the two-sided Hausdorff distance between
/// the cloud and the core, bounded from above.
pub fn convex_core_lifespan_bound(cloud: &PointCloud, core: &SimplicialCore) -> Result<f64> {
    let reject = |reason: String| Error::Prerequisite {
        theorem: "convex core".into(),
        reason,
    };
    if !matches!(core.certificate(), Certificate::ConvexSet | Certificate::Point) {
        return Err(reject(format!("core certificate is {:?}, not a convex set", core.certificate())));
    }
    if cloud.norm() != Norm::L2 {
        return Err(reject("needs the Euclidean norm".into()));
    }
    crate::widths::certified_hausdorff(cloud, core, None).map(|(v, _)| v)
}
