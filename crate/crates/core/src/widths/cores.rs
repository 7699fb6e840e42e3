//! Candidate cores: finite simplicial complexes embedded in the ambient
//! space, the displacement of a cloud onto them and two-sided Hausdorff
//! bounds.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AffineFlat, Exactness, WidthEstimate, WidthKind, Witness};
use crate::error::{Error, Result};
use crate::metric::{dot, Norm, PointCloud};

/// What is known about the topology of a core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Point,
    Tree,
    ConvexSet,
    /// Medial axis of a convex body's boundary; a tree whose neighborhoods
    /// are all contractible.
    CutLocus,
    AffineFlat,
    None,
}

impl Certificate {
    fn name(self) -> &'static str {
        match self {
            Certificate::Point => "point",
            Certificate::Tree => "tree",
            Certificate::ConvexSet => "convex_set",
            Certificate::CutLocus => "cut_locus",
            Certificate::AffineFlat => "affine_flat",
            Certificate::None => "none",
        }
    }
}

impl FromStr for Certificate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "point" => Certificate::Point,
            "tree" => Certificate::Tree,
            "convex_set" | "convex" => Certificate::ConvexSet,
            "cut_locus" => Certificate::CutLocus,
            "affine_flat" | "flat" => Certificate::AffineFlat,
            "none" => Certificate::None,
            other => return Err(Error::InvalidParameter(format!("unknown certificate '{other}'"))),
        })
    }
}

/// A geometric simplicial complex; `cells` are closed under taking faces and
/// sorted by dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicialCore {
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
    certificate: Certificate,
}

impl SimplicialCore {
    /// Adds all missing faces of the given cells, then checks the
    /// certificate's combinatorial requirements.
    pub fn new(vertices: Vec<Vec<f64>>, cells: Vec<Vec<usize>>, certificate: Certificate) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidCore("no vertices".into()));
        }
        let dim = vertices[0].len();
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let mut closed: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        for i in 0..vertices.len() {
            closed.insert((0, vec![i]));
        }
        for cell in cells {
            let mut c = cell.clone();
            c.sort_unstable();
            c.dedup();
            if c.is_empty() || c.len() != cell.len() || c.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidCore(format!("bad cell {cell:?}")));
            }
            // every nonempty subset
            for mask in 1u32..(1 << c.len()) {
                let face: Vec<usize> = (0..c.len()).filter(|b| mask >> b & 1 == 1).map(|b| c[b]).collect();
                closed.insert((face.len() - 1, face));
            }
        }
        let core = Self {
            vertices,
            cells: closed.into_iter().map(|(_, c)| c).collect(),
            certificate,
        };
        if matches!(certificate, Certificate::Tree | Certificate::CutLocus) {
            core.check_tree()?;
        }
        if certificate == Certificate::Point && core.vertices.len() != 1 {
            return Err(Error::InvalidCore("point certificate needs exactly one vertex".into()));
        }
        Ok(core)
    }

    pub fn point(p: Vec<f64>) -> Self {
        Self::new(vec![p], vec![], Certificate::Point).expect("single vertex")
    }

    /// Fan triangulation of a convex polygon given in order.
    pub fn convex_polygon(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let m = vertices.len();
        let cells: Vec<Vec<usize>> = match m {
            0 => return Err(Error::InvalidCore("no vertices".into())),
            1 => vec![],
            2 => vec![vec![0, 1]],
            _ => (1..m - 1).map(|i| vec![0, i, i + 1]).collect(),
        };
        Self::new(vertices, cells, Certificate::ConvexSet)
    }

    /// Inscribed regular `segments`-gon of a disk in the plane.
    pub fn disk(center: [f64; 2], radius: f64, segments: usize) -> Result<Self> {
        let vertices = (0..segments)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / segments as f64;
                vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Self::convex_polygon(vertices)
    }

    /// Bounded patch of a flat covering the projections of `cloud`, so the
    /// distance from each cloud point to the patch equals its distance to
    /// the flat.
    pub fn from_flat(flat: &AffineFlat, cloud: &PointCloud) -> Result<Self> {
        let coords: Vec<Vec<f64>> = cloud.points().iter().map(|p| flat.coordinates(p)).collect();
        let range = |c: usize| {
            coords
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[c]), hi.max(x[c])))
        };
        let (vertices, cells) = match flat.k() {
            0 => (vec![flat.base().to_vec()], vec![]),
            1 => {
                let (lo, hi) = range(0);
                if hi - lo <= 0.0 {
                    (vec![flat.point_at(&[lo])], vec![])
                } else {
                    (vec![flat.point_at(&[lo]), flat.point_at(&[hi])], vec![vec![0, 1]])
                }
            }
            2 => {
                let ((a0, a1), (b0, b1)) = (range(0), range(1));
                let (a1, b1) = (a1.max(a0 + 1e-12), b1.max(b0 + 1e-12));
                (
                    vec![
                        flat.point_at(&[a0, b0]),
                        flat.point_at(&[a1, b0]),
                        flat.point_at(&[a1, b1]),
                        flat.point_at(&[a0, b1]),
                    ],
                    vec![vec![0, 1, 2], vec![0, 2, 3]],
                )
            }
            k => return Err(Error::InvalidCore(format!("flat patches are limited to k <= 2, got {k}"))),
        };
        Self::new(vertices, cells, Certificate::AffineFlat)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn dim(&self) -> usize {
        self.cells.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    fn edges(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cells.iter().filter(|c| c.len() == 2)
    }

    fn check_tree(&self) -> Result<()> {
        if self.dim() > 1 {
            return Err(Error::InvalidCore("tree certificate on a complex with 2-cells".into()));
        }
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        if edges.len() + 1 != n {
            return Err(Error::InvalidCore(format!(
                "tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        // union-find; n - 1 edges without a cycle connect everything
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in edges {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a == b {
                return Err(Error::InvalidCore("tree certificate on a complex with a cycle".into()));
            }
            parent[a] = b;
        }
        Ok(())
    }

    /// Exact Euclidean distance from `p` to the underlying set. Cells of
    /// dimension above 2 are rejected.
    pub fn distance(&self, p: &[f64]) -> Result<f64> {
        let mut best = f64::INFINITY;
        for c in &self.cells {
            let d = match c.len() {
                1 => dist(p, &self.vertices[c[0]]),
                2 => segment_distance(p, &self.vertices[c[0]], &self.vertices[c[1]]),
                3 => triangle_distance(p, &self.vertices[c[0]], &self.vertices[c[1]], &self.vertices[c[2]]),
                _ => return Err(Error::InvalidCore("cells of dimension > 2 are not supported".into())),
            };
            best = best.min(d);
        }
        Ok(best)
    }

    /// Points of the core such that every point of the underlying set lies
    /// within `h` of one of them.
    pub fn sample(&self, h: f64) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        self.visit_samples(h, |p| out.push(p.to_vec()))?;
        Ok(out)
    }

    /// Streams the points of [`Self::sample`] without storing them.
    pub fn visit_samples(&self, h: f64, mut visit: impl FnMut(&[f64])) -> Result<()> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("sampling step must be positive, got {h}")));
        }
        let mut buf = vec![0.0; self.ambient_dim()];
        for c in &self.cells {
            let v: Vec<&[f64]> = c.iter().map(|&i| self.vertices[i].as_slice()).collect();
            match v.len() {
                1 => visit(v[0]),
                2 => {
                    let m = (dist(v[0], v[1]) / h).ceil().max(1.0) as usize;
                    for i in 1..m {
                        let t = i as f64 / m as f64;
                        for (d, x) in buf.iter_mut().enumerate() {
                            *x = v[0][d] + t * (v[1][d] - v[0][d]);
                        }
                        visit(&buf);
                    }
                }
                3 => {
                    let m = (longest_edge(&v) / h).ceil().max(1.0) as usize;
                    for i in 1..m {
                        for j in 1..(m - i) {
                            let (s, t) = (i as f64 / m as f64, j as f64 / m as f64);
                            for (d, x) in buf.iter_mut().enumerate() {
                                *x = v[0][d] + s * (v[1][d] - v[0][d]) + t * (v[2][d] - v[0][d]);
                            }
                            visit(&buf);
                        }
                    }
                }
                _ => return Err(Error::InvalidCore("cells of dimension > 2 are not supported".into())),
            }
        }
        Ok(())
    }

    /// Vertex lines `v;x,y,...`, cell lines `c;i,j,...` (maximal and lower
    /// cells alike) and a `certificate=` line.
    pub fn to_text(&self) -> String {
        let mut out = format!("certificate={}\n", self.certificate.name());
        for v in &self.vertices {
            let coords: Vec<String> = v.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "v;{}", coords.join(","));
        }
        for c in self.cells.iter().filter(|c| c.len() > 1) {
            let idx: Vec<String> = c.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "c;{}", idx.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut cells = Vec::new();
        let mut certificate = Certificate::None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |message: String| Error::Parse { line: i + 1, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(c) = line.strip_prefix("certificate=") {
                certificate = c.parse().map_err(|e: Error| bad(e.to_string()))?;
            } else if let Some(rest) = line.strip_prefix("v;") {
                let v: std::result::Result<Vec<f64>, _> = rest.split(',').map(|x| x.trim().parse::<f64>()).collect();
                vertices.push(v.map_err(|e| bad(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("c;") {
                let c: std::result::Result<Vec<usize>, _> = rest.split(',').map(|x| x.trim().parse::<usize>()).collect();
                cells.push(c.map_err(|e| bad(e.to_string()))?);
            } else {
                return Err(bad(format!("unrecognized line '{line}'")));
            }
        }
        Self::new(vertices, cells, certificate)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    Norm::L2.distance(a, b)
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0);
    dist(p, &lerp(a, b, t))
}

pub(crate) fn triangle_distance(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let (e1, e2, w) = (sub(b, a), sub(c, a), sub(p, a));
    let (g11, g12, g22) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let det = g11 * g22 - g12 * g12;
    if det > 1e-14 * g11 * g22 {
        let (r1, r2) = (dot(&w, &e1), dot(&w, &e2));
        let s = (g22 * r1 - g12 * r2) / det;
        let t = (g11 * r2 - g12 * r1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            let q: Vec<f64> = (0..a.len()).map(|d| a[d] + s * e1[d] + t * e2[d]).collect();
            return dist(p, &q);
        }
    }
    segment_distance(p, a, b)
        .min(segment_distance(p, b, c))
        .min(segment_distance(p, a, c))
}

fn require_l2(cloud: &PointCloud, core: &SimplicialCore) -> Result<()> {
    if cloud.norm() != Norm::L2 {
        return Err(Error::UnsupportedNorm(cloud.norm()));
    }
    if core.ambient_dim() != cloud.dim() {
        return Err(Error::AmbientMismatch(format!(
            "cloud in R^{}, core in R^{}",
            cloud.dim(),
            core.ambient_dim()
        )));
    }
    Ok(())
}

/// `max_x d(x, core)`: the displacement of the nearest-point map onto the
/// core, an upper bound on the Alexandrov width (and on the treewidth when
/// the certificate guarantees trivial top homology).
pub fn core_displacement(cloud: &PointCloud, core: &SimplicialCore) -> Result<WidthEstimate> {
    require_l2(cloud, core)?;
    let mut value: f64 = 0.0;
    for p in cloud.points() {
        value = value.max(core.distance(p)?);
    }
    let kind = match core.certificate {
        Certificate::None => WidthKind::AwUpper,
        _ => WidthKind::TwUpper,
    };
    Ok(WidthEstimate {
        kind,
        k: core.dim(),
        value,
        exactness: Exactness::UpperBound,
        witness: Some(Witness::Core(core.clone())),
        notes: vec![],
    })
}

/// Euclidean minimum spanning tree (Prim, dense).
pub fn mst_core(cloud: &PointCloud) -> Result<SimplicialCore> {
    if cloud.norm() != Norm::L2 {
        return Err(Error::UnsupportedNorm(cloud.norm()));
    }
    let n = cloud.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    best[0].0 = 0.0;
    for step in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .expect("vertex left");
        in_tree[u] = true;
        if step > 0 {
            edges.push(vec![best[u].1, u]);
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = cloud.distance(u, v);
                if d < best[v].0 {
                    best[v] = (d, u);
                }
            }
        }
    }
    SimplicialCore::new(cloud.points().to_vec(), edges, Certificate::Tree)
}

/// Directed distance from the core to the cloud, maximized over a sample
/// with covering radius `h`.
fn core_to_cloud(cloud: &PointCloud, core: &SimplicialCore, h: f64) -> Result<f64> {
    let mut far: f64 = 0.0;
    core.visit_samples(h, |p| far = far.max(cloud.distance_to(p)))?;
    Ok(far)
}

fn core_extent(core: &SimplicialCore) -> f64 {
    let v = &core.vertices;
    let mut e: f64 = 0.0;
    for a in v {
        e = e.max(dist(a, &v[0]));
    }
    2.0 * e
}

fn longest_edge(v: &[&[f64]]) -> f64 {
    dist(v[0], v[1]).max(dist(v[1], v[2])).max(dist(v[0], v[2]))
}

/// Sampling step: `scale / 1000`, coarsened so the whole core yields at
/// most about two million samples.
fn default_step(core: &SimplicialCore, scale: f64) -> f64 {
    const BUDGET: f64 = 2e6;
    let (mut length, mut area) = (0.0, 0.0);
    for c in &core.cells {
        let v: Vec<&[f64]> = c.iter().map(|&i| core.vertices[i].as_slice()).collect();
        match v.len() {
            2 => length += dist(v[0], v[1]),
            3 => area += longest_edge(&v).powi(2) / 2.0,
            _ => {}
        }
    }
    let mut h = scale / 1000.0;
    // smallest step with length / h + area / h^2 <= BUDGET
    let floor = (length + (length * length + 4.0 * BUDGET * area).sqrt()) / (2.0 * BUDGET);
    if !(h >= floor) {
        h = floor;
    }
    h.max(1e-12)
}

/// Two-sided Hausdorff distance between the cloud and a certified core, as
/// an upper bound: exact from the cloud to the core, sampled with step `h`
/// from the core back, plus `h`.
pub(crate) fn certified_hausdorff(cloud: &PointCloud, core: &SimplicialCore, h: Option<f64>) -> Result<(f64, f64)> {
    require_l2(cloud, core)?;
    let mut to_core: f64 = 0.0;
    for p in cloud.points() {
        to_core = to_core.max(core.distance(p)?);
    }
    let h = match h {
        Some(h) => h,
        None => {
            let coarse = (core_extent(core) / 64.0).max(1e-9);
            let probe = core_to_cloud(cloud, core, coarse)?;
            default_step(core, to_core.max(probe))
        }
    };
    let back = core_to_cloud(cloud, core, h)?;
    // a vertex-only core is sampled exactly
    let cover = if core.dim() == 0 { 0.0 } else { h };
    Ok((to_core.max(back + cover), h))
}

pub fn uberspread_upper(cloud: &PointCloud, core: &SimplicialCore) -> Result<WidthEstimate> {
    uberspread_upper_with(cloud, core, None)
}

/// Überspread bound from any core `T`: `max(d_H(X, T), delta)` where `T` is
/// delta-übercontractible. Points, convex sets and cut loci have `delta = 0`.
/// For other cores every critical point of the distance to `T` lies in the
/// hull of its vertices `V` at height at most `cdef(V)`, so neighborhoods
/// beyond that radius are contractible; `cdef(V)` is exact in the plane and
/// replaced by the circumradius elsewhere.
pub fn uberspread_upper_with(cloud: &PointCloud, core: &SimplicialCore, h: Option<f64>) -> Result<WidthEstimate> {
    let (hausdorff, h) = certified_hausdorff(cloud, core, h)?;
    let delta = match core.certificate {
        Certificate::Point | Certificate::ConvexSet | Certificate::CutLocus => 0.0,
        _ => contractibility_radius(core)?,
    };
    let mut notes = vec![format!("sampling step {h:e}")];
    if delta > 0.0 {
        notes.push(format!("ubercontractible beyond {delta:e}"));
    }
    Ok(WidthEstimate {
        kind: WidthKind::UberspreadUpper,
        k: core.dim(),
        value: hausdorff.max(delta),
        exactness: Exactness::UpperBound,
        witness: Some(Witness::Core(core.clone())),
        notes,
    })
}

/// Radius past which every neighborhood of the core is contractible.
fn contractibility_radius(core: &SimplicialCore) -> Result<f64> {
    let mut vertices = core.vertices.clone();
    vertices.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    vertices.dedup();
    let v = PointCloud::new(vertices, Norm::L2)?;
    let cdef = crate::geometry::convexity_deficiency(&v)?;
    Ok(match cdef.exactness {
        Exactness::Exact => cdef.value,
        _ => crate::metric::circumradius(&v)?,
    })
}
