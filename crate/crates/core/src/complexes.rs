//! Filtered Vietoris–Rips and Čech complexes.
//!
//! Filtrations use the closed convention: a simplex is present at parameter
//! `r` when its value is `<= r`. Intervals come out half-open on the other
//! side from the strict-inequality convention, but for finite inputs the
//! multiset of interval endpoints is the same.
//!
//! VR values are diameters of vertex sets. Čech values are radii of minimum
//! enclosing balls, i.e. the smallest `r` for which the radius-`r` balls
//! around the vertices share a point. With this scaling
//! `C_r ⊂ V_2r ⊂ C_2r`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::metric::{min_ball_l2, min_ball_linf, FiniteMetricSpace, Norm, PointCloud};

pub type Vertices = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vertices,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Facets in the order obtained by dropping vertex 0, 1, ...
    pub fn facets(&self) -> impl Iterator<Item = Vertices> + '_ {
        let len = self.vertices.len();
        (0..if len > 1 { len } else { 0 }).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "vr")]
    VietorisRips,
    #[serde(rename = "cech")]
    Cech,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flavor::VietorisRips => "vr",
            Flavor::Cech => "cech",
        })
    }
}

/// Simplices sorted by `(value, dimension, lexicographic vertices)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_value: f64,
    flavor: Flavor,
    n_points: usize,
}

fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

impl FilteredComplex {
    /// Sorts the simplices into filtration order and checks closure and
    /// monotonicity.
    pub fn new(
        simplices: Vec<Simplex>,
        max_dim: usize,
        max_value: f64,
        flavor: Flavor,
        n_points: usize,
    ) -> Result<Self> {
        let fc = Self::assemble(simplices, max_dim, max_value, flavor, n_points);
        fc.validate()?;
        Ok(fc)
    }

    /// For builders whose output is closed and monotone by construction.
    fn assemble(
        mut simplices: Vec<Simplex>,
        max_dim: usize,
        max_value: f64,
        flavor: Flavor,
        n_points: usize,
    ) -> Self {
        simplices.sort_by(filtration_order);
        Self {
            simplices,
            max_dim,
            max_value,
            flavor,
            n_points,
        }
    }

    /// Face closure, monotone values, sorted vertex lists and the dimension cap.
    pub fn validate(&self) -> Result<()> {
        let index = self.index();
        for s in &self.simplices {
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "simplex {:?} has unsorted or repeated vertices",
                    s.vertices
                )));
            }
            if !(s.value >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "simplex {:?} has invalid value {}",
                    s.vertices, s.value
                )));
            }
            if s.dim() > self.max_dim {
                return Err(Error::InvalidParameter(format!(
                    "simplex {:?} exceeds max_dim {}",
                    s.vertices, self.max_dim
                )));
            }
            for facet in s.facets() {
                match index.get(&facet) {
                    None => {
                        return Err(Error::InvalidParameter(format!(
                            "facet {facet:?} of {:?} missing",
                            s.vertices
                        )))
                    }
                    Some(&i) if self.simplices[i].value > s.value => {
                        return Err(Error::InvalidParameter(format!(
                            "facet {facet:?} enters after {:?}",
                            s.vertices
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Map from vertex list to position in filtration order.
    pub fn index(&self) -> HashMap<Vertices, usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.clone(), i))
            .collect()
    }

    pub fn value_of(&self, vertices: &[u32]) -> Option<f64> {
        self.simplices
            .iter()
            .find(|s| s.vertices.as_slice() == vertices)
            .map(|s| s.value)
    }

    /// One simplex per line, `value;v0,v1,...,vk`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let verts: Vec<String> = s.vertices.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{};{}", s.value, verts.join(","));
        }
        out
    }

    pub fn parse_dump(text: &str, flavor: Flavor) -> Result<Self> {
        let mut simplices = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no + 1,
                message,
            };
            let (value, verts) = line
                .split_once(';')
                .ok_or_else(|| parse_err("expected 'value;v0,...'".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad value: {e}")))?;
            let vertices = verts
                .split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<std::result::Result<Vertices, _>>()
                .map_err(|e| parse_err(format!("bad vertex: {e}")))?;
            simplices.push(Simplex { vertices, value });
        }
        let max_dim = simplices.iter().map(Simplex::dim).max().unwrap_or(0);
        let max_value = simplices.iter().map(|s| s.value).fold(0.0, f64::max);
        let n_points = simplices
            .iter()
            .flat_map(|s| s.vertices.iter())
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0);
        Self::new(simplices, max_dim, max_value, flavor, n_points)
    }
}

fn check_caps(max_value: f64) -> Result<()> {
    if !(max_value >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_value must be a nonnegative number, got {max_value}"
        )));
    }
    Ok(())
}

/// Adjacency lists of the graph `value(i, j) <= max_value`, higher neighbors
/// only, sorted.
fn upper_neighbors(n: usize, max_value: f64, edge_value: impl Fn(usize, usize) -> f64) -> Vec<Vec<u32>> {
    (0..n)
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| edge_value(i, j) <= max_value)
                .map(|j| j as u32)
                .collect()
        })
        .collect()
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn vietoris_rips(ms: &FiniteMetricSpace, max_dim: usize, max_value: f64) -> Result<FilteredComplex> {
    check_caps(max_value)?;
    let n = ms.len();
    let nbrs = upper_neighbors(n, max_value, |i, j| ms.get(i, j));
    let mut simplices = Vec::new();

    // depth-first clique expansion; `cands` holds the common higher neighbors
    fn expand(
        ms: &FiniteMetricSpace,
        nbrs: &[Vec<u32>],
        max_dim: usize,
        verts: &mut Vertices,
        value: f64,
        cands: &[u32],
        out: &mut Vec<Simplex>,
    ) {
        out.push(Simplex {
            vertices: verts.clone(),
            value,
        });
        if verts.len() > max_dim {
            return;
        }
        for (pos, &w) in cands.iter().enumerate() {
            let v = verts
                .iter()
                .map(|&u| ms.get(u as usize, w as usize))
                .fold(value, f64::max);
            let next = intersect_sorted(&cands[pos + 1..], &nbrs[w as usize]);
            verts.push(w);
            expand(ms, nbrs, max_dim, verts, v, &next, out);
            verts.pop();
        }
    }

    for i in 0..n {
        let mut verts: Vertices = SmallVec::from_slice(&[i as u32]);
        expand(ms, &nbrs, max_dim, &mut verts, 0.0, &nbrs[i], &mut simplices);
    }
    Ok(FilteredComplex::assemble(simplices, max_dim, max_value, Flavor::VietorisRips, n))
}

pub fn cech(cloud: &PointCloud, max_dim: usize, max_value: f64) -> Result<FilteredComplex> {
    check_caps(max_value)?;
    let norm = cloud.norm();
    if norm == Norm::L1 {
        return Err(Error::UnsupportedNorm(Norm::L1));
    }
    let n = cloud.len();
    // the two-point enclosing ball has radius d/2 in every norm
    let nbrs = upper_neighbors(n, max_value, |i, j| cloud.distance(i, j) / 2.0);

    struct Frame {
        verts: Vertices,
        value: f64,
        center: Vec<f64>,
        radius: f64,
        cands: Vec<u32>,
    }

    let mut simplices: Vec<Simplex> = Vec::new();
    let mut values: HashMap<Vertices, f64> = HashMap::new();
    let mut level: Vec<Frame> = (0..n)
        .map(|i| Frame {
            verts: SmallVec::from_slice(&[i as u32]),
            value: 0.0,
            center: cloud.point(i).to_vec(),
            radius: 0.0,
            cands: nbrs[i].clone(),
        })
        .collect();

    for dim in 0..=max_dim {
        for f in &level {
            simplices.push(Simplex {
                vertices: f.verts.clone(),
                value: f.value,
            });
        }
        if dim == max_dim {
            break;
        }
        values.clear();
        for f in &level {
            values.insert(f.verts.clone(), f.value);
        }
        let mut next_level = Vec::new();
        for f in &level {
            for (pos, &w) in f.cands.iter().enumerate() {
                let p = cloud.point(w as usize);
                let (center, radius) = if dim == 0 {
                    let q = cloud.point(f.verts[0] as usize);
                    let c: Vec<f64> = q.iter().zip(p).map(|(a, b)| (a + b) / 2.0).collect();
                    (c, cloud.distance(f.verts[0] as usize, w as usize) / 2.0)
                } else if norm.distance(&f.center, p) <= f.radius {
                    (f.center.clone(), f.radius)
                } else {
                    let pts: Vec<&[f64]> = f
                        .verts
                        .iter()
                        .map(|&v| cloud.point(v as usize))
                        .chain(std::iter::once(p))
                        .collect();
                    match norm {
                        Norm::L2 => min_ball_l2(&pts),
                        _ => min_ball_linf(&pts),
                    }
                };
                let mut verts = f.verts.clone();
                verts.push(w);
                let s = Simplex {
                    vertices: verts.clone(),
                    value: 0.0,
                };
                // keep the filtration monotone under round-off
                let mut value = radius;
                let mut all_faces = true;
                for facet in s.facets() {
                    match values.get(&facet) {
                        Some(&fv) => value = value.max(fv),
                        None => {
                            all_faces = false;
                            break;
                        }
                    }
                }
                if !all_faces || value > max_value {
                    continue;
                }
                let cands = intersect_sorted(&f.cands[pos + 1..], &nbrs[w as usize]);
                next_level.push(Frame {
                    verts,
                    value,
                    center,
                    radius,
                    cands,
                });
            }
        }
        level = next_level;
    }
    Ok(FilteredComplex::assemble(simplices, max_dim, max_value, Flavor::Cech, n))
}

/// Checks `C_r ⊂ V_2r ⊂ C_2r` at every sampled `r`.
pub fn validate_interleaving(vr: &FilteredComplex, cech: &FilteredComplex, sample_values: &[f64]) -> Result<bool> {
    if vr.n_points() != cech.n_points() {
        return Err(Error::InvalidParameter(format!(
            "complexes built on {} and {} points",
            vr.n_points(),
            cech.n_points()
        )));
    }
    let vr_index = vr.index();
    let cech_index = cech.index();
    for &r in sample_values {
        for s in cech.simplices().iter().filter(|s| s.value <= r) {
            match vr_index.get(&s.vertices) {
                Some(&i) if vr.simplices()[i].value <= 2.0 * r => {}
                // simplex cut off by the VR caps: only a failure if the caps
                // should have included it
                None if s.dim() > vr.max_dim() || 2.0 * r > vr.max_value() => {}
                _ => return Ok(false),
            }
        }
        for s in vr.simplices().iter().filter(|s| s.value <= 2.0 * r) {
            match cech_index.get(&s.vertices) {
                Some(&i) if cech.simplices()[i].value <= 2.0 * r => {}
                None if s.dim() > cech.max_dim() || 2.0 * r > cech.max_value() => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}
