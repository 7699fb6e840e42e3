//! Width invariants of point clouds: Kolmogorov widths, displacement of
//! candidate cores (upper bounds on Alexandrov width and treewidth), spread
//! and überspread.

mod cores;
mod kolmogorov;
mod spread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::dot;

pub(crate) use cores::certified_hausdorff;
pub use cores::{core_displacement, mst_core, uberspread_upper, uberspread_upper_with, Certificate, SimplicialCore};
pub use kolmogorov::{kolmogorov_width, kolmogorov_width_with, KwConfig};
pub use spread::{spread, DEFAULT_SPREAD_EXACT_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    UpperBound,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthKind {
    #[serde(rename = "KW")]
    Kw,
    #[serde(rename = "AW_upper")]
    AwUpper,
    #[serde(rename = "TW_upper")]
    TwUpper,
    #[serde(rename = "Spread")]
    Spread,
    #[serde(rename = "Uberspread_upper")]
    UberspreadUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Flat(AffineFlat),
    Core(SimplicialCore),
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub kind: WidthKind,
    pub k: usize,
    pub value: f64,
    pub exactness: Exactness,
    pub witness: Option<Witness>,
    /// Caveats that travel with the number, e.g. an assumed certificate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl WidthEstimate {
    /// Urysohn width bound derived from an Alexandrov-type upper bound `a`:
    /// `UW_k <= 2a`. `None` for other kinds.
    pub fn urysohn_upper(&self) -> Option<f64> {
        matches!(self.kind, WidthKind::AwUpper | WidthKind::TwUpper).then_some(2.0 * self.value)
    }
}

/// Affine k-plane `base + span(directions)` in R^N with orthonormal
/// directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFlat {
    base: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

impl AffineFlat {
    pub fn new(base: Vec<f64>, directions: Vec<Vec<f64>>) -> Result<Self> {
        let n = base.len();
        if directions.len() >= n.max(1) {
            return Err(Error::InvalidParameter(format!(
                "flat of dimension {} in R^{n}",
                directions.len()
            )));
        }
        for (i, u) in directions.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    index: i,
                    expected: n,
                    found: u.len(),
                });
            }
            for (j, v) in directions.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(u, v) - target).abs() > 1e-9 {
                    return Err(Error::InvalidParameter("flat directions are not orthonormal".into()));
                }
            }
        }
        Ok(Self { base, directions })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn k(&self) -> usize {
        self.directions.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Coordinates of the orthogonal projection of `p` along the directions.
    pub fn coordinates(&self, p: &[f64]) -> Vec<f64> {
        let rel: Vec<f64> = p.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        self.directions.iter().map(|u| dot(&rel, u)).collect()
    }

    pub fn point_at(&self, coords: &[f64]) -> Vec<f64> {
        let mut p = self.base.clone();
        for (u, &c) in self.directions.iter().zip(coords) {
            for (x, ui) in p.iter_mut().zip(u) {
                *x += c * ui;
            }
        }
        p
    }

    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        self.point_at(&self.coordinates(p))
    }

    pub fn distance(&self, p: &[f64]) -> f64 {
        let q = self.project(p);
        p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_projection() {
        let s = 0.5f64.sqrt();
        let f = AffineFlat::new(vec![0.0, 1.0], vec![vec![s, s]]).unwrap();
        assert_eq!(f.k(), 1);
        assert!((f.distance(&[1.0, 0.0]) - 2f64.sqrt()).abs() < 1e-12);
        assert!(f.distance(&[3.0, 4.0]) < 1e-12);
        assert!(AffineFlat::new(vec![0.0, 0.0], vec![vec![1.0, 0.1]]).is_err());
        assert!(AffineFlat::new(vec![0.0], vec![vec![1.0]]).is_err());
    }

    #[test]
    fn urysohn_doubles_alexandrov_bounds() {
        let mut e = WidthEstimate {
            kind: WidthKind::AwUpper,
            k: 1,
            value: 0.75,
            exactness: Exactness::UpperBound,
            witness: None,
            notes: vec![],
        };
        assert_eq!(e.urysohn_upper(), Some(1.5));
        e.kind = WidthKind::Kw;
        assert_eq!(e.urysohn_upper(), None);
    }
}
