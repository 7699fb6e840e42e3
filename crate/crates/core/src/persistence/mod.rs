//! Persistent homology over Z/2 with reduced degree 0.

mod bottleneck;
mod brute;
mod reduce;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub use bottleneck::bottleneck_distance;
pub use brute::{brute_force_persistence, BRUTE_FORCE_CAP};
pub use reduce::{compute_persistence, compute_persistence_with, Reduction};

/// Relative gap below which two filtration values are the same value
/// computed along different paths.
pub const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub degree: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes that survive the truncated filtration.
    pub death: f64,
}

impl Interval {
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

/// Multiset of `(degree, birth, death)` intervals, kept sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    intervals: Vec<Interval>,
}

impl PersistenceDiagram {
    /// Drops zero-length intervals, including those whose endpoints agree
    /// up to rounding, and sorts the rest.
    pub fn new(mut intervals: Vec<Interval>) -> Self {
        intervals.retain(|iv| iv.death.is_infinite() || iv.death - iv.birth > ROUNDING * iv.birth.abs().max(iv.death.abs()));
        intervals.sort_by(|a, b| {
            a.degree
                .cmp(&b.degree)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Self { intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn degree(&self, k: usize) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |iv| iv.degree == k)
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.intervals.iter().map(|iv| iv.degree).max()
    }

    pub fn has_essential(&self) -> bool {
        self.intervals.iter().any(Interval::is_essential)
    }

    /// Every endpoint multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.intervals
                .iter()
                .map(|iv| Interval {
                    degree: iv.degree,
                    birth: iv.birth * factor,
                    death: iv.death * factor,
                })
                .collect(),
        )
    }

    /// `{"degrees": {"0": [[b, d], ...], ...}}`; an infinite death is `null`.
    pub fn to_json(&self) -> Value {
        let mut degrees: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        for iv in &self.intervals {
            let death = if iv.death.is_finite() { json!(iv.death) } else { Value::Null };
            degrees
                .entry(iv.degree.to_string())
                .or_default()
                .push(json!([iv.birth, death]));
        }
        json!({ "degrees": degrees })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            line: 0,
            message: m.to_string(),
        };
        let degrees = value
            .get("degrees")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing 'degrees' object"))?;
        let mut intervals = Vec::new();
        for (k, list) in degrees {
            let degree: usize = k.parse().map_err(|_| bad("degree keys must be integers"))?;
            for pair in list.as_array().ok_or_else(|| bad("degree entry must be a list"))? {
                let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("interval must be [birth, death]"))?;
                let birth = pair[0].as_f64().ok_or_else(|| bad("birth must be a number"))?;
                let death = match &pair[1] {
                    Value::Null => f64::INFINITY,
                    v => v.as_f64().ok_or_else(|| bad("death must be a number or null"))?,
                };
                intervals.push(Interval { degree, birth, death });
            }
        }
        Ok(Self::new(intervals))
    }

    /// `degree,birth,death` rows with a header; infinite deaths as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,birth,death\n");
        for iv in &self.intervals {
            let _ = writeln!(out, "{},{},{}", iv.degree, iv.birth, iv.death);
        }
        out
    }
}

/// Largest finite death over all degrees; 0 for an empty diagram.
pub fn extinction_time(pd: &PersistenceDiagram) -> f64 {
    pd.intervals()
        .iter()
        .filter(|iv| iv.death.is_finite())
        .map(|iv| iv.death)
        .fold(0.0, f64::max)
}

/// `(birth, death, death - birth)` for every interval of one degree.
pub fn lifespans(pd: &PersistenceDiagram, degree: usize) -> Vec<(f64, f64, f64)> {
    pd.degree(degree).map(|iv| (iv.birth, iv.death, iv.lifespan())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{cech, vietoris_rips};
    use crate::metric::{pairwise_distances, FiniteMetricSpace, Norm, PointCloud};

    fn equilateral_pd() -> PersistenceDiagram {
        let ms = FiniteMetricSpace::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        compute_persistence(&vietoris_rips(&ms, 2, 2.0).unwrap(), 1).unwrap()
    }

    fn square_vr_pd() -> PersistenceDiagram {
        let c = PointCloud::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            Norm::L2,
        )
        .unwrap();
        let fc = vietoris_rips(&pairwise_distances(&c).unwrap(), 2, 2.0).unwrap();
        compute_persistence(&fc, 1).unwrap()
    }

    #[test]
    fn extinction_examples() {
        assert_eq!(extinction_time(&equilateral_pd()), 1.0);
        assert!((extinction_time(&square_vr_pd()) - 2f64.sqrt()).abs() < 1e-15);
        let single = PointCloud::new(vec![vec![0.0, 0.0]], Norm::L2).unwrap();
        let pd = compute_persistence(&cech(&single, 1, 1.0).unwrap(), 0).unwrap();
        assert!(pd.is_empty());
        assert_eq!(extinction_time(&pd), 0.0);
    }

    #[test]
    fn lifespan_projections() {
        assert_eq!(lifespans(&equilateral_pd(), 0), vec![(0.0, 1.0, 1.0); 2]);
        assert!(lifespans(&equilateral_pd(), 1).is_empty());
        let sq = lifespans(&square_vr_pd(), 1);
        assert_eq!(sq.len(), 1);
        assert_eq!(sq[0].0, 1.0);
        assert!((sq[0].2 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn json_and_csv_formats() {
        let pd = PersistenceDiagram::new(vec![
            Interval { degree: 0, birth: 0.0, death: 1.0 },
            Interval { degree: 1, birth: 0.5, death: f64::INFINITY },
            Interval { degree: 1, birth: 0.5, death: 0.5 },
        ]);
        assert_eq!(pd.len(), 2);
        let j = pd.to_json();
        assert_eq!(j, json!({"degrees": {"0": [[0.0, 1.0]], "1": [[0.5, null]]}}));
        assert_eq!(PersistenceDiagram::from_json(&j).unwrap(), pd);
        assert_eq!(pd.to_csv(), "degree,birth,death\n0,0,1\n1,0.5,inf\n");
        assert!(PersistenceDiagram::from_json(&json!({"x": 1})).is_err());
    }
}
