//! Hyperconvexity deficiency through the tight span `E(X)`.
//!
//! For `f` in `E(X)` the sup-distance to the embedded point `d(x, .)` is
//! `f(x)`, and `X` itself lies in `E(X)`, so the Hausdorff distance between
//! `X` and `E(X)` is `max over f in E(X) of min_x f(x)`.
//!
//! `f` is in `E(X)` exactly when it is feasible (`f(x) + f(y) >= d(x, y)`,
//! `f >= 0`) and every point is tight against some partner. Fixing a set of
//! tight pairs that covers every point leaves a linear program; adding pairs
//! only shrinks it, so the search branches on partners for the first
//! uncovered point and prunes with the relaxation value and with
//! `min f <= d(u, v) / 2` on any tight pair.

use std::collections::HashSet;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{diameter, FiniteMetricSpace};
use crate::widths::Exactness;

pub const DEFAULT_HCDEF_EXACT_LIMIT: usize = 8;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightSpanPoint {
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperconvexityDeficiency {
    pub value: f64,
    pub witness: TightSpanPoint,
    /// `Exact`, or `Heuristic` for a lower bound.
    pub exactness: Exactness,
}

pub fn tight_span_membership(f: &[f64], ms: &FiniteMetricSpace) -> Result<bool> {
    let n = ms.len();
    if f.len() != n {
        return Err(Error::InvalidParameter(format!("function of length {} on {n} points", f.len())));
    }
    for x in 0..n {
        if !(f[x] >= -TOL) {
            return Ok(false);
        }
        // f(x) = max_y d(x, y) - f(y), with y = x contributing -f(x)
        let m = (0..n).map(|y| ms.get(x, y) - f[y]).fold(f64::NEG_INFINITY, f64::max);
        if (f[x] - m).abs() > TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gauss–Seidel sweeps of `f(x) <- max(0, max_{y != x} d(x, y) - f(y))`
/// until nothing moves.
fn settle(ms: &FiniteMetricSpace, f: &mut [f64], order: &[usize]) {
    for _ in 0..50 {
        let mut moved = false;
        for &x in order {
            let m = (0..ms.len())
                .filter(|&y| y != x)
                .map(|y| ms.get(x, y) - f[y])
                .fold(0.0, f64::max);
            if m != f[x] {
                moved |= (m - f[x]).abs() > 1e-15;
                f[x] = m;
            }
        }
        if !moved {
            break;
        }
    }
}

fn min_of(f: &[f64]) -> f64 {
    f.iter().copied().fold(f64::INFINITY, f64::min)
}

fn heuristic(ms: &FiniteMetricSpace, starts: usize, seed: u64) -> (f64, Vec<f64>) {
    let n = ms.len();
    let diam = diameter(ms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // a Kuratowski point always qualifies
    let mut best = (0.0, ms.row(0).to_vec());
    let mut order: Vec<usize> = (0..n).collect();
    for s in 0..starts {
        let mut f: Vec<f64> = match s {
            0 => vec![diam / 2.0; n],
            1 => (0..n).map(|x| ms.eccentricity(x) / 2.0).collect(),
            _ => (0..n).map(|_| diam * (0.5 + 0.1 * (rng.random::<f64>() - 0.5))).collect(),
        };
        if s > 0 {
            order.shuffle(&mut rng);
        }
        settle(ms, &mut f, &order);
        if tight_span_membership(&f, ms).unwrap_or(false) && min_of(&f) > best.0 {
            best = (min_of(&f), f);
        }
    }
    best
}

/// `max t` subject to `t <= f <= ecc`, feasibility, and equality on `tight`.
fn relaxation(ms: &FiniteMetricSpace, tight: &[(usize, usize)]) -> Result<Option<(f64, Vec<f64>)>> {
    let n = ms.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let diam = diameter(ms);
    let t = lp.add_var(1.0, (0.0, diam));
    let f: Vec<_> = (0..n).map(|x| lp.add_var(0.0, (0.0, ms.eccentricity(x)))).collect();
    for &fx in &f {
        lp.add_constraint([(fx, 1.0), (t, -1.0)], ComparisonOp::Ge, 0.0);
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let op = if tight.contains(&(x, y)) { ComparisonOp::Eq } else { ComparisonOp::Ge };
            lp.add_constraint([(f[x], 1.0), (f[y], 1.0)], op, ms.get(x, y));
        }
    }
    match lp.solve() {
        Ok(outcome) => {
            let sol = outcome
                .into_solution()
                .map_err(|_| Error::LinearProgram("solve interrupted".into()))?;
            Ok(Some((sol.var_value(t), f.iter().map(|&v| sol.var_value(v)).collect())))
        }
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}

struct Search<'a> {
    ms: &'a FiniteMetricSpace,
    best: (f64, Vec<f64>),
    seen: HashSet<Vec<(usize, usize)>>,
}

impl Search<'_> {
    fn visit(&mut self, tight: &mut Vec<(usize, usize)>) -> Result<()> {
        let mut key = tight.clone();
        key.sort_unstable();
        if !self.seen.insert(key) {
            return Ok(());
        }
        let Some((t, f)) = relaxation(self.ms, tight)? else { return Ok(()) };
        if t <= self.best.0 + 1e-12 {
            return Ok(());
        }
        let n = self.ms.len();
        let covered = |x: usize| tight.iter().any(|&(a, b)| a == x || b == x);
        let Some(u) = (0..n).find(|&x| !covered(x)) else {
            // a full pattern: the optimum is in E(X) up to rounding
            let mut g = f;
            let order: Vec<usize> = (0..n).collect();
            settle(self.ms, &mut g, &order);
            if tight_span_membership(&g, self.ms)? && min_of(&g) > self.best.0 {
                self.best = (min_of(&g), g);
            }
            return Ok(());
        };
        let mut partners: Vec<usize> = (0..n)
            .filter(|&v| v != u && self.ms.get(u, v) / 2.0 > self.best.0 + 1e-12)
            .collect();
        // long pairs first: they admit the largest minima
        partners.sort_by(|&a, &b| self.ms.get(u, b).total_cmp(&self.ms.get(u, a)));
        for v in partners {
            if self.ms.get(u, v) / 2.0 <= self.best.0 + 1e-12 {
                break;
            }
            tight.push((u.min(v), u.max(v)));
            self.visit(tight)?;
            tight.pop();
        }
        Ok(())
    }
}

pub fn hyperconvexity_deficiency(ms: &FiniteMetricSpace, exact_limit: usize) -> Result<HyperconvexityDeficiency> {
    let n = ms.len();
    if n == 1 {
        return Ok(HyperconvexityDeficiency {
            value: 0.0,
            witness: TightSpanPoint { f: vec![0.0] },
            exactness: Exactness::Exact,
        });
    }
    let start = heuristic(ms, 64, 0);
    if n > exact_limit {
        return Ok(HyperconvexityDeficiency {
            value: start.0,
            witness: TightSpanPoint { f: start.1 },
            exactness: Exactness::Heuristic,
        });
    }
    let mut search = Search {
        ms,
        best: start,
        seen: HashSet::new(),
    };
    search.visit(&mut Vec::new())?;
    let (value, f) = search.best;
    Ok(HyperconvexityDeficiency {
        value,
        witness: TightSpanPoint { f },
        exactness: Exactness::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{pairwise_distances, radius, Norm, PointCloud};
    use proptest::prelude::*;

    fn space(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
        FiniteMetricSpace::from_rows(rows).unwrap()
    }

    /// Maximum of `min f` over grid points of E(X): the first `n - 1`
    /// coordinates range over a grid, the last is forced by extremality.
    fn grid_oracle(ms: &FiniteMetricSpace, h: f64) -> f64 {
        let n = ms.len();
        let top = diameter(ms);
        let steps = (top / h).round() as usize;
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; n - 1];
        loop {
            let mut f: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            let last = (0..n - 1).map(|y| ms.get(n - 1, y) - f[y]).fold(0.0, f64::max);
            f.push(last);
            if tight_span_membership(&f, ms).unwrap() {
                best = best.max(min_of(&f));
            }
            let mut c = 0;
            loop {
                if c == n - 1 {
                    return best;
                }
                idx[c] += 1;
                if idx[c] <= steps {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
        }
    }

    fn equilateral4() -> FiniteMetricSpace {
        space((0..4).map(|i| (0..4).map(|j| if i == j { 0.0 } else { 2.0 }).collect()).collect())
    }

    fn star() -> FiniteMetricSpace {
        space(vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ])
    }

    #[test]
    fn membership_examples() {
        let ms = star();
        for x in 0..4 {
            assert!(tight_span_membership(ms.row(x), &ms).unwrap());
            let up: Vec<f64> = ms.row(x).iter().map(|v| v + 0.5).collect();
            assert!(!tight_span_membership(&up, &ms).unwrap());
        }
        assert!(tight_span_membership(&[1.0, 1.0], &ms).is_err());
    }

    #[test]
    fn exact_examples() {
        let one = space(vec![vec![0.0]]);
        assert_eq!(hyperconvexity_deficiency(&one, 8).unwrap().value, 0.0);

        let ms = equilateral4();
        let r = hyperconvexity_deficiency(&ms, 8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert_eq!(r.exactness, Exactness::Exact);
        assert!(r.witness.f.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(tight_span_membership(&r.witness.f, &ms).unwrap());
        assert!((grid_oracle(&ms, 0.01) - r.value).abs() <= 0.01);

        let ms = star();
        let r = hyperconvexity_deficiency(&ms, 8).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9, "{}", r.value);
        assert!(tight_span_membership(&r.witness.f, &ms).unwrap());
        assert!((grid_oracle(&ms, 0.01) - r.value).abs() <= 0.01);
    }

    #[test]
    fn square_boundary_in_max_norm() {
        // the l_inf square boundary is at deficiency 1 from its tight span
        let pts: Vec<Vec<f64>> = [[-1.0, -1.0], [0.0, -1.0], [1.0, -1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]]
            .iter()
            .map(|p| p.to_vec())
            .collect();
        let ms = pairwise_distances(&PointCloud::new(pts, Norm::Linf).unwrap()).unwrap();
        let r = hyperconvexity_deficiency(&ms, 8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    fn random_space() -> impl Strategy<Value = FiniteMetricSpace> {
        prop::collection::vec(prop::collection::vec(0.0f64..4.0, 2), 2..6).prop_filter_map("distinct", |pts| {
            PointCloud::new(pts, Norm::L2).ok().and_then(|c| pairwise_distances(&c).ok())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn exact_is_a_valid_maximum(ms in random_space()) {
            let r = hyperconvexity_deficiency(&ms, 8).unwrap();
            prop_assert!(tight_span_membership(&r.witness.f, &ms).unwrap());
            prop_assert!((min_of(&r.witness.f) - r.value).abs() < 1e-12);
            prop_assert!(r.value <= radius(&ms) + 1e-9);
            let h = heuristic(&ms, 16, 1);
            prop_assert!(h.0 <= r.value + 1e-9);
        }

        #[test]
        fn exact_matches_grid(ds in prop::collection::vec(4u32..=8, 6)) {
            // quarter-integer distances in [1, 2] always form a metric
            let mut rows = vec![vec![0.0; 4]; 4];
            let mut it = ds.iter();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let d = *it.next().unwrap() as f64 / 4.0;
                    rows[i][j] = d;
                    rows[j][i] = d;
                }
            }
            let ms = space(rows);
            let r = hyperconvexity_deficiency(&ms, 8).unwrap();
            let h = 1.0 / 32.0;
            let g = grid_oracle(&ms, h);
            prop_assert!(r.value >= g - 1e-9, "{} < grid {}", r.value, g);
            prop_assert!(r.value - g <= h, "{} vs grid {}", r.value, g);
        }
    }
}
