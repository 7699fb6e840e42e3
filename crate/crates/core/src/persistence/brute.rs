//! Interval multiplicities from ranks of inclusion-induced maps.
//!
//! For critical values `c_0 < ... < c_m` and `r(i, j)` the rank of
//! `H_k(K_i) -> H_k(K_j)` in reduced homology, the interval `[c_i, c_j)`
//! has multiplicity `r(i, j-1) - r(i-1, j-1) - r(i, j) + r(i-1, j)` and the
//! essential interval `[c_i, inf)` has multiplicity `r(i, m) - r(i-1, m)`.
//! The rank is `rank(Z_k(K_i) + B_k(K_j)) - rank(B_k(K_j))`, computed by
//! dense Gaussian elimination over Z/2.

use std::collections::HashMap;

use crate::complexes::{FilteredComplex, Vertices};
use crate::error::{Error, Result};

use super::{Interval, PersistenceDiagram};

pub const BRUTE_FORCE_CAP: usize = 2000;

#[derive(Clone, PartialEq, Eq)]
struct BitVec(Vec<u64>);

impl BitVec {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64).max(1)])
    }
    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn xor(&mut self, other: &BitVec) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
    fn highest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}

/// Incremental echelon basis keyed by highest set bit.
#[derive(Clone, Default)]
struct Echelon {
    rows: HashMap<usize, BitVec>,
}

impl Echelon {
    /// Returns true when `v` was independent of the current span.
    fn insert(&mut self, mut v: BitVec) -> bool {
        while let Some(h) = v.highest() {
            match self.rows.get(&h) {
                Some(r) => v.xor(r),
                None => {
                    self.rows.insert(h, v);
                    return true;
                }
            }
        }
        false
    }
    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Basis of the cycle space of the first `count` k-simplices, as vectors over
/// all k-simplices. `boundary[l]` lists the (k-1)-indices of simplex `l`; for
/// reduced degree 0 every vertex maps to the single augmentation coordinate.
fn cycle_basis(boundary: &[Vec<usize>], count: usize, n_k: usize, n_km1: usize) -> Vec<BitVec> {
    // reduce boundary columns while tracking their chains
    let mut pivots: HashMap<usize, (BitVec, BitVec)> = HashMap::new();
    let mut cycles = Vec::new();
    for (l, faces) in boundary.iter().take(count).enumerate() {
        let mut col = BitVec::zeros(n_km1);
        for &f in faces {
            col.flip(f);
        }
        let mut chain = BitVec::zeros(n_k);
        chain.flip(l);
        loop {
            match col.highest() {
                None => {
                    cycles.push(chain);
                    break;
                }
                Some(h) => match pivots.get(&h) {
                    Some((pc, pch)) => {
                        col.xor(pc);
                        chain.xor(pch);
                    }
                    None => {
                        pivots.insert(h, (col, chain));
                        break;
                    }
                },
            }
        }
    }
    cycles
}

pub fn brute_force_persistence(fc: &FilteredComplex, max_degree: usize) -> Result<PersistenceDiagram> {
    if fc.len() > BRUTE_FORCE_CAP {
        return Err(Error::TooManySimplices {
            count: fc.len(),
            cap: BRUTE_FORCE_CAP,
        });
    }
    if max_degree >= fc.max_dim() {
        return Err(Error::DegreeTooHigh {
            max_degree,
            max_dim: fc.max_dim(),
        });
    }
    let s = fc.simplices();
    let mut crit: Vec<f64> = s.iter().map(|x| x.value).collect();
    crit.dedup();
    let m = crit.len();

    // simplices of each dimension in filtration order
    let mut dims: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 2];
    for (g, x) in s.iter().enumerate() {
        if x.dim() <= max_degree + 1 {
            dims[x.dim()].push(g);
        }
    }
    let local: HashMap<&Vertices, usize> = dims
        .iter()
        .flat_map(|d| d.iter().enumerate().map(|(l, &g)| (&s[g].vertices, l)))
        .collect();
    let boundary_of = |d: usize| -> Vec<Vec<usize>> {
        dims[d]
            .iter()
            .map(|&g| {
                if d == 0 {
                    vec![0]
                } else {
                    s[g].facets().map(|f| local[&f]).collect()
                }
            })
            .collect()
    };
    // number of d-simplices present at each critical value
    let count_at = |d: usize, i: usize| dims[d].iter().take_while(|&&g| s[g].value <= crit[i]).count();

    let mut intervals = Vec::new();
    for k in 0..=max_degree {
        let n_k = dims[k].len();
        let n_km1 = if k == 0 { 1 } else { dims[k - 1].len() };
        let bd_k = boundary_of(k);
        let bd_k1 = boundary_of(k + 1);

        let mut z_at: Vec<Vec<BitVec>> = Vec::with_capacity(m);
        let mut b_at: Vec<Echelon> = Vec::with_capacity(m);
        let mut b = Echelon::default();
        let mut added = 0;
        for i in 0..m {
            z_at.push(cycle_basis(&bd_k, count_at(k, i), n_k, n_km1));
            let upto = count_at(k + 1, i);
            for faces in &bd_k1[added..upto] {
                let mut v = BitVec::zeros(n_k);
                for &f in faces {
                    v.flip(f);
                }
                b.insert(v);
            }
            added = upto;
            b_at.push(b.clone());
        }
        let rank = |i: isize, j: usize| -> i64 {
            if i < 0 {
                return 0;
            }
            let mut e = b_at[j].clone();
            let base = e.rank();
            for z in &z_at[i as usize] {
                e.insert(z.clone());
            }
            (e.rank() - base) as i64
        };
        let mut r = vec![vec![0i64; m]; m + 1];
        // r[i + 1][j] = rank(i, j), row 0 is the i = -1 sentinel
        for i in 0..m {
            for j in i..m {
                r[i + 1][j] = rank(i as isize, j);
            }
        }
        let get = |i: isize, j: usize| if i < 0 || (i as usize) > j { 0 } else { r[(i + 1) as usize][j] };
        for i in 0..m {
            let ii = i as isize;
            for j in (i + 1)..m {
                let mult = get(ii, j - 1) - get(ii - 1, j - 1) - get(ii, j) + get(ii - 1, j);
                for _ in 0..mult.max(0) {
                    intervals.push(Interval {
                        degree: k,
                        birth: crit[i],
                        death: crit[j],
                    });
                }
            }
            let mult = get(ii, m - 1) - get(ii - 1, m - 1);
            for _ in 0..mult.max(0) {
                intervals.push(Interval {
                    degree: k,
                    birth: crit[i],
                    death: f64::INFINITY,
                });
            }
        }
    }
    Ok(PersistenceDiagram::new(intervals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{cech, vietoris_rips};
    use crate::metric::{pairwise_distances, FiniteMetricSpace, Norm, PointCloud};
    use crate::persistence::compute_persistence;

    #[test]
    fn equilateral_and_single_point() {
        let ms = FiniteMetricSpace::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let fc = vietoris_rips(&ms, 2, 2.0).unwrap();
        assert_eq!(brute_force_persistence(&fc, 1).unwrap(), compute_persistence(&fc, 1).unwrap());
        let one = PointCloud::new(vec![vec![3.0]], Norm::L2).unwrap();
        let fc = cech(&one, 1, 1.0).unwrap();
        assert!(brute_force_persistence(&fc, 0).unwrap().is_empty());
    }

    #[test]
    fn square_cech_matches() {
        let c = PointCloud::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            Norm::L2,
        )
        .unwrap();
        let fc = cech(&c, 2, 2.0).unwrap();
        let pd = brute_force_persistence(&fc, 1).unwrap();
        assert_eq!(pd, compute_persistence(&fc, 1).unwrap());
        let h1: Vec<_> = pd.degree(1).map(|iv| (iv.birth, iv.death)).collect();
        assert_eq!(h1, vec![(0.5, 2f64.sqrt() / 2.0)]);
        let fc = vietoris_rips(&pairwise_distances(&c).unwrap(), 2, 1.2).unwrap();
        assert_eq!(brute_force_persistence(&fc, 1).unwrap(), compute_persistence(&fc, 1).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
        let ms = pairwise_distances(&PointCloud::new(pts, Norm::L2).unwrap()).unwrap();
        let fc = vietoris_rips(&ms, 3, 1e9).unwrap();
        assert!(matches!(brute_force_persistence(&fc, 2), Err(Error::TooManySimplices { .. })));
    }
}
