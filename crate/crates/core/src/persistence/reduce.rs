use std::collections::HashMap;

use crate::complexes::{FilteredComplex, Vertices};
use crate::error::{Error, Result};

use super::{Interval, PersistenceDiagram};

/// Which matrix gets reduced. Both produce the same pairs; the coboundary
/// route only touches columns of dimension `<= max_degree` and is much
/// faster on clique complexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Anti-transposed boundary matrix, low dimensions first, with clearing.
    #[default]
    Coboundary,
    /// Boundary matrix, high dimensions first, with clearing (twist).
    Boundary,
}

pub fn compute_persistence(fc: &FilteredComplex, max_degree: usize) -> Result<PersistenceDiagram> {
    compute_persistence_with(fc, max_degree, Reduction::default())
}

pub fn compute_persistence_with(
    fc: &FilteredComplex,
    max_degree: usize,
    reduction: Reduction,
) -> Result<PersistenceDiagram> {
    if max_degree >= fc.max_dim() {
        return Err(Error::DegreeTooHigh {
            max_degree,
            max_dim: fc.max_dim(),
        });
    }
    let pairs = match reduction {
        Reduction::Coboundary => reduce_coboundary(fc, max_degree),
        Reduction::Boundary => reduce_boundary(fc, max_degree),
    };
    Ok(pairs.into_diagram(fc))
}

/// Persistence pairs as filtration indices.
struct Pairs {
    finite: Vec<(usize, usize)>,
    essential: Vec<usize>,
}

impl Pairs {
    fn into_diagram(mut self, fc: &FilteredComplex) -> PersistenceDiagram {
        let s = fc.simplices();
        // reduced homology: the first vertex carries the essential component
        if let Some(pos) = self
            .essential
            .iter()
            .enumerate()
            .filter(|(_, &g)| s[g].dim() == 0)
            .min_by_key(|(_, &g)| g)
            .map(|(pos, _)| pos)
        {
            self.essential.swap_remove(pos);
        }
        let mut intervals: Vec<Interval> = self
            .finite
            .iter()
            .map(|&(b, d)| Interval {
                degree: s[b].dim(),
                birth: s[b].value,
                death: s[d].value,
            })
            .collect();
        intervals.extend(self.essential.iter().map(|&b| Interval {
            degree: s[b].dim(),
            birth: s[b].value,
            death: f64::INFINITY,
        }));
        PersistenceDiagram::new(intervals)
    }
}

/// Symmetric difference of two sorted index lists.
pub(crate) fn xor_into(acc: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(acc, scratch);
}

fn by_dimension(fc: &FilteredComplex, top: usize) -> Vec<Vec<usize>> {
    let mut dims = vec![Vec::new(); top + 1];
    for (g, s) in fc.simplices().iter().enumerate() {
        if s.dim() <= top {
            dims[s.dim()].push(g);
        }
    }
    dims
}

fn reduce_coboundary(fc: &FilteredComplex, max_degree: usize) -> Pairs {
    let s = fc.simplices();
    let dims = by_dimension(fc, max_degree + 1);
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    // simplices already paired as the pivot of a lower-dimensional column
    let mut cleared = vec![false; s.len()];

    for d in 0..=max_degree {
        // coboundaries of d-simplices, each sorted ascending
        let local: HashMap<&Vertices, usize> = dims[d]
            .iter()
            .enumerate()
            .map(|(l, &g)| (&s[g].vertices, l))
            .collect();
        let mut cob: Vec<Vec<u32>> = vec![Vec::new(); dims[d].len()];
        for &g in &dims[d + 1] {
            for facet in s[g].facets() {
                cob[local[&facet]].push(g as u32);
            }
        }
        drop(local);

        let mut owner: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut scratch = Vec::new();
        for (l, &g) in dims[d].iter().enumerate().rev() {
            if cleared[g] {
                continue;
            }
            let mut col = std::mem::take(&mut cob[l]);
            while let Some(&pivot) = col.first() {
                match owner.get(&pivot) {
                    Some(other) => xor_into(&mut col, other, &mut scratch),
                    None => break,
                }
            }
            match col.first() {
                Some(&pivot) => {
                    finite.push((g, pivot as usize));
                    cleared[pivot as usize] = true;
                    owner.insert(pivot, col);
                }
                None => essential.push(g),
            }
        }
    }
    Pairs { finite, essential }
}

fn reduce_boundary(fc: &FilteredComplex, max_degree: usize) -> Pairs {
    let s = fc.simplices();
    let index = fc.index();
    let dims = by_dimension(fc, max_degree + 1);
    let mut finite = Vec::new();
    let mut negative = vec![false; s.len()];
    let mut paired = vec![false; s.len()];
    let mut zero_column = vec![false; s.len()];
    for &g in &dims[0] {
        zero_column[g] = true;
    }

    for d in (1..=max_degree + 1).rev() {
        let mut owner: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut scratch = Vec::new();
        for &g in &dims[d] {
            if negative[g] {
                // cleared: this column reduces to zero
                continue;
            }
            let mut col: Vec<u32> = s[g].facets().map(|f| index[&f] as u32).collect();
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match owner.get(&low) {
                    Some(other) => xor_into(&mut col, other, &mut scratch),
                    None => break,
                }
            }
            match col.last() {
                Some(&low) => {
                    finite.push((low as usize, g));
                    negative[low as usize] = true;
                    paired[low as usize] = true;
                    paired[g] = true;
                    owner.insert(low, col);
                }
                None => zero_column[g] = true,
            }
        }
    }
    let essential = (0..=max_degree)
        .flat_map(|d| dims[d].iter().copied())
        .filter(|&g| zero_column[g] && !paired[g])
        .collect();
    Pairs { finite, essential }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{cech, vietoris_rips};
    use crate::metric::{pairwise_distances, FiniteMetricSpace, Norm, PointCloud};

    fn unit_square() -> PointCloud {
        PointCloud::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            Norm::L2,
        )
        .unwrap()
    }

    fn both(fc: &FilteredComplex, k: usize) -> PersistenceDiagram {
        let a = compute_persistence_with(fc, k, Reduction::Coboundary).unwrap();
        let b = compute_persistence_with(fc, k, Reduction::Boundary).unwrap();
        assert_eq!(a, b);
        a
    }

    #[test]
    fn equilateral_triangle_fills_immediately() {
        let ms = FiniteMetricSpace::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let pd = both(&vietoris_rips(&ms, 2, 2.0).unwrap(), 1);
        let d0: Vec<_> = pd.degree(0).map(|iv| (iv.birth, iv.death)).collect();
        assert_eq!(d0, vec![(0.0, 1.0), (0.0, 1.0)]);
        assert_eq!(pd.degree(1).count(), 0);
    }

    #[test]
    fn square_loop_in_both_filtrations() {
        let c = unit_square();
        let vr = both(&vietoris_rips(&pairwise_distances(&c).unwrap(), 2, 2.0).unwrap(), 1);
        let h1: Vec<_> = vr.degree(1).map(|iv| (iv.birth, iv.death)).collect();
        assert_eq!(h1, vec![(1.0, 2f64.sqrt())]);
        let ce = both(&cech(&c, 2, 2.0).unwrap(), 1);
        let h1: Vec<_> = ce.degree(1).map(|iv| (iv.birth, iv.death)).collect();
        assert_eq!(h1, vec![(0.5, 2f64.sqrt() / 2.0)]);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let fc = cech(&unit_square(), 1, 2.0).unwrap();
        assert!(matches!(
            compute_persistence(&fc, 1),
            Err(Error::DegreeTooHigh { max_degree: 1, max_dim: 1 })
        ));
    }

    #[test]
    fn truncation_leaves_essential_classes() {
        // below the diagonal the square's loop never dies
        let ms = pairwise_distances(&unit_square()).unwrap();
        let pd = both(&vietoris_rips(&ms, 2, 1.2).unwrap(), 1);
        let h1: Vec<_> = pd.degree(1).collect();
        assert_eq!(h1.len(), 1);
        assert!(h1[0].is_essential());
        // two far clusters below the joining scale: one extra component
        let c = PointCloud::new(vec![vec![0.0], vec![0.1], vec![5.0]], Norm::L2).unwrap();
        let pd = both(&vietoris_rips(&pairwise_distances(&c).unwrap(), 1, 1.0).unwrap(), 0);
        assert_eq!(pd.degree(0).filter(|iv| iv.is_essential()).count(), 1);
    }
}
