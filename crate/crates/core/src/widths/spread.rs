//! Spread: `min over nonempty A of max(diam A, max_x d(x, A))`.
//!
//! The value is always one of the pairwise distances (or 0). For a
//! threshold `t`, a subset achieves `<= t` exactly when it is a clique of the
//! graph `d <= t` whose closed neighborhood is everything, so the exact
//! routine binary-searches the distinct distances with a feasibility search
//! that branches on the possible dominators of an undominated point.

use super::{Exactness, WidthEstimate, WidthKind, Witness};
use crate::metric::FiniteMetricSpace;

pub const DEFAULT_SPREAD_EXACT_LIMIT: usize = 20;

fn value_of(ms: &FiniteMetricSpace, a: &[usize]) -> f64 {
    let mut v: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i + 1..] {
            v = v.max(ms.get(x, y));
        }
    }
    for x in 0..ms.len() {
        v = v.max(a.iter().map(|&y| ms.get(x, y)).fold(f64::INFINITY, f64::min));
    }
    v
}

/// Clique of `d <= t` of size at most `limit` dominating every point.
fn search(ms: &FiniteMetricSpace, t: f64, chosen: &mut Vec<usize>, limit: usize) -> bool {
    let n = ms.len();
    let undominated = (0..n).find(|&x| chosen.iter().all(|&a| ms.get(x, a) > t));
    let Some(u) = undominated else { return true };
    if chosen.len() == limit {
        return false;
    }
    for v in 0..n {
        if ms.get(u, v) <= t && !chosen.contains(&v) && chosen.iter().all(|&a| ms.get(a, v) <= t) {
            chosen.push(v);
            if search(ms, t, chosen, limit) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Smallest feasible subset at threshold `t`, if any.
fn feasible(ms: &FiniteMetricSpace, t: f64) -> Option<Vec<usize>> {
    (1..=ms.len()).find_map(|limit| {
        let mut chosen = Vec::new();
        search(ms, t, &mut chosen, limit).then_some(chosen)
    })
}

/// Greedy upper bound: from every center, keep adding the point farthest
/// from the current subset and record the best prefix.
fn greedy(ms: &FiniteMetricSpace) -> (f64, Vec<usize>) {
    let n = ms.len();
    let mut best = (f64::INFINITY, Vec::new());
    for c in 0..n {
        let mut a = vec![c];
        let mut near: Vec<f64> = (0..n).map(|x| ms.get(x, c)).collect();
        loop {
            let v = value_of(ms, &a);
            if v < best.0 || (v == best.0 && a.len() < best.1.len()) {
                best = (v, a.clone());
            }
            let (far, &fd) = near
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .expect("nonempty");
            if fd == 0.0 {
                break;
            }
            a.push(far);
            for (x, d) in near.iter_mut().enumerate() {
                *d = d.min(ms.get(x, far));
            }
        }
    }
    best
}

pub fn spread(ms: &FiniteMetricSpace, exact_limit: usize) -> WidthEstimate {
    let n = ms.len();
    let (value, subset, exactness) = if n <= exact_limit {
        let mut cands: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| ms.get(i, j)).collect();
        cands.push(0.0);
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        // feasibility is monotone in the threshold and holds at the diameter
        let (mut lo, mut hi) = (0, cands.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if feasible(ms, cands[mid]).is_some() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut a = feasible(ms, cands[lo]).expect("feasible at the search bound");
        a.sort_unstable();
        (value_of(ms, &a), a, Exactness::Exact)
    } else {
        let (v, mut a) = greedy(ms);
        a.sort_unstable();
        (v, a, Exactness::UpperBound)
    };
    WidthEstimate {
        kind: WidthKind::Spread,
        k: 0,
        value,
        exactness,
        witness: Some(Witness::Subset(subset)),
        notes: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{pairwise_distances, radius, diameter, Norm, PointCloud};
    use proptest::prelude::*;

    fn brute(ms: &FiniteMetricSpace) -> f64 {
        let n = ms.len();
        (1u32..(1 << n))
            .map(|mask| {
                let a: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                value_of(ms, &a)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn examples() {
        let two = FiniteMetricSpace::from_rows(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(spread(&two, 20).value, 3.0);
        let eq = FiniteMetricSpace::from_rows(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let e = spread(&eq, 20);
        assert_eq!((e.value, e.exactness), (1.0, Exactness::Exact));
        assert_eq!(e.witness, Some(Witness::Subset(vec![0])));
        let s = 0.5f64.sqrt();
        let sq = PointCloud::new(vec![vec![s, s], vec![-s, s], vec![-s, -s], vec![s, -s]], Norm::L2).unwrap();
        let ms = pairwise_distances(&sq).unwrap();
        assert!((spread(&ms, 20).value - 2f64.sqrt()).abs() < 1e-12);
        let single = FiniteMetricSpace::from_rows(vec![vec![0.0]]).unwrap();
        assert_eq!(spread(&single, 20).value, 0.0);
    }

    #[test]
    fn chain_prefers_an_inner_pair() {
        // points 0, 1, 2, 3 on a line: {1, 2} gives 1, any singleton gives 2
        let pts = PointCloud::new((0..4).map(|i| vec![i as f64]).collect(), Norm::L2).unwrap();
        let e = spread(&pairwise_distances(&pts).unwrap(), 20);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.witness, Some(Witness::Subset(vec![1, 2])));
    }

    fn random_space() -> impl Strategy<Value = FiniteMetricSpace> {
        prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2), 1..10).prop_filter_map("distinct", |pts| {
            PointCloud::new(pts, Norm::L2).ok().and_then(|c| pairwise_distances(&c).ok())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_subset_enumeration(ms in random_space()) {
            let e = spread(&ms, 20);
            prop_assert_eq!(e.value, brute(&ms));
            let Some(Witness::Subset(a)) = &e.witness else { unreachable!() };
            prop_assert_eq!(value_of(&ms, a), e.value);
        }

        #[test]
        fn bounds(ms in random_space()) {
            let exact = spread(&ms, 20).value;
            let greedy = spread(&ms, 0);
            prop_assert_eq!(greedy.exactness, Exactness::UpperBound);
            prop_assert!(greedy.value >= exact);
            prop_assert!(greedy.value <= radius(&ms) + 1e-12);
            prop_assert!(exact <= diameter(&ms));
        }
    }
}
