//! Exact bottleneck distance: binary search over the finite set of candidate
//! costs, testing each with a Hopcroft–Karp perfect matching in which every
//! point may also be sent to the diagonal.

use std::collections::VecDeque;

use super::PersistenceDiagram;

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Left side: `a` points then diagonal copies of `b`. Right side: `b` points
/// then diagonal copies of `a`.
struct Instance<'a> {
    a: &'a [(f64, f64)],
    b: &'a [(f64, f64)],
}

impl Instance<'_> {
    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    fn cost(&self, l: usize, r: usize) -> Option<f64> {
        let (na, nb) = (self.a.len(), self.b.len());
        match (l < na, r < nb) {
            (true, true) => Some(linf(self.a[l], self.b[r])),
            (true, false) => (r - nb == l).then(|| (self.a[l].1 - self.a[l].0) / 2.0),
            (false, true) => (l - na == r).then(|| (self.b[r].1 - self.b[r].0) / 2.0),
            (false, false) => Some(0.0),
        }
    }

    fn adjacency(&self, eps: f64) -> Vec<Vec<usize>> {
        let n = self.size();
        (0..n)
            .map(|l| (0..n).filter(|&r| self.cost(l, r).is_some_and(|c| c <= eps)).collect())
            .collect()
    }
}

fn has_perfect_matching(adj: &[Vec<usize>]) -> bool {
    const NIL: usize = usize::MAX;
    let n = adj.len();
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut dist = vec![0usize; n];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..n {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = match_r[r];
                if m == NIL {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            break;
        }
        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [usize],
        ) -> bool {
            for &r in &adj[l] {
                let m = match_r[r];
                if m == usize::MAX || (dist[m] == dist[l] + 1 && augment(m, adj, match_l, match_r, dist)) {
                    match_l[l] = r;
                    match_r[r] = l;
                    return true;
                }
            }
            dist[l] = usize::MAX;
            false
        }
        for l in 0..n {
            if match_l[l] == NIL && augment(l, adj, &mut match_l, &mut match_r, &mut dist) {
                matched += 1;
            }
        }
    }
    matched == n
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let inst = Instance { a, b };
    let n = inst.size();
    if n == 0 {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::new();
    for l in 0..n {
        for r in 0..n {
            if let Some(c) = inst.cost(l, r) {
                candidates.push(c);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // smallest candidate admitting a perfect matching
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&inst.adjacency(candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Bottleneck distance between the degree-`degree` parts of two diagrams.
/// Essential intervals can only be matched with each other (by sorted
/// births); differing counts give `inf`.
pub fn bottleneck_distance(pd1: &PersistenceDiagram, pd2: &PersistenceDiagram, degree: usize) -> f64 {
    let split = |pd: &PersistenceDiagram| {
        let mut finite = Vec::new();
        let mut essential = Vec::new();
        for iv in pd.degree(degree) {
            if iv.is_essential() {
                essential.push(iv.birth);
            } else {
                finite.push((iv.birth, iv.death));
            }
        }
        essential.sort_by(f64::total_cmp);
        (finite, essential)
    };
    let (fa, ea) = split(pd1);
    let (fb, eb) = split(pd2);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    finite_bottleneck(&fa, &fb).max(essential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Interval;
    use proptest::prelude::*;

    fn pd(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(
            points
                .iter()
                .map(|&(birth, death)| Interval { degree: 1, birth, death })
                .collect(),
        )
    }

    #[test]
    fn examples() {
        assert_eq!(bottleneck_distance(&pd(&[(0.0, 2.0)]), &pd(&[(0.0, 2.5)]), 1), 0.5);
        assert_eq!(bottleneck_distance(&pd(&[(0.0, 2.0)]), &pd(&[]), 1), 1.0);
        let p = pd(&[(0.0, 2.0), (1.0, 3.0), (0.5, 0.7)]);
        assert_eq!(bottleneck_distance(&p, &p, 1), 0.0);
        assert_eq!(bottleneck_distance(&p, &p, 0), 0.0);
        assert_eq!(bottleneck_distance(&pd(&[(0.0, f64::INFINITY)]), &pd(&[]), 1), f64::INFINITY);
        assert_eq!(
            bottleneck_distance(&pd(&[(0.0, f64::INFINITY)]), &pd(&[(0.25, f64::INFINITY)]), 1),
            0.25
        );
    }

    /// Minimum over all injective partial assignments, unmatched points paying
    /// half their persistence.
    fn brute(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        fn rec(a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
            if cur >= *best {
                return;
            }
            if i == a.len() {
                let rest = b
                    .iter()
                    .zip(used.iter())
                    .filter(|(_, &u)| !u)
                    .map(|(p, _)| (p.1 - p.0) / 2.0)
                    .fold(cur, f64::max);
                *best = best.min(rest);
                return;
            }
            rec(a, b, used, i + 1, cur.max((a[i].1 - a[i].0) / 2.0), best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(a, b, used, i + 1, cur.max(linf(a[i], b[j])), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        best
    }

    fn diagram_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..5.0, 0.01f64..3.0).prop_map(|(b, l)| (b, b + l)), 0..5)
    }

    proptest! {
        #[test]
        fn matches_exhaustive_assignment(a in diagram_strategy(), b in diagram_strategy()) {
            let d = bottleneck_distance(&pd(&a), &pd(&b), 1);
            prop_assert!((d - brute(&a, &b)).abs() < 1e-12);
            prop_assert_eq!(d, bottleneck_distance(&pd(&b), &pd(&a), 1));
        }
    }
}
