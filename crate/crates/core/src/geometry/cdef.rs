//! Convexity deficiency `sup over conv(X) of d(y, X)`.
//!
//! In the plane the supremum sits at a Voronoi vertex inside the hull (a
//! Delaunay circumcenter) or where a Voronoi edge leaves the hull, i.e. where
//! a hull edge crosses the bisector of a Delaunay edge. In higher dimension a
//! lower estimate is assembled from circumcenters of small simplices that
//! contain their own circumcenter, refined by projected ascent on convex
//! weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{convex_hull_2d, planar, Hull2D};
use crate::error::{Error, Result};
use crate::metric::{min_ball_l2, Norm, PointCloud};
use crate::widths::Exactness;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityDeficiency {
    pub value: f64,
    /// `Exact` in the plane; `Heuristic` (a lower estimate) otherwise.
    pub exactness: Exactness,
    pub argmax_point: Vec<f64>,
}

pub fn convexity_deficiency(cloud: &PointCloud) -> Result<ConvexityDeficiency> {
    if cloud.norm() != Norm::L2 {
        return Err(Error::UnsupportedNorm(cloud.norm()));
    }
    match cloud.dim() {
        1 => Ok(line(cloud.points().iter().map(|p| p[0]).collect(), |t| vec![t])),
        2 => planar_exact(cloud),
        _ => Ok(lower_estimate(cloud, 0)),
    }
}

/// Largest gap on a line, as `(half gap, midpoint)`.
fn line(mut ts: Vec<f64>, embed: impl Fn(f64) -> Vec<f64>) -> ConvexityDeficiency {
    ts.sort_by(f64::total_cmp);
    let (mut value, mut at) = (0.0, ts[0]);
    for w in ts.windows(2) {
        let half = (w[1] - w[0]) / 2.0;
        if half > value {
            value = half;
            at = (w[0] + w[1]) / 2.0;
        }
    }
    ConvexityDeficiency {
        value,
        exactness: Exactness::Exact,
        argmax_point: embed(at),
    }
}

fn planar_exact(cloud: &PointCloud) -> Result<ConvexityDeficiency> {
    let pts = planar(cloud)?;
    let poly = match convex_hull_2d(&pts)? {
        Hull2D::Point(p) => {
            return Ok(ConvexityDeficiency {
                value: 0.0,
                exactness: Exactness::Exact,
                argmax_point: p.to_vec(),
            })
        }
        Hull2D::Segment(a, b) => {
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let ts = pts.iter().map(|p| ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).collect();
            let mut r = line(ts, |t| vec![a[0] + t * dx, a[1] + t * dy]);
            r.value *= len2.sqrt();
            return Ok(r);
        }
        Hull2D::Polygon(p) => p,
    };

    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for p in &pts {
        dt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::InvalidParameter(format!("triangulation failed: {e:?}")))?;
    }
    let nearest = |y: [f64; 2]| cloud.distance_to(&y);
    let mut best = (0.0, pts[0]);
    let mut consider = |y: [f64; 2]| {
        let v = nearest(y);
        if v > best.0 {
            best = (v, y);
        }
    };
    for face in dt.inner_faces() {
        let c = face.circumcenter();
        if poly.contains([c.x, c.y], 1e-12) {
            consider([c.x, c.y]);
        }
    }
    let bisectors: Vec<([f64; 2], [f64; 2])> = dt
        .undirected_edges()
        .map(|e| {
            let [p, q] = e.positions();
            ([p.x, p.y], [q.x, q.y])
        })
        .collect();
    for (a, b) in poly.edges() {
        let d = [b[0] - a[0], b[1] - a[1]];
        for &(p, q) in &bisectors {
            // |a + t d - p|^2 = |a + t d - q|^2 is linear in t
            let w = [q[0] - p[0], q[1] - p[1]];
            let denom = 2.0 * (d[0] * w[0] + d[1] * w[1]);
            if denom == 0.0 {
                continue;
            }
            let num = (q[0] * q[0] + q[1] * q[1]) - (p[0] * p[0] + p[1] * p[1]) - 2.0 * (a[0] * w[0] + a[1] * w[1]);
            let t = num / denom;
            if (0.0..=1.0).contains(&t) {
                consider([a[0] + t * d[0], a[1] + t * d[1]]);
            }
        }
    }
    Ok(ConvexityDeficiency {
        value: best.0,
        exactness: Exactness::Exact,
        argmax_point: best.1.to_vec(),
    })
}

/// Whether `y`, the circumcenter of `simplex` within its affine hull, has
/// nonnegative barycentric weights.
fn inside_own_simplex(simplex: &[&[f64]], y: &[f64]) -> bool {
    let m = simplex.len() - 1;
    let p0 = simplex[0];
    let vs: Vec<Vec<f64>> = simplex[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let rel: Vec<f64> = y.iter().zip(p0).map(|(a, b)| a - b).collect();
    let dotv = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = nalgebra::DMatrix::from_fn(m, m, |i, j| dotv(&vs[i], &vs[j]));
    let rhs = nalgebra::DVector::from_fn(m, |i, _| dotv(&vs[i], &rel));
    match gram.lu().solve(&rhs) {
        Some(l) => l.iter().all(|&x| x >= -1e-12) && l.sum() <= 1.0 + 1e-12,
        None => false,
    }
}

fn subsets(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    fn rec(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, size, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(n, size, 0, &mut Vec::new(), &mut f);
}

/// Ascent on `lambda -> d(sum lambda_i x_i, X)` over the probability simplex.
fn ascend(cloud: &PointCloud, mut lambda: Vec<f64>, iters: usize) -> (f64, Vec<f64>) {
    let pts = cloud.points();
    let dim = cloud.dim();
    let point = |l: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; dim];
        for (w, p) in l.iter().zip(pts) {
            for (a, b) in y.iter_mut().zip(p) {
                *a += w * b;
            }
        }
        y
    };
    let scale = {
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        min_ball_l2(&refs).1.max(1e-12)
    };
    let mut y = point(&lambda);
    let mut best = (cloud.distance_to(&y), y.clone());
    let mut step = 0.1;
    for _ in 0..iters {
        let (near, d) = pts
            .iter()
            .map(|p| (p, Norm::L2.distance(p, &y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if d == 0.0 {
            break;
        }
        let g: Vec<f64> = y.iter().zip(near).map(|(a, b)| (a - b) / d).collect();
        for (w, p) in lambda.iter_mut().zip(pts) {
            *w += step * p.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / scale;
        }
        project_simplex(&mut lambda);
        y = point(&lambda);
        let v = cloud.distance_to(&y);
        if v > best.0 {
            best = (v, y.clone());
        } else {
            step *= 0.7;
        }
    }
    best
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let (mut cum, mut theta) = (0.0, 0.0);
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Lower estimate in dimension >= 3; every candidate is a point of the hull,
/// so the value never exceeds the true deficiency.
pub(crate) fn lower_estimate(cloud: &PointCloud, seed: u64) -> ConvexityDeficiency {
    let pts = cloud.points();
    let n = pts.len();
    let dim = cloud.dim();
    let mut cands: Vec<(f64, Vec<f64>)> = pts.iter().map(|p| (0.0, p.clone())).collect();
    if n <= 40 {
        for size in 2..=(dim + 1).min(n) {
            subsets(n, size, |s| {
                let simplex: Vec<&[f64]> = s.iter().map(|&i| pts[i].as_slice()).collect();
                let (c, _) = min_ball_l2(&simplex);
                if inside_own_simplex(&simplex, &c) {
                    cands.push((cloud.distance_to(&c), c));
                }
            });
        }
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    cands.truncate(8);
    let mut best = cands[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = 16;
    for s in 0..starts {
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(4)).collect();
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|w| *w /= total);
        if s < cands.len() {
            // start near a candidate by weighting its nearest points
            let c = &cands[s].1;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| Norm::L2.distance(&pts[a], c).total_cmp(&Norm::L2.distance(&pts[b], c)));
            lambda = vec![0.0; n];
            for &i in order.iter().take(dim + 1) {
                lambda[i] = 1.0 / (dim + 1).min(n) as f64;
            }
        }
        let r = ascend(cloud, lambda, 300);
        if r.0 > best.0 {
            best = r;
        }
    }
    ConvexityDeficiency {
        value: best.0,
        exactness: Exactness::Heuristic,
        argmax_point: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon2D;
    use proptest::prelude::*;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::new(points, Norm::L2).unwrap()
    }

    /// Maximum of `d(y, X)` over grid points of the hull, step `h`.
    fn grid_oracle(c: &PointCloud, h: f64) -> f64 {
        let pts = planar(c).unwrap();
        let Hull2D::Polygon(poly) = convex_hull_2d(&pts).unwrap() else { panic!("polygon") };
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p[0]), a.1.max(p[0])));
        let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p[1]), a.1.max(p[1])));
        let mut best: f64 = 0.0;
        let (mut x, mut i) = (x0, 0);
        while x <= x1 {
            let mut y = y0;
            while y <= y1 {
                if poly.contains([x, y], 0.0) {
                    best = best.max(c.distance_to(&[x, y]));
                }
                y += h;
            }
            i += 1;
            x = x0 + i as f64 * h;
        }
        best
    }

    #[test]
    fn examples() {
        let col = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]);
        let r = convexity_deficiency(&col).unwrap();
        assert_eq!((r.value, r.exactness), (0.5, Exactness::Exact));

        let sq = cloud(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![2.0, 2.0], vec![0.0, 2.0]]);
        let r = convexity_deficiency(&sq).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.argmax_point[0] - 1.0).abs() < 1e-12 && (r.argmax_point[1] - 1.0).abs() < 1e-12);
        assert!((grid_oracle(&sq, 0.01) - r.value).abs() <= 0.01);

        let circle = cloud(
            (0..120)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / 120.0;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
        );
        let r = convexity_deficiency(&circle).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
        assert!(convexity_deficiency(&circle.with_norm(Norm::Linf)).is_err());
    }

    #[test]
    fn boundary_maximum_is_found() {
        // a long thin triangle: the largest gap is on the long edge
        let c = cloud(vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![5.0, 0.5], vec![1.0, 0.0]]);
        let r = convexity_deficiency(&c).unwrap();
        assert!(r.value >= grid_oracle(&c, 0.005) - 1e-12);
        assert!((r.value - grid_oracle(&c, 0.005)).abs() <= 0.005);
    }

    #[test]
    fn square_cloud_in_space() {
        let c = cloud(vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![0.0, 2.0, 0.0],
        ]);
        let r = convexity_deficiency(&c).unwrap();
        assert_eq!(r.exactness, Exactness::Heuristic);
        assert!((r.value - 2f64.sqrt()).abs() < 1e-9);
        let cube: Vec<Vec<f64>> = (0..8).map(|m| (0..3).map(|b| ((m >> b) & 1) as f64).collect()).collect();
        let r = convexity_deficiency(&cloud(cube)).unwrap();
        assert!((r.value - 3f64.sqrt() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn polygon_interior_grid_matches() {
        let poly = Polygon2D::new(vec![[0.0, 0.0], [3.0, 0.0], [4.0, 2.0], [1.0, 3.0]]).unwrap();
        let c = cloud(poly.sample_boundary(17).iter().map(|p| p.to_vec()).collect());
        let r = convexity_deficiency(&c).unwrap();
        let g = grid_oracle(&c, 0.01);
        assert!(r.value >= g - 1e-12 && r.value - g <= 0.01, "{} vs {g}", r.value);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn exact_dominates_and_matches_grid(pts in prop::collection::vec(prop::collection::vec(0.0f64..2.0, 2), 3..12)) {
            let c = cloud(pts);
            prop_assume!(matches!(convex_hull_2d(&planar(&c).unwrap()).unwrap(), Hull2D::Polygon(_)));
            let r = convexity_deficiency(&c).unwrap();
            let g = grid_oracle(&c, 0.01);
            prop_assert!(r.value >= g - 1e-12);
            prop_assert!(r.value - g <= 0.01, "{} vs {}", r.value, g);
        }

        #[test]
        fn spatial_estimate_is_a_hull_point(pts in prop::collection::vec(prop::collection::vec(0.0f64..2.0, 3), 4..10)) {
            let c = cloud(pts);
            let r = convexity_deficiency(&c).unwrap();
            prop_assert!((c.distance_to(&r.argmax_point) - r.value).abs() < 1e-12);
            // a hull point is within the enclosing ball
            let refs: Vec<&[f64]> = c.points().iter().map(Vec::as_slice).collect();
            let (center, rad) = min_ball_l2(&refs);
            prop_assert!(Norm::L2.distance(&center, &r.argmax_point) <= rad + 1e-9);
        }
    }
}
