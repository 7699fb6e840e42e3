//! Kolmogorov widths `KW_k = min over affine k-planes P of max_x d(x, P)`.
//!
//! Writing `P = base + U` with `W` the orthogonal complement of `U`, the
//! distance of `x` to the best translate of `P` is the radius of the
//! smallest ball enclosing the projections of the cloud onto `W`. The search
//! therefore runs over orthonormal frames whose first `k` columns span `U`,
//! rotating in planes that mix `U` with `W`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AffineFlat, Exactness, WidthEstimate, WidthKind, Witness};
use crate::error::{Error, Result};
use crate::metric::{min_ball_l2, Norm, PointCloud};

#[derive(Debug, Clone)]
pub struct KwConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// A flat of dimension `<= k` to extend and start from; the result is
    /// then never worse than the warm start.
    pub warm_start: Option<AffineFlat>,
    /// Skip the exact planar routine.
    pub heuristic_only: bool,
}

impl Default for KwConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            max_iter: 500,
            warm_start: None,
            heuristic_only: false,
        }
    }
}

pub fn kolmogorov_width(cloud: &PointCloud, k: usize, restarts: usize) -> Result<WidthEstimate> {
    kolmogorov_width_with(
        cloud,
        k,
        &KwConfig {
            restarts,
            ..KwConfig::default()
        },
    )
}

pub fn kolmogorov_width_with(cloud: &PointCloud, k: usize, config: &KwConfig) -> Result<WidthEstimate> {
    if cloud.norm() != Norm::L2 {
        return Err(Error::UnsupportedNorm(cloud.norm()));
    }
    let n = cloud.dim();
    if k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} needs ambient dimension > k, got {n}")));
    }
    let (flat, value, exactness) = if k == 0 {
        let refs: Vec<&[f64]> = cloud.points().iter().map(Vec::as_slice).collect();
        let (center, r) = min_ball_l2(&refs);
        (AffineFlat::new(center, vec![])?, r, Exactness::Exact)
    } else if k == 1 && n == 2 && !config.heuristic_only {
        let (flat, v) = exact_planar_line(cloud);
        (flat, v, Exactness::Exact)
    } else {
        let (flat, v) = heuristic(cloud, k, config)?;
        (flat, v, Exactness::Heuristic)
    };
    Ok(WidthEstimate {
        kind: WidthKind::Kw,
        k,
        value,
        exactness,
        witness: Some(Witness::Flat(flat)),
        notes: vec![],
    })
}

/// Minimum-width slab in the plane; an optimal slab has a side through two
/// cloud points, so only pair directions need to be tried.
fn exact_planar_line(cloud: &PointCloud) -> (AffineFlat, f64) {
    let pts = cloud.points();
    if pts.len() == 1 {
        return (
            AffineFlat::new(pts[0].clone(), vec![vec![1.0, 0.0]]).expect("unit direction"),
            0.0,
        );
    }
    let mut best = (f64::INFINITY, [1.0, 0.0], 0.0);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let (dx, dy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
            let len = dx.hypot(dy);
            let (ux, uy) = (dx / len, dy / len);
            let (nx, ny) = (-uy, ux);
            let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let t = p[0] * nx + p[1] * ny;
                (lo.min(t), hi.max(t))
            });
            let half = (hi - lo) / 2.0;
            if half < best.0 {
                best = (half, [ux, uy], (hi + lo) / 2.0);
            }
        }
    }
    let (half, [ux, uy], mid) = best;
    let flat = AffineFlat::new(vec![-uy * mid, ux * mid], vec![vec![ux, uy]]).expect("unit direction");
    (flat, half)
}

/// Enclosing radius of the projections onto columns `k..` of `frame`, with
/// the ball center in those coordinates.
fn objective(points: &[Vec<f64>], frame: &DMatrix<f64>, k: usize) -> (f64, Vec<f64>) {
    let n = frame.nrows();
    let proj: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (k..n)
                .map(|c| (0..n).map(|r| frame[(r, c)] * p[r]).sum())
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = proj.iter().map(Vec::as_slice).collect();
    let (center, r) = min_ball_l2(&refs);
    (r, center)
}

fn rotate(frame: &mut DMatrix<f64>, i: usize, j: usize, angle: f64) {
    let (s, c) = angle.sin_cos();
    for r in 0..frame.nrows() {
        let (a, b) = (frame[(r, i)], frame[(r, j)]);
        frame[(r, i)] = c * a - s * b;
        frame[(r, j)] = s * a + c * b;
    }
}

/// Principal axes, largest variance first.
fn pca_frame(points: &[Vec<f64>]) -> DMatrix<f64> {
    let n = points[0].len();
    let m = points.len() as f64;
    let mean: Vec<f64> = (0..n).map(|c| points.iter().map(|p| p[c]).sum::<f64>() / m).collect();
    let cov = DMatrix::from_fn(n, n, |a, b| {
        points.iter().map(|p| (p[a] - mean[a]) * (p[b] - mean[b])).sum::<f64>() / m
    });
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])])
}

/// Completes the warm-start directions to an orthonormal frame using the PCA
/// axes, so the extra flat directions follow the largest remaining variance.
fn frame_from_warm(warm: &AffineFlat, pca: &DMatrix<f64>) -> DMatrix<f64> {
    let n = pca.nrows();
    let mut cols: Vec<Vec<f64>> = warm.directions().to_vec();
    for c in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v: Vec<f64> = pca.column(c).iter().copied().collect();
        for u in &cols {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, ui) in v.iter_mut().zip(u) {
                *x -= d * ui;
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            cols.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    DMatrix::from_fn(n, n, |r, c| cols[c][r])
}

fn random_frame(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    g.qr().q()
}

/// Pattern search over rotations mixing flat and complement directions,
/// halving the step whenever a full sweep fails to improve.
fn descend(points: &[Vec<f64>], mut frame: DMatrix<f64>, k: usize, max_iter: usize) -> (f64, DMatrix<f64>) {
    let n = frame.nrows();
    let mut best = objective(points, &frame, k).0;
    let mut step = 0.25;
    for _ in 0..max_iter {
        let mut improved = false;
        for i in 0..k {
            for j in k..n {
                for sign in [1.0, -1.0] {
                    let mut trial = frame.clone();
                    rotate(&mut trial, i, j, sign * step);
                    let v = objective(points, &trial, k).0;
                    if v < best - 1e-15 {
                        best = v;
                        frame = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < 1e-10 {
                break;
            }
        }
    }
    (best, frame)
}

fn heuristic(cloud: &PointCloud, k: usize, config: &KwConfig) -> Result<(AffineFlat, f64)> {
    let points = cloud.points();
    let n = cloud.dim();
    let pca = pca_frame(points);
    let mut starts = vec![match &config.warm_start {
        Some(w) if w.ambient_dim() == n && w.k() <= k => frame_from_warm(w, &pca),
        Some(_) => return Err(Error::InvalidParameter("warm start does not fit k and ambient dimension".into())),
        None => pca.clone(),
    }];
    if config.warm_start.is_some() {
        starts.push(pca);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < config.restarts.max(1) {
        starts.push(random_frame(n, &mut rng));
    }
    let (value, frame) = starts
        .into_par_iter()
        .map(|f| descend(points, f, k, config.max_iter))
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");

    let (_, center) = objective(points, &frame, k);
    let mut base = vec![0.0; n];
    for (c, &z) in (k..n).zip(&center) {
        for (r, b) in base.iter_mut().enumerate() {
            *b += frame[(r, c)] * z;
        }
    }
    let directions = (0..k).map(|c| frame.column(c).iter().copied().collect()).collect();
    Ok((AffineFlat::new(base, directions)?, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::new(points, Norm::L2).unwrap()
    }

    fn ellipse(a: f64, b: f64, n: usize) -> PointCloud {
        cloud(
            (0..n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    vec![a * t.cos(), b * t.sin()]
                })
                .collect(),
        )
    }

    fn max_flat_distance(c: &PointCloud, e: &WidthEstimate) -> f64 {
        let Some(Witness::Flat(f)) = &e.witness else { panic!("flat witness") };
        c.points().iter().map(|p| f.distance(p)).fold(0.0, f64::max)
    }

    #[test]
    fn examples() {
        let line = cloud(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 6.0]]);
        let e = kolmogorov_width(&line, 1, 4).unwrap();
        assert!(e.value < 1e-12);
        assert_eq!(e.exactness, Exactness::Exact);

        let e = kolmogorov_width(&ellipse(2.0, 1.0, 150), 1, 4).unwrap();
        assert!((e.value - 1.0).abs() <= 0.02);

        let pair = cloud(vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]);
        let e = kolmogorov_width(&pair, 0, 1).unwrap();
        assert_eq!((e.value, e.exactness), (1.0, Exactness::Exact));
    }

    #[test]
    fn errors() {
        let c = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(kolmogorov_width(&c, 2, 1).is_err());
        assert!(matches!(
            kolmogorov_width(&c.with_norm(Norm::Linf), 1, 1),
            Err(Error::UnsupportedNorm(Norm::Linf))
        ));
    }

    #[test]
    fn collinear_in_space_is_zero() {
        let c = cloud((0..6).map(|i| vec![i as f64, 2.0 * i as f64, -(i as f64)]).collect());
        let e = kolmogorov_width(&c, 1, 4).unwrap();
        assert_eq!(e.exactness, Exactness::Heuristic);
        assert!(e.value < 1e-6, "{}", e.value);
    }

    #[test]
    fn heuristic_finds_the_short_axis_of_a_flat_ellipsoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                let v: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() * 2.0 - 1.0);
                let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                vec![3.0 * v[0] / l, 2.0 * v[1] / l, v[2] / l]
            })
            .collect();
        let c = cloud(pts);
        let e = kolmogorov_width(&c, 2, 8).unwrap();
        assert!(e.value > 0.8 && e.value <= 1.0 + 1e-9, "{}", e.value);
        assert!((max_flat_distance(&c, &e) - e.value).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn witness_realizes_value(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 3..15), k in 0usize..3) {
            let c = cloud(pts);
            let e = kolmogorov_width(&c, k, 4).unwrap();
            prop_assert!((max_flat_distance(&c, &e) - e.value).abs() < 1e-9);
        }

        #[test]
        fn heuristic_matches_exact_in_the_plane(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 3..20)) {
            let c = cloud(pts);
            let exact = kolmogorov_width(&c, 1, 1).unwrap();
            let (_, h) = heuristic(&c, 1, &KwConfig::default()).unwrap();
            prop_assert!(h >= exact.value - 1e-9);
            prop_assert!(h - exact.value <= 1e-6, "heuristic {} exact {}", h, exact.value);
        }

        #[test]
        fn warm_start_keeps_monotonicity(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 4..15)) {
            let c = cloud(pts);
            let mut prev = kolmogorov_width(&c, 0, 1).unwrap();
            for k in 1..4 {
                let Some(Witness::Flat(f)) = prev.witness.clone() else { unreachable!() };
                let cfg = KwConfig { restarts: 4, warm_start: Some(f), ..KwConfig::default() };
                let next = kolmogorov_width_with(&c, k, &cfg).unwrap();
                prop_assert!(next.value <= prev.value + 1e-9);
                prev = next;
            }
        }
    }
}
