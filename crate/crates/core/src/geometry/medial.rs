//! Medial axis of a convex polygon by shrinking its edges inward at unit
//! speed. Each step removes the edge whose neighbors meet first; the point
//! where the three lines become equidistant is an axis node, and the two
//! wavefront vertices bounding the removed edge trace axis segments to it.

use nalgebra::{Matrix3, Vector3};

use super::Polygon2D;
use crate::error::{Error, Result};
use crate::widths::{Certificate, SimplicialCore};

/// Edge line `a . p = b` with `a` the unit inward normal; the distance of an
/// interior point to the line is `a . p - b`.
#[derive(Clone, Copy)]
struct Line {
    a: [f64; 2],
    b: f64,
}

/// Point at equal distance `t` from three lines, as `(p, t)`.
fn equidistant(l: [Line; 3]) -> Option<([f64; 2], f64)> {
    let m = Matrix3::from_fn(|r, c| if c < 2 { l[r].a[c] } else { -1.0 });
    let rhs = Vector3::from_fn(|r, _| l[r].b);
    let x = m.lu().solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then(|| ([x[0], x[1]], x[2]))
}

pub fn medial_axis_core(poly: &Polygon2D) -> Result<SimplicialCore> {
    let v = poly.vertices();
    let m = v.len();
    let lines: Vec<Line> = (0..m)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % m]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            // counterclockwise order: the interior is on the left
            let a = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
            Line { a, b: a[0] * p[0] + a[1] * p[1] }
        })
        .collect();

    // active edges in order; origin[i] is where the wavefront vertex between
    // active[i] and active[i + 1] started
    let mut active: Vec<usize> = (0..m).collect();
    let mut origin: Vec<[f64; 2]> = (0..m).map(|i| v[(i + 1) % m]).collect();
    let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();

    while active.len() > 3 {
        let k = active.len();
        let mut best: Option<(usize, [f64; 2], f64)> = None;
        for i in 0..k {
            let tri = [lines[active[(i + k - 1) % k]], lines[active[i]], lines[active[(i + 1) % k]]];
            if let Some((p, t)) = equidistant(tri) {
                if best.is_none_or(|(_, _, bt)| t < bt) {
                    best = Some((i, p, t));
                }
            }
        }
        let (i, p, _) = best.ok_or_else(|| Error::DegeneratePolygon("no edge collapse found".into()))?;
        let before = (i + k - 1) % k;
        segments.push((origin[before], p));
        segments.push((origin[i], p));
        active.remove(i);
        origin.remove(i);
        let j = if i == 0 { origin.len() - 1 } else { i - 1 };
        origin[j] = p;
    }
    let tri = [lines[active[0]], lines[active[1]], lines[active[2]]];
    let (center, _) = equidistant(tri).ok_or_else(|| Error::DegeneratePolygon("final collapse is singular".into()))?;
    for o in &origin {
        segments.push((*o, center));
    }
    build_tree(segments)
}

/// Merges coincident endpoints and drops zero-length segments.
fn build_tree(segments: Vec<([f64; 2], [f64; 2])>) -> Result<SimplicialCore> {
    let scale = segments
        .iter()
        .flat_map(|(a, b)| [a[0].abs(), a[1].abs(), b[0].abs(), b[1].abs()])
        .fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut node_of = |p: [f64; 2]| -> usize {
        match nodes.iter().position(|q| (q[0] - p[0]).hypot(q[1] - p[1]) <= tol) {
            Some(i) => i,
            None => {
                nodes.push(p);
                nodes.len() - 1
            }
        }
    };
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for (a, b) in segments {
        let (i, j) = (node_of(a), node_of(b));
        let e = vec![i.min(j), i.max(j)];
        if i != j && !edges.contains(&e) {
            edges.push(e);
        }
    }
    SimplicialCore::new(nodes.iter().map(|p| p.to_vec()).collect(), edges, Certificate::CutLocus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Norm, PointCloud};
    use crate::widths::uberspread_upper;

    fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = [b[0] - a[0], b[1] - a[1]];
        let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
        (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
    }

    /// Points along every axis segment, each checked to be equidistant from
    /// its two nearest polygon edges.
    fn assert_bisecting(poly: &Polygon2D, core: &SimplicialCore) {
        for c in core.cells().iter().filter(|c| c.len() == 2) {
            let (a, b) = (&core.vertices()[c[0]], &core.vertices()[c[1]]);
            for s in 0..=50 {
                let t = s as f64 / 50.0;
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let mut d: Vec<f64> = poly.edges().map(|(u, v)| segment_distance(p, u, v)).collect();
                d.sort_by(f64::total_cmp);
                assert!((d[1] - d[0]).abs() <= 1e-9, "{p:?}: {d:?}");
            }
        }
    }

    fn has_segment(core: &SimplicialCore, a: [f64; 2], b: [f64; 2]) -> bool {
        let near = |p: &[f64], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-9;
        core.cells().iter().filter(|c| c.len() == 2).any(|c| {
            let (p, q) = (&core.vertices()[c[0]], &core.vertices()[c[1]]);
            (near(p, a) && near(q, b)) || (near(p, b) && near(q, a))
        })
    }

    #[test]
    fn square_diagonals() {
        let sq = Polygon2D::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let core = medial_axis_core(&sq).unwrap();
        assert_eq!(core.cells().iter().filter(|c| c.len() == 2).count(), 4);
        for corner in sq.vertices() {
            assert!(has_segment(&core, *corner, [0.0, 0.0]));
        }
        assert_bisecting(&sq, &core);
    }

    #[test]
    fn thin_rectangle_spine() {
        let r = Polygon2D::rectangle(-10.0, 10.0, -1.0, 1.0).unwrap();
        let core = medial_axis_core(&r).unwrap();
        assert_eq!(core.cells().iter().filter(|c| c.len() == 2).count(), 5);
        assert!(has_segment(&core, [-9.0, 0.0], [9.0, 0.0]));
        assert!(has_segment(&core, [10.0, 1.0], [9.0, 0.0]));
        assert!(has_segment(&core, [-10.0, -1.0], [-9.0, 0.0]));
        assert_bisecting(&r, &core);
    }

    #[test]
    fn triangle_incenter() {
        let h = 3f64.sqrt();
        let t = Polygon2D::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, h]]).unwrap();
        let core = medial_axis_core(&t).unwrap();
        assert_eq!(core.cells().iter().filter(|c| c.len() == 2).count(), 3);
        for corner in t.vertices() {
            assert!(has_segment(&core, *corner, [1.0, h / 3.0]));
        }
        assert_bisecting(&t, &core);
    }

    #[test]
    fn irregular_polygons_bisect() {
        let polys = [
            vec![[0.0, 0.0], [4.0, 0.0], [5.0, 2.0], [3.0, 4.0], [0.5, 3.0]],
            vec![[0.0, 0.0], [6.0, 0.5], [6.5, 1.5], [1.0, 2.0]],
            (0..9)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / 9.0 + 0.1 * (i % 3) as f64;
                    [2.0 * t.cos(), t.sin()]
                })
                .collect(),
        ];
        for v in polys {
            let p = Polygon2D::new(v).unwrap();
            let core = medial_axis_core(&p).unwrap();
            assert_bisecting(&p, &core);
        }
    }

    #[test]
    fn square_boundary_hausdorff() {
        let sq = Polygon2D::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let core = medial_axis_core(&sq).unwrap();
        let c = PointCloud::new(sq.sample_boundary(100).iter().map(|p| p.to_vec()).collect(), Norm::L2).unwrap();
        let e = uberspread_upper(&c, &core).unwrap();
        assert!((0.99..=1.01).contains(&e.value), "{}", e.value);
    }
}
