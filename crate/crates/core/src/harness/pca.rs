//! Least-squares PCA against minimax flats and Čech lifespans.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complexes::cech;
use crate::error::{Error, Result};
use crate::metric::{circumradius, Norm, PointCloud};
use crate::persistence::compute_persistence;
use crate::widths::{kolmogorov_width, AffineFlat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaRow {
    pub cloud: String,
    pub k: usize,
    /// Largest distance from a point to the least-squares k-flat.
    pub l2_pca_residual: f64,
    pub kolmogorov_width: f64,
    pub max_cech_lifespan: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub k: usize,
    pub rows: usize,
    /// Pearson correlation with the lifespan column; `None` when a column
    /// is constant.
    pub residual_vs_lifespan: Option<f64>,
    pub width_vs_lifespan: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTable {
    pub rows: Vec<PcaRow>,
    pub correlations: Vec<Correlation>,
}

impl PcaTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cloud,k,l2_pca_residual,kolmogorov_width,max_cech_lifespan\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.cloud, r.k, r.l2_pca_residual, r.kolmogorov_width, r.max_cech_lifespan));
        }
        out
    }
}

/// Least-squares k-flat: the centroid plus the top `k` principal axes.
pub fn l2_pca_flat(cloud: &PointCloud, k: usize) -> Result<AffineFlat> {
    let (n, d) = (cloud.len(), cloud.dim());
    let mean: Vec<f64> = (0..d).map(|j| cloud.points().iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| cloud.point(i)[j] - mean[j]);
    let eig = SymmetricEigen::new(centered.transpose() * &centered);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let directions = order[..k].iter().map(|&j| eig.eigenvectors.column(j).iter().copied().collect()).collect();
    AffineFlat::new(mean, directions)
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// For each cloud and each `1 <= k <= k_max` below its dimension, the
/// least-squares residual, the Kolmogorov width and the longest degree-k
/// Čech lifespan.
pub fn pca_comparison(clouds: &[(String, PointCloud)], k_max: usize, restarts: usize) -> Result<PcaTable> {
    let mut rows = Vec::new();
    for (name, cloud) in clouds {
        if cloud.norm() != Norm::L2 {
            return Err(Error::UnsupportedNorm(cloud.norm()));
        }
        let top = k_max.min(cloud.dim().saturating_sub(1));
        if top == 0 {
            continue;
        }
        let fc = cech(cloud, top + 1, circumradius(cloud)?)?;
        let pd = compute_persistence(&fc, top)?;
        for k in 1..=top {
            let flat = l2_pca_flat(cloud, k)?;
            let residual = cloud.points().iter().map(|p| flat.distance(p)).fold(0.0, f64::max);
            let kw = kolmogorov_width(cloud, k, restarts)?;
            let life = pd.degree(k).map(|iv| iv.lifespan()).fold(0.0, f64::max);
            rows.push(PcaRow {
                cloud: name.clone(),
                k,
                l2_pca_residual: residual,
                kolmogorov_width: kw.value,
                max_cech_lifespan: life,
            });
        }
    }
    let mut correlations = Vec::new();
    for k in 1..=k_max {
        let mine: Vec<&PcaRow> = rows.iter().filter(|r| r.k == k).collect();
        if mine.is_empty() {
            continue;
        }
        let col = |f: fn(&PcaRow) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let life = col(|r| r.max_cech_lifespan);
        correlations.push(Correlation {
            k,
            rows: mine.len(),
            residual_vs_lifespan: pearson(&col(|r| r.l2_pca_residual), &life),
            width_vs_lifespan: pearson(&col(|r| r.kolmogorov_width), &life),
        });
    }
    Ok(PcaTable { rows, correlations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_cloud_is_all_zero() {
        let c = PointCloud::new((0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect(), Norm::L2).unwrap();
        let t = pca_comparison(&[("line".into(), c)], 1, 4).unwrap();
        assert_eq!(t.rows.len(), 1);
        let r = &t.rows[0];
        assert!(r.l2_pca_residual < 1e-9 && r.kolmogorov_width < 1e-9 && r.max_cech_lifespan == 0.0, "{r:?}");
    }

    #[test]
    fn ellipse_row() {
        let c = PointCloud::new(
            (0..100)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / 100.0;
                    vec![2.0 * t.cos(), t.sin()]
                })
                .collect(),
            Norm::L2,
        )
        .unwrap();
        let t = pca_comparison(&[("ellipse".into(), c)], 1, 4).unwrap();
        let r = &t.rows[0];
        assert!((r.l2_pca_residual - 1.0).abs() < 1e-9, "{r:?}");
        // the minimax line may tilt slightly away from the major axis
        assert!(r.kolmogorov_width <= r.l2_pca_residual && r.kolmogorov_width > 0.999, "{r:?}");
        assert!(r.max_cech_lifespan <= r.kolmogorov_width + 1e-9 && r.max_cech_lifespan > 0.9, "{r:?}");
    }

    #[test]
    fn pearson_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]).unwrap() - 0.9986).abs() < 1e-3);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 1.0]), None);
    }
}
