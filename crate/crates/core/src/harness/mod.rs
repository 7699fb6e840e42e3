//! Dataset generation, file formats, the bound-verification pipeline and
//! the PCA comparison experiment.

mod generate;
mod io;
mod pca;
mod verify;

use rayon::prelude::*;

use crate::error::Result;

pub use generate::{generate, Dataset, Params, Shape};
pub use io::{cloud_to_csv, dataset_to_csv, metric_to_csv, parse_cloud, parse_dataset, parse_metric, read_dataset};
pub use pca::{l2_pca_flat, pca_comparison, Correlation, PcaRow, PcaTable};
pub use verify::{
    farthest_point_subsample, parse_checks, perturb, verify_bounds, BoundCheck, CheckStatus, DatasetInfo,
    ExperimentReport, Skipped, TheoremId, TheoremSummary, VerifyConfig, CHECKS_CSV_HEADER, ROW_TOLERANCE,
};

/// Runs `f` on a pool of at most `PB_THREADS` threads when the variable is
/// set, on the global pool otherwise.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match std::env::var("PB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// A named dataset with its verification settings.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub name: String,
    pub data: Dataset,
    pub config: VerifyConfig,
}

/// Datasets that together exercise every theorem of the catalog.
pub fn paper_suite(seed: u64) -> Result<Vec<SuiteEntry>> {
    let base = VerifyConfig {
        seed,
        ..VerifyConfig::default()
    };
    let gen = |shape: Shape, params: &str, n: usize| generate(shape, &Params::parse(params)?, n, seed);
    let entry = |name: &str, data: Dataset, config: VerifyConfig| SuiteEntry {
        name: name.to_string(),
        data,
        config,
    };
    let square = crate::geometry::Polygon2D::rectangle(-1.0, 1.0, -1.0, 1.0)?;
    let boundary = crate::metric::PointCloud::new(
        square.sample_boundary(100).iter().map(|p| p.to_vec()).collect(),
        crate::metric::Norm::L2,
    )?;
    let linf = gen(Shape::LinfSphere, "", 80)?.metric()?;
    Ok(vec![
        entry("circle", gen(Shape::Circle, "r=1", 120)?, base.clone()),
        entry("ellipse", gen(Shape::Ellipse, "a=2,b=1", 150)?, base.clone()),
        entry(
            "linf_sphere",
            Dataset::Metric(linf),
            VerifyConfig {
                hcdef_subsample: 12,
                hcdef_exact_limit: 12,
                ..base.clone()
            },
        ),
        entry(
            "square_medial_axis",
            Dataset::Cloud(boundary),
            VerifyConfig {
                core: Some(crate::geometry::medial_axis_core(&square)?),
                ..base.clone()
            },
        ),
        entry("large_circle", gen(Shape::Circle, "r=30", 40)?, base.clone()),
        entry("ellipsoid", gen(Shape::Ellipsoid, "a=3,b=2,c=1", 60)?, base.clone()),
        entry("tripod_with_loops", gen(Shape::TripodWithLoops, "", 60)?, base.clone()),
        entry("uniform", gen(Shape::Uniform, "dim=2,side=4", 25)?, base.clone()),
        entry("tree_metric", gen(Shape::TreeMetric, "", 10)?, base),
    ])
}

/// Verifies every entry, in parallel, keeping the input order.
pub fn run_suite(entries: &[SuiteEntry]) -> Result<Vec<ExperimentReport>> {
    entries.par_iter().map(|e| verify_bounds(&e.name, &e.data, &e.config)).collect()
}
