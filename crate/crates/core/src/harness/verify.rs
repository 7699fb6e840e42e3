//! Lifespan and extinction inequalities evaluated row by row on computed
//! diagrams.
//!
//! Each theorem is checked on every applicable interval. A row compares a
//! measured quantity with a bound; rows whose bound is a lower estimate of
//! the true right-hand side become inconclusive rather than violated when
//! they miss by less than the estimator band.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::complexes::{cech, vietoris_rips, Flavor};
use crate::error::{Error, Result};
use crate::geometry::{
    convex_core_lifespan_bound, convex_hull_2d, convexity_deficiency, hyperconvexity_deficiency, medial_axis_core, Hull2D,
    DEFAULT_HCDEF_EXACT_LIMIT,
};
use crate::metric::{circumradius, diameter, hausdorff_distance, min_enclosing_ball, radius, FiniteMetricSpace, Norm, PointCloud};
use crate::persistence::{bottleneck_distance, compute_persistence, extinction_time, Interval, PersistenceDiagram};
use crate::widths::{
    core_displacement, kolmogorov_width_with, mst_core, spread, uberspread_upper, Certificate, Exactness, KwConfig,
    SimplicialCore, WidthEstimate, Witness, DEFAULT_SPREAD_EXACT_LIMIT,
};

use super::Dataset;

/// Absolute tolerance of rows with exact or upper-bound right-hand sides.
pub const ROW_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    T11,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::T7,
        TheoremId::T8,
        TheoremId::T9,
        TheoremId::T10,
        TheoremId::T11,
    ];

    pub fn statement(self) -> &'static str {
        match self {
            TheoremId::T1 => "Cech lifespan <= KW_k",
            TheoremId::T2 => "Cech lifespan <= AW_{k-1} of the hull",
            TheoremId::T3 => "Cech lifespan <= TW_k of the hull",
            TheoremId::T4 => "Cech extinction <= cdef",
            TheoremId::T5 => "Cech lifespan <= 2 uberspread",
            TheoremId::T6 => "Cech lifespan <= d_H to a convex core",
            TheoremId::T7 => "VR lifespan <= spread",
            TheoremId::T8 => "VR extinction <= 2 hcdef",
            TheoremId::T9 => "extinction <= radius (VR) and circumradius (Cech)",
            TheoremId::T10 => "Cech death/birth <= 1 + KW_k for births >= 1",
            TheoremId::T11 => "bottleneck <= d_H (Cech) and 2 d_H (VR) under perturbation",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        TheoremId::ALL
            .into_iter()
            .find(|id| id.to_string() == t)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id '{s}'")))
    }
}

/// Comma-separated theorem ids, e.g. `T1,T4,T9`.
pub fn parse_checks(text: &str) -> Result<Vec<TheoremId>> {
    let mut ids: Vec<TheoremId> = text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    ids.sort();
    ids.dedup();
    Ok(ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Satisfied,
    Inconclusive,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub theorem_id: TheoremId,
    pub degree: usize,
    pub filtration: Flavor,
    /// `None` for rows about a whole diagram, such as stability rows.
    pub interval: Option<(f64, f64)>,
    pub measured: f64,
    pub bound_value: f64,
    pub bound_exactness: Exactness,
    pub slack: f64,
    pub satisfied: bool,
    pub status: CheckStatus,
}

impl BoundCheck {
    /// `band` is the estimator error allowed for heuristic bounds.
    #[allow(clippy::too_many_arguments)]
    fn new(
        theorem_id: TheoremId,
        degree: usize,
        filtration: Flavor,
        interval: Option<(f64, f64)>,
        measured: f64,
        bound_value: f64,
        bound_exactness: Exactness,
        band: f64,
    ) -> Self {
        let slack = bound_value - measured;
        let tolerance = match bound_exactness {
            Exactness::Heuristic => ROW_TOLERANCE + band * bound_value.abs(),
            _ => ROW_TOLERANCE,
        };
        let status = if slack >= -ROW_TOLERANCE {
            CheckStatus::Satisfied
        } else if slack >= -tolerance {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Violated
        };
        Self {
            theorem_id,
            degree,
            filtration,
            interval,
            measured,
            bound_value,
            bound_exactness,
            slack,
            satisfied: slack >= -tolerance,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem_id: TheoremId,
    pub rows: usize,
    pub satisfied: usize,
    pub inconclusive: usize,
    pub violated: usize,
    /// Smallest slack over the rows.
    pub worst_slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub theorem_id: TheoremId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub kind: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
}

impl DatasetInfo {
    pub fn of(name: &str, data: &Dataset) -> Self {
        let cloud = data.cloud();
        Self {
            name: name.to_string(),
            kind: if cloud.is_some() { "cloud" } else { "metric" }.to_string(),
            n: data.len(),
            dim: cloud.map(PointCloud::dim),
            norm: cloud.map(PointCloud::norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: DatasetInfo,
    /// Diagrams in the `{"degrees": ...}` format, keyed by filtration.
    pub diagrams: BTreeMap<String, Value>,
    pub widths: Vec<WidthEstimate>,
    pub quantities: BTreeMap<String, f64>,
    pub checks: Vec<BoundCheck>,
    pub summary: Vec<TheoremSummary>,
    pub skipped: Vec<Skipped>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub elapsed_ms: u64,
}

impl ExperimentReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::Violated).count()
    }

    pub fn summary_of(&self, id: TheoremId) -> Option<&TheoremSummary> {
        self.summary.iter().find(|s| s.theorem_id == id)
    }

    pub fn rows_of(&self, id: TheoremId) -> impl Iterator<Item = &BoundCheck> + '_ {
        self.checks.iter().filter(move |c| c.theorem_id == id)
    }

    /// The JSON form without the timing field, for comparing runs.
    pub fn deterministic_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("elapsed_ms");
        }
        v
    }

    /// One line per row.
    pub fn checks_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let (b, d) = c.interval.map_or((String::new(), String::new()), |(b, d)| (b.to_string(), d.to_string()));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:?},{:?},{}\n",
                self.dataset.name,
                c.theorem_id,
                c.degree,
                c.filtration,
                b,
                d,
                c.measured,
                c.bound_value,
                c.bound_exactness,
                c.status,
                c.slack
            ));
        }
        out
    }
}

pub const CHECKS_CSV_HEADER: &str = "dataset,theorem,degree,filtration,birth,death,measured,bound,bound_exactness,status,slack\n";

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Theorems to check; `None` runs every applicable one and records the
    /// others as skipped, an explicit list fails on unmet prerequisites.
    pub checks: Option<Vec<TheoremId>>,
    pub max_dim: usize,
    /// Filtration cap; defaults to the diameter (VR) and circumradius (Čech),
    /// past which every class has died.
    pub max_filtration: Option<f64>,
    pub seed: u64,
    pub kw_restarts: usize,
    pub spread_exact_limit: usize,
    pub hcdef_exact_limit: usize,
    /// Size of the farthest-point subsample used for hyperconvexity rows.
    pub hcdef_subsample: usize,
    /// Core for überspread rows, also used for convex-core rows when it
    /// carries a convex certificate. Defaults to the minimum spanning tree.
    pub core: Option<SimplicialCore>,
    /// Radius of the random displacement of each point in stability rows.
    pub perturbation: f64,
    /// Relative estimator error allowed for heuristic lower estimates.
    pub heuristic_band: f64,
    /// Multiplies every death before checking; 1 except in self-tests.
    pub death_factor: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: None,
            max_dim: 2,
            max_filtration: None,
            seed: 0,
            kw_restarts: 16,
            spread_exact_limit: DEFAULT_SPREAD_EXACT_LIMIT,
            hcdef_exact_limit: DEFAULT_HCDEF_EXACT_LIMIT,
            hcdef_subsample: DEFAULT_HCDEF_EXACT_LIMIT,
            core: None,
            perturbation: 0.05,
            heuristic_band: 0.1,
            death_factor: 1.0,
        }
    }
}

fn prerequisite(id: TheoremId, data: &Dataset, config: &VerifyConfig) -> std::result::Result<(), String> {
    let cloud = data.cloud();
    let euclidean = || match cloud {
        None => Err("needs a point cloud, got a distance matrix".to_string()),
        Some(c) if c.norm() != Norm::L2 => Err(format!("needs the Euclidean norm, got {}", c.norm())),
        Some(_) => Ok(()),
    };
    match id {
        TheoremId::T1 | TheoremId::T2 | TheoremId::T3 | TheoremId::T4 | TheoremId::T10 => euclidean(),
        TheoremId::T5 => {
            euclidean()?;
            match (&config.core, cloud) {
                (Some(core), Some(c)) if core.ambient_dim() != c.dim() => {
                    Err(format!("core lives in R^{}, cloud in R^{}", core.ambient_dim(), c.dim()))
                }
                _ => Ok(()),
            }
        }
        TheoremId::T6 => {
            euclidean()?;
            let dim = cloud.map_or(0, PointCloud::dim);
            match &config.core {
                Some(core) if !matches!(core.certificate(), Certificate::ConvexSet | Certificate::Point) => {
                    Err(format!("core certificate {:?} is not convex", core.certificate()))
                }
                Some(core) if core.ambient_dim() != dim => Err("core and cloud dimensions differ".into()),
                Some(_) => Ok(()),
                None if dim == 2 => Ok(()),
                None => Err(format!("no default convex core in R^{dim}; pass a core with a convex certificate")),
            }
        }
        TheoremId::T7 | TheoremId::T8 | TheoremId::T9 => Ok(()),
        TheoremId::T11 => match cloud {
            None => Err("needs coordinates to perturb".into()),
            Some(c) if c.norm() == Norm::L1 => Err("Čech filtrations need the l2 or linf norm".into()),
            Some(_) => Ok(()),
        },
    }
}

fn cech_allowed(data: &Dataset) -> bool {
    data.cloud().is_some_and(|c| c.norm() != Norm::L1)
}

fn corrupt(pd: PersistenceDiagram, factor: f64) -> PersistenceDiagram {
    if factor == 1.0 {
        return pd;
    }
    PersistenceDiagram::new(
        pd.intervals()
            .iter()
            .map(|iv| Interval {
                death: iv.death * factor,
                ..*iv
            })
            .collect(),
    )
}

fn vr_diagram(ms: &FiniteMetricSpace, max_dim: usize, cap: Option<f64>) -> Result<PersistenceDiagram> {
    let fc = vietoris_rips(ms, max_dim, cap.unwrap_or_else(|| diameter(ms)))?;
    compute_persistence(&fc, max_dim - 1)
}

fn cech_diagram(cloud: &PointCloud, max_dim: usize, cap: Option<f64>) -> Result<PersistenceDiagram> {
    let cap = match cap {
        Some(c) => c,
        None => circumradius(cloud)?,
    };
    let fc = cech(cloud, max_dim, cap)?;
    compute_persistence(&fc, max_dim - 1)
}

/// Hausdorff distance from a planar cloud to the medial axis of its hull;
/// `None` off the plane or for a degenerate hull.
fn cut_locus_hausdorff(cloud: &PointCloud) -> Result<Option<f64>> {
    if cloud.dim() != 2 {
        return Ok(None);
    }
    let pts: Vec<[f64; 2]> = cloud.points().iter().map(|p| [p[0], p[1]]).collect();
    let Hull2D::Polygon(hull) = convex_hull_2d(&pts)? else {
        return Ok(None);
    };
    Ok(Some(uberspread_upper(cloud, &medial_axis_core(&hull)?)?.value))
}

/// Farthest-point subsample of size `m`, starting from point 0.
pub fn farthest_point_subsample(ms: &FiniteMetricSpace, m: usize) -> Vec<usize> {
    let n = ms.len();
    if m >= n {
        return (0..n).collect();
    }
    let mut chosen = vec![0];
    let mut gap: Vec<f64> = ms.row(0).to_vec();
    while chosen.len() < m {
        let next = (0..n).max_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(b.cmp(&a))).expect("nonempty");
        chosen.push(next);
        for (g, d) in gap.iter_mut().zip(ms.row(next)) {
            *g = g.min(*d);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Each point moved by an independent vector drawn uniformly from the ball
/// of radius `eps` in the cloud's norm (l2 or linf).
pub fn perturb(cloud: &PointCloud, eps: f64, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = cloud.dim();
    let norm = cloud.norm();
    if norm == Norm::L1 {
        return Err(Error::UnsupportedNorm(norm));
    }
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let step: Vec<f64> = if norm == Norm::Linf {
                (0..dim).map(|_| eps * (2.0 * rng.random::<f64>() - 1.0)).collect()
            } else {
                let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let r = eps * rng.random::<f64>().powf(1.0 / dim as f64) / Norm::L2.length(&g).max(f64::MIN_POSITIVE);
                g.iter().map(|x| x * r).collect()
            };
            p.iter().zip(step).map(|(x, s)| x + s).collect()
        })
        .collect();
    PointCloud::new(points, norm)
}

fn finite(pd: &PersistenceDiagram) -> impl Iterator<Item = &Interval> + '_ {
    pd.intervals().iter().filter(|iv| !iv.is_essential())
}

/// Interval achieving the extinction time, if any.
fn extinction_interval(pd: &PersistenceDiagram) -> Option<Interval> {
    finite(pd).copied().max_by(|a, b| a.death.total_cmp(&b.death))
}

/// Exact for Kolmogorov widths computed in closed form; a heuristic width
/// is realized by its witness flat, hence an upper bound.
fn upper_label(e: Exactness) -> Exactness {
    match e {
        Exactness::Exact => Exactness::Exact,
        _ => Exactness::UpperBound,
    }
}

struct Rows<'a> {
    config: &'a VerifyConfig,
    checks: Vec<BoundCheck>,
    skipped: Vec<Skipped>,
}

impl Rows<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        id: TheoremId,
        degree: usize,
        flavor: Flavor,
        interval: Option<(f64, f64)>,
        measured: f64,
        bound: f64,
        exactness: Exactness,
    ) {
        self.checks.push(BoundCheck::new(id, degree, flavor, interval, measured, bound, exactness, self.config.heuristic_band));
    }

    /// One lifespan row per finite interval; essential intervals only occur
    /// under a user cap and are recorded as skipped.
    fn lifespans(
        &mut self,
        id: TheoremId,
        flavor: Flavor,
        pd: &PersistenceDiagram,
        mut bound: impl FnMut(usize) -> Option<(f64, Exactness)>,
    ) {
        for iv in pd.intervals() {
            if iv.is_essential() {
                self.skip(id, format!("degree {} interval born at {} does not die below the cap", iv.degree, iv.birth));
                continue;
            }
            if let Some((b, e)) = bound(iv.degree) {
                self.push(id, iv.degree, flavor, Some((iv.birth, iv.death)), iv.lifespan(), b, e);
            }
        }
    }

    fn skip(&mut self, id: TheoremId, reason: String) {
        if !self.skipped.iter().any(|s| s.theorem_id == id && s.reason == reason) {
            self.skipped.push(Skipped { theorem_id: id, reason });
        }
    }
}

fn opt<T>(r: Option<Result<T>>) -> Result<Option<T>> {
    r.transpose()
}

pub fn verify_bounds(name: &str, data: &Dataset, config: &VerifyConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    if config.max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be at least 1".into()));
    }
    if let Some(cap) = config.max_filtration {
        if !(cap >= 0.0) {
            return Err(Error::InvalidParameter("max_filtration must be nonnegative".into()));
        }
    }
    let mut skipped = Vec::new();
    let mut enabled = Vec::new();
    for id in config.checks.clone().unwrap_or_else(|| TheoremId::ALL.to_vec()) {
        match prerequisite(id, data, config) {
            Ok(()) => enabled.push(id),
            Err(reason) if config.checks.is_none() => skipped.push(Skipped { theorem_id: id, reason }),
            Err(reason) => {
                return Err(Error::Prerequisite {
                    theorem: id.to_string(),
                    reason,
                })
            }
        }
    }
    let on = |id: TheoremId| enabled.contains(&id);
    let ms = data.metric()?;
    let cloud = data.cloud();
    let dim = cloud.map_or(0, PointCloud::dim);
    let max_degree = config.max_dim - 1;
    let need_vr = on(TheoremId::T7) || on(TheoremId::T9) || on(TheoremId::T11);
    let need_cech = cech_allowed(data)
        && [TheoremId::T1, TheoremId::T2, TheoremId::T3, TheoremId::T4, TheoremId::T5, TheoremId::T6, TheoremId::T9, TheoremId::T10, TheoremId::T11]
            .into_iter()
            .any(on);
    // Kolmogorov widths for degrees up to max_degree, and one lower for T2
    let kw_top = if [TheoremId::T1, TheoremId::T2, TheoremId::T3, TheoremId::T10].into_iter().any(on) {
        Some(max_degree.min(dim.saturating_sub(1)))
    } else {
        None
    };

    let (mut vr, mut cech_pd, mut kw, mut spr, mut cdef, mut hc, mut usp, mut convex, mut stab) =
        (None, None, None, None, None, None, None, None, None);
    rayon::scope(|s| {
        if need_vr {
            s.spawn(|_| vr = Some(vr_diagram(&ms, config.max_dim, config.max_filtration)));
        }
        if let (true, Some(c)) = (need_cech, cloud) {
            s.spawn(|_| cech_pd = Some(cech_diagram(c, config.max_dim, config.max_filtration)));
        }
        if let (Some(top), Some(c)) = (kw_top, cloud) {
            let slot = &mut kw;
            s.spawn(move |_| {
                use rayon::prelude::*;
                let kc = KwConfig {
                    restarts: config.kw_restarts,
                    seed: config.seed,
                    ..KwConfig::default()
                };
                *slot = Some((0..=top).into_par_iter().map(|k| kolmogorov_width_with(c, k, &kc)).collect::<Result<Vec<_>>>());
            });
        }
        if on(TheoremId::T7) {
            s.spawn(|_| spr = Some(Ok(spread(&ms, config.spread_exact_limit))));
        }
        if let (true, Some(c)) = (on(TheoremId::T4), cloud) {
            s.spawn(|_| cdef = Some(convexity_deficiency(c)));
        }
        if on(TheoremId::T8) {
            s.spawn(|_| {
                hc = Some((|| -> Result<_> {
                    let idx = farthest_point_subsample(&ms, config.hcdef_subsample.max(1));
                    let sub = ms.subspace(&idx);
                    let h = hyperconvexity_deficiency(&sub, config.hcdef_exact_limit)?;
                    let pd = vr_diagram(&sub, config.max_dim, None)?;
                    Ok((idx.len(), radius(&sub), h, pd))
                })());
            });
        }
        if let (true, Some(c)) = (on(TheoremId::T5), cloud) {
            s.spawn(|_| {
                usp = Some((|| -> Result<_> {
                    let core = match &config.core {
                        Some(core) => core.clone(),
                        None => mst_core(c)?,
                    };
                    uberspread_upper(c, &core)
                })());
            });
        }
        if let (true, Some(c)) = (on(TheoremId::T6), cloud) {
            s.spawn(|_| {
                convex = Some((|| -> Result<_> {
                    let core = match &config.core {
                        Some(core) => core.clone(),
                        None => {
                            let ball = min_enclosing_ball(c)?;
                            SimplicialCore::disk([ball.center[0], ball.center[1]], ball.radius, 256)?
                        }
                    };
                    convex_core_lifespan_bound(c, &core)
                })());
            });
        }
        if let (true, Some(c)) = (on(TheoremId::T11), cloud) {
            s.spawn(|_| {
                stab = Some((|| -> Result<_> {
                    let moved = perturb(c, config.perturbation, config.seed ^ 0x5eed)?;
                    let dh = hausdorff_distance(c, &moved)?;
                    let (ra, rb) = (circumradius(c)?, circumradius(&moved)?);
                    let cap = ra.max(rb);
                    let (ma, mb) = (ms.clone(), crate::metric::pairwise_distances(&moved)?);
                    let vcap = diameter(&ma).max(diameter(&mb));
                    let pairs = (
                        (cech_diagram(c, config.max_dim, Some(cap))?, cech_diagram(&moved, config.max_dim, Some(cap))?),
                        (vr_diagram(&ma, config.max_dim, Some(vcap))?, vr_diagram(&mb, config.max_dim, Some(vcap))?),
                    );
                    Ok((dh, pairs))
                })());
            });
        }
    });
    let vr = opt(vr)?.map(|pd| corrupt(pd, config.death_factor));
    let cech_pd = opt(cech_pd)?.map(|pd| corrupt(pd, config.death_factor));
    let kw = opt(kw)?;
    let spr = opt(spr)?;
    let cdef = opt(cdef)?;
    let hc = opt(hc)?;
    let usp = opt(usp)?;
    let convex = opt(convex)?;
    let stab = opt(stab)?;

    let mut rows = Rows {
        config,
        checks: Vec::new(),
        skipped,
    };
    let mut widths: Vec<WidthEstimate> = Vec::new();
    let mut quantities = BTreeMap::new();
    let mut diagrams = BTreeMap::new();
    quantities.insert("diameter".to_string(), diameter(&ms));
    quantities.insert("radius".to_string(), radius(&ms));
    if let Some(c) = cloud.filter(|c| c.norm() != Norm::L1) {
        quantities.insert("circumradius".to_string(), circumradius(c)?);
    }
    if let Some(pd) = &vr {
        diagrams.insert("vietoris_rips".to_string(), pd.to_json());
        quantities.insert("vr_extinction".to_string(), extinction_time(pd));
    }
    if let Some(pd) = &cech_pd {
        diagrams.insert("cech".to_string(), pd.to_json());
        quantities.insert("cech_extinction".to_string(), extinction_time(pd));
    }

    if let (Some(kw), Some(pd)) = (&kw, &cech_pd) {
        let c = cloud.expect("widths need a cloud");
        for w in kw.iter() {
            quantities.insert(format!("kw_{}", w.k), w.value);
        }
        let kw_bound = |k: usize| kw.get(k).map(|w| (w.value, upper_label(w.exactness)));
        if on(TheoremId::T1) {
            rows.lifespans(TheoremId::T1, Flavor::Cech, pd, kw_bound);
        }
        if on(TheoremId::T10) {
            for iv in finite(pd).filter(|iv| iv.birth >= 1.0) {
                if let Some((b, e)) = kw_bound(iv.degree) {
                    rows.push(TheoremId::T10, iv.degree, Flavor::Cech, Some((iv.birth, iv.death)), iv.death / iv.birth, 1.0 + b, e);
                }
            }
        }
        // displacement onto bounded patches of the Kolmogorov flats; the
        // distance to a flat is convex, so its maximum over the hull is
        // attained at a cloud point
        let mut patch = BTreeMap::new();
        for w in kw.iter().filter(|w| w.k <= 2) {
            if let Some(Witness::Flat(flat)) = &w.witness {
                let core = SimplicialCore::from_flat(flat, c)?;
                let d = core_displacement(c, &core)?;
                quantities.insert(format!("tw_upper_{}", w.k), d.value);
                if let Some(u) = d.urysohn_upper() {
                    quantities.insert(format!("uw_upper_{}", w.k), u);
                }
                patch.insert(w.k, d.value);
            }
        }
        if on(TheoremId::T2) {
            rows.lifespans(TheoremId::T2, Flavor::Cech, pd, |k| {
                (k >= 1).then(|| patch.get(&(k - 1)).map(|&v| (v, Exactness::UpperBound))).flatten()
            });
        }
        if on(TheoremId::T3) {
            rows.lifespans(TheoremId::T3, Flavor::Cech, pd, |k| patch.get(&k).map(|&v| (v, Exactness::UpperBound)));
        }
        for id in [TheoremId::T1, TheoremId::T2, TheoremId::T3, TheoremId::T10] {
            if on(id) && finite(pd).any(|iv| iv.degree >= dim) {
                rows.skip(id, format!("no width for degrees >= ambient dimension {dim}"));
            }
        }
        widths.extend(kw.iter().cloned());
    }

    if let (Some(cd), Some(pd)) = (&cdef, &cech_pd) {
        quantities.insert("cdef".to_string(), cd.value);
        let (degree, interval) = extinction_interval(pd).map_or((0, None), |iv| (iv.degree, Some((iv.birth, iv.death))));
        rows.push(TheoremId::T4, degree, Flavor::Cech, interval, extinction_time(pd), cd.value, cd.exactness);
        // measured against extinction but never asserted: points near a
        // square's corners can outlive this distance
        if let Some(d) = cut_locus_hausdorff(cloud.expect("cdef needs a cloud"))? {
            quantities.insert("cut_locus_hausdorff".to_string(), d);
        }
    }

    if let (Some(u), Some(pd)) = (&usp, &cech_pd) {
        quantities.insert("uberspread_upper".to_string(), u.value);
        let b = 2.0 * u.value;
        rows.lifespans(TheoremId::T5, Flavor::Cech, pd, |_| Some((b, Exactness::UpperBound)));
        widths.push(u.clone());
    }

    if let (Some(v), Some(pd)) = (convex, &cech_pd) {
        quantities.insert("convex_core_hausdorff".to_string(), v);
        rows.lifespans(TheoremId::T6, Flavor::Cech, pd, |_| Some((v, Exactness::UpperBound)));
    }

    if let (Some(s), Some(pd)) = (&spr, &vr) {
        quantities.insert("spread".to_string(), s.value);
        let e = s.exactness;
        rows.lifespans(TheoremId::T7, Flavor::VietorisRips, pd, |_| Some((s.value, e)));
        widths.push(s.clone());
    }

    if let Some((m, rad, h, pd)) = hc {
        let pd = corrupt(pd, config.death_factor);
        quantities.insert("hcdef_subsample".to_string(), h.value);
        quantities.insert("hcdef_subsample_size".to_string(), m as f64);
        quantities.insert("hcdef_over_radius".to_string(), if rad > 0.0 { h.value / rad } else { 0.0 });
        let (degree, interval) = extinction_interval(&pd).map_or((0, None), |iv| (iv.degree, Some((iv.birth, iv.death))));
        rows.push(TheoremId::T8, degree, Flavor::VietorisRips, interval, extinction_time(&pd), 2.0 * h.value, h.exactness);
    }

    if on(TheoremId::T9) {
        if let Some(pd) = &vr {
            let (degree, interval) = extinction_interval(pd).map_or((0, None), |iv| (iv.degree, Some((iv.birth, iv.death))));
            rows.push(TheoremId::T9, degree, Flavor::VietorisRips, interval, extinction_time(pd), radius(&ms), Exactness::Exact);
        }
        if let (Some(pd), Some(c)) = (&cech_pd, cloud) {
            let (degree, interval) = extinction_interval(pd).map_or((0, None), |iv| (iv.degree, Some((iv.birth, iv.death))));
            rows.push(TheoremId::T9, degree, Flavor::Cech, interval, extinction_time(pd), circumradius(c)?, Exactness::Exact);
        }
    }

    if let Some((dh, ((ca, cb), (va, vb)))) = stab {
        let (ca, va) = (corrupt(ca, config.death_factor), corrupt(va, config.death_factor));
        quantities.insert("perturbation_hausdorff".to_string(), dh);
        for k in 0..=max_degree {
            rows.push(TheoremId::T11, k, Flavor::Cech, None, bottleneck_distance(&ca, &cb, k), dh, Exactness::Exact);
            rows.push(TheoremId::T11, k, Flavor::VietorisRips, None, bottleneck_distance(&va, &vb, k), 2.0 * dh, Exactness::Exact);
        }
    }

    let Rows { checks, skipped, .. } = rows;
    let summary = enabled
        .iter()
        .map(|&id| {
            let mine: Vec<&BoundCheck> = checks.iter().filter(|c| c.theorem_id == id).collect();
            let count = |s: CheckStatus| mine.iter().filter(|c| c.status == s).count();
            TheoremSummary {
                theorem_id: id,
                rows: mine.len(),
                satisfied: count(CheckStatus::Satisfied),
                inconclusive: count(CheckStatus::Inconclusive),
                violated: count(CheckStatus::Violated),
                worst_slack: mine.iter().map(|c| c.slack).min_by(f64::total_cmp),
            }
        })
        .collect();
    Ok(ExperimentReport {
        dataset: DatasetInfo::of(name, data),
        diagrams,
        widths,
        quantities,
        checks,
        summary,
        skipped,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}
