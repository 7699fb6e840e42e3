use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spanbound::complexes::{cech, vietoris_rips, Flavor};
use spanbound::geometry::{
    convex_hull_2d, convexity_deficiency, hyperconvexity_deficiency, medial_axis_core, Hull2D,
    DEFAULT_HCDEF_EXACT_LIMIT,
};
use spanbound::harness::{
    dataset_to_csv, farthest_point_subsample, generate, paper_suite, parse_checks, pca_comparison, read_dataset,
    run_suite, verify_bounds, with_thread_cap, Dataset, ExperimentReport, Params, Shape, SuiteEntry, VerifyConfig,
    CHECKS_CSV_HEADER,
};
use spanbound::metric::{circumradius, diameter, Norm, PointCloud};
use spanbound::persistence::compute_persistence;
use spanbound::widths::{
    core_displacement, kolmogorov_width, mst_core, spread, uberspread_upper, SimplicialCore, WidthEstimate, Witness,
    DEFAULT_SPREAD_EXACT_LIMIT,
};

#[derive(Parser)]
#[command(name = "spanbound", version, about = "Persistent homology with width and deficiency bounds on lifespans")]
struct Cli {
    /// Override the norm of the input cloud.
    #[arg(long, global = true)]
    norm: Option<Norm>,
    /// Largest simplex dimension; diagrams cover degrees below it.
    #[arg(long, global = true, default_value_t = 2)]
    max_dim: usize,
    /// Filtration cap (default: circumradius for Čech, diameter for VR).
    #[arg(long, global = true)]
    max_filtration: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FiltrationArg {
    Cech,
    Vr,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset.
    Gen {
        #[arg(long)]
        shape: Shape,
        #[arg(long)]
        n: usize,
        /// Shape parameters, e.g. `a=2,b=1`.
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Persistence diagram of a dataset.
    Pd {
        #[command(flatten)]
        input: Input,
        /// Default: Čech for l2/linf clouds, VR otherwise.
        #[arg(long, value_enum)]
        filtration: Option<FiltrationArg>,
    },
    /// Kolmogorov widths, core displacement, überspread and spread.
    Widths {
        #[command(flatten)]
        input: Input,
        /// Only this flat dimension (default: all below the ambient one).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Largest size for exact spread.
        #[arg(long, default_value_t = DEFAULT_SPREAD_EXACT_LIMIT)]
        exact_limit: usize,
        /// `mst`, `flat`, `medial` (planar hull) or `file:<path>`.
        #[arg(long, default_value = "mst")]
        core: String,
    },
    /// Convexity deficiency of a Euclidean cloud.
    Cdef {
        #[command(flatten)]
        input: Input,
    },
    /// Hyperconvexity deficiency over the tight span.
    Tightspan {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_HCDEF_EXACT_LIMIT)]
        exact_limit: usize,
        /// Farthest-point subsample size.
        #[arg(long)]
        subsample: Option<usize>,
    },
    /// Katz spread.
    Spread {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_SPREAD_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Check the lifespan and extinction inequalities.
    Verify {
        #[arg(long, conflicts_with = "suite")]
        input: Option<PathBuf>,
        /// Run the bundled datasets (`paper`).
        #[arg(long)]
        suite: Option<String>,
        /// Comma-separated theorem ids, e.g. `T1,T4,T9` (default: all that apply).
        #[arg(long)]
        checks: Option<String>,
        /// Core for überspread rows: `mst`, `medial` or `file:<path>`.
        #[arg(long)]
        core: Option<String>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SPREAD_EXACT_LIMIT)]
        spread_exact_limit: usize,
        #[arg(long, default_value_t = DEFAULT_HCDEF_EXACT_LIMIT)]
        hcdef_exact_limit: usize,
        #[arg(long, default_value_t = DEFAULT_HCDEF_EXACT_LIMIT)]
        hcdef_subsample: usize,
        #[arg(long, default_value_t = 0.05)]
        perturbation: f64,
        /// Multiply every death by this factor before checking (self-test).
        #[arg(long, default_value_t = 1.0, hide = true)]
        inject_death_factor: f64,
    },
    /// Least-squares PCA residuals against Kolmogorov widths and lifespans.
    PcaCompare {
        /// One or more cloud files.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match with_thread_cap(|| run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Dataset> {
    let data = read_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match (data, cli.norm) {
        (Dataset::Cloud(c), Some(norm)) => Dataset::Cloud(c.with_norm(norm)),
        (d, _) => d,
    })
}

fn need_cloud(data: &Dataset) -> Result<&PointCloud> {
    data.cloud().context("this command needs a point cloud (a file with a dim=N,norm=... header)")
}

fn emit(cli: &Cli, text: String) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn parse_core(spec: &str, cloud: &PointCloud) -> Result<SimplicialCore> {
    Ok(match spec {
        "mst" => mst_core(cloud)?,
        "medial" => {
            let pts: Vec<[f64; 2]> = spanbound_planar(cloud)?;
            match convex_hull_2d(&pts)? {
                Hull2D::Polygon(p) => medial_axis_core(&p)?,
                _ => bail!("the hull of the cloud is degenerate; no medial axis"),
            }
        }
        other => match other.strip_prefix("file:") {
            Some(path) => SimplicialCore::parse(&fs::read_to_string(path).with_context(|| format!("reading {path}"))?)?,
            None => bail!("unknown core '{other}'; expected mst, flat, medial or file:<path>"),
        },
    })
}

fn spanbound_planar(cloud: &PointCloud) -> Result<Vec<[f64; 2]>> {
    if cloud.dim() != 2 {
        bail!("medial-axis cores need planar points, got dimension {}", cloud.dim());
    }
    Ok(cloud.points().iter().map(|p| [p[0], p[1]]).collect())
}

fn widths_csv(ws: &[WidthEstimate]) -> String {
    let mut out = String::from("kind,k,value,exactness\n");
    for w in ws {
        let kind = serde_json::to_value(w.kind).expect("json");
        out.push_str(&format!("{},{},{},{:?}\n", kind.as_str().unwrap_or_default(), w.k, w.value, w.exactness));
    }
    out
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Gen { shape, n, params } => {
            let data = generate(*shape, &Params::parse(params)?, *n, cli.seed)?;
            let data = match (data, cli.norm) {
                (Dataset::Cloud(c), Some(norm)) => Dataset::Cloud(c.with_norm(norm)),
                (d, _) => d,
            };
            emit(cli, dataset_to_csv(&data))?;
        }
        Command::Pd { input, filtration } => {
            let data = load(cli, &input.input)?;
            let use_cech = match filtration {
                Some(FiltrationArg::Cech) => true,
                Some(FiltrationArg::Vr) => false,
                None => data.cloud().is_some_and(|c| c.norm() != Norm::L1),
            };
            let (flavor, pd) = if use_cech {
                let c = need_cloud(&data)?;
                let cap = cli.max_filtration.map_or_else(|| circumradius(c), Ok)?;
                (Flavor::Cech, compute_persistence(&cech(c, cli.max_dim, cap)?, cli.max_dim.saturating_sub(1))?)
            } else {
                let ms = data.metric()?;
                let cap = cli.max_filtration.unwrap_or_else(|| diameter(&ms));
                (Flavor::VietorisRips, compute_persistence(&vietoris_rips(&ms, cli.max_dim, cap)?, cli.max_dim.saturating_sub(1))?)
            };
            match cli.format {
                Format::Json => {
                    let mut v = pd.to_json();
                    v["filtration"] = json!(flavor);
                    emit(cli, pretty(&v))?
                }
                Format::Csv => emit(cli, pd.to_csv())?,
            }
        }
        Command::Widths {
            input,
            k,
            restarts,
            exact_limit,
            core,
        } => {
            let data = load(cli, &input.input)?;
            let mut ws = Vec::new();
            if let Some(c) = data.cloud() {
                let ks: Vec<usize> = match k {
                    Some(k) => vec![*k],
                    None => (0..c.dim()).collect(),
                };
                for &k in &ks {
                    ws.push(kolmogorov_width(c, k, *restarts)?);
                }
                let core = if core == "flat" {
                    let top = ws.last().context("no flat dimension requested")?;
                    let Some(Witness::Flat(flat)) = &top.witness else { bail!("width has no witness flat") };
                    SimplicialCore::from_flat(flat, c)?
                } else {
                    parse_core(core, c)?
                };
                ws.push(core_displacement(c, &core)?);
                ws.push(uberspread_upper(c, &core)?);
            }
            ws.push(spread(&data.metric()?, *exact_limit));
            match cli.format {
                Format::Json => emit(cli, pretty(&serde_json::to_value(&ws)?))?,
                Format::Csv => emit(cli, widths_csv(&ws))?,
            }
        }
        Command::Cdef { input } => {
            let data = load(cli, &input.input)?;
            let d = convexity_deficiency(need_cloud(&data)?)?;
            match cli.format {
                Format::Json => emit(cli, pretty(&serde_json::to_value(&d)?))?,
                Format::Csv => emit(cli, format!("value,exactness\n{},{:?}\n", d.value, d.exactness))?,
            }
        }
        Command::Tightspan {
            input,
            exact_limit,
            subsample,
        } => {
            let ms = load(cli, &input.input)?.metric()?;
            let idx = farthest_point_subsample(&ms, subsample.unwrap_or(ms.len()));
            let h = hyperconvexity_deficiency(&ms.subspace(&idx), *exact_limit)?;
            match cli.format {
                Format::Json => {
                    let mut v = serde_json::to_value(&h)?;
                    v["points"] = json!(idx);
                    emit(cli, pretty(&v))?
                }
                Format::Csv => emit(cli, format!("value,exactness,points\n{},{:?},{}\n", h.value, h.exactness, idx.len()))?,
            }
        }
        Command::Spread { input, exact_limit } => {
            let s = spread(&load(cli, &input.input)?.metric()?, *exact_limit);
            match cli.format {
                Format::Json => emit(cli, pretty(&serde_json::to_value(&s)?))?,
                Format::Csv => emit(cli, widths_csv(std::slice::from_ref(&s)))?,
            }
        }
        Command::Verify {
            input,
            suite,
            checks,
            core,
            restarts,
            spread_exact_limit,
            hcdef_exact_limit,
            hcdef_subsample,
            perturbation,
            inject_death_factor,
        } => {
            let config = VerifyConfig {
                checks: checks.as_deref().map(parse_checks).transpose()?,
                max_dim: cli.max_dim,
                max_filtration: cli.max_filtration,
                seed: cli.seed,
                kw_restarts: *restarts,
                spread_exact_limit: *spread_exact_limit,
                hcdef_exact_limit: *hcdef_exact_limit,
                hcdef_subsample: *hcdef_subsample,
                core: None,
                perturbation: *perturbation,
                heuristic_band: VerifyConfig::default().heuristic_band,
                death_factor: *inject_death_factor,
            };
            let entries: Vec<SuiteEntry> = match (input, suite.as_deref()) {
                (Some(path), None) => {
                    let data = load(cli, path)?;
                    let core = match (core, data.cloud()) {
                        (Some(spec), Some(c)) => Some(parse_core(spec, c)?),
                        (Some(_), None) => bail!("--core needs a point cloud"),
                        _ => None,
                    };
                    let name = path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
                    vec![SuiteEntry {
                        name,
                        data,
                        config: VerifyConfig { core, ..config },
                    }]
                }
                (None, Some("paper")) => paper_suite(cli.seed)?
                    .into_iter()
                    .map(|mut e| {
                        e.config.death_factor = *inject_death_factor;
                        e.config.checks = config.checks.clone();
                        e
                    })
                    .collect(),
                (None, Some(other)) => bail!("unknown suite '{other}'; the bundled suite is 'paper'"),
                (None, None) => bail!("verify needs --input <file> or --suite paper"),
                (Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            let reports: Vec<ExperimentReport> = if entries.len() == 1 {
                vec![verify_bounds(&entries[0].name, &entries[0].data, &entries[0].config)?]
            } else {
                run_suite(&entries)?
            };
            let text = match cli.format {
                Format::Json if suite.is_none() => pretty(&serde_json::to_value(&reports[0])?),
                Format::Json => pretty(&serde_json::to_value(&reports)?),
                Format::Csv => {
                    let mut s = String::from(CHECKS_CSV_HEADER);
                    for r in &reports {
                        s.push_str(&r.checks_csv());
                    }
                    s
                }
            };
            emit(cli, text)?;
            let violations: usize = reports.iter().map(ExperimentReport::violations).sum();
            if violations > 0 {
                eprintln!("{violations} bound violation(s)");
                return Ok(2);
            }
        }
        Command::PcaCompare { input, k_max, restarts } => {
            let mut clouds = Vec::new();
            for path in input {
                let data = load(cli, path)?;
                let name = path.file_stem().map_or("cloud".into(), |s| s.to_string_lossy().into_owned());
                clouds.push((name, need_cloud(&data)?.clone()));
            }
            let table = pca_comparison(&clouds, *k_max, *restarts)?;
            match cli.format {
                Format::Json => emit(cli, pretty(&serde_json::to_value(&table)?))?,
                Format::Csv => emit(cli, table.to_csv())?,
            }
        }
    }
    Ok(0)
}
