//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;

use surfcover::ccvt::{
    lloyd_run, repair_connectivity, ClusterCount, EnergyParams, Norm, Tessellation,
};
use surfcover::geodesic::{
    adjacent_generator_distances, complete_generator_graph, Backend, SteinerSolver, SurfacePoint,
};
use surfcover::json::{
    metrics_csv_row, GraphFile, PathFile, SegmentationFile, ViewpointsFile, METRICS_CSV_HEADER,
};
use surfcover::mesh::io::{load_mesh, write_face_colored_ply, write_polyline_obj, MeshFormat};
use surfcover::mesh::{Point, Ray, TriangleMesh};
use surfcover::metrics::{compute_report, MetricsParams};
use surfcover::tour::three_opt_tour;
use surfcover::viewpoint::{
    candidate_ray_set, make_viewpoint, optimal_config_tour, plan_valid_configs, summarize,
    CandidateRayParams, ConfigMetric, DefaultValidityOracle, PoseCandidate, WaypointStatus,
};

use crate::config::{count_from_toml, init_threads, parse_count, FileConfig};
use crate::{check, CliError, CommonArgs};

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn load_input_mesh(
    flag: Option<&Path>,
    format_flag: Option<&str>,
    config: &FileConfig,
) -> Result<TriangleMesh, CliError> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| config.input.mesh.clone())
        .ok_or_else(|| CliError::Usage("no mesh given (use --mesh or [input] mesh)".into()))?;
    let format = match format_flag.or(config.input.format.as_deref()) {
        Some("obj") => MeshFormat::Obj,
        Some("stl") => MeshFormat::Stl,
        Some("ply") => MeshFormat::Ply,
        Some(other) => {
            return Err(CliError::Usage(format!("unknown format {other:?} (obj|stl|ply)")))
        }
        None => MeshFormat::from_path(&path).ok_or_else(|| {
            CliError::Usage(format!("cannot infer format of {}; pass --format", path.display()))
        })?,
    };
    let mesh = load_mesh(&path, format).map_err(CliError::input)?;
    eprintln!(
        "loaded {}: {} faces, {} vertices{}",
        path.display(),
        mesh.face_count(),
        mesh.vertex_count(),
        if mesh.is_closed() { "" } else { " (open or non-manifold)" }
    );
    Ok(mesh)
}

fn out_dir(common: &CommonArgs, config: &FileConfig) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_tessellation(path: &Path, mesh: &TriangleMesh) -> Result<Tessellation, CliError> {
    let file: SegmentationFile = read_json(path)?;
    file.into_tessellation(mesh).map_err(CliError::input)
}

fn fail_on_violations(kind: &str, violations: Vec<String>) -> Result<(), CliError> {
    if violations.is_empty() {
        eprintln!("check: {kind} invariants ok");
        Ok(())
    } else {
        Err(CliError::Invariant(format!("{kind}: {}", violations.join("; "))))
    }
}

/// Evenly spread cluster colors (golden-angle hue walk).
fn cluster_colors(m: usize) -> Vec<[u8; 3]> {
    (0..m)
        .map(|i| {
            let h = (i as f64 * 0.618_033_988_749_895) % 1.0;
            hsv_to_rgb(h, 0.65, 0.95)
        })
        .collect()
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let p = v * (1.0 - s);
    let q = v * (1.0 - f * s);
    let t = v * (1.0 - (1.0 - f) * s);
    let (r, g, b) = match (i as i64).rem_euclid(6) {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

fn export_segmentation_ply(
    dir: &Path,
    mesh: &TriangleMesh,
    tess: &Tessellation,
) -> Result<PathBuf, CliError> {
    let colors = cluster_colors(tess.cluster_count());
    let face_colors: Vec<[u8; 3]> = tess
        .face_to_cluster
        .iter()
        .map(|&c| colors[c as usize])
        .collect();
    let path = dir.join("seg_colored.ply");
    write_face_colored_ply(&path, mesh, &face_colors).map_err(CliError::input)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input mesh file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Mesh format override (obj|stl|ply).
    #[arg(long)]
    format: Option<String>,
    /// Cluster count, or "auto" to derive it from the nozzle radius.
    #[arg(long)]
    clusters: Option<String>,
    /// Nozzle radius r_c in meters (sets the expected area per cluster).
    #[arg(long)]
    rc: Option<f64>,
    /// RNG seed for generator initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Distance norm of the energy (l1|l2).
    #[arg(long)]
    norm: Option<String>,
    /// Enable/disable the normal-deviation cost (on|off).
    #[arg(long)]
    normal_cost: Option<String>,
    /// Distance normalizer; defaults to one sixth of the bbox diagonal.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Distance/normal trade-off in [0, 1].
    #[arg(long)]
    alpha2: Option<f64>,
    /// Normal-cost threshold in (-1, 1).
    #[arg(long)]
    alpha3: Option<f64>,
    /// Normal-cost penalty weight (> 1).
    #[arg(long)]
    alpha4: Option<f64>,
    /// Lloyd iteration cap.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Relative energy-change convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Skip the connectivity repair pass.
    #[arg(long)]
    no_repair: bool,
}

pub fn segment(args: SegmentArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    init_threads(args.common.threads, config.run.threads)?;
    let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
    let dir = out_dir(&args.common, &config)?;

    let clusters_flag = match args.clusters.as_deref() {
        Some(v) => Some(parse_count(v).map_err(CliError::Usage)?),
        None => None,
    };
    let clusters_cfg = match &config.segment.clusters {
        Some(v) => Some(count_from_toml(v)?),
        None => None,
    };
    let rc = args.rc.or(config.segment.rc);
    let m = match clusters_flag.or(clusters_cfg) {
        Some(Some(n)) => ClusterCount::Fixed(n),
        Some(None) => ClusterCount::Auto {
            nozzle_radius: rc.ok_or_else(|| {
                CliError::Usage("--clusters auto needs --rc (nozzle radius)".into())
            })?,
        },
        None => match rc {
            Some(r) => ClusterCount::Auto { nozzle_radius: r },
            None => return Err(CliError::Usage("pass --clusters N|auto (auto needs --rc)".into())),
        },
    };

    let mut params = EnergyParams::recipe(mesh.bbox_diagonal(), m);
    if let Some(a) = args.alpha1.or(config.segment.alpha1) {
        params.alpha1 = a;
    }
    if let Some(a) = args.alpha2.or(config.segment.alpha2) {
        params.alpha2 = a;
    }
    if let Some(a) = args.alpha3.or(config.segment.alpha3) {
        params.alpha3 = a;
    }
    if let Some(a) = args.alpha4.or(config.segment.alpha4) {
        params.alpha4 = a;
    }
    match args.norm.as_deref().or(config.segment.norm.as_deref()) {
        Some("l1") | None => params.norm = Norm::L1,
        Some("l2") => params.norm = Norm::L2,
        Some(other) => return Err(CliError::Usage(format!("unknown norm {other:?} (l1|l2)"))),
    }
    match args.normal_cost.as_deref() {
        Some("on") => params.normal_cost_enabled = true,
        Some("off") => params.normal_cost_enabled = false,
        Some(other) => {
            return Err(CliError::Usage(format!("--normal-cost takes on|off, got {other:?}")))
        }
        None => {
            if let Some(v) = config.segment.normal_cost {
                params.normal_cost_enabled = v;
            }
        }
    }
    params.validate().map_err(CliError::input)?;

    let seed = args.seed.or(config.run.seed).unwrap_or(0);
    let max_iterations = args.max_iterations.or(config.segment.max_iterations).unwrap_or(50);
    let tolerance = args.tolerance.or(config.segment.tolerance).unwrap_or(1e-4);
    let repair = !args.no_repair && config.segment.repair.unwrap_or(true);

    let start = Instant::now();
    let mut tess =
        lloyd_run(&mesh, &params, seed, max_iterations, tolerance).map_err(CliError::input)?;
    if repair {
        tess = repair_connectivity(&mesh, &tess);
    }
    eprintln!(
        "segmented {} faces into {} clusters in {} iterations ({:.2}s, energy {:.6})",
        mesh.face_count(),
        tess.cluster_count(),
        tess.iterations,
        start.elapsed().as_secs_f64(),
        tess.energy
    );

    write_json(&dir.join("seg.json"), &SegmentationFile::from_tessellation(&tess))?;
    export_segmentation_ply(&dir, &mesh, &tess)?;
    let mut trace_csv = String::from("iteration,energy\n");
    for (i, e) in tess.energy_trace.iter().enumerate() {
        trace_csv.push_str(&format!("{},{}\n", i + 1, e));
    }
    std::fs::write(dir.join("energy_trace.csv"), trace_csv).map_err(CliError::input)?;
    eprintln!("wrote {}", dir.join("energy_trace.csv").display());

    if args.common.check {
        fail_on_violations("segmentation", check::segmentation(&mesh, &tess, repair))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// path
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Segmentation artifact from `segment`.
    #[arg(long)]
    seg: PathBuf,
    /// Steiner points per mesh edge.
    #[arg(long)]
    steiner_k: Option<usize>,
    /// Polyline straightening passes (0 = raw graph distances).
    #[arg(long)]
    straighten_passes: Option<usize>,
    /// Seed rotating the tour's nearest-neighbor start.
    #[arg(long)]
    seed: Option<u64>,
    /// Also export the coverage path as OBJ line segments.
    #[arg(long)]
    obj: bool,
}

fn backend_from(
    steiner_k: Option<usize>,
    straighten: Option<usize>,
    config: &FileConfig,
) -> Backend {
    let mut backend = Backend::default();
    if let Some(k) = steiner_k.or(config.geodesic.steiner_k) {
        backend.steiner_per_edge = k;
    }
    if let Some(p) = straighten.or(config.geodesic.straighten_passes) {
        backend.straighten_passes = p;
    }
    backend
}

pub fn path(args: PathArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    init_threads(args.common.threads, config.run.threads)?;
    let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
    let dir = out_dir(&args.common, &config)?;
    let tess = load_tessellation(&args.seg, &mesh)?;
    let backend = backend_from(args.steiner_k, args.straighten_passes, &config);
    let seed = args.seed.or(config.run.seed).unwrap_or(0);

    let start = Instant::now();
    let partial = adjacent_generator_distances(&mesh, &tess, backend);
    let graph = complete_generator_graph(&partial).map_err(CliError::input)?;
    eprintln!(
        "generator graph: {} nodes, {} edges, avg {:.2} neighbors ({:.2}s)",
        graph.nodes.len(),
        graph.edges.len(),
        graph.avg_neighbors,
        start.elapsed().as_secs_f64()
    );
    let path = three_opt_tour(&graph, seed).map_err(CliError::input)?;
    let file = PathFile::from_path(&path, &graph);
    eprintln!("coverage tour: cost {:.4} (open variant {:.4})", file.total_cost, file.open_cost);

    write_json(&dir.join("graph.json"), &GraphFile::from_graph(&graph))?;
    write_json(&dir.join("path.json"), &file)?;
    if args.obj {
        let obj = dir.join("path.obj");
        write_polyline_obj(&obj, &path.polyline).map_err(CliError::input)?;
        eprintln!("wrote {}", obj.display());
    }

    if args.common.check {
        let mut violations = check::graph(&graph);
        violations.extend(check::coverage_path(&path, &graph));
        fail_on_violations("path", violations)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// viewpoints
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ViewpointsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seg: PathBuf,
    /// Coverage path artifact from `path`.
    #[arg(long)]
    path: PathBuf,
    /// Standoff distance r_s (m).
    #[arg(long)]
    rs: Option<f64>,
    /// Nozzle radius r_c (m).
    #[arg(long)]
    rc: Option<f64>,
    /// Candidate cap elevation bound (rad).
    #[arg(long)]
    phi: Option<f64>,
    /// Candidate count, or "auto".
    #[arg(long)]
    nc: Option<String>,
    /// Maximum tool elevation angle from vertical (rad).
    #[arg(long)]
    theta_r: Option<f64>,
    /// Roll discretization steps per accepted ray.
    #[arg(long)]
    roll_steps: Option<usize>,
    /// Additional environment meshes for the validity oracle.
    #[arg(long)]
    env: Vec<PathBuf>,
}

pub fn viewpoints(args: ViewpointsArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    init_threads(args.common.threads, config.run.threads)?;
    let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
    let dir = out_dir(&args.common, &config)?;
    let tess = load_tessellation(&args.seg, &mesh)?;
    let path_file: PathFile = read_json(&args.path)?;

    let mut env_paths = args.env.clone();
    if env_paths.is_empty() {
        if let Some(cfg_env) = &config.input.env {
            env_paths = cfg_env.clone();
        }
    }
    let mut env = Vec::new();
    for p in &env_paths {
        let format = MeshFormat::from_path(p).ok_or_else(|| {
            CliError::Usage(format!("cannot infer format of environment mesh {}", p.display()))
        })?;
        env.push(load_mesh(p, format).map_err(CliError::input)?);
    }

    let mut params = CandidateRayParams::recipe();
    if let Some(v) = args.rs.or(config.viewpoint.rs) {
        params.r_s = v;
    }
    if let Some(v) = args.rc.or(config.viewpoint.rc) {
        params.r_c = v;
    }
    if let Some(v) = args.phi.or(config.viewpoint.phi) {
        params.phi = v;
    }
    let nc_flag = match args.nc.as_deref() {
        Some(v) => Some(parse_count(v).map_err(CliError::Usage)?),
        None => None,
    };
    let nc_cfg = match &config.viewpoint.nc {
        Some(v) => Some(count_from_toml(v)?),
        None => None,
    };
    if let Some(v) = nc_flag.or(nc_cfg) {
        params.n_c = v;
    }
    let theta_r = args
        .theta_r
        .or(config.viewpoint.theta_r)
        .unwrap_or(std::f64::consts::FRAC_PI_3);
    let roll_steps = args.roll_steps.or(config.viewpoint.roll_steps).unwrap_or(8);

    let set = candidate_ray_set(&params).map_err(CliError::input)?;
    eprintln!(
        "candidate set: {} rays on a {:.3}-rad cap (separation {:.4} m)",
        set.centers.len(),
        params.phi,
        params.separation()
    );

    // Waypoints in coverage-tour order.
    let order = &path_file.order;
    if order.iter().any(|&c| c as usize >= tess.cluster_count()) {
        return Err(CliError::Input("path.json order references unknown clusters".into()));
    }
    let rays: Vec<(Ray, u32)> = order
        .iter()
        .map(|&c| {
            let cluster = &tess.clusters[c as usize];
            (
                make_viewpoint(cluster.generator, cluster.proxy_normal, params.r_s),
                cluster.generator_face,
            )
        })
        .collect();

    let oracle = DefaultValidityOracle::new(&mesh, &env, params.r_s);
    let outcomes = plan_valid_configs(&rays, &set, &mesh, &oracle, theta_r, roll_steps);
    let summary = summarize(&outcomes);
    eprintln!(
        "waypoints: {} accepted, {} corrected, {} unrecoverable",
        summary.accepted, summary.corrected, summary.unrecoverable
    );

    let layers: Vec<Vec<PoseCandidate>> = outcomes
        .iter()
        .filter(|o| o.status != WaypointStatus::Unrecoverable)
        .map(|o| o.candidates.clone())
        .collect();
    let metric = ConfigMetric::default();
    let (selection, tour_cost) =
        optimal_config_tour(&layers, &|a, b| metric.eval(a, b)).map_err(CliError::input)?;
    eprintln!("configuration tour cost {tour_cost:.4}");

    let originals: Vec<Ray> = rays.iter().map(|(r, _)| *r).collect();
    let file =
        ViewpointsFile::assemble(&set, theta_r, roll_steps, &originals, &outcomes, &selection, tour_cost);
    write_json(&dir.join("viewpoints.json"), &file)?;

    if args.common.check {
        let faces: Vec<u32> = rays.iter().map(|(_, f)| *f).collect();
        fail_on_violations(
            "viewpoints",
            check::viewpoints(&mesh, &set, &outcomes, &faces, theta_r, &selection),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seg: PathBuf,
    /// Nozzle radius r_c (sets sigma_e and the default threshold).
    #[arg(long)]
    rc: Option<f64>,
    /// Geodesic coverage threshold (defaults to r_c).
    #[arg(long)]
    threshold: Option<f64>,
    /// Unreachable-face normal bound (rad, default π/3).
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long)]
    steiner_k: Option<usize>,
}

pub fn metrics(args: MetricsArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    init_threads(args.common.threads, config.run.threads)?;
    let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
    let dir = out_dir(&args.common, &config)?;
    let tess = load_tessellation(&args.seg, &mesh)?;

    let seg_rc = match tess.params.m {
        ClusterCount::Auto { nozzle_radius } => Some(nozzle_radius),
        ClusterCount::Fixed(_) => None,
    };
    let rc = args
        .rc
        .or(config.segment.rc)
        .or(seg_rc)
        .ok_or_else(|| CliError::Usage("pass --rc (nozzle radius) for the metrics".into()))?;
    let mut params = MetricsParams::for_nozzle(rc);
    if let Some(t) = args.threshold.or(config.metrics.threshold) {
        params.coverage_threshold = t;
    }
    if let Some(t) = args.theta0.or(config.metrics.theta0) {
        params.theta0 = t;
    }
    let backend = backend_from(args.steiner_k, None, &config);

    let start = Instant::now();
    let report = compute_report(&mesh, &tess, backend, params);
    let runtime = start.elapsed().as_secs_f64();
    eprintln!(
        "coverage {:.1}% | overlap {:.1}% | RSD {:.1}% | unreachable {:.1}% | area SD {:.3e} ({:.2}s)",
        report.coverage_pct,
        report.overlap_pct,
        report.rsd_pct,
        report.unreach_pct,
        report.area_sd,
        runtime
    );

    write_json(&dir.join("metrics.json"), &report)?;
    let csv = format!(
        "{}\n{}\n",
        METRICS_CSV_HEADER,
        metrics_csv_row(&report, tess.seed, tess.cluster_count(), runtime)
    );
    std::fs::write(dir.join("metrics.csv"), csv).map_err(CliError::input)?;
    eprintln!("wrote {}", dir.join("metrics.csv").display());

    if args.common.check {
        fail_on_violations("metrics", check::metrics(&report))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Reuse an existing segmentation instead of running one.
    #[arg(long)]
    seg: Option<PathBuf>,
    /// Cluster count when segmenting here (default 50).
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steiner_k: Option<usize>,
    /// Refuse the full-mesh oracle above this face count.
    #[arg(long)]
    face_cap: Option<usize>,
    /// Run the oracle even above the face cap.
    #[arg(long)]
    force: bool,
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    init_threads(args.common.threads, config.run.threads)?;
    let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
    let dir = out_dir(&args.common, &config)?;

    let cap = args.face_cap.or(config.bench.face_cap).unwrap_or(50_000);
    if mesh.face_count() > cap && !args.force {
        return Err(CliError::Input(format!(
            "mesh has {} faces, above the full-mesh oracle cap of {cap}; pass --force to run anyway",
            mesh.face_count()
        )));
    }

    let seed = args.seed.or(config.run.seed).unwrap_or(0);
    let tess = match &args.seg {
        Some(p) => load_tessellation(p, &mesh)?,
        None => {
            let m = ClusterCount::Fixed(args.clusters.unwrap_or(50));
            let params = EnergyParams::recipe(mesh.bbox_diagonal(), m);
            lloyd_run(&mesh, &params, seed, 50, 1e-4).map_err(CliError::input)?
        }
    };
    let backend = backend_from(args.steiner_k, None, &config);
    let m = tess.cluster_count();
    let pairs = m * (m - 1) / 2;

    // Decomposition: adjacent pairs on submeshes + graph completion.
    let t0 = Instant::now();
    let partial = adjacent_generator_distances(&mesh, &tess, backend);
    let graph = complete_generator_graph(&partial).map_err(CliError::input)?;
    let decomposition = t0.elapsed().as_secs_f64();

    // Oracle: every pair directly on the full mesh (one shared graph build,
    // queries parallelized the same way the decomposition is).
    use rayon::prelude::*;
    let t1 = Instant::now();
    let solver = SteinerSolver::new(&mesh, None, backend);
    let pair_list: Vec<(u32, u32)> =
        (0..m as u32).flat_map(|i| (i + 1..m as u32).map(move |j| (i, j))).collect();
    let costs: Result<Vec<f64>, CliError> = pair_list
        .par_iter()
        .map(|&(i, j)| {
            let src = SurfacePoint {
                face: tess.clusters[i as usize].generator_face,
                point: tess.clusters[i as usize].generator,
            };
            let tgt = SurfacePoint {
                face: tess.clusters[j as usize].generator_face,
                point: tess.clusters[j as usize].generator,
            };
            solver.query(src, tgt).map(|(cost, _)| cost).map_err(CliError::input)
        })
        .collect();
    let oracle_total: f64 = costs?.iter().sum();
    let full = t1.elapsed().as_secs_f64();
    let decomposition_total: f64 = graph.edges.values().map(|e| e.cost).sum();

    eprintln!(
        "decomposition {decomposition:.3}s vs full-mesh oracle {full:.3}s (speedup {:.1}x), \
         total pair cost {decomposition_total:.3} vs {oracle_total:.3}",
        full / decomposition
    );
    let csv = format!(
        "method,faces,clusters,pairs,wallSeconds,totalPairCost\n\
         decomposition,{faces},{m},{pairs},{decomposition},{decomposition_total}\n\
         fullMeshOracle,{faces},{m},{pairs},{full},{oracle_total}\n",
        faces = mesh.face_count(),
    );
    std::fs::write(dir.join("bench.csv"), csv).map_err(CliError::input)?;
    eprintln!("wrote {}", dir.join("bench.csv").display());
    Ok(())
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Segmentation to export as a face-colored PLY.
    #[arg(long)]
    seg: Option<PathBuf>,
    /// Coverage path to export as OBJ line segments.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Viewpoint plan to export as OBJ ray segments.
    #[arg(long)]
    viewpoints: Option<PathBuf>,
}

pub fn export(args: ExportArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.common.config.as_deref())?;
    let dir = out_dir(&args.common, &config)?;
    if args.seg.is_none() && args.path.is_none() && args.viewpoints.is_none() {
        return Err(CliError::Usage("nothing to export: pass --seg, --path, or --viewpoints".into()));
    }

    if let Some(seg) = &args.seg {
        let mesh = load_input_mesh(args.mesh.as_deref(), args.format.as_deref(), &config)?;
        let tess = load_tessellation(seg, &mesh)?;
        export_segmentation_ply(&dir, &mesh, &tess)?;
    }
    if let Some(path) = &args.path {
        let file: PathFile = read_json(path)?;
        let polyline: Vec<Point> =
            file.polyline.iter().map(|t| Point::new(t[0], t[1], t[2])).collect();
        let out = dir.join("path.obj");
        write_polyline_obj(&out, &polyline).map_err(CliError::input)?;
        eprintln!("wrote {}", out.display());
    }
    if let Some(vp) = &args.viewpoints {
        let file: ViewpointsFile = read_json(vp)?;
        let mut obj = String::new();
        let mut count = 0;
        for record in file.rays_final.iter().flatten() {
            let ray = record.into_ray();
            let tip = ray.origin + file.params.r_s * ray.direction;
            obj.push_str(&format!("v {} {} {}\n", ray.origin.x, ray.origin.y, ray.origin.z));
            obj.push_str(&format!("v {} {} {}\n", tip.x, tip.y, tip.z));
            obj.push_str(&format!("l {} {}\n", 2 * count + 1, 2 * count + 2));
            count += 1;
        }
        let out = dir.join("viewpoints.obj");
        std::fs::write(&out, obj).map_err(CliError::input)?;
        eprintln!("wrote {} ({count} rays)", out.display());
    }
    Ok(())
}
