//! Command-line driver: scene generation, heatmap synthesis, 3D centers,
//! the full pose solve, evaluation, debug rendering, and a cost-function
//! throughput benchmark.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 validation, 4 algorithmic.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use curvpose::centers::Center3D;
use curvpose::costfn::{batch_cost, CostConfig, SceneCostEvaluator};
use curvpose::error::Error;
use curvpose::geometry::{Mat3, Pose, Vec3};
use curvpose::heatmaps::Heatmap;
use curvpose::imgio;
use curvpose::optimizer::{uniform_rotation, OptimizerConfig, SceneEstimate, TraceRow};
use curvpose::pipeline::{
    self, distance_maps, evaluate, oracle_heatmaps, solve_scene, EvalReport, HeatmapSet,
};
use curvpose::scene::{generate_scene, load_scene, save_scene, GenSpec, Scene};
use curvpose::{HeatmapConfig, Mesh, TriangulationConfig};

#[derive(Parser)]
#[command(name = "curvpose", version, about = "Multi-view 6D pose estimation from heatmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene plus oracle heatmaps.
    Gen(GenArgs),
    /// Recover 3D object centers from the center heatmaps of a dataset.
    Centers(CentersArgs),
    /// Full solve: heatmaps -> centers -> 6D poses.
    Solve(SolveArgs),
    /// Score estimates against ground truth.
    Eval(EvalArgs),
    /// Render depth/normal/curvature PNGs of a scene for inspection.
    Render(RenderArgs),
    /// Cost-function throughput on a reference scene.
    BenchCost(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Scene recipe JSON; defaults to the built-in 3-cuboid reference.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian corruption std-dev applied to all heatmaps.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Output directory (scene.json, meshes/, heatmaps/).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct TriArgs {
    /// Max ray-pair gap for a triangulated midpoint (meters).
    #[arg(long, default_value_t = 0.03)]
    d_t: f64,
    /// Candidate merge radius (meters).
    #[arg(long, default_value_t = 0.03)]
    d_c: f64,
    /// Overlap pruning radius (meters).
    #[arg(long, default_value_t = 0.03)]
    d_o: f64,
    /// Keep only the top-scoring N centers.
    #[arg(long)]
    expected_count: Option<usize>,
}

impl TriArgs {
    fn to_config(&self) -> TriangulationConfig {
        TriangulationConfig {
            d_t: self.d_t,
            d_c: self.d_c,
            d_o: self.d_o,
            expected_count: self.expected_count,
        }
    }
}

#[derive(Args)]
struct CentersArgs {
    /// Dataset directory produced by `gen`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output centers JSON.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tri: TriArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// Dataset directory produced by `gen`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output estimates JSON.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tri: TriArgs,
    /// Random pose candidates per object.
    #[arg(long, default_value_t = 2000)]
    candidates: usize,
    /// Candidates passed on to simplex refinement.
    #[arg(long, default_value_t = 4)]
    refine: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a per-iteration best-cost CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimates JSON from `solve`.
    #[arg(long)]
    estimates: PathBuf,
    /// Ground-truth scene.json.
    #[arg(long)]
    scene: PathBuf,
    /// Report JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-record CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 5.0)]
    theta_mspd_px: f64,
    #[arg(long, default_value_t = 0.05)]
    theta_mssd_frac: f64,
}

#[derive(Args)]
struct RenderArgs {
    /// scene.json to render.
    #[arg(long)]
    scene: PathBuf,
    /// Output directory for PNGs.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Cost evaluations per thread configuration.
    #[arg(long, default_value_t = 200)]
    evals: usize,
    /// Thread counts to benchmark.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 4])]
    threads: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Centers(a) => cmd_centers(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Render(a) => cmd_render(&a),
        Command::BenchCost(a) => cmd_bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        Error::MalformedFile { .. }
        | Error::Validation { .. }
        | Error::UnknownVersion { .. }
        | Error::InvalidDimensions { .. }
        | Error::ShapeMismatch { .. }
        | Error::InsufficientViews { .. } => 3,
        Error::BehindCamera { .. }
        | Error::Parallel { .. }
        | Error::NonFiniteObjective { .. }
        | Error::EmptyScene
        | Error::EmptyMesh
        | Error::PlacementFailed { .. } => 4,
    }
}

type Result<T> = std::result::Result<T, Error>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&raw).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        what: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialization");
    text.push('\n');
    write_text(path, &text)
}

// ---- gen ----

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec: GenSpec = match &args.spec {
        Some(path) => read_json(path)?,
        None => GenSpec::default(),
    };
    let scene = generate_scene(&spec, args.seed)?;
    let hm_config = HeatmapConfig {
        noise_sigma: args.noise_sigma,
        ..HeatmapConfig::default()
    };
    let heatmaps = oracle_heatmaps(&scene, &hm_config, args.seed)?;
    save_scene(&scene, &args.out)?;
    save_heatmaps(&heatmaps, &args.out)?;
    println!(
        "wrote scene with {} objects, {} views to {}",
        scene.instances.len(),
        scene.cameras.len(),
        args.out.display()
    );
    Ok(())
}

fn heatmap_path(dir: &Path, kind: &str, view: usize, ext: &str) -> PathBuf {
    dir.join("heatmaps").join(format!("{kind}_v{view}.{ext}"))
}

fn save_heatmaps(heatmaps: &HeatmapSet<f64>, dir: &Path) -> Result<()> {
    let hm_dir = dir.join("heatmaps");
    std::fs::create_dir_all(&hm_dir).map_err(|e| Error::io(hm_dir.display().to_string(), e))?;
    for (kind, maps) in [("center", &heatmaps.centers), ("curvature", &heatmaps.curvature)] {
        for h in maps {
            imgio::save_raw(&h.grid, &heatmap_path(dir, kind, h.view_index, "f32"))?;
            imgio::save_png(&h.grid, h.view_index, &heatmap_path(dir, kind, h.view_index, "png"))?;
        }
    }
    Ok(())
}

fn load_heatmaps(dir: &Path, n_views: usize) -> Result<HeatmapSet<f64>> {
    let mut set = HeatmapSet {
        centers: Vec::with_capacity(n_views),
        curvature: Vec::with_capacity(n_views),
    };
    for v in 0..n_views {
        set.centers.push(Heatmap {
            grid: imgio::load_raw(&heatmap_path(dir, "center", v, "f32"))?,
            view_index: v,
        });
        set.curvature.push(Heatmap {
            grid: imgio::load_raw(&heatmap_path(dir, "curvature", v, "f32"))?,
            view_index: v,
        });
    }
    Ok(set)
}

// ---- centers ----

#[derive(Serialize, Deserialize)]
struct CenterDoc {
    position_m: [f64; 3],
    per_view_scores: Vec<f64>,
    aggregate_score: f64,
}

#[derive(Serialize, Deserialize)]
struct CentersDoc {
    version: u32,
    centers: Vec<CenterDoc>,
}

fn centers_to_doc(centers: &[Center3D<f64>]) -> CentersDoc {
    CentersDoc {
        version: 1,
        centers: centers
            .iter()
            .map(|c| CenterDoc {
                position_m: [c.position.x, c.position.y, c.position.z],
                per_view_scores: c.per_view_scores.clone(),
                aggregate_score: c.aggregate_score,
            })
            .collect(),
    }
}

fn cmd_centers(args: &CentersArgs) -> Result<()> {
    let scene = load_scene(&args.input.join("scene.json"))?;
    let heatmaps = load_heatmaps(&args.input, scene.cameras.len())?;
    let centers = curvpose::centers::centers_from_heatmaps(
        &heatmaps.centers,
        &scene.cameras,
        &HeatmapConfig::default(),
        &args.tri.to_config(),
    )?;
    write_json(&args.out, &centers_to_doc(&centers))?;
    println!("wrote {} centers to {}", centers.len(), args.out.display());
    Ok(())
}

// ---- solve ----

#[derive(Serialize, Deserialize)]
struct EstimateDoc {
    object_id: u32,
    rotation: [f64; 9],
    translation_m: [f64; 3],
    cost: f64,
    per_view_scores: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EstimatesDoc {
    version: u32,
    objects: Vec<EstimateDoc>,
}

fn estimate_to_doc(e: &SceneEstimate<f64>) -> EstimatesDoc {
    EstimatesDoc {
        version: 1,
        objects: e
            .objects
            .iter()
            .map(|o| {
                let m = &o.pose.rotation.m;
                EstimateDoc {
                    object_id: o.class_id,
                    rotation: [
                        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1],
                        m[2][2],
                    ],
                    translation_m: [
                        o.pose.translation.x,
                        o.pose.translation.y,
                        o.pose.translation.z,
                    ],
                    cost: o.cost,
                    per_view_scores: o.per_view_scores.clone(),
                }
            })
            .collect(),
    }
}

fn doc_to_estimates(doc: &EstimatesDoc, path: &Path) -> Result<Vec<(u32, Pose<f64>)>> {
    if doc.version != 1 {
        return Err(Error::UnknownVersion {
            found: doc.version,
            supported: 1,
        });
    }
    let _ = path;
    Ok(doc
        .objects
        .iter()
        .map(|o| {
            let r = &o.rotation;
            (
                o.object_id,
                Pose::new(
                    Mat3::from_rows([r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]),
                    Vec3::new(o.translation_m[0], o.translation_m[1], o.translation_m[2]),
                ),
            )
        })
        .collect())
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let scene = load_scene(&args.input.join("scene.json"))?;
    let heatmaps = load_heatmaps(&args.input, scene.cameras.len())?;
    let classes: Vec<(u32, &Mesh)> = scene.classes.iter().map(|c| (c.id, &c.mesh)).collect();
    let opt_config = OptimizerConfig {
        n_candidates: args.candidates,
        n_refine: args.refine,
        rng_seed: args.seed,
        ..OptimizerConfig::default()
    };
    let mut trace_rows: Vec<TraceRow> = Vec::new();
    let (_, estimate) = solve_scene(
        &classes,
        &scene.cameras,
        &heatmaps,
        &HeatmapConfig::default(),
        &args.tri.to_config(),
        &opt_config,
        pipeline::DEFAULT_T_B,
        args.trace.is_some().then_some(&mut trace_rows),
    )?;
    write_json(&args.out, &estimate_to_doc(&estimate))?;
    if let Some(trace_path) = &args.trace {
        let mut csv = String::from("object_ordinal,phase,iteration,best_cost\n");
        for r in &trace_rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.object_ordinal, r.phase, r.iteration, r.best_cost
            ));
        }
        write_text(trace_path, &csv)?;
    }
    println!(
        "wrote {} pose estimates to {}",
        estimate.objects.len(),
        args.out.display()
    );
    Ok(())
}

// ---- eval ----

#[derive(Serialize)]
struct EvalRecordDoc {
    ground_truth: usize,
    estimate: Option<usize>,
    view_index: usize,
    class_id: u32,
    mssd_m: f64,
    mspd_px: f64,
    diameter_m: f64,
}

#[derive(Serialize)]
struct EvalDoc {
    version: u32,
    theta_mspd_px: f64,
    theta_mssd_frac: f64,
    ar_mssd: f64,
    ar_mspd: f64,
    ar_mssd_bop: f64,
    ar_mspd_bop: f64,
    records: Vec<EvalRecordDoc>,
}

fn report_to_doc(report: &EvalReport) -> EvalDoc {
    EvalDoc {
        version: 1,
        theta_mspd_px: report.theta_mspd_px,
        theta_mssd_frac: report.theta_mssd_frac,
        ar_mssd: report.ar_mssd,
        ar_mspd: report.ar_mspd,
        ar_mssd_bop: report.ar_mssd_bop,
        ar_mspd_bop: report.ar_mspd_bop,
        records: report
            .records
            .iter()
            .map(|r| EvalRecordDoc {
                ground_truth: r.ground_truth,
                estimate: r.estimate,
                view_index: r.view_index,
                class_id: r.class_id,
                mssd_m: r.error.mssd,
                mspd_px: r.error.mspd,
                diameter_m: r.error.diameter,
            })
            .collect(),
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let doc: EstimatesDoc = read_json(&args.estimates)?;
    let estimates = doc_to_estimates(&doc, &args.estimates)?;
    let report = evaluate(&estimates, &scene, args.theta_mspd_px, args.theta_mssd_frac)?;
    write_json(&args.out, &report_to_doc(&report))?;
    if let Some(csv_path) = &args.csv {
        let mut csv =
            String::from("ground_truth,estimate,view_index,class_id,mssd_m,mspd_px,diameter_m\n");
        for r in &report.records {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.ground_truth,
                r.estimate.map_or(String::new(), |e| e.to_string()),
                r.view_index,
                r.class_id,
                r.error.mssd,
                r.error.mspd,
                r.error.diameter
            ));
        }
        write_text(csv_path, &csv)?;
    }
    println!(
        "AR_MSSD<{:.0}%: {:.4}  AR_MSPD<{}px: {:.4}  (BOP sweeps: {:.4} / {:.4})",
        report.theta_mssd_frac * 100.0,
        report.ar_mssd,
        report.theta_mspd_px,
        report.ar_mspd,
        report.ar_mssd_bop,
        report.ar_mspd_bop
    );
    Ok(())
}

// ---- render ----

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::io(args.out.display().to_string(), e))?;
    let (meshes, poses) = scene.instance_meshes()?;
    for (v, cam) in scene.cameras.iter().enumerate() {
        let maps = curvpose::renderer::rasterize(&meshes, &poses, cam);
        let curvature = curvpose::renderer::curvature_from_normals(&maps);
        // Depth: uncovered pixels as 0 for display.
        let mut depth = curvpose::Grid::zeros(cam.height, cam.width);
        for i in 0..depth.data.len() {
            if maps.depth[i].is_finite() {
                depth.data[i] = maps.depth[i];
            }
        }
        imgio::save_png(&depth, v, &args.out.join(format!("depth_v{v}.png")))?;
        imgio::save_png(&curvature, v, &args.out.join(format!("curvature_v{v}.png")))?;
        // Normals: each component mapped from [-1, 1] to [0, 1].
        for (k, name) in ["nx", "ny", "nz"].iter().enumerate() {
            let mut g = curvpose::Grid::zeros(cam.height, cam.width);
            for i in 0..g.data.len() {
                g.data[i] = (maps.normals[i][k] + 1.0) / 2.0;
            }
            imgio::save_png(&g, v, &args.out.join(format!("{name}_v{v}.png")))?;
        }
    }
    println!("rendered {} views to {}", scene.cameras.len(), args.out.display());
    Ok(())
}

// ---- bench-cost ----

/// Reference scene for benchmarking: 3 objects, six 256×320 views.
fn reference_scene() -> Result<Scene<f64>> {
    generate_scene(&GenSpec::default(), 43)
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let scene = reference_scene()?;
    let heatmaps = oracle_heatmaps(&scene, &HeatmapConfig::default(), 0)?;
    let dmaps = distance_maps(&heatmaps.curvature, pipeline::DEFAULT_T_B);
    let config = CostConfig::uniform(
        scene.cameras.len(),
        scene.cameras[0].width,
        scene.cameras[0].height,
    );
    let mesh = &scene.classes[0].mesh;
    // Perturbed poses around the first instance.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let base = scene.instances[0].pose;
    let poses: Vec<Pose<f64>> = (0..args.evals)
        .map(|_| {
            Pose::new(
                uniform_rotation(&mut rng).mul_mat(&base.rotation),
                base.translation,
            )
        })
        .collect();

    let mut reference: Option<Vec<f64>> = None;
    for &n_threads in &args.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n_threads)
            .build()
            .expect("thread pool");
        let evaluator =
            SceneCostEvaluator::new(&[], &[], &scene.cameras, &dmaps, &config);
        let (costs, secs) = pool.install(|| {
            let start = std::time::Instant::now();
            let costs = batch_cost(&evaluator, mesh, &poses);
            (costs, start.elapsed().as_secs_f64())
        });
        match &reference {
            None => reference = Some(costs),
            Some(r) => assert!(
                r.iter().zip(&costs).all(|(a, b)| a == b),
                "cost values differ across thread counts"
            ),
        }
        println!(
            "threads={n_threads}: {} evals in {:.3}s = {:.1} evals/s",
            args.evals,
            secs,
            args.evals as f64 / secs
        );
    }
    println!("cost values bit-identical across thread counts: yes");
    Ok(())
}
