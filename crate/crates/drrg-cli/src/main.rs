//! Command-line pipeline: scene synthesis, link-classifier training,
//! detection, evaluation, rendering, gradient checking, and the
//! baseline-vs-reasoning ablation. Verbosity via `RUST_LOG`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use drrg::eval::{
    aggregate, baseline_grouping, build_report, match_instances, render_table, MatchReport,
};
use drrg::features::{EmbeddingConfig, ExternalFeatures, FeatureProvider};
use drrg::gcn::{
    evaluate, load_model, run_gradcheck, save_model, train, GcnDims, GcnModel, GradcheckConfig,
    OptimizerKind, TrainConfig, TrainGraph,
};
use drrg::inference::{
    cluster_boundary, detect, locality_aware_nms, order_components, score_filter, DetectParams,
    DetectedInstance, DetectionFile,
};
use drrg::local_graph::{select_training_pivots, spurious_pivot_graphs, GraphConfig};
use drrg::render::{render_scene, RenderOptions};
use drrg::synth::{generate_scene, perturb_components, NoiseModel, Scene, SceneConfig};

#[derive(Parser)]
#[command(
    name = "drrg",
    about = "Component-level relational text detection pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes with ground truth.
    Synth(SynthArgs),
    /// Train the link classifier on labeled local graphs from scenes.
    Train(TrainArgs),
    /// Detect text instances in a scene with a trained model.
    Infer(InferArgs),
    /// Score detections against ground-truth scenes.
    Eval(EvalArgs),
    /// Render a scene (and optional detections) to SVG.
    Render(RenderArgs),
    /// Verify analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Compare learned grouping against the heuristic baseline.
    Ablate(AblateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Mixed straight/curved scenes with occasional adjacent pairs.
    Default,
    /// Curved instances that always carry a tightly adjacent twin.
    Adversarial,
    /// Harder mix used to train robust link classifiers.
    Training,
}

impl Preset {
    fn config(self) -> SceneConfig {
        match self {
            Preset::Default => SceneConfig::default(),
            Preset::Adversarial => SceneConfig::adversarial(),
            Preset::Training => SceneConfig {
                adjacent_pair_prob: 0.5,
                adjacent_gap_range: (0.15, 0.60),
                ..SceneConfig::default()
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseChoice {
    None,
    Default,
}

impl NoiseChoice {
    fn model(self) -> NoiseModel {
        match self {
            NoiseChoice::None => NoiseModel::none(),
            NoiseChoice::Default => NoiseModel::default(),
        }
    }
}

/// Local-graph constants shared by train/infer/ablate: xi = 0.75, u = 3,
/// 8 one-hop / 4 two-hop neighbors by default.
#[derive(Args)]
struct GraphArgs {
    /// Pivot-filter overlap threshold (xi).
    #[arg(long, default_value_t = 0.75)]
    xi: f64,
    /// Adjacency fan-out (top-u nearest graph members).
    #[arg(long, default_value_t = 3)]
    u: usize,
    /// One-hop ring size.
    #[arg(long, default_value_t = 8)]
    knn_one_hop: usize,
    /// Two-hop expansion per one-hop node.
    #[arg(long, default_value_t = 4)]
    knn_two_hop: usize,
}

impl GraphArgs {
    fn config(&self) -> GraphConfig {
        GraphConfig {
            knn_one_hop: self.knn_one_hop,
            knn_two_hop: self.knn_two_hop,
            u_nearest: self.u,
            pivot_iou_threshold: self.xi,
        }
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Sinusoidal embedding width per attribute (even).
    #[arg(long, default_value_t = 16)]
    c_eps: usize,
    /// Scale applied to attributes before embedding. Must match between
    /// train and infer; the checkpoint does not store it.
    #[arg(long, default_value_t = 1.0)]
    embed_scale: f64,
}

impl EmbedArgs {
    fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            c_eps: self.c_eps,
            scale: self.embed_scale,
            ..EmbeddingConfig::default()
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Number of scenes to generate.
    #[arg(long)]
    scenes: usize,
    /// Master seed; per-scene seeds derive from it.
    #[arg(long)]
    seed: u64,
    /// Output directory for scene_NNNN.json files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    #[arg(long, default_value_t = 512.0)]
    width: f64,
    #[arg(long, default_value_t = 512.0)]
    height: f64,
    /// Component width law lower clamp.
    #[arg(long, default_value_t = 8.0)]
    w_min: f64,
    /// Component width law upper clamp.
    #[arg(long, default_value_t = 24.0)]
    w_max: f64,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of scene_NNNN.json files.
    #[arg(long)]
    scenes: PathBuf,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON output path (defaults to <out>.metrics.json).
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Optimizer: sgd (lr 0.01, momentum 0.9) or adam (lr 1e-3).
    #[arg(long, default_value = "sgd")]
    optimizer: String,
    /// Override the optimizer learning rate.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated hidden widths of the four graph-conv layers.
    #[arg(long, default_value = "256,128,64,32")]
    hidden: String,
    /// Apply this proposal-noise model to the training components.
    #[arg(long, value_enum, default_value_t = NoiseChoice::None)]
    noise: NoiseChoice,
    /// Fraction of graphs held out for the final accuracy line.
    #[arg(long, default_value_t = 0.1)]
    holdout: f64,
    /// Cap on the number of training graphs (0 = no cap).
    #[arg(long, default_value_t = 0)]
    max_graphs: usize,
    /// External per-component feature file (RRoI stand-in).
    #[arg(long)]
    features: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    embed: EmbedArgs,
}

#[derive(Args)]
struct InferArgs {
    /// Trained checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Scene file, or a directory of scene_NNNN.json files.
    #[arg(long)]
    scene: PathBuf,
    /// Output detection file, or a directory when --scene is a directory.
    #[arg(long)]
    out: PathBuf,
    /// Perturb the scene's ground-truth components before detection.
    #[arg(long, value_enum, default_value_t = NoiseChoice::None)]
    noise: NoiseChoice,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    #[arg(long, default_value_t = 0.5)]
    score_thr: f64,
    #[arg(long, default_value_t = 0.3)]
    nms_iou: f64,
    /// Disable the locality merge pass before greedy suppression.
    #[arg(long)]
    no_merge: bool,
    /// Linkage likelihood threshold for clustering.
    #[arg(long, default_value_t = 0.5)]
    link_thr: f64,
    #[arg(long, default_value_t = 2)]
    min_cluster: usize,
    /// Solo-component score gate for singleton clusters.
    #[arg(long, default_value_t = 0.9)]
    solo_thr: f64,
    /// Also emit the smallest circumscribed rectangle per instance.
    #[arg(long)]
    quads: bool,
    /// External per-component feature file (RRoI stand-in).
    #[arg(long)]
    features: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Embedding scale used at training time.
    #[arg(long, default_value_t = 1.0)]
    embed_scale: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Detection file or directory of det_*.json files.
    #[arg(long)]
    detections: PathBuf,
    /// Scene file or directory of scene_*.json files.
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Report JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Draw the local graph of this pivot component.
    #[arg(long)]
    pivot: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long, default_value_t = 20)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Args)]
struct AblateArgs {
    /// Directory of scene files (typically the adversarial preset).
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Baseline linking reach in multiples of the mean component height.
    #[arg(long, default_value_t = 1.2)]
    distance_factor: f64,
    #[arg(long, value_enum, default_value_t = NoiseChoice::Default)]
    noise: NoiseChoice,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    #[arg(long, default_value_t = 0.5)]
    link_thr: f64,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Report JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Embedding scale used at training time.
    #[arg(long, default_value_t = 1.0)]
    embed_scale: f64,
}

fn main() {
    env_logger::init();
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Render(args) => cmd_render(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Ablate(args) => cmd_ablate(args),
    }
}

fn read_scene(path: &Path) -> Result<Scene> {
    let json = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&json).with_context(|| format!("parsing scene {}", path.display()))
}

fn scene_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("scene_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no scene_*.json files under {}", path.display());
    }
    Ok(paths)
}

fn load_provider(path: Option<&PathBuf>) -> Result<FeatureProvider> {
    match path {
        None => Ok(FeatureProvider::GeometricOnly),
        Some(p) => {
            let json =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let ext: ExternalFeatures = serde_json::from_str(&json)
                .with_context(|| format!("parsing feature file {}", p.display()))?;
            ext.validate()?;
            Ok(FeatureProvider::External(ext))
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = SceneConfig {
        width: args.width,
        height: args.height,
        w_min: args.w_min,
        w_max: args.w_max,
        ..args.preset.config()
    };
    fs::create_dir_all(&args.out)?;
    // derive per-scene seeds from the master seed so scene k is stable
    // regardless of how many scenes are requested
    for k in 0..args.scenes {
        let scene_seed = args
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(k as u64);
        let scene = generate_scene(&cfg, scene_seed)?;
        let path = args.out.join(format!("scene_{k:04}.json"));
        fs::write(&path, serde_json::to_string(&scene)?)?;
    }
    println!("wrote {} scenes to {}", args.scenes, args.out.display());
    Ok(())
}

fn parse_hidden(spec: &str) -> Result<Vec<usize>> {
    let hidden: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse().context("bad hidden width"))
        .collect::<Result<_>>()?;
    if hidden.is_empty() {
        bail!("at least one hidden width required");
    }
    Ok(hidden)
}

fn build_train_graphs(
    scenes: &[PathBuf],
    noise: &NoiseModel,
    gcfg: &GraphConfig,
    embed: &EmbeddingConfig,
    provider: &FeatureProvider,
    max_graphs: usize,
    seed: u64,
) -> Result<Vec<TrainGraph>> {
    let mut out = Vec::new();
    for (k, path) in scenes.iter().enumerate() {
        let scene = read_scene(path)?;
        let comps = perturb_components(&scene, noise, seed.wrapping_add(k as u64));
        let mut graphs = select_training_pivots(&comps, gcfg);
        graphs.extend(spurious_pivot_graphs(&comps, gcfg));
        for g in graphs {
            out.push(TrainGraph::from_local(&g, &comps, provider, embed)?);
            if max_graphs > 0 && out.len() == max_graphs {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let embed = args.embed.config();
    embed.validate()?;
    let gcfg = args.graph.config();
    let provider = load_provider(args.features.as_ref())?;
    let scenes = scene_paths(&args.scenes)?;
    let graphs = build_train_graphs(
        &scenes,
        &args.noise.model(),
        &gcfg,
        &embed,
        &provider,
        args.max_graphs,
        args.seed.wrapping_mul(31),
    )?;
    if graphs.is_empty() {
        bail!("no usable training graphs in {}", args.scenes.display());
    }

    let holdout_count = ((graphs.len() as f64) * args.holdout).round() as usize;
    let (train_set, holdout_set) = graphs.split_at(graphs.len() - holdout_count.min(graphs.len()));
    println!(
        "training on {} graphs ({} held out) from {} scenes",
        train_set.len(),
        holdout_set.len(),
        scenes.len()
    );

    let optimizer = match args.optimizer.as_str() {
        "sgd" => OptimizerKind::Sgd {
            lr: args.lr.unwrap_or(0.01),
            momentum: 0.9,
        },
        "adam" => OptimizerKind::adam(args.lr.unwrap_or(1e-3)),
        other => bail!("unknown optimizer '{other}' (expected sgd or adam)"),
    };
    let input_dim = provider.external_dim() + embed.geometric_dim();
    let model = GcnModel::new(
        GcnDims::new(input_dim, parse_hidden(&args.hidden)?),
        embed.c_eps,
        provider.external_dim(),
        args.seed,
    );
    let tcfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        optimizer,
        seed: args.seed,
    };
    let state = train(model, train_set, &tcfg)?;
    save_model(&state.model, &args.out)?;

    let holdout_metrics = if holdout_set.is_empty() {
        None
    } else {
        Some(evaluate(&state.model, holdout_set)?)
    };
    let metrics_path = args
        .metrics
        .unwrap_or_else(|| args.out.with_extension("metrics.json"));
    let metrics = serde_json::json!({
        "seed": args.seed,
        "epochs": args.epochs,
        "graphs": train_set.len(),
        "holdout_graphs": holdout_set.len(),
        "degenerate_labels": state.degenerate_labels,
        "history": state.history,
        "holdout": holdout_metrics,
    });
    fs::write(&metrics_path, serde_json::to_string(&metrics)?)?;

    if let Some(h) = holdout_metrics {
        println!(
            "final train loss {:.4}, held-out accuracy {:.4}",
            state.history.last().map_or(f64::NAN, |m| m.loss),
            h.accuracy
        );
    }
    println!("checkpoint written to {}", args.out.display());
    Ok(())
}

fn detect_params(args: &InferArgs) -> DetectParams {
    DetectParams {
        score_threshold: args.score_thr,
        nms_iou: args.nms_iou,
        nms_merge: !args.no_merge,
        link_threshold: args.link_thr,
        min_cluster: args.min_cluster,
        solo_score: args.solo_thr,
        emit_quads: args.quads,
    }
}

fn cmd_infer(args: InferArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let provider = load_provider(args.features.as_ref())?;
    let embed = EmbeddingConfig {
        c_eps: model.c_eps,
        scale: args.embed_scale,
        ..EmbeddingConfig::default()
    };
    let gcfg = args.graph.config();
    let params = detect_params(&args);
    let noise = args.noise.model();

    let scenes = scene_paths(&args.scene)?;
    let batch = scenes.len() > 1;
    if batch {
        fs::create_dir_all(&args.out)?;
    }
    for (k, path) in scenes.iter().enumerate() {
        let scene = read_scene(path)?;
        let comps = perturb_components(&scene, &noise, args.noise_seed.wrapping_add(k as u64));
        let instances = detect(&comps, &model, &provider, &gcfg, &embed, &params)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scene")
            .to_string();
        let file = DetectionFile {
            scene: stem.clone(),
            instances,
        };
        let out_path = if batch {
            args.out.join(format!("det_{}.json", stem))
        } else {
            args.out.clone()
        };
        fs::write(&out_path, serde_json::to_string(&file)?)?;
    }
    println!("wrote detections for {} scene(s)", scenes.len());
    Ok(())
}

fn detection_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("det_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no det_*.json files under {}", path.display());
    }
    Ok(paths)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let det_paths = detection_paths(&args.detections)?;
    let mut per_scene = Vec::new();
    for det_path in &det_paths {
        let det: DetectionFile = serde_json::from_str(&fs::read_to_string(det_path)?)
            .with_context(|| format!("parsing {}", det_path.display()))?;
        let scene_path = if args.scenes.is_file() {
            args.scenes.clone()
        } else {
            args.scenes.join(format!("{}.json", det.scene))
        };
        let scene = read_scene(&scene_path)?;
        let preds: Vec<_> = det.instances.iter().map(|d| d.boundary.clone()).collect();
        let gts: Vec<_> = scene
            .instances
            .iter()
            .map(|i| i.boundary.clone())
            .collect();
        per_scene.push(match_instances(&preds, &gts, args.iou)?);
    }
    let report = build_report(per_scene);
    println!(
        "{}",
        render_table(&[("detections", &report.aggregate)]).trim_end()
    );
    if let Some(out) = args.out {
        fs::write(&out, serde_json::to_string(&report)?)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let scene = read_scene(&args.scene)?;
    let mut opts = RenderOptions::default();
    if let Some(det_path) = &args.detections {
        let det: DetectionFile = serde_json::from_str(&fs::read_to_string(det_path)?)?;
        opts.detections = det.instances;
    }
    if let Some(pivot) = args.pivot {
        if pivot >= scene.components.len() {
            bail!(
                "pivot {pivot} out of range ({} components)",
                scene.components.len()
            );
        }
        opts.graph = Some(drrg::local_graph::build_local_graph(
            pivot,
            &scene.components,
            &args.graph.config(),
        ));
    }
    fs::write(&args.out, render_scene(&scene, &opts))?;
    println!("svg written to {}", args.out.display());
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<()> {
    let cfg = GradcheckConfig {
        cases: args.cases,
        seed: args.seed,
        step: args.step,
        tolerance: args.tol,
        ..GradcheckConfig::default()
    };
    let report = run_gradcheck(&cfg)?;
    for case in &report.cases {
        println!(
            "case {:>2}: max rel err {:.3e} over {} coordinates (worst {})",
            case.case, case.max_rel_err, case.checked, case.worst_param
        );
    }
    println!(
        "gradcheck {}: max rel err {:.3e} (tolerance {:.1e})",
        if report.passed { "PASSED" } else { "FAILED" },
        report.max_rel_err,
        report.tolerance
    );
    if !report.passed {
        std::process::exit(1);
    }
    Ok(())
}

fn baseline_detect(
    comps: &[drrg::TextComponent],
    params: &DetectParams,
    distance_factor: f64,
) -> Vec<DetectedInstance> {
    let filtered = score_filter(comps, params.score_threshold);
    let kept = locality_aware_nms(&filtered, params.nms_iou, params.nms_merge);
    let mut out = Vec::new();
    for cluster in baseline_grouping(&kept, distance_factor) {
        if cluster.len() < params.min_cluster
            && !(cluster.len() == 1 && kept[cluster[0]].score >= params.solo_score)
        {
            continue;
        }
        let ordered = order_components(&cluster, &kept);
        let boundary = cluster_boundary(&ordered, &kept);
        let score =
            ordered.iter().map(|&i| kept[i].score).sum::<f64>() / ordered.len() as f64;
        out.push(DetectedInstance {
            components: ordered,
            boundary,
            quad: None,
            score,
        });
    }
    out
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let embed = EmbeddingConfig {
        c_eps: model.c_eps,
        scale: args.embed_scale,
        ..EmbeddingConfig::default()
    };
    let gcfg = args.graph.config();
    let params = DetectParams {
        link_threshold: args.link_thr,
        ..DetectParams::default()
    };
    let noise = args.noise.model();

    let mut gcn_reports: Vec<MatchReport> = Vec::new();
    let mut base_reports: Vec<MatchReport> = Vec::new();
    for (k, path) in scene_paths(&args.scenes)?.iter().enumerate() {
        let scene = read_scene(path)?;
        let comps = perturb_components(&scene, &noise, args.noise_seed.wrapping_add(k as u64));
        let gts: Vec<_> = scene
            .instances
            .iter()
            .map(|i| i.boundary.clone())
            .collect();

        let dets = detect(
            &comps,
            &model,
            &FeatureProvider::GeometricOnly,
            &gcfg,
            &embed,
            &params,
        )?;
        let preds: Vec<_> = dets.iter().map(|d| d.boundary.clone()).collect();
        gcn_reports.push(match_instances(&preds, &gts, args.iou)?);

        let base = baseline_detect(&comps, &params, args.distance_factor);
        let preds: Vec<_> = base.iter().map(|d| d.boundary.clone()).collect();
        base_reports.push(match_instances(&preds, &gts, args.iou)?);
    }

    let gcn_agg = aggregate(&gcn_reports);
    let base_agg = aggregate(&base_reports);
    println!(
        "{}",
        render_table(&[("baseline", &base_agg), ("baseline+gcn", &gcn_agg)]).trim_end()
    );
    if let Some(out) = args.out {
        let payload = serde_json::json!({
            "baseline": base_agg,
            "gcn": gcn_agg,
        });
        fs::write(&out, serde_json::to_string(&payload)?)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}
