//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured numbers (visible under `--nocapture`).
//!
//! The experiment criteria (training accuracy, end-to-end detection, the
//! grouping ablation) share a single model trained once on the frozen
//! training seeds; its operating threshold (0.98) was selected on a
//! separate validation split (scene seeds 60_000..) before these test
//! seeds were ever evaluated.

use std::sync::OnceLock;
use std::time::Instant;

use drrg::eval::{aggregate, baseline_grouping, match_instances, polygon_iou, MatchReport};
use drrg::features::{embed_scalar, EmbeddingConfig, FeatureProvider};
use drrg::gcn::{
    evaluate, model_from_json, model_to_json, normalized_laplacian, row_softmax, run_gradcheck,
    train, BnMode, GcnDims, GcnModel, GradcheckConfig, GraphInput, OptimizerKind, TrainConfig,
    TrainGraph,
};
use drrg::geometry::{width_from_height, Point, TextComponent};
use drrg::inference::{
    bfs_cluster, cluster_boundary, detect, locality_aware_nms, order_components, score_filter,
    DetectParams, DetectionFile, LinkGraph,
};
use drrg::linalg::Mat;
use drrg::local_graph::{
    build_local_graph, graph_iou, select_training_pivots, spurious_pivot_graphs, GraphConfig,
};
use drrg::synth::{generate_scene, perturb_components, NoiseModel, SceneConfig};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// --- shared experiment configuration --------------------------------------

fn embed_config() -> EmbeddingConfig {
    EmbeddingConfig {
        c_eps: 16,
        scale: 0.05,
        ..EmbeddingConfig::default()
    }
}

fn training_scene_config() -> SceneConfig {
    SceneConfig {
        adjacent_pair_prob: 0.5,
        adjacent_gap_range: (0.15, 0.60),
        ..SceneConfig::default()
    }
}

fn training_noise() -> NoiseModel {
    NoiseModel {
        spurious_rate: 0.06,
        ..NoiseModel::default()
    }
}

fn graphs_from_scenes(seed_base: u64, scenes: usize, cap: Option<usize>) -> Vec<TrainGraph> {
    let cfg = training_scene_config();
    let noise = training_noise();
    let gcfg = GraphConfig::default();
    let embed = embed_config();
    let mut out = Vec::new();
    for k in 0..scenes {
        let scene = generate_scene(&cfg, seed_base + k as u64).expect("scene generation");
        let comps = perturb_components(&scene, &noise, seed_base * 31 + k as u64);
        let mut graphs = select_training_pivots(&comps, &gcfg);
        graphs.extend(spurious_pivot_graphs(&comps, &gcfg));
        for g in graphs {
            out.push(
                TrainGraph::from_local(&g, &comps, &FeatureProvider::GeometricOnly, &embed)
                    .expect("feature assembly"),
            );
            if let Some(c) = cap {
                if out.len() == c {
                    return out;
                }
            }
        }
    }
    out
}

struct TrainedBundle {
    model: GcnModel,
    train_seconds: f64,
    holdout_accuracy: f64,
    train_graphs: usize,
    epochs: usize,
}

static BUNDLE: OnceLock<TrainedBundle> = OnceLock::new();

fn trained() -> &'static TrainedBundle {
    BUNDLE.get_or_init(|| {
        let embed = embed_config();
        let train_set = graphs_from_scenes(1000, 200, Some(5000));
        assert_eq!(train_set.len(), 5000, "training set must hold 5000 graphs");
        let holdout = graphs_from_scenes(9000, 15, None);

        let model = GcnModel::new(
            GcnDims::new(embed.geometric_dim(), vec![128, 96, 64, 32]),
            embed.c_eps,
            0,
            11,
        );
        let cfg = TrainConfig {
            epochs: 40,
            batch_size: 32,
            optimizer: OptimizerKind::adam(1e-3),
            seed: 5,
        };
        let start = Instant::now();
        let state = train(model, &train_set, &cfg).expect("training");
        let train_seconds = start.elapsed().as_secs_f64();
        let metrics = evaluate(&state.model, &holdout).expect("holdout evaluation");
        TrainedBundle {
            model: state.model,
            train_seconds,
            holdout_accuracy: metrics.accuracy,
            train_graphs: train_set.len(),
            epochs: cfg.epochs,
        }
    })
}

fn detect_scene_reports(
    model: &GcnModel,
    scene_cfg: &SceneConfig,
    scene_seed_base: u64,
    noise_seed_base: u64,
    count: u64,
    params: &DetectParams,
) -> Vec<MatchReport> {
    let embed = embed_config();
    let gcfg = GraphConfig::default();
    let noise = NoiseModel::default();
    let mut reports = Vec::new();
    for k in 0..count {
        let scene = generate_scene(scene_cfg, scene_seed_base + k).expect("scene");
        let comps = perturb_components(&scene, &noise, noise_seed_base + k);
        let dets = detect(
            &comps,
            model,
            &FeatureProvider::GeometricOnly,
            &gcfg,
            &embed,
            params,
        )
        .expect("detection");
        let preds: Vec<_> = dets.iter().map(|d| d.boundary.clone()).collect();
        let gts: Vec<_> = scene
            .instances
            .iter()
            .map(|i| i.boundary.clone())
            .collect();
        reports.push(match_instances(&preds, &gts, 0.5).expect("matching"));
    }
    reports
}

// --- criterion 1: gradient suite -------------------------------------------

#[test]
fn criterion_gradient_suite() {
    let start = Instant::now();
    let report = run_gradcheck(&GradcheckConfig::default()).expect("gradcheck run");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(report.cases.len() >= 20, "need at least 20 cases");
    assert!(
        report.passed,
        "analytic vs finite-difference mismatch: max rel err {:.3e}",
        report.max_rel_err
    );
    assert!(elapsed < 60.0, "gradient suite too slow: {elapsed:.1}s");
    println!(
        "[PASS] gradient suite: {} cases, max rel err {:.3e} < 1e-4, {elapsed:.1}s < 60s",
        report.cases.len(),
        report.max_rel_err
    );
}

// --- criterion 2: relational-reasoning training -----------------------------

#[test]
fn criterion_training_accuracy() {
    let bundle = trained();
    assert!(bundle.epochs <= 50, "epoch budget exceeded");
    assert!(
        bundle.holdout_accuracy >= 0.95,
        "held-out accuracy {:.4} below 0.95",
        bundle.holdout_accuracy
    );
    assert!(
        bundle.train_seconds < 600.0,
        "training too slow: {:.0}s",
        bundle.train_seconds
    );
    println!(
        "[PASS] training: {} graphs, {} epochs, held-out 1-hop accuracy {:.4} >= 0.95, {:.0}s < 600s",
        bundle.train_graphs, bundle.epochs, bundle.holdout_accuracy, bundle.train_seconds
    );
}

// --- criterion 3: end-to-end detection --------------------------------------

#[test]
fn criterion_end_to_end_detection() {
    let bundle = trained();
    let params = DetectParams {
        link_threshold: 0.98,
        ..DetectParams::default()
    };
    let start = Instant::now();
    let reports = detect_scene_reports(
        &bundle.model,
        &SceneConfig::default(),
        50_000,
        7_000,
        100,
        &params,
    );
    let elapsed = start.elapsed().as_secs_f64();
    let agg = aggregate(&reports);
    assert!(
        agg.hmean >= 0.90,
        "end-to-end Hmean {:.4} below 0.90 (P {:.4}, R {:.4})",
        agg.hmean,
        agg.precision,
        agg.recall
    );
    assert!(elapsed < 120.0, "detection phase too slow: {elapsed:.1}s");
    println!(
        "[PASS] end-to-end: 100 noisy scenes, P {:.4} R {:.4} Hmean {:.4} >= 0.90, {elapsed:.1}s < 120s",
        agg.precision, agg.recall, agg.hmean
    );
}

// --- criterion 4: ablation direction ----------------------------------------

#[test]
fn criterion_ablation_direction() {
    let bundle = trained();
    let embed = embed_config();
    let gcfg = GraphConfig::default();
    let noise = NoiseModel::default();
    let params = DetectParams {
        link_threshold: 0.98,
        ..DetectParams::default()
    };
    let adv = SceneConfig::adversarial();

    let mut gcn_reports = Vec::new();
    let mut base_reports = Vec::new();
    for k in 0..40u64 {
        let scene = generate_scene(&adv, 80_000 + k).expect("scene");
        let comps = perturb_components(&scene, &noise, 6_000 + k);
        let gts: Vec<_> = scene
            .instances
            .iter()
            .map(|i| i.boundary.clone())
            .collect();

        let dets = detect(
            &comps,
            &bundle.model,
            &FeatureProvider::GeometricOnly,
            &gcfg,
            &embed,
            &params,
        )
        .expect("detection");
        let preds: Vec<_> = dets.iter().map(|d| d.boundary.clone()).collect();
        gcn_reports.push(match_instances(&preds, &gts, 0.5).expect("matching"));

        // heuristic baseline over the same filtered/suppressed components
        let filtered = score_filter(&comps, params.score_threshold);
        let kept = locality_aware_nms(&filtered, params.nms_iou, params.nms_merge);
        let mut base_preds = Vec::new();
        for cluster in baseline_grouping(&kept, 1.2) {
            if cluster.len() < params.min_cluster
                && !(cluster.len() == 1 && kept[cluster[0]].score >= params.solo_score)
            {
                continue;
            }
            let ordered = order_components(&cluster, &kept);
            base_preds.push(cluster_boundary(&ordered, &kept));
        }
        base_reports.push(match_instances(&base_preds, &gts, 0.5).expect("matching"));
    }

    let gcn = aggregate(&gcn_reports);
    let base = aggregate(&base_reports);
    let diff = gcn.hmean - base.hmean;
    assert!(
        diff >= 0.02,
        "learned grouping must beat the baseline by 2 points: gcn {:.4} vs baseline {:.4}",
        gcn.hmean,
        base.hmean
    );
    println!(
        "[PASS] ablation: adversarial split, gcn Hmean {:.4} vs baseline {:.4} (margin {:.4} >= 0.02)",
        gcn.hmean, base.hmean, diff
    );
}

// --- criterion 5: oracle equivalences ----------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn random_component(rng: &mut ChaCha8Rng) -> TextComponent {
    TextComponent::new(
        rng.random_range(0.0..300.0),
        rng.random_range(0.0..300.0),
        rng.random_range(8.0..30.0),
        rng.random_range(8.0..24.0),
        rng.random_range(-1.5..1.5),
    )
    .unwrap()
    .with_score(rng.random_range(0.01..1.0))
}

/// Independent exact min-path: top-down recursion with memoization
/// (the library uses a bottom-up table).
fn oracle_min_path_length(centers: &[Point]) -> f64 {
    use std::collections::HashMap;
    fn best(
        mask: usize,
        last: usize,
        centers: &[Point],
        memo: &mut HashMap<(usize, usize), f64>,
    ) -> f64 {
        if mask == (1 << last) {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(mask, last)) {
            return v;
        }
        let prev_mask = mask & !(1 << last);
        let mut bestv = f64::INFINITY;
        for p in 0..centers.len() {
            if prev_mask & (1 << p) != 0 {
                let v = best(prev_mask, p, centers, memo) + centers[p].dist(centers[last]);
                bestv = bestv.min(v);
            }
        }
        memo.insert((mask, last), bestv);
        bestv
    }
    let n = centers.len();
    let full = (1usize << n) - 1;
    let mut memo = HashMap::new();
    (0..n)
        .map(|last| best(full, last, centers, &mut memo))
        .fold(f64::INFINITY, f64::min)
}

fn brute_min_path_length(centers: &[Point]) -> f64 {
    fn permute(rest: &mut Vec<usize>, current: &mut Vec<usize>, centers: &[Point], best: &mut f64) {
        if rest.is_empty() {
            let len: f64 = current
                .windows(2)
                .map(|w| centers[w[0]].dist(centers[w[1]]))
                .sum();
            *best = best.min(len);
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            current.push(v);
            permute(rest, current, centers, best);
            current.pop();
            rest.insert(i, v);
        }
    }
    let mut best = f64::INFINITY;
    permute(
        &mut (0..centers.len()).collect(),
        &mut Vec::new(),
        centers,
        &mut best,
    );
    best
}

fn path_length(order: &[usize], comps: &[TextComponent]) -> f64 {
    order
        .windows(2)
        .map(|w| comps[w[0]].center().dist(comps[w[1]].center()))
        .sum()
}

#[test]
fn criterion_oracle_equivalences() {
    // bfs_cluster vs union-find on 200 random link graphs
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for round in 0..200 {
        let n = rng.random_range(1..50);
        let mut lg = LinkGraph::new();
        for _ in 0..rng.random_range(0..100) {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                lg.observe(a, b, rng.random_range(0.0..1.0));
            }
        }
        let thr = rng.random_range(0.1..0.9);
        let clusters = bfs_cluster(&lg, thr, n);
        let mut uf = UnionFind::new(n);
        for ((a, b), s) in lg.iter() {
            if s >= thr {
                uf.union(a, b);
            }
        }
        let mut owner = vec![usize::MAX; n];
        for (ci, cluster) in clusters.iter().enumerate() {
            for &v in cluster {
                assert_eq!(owner[v], usize::MAX, "round {round}: node in two clusters");
                owner[v] = ci;
            }
        }
        assert!(owner.iter().all(|&o| o != usize::MAX), "round {round}");
        for a in 0..n {
            for b in 0..n {
                assert_eq!(
                    owner[a] == owner[b],
                    uf.find(a) == uf.find(b),
                    "round {round}: partition mismatch"
                );
            }
        }
    }

    // locality NMS (merge pass off) vs brute-force greedy on 100 box sets
    for round in 0..100 {
        let comps: Vec<TextComponent> = (0..rng.random_range(10..60))
            .map(|_| random_component(&mut rng))
            .collect();
        let thr = rng.random_range(0.1..0.6);
        let ours = locality_aware_nms(&comps, thr, false);
        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by(|&a, &b| {
            comps[b]
                .score
                .partial_cmp(&comps[a].score)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut oracle: Vec<TextComponent> = Vec::new();
        for &i in &order {
            if oracle
                .iter()
                .all(|k| drrg::geometry::rotated_rect_overlap(k, &comps[i]) <= thr)
            {
                oracle.push(comps[i]);
            }
        }
        assert_eq!(ours, oracle, "NMS mismatch in round {round}");
    }

    // order_components vs independent exact DP for clusters of <= 12 nodes,
    // with the oracle itself validated by brute permutations at n <= 8
    for round in 0..60 {
        let n = rng.random_range(2..=12);
        let comps: Vec<TextComponent> = (0..n).map(|_| random_component(&mut rng)).collect();
        let cluster: Vec<usize> = (0..n).collect();
        let ordered = order_components(&cluster, &comps);
        let mut sorted = ordered.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, cluster, "round {round}: output must be a permutation");
        let centers: Vec<Point> = comps.iter().map(|c| c.center()).collect();
        let ours = path_length(&ordered, &comps);
        let oracle = oracle_min_path_length(&centers);
        assert!(
            (ours - oracle).abs() < 1e-9,
            "round {round}: path length {ours} vs oracle {oracle}"
        );
        if n <= 8 {
            let brute = brute_min_path_length(&centers);
            assert!((oracle - brute).abs() < 1e-9, "oracle self-check failed");
        }
    }

    // polygon IoU against clip+shoelace hand cases
    let square = |x: f64, y: f64, s: f64| {
        vec![
            Point::new(x, y),
            Point::new(x + s, y),
            Point::new(x + s, y + s),
            Point::new(x, y + s),
        ]
    };
    let unit = square(0.0, 0.0, 1.0);
    // hand: intersection 0.5, union 1.5
    assert!((polygon_iou(&unit, &square(0.5, 0.0, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    assert!((polygon_iou(&unit, &unit).unwrap() - 1.0).abs() < 1e-6);
    assert!(polygon_iou(&unit, &square(5.0, 5.0, 1.0)).unwrap() < 1e-6);
    // hand: 1x1 inside 2x2 -> 1/4
    assert!((polygon_iou(&square(0.0, 0.0, 2.0), &square(0.5, 0.5, 1.0)).unwrap() - 0.25).abs() < 1e-6);
    // hand: right triangle (0,0)(2,0)(0,2) covers the unit square -> 1/2
    let triangle = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 2.0)];
    assert!((polygon_iou(&triangle, &unit).unwrap() - 0.5).abs() < 1e-6);
    // hand: L-shape of area 3 inside the 2x2 square -> 3/4
    let l_shape = vec![
        Point::new(0.0, 0.0),
        Point::new(2.0, 0.0),
        Point::new(2.0, 1.0),
        Point::new(1.0, 1.0),
        Point::new(1.0, 2.0),
        Point::new(0.0, 2.0),
    ];
    assert!((polygon_iou(&l_shape, &square(0.0, 0.0, 2.0)).unwrap() - 0.75).abs() < 1e-6);

    println!(
        "[PASS] oracles: bfs==union-find (200), nms==greedy (100), min-path==exact DP (60), polygon IoU hand cases (1e-6)"
    );
}

// --- criterion 6: structural invariants ---------------------------------------

/// Cyclic Jacobi eigenvalues of a symmetric matrix (test-side oracle).
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-15 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[test]
fn criterion_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    // pivot-filter guarantee: kept same-instance pivot pairs overlap < 0.75
    let gcfg = GraphConfig::default();
    for seed in 0..6 {
        let scene = generate_scene(&training_scene_config(), 3000 + seed).unwrap();
        let kept = select_training_pivots(&scene.components, &gcfg);
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                let same_instance = scene.components[kept[i].pivot].instance_id
                    == scene.components[kept[j].pivot].instance_id;
                if same_instance {
                    let iou = graph_iou(&kept[i], &kept[j]);
                    assert!(
                        iou < gcfg.pivot_iou_threshold,
                        "kept pivots {} and {} overlap at {iou}",
                        kept[i].pivot,
                        kept[j].pivot
                    );
                }
            }
        }
    }

    // width clamp law: branch values and monotone clamped output
    assert_eq!(width_from_height(10.0, 8.0, 24.0).unwrap(), 8.0);
    assert_eq!(width_from_height(30.0, 8.0, 24.0).unwrap(), 15.0);
    assert_eq!(width_from_height(100.0, 8.0, 24.0).unwrap(), 24.0);
    let mut prev = 0.0;
    for step in 1..=600 {
        let h = step as f64 * 0.2;
        let w = width_from_height(h, 8.0, 24.0).unwrap();
        assert!((8.0..=24.0).contains(&w));
        assert!(w >= prev, "width law must be monotone");
        prev = w;
    }

    // embedding pair-norm identity at 1e-12
    for c_eps in [2usize, 4, 16, 32] {
        let cfg = EmbeddingConfig {
            c_eps,
            ..embed_config()
        };
        for _ in 0..50 {
            let z = rng.random_range(-1e4..1e4);
            for pair in embed_scalar(z, &cfg).chunks(2) {
                assert!((pair[0] * pair[0] + pair[1] * pair[1] - 1.0).abs() < 1e-12);
            }
        }
    }

    // Laplacian symmetry and spectral bound on dense eigensolves (n <= 8)
    for _ in 0..40 {
        let n = rng.random_range(2..=8);
        let mut adj = vec![0u8; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.45 {
                    adj[i * n + j] = 1;
                    adj[j * n + i] = 1;
                }
            }
        }
        let lap = normalized_laplacian(&adj, n);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                dense[i][j] = lap.g[(i, j)];
                assert!((lap.g[(i, j)] - lap.g[(j, i)]).abs() < 1e-9, "G must be symmetric");
            }
        }
        for lambda in jacobi_eigenvalues(dense) {
            assert!(
                (-1.0 - 1e-9..=1.0 + 1e-9).contains(&lambda),
                "eigenvalue {lambda} outside [-1, 1]"
            );
        }
    }

    // softmax rows sum to one at 1e-9
    for _ in 0..30 {
        let rows = rng.random_range(1..10);
        let data: Vec<f64> = (0..rows * 2).map(|_| rng.random_range(-30.0..30.0)).collect();
        let probs = row_softmax(&Mat::from_vec(rows, 2, data));
        for r in 0..rows {
            assert!((probs.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    // checkpoint round trip is bit exact
    let mut model = GcnModel::new(GcnDims::new(12, vec![8, 6, 5, 4]), 2, 0, 9);
    model.bn.running_mean[3] = 0.123456789012345;
    model.bn.running_var[7] = 2.765432109876543;
    let json = model_to_json(&model).unwrap();
    let back = model_from_json(&json).unwrap();
    assert_eq!(model_to_json(&back).unwrap(), json);
    for (a, b) in model.params().iter().zip(back.params().iter()) {
        assert_eq!(a, b, "parameters must survive bit-exactly");
    }

    println!(
        "[PASS] invariants: pivot filter < 0.75, width clamp law, pair-norm 1e-12, laplacian symmetric with spectrum in [-1,1], softmax rows 1e-9, checkpoint bit-exact"
    );
}

// --- criterion 7: determinism --------------------------------------------------

#[test]
fn criterion_determinism() {
    // synth: byte-identical scene serialization for equal seeds
    let cfg = SceneConfig::default();
    let a = serde_json::to_string(&generate_scene(&cfg, 123).unwrap()).unwrap();
    let b = serde_json::to_string(&generate_scene(&cfg, 123).unwrap()).unwrap();
    assert_eq!(a, b, "synth must be byte-identical per seed");

    // train: identical checkpoints for equal seeds and data order
    let graphs = graphs_from_scenes(4000, 4, Some(120));
    let embed = embed_config();
    let tcfg = TrainConfig {
        epochs: 2,
        batch_size: 16,
        optimizer: OptimizerKind::default(),
        seed: 9,
    };
    let mk_model = || {
        GcnModel::new(
            GcnDims::new(embed.geometric_dim(), vec![16, 12, 10, 8]),
            embed.c_eps,
            0,
            3,
        )
    };
    let m1 = train(mk_model(), &graphs, &tcfg).unwrap();
    let m2 = train(mk_model(), &graphs, &tcfg).unwrap();
    assert_eq!(
        model_to_json(&m1.model).unwrap(),
        model_to_json(&m2.model).unwrap(),
        "training must be deterministic per seed"
    );

    // infer: byte-identical detection files for equal inputs
    let scene = generate_scene(&cfg, 777).unwrap();
    let comps = perturb_components(&scene, &NoiseModel::default(), 55);
    let params = DetectParams::default();
    let gcfg = GraphConfig::default();
    let run = || {
        let instances = detect(
            &comps,
            &m1.model,
            &FeatureProvider::GeometricOnly,
            &gcfg,
            &embed,
            &params,
        )
        .unwrap();
        serde_json::to_string(&DetectionFile {
            scene: "scene_0777".into(),
            instances,
        })
        .unwrap()
    };
    assert_eq!(run(), run(), "inference must be byte-identical");

    // inference probabilities are bit-identical across calls
    let g = build_local_graph(0, &scene.components, &gcfg);
    let features = drrg::features::assemble_feature_matrix(
        &g,
        &scene.components,
        &FeatureProvider::GeometricOnly,
        &embed,
    )
    .unwrap();
    let lap = normalized_laplacian(&g.adjacency, g.nodes.len());
    let input = GraphInput {
        features: features.mat,
        laplacian: lap.g,
    };
    let p1 = m1.model.forward(&input, BnMode::Inference).unwrap();
    let p2 = m1.model.forward(&input, BnMode::Inference).unwrap();
    assert_eq!(p1.data(), p2.data());

    println!("[PASS] determinism: synth, train, and infer are byte-identical under fixed seeds");
}
