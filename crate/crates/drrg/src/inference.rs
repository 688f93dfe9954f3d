//! End-to-end inference: score filtering, locality-aware NMS on rotated
//! components, pivot-loop link scoring with the trained network, BFS
//! clustering, min-path ordering, and boundary/quad generation.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::features::{assemble_feature_matrix, EmbeddingConfig, FeatureProvider};
use crate::gcn::laplacian::normalized_laplacian;
use crate::gcn::model::{BnMode, GcnModel, GraphInput};
use crate::geometry::{rotated_rect_overlap, Point, TextComponent};
use crate::local_graph::{build_local_graph, GraphConfig};
use crate::polygon;

/// Aggregated pivot-neighbor linkage likelihoods. Keys are canonical
/// (low index first); values accumulate the scores observed from either
/// direction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkGraph {
    edges: BTreeMap<(usize, usize), (f64, u32)>,
}

impl LinkGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, a: usize, b: usize, score: f64) {
        if a == b {
            return;
        }
        let key = (a.min(b), a.max(b));
        let e = self.edges.entry(key).or_insert((0.0, 0));
        e.0 += score;
        e.1 += 1;
    }

    /// Mean linkage likelihood of a pair, if observed.
    pub fn likelihood(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.edges.get(&key).map(|&(sum, n)| sum / f64::from(n))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical-order iteration over `(pair, mean likelihood)`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edges
            .iter()
            .map(|(&k, &(sum, n))| (k, sum / f64::from(n)))
    }
}

/// One merged text instance: ordered components, their indices into the
/// detector's input list, the generated polygon boundary, and an optional
/// circumscribed quadrilateral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectedInstance {
    pub components: Vec<usize>,
    pub boundary: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad: Option<[Point; 4]>,
    pub score: f64,
}

/// Detection output file payload: the originating scene name plus the
/// merged instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionFile {
    pub scene: String,
    pub instances: Vec<DetectedInstance>,
}

/// Thresholds of the detection pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectParams {
    pub score_threshold: f64,
    pub nms_iou: f64,
    pub nms_merge: bool,
    pub link_threshold: f64,
    pub min_cluster: usize,
    pub solo_score: f64,
    pub emit_quads: bool,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            score_threshold: 0.5,
            nms_iou: 0.3,
            nms_merge: true,
            link_threshold: 0.5,
            min_cluster: 2,
            solo_score: 0.9,
            emit_quads: false,
        }
    }
}

/// Keep components whose score reaches the threshold.
pub fn score_filter(comps: &[TextComponent], threshold: f64) -> Vec<TextComponent> {
    comps
        .iter()
        .filter(|c| c.score >= threshold)
        .copied()
        .collect()
}

fn weighted_merge(a: &TextComponent, b: &TextComponent) -> TextComponent {
    let wa = a.score.max(1e-9);
    let wb = b.score.max(1e-9);
    let total = wa + wb;
    // orientations are unoriented; align the second before averaging
    let (mut cb, mut sb) = (b.cos_t, b.sin_t);
    if a.cos_t * cb + a.sin_t * sb < 0.0 {
        cb = -cb;
        sb = -sb;
    }
    let mut merged = TextComponent {
        x: (a.x * wa + b.x * wb) / total,
        y: (a.y * wa + b.y * wb) / total,
        h: (a.h * wa + b.h * wb) / total,
        w: (a.w * wa + b.w * wb) / total,
        cos_t: (a.cos_t * wa + cb * wb) / total,
        sin_t: (a.sin_t * wa + sb * wb) / total,
        score: a.score.max(b.score),
        instance_id: None,
    };
    merged.renormalize_angle();
    merged
}

/// Greedy rotated-rectangle NMS by descending score, optionally preceded by
/// a row-locality pass that merges near-duplicate neighbors (score-weighted
/// average) before suppression.
pub fn locality_aware_nms(
    comps: &[TextComponent],
    iou_threshold: f64,
    merge_pass: bool,
) -> Vec<TextComponent> {
    let mut work: Vec<TextComponent>;
    if merge_pass && comps.len() > 1 {
        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by(|&a, &b| {
            (comps[a].y, comps[a].x, a)
                .partial_cmp(&(comps[b].y, comps[b].x, b))
                .unwrap()
        });
        work = Vec::with_capacity(comps.len());
        let mut current = comps[order[0]];
        for &idx in &order[1..] {
            let cand = comps[idx];
            if rotated_rect_overlap(&current, &cand) > iou_threshold {
                current = weighted_merge(&current, &cand);
            } else {
                work.push(current);
                current = cand;
            }
        }
        work.push(current);
    } else {
        work = comps.to_vec();
    }

    let mut order: Vec<usize> = (0..work.len()).collect();
    order.sort_by(|&a, &b| {
        work[b]
            .score
            .partial_cmp(&work[a].score)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut kept: Vec<TextComponent> = Vec::new();
    for &idx in &order {
        let cand = work[idx];
        if kept
            .iter()
            .all(|k| rotated_rect_overlap(k, &cand) <= iou_threshold)
        {
            kept.push(cand);
        }
    }
    kept
}

/// Loop over every usable pivot, run the network on its local graph, and
/// aggregate the positive-class probability of each pivot-neighbor pair
/// (pairs seen from both directions average).
pub fn collect_link_scores(
    comps: &[TextComponent],
    model: &GcnModel,
    provider: &FeatureProvider,
    graph_cfg: &GraphConfig,
    embed_cfg: &EmbeddingConfig,
) -> Result<LinkGraph> {
    if provider.external_dim() != model.provider_dim {
        return Err(DrrgError::Config(format!(
            "provider width {} does not match the model's {}",
            provider.external_dim(),
            model.provider_dim
        )));
    }
    let mut links = LinkGraph::new();
    for pivot in 0..comps.len() {
        let g = build_local_graph(pivot, comps, graph_cfg);
        if !g.is_usable() {
            continue;
        }
        let features = assemble_feature_matrix(&g, comps, provider, embed_cfg)?;
        let lap = normalized_laplacian(&g.adjacency, g.nodes.len());
        let input = GraphInput {
            features: features.mat,
            laplacian: lap.g,
        };
        let probs = model.forward(&input, BnMode::Inference)?;
        for &pos in &g.one_hop {
            let neighbor = g.nodes[pos];
            links.observe(pivot, neighbor, probs[(pos, 1)]);
        }
    }
    Ok(links)
}

/// Connected components of the thresholded link graph, found by breadth-
/// first traversal. Returns a partition of `0..n`; clusters are ordered by
/// their smallest member and nodes appear in BFS visit order.
pub fn bfs_cluster(links: &LinkGraph, link_threshold: f64, n: usize) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for ((a, b), score) in links.iter() {
        if score >= link_threshold && a < n && b < n {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for neighbors in &mut adj {
        neighbors.sort_unstable();
    }
    let mut seen = vec![false; n];
    let mut clusters = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cluster = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            cluster.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        clusters.push(cluster);
    }
    clusters
}

/// Order a cluster as the minimum-length open path over component centers:
/// exact dynamic programming up to 12 nodes, nearest-neighbor plus 2-opt
/// beyond. The result is canonicalized so the first center compares
/// lexicographically below the last.
pub fn order_components(cluster: &[usize], comps: &[TextComponent]) -> Vec<usize> {
    if cluster.len() <= 2 {
        let mut out = cluster.to_vec();
        canonicalize(&mut out, comps);
        return out;
    }
    let centers: Vec<Point> = cluster.iter().map(|&i| comps[i].center()).collect();
    let order = if cluster.len() <= 12 {
        exact_min_path(&centers)
    } else {
        two_opt(nearest_neighbor_path(&centers), &centers)
    };
    let mut out: Vec<usize> = order.into_iter().map(|k| cluster[k]).collect();
    canonicalize(&mut out, comps);
    out
}

fn canonicalize(path: &mut [usize], comps: &[TextComponent]) {
    if path.len() < 2 {
        return;
    }
    let first = comps[path[0]].center();
    let last = comps[path[path.len() - 1]].center();
    if (last.x, last.y) < (first.x, first.y) {
        path.reverse();
    }
}

fn path_length(order: &[usize], centers: &[Point]) -> f64 {
    order
        .windows(2)
        .map(|w| centers[w[0]].dist(centers[w[1]]))
        .sum()
}

/// Held-Karp over open paths: dp[mask][i] = shortest path visiting `mask`
/// and ending at `i`.
fn exact_min_path(centers: &[Point]) -> Vec<usize> {
    let n = centers.len();
    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for i in 0..n {
        dp[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..full {
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask * n + last];
            if !cur.is_finite() {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = cur + centers[last].dist(centers[next]);
                if cand < dp[nmask * n + next] {
                    dp[nmask * n + next] = cand;
                    parent[nmask * n + next] = last;
                }
            }
        }
    }
    let full_mask = full - 1;
    let mut best_end = 0;
    for i in 1..n {
        if dp[full_mask * n + i] < dp[full_mask * n + best_end] {
            best_end = i;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full_mask;
    let mut node = best_end;
    loop {
        order.push(node);
        let prev = parent[mask * n + node];
        if prev == usize::MAX {
            break;
        }
        mask &= !(1 << node);
        node = prev;
    }
    order.reverse();
    order
}

fn nearest_neighbor_path(centers: &[Point]) -> Vec<usize> {
    let n = centers.len();
    // start from the point farthest from the centroid (a likely endpoint)
    let centroid = centers
        .iter()
        .fold(Point::new(0.0, 0.0), |acc, &p| acc + p)
        * (1.0 / n as f64);
    let start = (0..n)
        .max_by(|&a, &b| {
            centers[a]
                .dist(centroid)
                .partial_cmp(&centers[b].dist(centroid))
                .unwrap()
        })
        .unwrap_or(0);
    let mut order = vec![start];
    let mut used = vec![false; n];
    used[start] = true;
    while order.len() < n {
        let last = *order.last().unwrap();
        let next = (0..n)
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                (centers[last].dist(centers[a]), a)
                    .partial_cmp(&(centers[last].dist(centers[b]), b))
                    .unwrap()
            })
            .unwrap();
        used[next] = true;
        order.push(next);
    }
    order
}

fn two_opt(mut order: Vec<usize>, centers: &[Point]) -> Vec<usize> {
    let n = order.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in (i + 1)..n {
                let mut cand = order.clone();
                cand[i..=j].reverse();
                if path_length(&cand, centers) + 1e-12 < path_length(&order, centers) {
                    order = cand;
                    improved = true;
                }
            }
        }
    }
    order
}

/// Polygon boundary of an ordered component chain: top mid-points in order,
/// then bottom mid-points in reverse. The first component's across-axis is
/// oriented toward the top of the scene; every later axis stays
/// sign-consistent with its predecessor so near-vertical chains cannot
/// flip sides mid-instance. A single component contributes its four
/// corners.
pub fn generate_boundary(ordered: &[usize], comps: &[TextComponent]) -> Vec<Point> {
    if ordered.len() == 1 {
        return crate::geometry::component_corners(&comps[ordered[0]]).to_vec();
    }
    let mut top = Vec::with_capacity(ordered.len());
    let mut bottom = Vec::with_capacity(ordered.len());
    let mut prev_axis: Option<Point> = None;
    for &i in ordered {
        let c = &comps[i];
        let mut axis = c.height_axis();
        match prev_axis {
            None => {
                // seed toward the scene's top side (image y decreases
                // upward); break exact horizontals toward positive x
                if axis.y > 0.0 || (axis.y == 0.0 && axis.x < 0.0) {
                    axis = axis * -1.0;
                }
            }
            Some(prev) => {
                if axis.dot(prev) < 0.0 {
                    axis = axis * -1.0;
                }
            }
        }
        prev_axis = Some(axis);
        top.push(c.center() + axis * (c.h / 2.0));
        bottom.push(c.center() - axis * (c.h / 2.0));
    }
    let mut boundary = top;
    boundary.extend(bottom.into_iter().rev());
    boundary
}

/// Smallest circumscribed rotated rectangle of the boundary shrunk by 5%
/// about its centroid.
pub fn to_quad(boundary: &[Point]) -> Result<[Point; 4]> {
    if boundary.len() < 3 || polygon::area(boundary) <= 1e-12 {
        return Err(DrrgError::Geometry(
            "degenerate boundary polygon has no circumscribed rectangle".into(),
        ));
    }
    let shrunk = polygon::scale_about_centroid(boundary, 0.95);
    Ok(polygon::min_area_rect(&shrunk))
}

/// Full detection pipeline over scored components. Clusters below
/// `min_cluster` survive only when their lone component clears the solo
/// score gate.
pub fn detect(
    comps: &[TextComponent],
    model: &GcnModel,
    provider: &FeatureProvider,
    graph_cfg: &GraphConfig,
    embed_cfg: &EmbeddingConfig,
    params: &DetectParams,
) -> Result<Vec<DetectedInstance>> {
    let scored = score_filter(comps, params.score_threshold);
    let kept = locality_aware_nms(&scored, params.nms_iou, params.nms_merge);
    if kept.is_empty() {
        return Ok(Vec::new());
    }
    if kept.len() == 1 {
        let mut out = Vec::new();
        push_cluster(&mut out, &[0], &kept, params)?;
        return Ok(out);
    }
    let links = collect_link_scores(&kept, model, provider, graph_cfg, embed_cfg)?;
    let clusters = bfs_cluster(&links, params.link_threshold, kept.len());
    let mut out = Vec::new();
    for cluster in clusters {
        push_cluster(&mut out, &cluster, &kept, params)?;
    }
    Ok(out)
}

/// Ordered boundary of a cluster with a safety net: degenerate chains
/// (noise-induced zigzags) fall back to the convex hull of the member
/// corners, which is always a simple polygon.
pub fn cluster_boundary(ordered: &[usize], comps: &[TextComponent]) -> Vec<Point> {
    let boundary = generate_boundary(ordered, comps);
    if polygon::is_simple(&boundary) {
        return boundary;
    }
    let corners: Vec<Point> = ordered
        .iter()
        .flat_map(|&i| crate::geometry::component_corners(&comps[i]))
        .collect();
    polygon::convex_hull(&corners)
}

fn push_cluster(
    out: &mut Vec<DetectedInstance>,
    cluster: &[usize],
    comps: &[TextComponent],
    params: &DetectParams,
) -> Result<()> {
    if cluster.len() < params.min_cluster {
        let solo_ok = cluster.len() == 1 && comps[cluster[0]].score >= params.solo_score;
        if !solo_ok {
            return Ok(());
        }
    }
    let ordered = order_components(cluster, comps);
    let boundary = cluster_boundary(&ordered, comps);
    let quad = if params.emit_quads {
        Some(to_quad(&boundary)?)
    } else {
        None
    };
    let score =
        ordered.iter().map(|&i| comps[i].score).sum::<f64>() / ordered.len() as f64;
    out.push(DetectedInstance {
        components: ordered,
        boundary,
        quad,
        score,
    });
    Ok(())
}
