//! Pivot-centered local graphs: nearest-neighbor node selection, the
//! two-hop structure, training-pivot filtering, and top-u adjacency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::geometry::TextComponent;
use crate::synth::link_labels;

/// Knobs of the local-graph construction: 8 one-hop neighbors, 4 two-hop
/// expansions per one-hop node, top-3 adjacency, and a 0.75 pivot-filter
/// threshold by default.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GraphConfig {
    pub knn_one_hop: usize,
    pub knn_two_hop: usize,
    pub u_nearest: usize,
    pub pivot_iou_threshold: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            knn_one_hop: 8,
            knn_two_hop: 4,
            u_nearest: 3,
            pivot_iou_threshold: 0.75,
        }
    }
}

/// A pivot-centered local graph. `nodes` holds component indices with the
/// pivot first, then one-hop neighbors by descending similarity, then
/// two-hop neighbors in discovery order. `one_hop` holds positions into
/// `nodes`; `labels`, when present, parallels `one_hop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGraph {
    pub pivot: usize,
    pub nodes: Vec<usize>,
    pub one_hop: Vec<usize>,
    pub adjacency: Vec<u8>,
    pub labels: Option<Vec<u8>>,
}

impl LocalGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// A graph needs at least one neighbor to be worth reasoning about.
    pub fn is_usable(&self) -> bool {
        self.nodes.len() >= 2
    }

    /// Component indices of the one-hop neighbors.
    pub fn one_hop_components(&self) -> Vec<usize> {
        self.one_hop.iter().map(|&pos| self.nodes[pos]).collect()
    }

    pub fn adjacency_at(&self, i: usize, j: usize) -> u8 {
        self.adjacency[i * self.nodes.len() + j]
    }
}

/// A set of local graphs over one shared component list.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub component_count: usize,
    pub graphs: Vec<LocalGraph>,
}

impl GraphBatch {
    pub fn new(component_count: usize, graphs: Vec<LocalGraph>) -> Result<Self> {
        for g in &graphs {
            if g.nodes.iter().any(|&n| n >= component_count) {
                return Err(DrrgError::InvalidArgument(format!(
                    "graph for pivot {} references a component outside the list",
                    g.pivot
                )));
            }
        }
        Ok(Self {
            component_count,
            graphs,
        })
    }
}

/// Similarity of two components relative to the scene diagonal scale:
/// `1 - ||centers|| / max(H, W)`.
pub fn euclidean_similarity(
    pivot: &TextComponent,
    node: &TextComponent,
    scene_w: f64,
    scene_h: f64,
) -> f64 {
    1.0 - pivot.center().dist(node.center()) / scene_w.max(scene_h)
}

/// Indices of the `k` nearest components to `from` (by center distance,
/// ties by ascending index), excluding `from` itself and anything in `skip`.
fn k_nearest(
    comps: &[TextComponent],
    from: usize,
    k: usize,
    skip: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let origin = comps[from].center();
    let mut candidates: Vec<(f64, usize)> = comps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != from && !skip(i))
        .map(|(i, c)| (origin.dist(c.center()), i))
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.truncate(k);
    candidates.into_iter().map(|(_, i)| i).collect()
}

/// Build the local graph around `pivot`: up to `knn_one_hop` nearest
/// neighbors as the one-hop ring, then each one-hop node contributes its
/// `knn_two_hop` nearest neighbors (minus the pivot, the one-hop ring, and
/// duplicates) in discovery order.
pub fn build_local_graph(
    pivot: usize,
    comps: &[TextComponent],
    cfg: &GraphConfig,
) -> LocalGraph {
    let one_hop_comps = k_nearest(comps, pivot, cfg.knn_one_hop, |_| false);

    let mut nodes = Vec::with_capacity(1 + one_hop_comps.len() * (1 + cfg.knn_two_hop));
    nodes.push(pivot);
    nodes.extend(&one_hop_comps);

    for &n in &one_hop_comps {
        for cand in k_nearest(comps, n, cfg.knn_two_hop, |_| false) {
            if cand != pivot && !nodes.contains(&cand) {
                nodes.push(cand);
            }
        }
    }

    let one_hop: Vec<usize> = (1..=one_hop_comps.len()).collect();
    let adjacency = adjacency_matrix(&nodes, comps, cfg.u_nearest);
    LocalGraph {
        pivot,
        nodes,
        one_hop,
        adjacency,
        labels: None,
    }
}

/// Row-major binary adjacency over the graph nodes: each node links to its
/// `u` nearest graph members (ties by component index), then the matrix is
/// symmetrized by union. The diagonal stays zero; self-loops are added by
/// the Laplacian.
pub fn adjacency_matrix(nodes: &[usize], comps: &[TextComponent], u: usize) -> Vec<u8> {
    let n = nodes.len();
    let mut a = vec![0u8; n * n];
    for (i, &ci) in nodes.iter().enumerate() {
        let origin = comps[ci].center();
        let mut ranked: Vec<(f64, usize, usize)> = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &cj)| (origin.dist(comps[cj].center()), cj, j))
            .collect();
        ranked.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        for &(_, _, j) in ranked.iter().take(u) {
            a[i * n + j] = 1;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let m = a[i * n + j].max(a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    a
}

/// IoU of the one-hop component sets of two local graphs.
pub fn graph_iou(a: &LocalGraph, b: &LocalGraph) -> f64 {
    let sa = a.one_hop_components();
    let sb = b.one_hop_components();
    if sa.is_empty() && sb.is_empty() {
        return 0.0;
    }
    let inter = sa.iter().filter(|i| sb.contains(i)).count();
    let union = sa.len() + sb.len() - inter;
    inter as f64 / union as f64
}

/// Labeled graphs pivoted at components that belong to no instance
/// (spurious proposals). Their one-hop labels are all zero; including them
/// teaches the classifier that background components link to nothing,
/// which inference relies on when looping over every component as a pivot.
pub fn spurious_pivot_graphs(comps: &[TextComponent], cfg: &GraphConfig) -> Vec<LocalGraph> {
    let mut out = Vec::new();
    for (pivot, c) in comps.iter().enumerate() {
        if c.instance_id.is_some() {
            continue;
        }
        let mut g = build_local_graph(pivot, comps, cfg);
        if !g.is_usable() {
            continue;
        }
        g.labels = Some(vec![0; g.one_hop.len()]);
        out.push(g);
    }
    out
}

/// Training pivots with labeled one-hop rings: iterate the components of
/// each instance in index order and keep a pivot only when its graph
/// overlaps every already-kept graph of the same instance by less than
/// the threshold.
pub fn select_training_pivots(
    comps: &[TextComponent],
    cfg: &GraphConfig,
) -> Vec<LocalGraph> {
    let mut by_instance: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        if let Some(id) = c.instance_id {
            by_instance.entry(id).or_default().push(i);
        }
    }

    let label_fn = link_labels(comps);
    let mut kept: Vec<LocalGraph> = Vec::new();
    for (_, members) in by_instance {
        let first_kept = kept.len();
        for &pivot in &members {
            let mut g = build_local_graph(pivot, comps, cfg);
            if !g.is_usable() {
                continue;
            }
            let redundant = kept[first_kept..]
                .iter()
                .any(|k| graph_iou(k, &g) >= cfg.pivot_iou_threshold);
            if redundant {
                continue;
            }
            let labels = g
                .one_hop_components()
                .iter()
                .map(|&q| label_fn(pivot, q))
                .collect();
            g.labels = Some(labels);
            kept.push(g);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TextComponent;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comp_at(x: f64, y: f64) -> TextComponent {
        TextComponent::new(x, y, 20.0, 10.0, 0.0).unwrap()
    }

    fn grid(nx: usize, ny: usize, step: f64) -> Vec<TextComponent> {
        let mut v = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                v.push(comp_at(i as f64 * step, j as f64 * step));
            }
        }
        v
    }

    /// Independent re-derivation of the hop rules with naive repeated
    /// minimum extraction instead of sorting.
    fn oracle_nodes(pivot: usize, comps: &[TextComponent], cfg: &GraphConfig) -> Vec<usize> {
        let naive_knn = |from: usize, k: usize| -> Vec<usize> {
            let mut remaining: Vec<usize> =
                (0..comps.len()).filter(|&i| i != from).collect();
            let mut picked = Vec::new();
            while picked.len() < k && !remaining.is_empty() {
                let mut best = 0;
                for (slot, &i) in remaining.iter().enumerate() {
                    let d_i = comps[from].center().dist(comps[i].center());
                    let d_b = comps[from].center().dist(comps[remaining[best]].center());
                    if d_i < d_b || (d_i == d_b && i < remaining[best]) {
                        best = slot;
                    }
                }
                picked.push(remaining.remove(best));
            }
            picked
        };
        let one = naive_knn(pivot, cfg.knn_one_hop);
        let mut nodes = vec![pivot];
        nodes.extend(&one);
        for &n in &one {
            for cand in naive_knn(n, cfg.knn_two_hop) {
                if cand != pivot && !nodes.contains(&cand) {
                    nodes.push(cand);
                }
            }
        }
        nodes
    }

    #[test]
    fn similarity_trivial_cases() {
        let a = comp_at(0.0, 0.0);
        assert_eq!(euclidean_similarity(&a, &a, 640.0, 480.0), 1.0);
        let b = comp_at(640.0, 0.0);
        assert_eq!(euclidean_similarity(&a, &b, 640.0, 480.0), 0.0);
        let c = comp_at(320.0, 0.0);
        assert_eq!(euclidean_similarity(&a, &c, 640.0, 640.0), 0.5);
    }

    #[test]
    fn nine_components_exhaust_one_hop() {
        let comps = grid(3, 3, 30.0);
        let g = build_local_graph(4, &comps, &GraphConfig::default());
        assert_eq!(g.one_hop.len(), 8);
        assert!(g.nodes.len() == 9);
        assert_eq!(g.nodes[0], 4);
    }

    #[test]
    fn three_components_underpopulated() {
        let comps = vec![comp_at(0.0, 0.0), comp_at(30.0, 0.0), comp_at(60.0, 0.0)];
        let g = build_local_graph(0, &comps, &GraphConfig::default());
        assert_eq!(g.one_hop.len(), 2);
        assert!(g.is_usable());
    }

    #[test]
    fn single_component_graph_is_unusable() {
        let comps = vec![comp_at(0.0, 0.0)];
        let g = build_local_graph(0, &comps, &GraphConfig::default());
        assert!(!g.is_usable());
        assert!(g.one_hop.is_empty());
    }

    #[test]
    fn grid_nodes_match_hop_oracle() {
        let comps = grid(6, 5, 25.0);
        let cfg = GraphConfig::default();
        for pivot in [0, 7, 14, 29] {
            let g = build_local_graph(pivot, &comps, &cfg);
            assert_eq!(g.nodes, oracle_nodes(pivot, &comps, &cfg), "pivot {pivot}");
        }
    }

    #[test]
    fn two_hop_disjoint_from_one_hop_and_pivot_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let comps: Vec<TextComponent> = (0..40)
                .map(|_| comp_at(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)))
                .collect();
            let g = build_local_graph(3, &comps, &GraphConfig::default());
            let one: Vec<usize> = g.one_hop_components();
            for (pos, &n) in g.nodes.iter().enumerate() {
                if pos > g.one_hop.len() {
                    assert!(!one.contains(&n), "two-hop node in one-hop ring");
                }
            }
            assert_eq!(
                g.nodes.iter().filter(|&&n| n == g.pivot).count(),
                1,
                "pivot must appear exactly once"
            );
            let mut sorted = g.nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), g.nodes.len(), "duplicate nodes");
        }
    }

    #[test]
    fn ranking_invariant_under_uniform_rescale() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let comps: Vec<TextComponent> = (0..30)
            .map(|_| comp_at(rng.random_range(0.0..400.0), rng.random_range(0.0..400.0)))
            .collect();
        let scaled: Vec<TextComponent> = comps
            .iter()
            .map(|c| {
                let mut s = *c;
                s.x *= 3.5;
                s.y *= 3.5;
                s
            })
            .collect();
        let cfg = GraphConfig::default();
        for pivot in 0..comps.len() {
            let a = build_local_graph(pivot, &comps, &cfg);
            let b = build_local_graph(pivot, &scaled, &cfg);
            assert_eq!(a.nodes, b.nodes);
        }
    }

    #[test]
    fn graph_iou_cases() {
        let mk = |pivot: usize, one_hop_comps: Vec<usize>| {
            let n = one_hop_comps.len() + 1;
            let mut nodes = vec![pivot];
            nodes.extend(one_hop_comps);
            LocalGraph {
                pivot,
                nodes,
                one_hop: (1..n).collect(),
                adjacency: vec![0; n * n],
                labels: None,
            }
        };
        let a = mk(0, vec![1, 2, 3, 4, 5, 6, 7, 8]);
        let b = mk(9, vec![1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(graph_iou(&a, &b), 1.0);
        let c = mk(9, vec![10, 11, 12, 13, 14, 15, 16, 17]);
        assert_eq!(graph_iou(&a, &c), 0.0);
        // 4 shared between two size-8 rings: 4 / 12
        let d = mk(9, vec![1, 2, 3, 4, 10, 11, 12, 13]);
        assert!((graph_iou(&a, &d) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(graph_iou(&d, &a), graph_iou(&a, &d));
    }

    #[test]
    fn coincident_neighborhoods_keep_one_pivot() {
        // One straight instance of 9 abutting components: every pivot sees
        // the same 8 one-hop neighbors, so only the first survives.
        let comps: Vec<TextComponent> = (0..9)
            .map(|k| comp_at(k as f64 * 10.0, 0.0).with_instance(0))
            .collect();
        let kept = select_training_pivots(&comps, &GraphConfig::default());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].pivot, 0);
        assert_eq!(kept[0].labels.as_deref(), Some(&[1u8; 8][..]));
    }

    #[test]
    fn far_instances_each_keep_a_pivot() {
        let mut comps: Vec<TextComponent> = (0..6)
            .map(|k| comp_at(k as f64 * 10.0, 0.0).with_instance(0))
            .collect();
        comps.extend((0..6).map(|k| comp_at(k as f64 * 10.0, 400.0).with_instance(1)));
        let kept = select_training_pivots(&comps, &GraphConfig::default());
        let insts: Vec<Option<u32>> = kept.iter().map(|g| comps[g.pivot].instance_id).collect();
        assert!(insts.contains(&Some(0)));
        assert!(insts.contains(&Some(1)));
    }

    #[test]
    fn long_line_matches_sequential_filter_oracle() {
        let comps: Vec<TextComponent> = (0..40)
            .map(|k| comp_at(k as f64 * 10.0, 0.0).with_instance(0))
            .collect();
        let cfg = GraphConfig::default();
        let kept = select_training_pivots(&comps, &cfg);

        // Independent sequential filter using HashSet-based IoU.
        use std::collections::HashSet;
        let mut oracle: Vec<(usize, HashSet<usize>)> = Vec::new();
        for pivot in 0..comps.len() {
            let g = build_local_graph(pivot, &comps, &cfg);
            let ring: HashSet<usize> = g.one_hop_components().into_iter().collect();
            let ok = oracle.iter().all(|(_, other)| {
                let inter = ring.intersection(other).count() as f64;
                let union = ring.union(other).count() as f64;
                inter / union < cfg.pivot_iou_threshold
            });
            if ok {
                oracle.push((pivot, ring));
            }
        }
        let kept_pivots: Vec<usize> = kept.iter().map(|g| g.pivot).collect();
        let oracle_pivots: Vec<usize> = oracle.iter().map(|&(p, _)| p).collect();
        assert_eq!(kept_pivots, oracle_pivots);

        // overlap guarantee on the kept set itself
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                assert!(graph_iou(&kept[i], &kept[j]) < cfg.pivot_iou_threshold);
            }
        }
    }

    #[test]
    fn adjacency_two_nodes() {
        let comps = vec![comp_at(0.0, 0.0), comp_at(15.0, 0.0)];
        let a = adjacency_matrix(&[0, 1], &comps, 3);
        assert_eq!(a, vec![0, 1, 1, 0]);
    }

    #[test]
    fn adjacency_symmetric_zero_diagonal_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let comps: Vec<TextComponent> = (0..13)
                .map(|_| comp_at(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)))
                .collect();
            let nodes: Vec<usize> = (0..13).collect();
            let a = adjacency_matrix(&nodes, &comps, 3);
            for i in 0..13 {
                assert_eq!(a[i * 13 + i], 0);
                let row: u32 = (0..13).map(|j| a[i * 13 + j] as u32).sum();
                assert!(row >= 3, "symmetrization can only add edges");
                for j in 0..13 {
                    assert_eq!(a[i * 13 + j], a[j * 13 + i]);
                }
            }
        }
    }

    #[test]
    fn graph_batch_validates_indices() {
        let comps = grid(3, 3, 30.0);
        let g = build_local_graph(4, &comps, &GraphConfig::default());
        assert!(GraphBatch::new(comps.len(), vec![g.clone()]).is_ok());
        assert!(GraphBatch::new(3, vec![g]).is_err());
    }

    #[test]
    fn spurious_pivots_get_zero_labels() {
        let mut comps: Vec<TextComponent> = (0..5)
            .map(|k| comp_at(k as f64 * 10.0, 0.0).with_instance(0))
            .collect();
        comps.push(comp_at(25.0, 80.0)); // background, no instance
        let graphs = spurious_pivot_graphs(&comps, &GraphConfig::default());
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].pivot, 5);
        assert!(graphs[0]
            .labels
            .as_ref()
            .unwrap()
            .iter()
            .all(|&l| l == 0));
    }

    #[test]
    fn local_graph_debug_dump_schema() {
        let comps = grid(3, 3, 30.0);
        let g = build_local_graph(4, &comps, &GraphConfig::default());
        let json = serde_json::to_value(&g).unwrap();
        for key in ["pivot", "nodes", "one_hop", "adjacency", "labels"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        let back: LocalGraph = serde_json::from_value(json).unwrap();
        assert_eq!(back, g);
    }
}
