//! Polygon-level detection metrics (precision / recall / Hmean) and the
//! distance-threshold grouping baseline used for the ablation comparison.

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::geometry::{orientation_diff, Point, TextComponent};
use crate::inference::{bfs_cluster, LinkGraph};
use crate::polygon;

/// One scene's matching outcome at a fixed IoU threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub precision: f64,
    pub recall: f64,
    pub hmean: f64,
    /// `(prediction index, ground-truth index, IoU)` triples.
    pub matches: Vec<(usize, usize, f64)>,
    pub iou_threshold: f64,
    pub num_preds: usize,
    pub num_gts: usize,
}

/// Aggregate precision/recall/hmean pooled over scenes by match counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub precision: f64,
    pub recall: f64,
    pub hmean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_scene: Vec<MatchReport>,
    pub aggregate: AggregateReport,
}

pub fn hmean(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// IoU of two simple polygons; self-intersecting inputs are rejected.
pub fn polygon_iou(a: &[Point], b: &[Point]) -> Result<f64> {
    if !polygon::is_simple(a) || !polygon::is_simple(b) {
        return Err(DrrgError::Geometry(
            "polygon IoU requires simple (non self-intersecting) polygons".into(),
        ));
    }
    Ok(polygon::iou(a, b))
}

/// Greedy one-to-one matching by descending IoU among pairs at or above the
/// threshold.
pub fn match_instances(
    preds: &[Vec<Point>],
    gts: &[Vec<Point>],
    iou_threshold: f64,
) -> Result<MatchReport> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, pred) in preds.iter().enumerate() {
        for (gi, gt) in gts.iter().enumerate() {
            let iou = polygon_iou(pred, gt)?;
            if iou >= iou_threshold {
                pairs.push((iou, pi, gi));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut matches = Vec::new();
    for (iou, pi, gi) in pairs {
        if !pred_used[pi] && !gt_used[gi] {
            pred_used[pi] = true;
            gt_used[gi] = true;
            matches.push((pi, gi, iou));
        }
    }
    let matched = matches.len() as f64;
    let precision = if preds.is_empty() {
        0.0
    } else {
        matched / preds.len() as f64
    };
    let recall = if gts.is_empty() {
        0.0
    } else {
        matched / gts.len() as f64
    };
    Ok(MatchReport {
        precision,
        recall,
        hmean: hmean(precision, recall),
        matches,
        iou_threshold,
        num_preds: preds.len(),
        num_gts: gts.len(),
    })
}

/// Pool per-scene reports into one aggregate by summing match counts.
pub fn aggregate(reports: &[MatchReport]) -> AggregateReport {
    let matched: usize = reports.iter().map(|r| r.matches.len()).sum();
    let preds: usize = reports.iter().map(|r| r.num_preds).sum();
    let gts: usize = reports.iter().map(|r| r.num_gts).sum();
    let precision = if preds > 0 {
        matched as f64 / preds as f64
    } else {
        0.0
    };
    let recall = if gts > 0 {
        matched as f64 / gts as f64
    } else {
        0.0
    };
    AggregateReport {
        precision,
        recall,
        hmean: hmean(precision, recall),
    }
}

pub fn build_report(per_scene: Vec<MatchReport>) -> EvalReport {
    let aggregate = aggregate(&per_scene);
    EvalReport {
        per_scene,
        aggregate,
    }
}

/// Plain-text R/P/H table for a set of named aggregates.
pub fn render_table(rows: &[(&str, &AggregateReport)]) -> String {
    let mut out = String::from("method            R        P        H\n");
    for (name, agg) in rows {
        out.push_str(&format!(
            "{name:<16} {:>7.4}  {:>7.4}  {:>7.4}\n",
            agg.recall, agg.precision, agg.hmean
        ));
    }
    out
}

/// Heuristic grouping baseline: link two components when their centers are
/// closer than `distance_factor` times their mean height and their
/// orientations differ by less than 30 degrees, then take connected
/// components.
pub fn baseline_grouping(comps: &[TextComponent], distance_factor: f64) -> Vec<Vec<usize>> {
    let mut links = LinkGraph::new();
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            let dist = comps[i].center().dist(comps[j].center());
            let reach = distance_factor * 0.5 * (comps[i].h + comps[j].h);
            let angle = orientation_diff(comps[i].theta(), comps[j].theta());
            if dist < reach && angle < std::f64::consts::FRAC_PI_6 {
                links.observe(i, j, 1.0);
            }
        }
    }
    bfs_cluster(&links, 0.5, comps.len())
}
