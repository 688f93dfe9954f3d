//! Synthetic arbitrary-shape text scenes and derived ground truth:
//! instances with top/bottom chains, ordered rectangular components, text
//! center regions, link labels, and a proposal-noise model.
//!
//! Scenes are deterministic per `(config, seed)` so every downstream stage
//! can be re-run byte-identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::geometry::{
    assign_top_bottom, math_angle, normalize_angle, width_from_height, Point, TextComponent,
};
use crate::polygon;

/// One ground-truth text instance: closed boundary plus the ordered
/// top/bottom point chains it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextInstancePoly {
    pub id: u32,
    pub boundary: Vec<Point>,
    pub top: Vec<Point>,
    pub bottom: Vec<Point>,
}

/// A full synthetic scene: dimensions, instances, and the ground-truth
/// component list (each component labeled with its instance id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    pub instances: Vec<TextInstancePoly>,
    pub components: Vec<TextComponent>,
}

/// Text center region: the shrunken, dilated band around the center line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcrRegion {
    pub polygon: Vec<Point>,
    pub center_line: Vec<Point>,
}

impl TcrRegion {
    /// True when shrinking consumed the whole center line.
    pub fn is_empty(&self) -> bool {
        self.polygon.is_empty()
    }
}

/// Centerline families the generator can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterlineFamily {
    Line,
    Arc,
    Sine,
}

/// Generator parameters. Lengths and heights are pixels; gap and amplitude
/// ranges are fractions of the instance height.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: f64,
    pub height: f64,
    pub instance_count: (usize, usize),
    pub families: Vec<CenterlineFamily>,
    pub height_range: (f64, f64),
    pub length_range: (f64, f64),
    /// Range of the base reading direction, radians about horizontal.
    pub direction_range: (f64, f64),
    pub arc_turn_range: (f64, f64),
    pub sine_amplitude_range: (f64, f64),
    pub taper: f64,
    pub jitter: f64,
    pub margin: f64,
    pub adjacent_pair_prob: f64,
    pub adjacent_gap_range: (f64, f64),
    pub w_min: f64,
    pub w_max: f64,
    pub overlap_factor: f64,
    pub max_retries: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 512.0,
            height: 512.0,
            instance_count: (3, 6),
            families: vec![
                CenterlineFamily::Line,
                CenterlineFamily::Arc,
                CenterlineFamily::Sine,
            ],
            height_range: (16.0, 30.0),
            length_range: (100.0, 220.0),
            direction_range: (-0.8, 0.8),
            arc_turn_range: (0.6, 2.0),
            sine_amplitude_range: (0.3, 1.0),
            taper: 0.2,
            jitter: 0.3,
            margin: 40.0,
            adjacent_pair_prob: 0.35,
            adjacent_gap_range: (0.25, 0.60),
            w_min: 8.0,
            w_max: 24.0,
            overlap_factor: 1.0,
            max_retries: 500,
        }
    }
}

impl SceneConfig {
    /// Adversarial preset: every instance is curved and spawns a parallel
    /// twin at a gap well below the component height, the regime where
    /// distance-threshold grouping merges neighbors.
    pub fn adversarial() -> Self {
        Self {
            instance_count: (2, 3),
            families: vec![CenterlineFamily::Arc, CenterlineFamily::Sine],
            adjacent_pair_prob: 1.0,
            adjacent_gap_range: (0.08, 0.16),
            ..Self::default()
        }
    }
}

/// Proposal-noise model applied to ground-truth components. Sigmas for
/// center and height are relative to the component height; theta sigma is
/// radians. Spurious components are placed uniformly in background regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_center: f64,
    pub sigma_height: f64,
    pub sigma_theta: f64,
    pub drop_rate: f64,
    pub spurious_rate: f64,
    pub score_sigma: f64,
    pub spurious_score_range: (f64, f64),
    pub spurious_height_range: (f64, f64),
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_center: 0.06,
            sigma_height: 0.06,
            sigma_theta: 0.06,
            drop_rate: 0.02,
            spurious_rate: 0.03,
            score_sigma: 0.12,
            spurious_score_range: (0.3, 0.85),
            spurious_height_range: (10.0, 36.0),
            w_min: 8.0,
            w_max: 24.0,
        }
    }
}

impl NoiseModel {
    /// The identity model: perturbation is a no-op.
    pub fn none() -> Self {
        Self {
            sigma_center: 0.0,
            sigma_height: 0.0,
            sigma_theta: 0.0,
            drop_rate: 0.0,
            spurious_rate: 0.0,
            score_sigma: 0.0,
            ..Self::default()
        }
    }
}

// --- centerline sampling -------------------------------------------------

struct Polyline {
    points: Vec<Point>,
    heights: Vec<f64>,
    cum: Vec<f64>,
}

impl Polyline {
    fn new(points: Vec<Point>, heights: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..points.len() {
            acc += points[i].dist(points[i - 1]);
            cum.push(acc);
        }
        Self {
            points,
            heights,
            cum,
        }
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    fn segment_at(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.length());
        // linear scan; chains are short
        for i in 1..self.cum.len() {
            if s <= self.cum[i] {
                let seg = self.cum[i] - self.cum[i - 1];
                let t = if seg > 0.0 {
                    (s - self.cum[i - 1]) / seg
                } else {
                    0.0
                };
                return (i - 1, t);
            }
        }
        (self.cum.len().saturating_sub(2), 1.0)
    }

    fn point_at(&self, s: f64) -> Point {
        let (i, t) = self.segment_at(s);
        self.points[i] + (self.points[i + 1] - self.points[i]) * t
    }

    fn height_at(&self, s: f64) -> f64 {
        let (i, t) = self.segment_at(s);
        self.heights[i] + (self.heights[i + 1] - self.heights[i]) * t
    }
}

fn chain_midline(inst: &TextInstancePoly) -> Result<Polyline> {
    if inst.top.len() != inst.bottom.len() {
        return Err(DrrgError::InvalidArgument(format!(
            "instance {} chains differ in length: {} vs {}",
            inst.id,
            inst.top.len(),
            inst.bottom.len()
        )));
    }
    if inst.top.len() < 2 {
        return Err(DrrgError::InvalidArgument(format!(
            "instance {} chains need at least 2 points",
            inst.id
        )));
    }
    let mids: Vec<Point> = inst
        .top
        .iter()
        .zip(&inst.bottom)
        .map(|(&t, &b)| (t + b) * 0.5)
        .collect();
    let heights: Vec<f64> = inst
        .top
        .iter()
        .zip(&inst.bottom)
        .map(|(&t, &b)| t.dist(b))
        .collect();
    Ok(Polyline::new(mids, heights))
}

/// Interpolated top-minus-bottom direction at arc length `s`.
fn vertex_vector_at(inst: &TextInstancePoly, line: &Polyline, s: f64) -> Point {
    let (i, t) = line.segment_at(s);
    let v0 = inst.top[i] - inst.bottom[i];
    let v1 = inst.top[i + 1] - inst.bottom[i + 1];
    v0 + (v1 - v0) * t
}

// --- operations ----------------------------------------------------------

/// Tile the instance center line with ordered components: local height from
/// the chains, width from the clamped linear law, consecutive tiles
/// abutting (stride = w).
pub fn divide_instance(
    inst: &TextInstancePoly,
    w_min: f64,
    w_max: f64,
) -> Result<Vec<TextComponent>> {
    divide_instance_with_stride(inst, w_min, w_max, 1.0)
}

/// `divide_instance` with a configurable stride multiplier; 1.0 means
/// abutting tiles, below 1.0 the tiles overlap.
pub fn divide_instance_with_stride(
    inst: &TextInstancePoly,
    w_min: f64,
    w_max: f64,
    overlap_factor: f64,
) -> Result<Vec<TextComponent>> {
    if overlap_factor <= 0.0 {
        return Err(DrrgError::InvalidArgument(
            "overlap factor must be positive".into(),
        ));
    }
    let line = chain_midline(inst)?;
    let total = line.length();
    if total <= 0.0 {
        return Err(DrrgError::InvalidArgument(format!(
            "instance {} has a zero-length center line",
            inst.id
        )));
    }

    // Width at the tile center depends on the center position itself;
    // iterate the fixed point w = width(h(s + w/2)).
    let settle_width = |s: f64| -> Result<f64> {
        let mut w = width_from_height(line.height_at(s), w_min, w_max)?;
        for _ in 0..20 {
            let next = width_from_height(line.height_at(s + w / 2.0), w_min, w_max)?;
            if (next - w).abs() < 1e-9 {
                return Ok(next);
            }
            w = next;
        }
        Ok(w)
    };

    let make_component = |center_s: f64| -> Result<TextComponent> {
        let h = line.height_at(center_s);
        let w = width_from_height(h, w_min, w_max)?;
        let center = line.point_at(center_s);
        let v = vertex_vector_at(inst, &line, center_s);
        let theta = normalize_angle(math_angle(v) - std::f64::consts::FRAC_PI_2);
        Ok(TextComponent::new(center.x, center.y, h, w, theta)?
            .with_instance(inst.id))
    };

    let mut comps = Vec::new();
    let mut s = 0.0;
    loop {
        let w = settle_width(s)?;
        if s + w > total + 1e-9 {
            break;
        }
        comps.push(make_component(s + w / 2.0)?);
        s += w * overlap_factor;
    }
    if comps.is_empty() {
        // Instance shorter than one component width: one tile at the middle.
        comps.push(make_component(total / 2.0)?);
    }
    Ok(comps)
}

/// Text center region: the midpoint chain with both ends shrunk by half the
/// local component width, dilated transversally by 0.3 of the local height.
pub fn extract_tcr(inst: &TextInstancePoly, w_min: f64, w_max: f64) -> Result<TcrRegion> {
    let line = chain_midline(inst)?;
    let total = line.length();
    if total <= 0.0 {
        return Err(DrrgError::InvalidArgument(format!(
            "instance {} has a zero-length center line",
            inst.id
        )));
    }
    let w_start = width_from_height(line.height_at(0.0), w_min, w_max)?;
    let w_end = width_from_height(line.height_at(total), w_min, w_max)?;
    let lo = 0.5 * w_start;
    let hi = total - 0.5 * w_end;
    if lo >= hi {
        return Ok(TcrRegion {
            polygon: Vec::new(),
            center_line: Vec::new(),
        });
    }

    let mut stations = vec![lo];
    for (&s, _) in line.cum.iter().zip(&line.points) {
        if s > lo + 1e-9 && s < hi - 1e-9 {
            stations.push(s);
        }
    }
    stations.push(hi);

    let mut center_line = Vec::with_capacity(stations.len());
    let mut up = Vec::with_capacity(stations.len());
    let mut down = Vec::with_capacity(stations.len());
    for &s in &stations {
        let m = line.point_at(s);
        let v = vertex_vector_at(inst, &line, s);
        let n = v.norm();
        if n <= 0.0 {
            return Err(DrrgError::InvalidArgument(format!(
                "instance {} has coincident top/bottom points",
                inst.id
            )));
        }
        let unit = v * (1.0 / n);
        let half = 0.3 * line.height_at(s);
        center_line.push(m);
        up.push(m + unit * half);
        down.push(m - unit * half);
    }
    let mut polygon = up;
    polygon.extend(down.into_iter().rev());
    Ok(TcrRegion {
        polygon,
        center_line,
    })
}

/// Ground-truth pairwise link labels: 1 iff both components carry the same
/// instance id.
pub fn link_labels(comps: &[TextComponent]) -> impl Fn(usize, usize) -> u8 + '_ {
    move |i, j| match (comps[i].instance_id, comps[j].instance_id) {
        (Some(a), Some(b)) if a == b => 1,
        _ => 0,
    }
}

// --- scene generation ----------------------------------------------------

struct InstanceDraft {
    top: Vec<Point>,
    bottom: Vec<Point>,
    boundary: Vec<Point>,
    paired_with: Option<usize>,
}

fn rot90(v: Point) -> Point {
    Point::new(v.y, -v.x)
}

fn point_polygon_distance(p: Point, poly: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        best = best.min(polygon::segment_point_distance(a, b, p));
    }
    best
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Centerline sample points plus per-sample unit normals.
fn sample_centerline(
    rng: &mut ChaCha8Rng,
    cfg: &SceneConfig,
    family: CenterlineFamily,
    length: f64,
    height: f64,
    origin: Point,
    direction: f64,
    amplitude_limit: f64,
) -> Vec<Point> {
    let segments = ((length / 6.0).ceil() as usize).max(8);
    let dir = Point::new(direction.cos(), -direction.sin());
    let nrm = rot90(dir);
    let mut pts = Vec::with_capacity(segments + 1);
    match family {
        CenterlineFamily::Line => {
            for k in 0..=segments {
                let t = length * (k as f64 / segments as f64 - 0.5);
                pts.push(origin + dir * t);
            }
        }
        CenterlineFamily::Arc => {
            let turn = sample_range(rng, cfg.arc_turn_range);
            let radius = (length / turn).max(height * 2.5);
            let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let center = origin + nrm * (radius * side);
            let span = length / radius;
            for k in 0..=segments {
                let a = span * (k as f64 / segments as f64 - 0.5);
                let (sa, ca) = a.sin_cos();
                // rotate the origin about the arc center
                let rel = origin - center;
                let rot = Point::new(ca * rel.x - side * sa * rel.y, side * sa * rel.x + ca * rel.y);
                pts.push(center + rot);
            }
        }
        CenterlineFamily::Sine => {
            let cycles = sample_range(rng, (0.75, 1.5));
            let omega = 2.0 * std::f64::consts::PI * cycles / length;
            let curvature_cap = 0.5 / (omega * omega * amplitude_limit.max(1.0));
            let amp = (sample_range(rng, cfg.sine_amplitude_range) * height).min(curvature_cap);
            let phase = sample_range(rng, (0.0, 2.0 * std::f64::consts::PI));
            for k in 0..=segments {
                let t = length * (k as f64 / segments as f64 - 0.5);
                let offset = amp * (omega * t + phase).sin();
                pts.push(origin + dir * t + nrm * offset);
            }
        }
    }
    pts
}

fn local_normals(pts: &[Point]) -> Vec<Point> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i == 0 { pts[0] } else { pts[i - 1] };
        let b = if i + 1 == n { pts[n - 1] } else { pts[i + 1] };
        let t = b - a;
        let len = t.norm();
        let unit = if len > 0.0 { t * (1.0 / len) } else { Point::new(1.0, 0.0) };
        out.push(rot90(unit));
    }
    out
}

fn build_chains(
    centerline: &[Point],
    normals: &[Point],
    heights: &[f64],
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Point>, Vec<Point>) {
    let gauss = Normal::new(0.0, jitter.max(1e-12)).unwrap();
    let mut a = Vec::with_capacity(centerline.len());
    let mut b = Vec::with_capacity(centerline.len());
    for ((&p, &n), &h) in centerline.iter().zip(normals).zip(heights) {
        let mut pa = p + n * (h / 2.0);
        let mut pb = p - n * (h / 2.0);
        if jitter > 0.0 {
            pa = pa + Point::new(gauss.sample(rng), gauss.sample(rng));
            pb = pb + Point::new(gauss.sample(rng), gauss.sample(rng));
        }
        a.push(pa);
        b.push(pb);
    }
    (a, b)
}

fn draft_from_chains(chain_a: Vec<Point>, chain_b: Vec<Point>) -> Result<InstanceDraft> {
    let sides = assign_top_bottom(&chain_a, &chain_b)?;
    let mut boundary = sides.top.clone();
    boundary.extend(sides.bottom.iter().rev());
    Ok(InstanceDraft {
        top: sides.top,
        bottom: sides.bottom,
        boundary,
        paired_with: None,
    })
}

fn draft_fits(cfg: &SceneConfig, draft: &InstanceDraft, pad: f64) -> bool {
    draft.boundary.iter().all(|p| {
        p.x >= pad && p.x <= cfg.width - pad && p.y >= pad && p.y <= cfg.height - pad
    }) && polygon::is_simple(&draft.boundary)
}

fn clear_of_others(
    draft: &InstanceDraft,
    placed: &[InstanceDraft],
    margin: f64,
    sibling: Option<usize>,
) -> bool {
    placed.iter().enumerate().all(|(i, other)| {
        let required = if Some(i) == sibling { 1e-6 } else { margin };
        polygon::polygon_distance(&draft.boundary, &other.boundary) >= required
    })
}

/// Generate a deterministic synthetic scene: instances from the configured
/// centerline families, pairwise separation by at least the margin (twins
/// excepted), and ground-truth components from `divide_instance`.
pub fn generate_scene(cfg: &SceneConfig, seed: u64) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = if cfg.instance_count.1 <= cfg.instance_count.0 {
        cfg.instance_count.0
    } else {
        rng.random_range(cfg.instance_count.0..=cfg.instance_count.1)
    };

    let mut placed: Vec<InstanceDraft> = Vec::new();

    let mut i = 0;
    while i < target {
        let mut ok = false;
        for _attempt in 0..cfg.max_retries {
            let family = cfg.families[rng.random_range(0..cfg.families.len())];
            let length = sample_range(&mut rng, cfg.length_range);
            let h0 = sample_range(&mut rng, cfg.height_range);
            let plan_twin = rng.random::<f64>() < cfg.adjacent_pair_prob;
            let pad = h0.max(cfg.w_max);
            let origin = Point::new(
                sample_range(&mut rng, (pad, (cfg.width - pad).max(pad))),
                sample_range(&mut rng, (pad, (cfg.height - pad).max(pad))),
            );
            let direction = sample_range(&mut rng, cfg.direction_range);
            let twin_allowance = if plan_twin { h0 * 2.2 } else { h0 * 0.8 };
            let centerline = sample_centerline(
                &mut rng,
                cfg,
                family,
                length,
                h0,
                origin,
                direction,
                twin_allowance,
            );
            let normals = local_normals(&centerline);

            let taper = sample_range(&mut rng, (0.0, cfg.taper))
                * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let heights: Vec<f64> = (0..centerline.len())
                .map(|k| {
                    let u = k as f64 / (centerline.len() - 1) as f64 - 0.5;
                    h0 * (1.0 + taper * u)
                })
                .collect();

            let (chain_a, chain_b) =
                build_chains(&centerline, &normals, &heights, cfg.jitter, &mut rng);
            let draft = match draft_from_chains(chain_a, chain_b) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let pad_fit = 0.5 * cfg.w_max.hypot(heights.iter().cloned().fold(0.0, f64::max)) + 1.0;
            if !draft_fits(cfg, &draft, pad_fit) || !clear_of_others(&draft, &placed, cfg.margin, None)
            {
                continue;
            }
            placed.push(draft);

            if plan_twin {
                let base = placed.len() - 1;
                let gap_frac = sample_range(&mut rng, cfg.adjacent_gap_range);
                let h_twin = h0 * sample_range(&mut rng, (0.9, 1.1));
                let offset = h0 / 2.0 + gap_frac * h0 + h_twin / 2.0;
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let twin_center: Vec<Point> = centerline
                    .iter()
                    .zip(&normals)
                    .map(|(&p, &n)| p + n * (offset * side))
                    .collect();
                let twin_normals = local_normals(&twin_center);
                let twin_heights = vec![h_twin; twin_center.len()];
                let (ta, tb) =
                    build_chains(&twin_center, &twin_normals, &twin_heights, cfg.jitter, &mut rng);
                if let Ok(mut twin) = draft_from_chains(ta, tb) {
                    let pad_twin = 0.5 * cfg.w_max.hypot(h_twin) + 1.0;
                    if draft_fits(cfg, &twin, pad_twin)
                        && clear_of_others(&twin, &placed, cfg.margin, Some(base))
                    {
                        twin.paired_with = Some(base);
                        placed.push(twin);
                        i += 1; // the twin counts toward the target
                    }
                }
            }
            ok = true;
            break;
        }
        if !ok {
            return Err(DrrgError::Generation(format!(
                "could not place instance {i} within {} retries (margin {} on {}x{} scene)",
                cfg.max_retries, cfg.margin, cfg.width, cfg.height
            )));
        }
        i += 1;
    }

    let mut instances = Vec::with_capacity(placed.len());
    let mut components = Vec::new();
    for (id, draft) in placed.into_iter().enumerate() {
        let inst = TextInstancePoly {
            id: id as u32,
            boundary: draft.boundary,
            top: draft.top,
            bottom: draft.bottom,
        };
        let comps =
            divide_instance_with_stride(&inst, cfg.w_min, cfg.w_max, cfg.overlap_factor)?;
        components.extend(comps);
        instances.push(inst);
    }

    let scene = Scene {
        width: cfg.width,
        height: cfg.height,
        instances,
        components,
    };
    validate_scene(&scene)?;
    Ok(scene)
}

/// Check the per-scene invariants: component centers inside their instance
/// boundary, all component corners inside the scene, simple boundaries.
pub fn validate_scene(scene: &Scene) -> Result<()> {
    for inst in &scene.instances {
        if inst.top.len() != inst.bottom.len() || inst.top.len() < 2 {
            return Err(DrrgError::Generation(format!(
                "instance {} has malformed chains",
                inst.id
            )));
        }
        if !polygon::is_simple(&inst.boundary) {
            return Err(DrrgError::Generation(format!(
                "instance {} boundary self-intersects",
                inst.id
            )));
        }
    }
    for (k, comp) in scene.components.iter().enumerate() {
        comp.validate()?;
        let id = comp.instance_id.ok_or_else(|| {
            DrrgError::Generation(format!("ground-truth component {k} lacks an instance id"))
        })?;
        let inst = scene
            .instances
            .iter()
            .find(|i| i.id == id)
            .ok_or_else(|| DrrgError::Generation(format!("component {k} references instance {id}")))?;
        if !polygon::point_in_polygon(comp.center(), &inst.boundary) {
            return Err(DrrgError::Generation(format!(
                "component {k} center lies outside instance {id}"
            )));
        }
        for corner in crate::geometry::component_corners(comp) {
            if corner.x < 0.0
                || corner.x >= scene.width
                || corner.y < 0.0
                || corner.y >= scene.height
            {
                return Err(DrrgError::Generation(format!(
                    "component {k} exceeds the scene bounds"
                )));
            }
        }
    }
    Ok(())
}

/// Apply the proposal-noise model to a scene's ground-truth components:
/// jitter, drops, re-scored survivors, and spurious components placed in
/// background regions. Deterministic per seed.
pub fn perturb_components(scene: &Scene, noise: &NoiseModel, seed: u64) -> Vec<TextComponent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let mut out = Vec::with_capacity(scene.components.len());

    for comp in &scene.components {
        if noise.drop_rate > 0.0 && rng.random::<f64>() < noise.drop_rate {
            continue;
        }
        let mut c = *comp;
        if noise.sigma_center > 0.0 {
            let s = noise.sigma_center * c.h;
            c.x += gauss.sample(&mut rng) * s;
            c.y += gauss.sample(&mut rng) * s;
        }
        if noise.sigma_height > 0.0 {
            let factor = (1.0 + gauss.sample(&mut rng) * noise.sigma_height).max(0.2);
            c.h *= factor;
            c.w = width_from_height(c.h, noise.w_min, noise.w_max).unwrap_or(c.w);
        }
        if noise.sigma_theta > 0.0 {
            let theta = c.theta() + gauss.sample(&mut rng) * noise.sigma_theta;
            c.cos_t = theta.cos();
            c.sin_t = theta.sin();
        }
        c.renormalize_angle();
        if noise.score_sigma > 0.0 {
            c.score = (1.0 - (gauss.sample(&mut rng) * noise.score_sigma).abs()).clamp(0.0, 1.0);
        }
        out.push(c);
    }

    if noise.spurious_rate > 0.0 && !scene.components.is_empty() {
        let lambda = noise.spurious_rate * scene.components.len() as f64;
        let count = Poisson::new(lambda.max(1e-12))
            .map(|d| d.sample(&mut rng) as usize)
            .unwrap_or(0);
        for _ in 0..count {
            for _try in 0..50 {
                let p = Point::new(
                    rng.random_range(0.0..scene.width),
                    rng.random_range(0.0..scene.height),
                );
                // background means clear of text, not flush against it
                let near_text = scene.instances.iter().any(|inst| {
                    polygon::point_in_polygon(p, &inst.boundary)
                        || point_polygon_distance(p, &inst.boundary) < 6.0
                });
                if near_text {
                    continue;
                }
                let h = sample_range(&mut rng, noise.spurious_height_range);
                let w = width_from_height(h, noise.w_min, noise.w_max).unwrap_or(noise.w_min);
                let theta =
                    sample_range(&mut rng, (-std::f64::consts::PI, std::f64::consts::PI));
                let score = sample_range(&mut rng, noise.spurious_score_range);
                if let Ok(c) = TextComponent::new(p.x, p.y, h, w, theta) {
                    out.push(c.with_score(score));
                }
                break;
            }
        }
    }
    out
}
