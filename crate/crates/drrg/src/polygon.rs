//! Polygon primitives shared by the geometry, synthesis, inference, and
//! evaluation modules: shoelace areas, convex clipping, general
//! intersection-over-union, hulls, and minimum-area enclosing rectangles.
//!
//! All routines work on plain vertex lists in image coordinates (y grows
//! downward). Orientation language below refers to the algebraic sign of the
//! shoelace sum, not the visual winding.

use crate::geometry::Point;

const EPS: f64 = 1e-12;

/// Signed shoelace area. Positive when the vertex order has a positive
/// shoelace sum.
pub fn signed_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

pub fn area(poly: &[Point]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid. Falls back to the vertex mean for degenerate polygons.
pub fn centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly);
    if a.abs() < 1e-12 {
        let n = poly.len().max(1) as f64;
        let (sx, sy) = poly
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        return Point::new(sx / n, sy / n);
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let w = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn ensure_positive(poly: &[Point]) -> Vec<Point> {
    if signed_area(poly) < 0.0 {
        poly.iter().rev().copied().collect()
    } else {
        poly.to_vec()
    }
}

/// Sutherland–Hodgman clip of an arbitrary `subject` polygon against a
/// convex `clip` polygon. Returns the clipped vertex list (possibly empty).
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let clip = ensure_positive(clip);
    let mut output: Vec<Point> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            return output;
        }
        let c1 = clip[i];
        let c2 = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let s = input[j];
            let e = input[(j + 1) % input.len()];
            let s_side = cross(c1, c2, s);
            let e_side = cross(c1, c2, e);
            let s_in = s_side >= 0.0;
            let e_in = e_side >= 0.0;
            if s_in && e_in {
                output.push(e);
            } else if s_in && !e_in {
                output.push(line_intersection(c1, c2, s, e));
            } else if !s_in && e_in {
                output.push(line_intersection(c1, c2, s, e));
                output.push(e);
            }
        }
    }
    output
}

fn line_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Point {
    let da = a2 - a1;
    let db = b2 - b1;
    let denom = da.x * db.y - da.y * db.x;
    if denom.abs() < EPS {
        return b1;
    }
    let t = ((b1.x - a1.x) * db.y - (b1.y - a1.y) * db.x) / denom;
    Point::new(a1.x + t * da.x, a1.y + t * da.y)
}

/// Intersection area of two convex polygons.
pub fn convex_intersection_area(a: &[Point], b: &[Point]) -> f64 {
    area(&clip_convex(&ensure_positive(a), b))
}

/// Intersection area of two simple polygons (convex or not).
///
/// Both polygons are decomposed into signed fan triangles about a common
/// origin; pairwise triangle overlaps accumulate with their orientation
/// signs, so regions outside the polygons cancel exactly.
pub fn intersection_area(a: &[Point], b: &[Point]) -> f64 {
    if a.len() < 3 || b.len() < 3 {
        return 0.0;
    }
    let mut o = Point::new(0.0, 0.0);
    for p in a.iter().chain(b.iter()) {
        o = o + *p;
    }
    o = o * (1.0 / (a.len() + b.len()) as f64);

    let mut total = 0.0;
    for i in 0..a.len() {
        let t1 = [o, a[i], a[(i + 1) % a.len()]];
        let s1 = signed_area(&t1);
        if s1.abs() < EPS {
            continue;
        }
        let t1p = if s1 > 0.0 { t1 } else { [t1[0], t1[2], t1[1]] };
        for j in 0..b.len() {
            let t2 = [o, b[j], b[(j + 1) % b.len()]];
            let s2 = signed_area(&t2);
            if s2.abs() < EPS {
                continue;
            }
            let t2p = if s2 > 0.0 { t2 } else { [t2[0], t2[2], t2[1]] };
            let inter = area(&clip_convex(&t1p, &t2p));
            total += s1.signum() * s2.signum() * inter;
        }
    }
    total.abs()
}

/// Intersection-over-union of two simple polygons. Inputs are assumed
/// pre-validated; degenerate unions yield 0.
pub fn iou(a: &[Point], b: &[Point]) -> f64 {
    let inter = intersection_area(a, b);
    let union = area(a) + area(b) - inter;
    if union <= EPS {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// True when no two non-adjacent edges intersect or touch.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a1 = poly[i];
        let a2 = poly[(i + 1) % n];
        for j in (i + 1)..n {
            // Skip adjacent edges (they share one endpoint by construction).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let b1 = poly[j];
            let b2 = poly[(j + 1) % n];
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Segment intersection test including touching endpoints and collinear
/// overlap.
pub fn segments_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let d1 = cross(b1, b2, a1);
    let d2 = cross(b1, b2, a2);
    let d3 = cross(a1, a2, b1);
    let d4 = cross(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |d: f64, p: Point, q: Point, r: Point| {
        d.abs() < EPS
            && r.x >= p.x.min(q.x) - EPS
            && r.x <= p.x.max(q.x) + EPS
            && r.y >= p.y.min(q.y) - EPS
            && r.y <= p.y.max(q.y) + EPS
    };
    on(d1, b1, b2, a1) || on(d2, b1, b2, a2) || on(d3, a1, a2, b1) || on(d4, a1, a2, b2)
}

/// Ray-casting point-in-polygon; points on the boundary count as inside.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if point_on_segment(p, poly[i], poly[(i + 1) % n], 1e-9) {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let pi = poly[i];
        let pj = poly[j];
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_on_segment(p: Point, a: Point, b: Point, tol: f64) -> bool {
    segment_point_distance(a, b, p) <= tol
}

pub fn segment_point_distance(a: Point, b: Point, p: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 < EPS {
        return (p - a).norm();
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    let proj = Point::new(a.x + t * ab.x, a.y + t * ab.y);
    (p - proj).norm()
}

pub fn segment_segment_distance(a1: Point, a2: Point, b1: Point, b2: Point) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    segment_point_distance(a1, a2, b1)
        .min(segment_point_distance(a1, a2, b2))
        .min(segment_point_distance(b1, b2, a1))
        .min(segment_point_distance(b1, b2, a2))
}

/// Minimum distance between two polygon outlines; 0 when they intersect or
/// one contains the other.
pub fn polygon_distance(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    if point_in_polygon(a[0], b) || point_in_polygon(b[0], a) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let a1 = a[i];
        let a2 = a[(i + 1) % a.len()];
        for j in 0..b.len() {
            let b1 = b[j];
            let b2 = b[(j + 1) % b.len()];
            best = best.min(segment_segment_distance(a1, a2, b1, b2));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Monotone-chain convex hull in positive shoelace orientation. Collinear
/// interior points are dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| (a.x - b.x).abs() < EPS && (a.y - b.y).abs() < EPS);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minimum-area enclosing rotated rectangle: one side of the optimum is
/// collinear with a hull edge, so every hull-edge direction is tried.
pub fn min_area_rect(points: &[Point]) -> [Point; 4] {
    let hull = convex_hull(points);
    if hull.is_empty() {
        return [Point::new(0.0, 0.0); 4];
    }
    if hull.len() == 1 {
        return [hull[0]; 4];
    }
    if hull.len() == 2 {
        return [hull[0], hull[1], hull[1], hull[0]];
    }
    let mut best_area = f64::INFINITY;
    let mut best: [Point; 4] = [Point::new(0.0, 0.0); 4];
    for i in 0..hull.len() {
        let e = hull[(i + 1) % hull.len()] - hull[i];
        let len = e.norm();
        if len < EPS {
            continue;
        }
        let u = e * (1.0 / len);
        let v = Point::new(-u.y, u.x);
        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for &p in &hull {
            let pu = p.x * u.x + p.y * u.y;
            let pv = p.x * v.x + p.y * v.y;
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let rect_area = (umax - umin) * (vmax - vmin);
        if rect_area < best_area {
            best_area = rect_area;
            let corner = |cu: f64, cv: f64| Point::new(cu * u.x + cv * v.x, cu * u.y + cv * v.y);
            best = [
                corner(umin, vmin),
                corner(umax, vmin),
                corner(umax, vmax),
                corner(umin, vmax),
            ];
        }
    }
    best
}

/// Scale a polygon by `factor` about its area centroid.
pub fn scale_about_centroid(poly: &[Point], factor: f64) -> Vec<Point> {
    let c = centroid(poly);
    poly.iter()
        .map(|&p| Point::new(c.x + (p.x - c.x) * factor, c.y + (p.y - c.y) * factor))
        .collect()
}
