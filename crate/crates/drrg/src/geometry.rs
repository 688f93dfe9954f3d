//! Core geometric model of text components.
//!
//! A text component is a small rotated rectangle described by
//! `(x, y, h, w, cos_t, sin_t)` in image coordinates (y grows downward).
//! Angles are measured in a y-up frame: `math_angle(v) = atan2(-v.y, v.x)`,
//! so a vector pointing toward the top of the image has angle `pi/2`. The
//! component angle `theta` is the direction of its width (reading) axis.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DrrgError, Result};
use crate::polygon;

/// 2D point in image coordinates, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = Point;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [x, y] pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Point, A::Error> {
                let x = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                let y = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                Ok(Point::new(x, y))
            }
        }
        deserializer.deserialize_tuple(2, PointVisitor)
    }
}

/// Angle of a vector in the y-up frame, in radians.
pub fn math_angle(v: Point) -> f64 {
    (-v.y).atan2(v.x)
}

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * std::f64::consts::PI);
    if t <= -std::f64::consts::PI {
        t += 2.0 * std::f64::consts::PI;
    } else if t > std::f64::consts::PI {
        t -= 2.0 * std::f64::consts::PI;
    }
    t
}

/// Angular difference folded to `[0, pi/2]`, treating `theta` and
/// `theta + pi` as the same orientation.
pub fn orientation_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(std::f64::consts::PI);
    if d > std::f64::consts::FRAC_PI_2 {
        d = std::f64::consts::PI - d;
    }
    d
}

/// One rotated rectangular text piece with geometry attributes
/// `(x, y, h, w, cos_t, sin_t)`, an optional score and instance label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextComponent {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub w: f64,
    #[serde(rename = "cos")]
    pub cos_t: f64,
    #[serde(rename = "sin")]
    pub sin_t: f64,
    pub score: f64,
    pub instance_id: Option<u32>,
}

impl TextComponent {
    pub fn new(x: f64, y: f64, h: f64, w: f64, theta: f64) -> Result<Self> {
        if !(h > 0.0) || !(w > 0.0) {
            return Err(DrrgError::InvalidArgument(format!(
                "component needs positive extents, got h={h}, w={w}"
            )));
        }
        Ok(Self {
            x,
            y,
            h,
            w,
            cos_t: theta.cos(),
            sin_t: theta.sin(),
            score: 1.0,
            instance_id: None,
        })
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = score;
        self
    }

    pub fn with_instance(mut self, id: u32) -> Self {
        self.instance_id = Some(id);
        self
    }

    pub fn center(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn theta(&self) -> f64 {
        self.sin_t.atan2(self.cos_t)
    }

    /// Unit vector of the width (reading) axis in image coordinates.
    pub fn width_axis(&self) -> Point {
        Point::new(self.cos_t, -self.sin_t)
    }

    /// Unit vector of the height axis in image coordinates (points toward
    /// the top of upright text).
    pub fn height_axis(&self) -> Point {
        Point::new(-self.sin_t, -self.cos_t)
    }

    /// Renormalize `(cos_t, sin_t)` to unit length.
    pub fn renormalize_angle(&mut self) {
        let n = self.cos_t.hypot(self.sin_t);
        if n > 0.0 {
            self.cos_t /= n;
            self.sin_t /= n;
        } else {
            self.cos_t = 1.0;
            self.sin_t = 0.0;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.w > 0.0) {
            return Err(DrrgError::InvalidArgument(format!(
                "non-positive component extents h={}, w={}",
                self.h, self.w
            )));
        }
        let sq = self.cos_t * self.cos_t + self.sin_t * self.sin_t;
        if (sq - 1.0).abs() > 1e-6 {
            return Err(DrrgError::InvalidArgument(format!(
                "orientation not unit length: cos^2+sin^2 = {sq}"
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(DrrgError::InvalidArgument(format!(
                "score out of range: {}",
                self.score
            )));
        }
        Ok(())
    }
}

/// Top/bottom point chains of a text region together with the vertex
/// vectors `v_i = tp_i - bp_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideChains {
    pub top: Vec<Point>,
    pub bottom: Vec<Point>,
    pub vertex_vectors: Vec<Point>,
}

/// Component width as a clamped linear function of height: `w_min` below
/// `2*w_min`, `h/2` in between, `w_max` at or above `2*w_max`.
pub fn width_from_height(h: f64, w_min: f64, w_max: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(DrrgError::InvalidArgument(format!(
            "height must be positive, got {h}"
        )));
    }
    if !(w_min > 0.0) || w_min > w_max {
        return Err(DrrgError::InvalidArgument(format!(
            "invalid width bounds [{w_min}, {w_max}]"
        )));
    }
    Ok(if h <= 2.0 * w_min {
        w_min
    } else if h >= 2.0 * w_max {
        w_max
    } else {
        h / 2.0
    })
}

/// Decide which chain is the top: with `p1` as tentative top, accumulate
/// `p = sum_i sin(math_angle(v_i))` over `v_i = p1_i - p2_i`; `p >= 0`
/// keeps `p1` on top, otherwise the chains swap.
pub fn assign_top_bottom(p1: &[Point], p2: &[Point]) -> Result<SideChains> {
    if p1.len() != p2.len() {
        return Err(DrrgError::InvalidArgument(format!(
            "chain lengths differ: {} vs {}",
            p1.len(),
            p2.len()
        )));
    }
    if p1.len() < 2 {
        return Err(DrrgError::InvalidArgument(
            "chains need at least 2 points".into(),
        ));
    }
    let mut p = 0.0;
    for (&a, &b) in p1.iter().zip(p2) {
        let v = a - b;
        let n = v.norm();
        if n > 0.0 {
            // sin of the y-up angle of v
            p += -v.y / n;
        }
    }
    let (top, bottom) = if p >= 0.0 {
        (p1.to_vec(), p2.to_vec())
    } else {
        (p2.to_vec(), p1.to_vec())
    };
    let vertex_vectors = top.iter().zip(&bottom).map(|(&t, &b)| t - b).collect();
    Ok(SideChains {
        top,
        bottom,
        vertex_vectors,
    })
}

/// Corner quadrilateral of a component: extent `w` along the width axis,
/// `h` across it. Returned in positive shoelace order.
pub fn component_corners(c: &TextComponent) -> [Point; 4] {
    let a = c.width_axis() * (c.w / 2.0);
    let b = c.height_axis() * (c.h / 2.0);
    let center = c.center();
    [
        center - a + b,
        center + a + b,
        center + a - b,
        center - a - b,
    ]
}

/// IoU of the corner rectangles of two components. Orientation sign is
/// irrelevant (theta and theta + pi describe the same rectangle).
pub fn rotated_rect_overlap(a: &TextComponent, b: &TextComponent) -> f64 {
    let ca = component_corners(a);
    let cb = component_corners(b);
    let area_a = polygon::area(&ca);
    let area_b = polygon::area(&cb);
    if area_a <= 0.0 || area_b <= 0.0 {
        return 0.0;
    }
    let inter = polygon::convex_intersection_area(&ca, &cb);
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
