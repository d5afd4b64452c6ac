//! Small planar geometry toolkit: vectors, segments and simple polygons.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` from the positive x-axis.
    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise rotation by π/2: (x, y) ↦ (−y, x).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}
impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}
impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}
impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}
impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}
impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}
impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

/// Squared distance from `p` to the segment `[a, b]`.
pub fn dist_sq_point_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (p - a).norm_sq();
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_sq()
}

/// Intersection of segments [a1,a2] and [b1,b2], if any.
///
/// Returns the parameters (s, t) in [0,1]² with a1 + s(a2−a1) = b1 + t(b2−b1).
/// Parallel or degenerate pairs return None (overlapping collinear segments
/// are not reported as a single point).
pub fn segment_intersection(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> Option<(f64, f64)> {
    let r = a2 - a1;
    let s = b2 - b1;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let q = b1 - a1;
    let t = q.cross(s) / denom;
    let u = q.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// Intersection point of two lines given in Hesse form n·x = c.
pub fn line_intersection(n1: Vec2, c1: f64, n2: Vec2, c2: f64) -> Option<Vec2> {
    let det = n1.cross(n2);
    if det.abs() < 1e-14 * (n1.norm() * n2.norm()).max(1e-300) {
        return None;
    }
    Some(Vec2::new(
        (c1 * n2.y - c2 * n1.y) / det,
        (n1.x * c2 - n2.x * c1) / det,
    ))
}

/// A simple polygon stored as a cyclic vertex list (no closing repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        Polygon { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Signed area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let mut a = 0.0;
        for i in 0..n {
            a += v[i].cross(v[(i + 1) % n]);
        }
        0.5 * a
    }

    pub fn perimeter(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        (0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).sum()
    }

    /// Winding number of the polygon around `p`.
    pub fn winding_number(&self, p: Vec2) -> i32 {
        let v = &self.vertices;
        let n = v.len();
        let mut wn = 0i32;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            if a.y <= p.y {
                if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.winding_number(p) != 0
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        (0..n)
            .map(|i| dist_sq_point_segment(p, v[i], v[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// True if the polygon is convex (strictly, up to `tol` slack on cross products).
    pub fn is_convex(&self, tol: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return false;
        }
        let orient = self.signed_area().signum();
        for i in 0..n {
            let e0 = v[(i + 1) % n] - v[i];
            let e1 = v[(i + 2) % n] - v[(i + 1) % n];
            if orient * e0.cross(e1) < -tol {
                return false;
            }
        }
        true
    }

    /// Support function h(d) = max over vertices of v·d.
    pub fn support(&self, d: Vec2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(d))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the vertex with maximal dot product against `d`.
    pub fn support_vertex(&self, d: Vec2) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let val = v.dot(d);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        best
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn translate(&self, t: Vec2) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&v| v + t).collect())
    }

    pub fn scale(&self, s: f64) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&v| v * s).collect())
    }

    /// A point strictly inside the polygon, assuming CCW orientation and simplicity.
    pub fn interior_point(&self) -> Vec2 {
        let v = &self.vertices;
        let n = v.len();
        // Take the lowest-then-leftmost vertex (a convex corner) and probe inward.
        let mut k = 0;
        for i in 1..n {
            if (v[i].y, v[i].x) < (v[k].y, v[k].x) {
                k = i;
            }
        }
        let a = v[(k + n - 1) % n];
        let b = v[k];
        let c = v[(k + 1) % n];
        let centroid = (a + b + c) / 3.0;
        // Shrink toward b until inside; handles slim corners.
        let mut t = 1.0;
        for _ in 0..60 {
            let p = b + (centroid - b) * t;
            if self.contains(p) {
                return p;
            }
            t *= 0.5;
        }
        centroid
    }
}

/// Symmetric Hausdorff distance between two closed polylines,
/// with point-to-segment refinement on both sides.
pub fn hausdorff_polylines(a: &[Vec2], b: &[Vec2]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// max over points of `a` of the distance to the closed polyline `b`.
pub fn directed_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let m = b.len();
    let point_dist = |p: &Vec2| -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..m {
            let d = dist_sq_point_segment(*p, b[j], b[(j + 1) % m]);
            if d < best {
                best = d;
            }
        }
        best.sqrt()
    };
    crate::parallel::map_reduce_max(a, point_dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_is_ccw_rotation() {
        let v = Vec2::new(1.0, 0.0);
        assert_eq!(v.perp(), Vec2::new(0.0, 1.0));
    }

    #[test]
    fn square_area_and_winding() {
        let sq = Polygon::new(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ]);
        assert!((sq.signed_area() - 4.0).abs() < 1e-12);
        assert!(sq.contains(Vec2::ZERO));
        assert!(!sq.contains(Vec2::new(2.0, 0.0)));
        assert!(sq.is_convex(1e-12));
    }

    #[test]
    fn segment_intersection_basic() {
        let (t, u) = segment_intersection(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, -1.0),
            Vec2::new(0.5, 1.0),
        )
        .unwrap();
        assert!((t - 0.5).abs() < 1e-12 && (u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_concentric_circles() {
        let circle = |r: f64| -> Vec<Vec2> {
            (0..256)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / 256.0;
                    Vec2::new(r * t.cos(), r * t.sin())
                })
                .collect()
        };
        let d = hausdorff_polylines(&circle(1.0), &circle(1.25));
        assert!((d - 0.25).abs() < 1e-3, "d = {d}");
    }
}
