//! Plane points, affine maps and convex polygons clipped by half-planes.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// `p -> m p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl Affine {
    pub const IDENTITY: Affine = Affine { m: [[1.0, 0.0], [0.0, 1.0]], t: [0.0, 0.0] };

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.t[0],
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.t[1],
        )
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Affine) -> Affine {
        let a = &self.m;
        let b = &inner.m;
        let m = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        let t = [
            a[0][0] * inner.t[0] + a[0][1] * inner.t[1] + self.t[0],
            a[1][0] * inner.t[0] + a[1][1] * inner.t[1] + self.t[1],
        ];
        Affine { m, t }
    }

    /// Half-plane `{p : row k of (self p) * s >= 0}`, i.e. the sign of one
    /// output coordinate.
    pub fn coordinate_half_plane(&self, k: usize, s: f64) -> HalfPlane {
        HalfPlane::new(s * self.m[k][0], s * self.m[k][1], s * self.t[k])
    }

    /// Pulls a half-plane back: `{p : self p ∈ h}`.
    pub fn pull_back(&self, h: &HalfPlane) -> HalfPlane {
        HalfPlane::new(
            h.a * self.m[0][0] + h.b * self.m[1][0],
            h.a * self.m[0][1] + h.b * self.m[1][1],
            h.a * self.t[0] + h.b * self.t[1] + h.c,
        )
    }
}

/// `{(x, y) : a x + b y + c >= 0}`, stored normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        let n = a.hypot(b);
        if n > 0.0 && n.is_finite() {
            HalfPlane { a: a / n, b: b / n, c: c / n }
        } else {
            HalfPlane { a, b, c }
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }
}

/// Convex polygon, vertices counter-clockwise. May be empty.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(mut vertices: Vec<Point>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3 || self.area() <= 0.0
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let v = &self.vertices;
        if v.len() < 3 {
            return false;
        }
        (0..v.len()).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            cross >= -tol * a.dist(b)
        })
    }

    /// Edges as inward half-planes.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        let v = &self.vertices;
        (0..v.len())
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % v.len()]);
                HalfPlane::new(-(q.y - p.y), q.x - p.x, (q.y - p.y) * p.x - (q.x - p.x) * p.y)
            })
            .collect()
    }

    /// Sutherland-Hodgman clip against one half-plane.
    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        let v = &self.vertices;
        let mut out = Vec::with_capacity(v.len() + 1);
        for i in 0..v.len() {
            let (p, q) = (v[i], v[(i + 1) % v.len()]);
            let (fp, fq) = (h.eval(p), h.eval(q));
            if fp >= 0.0 {
                out.push(p);
            }
            if (fp >= 0.0) != (fq >= 0.0) {
                out.push(p.lerp(q, fp / (fp - fq)));
            }
        }
        ConvexPolygon { vertices: out }
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>() / 2.0
}
