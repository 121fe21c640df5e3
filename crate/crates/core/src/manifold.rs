//! Polylines approximating the unstable manifold of the fixed point, with
//! basic-point markers.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::folding::{FoldingError, FoldingPattern, Mark};
use crate::geometry::Point;

/// Monotone decreasing piecewise-linear map between arclength parameters,
/// used for the action of the map on the manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl ParamMap {
    /// Knots must have strictly increasing `xs` and strictly decreasing `ys`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(ys.windows(2).all(|w| w[0] > w[1]));
        ParamMap { xs, ys }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (*self.ys.last().unwrap(), self.ys[0])
    }

    pub fn eval(&self, s: f64) -> Option<f64> {
        interp(&self.xs, &self.ys, s)
    }

    pub fn inverse(&self, t: f64) -> Option<f64> {
        let rx: Vec<f64> = self.ys.iter().rev().copied().collect();
        let ry: Vec<f64> = self.xs.iter().rev().copied().collect();
        interp(&rx, &ry, t)
    }
}

/// Drops knots that would break strict monotonicity (increasing `xs`,
/// decreasing `ys`).
pub fn strictly_monotone(xs: Vec<f64>, ys: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut ox = Vec::with_capacity(xs.len());
    let mut oy = Vec::with_capacity(ys.len());
    for (x, y) in xs.into_iter().zip(ys) {
        if ox.last().is_some_and(|&l| x <= l) || oy.last().is_some_and(|&l| y >= l) {
            continue;
        }
        ox.push(x);
        oy.push(y);
    }
    (ox, oy)
}

fn interp(xs: &[f64], ys: &[f64], s: f64) -> Option<f64> {
    let (lo, hi) = (xs[0], *xs.last()?);
    if !(lo..=hi).contains(&s) {
        return None;
    }
    let k = xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = if x1 > x0 { (s - x0) / (x1 - x0) } else { 0.0 };
    Some(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkerKind {
    Critical,
    PostCritical,
}

/// The basic point `z_index^iterate`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub phi: f64,
    pub point: Point,
    pub kind: MarkerKind,
    pub index: i64,
    pub iterate: u32,
}

/// Vertices ordered by the signed arclength `phi`; `phi < 0` is the branch
/// holding `z_0`, `phi = 0` is the fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct WuPolyline {
    pub vertices: Vec<Point>,
    pub phi: Vec<f64>,
    pub origin_index: usize,
    /// Sorted by `phi`.
    pub markers: Vec<Marker>,
    /// Parameter form of the map, where known.
    pub image_map: Option<ParamMap>,
    pub heuristic: bool,
}

impl WuPolyline {
    pub fn phi_range(&self) -> (f64, f64) {
        (self.phi[0], *self.phi.last().unwrap())
    }

    pub fn point_at(&self, phi: f64) -> Option<Point> {
        let (lo, hi) = self.phi_range();
        if !(lo..=hi).contains(&phi) {
            return None;
        }
        let k = self.phi.partition_point(|&x| x <= phi).clamp(1, self.phi.len() - 1);
        let (p0, p1) = (self.phi[k - 1], self.phi[k]);
        let t = if p1 > p0 { (phi - p0) / (p1 - p0) } else { 0.0 };
        Some(self.vertices[k - 1].lerp(self.vertices[k], t))
    }

    pub fn marker(&self, index: i64, iterate: u32) -> Option<&Marker> {
        self.markers.iter().find(|m| m.index == index && m.iterate == iterate)
    }

    pub fn critical(&self) -> impl Iterator<Item = &Marker> {
        self.markers.iter().filter(|m| m.kind == MarkerKind::Critical)
    }

    /// `phi` interval of the arc `[z_0, z_0^1]` through the fixed point.
    pub fn central_arc(&self) -> Option<(f64, f64)> {
        Some((self.marker(0, 0)?.phi, self.marker(0, 1)?.phi))
    }

    /// Longest segment.
    pub fn max_segment(&self) -> f64 {
        self.phi.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Inserts vertices at the given parameters (kept if already present).
    pub fn insert_at(&mut self, phis: &[f64]) {
        let mut extra: Vec<f64> = phis.to_vec();
        extra.sort_by(f64::total_cmp);
        let mut verts = Vec::with_capacity(self.vertices.len() + extra.len());
        let mut phi = Vec::with_capacity(verts.capacity());
        let mut e = extra.into_iter().peekable();
        for k in 0..self.vertices.len() {
            while let Some(&s) = e.peek() {
                if s >= self.phi[k] {
                    break;
                }
                if phi.last().is_none_or(|&l| s > l) {
                    verts.push(self.point_at(s).expect("inside"));
                    phi.push(s);
                }
                e.next();
            }
            while e.peek() == Some(&self.phi[k]) {
                e.next();
            }
            verts.push(self.vertices[k]);
            phi.push(self.phi[k]);
        }
        self.origin_index = phi.iter().position(|&x| x == 0.0).expect("origin kept");
        self.vertices = verts;
        self.phi = phi;
    }

    /// Subdivides segments longer than `seg_tol`; `None` if that would
    /// exceed `max_vertices`.
    pub fn refined(&self, seg_tol: f64, max_vertices: usize) -> Option<WuPolyline> {
        let mut count = self.vertices.len();
        for w in self.phi.windows(2) {
            count += (((w[1] - w[0]) / seg_tol).ceil() as usize).saturating_sub(1);
            if count > max_vertices {
                return None;
            }
        }
        let mut extra = Vec::with_capacity(count - self.vertices.len());
        for w in self.phi.windows(2) {
            let n = ((w[1] - w[0]) / seg_tol).ceil() as usize;
            for k in 1..n {
                extra.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
            }
        }
        let mut out = self.clone();
        out.insert_at(&extra);
        Some(out)
    }

    /// The folding pattern read off the markers between `z_0^g` and
    /// `z_0^(g+1)`.
    pub fn folding_pattern(&self, g: usize) -> Result<FoldingPattern, FoldingError> {
        let missing = || FoldingError::MalformedPattern(format!("manifold does not reach z_0^{}", g + 1));
        let a = self.marker(0, g as u32).ok_or_else(missing)?.phi;
        let b = self.marker(0, g as u32 + 1).ok_or_else(missing)?.phi;
        let (lo, hi) = (a.min(b), a.max(b));
        let mark = |m: &Marker| if m.kind == MarkerKind::Critical { Mark::Zero } else { Mark::One };
        let left = self.markers.iter().rev().filter(|m| m.phi < 0.0 && m.phi >= lo).map(mark).collect();
        let right = self.markers.iter().filter(|m| m.phi > 0.0 && m.phi <= hi).map(mark).collect();
        let fp = FoldingPattern { left, right, generations: g };
        crate::folding::annotate(&fp)?;
        Ok(fp)
    }

    /// CSV with columns `index,x,y,arclength,marker_kind,i,j`; reals carry
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let by_phi: HashMap<u64, &Marker> = self.markers.iter().map(|m| (m.phi.to_bits(), m)).collect();
        let mut s = String::from("index,x,y,arclength,marker_kind,i,j\n");
        for (k, (p, phi)) in self.vertices.iter().zip(&self.phi).enumerate() {
            let _ = write!(s, "{k},{},{},{},", fmt17(p.x), fmt17(p.y), fmt17(*phi));
            match by_phi.get(&phi.to_bits()) {
                Some(m) => {
                    let kind = if m.kind == MarkerKind::Critical { "critical" } else { "post_critical" };
                    let _ = writeln!(s, "{kind},{},{}", m.index, m.iterate);
                }
                None if k == self.origin_index => s.push_str("fixed_point,,\n"),
                None => s.push_str(",,\n"),
            }
        }
        s
    }
}

/// A real with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
