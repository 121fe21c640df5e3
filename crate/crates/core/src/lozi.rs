//! Lozi maps `L(x, y) = (1 + y - a|x|, b x)`.
//!
//! The map is affine on each side of the y-axis, so the unstable manifold is
//! grown exactly: each step maps the current branches, split at the axis,
//! and records the action of the map on arclength.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding::{FoldingError, FoldingPattern};
use crate::geometry::{Affine, ConvexPolygon, Point};
use crate::kneading::{KneadingError, KneadingSequence, KneadingSet};
use crate::manifold::{strictly_monotone, Marker, MarkerKind, ParamMap, WuPolyline};
use crate::symbolic::{Symbol, SymbolWord, TwoSidedWindow};

pub const DEFAULT_LOCUS_EPS: f64 = 1e-9;
pub const DEFAULT_SEED_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoziError {
    #[error("parameters (a, b) = ({a}, {b}) lie outside the Misiurewicz set")]
    NotMisiurewicz { a: f64, b: f64 },
    #[error("vertex budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("iterate {iterate} lies within the dead zone of the y-axis")]
    LocusAmbiguous { iterate: usize },
    #[error("parameter {phi} is outside the computed manifold")]
    OutOfRange { phi: f64 },
    #[error("triangle is not mapped into itself")]
    NotTrapped,
    #[error("window expands into more than {budget} concrete windows")]
    WindowTooDeep { budget: usize },
    #[error(transparent)]
    Kneading(#[from] KneadingError),
    #[error(transparent)]
    Folding(#[from] FoldingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoziParams {
    pub a: f64,
    pub b: f64,
}

impl LoziParams {
    pub const fn new(a: f64, b: f64) -> Self {
        LoziParams { a, b }
    }

    /// `b > 0`, `a sqrt(2) - b > 2`, `2a + b < 4`.
    pub fn in_misiurewicz(&self) -> bool {
        self.b > 0.0 && self.a * 2f64.sqrt() - self.b > 2.0 && 2.0 * self.a + self.b < 4.0
    }

    /// The fixed point X with `x > 0`.
    pub fn fixed_point(&self) -> Point {
        let d = 1.0 + self.a - self.b;
        Point::new(1.0 / d, self.b / d)
    }

    /// The fixed point Y with `x < 0`.
    pub fn second_fixed_point(&self) -> Point {
        let d = 1.0 - self.a - self.b;
        Point::new(1.0 / d, self.b / d)
    }

    /// Eigenvalues `(unstable, stable)` of the right branch.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = (self.a * self.a + 4.0 * self.b).sqrt();
        ((-self.a - r) / 2.0, (-self.a + r) / 2.0)
    }

    /// Unit unstable eigenvector pointing towards smaller `x`.
    pub fn unstable_direction(&self) -> Point {
        let (l, _) = self.eigenvalues();
        let n = l.hypot(self.b);
        Point::new(l / n, self.b / n)
    }

    /// The affine branch used on the side of sign `s`.
    pub fn branch(&self, s: Symbol) -> Affine {
        let s = if s == Symbol::Minus { -1.0 } else { 1.0 };
        Affine { m: [[-self.a * s, 1.0], [self.b, 0.0]], t: [1.0, 0.0] }
    }

    /// Inverse of [`LoziParams::branch`].
    pub fn inverse_branch(&self, s: Symbol) -> Affine {
        let s = if s == Symbol::Minus { -1.0 } else { 1.0 };
        Affine { m: [[0.0, 1.0 / self.b], [1.0, self.a * s / self.b]], t: [0.0, -1.0] }
    }

    fn ensure_misiurewicz(&self) -> Result<(), LoziError> {
        if self.in_misiurewicz() {
            Ok(())
        } else {
            Err(LoziError::NotMisiurewicz { a: self.a, b: self.b })
        }
    }
}

pub fn lozi_apply(p: &LoziParams, pt: Point) -> Point {
    Point::new(1.0 + pt.y - p.a * pt.x.abs(), p.b * pt.x)
}

/// Forward symbols of `pt`, `~` inside the dead zone `|x| <= eps`.
pub fn forward_symbols(p: &LoziParams, pt: Point, depth: usize, eps: f64) -> Vec<Symbol> {
    let mut q = pt;
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        out.push(Symbol::of_value(q.x, eps));
        q = lozi_apply(p, q);
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct GrowOptions {
    pub seed_eps: f64,
    /// Output segments are subdivided to at most this length.
    pub seg_tol: f64,
    pub max_vertices: usize,
    /// Half-width of the dead zone around the y-axis used for coding.
    pub locus_eps: f64,
}

impl Default for GrowOptions {
    fn default() -> Self {
        GrowOptions {
            seed_eps: DEFAULT_SEED_EPS,
            seg_tol: f64::INFINITY,
            max_vertices: 20_000_000,
            locus_eps: DEFAULT_LOCUS_EPS,
        }
    }
}

struct Branch {
    pts: Vec<Point>,
    s: Vec<f64>,
}

impl Branch {
    fn from_points(pts: Vec<Point>) -> Branch {
        let mut s = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        s.push(0.0);
        for w in pts.windows(2) {
            acc += w[0].dist(w[1]);
            s.push(acc);
        }
        Branch { pts, s }
    }

    fn len(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Inserts the points where the branch crosses the y-axis.
    fn split(&self) -> Branch {
        let mut pts = Vec::with_capacity(self.pts.len() + 16);
        let mut s = Vec::with_capacity(pts.capacity());
        for k in 0..self.pts.len() {
            if k > 0 {
                let (p, q) = (self.pts[k - 1], self.pts[k]);
                if (p.x < 0.0 && q.x > 0.0) || (p.x > 0.0 && q.x < 0.0) {
                    let t = p.x / (p.x - q.x);
                    pts.push(Point::new(0.0, p.y + t * (q.y - p.y)));
                    s.push(self.s[k - 1] + t * (self.s[k] - self.s[k - 1]));
                }
            }
            pts.push(self.pts[k]);
            s.push(self.s[k]);
        }
        Branch { pts, s }
    }
}

/// Grows both branches of the unstable manifold of X until each is at least
/// `target_arclength` long, and marks the basic points.
pub fn grow_wu(p: &LoziParams, target_arclength: f64, opts: &GrowOptions) -> Result<WuPolyline, LoziError> {
    p.ensure_misiurewicz()?;
    let x = p.fixed_point();
    let u = p.unstable_direction();
    let e = opts.seed_eps;
    let mut neg = Branch::from_points(vec![x, Point::new(x.x + e * u.x, x.y + e * u.y)]);
    let mut pos = Branch::from_points(vec![x, Point::new(x.x - e * u.x, x.y - e * u.y)]);
    let mut knots = None;
    let mut steps = 0;
    while steps < 2 || neg.len().min(pos.len()) < target_arclength {
        let (sn, sp) = (neg.split(), pos.split());
        let new_pos = Branch::from_points(sn.pts.iter().map(|&q| lozi_apply(p, q)).collect());
        let new_neg = Branch::from_points(sp.pts.iter().map(|&q| lozi_apply(p, q)).collect());
        if new_pos.pts.len() + new_neg.pts.len() > opts.max_vertices {
            return Err(LoziError::BudgetExceeded { budget: opts.max_vertices });
        }
        knots = Some((sn.s, new_pos.s.clone(), sp.s, new_neg.s.clone()));
        neg = new_neg;
        pos = new_pos;
        steps += 1;
    }
    let (ns, np, ps, pn) = knots.expect("at least one step");
    // phi < 0 on the negative branch; the map sends it to phi > 0 and back
    let mut xs: Vec<f64> = ns.iter().rev().map(|s| -s).collect();
    let mut ys: Vec<f64> = np.iter().rev().copied().collect();
    for (s, t) in ps.iter().zip(&pn).skip(1) {
        xs.push(*s);
        ys.push(-t);
    }
    let (xs, ys) = strictly_monotone(xs, ys);
    let image_map = ParamMap::new(xs, ys);

    let (neg, pos) = (neg.split(), pos.split());
    let mut vertices: Vec<Point> = neg.pts.iter().rev().copied().collect();
    let mut phi: Vec<f64> = neg.s.iter().rev().map(|s| -s).collect();
    let origin_index = vertices.len() - 1;
    vertices.extend(pos.pts.iter().skip(1));
    phi.extend(pos.s.iter().skip(1));

    let mut markers = Vec::new();
    let mut zeros_neg = 0;
    let mut zeros_pos = 0;
    let mut crossings: Vec<(f64, Point)> =
        vertices.iter().zip(&phi).filter(|(q, &f)| q.x == 0.0 && f != 0.0).map(|(q, &f)| (f, *q)).collect();
    crossings.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    for (f, q) in crossings {
        let index = if f < 0.0 {
            zeros_neg += 1;
            zeros_neg - 1
        } else {
            zeros_pos += 1;
            -zeros_pos
        };
        markers.push(Marker { phi: f, point: q, kind: MarkerKind::Critical, index, iterate: 0 });
    }
    let mut poly = WuPolyline { vertices, phi, origin_index, markers: Vec::new(), image_map: None, heuristic: false };
    let mut post = Vec::new();
    for m in &markers {
        let mut f = m.phi;
        let mut j = 0;
        while let Some(next) = image_map.eval(f) {
            f = next;
            j += 1;
            let Some(q) = poly.point_at(f) else { break };
            post.push(Marker { phi: f, point: q, kind: MarkerKind::PostCritical, index: m.index, iterate: j });
        }
    }
    markers.extend(post);
    markers.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    poly.insert_at(&markers.iter().map(|m| m.phi).collect::<Vec<_>>());
    poly.markers = markers;
    poly.image_map = Some(image_map);
    if opts.seg_tol.is_finite() {
        poly = poly
            .refined(opts.seg_tol, opts.max_vertices)
            .ok_or(LoziError::BudgetExceeded { budget: opts.max_vertices })?;
    }
    Ok(poly)
}

/// Arc-code of the basic arc holding the manifold point at `phi`: the signs
/// of its backward orbit until it enters `[z_0, z_0^1]`, oldest first, ending
/// with its own sign.
pub fn arc_code_at(poly: &WuPolyline, phi: f64, eps: f64) -> Result<SymbolWord, LoziError> {
    let map = poly.image_map.as_ref().ok_or(LoziError::OutOfRange { phi })?;
    let (lo, hi) = poly.central_arc().ok_or(LoziError::OutOfRange { phi })?;
    let mut out = Vec::new();
    let mut f = phi;
    while !(lo..=hi).contains(&f) {
        let q = poly.point_at(f).ok_or(LoziError::OutOfRange { phi })?;
        out.push(Symbol::of_value(q.x, eps));
        f = map.inverse(f).ok_or(LoziError::OutOfRange { phi })?;
    }
    out.reverse();
    Ok(SymbolWord(out))
}

/// Itinerary window `+^inf w . p_0 p_1 ..` of the manifold point at `phi`.
pub fn itinerary_of(
    p: &LoziParams,
    poly: &WuPolyline,
    phi: f64,
    fwd_depth: usize,
    eps: f64,
) -> Result<TwoSidedWindow, LoziError> {
    let q = poly.point_at(phi).ok_or(LoziError::OutOfRange { phi })?;
    let mut code = arc_code_at(poly, phi, eps)?.0;
    code.pop();
    let right = forward_symbols(p, q, fwd_depth, eps);
    Ok(TwoSidedWindow::new(SymbolWord(code), true, SymbolWord(right)))
}

/// Like [`itinerary_of`] but fails on any `~`.
pub fn itinerary_of_strict(
    p: &LoziParams,
    poly: &WuPolyline,
    phi: f64,
    fwd_depth: usize,
    eps: f64,
) -> Result<TwoSidedWindow, LoziError> {
    let w = itinerary_of(p, poly, phi, fwd_depth, eps)?;
    let l = w.left_word().len() as i64;
    for c in -l..w.known_depth() as i64 {
        if w.get(c) == Some(Symbol::PlusMinus) {
            return Err(LoziError::LocusAmbiguous { iterate: (c + l) as usize });
        }
    }
    Ok(w)
}

/// Manifold long enough to hold `z_i` for `lo <= i <= hi`.
pub fn grow_for_indices(p: &LoziParams, lo: i64, hi: i64, opts: &GrowOptions) -> Result<WuPolyline, LoziError> {
    let mut target = 4.0;
    loop {
        let poly = grow_wu(p, target, opts)?;
        let has = |i: i64| {
            poly.marker(i, 0).zip(poly.image_map.as_ref()).is_some_and(|(m, map)| map.inverse(m.phi).is_some())
        };
        if has(lo) && has(hi) {
            return Ok(poly);
        }
        target *= 1.5;
    }
}

/// Indices `0, -1, 1, -2, 2, ..`, the first `count` of them.
pub fn nearest_indices(count: usize) -> Vec<i64> {
    (0..count as i64).map(|k| if k % 2 == 1 { -(k + 1) / 2 } else { k / 2 }).collect()
}

/// Kneading sequences of the `count` turning points nearest X in index.
pub fn kneading_set_of(
    p: &LoziParams,
    count: usize,
    depth: usize,
    opts: &GrowOptions,
) -> Result<KneadingSet, LoziError> {
    let idx = nearest_indices(count.max(1));
    let (lo, hi) = (*idx.iter().min().unwrap(), *idx.iter().max().unwrap());
    let poly = grow_for_indices(p, lo, hi, opts)?;
    kneading_set_from(p, &poly, &idx, depth, opts.locus_eps)
}

/// Kneading sequences for the given indices from an existing manifold.
pub fn kneading_set_from(
    p: &LoziParams,
    poly: &WuPolyline,
    indices: &[i64],
    depth: usize,
    eps: f64,
) -> Result<KneadingSet, LoziError> {
    let map = poly.image_map.as_ref().ok_or(LoziError::OutOfRange { phi: 0.0 })?;
    let mut items = Vec::new();
    for &i in indices {
        let z = poly.marker(i, 0).ok_or(LoziError::OutOfRange { phi: f64::NAN })?;
        let pre = map.inverse(z.phi).ok_or(LoziError::OutOfRange { phi: z.phi })?;
        let code = arc_code_at(poly, pre, eps)?;
        let turning = lozi_apply(p, Point::new(0.0, z.point.y));
        let tail = forward_symbols(p, turning, depth, eps);
        if let Some(k) = tail.iter().position(|&s| s == Symbol::PlusMinus) {
            return Err(LoziError::LocusAmbiguous { iterate: k });
        }
        items.push((i, KneadingSequence::new(code, SymbolWord(tail))?));
    }
    Ok(KneadingSet::from_indexed(items)?)
}

/// Folding pattern through generation `g`, read from the manifold.
pub fn folding_pattern_of(p: &LoziParams, g: usize, opts: &GrowOptions) -> Result<FoldingPattern, LoziError> {
    let mut target = 4.0;
    loop {
        let poly = grow_wu(p, target, opts)?;
        if poly.marker(0, g as u32 + 1).is_some() {
            return Ok(poly.folding_pattern(g)?);
        }
        target *= 1.5;
    }
}

/// The triangle with vertices `z_0^1, z_0^2, z_0^3`, checked to be mapped
/// into itself.
pub fn trapping_triangle(p: &LoziParams) -> Result<ConvexPolygon, LoziError> {
    p.ensure_misiurewicz()?;
    let x = p.fixed_point();
    let (l, _) = p.eigenvalues();
    let t1 = Point::new(x.x - x.y * l / p.b, 0.0);
    let t2 = lozi_apply(p, t1);
    let t3 = lozi_apply(p, t2);
    let tri = ConvexPolygon::new(vec![t1, t2, t3]);
    let scale = tri.diameter();
    for s in [Symbol::Minus, Symbol::Plus] {
        let sv = if s == Symbol::Minus { -1.0 } else { 1.0 };
        let piece = tri.clip(&crate::geometry::HalfPlane::new(sv, 0.0, 0.0));
        let f = p.branch(s);
        if piece.vertices.iter().any(|&q| !tri.contains(f.apply(q), 1e-12 * scale)) {
            return Err(LoziError::NotTrapped);
        }
    }
    Ok(tri)
}

/// Upper bound on the concrete windows a `~`-laden window expands into.
pub const REGION_EXPANSION_BUDGET: usize = 1 << 12;

/// The points of the trapping triangle whose stored coordinates follow `w`.
///
/// Forward symbols pull back the sign of `x` through the affine branches;
/// backward symbols push it through the inverse branches, which must also
/// stay inside the triangle. A `~` contributes both sides, so the result is
/// a list of convex pieces.
pub fn itinerary_to_region(p: &LoziParams, w: &TwoSidedWindow) -> Result<Vec<ConvexPolygon>, LoziError> {
    let tri = trapping_triangle(p)?;
    let tri_planes = tri.half_planes();
    let stars = (-(w.left_word().len() as i64)..w.known_depth() as i64)
        .filter(|&c| w.get(c) == Some(Symbol::PlusMinus))
        .count();
    if stars > REGION_EXPANSION_BUDGET.trailing_zeros() as usize {
        return Err(LoziError::WindowTooDeep { budget: REGION_EXPANSION_BUDGET });
    }
    let mut out = Vec::new();
    'windows: for c in w.expansions() {
        let mut poly = tri.clone();
        let mut fwd = Affine::IDENTITY;
        for &s in c.right_word().as_slice() {
            poly = poly.clip(&fwd.coordinate_half_plane(0, sign_value(s)));
            if poly.is_empty() {
                continue 'windows;
            }
            fwd = p.branch(s).compose(&fwd);
        }
        let mut back = Affine::IDENTITY;
        for &s in c.left_word().as_slice().iter().rev() {
            back = p.inverse_branch(s).compose(&back);
            poly = poly.clip(&back.coordinate_half_plane(0, sign_value(s)));
            for h in &tri_planes {
                poly = poly.clip(&back.pull_back(h));
            }
            if poly.is_empty() {
                continue 'windows;
            }
        }
        out.push(poly);
    }
    Ok(out)
}

fn sign_value(s: Symbol) -> f64 {
    if s == Symbol::Minus {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: LoziParams = LoziParams::new(1.8, 0.3);

    #[test]
    fn map_and_fixed_points() {
        assert_eq!(lozi_apply(&P, Point::new(0.0, 0.0)), Point::new(1.0, 0.0));
        let x = P.fixed_point();
        assert!((x.x - 0.4).abs() < 1e-15 && (x.y - 0.12).abs() < 1e-15);
        let fx = lozi_apply(&P, x);
        assert!(fx.dist(x) < 1e-15);
        let y = P.second_fixed_point();
        assert!((y.x + 1.0 / 1.1).abs() < 1e-12 && (y.y + 0.3 / 1.1).abs() < 1e-12);
        assert!(lozi_apply(&P, y).dist(y) < 1e-12);
    }

    #[test]
    fn misiurewicz_membership() {
        assert!(P.in_misiurewicz());
        assert!(LoziParams::new(1.7, 0.35).in_misiurewicz());
        assert!(!LoziParams::new(1.7, 0.5).in_misiurewicz());
        assert!(!LoziParams::new(1.8, 0.0).in_misiurewicz());
    }

    #[test]
    fn branches_invert() {
        for s in [Symbol::Minus, Symbol::Plus] {
            let id = P.inverse_branch(s).compose(&P.branch(s));
            let q = id.apply(Point::new(0.3, -0.7));
            assert!(q.dist(Point::new(0.3, -0.7)) < 1e-14);
        }
    }

    #[test]
    fn index_order() {
        assert_eq!(nearest_indices(5), [0, -1, 1, -2, 2]);
    }

    #[test]
    fn triangle_is_trapping() {
        let t = trapping_triangle(&P).unwrap();
        // X sits on the edge z_0^1 z_0^2, which is a piece of the manifold
        assert!(t.contains(P.fixed_point(), 1e-12));
        assert!(trapping_triangle(&LoziParams::new(1.7, 0.5)).is_err());
    }
}
