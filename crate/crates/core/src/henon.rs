//! Henon maps `F(x, y) = (1 + y - a x^2, b x)`, `b > 0`.
//!
//! The unstable manifold of X is parametrized exactly: a point of the arm
//! `arm` at parameter `t` is `F^(2m)(X + s u)` with `m = floor(t)` and `s`
//! running geometrically over one fundamental domain of the seed segment.
//! In these coordinates the map is `(arm, t) -> (other arm, t + 1/2)`, up to
//! the linearization error of the seed.
//!
//! Critical points are located heuristically, as points where the manifold
//! is tangent to the most contracted direction of `DF^j`. Everything derived
//! from them is flagged heuristic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding::{FoldingError, FoldingPattern};
use crate::geometry::Point;
use crate::kneading::{KneadingError, KneadingSequence, KneadingSet};
use crate::manifold::{strictly_monotone, Marker, MarkerKind, ParamMap, WuPolyline};
use crate::symbolic::{Symbol, SymbolWord, TwoSidedWindow};

pub const DEFAULT_A: f64 = 1.9;
pub const DEFAULT_B: f64 = 0.025;
/// Range of `a` for which the defaults below were tuned.
pub const PLAUSIBLE_A: (f64, f64) = (1.7, 2.0);
pub const DEFAULT_J_MAX: usize = 15;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 3.75;
/// Half-width of the strip around the y-axis searched for critical points.
pub const DEFAULT_STRIP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HenonError {
    #[error("b = {b} is not positive")]
    NotOrientationReversing { b: f64 },
    #[error("the fixed point has no eigenvalue of modulus > 1")]
    UnstableEigenvalueMissing,
    #[error("vertex budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("no critical candidates found")]
    NoCandidates,
    #[error("candidates at height {y} are not vertically separable")]
    OrderingAmbiguous { y: f64 },
    #[error("iterate {iterate} lies within the dead zone of the critical locus")]
    LocusAmbiguous { iterate: usize },
    #[error("parameter {phi} is outside the computed manifold")]
    OutOfRange { phi: f64 },
    #[error("turning point of z_{index} lies left of the locus")]
    TurningPointOnLeft { index: i64 },
    #[error(transparent)]
    Kneading(#[from] KneadingError),
    #[error(transparent)]
    Folding(#[from] FoldingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonParams {
    pub a: f64,
    pub b: f64,
}

impl Default for HenonParams {
    fn default() -> Self {
        HenonParams { a: DEFAULT_A, b: DEFAULT_B }
    }
}

impl HenonParams {
    pub const fn new(a: f64, b: f64) -> Self {
        HenonParams { a, b }
    }

    /// Hard errors for unusable parameters, warnings for implausible ones.
    pub fn check(&self) -> Result<Vec<String>, HenonError> {
        if !(self.b > 0.0) {
            return Err(HenonError::NotOrientationReversing { b: self.b });
        }
        self.eigenvalues()?;
        let mut warnings = Vec::new();
        if !(PLAUSIBLE_A.0..=PLAUSIBLE_A.1).contains(&self.a) {
            warnings.push(format!(
                "a = {} is outside the plausibility window [{}, {}]",
                self.a, PLAUSIBLE_A.0, PLAUSIBLE_A.1
            ));
        }
        if self.b > 0.1 {
            warnings.push(format!("b = {} is large; critical points may be poorly resolved", self.b));
        }
        Ok(warnings)
    }

    /// Roots of `a x^2 + (1 - b) x - 1 = 0`, the fixed points' abscissae,
    /// larger first.
    fn fixed_abscissae(&self) -> (f64, f64) {
        let c = 1.0 - self.b;
        let r = (c * c + 4.0 * self.a).sqrt();
        // stable form of the quadratic formula
        let q = -0.5 * (c + r);
        let (x1, x2) = (-1.0 / q, q / self.a);
        if x1 > x2 {
            (x1, x2)
        } else {
            (x2, x1)
        }
    }

    /// The fixed point X with `x > 0`.
    pub fn fixed_point(&self) -> Point {
        let (x, _) = self.fixed_abscissae();
        Point::new(x, self.b * x)
    }

    pub fn second_fixed_point(&self) -> Point {
        let (_, x) = self.fixed_abscissae();
        Point::new(x, self.b * x)
    }

    pub fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        [[-2.0 * self.a * p.x, 1.0], [self.b, 0.0]]
    }

    /// `(unstable, stable)` eigenvalues at X.
    pub fn eigenvalues(&self) -> Result<(f64, f64), HenonError> {
        let t = -2.0 * self.a * self.fixed_point().x;
        let disc = t * t + 4.0 * self.b;
        if disc < 0.0 {
            return Err(HenonError::UnstableEigenvalueMissing);
        }
        let r = disc.sqrt();
        let (l1, l2) = ((t - r) / 2.0, (t + r) / 2.0);
        let (u, s) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
        if u.abs() <= 1.0 {
            return Err(HenonError::UnstableEigenvalueMissing);
        }
        Ok((u, s))
    }

    /// Unit unstable eigenvector pointing towards smaller `x`.
    pub fn unstable_direction(&self) -> Result<Point, HenonError> {
        let (l, _) = self.eigenvalues()?;
        let n = l.hypot(self.b);
        let v = Point::new(l / n, self.b / n);
        Ok(if v.x > 0.0 { Point::new(-v.x, -v.y) } else { v })
    }
}

pub fn henon_apply(p: &HenonParams, pt: Point) -> Point {
    Point::new(1.0 + pt.y - p.a * pt.x * pt.x, p.b * pt.x)
}

pub fn henon_inverse(p: &HenonParams, pt: Point) -> Point {
    let x = pt.y / p.b;
    Point::new(x, pt.x - 1.0 + p.a * x * x)
}

fn apply_jacobian(p: &HenonParams, at: Point, v: Point) -> Point {
    Point::new(-2.0 * p.a * at.x * v.x + v.y, p.b * v.x)
}

fn normalized(v: Point) -> Point {
    let n = v.x.hypot(v.y);
    Point::new(v.x / n, v.y / n)
}

/// One of the two components of `W^u` minus X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    /// Leaves X towards smaller `x`; negative arclength.
    Neg,
    Pos,
}

impl Arm {
    pub fn flip(self) -> Arm {
        match self {
            Arm::Neg => Arm::Pos,
            Arm::Pos => Arm::Neg,
        }
    }
}

/// Position `t = half_steps / 2 + offset` on one arm, `0 <= offset < 1/2`.
/// Splitting `t` keeps the resolution of `offset` near one ulp of 0.5 and
/// makes the map an exact shift of `half_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WuCoord {
    pub arm: Arm,
    pub half_steps: u32,
    pub offset: f64,
}

impl WuCoord {
    pub fn new(arm: Arm, half_steps: u32, offset: f64) -> Self {
        let (mut h, mut g) = (half_steps, offset);
        while g >= 0.5 {
            h += 1;
            g -= 0.5;
        }
        WuCoord { arm, half_steps: h, offset: g }
    }

    pub fn t(&self) -> f64 {
        self.half_steps as f64 * 0.5 + self.offset
    }

    pub fn image(&self) -> WuCoord {
        WuCoord { arm: self.arm.flip(), half_steps: self.half_steps + 1, offset: self.offset }
    }

    pub fn preimage(&self) -> Option<WuCoord> {
        let h = self.half_steps.checked_sub(1)?;
        Some(WuCoord { arm: self.arm.flip(), half_steps: h, offset: self.offset })
    }

    /// Order along the arm, away from X.
    pub fn cmp_along(&self, o: &WuCoord) -> std::cmp::Ordering {
        self.half_steps.cmp(&o.half_steps).then(self.offset.total_cmp(&o.offset))
    }
}

/// Exact evaluation of the unstable manifold in [`WuCoord`]s.
#[derive(Clone, Copy, Debug)]
pub struct HenonCurve {
    pub params: HenonParams,
    pub seed_eps: f64,
    fixed: Point,
    dir: Point,
    lam2: f64,
}

impl HenonCurve {
    pub fn new(params: HenonParams, seed_eps: f64) -> Result<Self, HenonError> {
        params.check()?;
        let (l, _) = params.eigenvalues()?;
        Ok(HenonCurve { params, seed_eps, fixed: params.fixed_point(), dir: params.unstable_direction()?, lam2: l * l })
    }

    /// Point and unit tangent (pointing away from X).
    pub fn eval(&self, c: WuCoord) -> (Point, Point) {
        let m = c.half_steps / 2;
        let mut s = self.seed_eps * self.lam2.powf(c.offset);
        if c.half_steps % 2 == 1 {
            s *= self.lam2.sqrt();
        }
        let d = if c.arm == Arm::Neg { self.dir } else { Point::new(-self.dir.x, -self.dir.y) };
        let mut q = Point::new(self.fixed.x + s * d.x, self.fixed.y + s * d.y);
        let mut v = d;
        for _ in 0..2 * m {
            v = normalized(apply_jacobian(&self.params, q, v));
            q = henon_apply(&self.params, q);
        }
        (q, v)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HenonGrowOptions {
    pub seed_eps: f64,
    /// Longest allowed segment.
    pub seg_tol: f64,
    /// Largest turn of the tangent across one segment, in radians.
    pub max_turn: f64,
    pub max_vertices: usize,
}

impl Default for HenonGrowOptions {
    fn default() -> Self {
        HenonGrowOptions { seed_eps: 1e-8, seg_tol: 1e-3, max_turn: 0.1, max_vertices: 4_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Sample {
    c: WuCoord,
    point: Point,
    tangent: Point,
}

/// Offset of `r` measured in the half step of `l` (`r` is at most one
/// step further).
fn local_offset(l: &WuCoord, r: &WuCoord) -> f64 {
    if r.half_steps == l.half_steps {
        r.offset
    } else {
        0.5 + r.offset
    }
}

/// A computed unstable manifold together with its exact parametrization.
#[derive(Clone, Debug)]
pub struct HenonManifold {
    pub curve: HenonCurve,
    pub poly: WuPolyline,
    /// Coordinate of every polyline vertex, `None` for X.
    pub coords: Vec<Option<WuCoord>>,
    /// Half steps computed on both arms.
    pub half_steps: u32,
    neg: Vec<Sample>,
    pos: Vec<Sample>,
    neg_len: Vec<f64>,
    pos_len: Vec<f64>,
}

fn refine(curve: &HenonCurve, a: Sample, b: Sample, opts: &HenonGrowOptions, out: &mut Vec<Sample>) {
    let mut stack = vec![(a, b)];
    while let Some((l, r)) = stack.pop() {
        let d = l.point.dist(r.point);
        let turn = (l.tangent.x * r.tangent.x + l.tangent.y * r.tangent.y).clamp(-1.0, 1.0).acos();
        let split = d > opts.seg_tol || (turn > opts.max_turn && d > opts.seg_tol * 1e-6);
        let rg = local_offset(&l.c, &r.c);
        let g = 0.5 * (l.c.offset + rg);
        if !split || g <= l.c.offset || g >= rg {
            out.push(r);
            continue;
        }
        let c = WuCoord::new(l.c.arm, l.c.half_steps, g);
        let (point, tangent) = curve.eval(c);
        let m = Sample { c, point, tangent };
        // right half first so the left half is emitted first
        stack.push((m, r));
        stack.push((l, m));
    }
}

fn arclengths(s: &[Sample], fixed: Point) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    let mut prev = fixed;
    for x in s {
        acc += prev.dist(x.point);
        out.push(acc);
        prev = x.point;
    }
    out
}

/// Grows both arms until each is at least `target_arclength` long.
pub fn grow_wu(p: &HenonParams, target_arclength: f64, opts: &HenonGrowOptions) -> Result<HenonManifold, HenonError> {
    let curve = HenonCurve::new(*p, opts.seed_eps)?;
    let sample = |c: WuCoord| {
        let (point, tangent) = curve.eval(c);
        Sample { c, point, tangent }
    };
    let mut neg = vec![sample(WuCoord::new(Arm::Neg, 0, 0.0))];
    let mut pos = vec![sample(WuCoord::new(Arm::Pos, 0, 0.0))];
    let mut h = 0;
    let (mut ln, mut lp) = (0.0f64, 0.0f64);
    while h < 2 || ln.min(lp) < target_arclength {
        for (arm, samples, len) in [(Arm::Neg, &mut neg, &mut ln), (Arm::Pos, &mut pos, &mut lp)] {
            let a = *samples.last().expect("seeded");
            let k = samples.len();
            refine(&curve, a, sample(WuCoord::new(arm, h + 1, 0.0)), opts, samples);
            let mut prev = a.point;
            for s in &samples[k..] {
                *len += prev.dist(s.point);
                prev = s.point;
            }
        }
        if neg.len() + pos.len() > opts.max_vertices {
            return Err(HenonError::BudgetExceeded { budget: opts.max_vertices });
        }
        h += 1;
    }
    let mut m = HenonManifold {
        curve,
        poly: WuPolyline {
            vertices: Vec::new(),
            phi: Vec::new(),
            origin_index: 0,
            markers: Vec::new(),
            image_map: None,
            heuristic: true,
        },
        coords: Vec::new(),
        half_steps: h,
        neg,
        pos,
        neg_len: Vec::new(),
        pos_len: Vec::new(),
    };
    m.rebuild();
    Ok(m)
}

impl HenonManifold {
    fn samples(&self, arm: Arm) -> &[Sample] {
        match arm {
            Arm::Neg => &self.neg,
            Arm::Pos => &self.pos,
        }
    }

    fn rebuild(&mut self) {
        let fixed = self.curve.params.fixed_point();
        self.neg_len = arclengths(&self.neg, fixed);
        self.pos_len = arclengths(&self.pos, fixed);
        let n = self.neg.len() + self.pos.len() + 1;
        let mut vertices = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        let mut coords = Vec::with_capacity(n);
        for (s, l) in self.neg.iter().zip(&self.neg_len).rev() {
            vertices.push(s.point);
            phi.push(-l);
            coords.push(Some(s.c));
        }
        let origin_index = vertices.len();
        vertices.push(fixed);
        phi.push(0.0);
        coords.push(None);
        for (s, l) in self.pos.iter().zip(&self.pos_len) {
            vertices.push(s.point);
            phi.push(*l);
            coords.push(Some(s.c));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (k, c) in coords.iter().enumerate() {
            let image = match c {
                None => Some(0.0),
                Some(c) => self.phi_at(c.image()),
            };
            if let Some(y) = image {
                xs.push(phi[k]);
                ys.push(y);
            }
        }
        let (xs, ys) = strictly_monotone(xs, ys);
        self.poly.vertices = vertices;
        self.poly.phi = phi;
        self.poly.origin_index = origin_index;
        self.poly.image_map = Some(ParamMap::new(xs, ys));
        self.coords = coords;
    }

    /// Arclength parameter of `c`, interpolated between vertices.
    pub fn phi_at(&self, c: WuCoord) -> Option<f64> {
        let (s, l, sign) = match c.arm {
            Arm::Neg => (&self.neg, &self.neg_len, -1.0),
            Arm::Pos => (&self.pos, &self.pos_len, 1.0),
        };
        if c.cmp_along(&s.last()?.c).is_gt() {
            return None;
        }
        let k = s.partition_point(|x| x.c.cmp_along(&c).is_lt());
        if k < s.len() && s[k].c.cmp_along(&c).is_eq() {
            return Some(sign * l[k]);
        }
        if k == 0 {
            return Some(sign * l[0]);
        }
        let (a, b) = (&s[k - 1].c, &s[k].c);
        let f = (local_offset(a, &c) - a.offset) / (local_offset(a, b) - a.offset);
        Some(sign * (l[k - 1] + f * (l[k] - l[k - 1])))
    }

    /// Inserts exact vertices at the given coordinates.
    pub fn insert(&mut self, extra: &[WuCoord]) {
        for &c in extra {
            if c.half_steps >= self.half_steps {
                continue;
            }
            let (point, tangent) = self.curve.eval(c);
            let s = match c.arm {
                Arm::Neg => &mut self.neg,
                Arm::Pos => &mut self.pos,
            };
            let k = s.partition_point(|x| x.c.cmp_along(&c).is_lt());
            if k < s.len() && s[k].c.cmp_along(&c).is_eq() {
                continue;
            }
            s.insert(k, Sample { c, point, tangent });
        }
        self.rebuild();
    }

    /// Coordinate of the manifold point with arclength `phi`; `None` at X
    /// and outside the computed range.
    pub fn coord_at(&self, phi: f64) -> Option<WuCoord> {
        let p = &self.poly.phi;
        if phi == 0.0 || !(p[0]..=*p.last()?).contains(&phi) {
            return None;
        }
        let k = p.partition_point(|&x| x <= phi).clamp(1, p.len() - 1);
        let f = (phi - p[k - 1]) / (p[k] - p[k - 1]);
        match (self.coords[k - 1], self.coords[k]) {
            (Some(a), Some(b)) => {
                // vertices run away from X on the positive side only
                let (near, far, f) = if a.arm == Arm::Pos { (a, b, f) } else { (b, a, 1.0 - f) };
                let g = near.offset + f * (local_offset(&near, &far) - near.offset);
                Some(WuCoord::new(near.arm, near.half_steps, g))
            }
            (None, Some(c)) | (Some(c), None) => Some(c),
            (None, None) => None,
        }
    }
}

/// A point where the manifold is tangent to the contracting direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCandidate {
    pub location: Point,
    pub coord: WuCoord,
    pub phi: f64,
    /// `max_n (log |DF^n tau| - n log b) / n` over `n <= j_max`.
    pub contraction_score: f64,
    pub index: i64,
}

/// Angle between `tau` and the most contracted direction of `DF^n(q)`,
/// folded into `(-pi/2, pi/2]`, and the contraction score of `tau`.
pub fn tangency(p: &HenonParams, q: Point, tau: Point, n: usize) -> (f64, f64) {
    // normalized product DF^n
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut z = q;
    let mut v = tau;
    let mut log_v = 0.0;
    let mut score = f64::NEG_INFINITY;
    let lb = p.b.ln();
    for k in 1..=n {
        let j = p.jacobian(z);
        let r = [
            [j[0][0] * m[0][0] + j[0][1] * m[1][0], j[0][0] * m[0][1] + j[0][1] * m[1][1]],
            [j[1][0] * m[0][0] + j[1][1] * m[1][0], j[1][0] * m[0][1] + j[1][1] * m[1][1]],
        ];
        let s = r[0][0].abs().max(r[0][1].abs()).max(r[1][0].abs()).max(r[1][1].abs());
        m = [[r[0][0] / s, r[0][1] / s], [r[1][0] / s, r[1][1] / s]];
        let w = apply_jacobian(p, z, v);
        let nw = w.x.hypot(w.y);
        log_v += nw.ln();
        v = Point::new(w.x / nw, w.y / nw);
        score = score.max((log_v - k as f64 * lb) / k as f64);
        z = henon_apply(p, z);
    }
    let row = if m[0][0].hypot(m[0][1]) >= m[1][0].hypot(m[1][1]) { m[0] } else { m[1] };
    let e = normalized(Point::new(-row[1], row[0]));
    let mut theta = (e.x * tau.y - e.y * tau.x).atan2(e.x * tau.x + e.y * tau.y);
    if theta > std::f64::consts::FRAC_PI_2 {
        theta -= std::f64::consts::PI;
    } else if theta <= -std::f64::consts::FRAC_PI_2 {
        theta += std::f64::consts::PI;
    }
    (theta, score)
}

#[derive(Clone, Copy, Debug)]
pub struct DetectOptions {
    pub j_max: usize,
    pub score_threshold: f64,
    pub strip: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { j_max: DEFAULT_J_MAX, score_threshold: DEFAULT_SCORE_THRESHOLD, strip: DEFAULT_STRIP }
    }
}

/// Candidates closer than this in offset are the same point.
const SAME_OFFSET: f64 = 1e-12;

/// Critical candidates on the computed manifold, indexed like the Lozi
/// crossings: `z_0, z_1, ..` on the negative arm outwards, `z_-1, z_-2, ..`
/// on the positive arm.
pub fn detect_critical_points(m: &HenonManifold, opts: &DetectOptions) -> Result<Vec<CriticalCandidate>, HenonError> {
    let p = &m.curve.params;
    let theta_at = |c: WuCoord| {
        let (q, tau) = m.curve.eval(c);
        tangency(p, q, tau, opts.j_max)
    };
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut raw: Vec<(WuCoord, f64)> = Vec::new();
    for arm in [Arm::Neg, Arm::Pos] {
        let mut prev: Option<(WuCoord, f64)> = None;
        for x in m.samples(arm) {
            if x.point.x.abs() >= opts.strip {
                prev = None;
                continue;
            }
            let (th, _) = tangency(p, x.point, x.tangent, opts.j_max);
            if let Some((c0, th0)) = prev {
                if th0.signum() != th.signum() && th0.abs() < quarter && th.abs() < quarter {
                    let (mut lo, mut hi, mut flo) = (c0.offset, local_offset(&c0, &x.c), th0);
                    loop {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        let (fm, _) = theta_at(WuCoord::new(arm, c0.half_steps, mid));
                        if fm.signum() == flo.signum() {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    let c = WuCoord::new(arm, c0.half_steps, lo);
                    let (_, score) = theta_at(c);
                    if score < opts.score_threshold {
                        raw.push((c, score));
                    }
                }
            }
            prev = Some((x.c, th));
        }
    }
    // images of earlier candidates are tangencies too; keep only the first
    // point of each orbit
    let same = |a: &WuCoord, b: &WuCoord| {
        a.arm == b.arm && a.half_steps == b.half_steps && (a.offset - b.offset).abs() < SAME_OFFSET
    };
    let mut kept: Vec<(WuCoord, f64)> = raw
        .iter()
        .copied()
        .filter(|(c, _)| {
            let mut u = *c;
            while let Some(v) = u.preimage() {
                if raw.iter().any(|(r, _)| same(r, &v)) {
                    return false;
                }
                u = v;
            }
            true
        })
        .collect();
    kept.sort_by(|a, b| a.0.arm.cmp(&b.0.arm).then(a.0.cmp_along(&b.0)));
    kept.dedup_by(|a, b| same(&a.0, &b.0));
    if kept.is_empty() {
        return Err(HenonError::NoCandidates);
    }
    let mut out = Vec::with_capacity(kept.len());
    let (mut n_neg, mut n_pos) = (0i64, 0i64);
    for (coord, score) in kept {
        let index = match coord.arm {
            Arm::Neg => {
                n_neg += 1;
                n_neg - 1
            }
            Arm::Pos => {
                n_pos += 1;
                -n_pos
            }
        };
        let (location, _) = m.curve.eval(coord);
        let phi = m.phi_at(coord).ok_or(HenonError::OutOfRange { phi: f64::NAN })?;
        out.push(CriticalCandidate { location, coord, phi, contraction_score: score, index });
    }
    Ok(out)
}

/// Straight connectors through the candidates ordered by height, extended
/// vertically past the lowest and highest ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalLocus {
    pub points: Vec<Point>,
}

/// Candidates closer than this in height are considered unordered.
pub const LOCUS_RESOLUTION: f64 = 1e-12;

pub fn approx_critical_locus(cands: &[CriticalCandidate]) -> Result<CriticalLocus, HenonError> {
    if cands.is_empty() {
        return Err(HenonError::NoCandidates);
    }
    let mut points: Vec<Point> = cands.iter().map(|c| c.location).collect();
    points.sort_by(|a, b| a.y.total_cmp(&b.y));
    for w in points.windows(2) {
        if w[1].y - w[0].y < LOCUS_RESOLUTION {
            return Err(HenonError::OrderingAmbiguous { y: w[0].y });
        }
    }
    Ok(CriticalLocus { points })
}

impl CriticalLocus {
    /// Abscissa of the locus at height `y`.
    pub fn x_at(&self, y: f64) -> f64 {
        let p = &self.points;
        if y <= p[0].y {
            return p[0].x;
        }
        if y >= p[p.len() - 1].y {
            return p[p.len() - 1].x;
        }
        let k = p.partition_point(|q| q.y <= y);
        let (a, b) = (p[k - 1], p[k]);
        a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x)
    }

    /// Side of `q`, `~` within `eps` of the locus.
    pub fn side(&self, q: Point, eps: f64) -> Symbol {
        Symbol::of_value(q.x - self.x_at(q.y), eps)
    }

    /// Smallest distance from a sample point to the interior of a connector.
    pub fn clearance(&self, samples: &[Point]) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let l2 = dx * dx + dy * dy;
            for &q in samples {
                let t = ((q.x - a.x) * dx + (q.y - a.y) * dy) / l2;
                if t > 1e-9 && t < 1.0 - 1e-9 {
                    best = best.min(q.dist(a.lerp(b, t)));
                }
            }
        }
        best
    }
}

/// Forward symbols of `q` relative to the locus.
pub fn forward_symbols(p: &HenonParams, locus: &CriticalLocus, q: Point, depth: usize, eps: f64) -> Vec<Symbol> {
    let mut z = q;
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        out.push(locus.side(z, eps));
        z = henon_apply(p, z);
    }
    out
}

/// Manifold, candidates and locus, with critical and post-critical markers
/// placed exactly on the manifold.
#[derive(Clone, Debug)]
pub struct HenonModel {
    pub manifold: HenonManifold,
    pub candidates: Vec<CriticalCandidate>,
    pub locus: CriticalLocus,
    pub eps: f64,
}

pub fn build_model(
    p: &HenonParams,
    target_arclength: f64,
    grow: &HenonGrowOptions,
    detect: &DetectOptions,
    eps: f64,
) -> Result<HenonModel, HenonError> {
    let mut manifold = grow_wu(p, target_arclength, grow)?;
    let candidates = detect_critical_points(&manifold, detect)?;
    let locus = approx_critical_locus(&candidates)?;
    let mut extra = Vec::new();
    for c in &candidates {
        let mut u = c.coord;
        while u.half_steps < manifold.half_steps {
            extra.push(u);
            u = u.image();
        }
    }
    manifold.insert(&extra);
    let mut markers = Vec::new();
    for (k, c) in manifold.coords.iter().enumerate() {
        let Some(c) = c else { continue };
        for cand in &candidates {
            let z = cand.coord;
            if c.offset != z.offset || c.half_steps < z.half_steps {
                continue;
            }
            let j = c.half_steps - z.half_steps;
            let arm = if j % 2 == 0 { z.arm } else { z.arm.flip() };
            if c.arm != arm {
                continue;
            }
            markers.push(Marker {
                phi: manifold.poly.phi[k],
                point: manifold.poly.vertices[k],
                kind: if j == 0 { MarkerKind::Critical } else { MarkerKind::PostCritical },
                index: cand.index,
                iterate: j,
            });
        }
    }
    markers.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    manifold.poly.markers = markers;
    Ok(HenonModel { manifold, candidates, locus, eps })
}

impl HenonModel {
    pub fn candidate(&self, index: i64) -> Option<&CriticalCandidate> {
        self.candidates.iter().find(|c| c.index == index)
    }

    /// Arc-code of the manifold point `c`: its sides along the backward
    /// orbit until the orbit enters `[z_0, z_0^1]`, oldest first.
    pub fn arc_code(&self, c: WuCoord) -> Result<SymbolWord, HenonError> {
        let z0 = self.candidate(0).ok_or(HenonError::NoCandidates)?.coord;
        let z01 = z0.image();
        let inside = |u: &WuCoord| match u.arm {
            Arm::Neg => u.cmp_along(&z0).is_le(),
            Arm::Pos => u.cmp_along(&z01).is_le(),
        };
        let mut out = Vec::new();
        let mut u = c;
        while !inside(&u) {
            let (q, _) = self.manifold.curve.eval(u);
            out.push(self.locus.side(q, self.eps));
            u = u.preimage().expect("central arc reached before the seed");
        }
        out.reverse();
        Ok(SymbolWord(out))
    }

    /// Itinerary window `+^inf w . p_0 p_1 ..` of the manifold point at `phi`.
    pub fn itinerary_of(&self, phi: f64, fwd_depth: usize) -> Result<TwoSidedWindow, HenonError> {
        let p = &self.manifold.curve.params;
        let Some(c) = self.manifold.coord_at(phi) else {
            if phi == 0.0 {
                return Ok(TwoSidedWindow::all_plus(fwd_depth));
            }
            return Err(HenonError::OutOfRange { phi });
        };
        let mut code = self.arc_code(c)?.0;
        code.pop();
        let (q, _) = self.manifold.curve.eval(c);
        let right = forward_symbols(p, &self.locus, q, fwd_depth, self.eps);
        Ok(TwoSidedWindow::new(SymbolWord(code), true, SymbolWord(right)))
    }

    /// Kneading sequences for the given candidate indices.
    pub fn kneading_set(&self, indices: &[i64], depth: usize) -> Result<KneadingSet, HenonError> {
        let p = &self.manifold.curve.params;
        let mut items = Vec::new();
        for &i in indices {
            let c = self.candidate(i).ok_or(HenonError::NoCandidates)?;
            let pre = c.coord.preimage().ok_or(HenonError::OutOfRange { phi: c.phi })?;
            let code = self.arc_code(pre)?;
            let turning = henon_apply(p, c.location);
            let tail = forward_symbols(p, &self.locus, turning, depth, self.eps);
            if let Some(k) = tail.iter().position(|&s| s == Symbol::PlusMinus) {
                return Err(HenonError::LocusAmbiguous { iterate: k });
            }
            if tail.first() == Some(&Symbol::Minus) {
                return Err(HenonError::TurningPointOnLeft { index: i });
            }
            items.push((i, KneadingSequence::new(code, SymbolWord(tail))?));
        }
        Ok(KneadingSet::from_indexed(items)?)
    }

    /// Folding pattern through generation `g`.
    pub fn folding_pattern(&self, g: usize) -> Result<FoldingPattern, HenonError> {
        Ok(self.manifold.poly.folding_pattern(g)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HenonOptions {
    pub grow: HenonGrowOptions,
    pub detect: DetectOptions,
    pub locus_eps: f64,
}

impl Default for HenonOptions {
    fn default() -> Self {
        HenonOptions { grow: HenonGrowOptions::default(), detect: DetectOptions::default(), locus_eps: 1e-9 }
    }
}

/// Smallest model holding the candidates `z_lo .. z_hi` and their
/// preimages.
pub fn model_for_indices(p: &HenonParams, lo: i64, hi: i64, opts: &HenonOptions) -> Result<HenonModel, HenonError> {
    let mut target = 2.0;
    loop {
        let m = build_model(p, target, &opts.grow, &opts.detect, opts.locus_eps);
        if let Ok(m) = &m {
            let has = |i: i64| m.candidate(i).is_some_and(|c| c.coord.half_steps > 0);
            if has(lo) && has(hi) {
                return Ok(m.clone());
            }
        }
        if target > 1e4 {
            return m.and(Err(HenonError::NoCandidates));
        }
        target *= 1.5;
    }
}

/// Kneading set of the `count` candidates nearest X in index; heuristic.
pub fn kneading_set_of(
    p: &HenonParams,
    count: usize,
    depth: usize,
    opts: &HenonOptions,
) -> Result<KneadingSet, HenonError> {
    let idx = crate::lozi::nearest_indices(count.max(1));
    let (lo, hi) = (*idx.iter().min().unwrap(), *idx.iter().max().unwrap());
    let m = model_for_indices(p, lo, hi, opts)?;
    m.kneading_set(&idx, depth)
}

/// Folding pattern through generation `g`; heuristic.
pub fn folding_pattern_of(p: &HenonParams, g: usize, opts: &HenonOptions) -> Result<FoldingPattern, HenonError> {
    let mut target = 2.0;
    loop {
        match build_model(p, target, &opts.grow, &opts.detect, opts.locus_eps) {
            Ok(m) if m.manifold.poly.marker(0, g as u32 + 1).is_some() => return m.folding_pattern(g),
            Ok(_) | Err(HenonError::NoCandidates) => {}
            Err(e) => return Err(e),
        }
        if target > 1e4 {
            return Err(HenonError::OutOfRange { phi: target });
        }
        target *= 1.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: HenonParams = HenonParams::new(1.9, 0.025);

    #[test]
    fn map_and_inverse() {
        assert_eq!(henon_apply(&HenonParams::new(1.4, 0.3), Point::new(0.0, 0.0)), Point::new(1.0, 0.0));
        let q = Point::new(0.3, -0.1);
        assert!(henon_inverse(&P, henon_apply(&P, q)).dist(q) < 1e-12);
    }

    #[test]
    fn fixed_points_solve_quadratic() {
        for x in [P.fixed_point(), P.second_fixed_point()] {
            assert!(henon_apply(&P, x).dist(x) < 1e-14);
            assert!((P.a * x.x * x.x + (1.0 - P.b) * x.x - 1.0).abs() < 1e-14);
        }
        assert!(P.fixed_point().x > 0.0);
    }

    #[test]
    fn eigen_data() {
        let (u, s) = P.eigenvalues().unwrap();
        assert!(u < -1.0 && s.abs() < 1.0);
        assert!((u * s + P.b).abs() < 1e-14);
        let d = P.unstable_direction().unwrap();
        assert!(d.x < 0.0);
        assert!(HenonParams::new(1.9, 0.0).check().is_err());
        assert!(!HenonParams::new(1.0, 0.025).check().unwrap().is_empty());
        assert!(P.check().unwrap().is_empty());
    }

    #[test]
    fn curve_conjugates_map() {
        let c = HenonCurve::new(P, 1e-8).unwrap();
        for (h, g) in [(0, 0.3), (3, 0.2), (6, 0.25)] {
            let u = WuCoord::new(Arm::Neg, h, g);
            let (q, _) = c.eval(u);
            let (r, _) = c.eval(u.image());
            assert!(henon_apply(&P, q).dist(r) < 1e-9, "{u:?}");
        }
        assert_eq!(WuCoord::new(Arm::Pos, 1, 0.75), WuCoord::new(Arm::Pos, 2, 0.25));
        assert_eq!(WuCoord::new(Arm::Pos, 1, 0.2).t(), 0.7);
    }

    #[test]
    fn locus_side_and_extension() {
        let l = CriticalLocus { points: vec![Point::new(0.0, -1.0), Point::new(0.2, 1.0)] };
        assert_eq!(l.x_at(0.0), 0.1);
        assert_eq!(l.x_at(5.0), 0.2);
        assert_eq!(l.side(Point::new(0.0, 0.0), 1e-9), Symbol::Minus);
        assert_eq!(l.side(Point::new(0.1, 0.0), 1e-9), Symbol::PlusMinus);
        assert_eq!(l.side(Point::new(0.3, -2.0), 1e-9), Symbol::Plus);
    }
}
