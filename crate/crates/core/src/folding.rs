//! Folding patterns: the 0/1 word of critical and post-critical basic points
//! along the unstable manifold, and its conversions to and from kneading sets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kneading::{KneadingError, KneadingSequence, KneadingSet};
use crate::symbolic::{Symbol, SymbolWord};

/// `0` marks a critical point, `1` a post-critical point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Zero,
    One,
}

impl Mark {
    pub fn digit(self) -> u8 {
        match self {
            Mark::Zero => 0,
            Mark::One => 1,
        }
    }

    pub fn from_digit(d: u8) -> Option<Mark> {
        match d {
            0 => Some(Mark::Zero),
            1 => Some(Mark::One),
            _ => None,
        }
    }
}

impl Serialize for Mark {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.digit())
    }
}

impl<'de> Deserialize<'de> for Mark {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Mark::from_digit(v).ok_or_else(|| serde::de::Error::custom(format!("mark must be 0 or 1, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoldingError {
    #[error("malformed pattern: {0}")]
    MalformedPattern(String),
    #[error("kneading data too short to build generation {generation}")]
    InsufficientDepth { generation: usize },
    #[error("window too short to read the arc-code of turning point {index}")]
    InsufficientWindow { index: i64 },
    #[error("kneading data inconsistent with a folding pattern: {0}")]
    InconsistentKneading(String),
    #[error(transparent)]
    Kneading(#[from] KneadingError),
}

fn malformed(msg: impl Into<String>) -> FoldingError {
    FoldingError::MalformedPattern(msg.into())
}

/// Marks at coordinates `-1, -2, ..` (`left`) and `1, 2, ..` (`right`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FoldingPattern {
    pub left: Vec<Mark>,
    pub right: Vec<Mark>,
    /// The window reaches from `z_0^g` to `z_0^(g+1)`.
    pub generations: usize,
}

impl FoldingPattern {
    /// Builds a pattern and infers its generation count.
    pub fn from_marks(left: Vec<Mark>, right: Vec<Mark>) -> Result<Self, FoldingError> {
        let mut fp = FoldingPattern { left, right, generations: 0 };
        let ann = annotate(&fp)?;
        fp.generations = ann.max_generation();
        Ok(fp)
    }

    /// The seed window `1 0 . 1`.
    pub fn seed() -> Self {
        FoldingPattern { left: vec![Mark::Zero, Mark::One], right: vec![Mark::One], generations: 1 }
    }

    pub fn mark(&self, coord: i64) -> Option<Mark> {
        match coord {
            0 => None,
            c if c > 0 => self.right.get(c as usize - 1).copied(),
            c => self.left.get((-c) as usize - 1).copied(),
        }
    }

    /// Cuts the window down to `[z_0^g, z_0^(g+1)]`.
    pub fn truncated(&self, g: usize) -> Result<FoldingPattern, FoldingError> {
        let ann = annotate(self)?;
        if g == 0 || g > ann.max_generation() {
            return Err(malformed(format!("cannot truncate to generation {g}")));
        }
        let a = ann.coord_of(0, g as u32).expect("present");
        let b = ann.coord_of(0, g as u32 + 1).expect("present");
        let (l, r) = if a < 0 { (-a, b) } else { (-b, a) };
        Ok(FoldingPattern {
            left: self.left[..l as usize].to_vec(),
            right: self.right[..r as usize].to_vec(),
            generations: g,
        })
    }
}

impl fmt::Display for FoldingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.left.iter().rev().map(|m| m.digit().to_string()).collect();
        parts.push(".".into());
        parts.extend(self.right.iter().map(|m| m.digit().to_string()));
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for FoldingPattern {
    type Err = FoldingError;

    /// Space-separated `0`/`1` tokens with a single `.` at the origin.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut origin = false;
        for (k, tok) in s.split_whitespace().enumerate() {
            match tok {
                "." if !origin => origin = true,
                "0" | "1" => {
                    let m = if tok == "0" { Mark::Zero } else { Mark::One };
                    if origin {
                        right.push(m)
                    } else {
                        left.push(m)
                    }
                }
                _ => return Err(malformed(format!("unexpected token {tok:?} at position {k}"))),
            }
        }
        if !origin {
            return Err(malformed("missing origin marker '.'"));
        }
        left.reverse();
        FoldingPattern::from_marks(left, right)
    }
}

/// One annotated basic point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub coord: i64,
    pub mark: Mark,
    /// `~` on a critical point.
    pub sign: Symbol,
    pub subscript: i64,
    pub superscript: u32,
    /// Coordinate of the image, if inside the window.
    pub arrow: Option<i64>,
}

/// A folding pattern with signs, labels `z_i^j` and map arrows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPattern {
    pub pattern: FoldingPattern,
    /// Left to right: coordinates `-L..-1`, then `1..R`.
    pub positions: Vec<Position>,
    #[serde(skip)]
    labels: HashMap<(i64, u32), i64>,
}

impl AnnotatedPattern {
    pub fn at(&self, coord: i64) -> Option<&Position> {
        let l = self.pattern.left.len() as i64;
        let idx = if coord < 0 {
            l + coord
        } else if coord > 0 {
            l + coord - 1
        } else {
            return None;
        };
        self.positions.get(usize::try_from(idx).ok()?)
    }

    /// Coordinate of `z_i^j`.
    pub fn coord_of(&self, i: i64, j: u32) -> Option<i64> {
        self.labels.get(&(i, j)).copied()
    }

    /// Largest `g` with `z_0^(g+1)` in the window.
    pub fn max_generation(&self) -> usize {
        (1..).take_while(|&j| self.coord_of(0, j).is_some()).last().unwrap_or(1) as usize - 1
    }

    /// Sign of the arc between `coord` and its outer neighbour.
    fn arc_sign_outward(&self, coord: i64) -> Symbol {
        let p = self.at(coord).expect("stored");
        match p.mark {
            Mark::One => p.sign,
            Mark::Zero => {
                let inner = if coord.abs() == 1 { Symbol::Plus } else { self.at(coord - coord.signum()).unwrap().sign };
                inner.flip()
            }
        }
    }
}

/// Derives arrows, labels and signs.
pub fn annotate(fp: &FoldingPattern) -> Result<AnnotatedPattern, FoldingError> {
    if fp.left.first() != Some(&Mark::Zero) || fp.right.first() != Some(&Mark::One) {
        return Err(malformed("window must start `1 0 . 1` around the origin"));
    }
    for side in [&fp.left, &fp.right] {
        if side.windows(2).any(|w| w == [Mark::Zero, Mark::Zero]) {
            return Err(malformed("two adjacent 0s"));
        }
    }
    let ones = |side: &[Mark]| -> Vec<i64> {
        side.iter().enumerate().filter(|(_, m)| **m == Mark::One).map(|(k, _)| k as i64 + 1).collect()
    };
    let ones_left = ones(&fp.left);
    let ones_right = ones(&fp.right);
    // the k-th basic point on one side maps to the k-th 1 on the other
    let arrow = |c: i64| -> Option<i64> {
        if c > 0 {
            ones_left.get(c as usize - 1).map(|&q| -q)
        } else {
            ones_right.get((-c) as usize - 1).copied()
        }
    };
    let pre = |q: i64| -> Option<i64> {
        let list = if q > 0 { &ones_right } else { &ones_left };
        let rank = list.iter().position(|&x| x == q.abs())? as i64 + 1;
        let c = if q > 0 { -rank } else { rank };
        let side = if c > 0 { &fp.right } else { &fp.left };
        (rank as usize <= side.len()).then_some(c)
    };

    let coords: Vec<i64> = (1..=fp.left.len() as i64).rev().map(|k| -k).chain(1..=fp.right.len() as i64).collect();
    let mut zero_left = 0i64;
    let mut zero_right = 0i64;
    let mut label: HashMap<i64, (i64, u32)> = HashMap::new();
    for side in [-1i64, 1] {
        let n = if side < 0 { fp.left.len() } else { fp.right.len() };
        for k in 1..=n as i64 {
            let c = side * k;
            if fp.mark(c) == Some(Mark::Zero) {
                let i = if side < 0 {
                    zero_left += 1;
                    zero_left - 1
                } else {
                    zero_right += 1;
                    -zero_right
                };
                label.insert(c, (i, 0));
            }
        }
    }
    // preimages of 1s are never farther out than the 1 itself
    let mut order = coords.clone();
    order.sort_by_key(|c| (c.abs(), *c > 0));
    for _ in 0..2 {
        for &c in &order {
            if label.contains_key(&c) {
                continue;
            }
            let p = pre(c).ok_or_else(|| malformed(format!("1 at {c} has no preimage in the window")))?;
            if let Some(&(i, j)) = label.get(&p) {
                label.insert(c, (i, j + 1));
            }
        }
    }
    if label.len() != coords.len() {
        return Err(malformed("cyclic arrows"));
    }

    let mut sign_of: HashMap<i64, Symbol> = HashMap::new();
    for side in [-1i64, 1] {
        let n = if side < 0 { fp.left.len() } else { fp.right.len() };
        let mut arc = Symbol::Plus;
        for k in 1..=n as i64 {
            let c = side * k;
            if fp.mark(c) == Some(Mark::Zero) {
                sign_of.insert(c, Symbol::PlusMinus);
                arc = arc.flip();
            } else {
                sign_of.insert(c, arc);
            }
        }
    }

    let mut positions = Vec::with_capacity(coords.len());
    let mut labels = HashMap::new();
    for &c in &coords {
        let (i, j) = label[&c];
        if j == 1 && sign_of[&c] != Symbol::Plus {
            return Err(malformed(format!("turning point z_{i}^1 at {c} lies on the '-' side")));
        }
        if labels.insert((i, j), c).is_some() {
            return Err(malformed(format!("label z_{i}^{j} assigned twice")));
        }
        positions.push(Position {
            coord: c,
            mark: fp.mark(c).unwrap(),
            sign: sign_of[&c],
            subscript: i,
            superscript: j,
            arrow: arrow(c),
        });
    }
    let ann = AnnotatedPattern { pattern: fp.clone(), positions, labels };
    if fp.generations > ann.max_generation() {
        return Err(malformed(format!(
            "declared {} generations, window holds {}",
            fp.generations,
            ann.max_generation()
        )));
    }
    Ok(ann)
}

/// Builds the first `generations` generations of the folding pattern from
/// kneading data.
///
/// Each step maps the not yet mapped basic points of the newest side onto
/// fresh 1s on the other side; the sign of `F(z_i^j)` is symbol `j` of the
/// tail of `k^i`, and a 0 goes between neighbouring 1s of opposite sign.
pub fn kneading_to_folding(k: &KneadingSet, generations: usize) -> Result<FoldingPattern, FoldingError> {
    if generations == 0 {
        return Err(malformed("generations must be at least 1"));
    }
    let sign_of = |i: i64, j: u32, generation: usize| -> Result<Symbol, FoldingError> {
        k.get(i).and_then(|e| e.tail.0.get(j as usize).copied()).ok_or(FoldingError::InsufficientDepth { generation })
    };
    // (mark, (i, j), sign); sides listed outward from the origin
    let mut left: Vec<(Mark, (i64, u32), Symbol)> = Vec::new();
    let mut right: Vec<(Mark, (i64, u32), Symbol)> = Vec::new();
    if sign_of(0, 1, 1)? != Symbol::Minus {
        return Err(FoldingError::InconsistentKneading("z_0^2 must carry '-'".into()));
    }
    left.push((Mark::Zero, (0, 0), Symbol::PlusMinus));
    left.push((Mark::One, (0, 2), Symbol::Minus));
    right.push((Mark::One, (0, 1), sign_of(0, 0, 1)?));
    let mut zeros_left = 1i64;
    let mut zeros_right = 0i64;

    for gen in 2..=generations {
        let to_left = gen % 2 == 1;
        let (src, dst) = if to_left { (&right, &mut left) } else { (&left, &mut right) };
        let already = dst.iter().filter(|e| e.0 == Mark::One).count();
        let mut last = dst.last().expect("nonempty").2;
        let mut fresh = Vec::new();
        for &(_, (i, j), _) in src.get(already..).unwrap_or(&[]) {
            let s = sign_of(i, j, gen)?;
            if s != last {
                let z = if to_left {
                    zeros_left += 1;
                    zeros_left - 1
                } else {
                    zeros_right += 1;
                    -zeros_right
                };
                fresh.push((Mark::Zero, (z, 0), Symbol::PlusMinus));
            }
            fresh.push((Mark::One, (i, j + 1), s));
            last = s;
        }
        dst.extend(fresh);
    }
    let fp = FoldingPattern {
        left: left.iter().map(|e| e.0).collect(),
        right: right.iter().map(|e| e.0).collect(),
        generations,
    };
    let ann = annotate(&fp)?;
    for (side, list) in [(-1i64, &left), (1, &right)] {
        for (k, e) in list.iter().enumerate() {
            let p = ann.at(side * (k as i64 + 1)).unwrap();
            if (p.subscript, p.superscript) != e.1 {
                return Err(FoldingError::InconsistentKneading(format!(
                    "construction put z_{}^{} where the pattern reads z_{}^{}",
                    e.1 .0, e.1 .1, p.subscript, p.superscript
                )));
            }
        }
    }
    Ok(fp)
}

/// Reads the kneading sequences of every turning point whose image lies in
/// the window, with tails cut at `depth` or at the window edge.
pub fn folding_to_kneading(fp: &FoldingPattern, depth: usize) -> Result<KneadingSet, FoldingError> {
    let ann = annotate(fp)?;
    let line = Line::new(&ann);
    let mut items = Vec::new();
    for p in &ann.positions {
        if p.mark != Mark::Zero {
            continue;
        }
        let Some(mut c) = p.arrow else { continue };
        let mut tail = Vec::new();
        while tail.len() < depth {
            let q = ann.at(c).expect("arrow inside window");
            tail.push(q.sign);
            match q.arrow {
                Some(n) => c = n,
                None => break,
            }
        }
        let code = line.code_of_critical(p.coord).ok_or(FoldingError::InsufficientWindow { index: p.subscript })?;
        items.push((p.subscript, KneadingSequence::new(SymbolWord(code), SymbolWord(tail))?));
    }
    Ok(KneadingSet::from_indexed(items)?)
}

/// Basic points and X on one line, for arc-code reading.
struct Line<'a> {
    ann: &'a AnnotatedPattern,
    left_len: i64,
    len: i64,
}

impl<'a> Line<'a> {
    fn new(ann: &'a AnnotatedPattern) -> Self {
        let left_len = ann.pattern.left.len() as i64;
        Line { ann, left_len, len: left_len + 1 + ann.pattern.right.len() as i64 }
    }

    fn coord(&self, t: i64) -> i64 {
        t - self.left_len
    }

    fn index(&self, coord: i64) -> i64 {
        coord + self.left_len
    }

    /// X and the 1s are exactly the points with a preimage.
    fn is_image(&self, t: i64) -> bool {
        let c = self.coord(t);
        c == 0 || self.ann.at(c).unwrap().mark == Mark::One
    }

    fn preimage(&self, t: i64) -> i64 {
        let c = self.coord(t);
        if c == 0 {
            return t;
        }
        let (i, j) = {
            let p = self.ann.at(c).unwrap();
            (p.subscript, p.superscript)
        };
        self.index(self.ann.coord_of(i, j - 1).expect("labels are closed under preimage"))
    }

    fn scan(&self, mut t: i64, step: i64) -> Option<i64> {
        while (0..self.len).contains(&t) {
            if self.is_image(t) {
                return Some(t);
            }
            t += step;
        }
        None
    }

    /// The segment `[s, s+1]` of the line holding the preimage of the open
    /// stretch between `lo` and `hi`.
    fn preimage_segment(&self, lo: i64, hi: i64) -> Option<i64> {
        let a = self.scan(lo, -1)?;
        let b = self.scan(hi, 1)?;
        let (pa, pb) = (self.preimage(a), self.preimage(b));
        debug_assert_eq!((pa - pb).abs(), 1);
        Some(pa.min(pb))
    }

    fn segment_sign(&self, s: i64) -> Symbol {
        let (c0, c1) = (self.coord(s), self.coord(s + 1));
        if c0 == 0 || c1 == 0 {
            return Symbol::Plus;
        }
        let inner = if c0 > 0 { c0 } else { c1 };
        self.ann.arc_sign_outward(inner)
    }

    /// Arc-code of the basic arc `[s, s+1]`.
    fn segment_code(&self, s: i64) -> Option<Vec<Symbol>> {
        let mut signs = Vec::new();
        let mut s = s;
        for _ in 0..=self.len {
            let (c0, c1) = (self.coord(s), self.coord(s + 1));
            // the arc [z_0, z_0^1] through X
            if (c0 == -1 && c1 == 0) || (c0 == 0 && c1 == 1) {
                signs.reverse();
                return Some(signs);
            }
            signs.push(self.segment_sign(s));
            s = self.preimage_segment(s, s + 1)?;
        }
        None
    }

    fn code_of_critical(&self, coord: i64) -> Option<Vec<Symbol>> {
        let t = self.index(coord);
        let s = self.preimage_segment(t - 1, t + 1)?;
        self.segment_code(s)
    }
}

/// Result of [`compare_folding`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldingComparison {
    EqualUpTo(usize),
    DifferAt { coordinate: i64 },
}

/// Compares marks in the order `1, -1, 2, -2, ..` over the common window.
pub fn compare_folding(a: &FoldingPattern, b: &FoldingPattern) -> FoldingComparison {
    let rl = a.right.len().min(b.right.len()) as i64;
    let ll = a.left.len().min(b.left.len()) as i64;
    for k in 1..=rl.max(ll) {
        for c in [k, -k] {
            let within = if c > 0 { c <= rl } else { -c <= ll };
            if within && a.mark(c) != b.mark(c) {
                return FoldingComparison::DifferAt { coordinate: c };
            }
        }
    }
    FoldingComparison::EqualUpTo(a.generations.min(b.generations))
}
