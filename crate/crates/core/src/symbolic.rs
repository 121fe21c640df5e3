//! Symbols, words, two-sided windows and the parity-lexicographical orders.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of `-`, `~` (the both-sides symbol) or `+`.
///
/// The derived order is the plex order at a single position: `- < ~ < +`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Minus,
    PlusMinus,
    Plus,
}

impl Symbol {
    pub fn to_char(self) -> char {
        match self {
            Symbol::Minus => '-',
            Symbol::PlusMinus => '~',
            Symbol::Plus => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '-' => Some(Symbol::Minus),
            '~' => Some(Symbol::PlusMinus),
            '+' => Some(Symbol::Plus),
            _ => None,
        }
    }

    pub fn is_concrete(self) -> bool {
        self != Symbol::PlusMinus
    }

    /// Swaps `-` and `+`; `~` is fixed.
    pub fn flip(self) -> Symbol {
        match self {
            Symbol::Minus => Symbol::Plus,
            Symbol::Plus => Symbol::Minus,
            Symbol::PlusMinus => Symbol::PlusMinus,
        }
    }

    /// Sign of a real number with a dead zone of half-width `eps` around 0.
    pub fn of_value(v: f64, eps: f64) -> Symbol {
        if v > eps {
            Symbol::Plus
        } else if v < -eps {
            Symbol::Minus
        } else {
            Symbol::PlusMinus
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let c = char::deserialize(deserializer)?;
        Symbol::from_char(c).ok_or_else(|| serde::de::Error::custom(format!("invalid symbol {c:?}")))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("invalid character {found:?} at position {position}")]
    Parse { position: usize, found: char },
    #[error("more than one origin marker, second at position {position}")]
    DuplicateOrigin { position: usize },
    #[error("window does not store enough coordinates for this operation")]
    InsufficientWindow,
}

/// A finite word over [`Symbol`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolWord(pub Vec<Symbol>);

impl SymbolWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        SymbolWord(symbols)
    }

    pub fn empty() -> Self {
        SymbolWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn is_concrete(&self) -> bool {
        self.0.iter().all(|s| s.is_concrete())
    }

    pub fn count_plus(&self) -> usize {
        self.0.iter().filter(|&&s| s == Symbol::Plus).count()
    }

    pub fn truncated(&self, len: usize) -> SymbolWord {
        SymbolWord(self.0[..len.min(self.0.len())].to_vec())
    }

    /// All concrete words obtained by replacing each `~` with `-` or `+`.
    pub fn expansions(&self) -> Vec<SymbolWord> {
        expand(&self.0).into_iter().map(SymbolWord).collect()
    }
}

/// Replaces every `~` by both concrete choices, `-` branch first.
pub fn expand(symbols: &[Symbol]) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::with_capacity(symbols.len())];
    for &s in symbols {
        if s == Symbol::PlusMinus {
            let mut next = Vec::with_capacity(out.len() * 2);
            for w in &out {
                for c in [Symbol::Minus, Symbol::Plus] {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        } else {
            for w in &mut out {
                w.push(s);
            }
        }
    }
    out
}

impl From<Vec<Symbol>> for SymbolWord {
    fn from(v: Vec<Symbol>) -> Self {
        SymbolWord(v)
    }
}

impl From<&[Symbol]> for SymbolWord {
    fn from(v: &[Symbol]) -> Self {
        SymbolWord(v.to_vec())
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(position, c)| Symbol::from_char(c).ok_or(SymbolicError::Parse { position, found: c }))
            .collect::<Result<Vec<_>, _>>()
            .map(SymbolWord)
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolWord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Three-valued result of comparing truncated sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering3 {
    Less,
    Greater,
    /// The compared prefixes agree on the first `d` coordinates.
    EqualUpToDepth(usize),
}

impl Ordering3 {
    pub fn reverse(self) -> Ordering3 {
        match self {
            Ordering3::Less => Ordering3::Greater,
            Ordering3::Greater => Ordering3::Less,
            e => e,
        }
    }

    pub fn is_greater(self) -> bool {
        self == Ordering3::Greater
    }
}

/// Parity-lexicographical comparison of `u` and `v` on their first `depth`
/// symbols.
///
/// At the first differing index `m`, the symbol order `- < ~ < +` is used if
/// the common prefix holds an even number of `+`, and reversed otherwise.
/// If both words hold `~` at the same index the comparison stops there with
/// `EqualUpToDepth(m)`: the parity of the rest is undetermined.
pub fn plex_compare(u: &[Symbol], v: &[Symbol], depth: usize) -> Ordering3 {
    let depth = depth.min(u.len()).min(v.len());
    let mut odd = false;
    for m in 0..depth {
        let (a, b) = (u[m], v[m]);
        if a == b {
            match a {
                Symbol::Plus => odd = !odd,
                Symbol::PlusMinus => return Ordering3::EqualUpToDepth(m),
                Symbol::Minus => {}
            }
            continue;
        }
        let less = (a < b) != odd;
        return if less { Ordering3::Less } else { Ordering3::Greater };
    }
    Ordering3::EqualUpToDepth(depth)
}

/// A window of a bi-infinite itinerary: `left_word` holds coordinates
/// `-|left|..-1`, `right_word` holds `0..|right|-1`.
///
/// With `left_tail_all_plus` set every coordinate left of `left_word` is `+`;
/// the constructor then strips leading `+` from `left_word`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoSidedWindow {
    left_word: SymbolWord,
    left_tail_all_plus: bool,
    right_word: SymbolWord,
}

/// Text marker for an infinite run of `+` on the left.
pub const PLUS_TAIL_MARKER: &str = "(+)";

impl TwoSidedWindow {
    pub fn new(left_word: SymbolWord, left_tail_all_plus: bool, right_word: SymbolWord) -> Self {
        let mut left = left_word.0;
        if left_tail_all_plus {
            let k = left.iter().take_while(|&&s| s == Symbol::Plus).count();
            left.drain(..k);
        }
        TwoSidedWindow { left_word: SymbolWord(left), left_tail_all_plus, right_word }
    }

    /// The itinerary `+^inf w . tail` of a point on the unstable manifold.
    pub fn unstable(arc_code: &SymbolWord, right: &SymbolWord) -> Self {
        Self::new(arc_code.clone(), true, right.clone())
    }

    /// Window of the fixed point: `+` everywhere.
    pub fn all_plus(depth: usize) -> Self {
        Self::new(SymbolWord::empty(), true, SymbolWord(vec![Symbol::Plus; depth]))
    }

    pub fn left_word(&self) -> &SymbolWord {
        &self.left_word
    }

    pub fn right_word(&self) -> &SymbolWord {
        &self.right_word
    }

    pub fn left_tail_all_plus(&self) -> bool {
        self.left_tail_all_plus
    }

    pub fn known_depth(&self) -> usize {
        self.right_word.len()
    }

    /// Symbol at coordinate `k`, if stored or implied by the `+` tail.
    pub fn get(&self, k: i64) -> Option<Symbol> {
        if k >= 0 {
            self.right_word.0.get(k as usize).copied()
        } else {
            let back = (-k) as usize;
            let l = self.left_word.len();
            if back <= l {
                Some(self.left_word.0[l - back])
            } else if self.left_tail_all_plus {
                Some(Symbol::Plus)
            } else {
                None
            }
        }
    }

    /// `sigma^k`: the new origin is the old coordinate `k`.
    pub fn shift(&self, k: i64) -> Result<TwoSidedWindow, SymbolicError> {
        let mut left = self.left_word.0.clone();
        let mut right = self.right_word.0.clone();
        if k > 0 {
            let k = k as usize;
            if k > right.len() {
                return Err(SymbolicError::InsufficientWindow);
            }
            left.extend(right.drain(..k));
        } else if k < 0 {
            let k = (-k) as usize;
            if k > left.len() && !self.left_tail_all_plus {
                return Err(SymbolicError::InsufficientWindow);
            }
            while left.len() < k {
                left.insert(0, Symbol::Plus);
            }
            let moved: Vec<Symbol> = left.drain(left.len() - k..).collect();
            right.splice(0..0, moved);
        }
        Ok(TwoSidedWindow::new(SymbolWord(left), self.left_tail_all_plus, SymbolWord(right)))
    }

    /// Right-hand sequence starting at coordinate `-n+1`, left-padded with `+`.
    fn tail_from(&self, n: usize) -> Vec<Symbol> {
        let l = self.left_word.len();
        let mut out = vec![Symbol::Plus; n.saturating_sub(1).saturating_sub(l)];
        out.extend_from_slice(&self.left_word.0[l.saturating_sub(n.saturating_sub(1))..]);
        out.extend_from_slice(&self.right_word.0);
        out
    }

    /// Every concrete window obtained by resolving each `~`.
    pub fn expansions(&self) -> Vec<TwoSidedWindow> {
        let l = self.left_word.len();
        let mut all = self.left_word.0.clone();
        all.extend_from_slice(&self.right_word.0);
        expand(&all)
            .into_iter()
            .map(|mut w| {
                let r = w.split_off(l);
                TwoSidedWindow::new(SymbolWord(w), self.left_tail_all_plus, SymbolWord(r))
            })
            .collect()
    }
}

impl fmt::Display for TwoSidedWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.left_tail_all_plus {
            f.write_str(PLUS_TAIL_MARKER)?;
        }
        write!(f, "{}.{}", self.left_word, self.right_word)
    }
}

impl FromStr for TwoSidedWindow {
    type Err = SymbolicError;

    /// Grammar: an optional `(+)` prefix for the infinite `+` tail, then
    /// symbols, an optional `.` origin, then symbols. Without a `.` the whole
    /// string is the right word.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tail, body, offset) = match s.strip_prefix(PLUS_TAIL_MARKER) {
            Some(rest) => (true, rest, PLUS_TAIL_MARKER.len()),
            None => (false, s, 0),
        };
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut seen_origin = false;
        for (i, c) in body.chars().enumerate() {
            let position = i + offset;
            if c == '.' {
                if seen_origin {
                    return Err(SymbolicError::DuplicateOrigin { position });
                }
                seen_origin = true;
                continue;
            }
            let sym = Symbol::from_char(c).ok_or(SymbolicError::Parse { position, found: c })?;
            if seen_origin {
                right.push(sym);
            } else {
                left.push(sym);
            }
        }
        if !seen_origin {
            std::mem::swap(&mut left, &mut right);
        }
        Ok(TwoSidedWindow::new(SymbolWord(left), tail, SymbolWord(right)))
    }
}

/// Smallest `n` for which both windows are all `+` at every coordinate `<= -n`.
pub fn gplex_min_n(p: &TwoSidedWindow, q: &TwoSidedWindow) -> Result<usize, SymbolicError> {
    if !p.left_tail_all_plus || !q.left_tail_all_plus {
        return Err(SymbolicError::InsufficientWindow);
    }
    Ok(p.left_word.len().max(q.left_word.len()) + 1)
}

/// Generalized order on sequences with left tails `+^inf`, using a given
/// valid `n`.
///
/// For even `n`, `p < q` iff the tail of `q` from `-n+1` precedes that of
/// `p` in plex order; for odd `n` the tails compare directly.
pub fn gplex_compare_with_n(p: &TwoSidedWindow, q: &TwoSidedWindow, n: usize) -> Result<Ordering3, SymbolicError> {
    if n < gplex_min_n(p, q)? {
        return Err(SymbolicError::InsufficientWindow);
    }
    let pt = p.tail_from(n);
    let qt = q.tail_from(n);
    let depth = pt.len().min(qt.len());
    let r = plex_compare(&pt, &qt, depth);
    let r = if n % 2 == 0 { r.reverse() } else { r };
    // Report depth in right-hand coordinates so the answer does not depend on n.
    Ok(match r {
        Ordering3::EqualUpToDepth(d) => Ordering3::EqualUpToDepth(d.saturating_sub(n - 1)),
        other => other,
    })
}

/// Generalized order using the smallest valid `n`.
pub fn gplex_compare(p: &TwoSidedWindow, q: &TwoSidedWindow) -> Result<Ordering3, SymbolicError> {
    let n = gplex_min_n(p, q)?;
    gplex_compare_with_n(p, q, n)
}

/// Total order on concrete words of equal length, for sorting.
pub fn plex_cmp(u: &[Symbol], v: &[Symbol]) -> Ordering {
    match plex_compare(u, v, usize::MAX) {
        Ordering3::Less => Ordering::Less,
        Ordering3::Greater => Ordering::Greater,
        Ordering3::EqualUpToDepth(_) => u.len().cmp(&v.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<Symbol> {
        s.parse::<SymbolWord>().unwrap().0
    }

    #[test]
    fn plex_small_cases() {
        assert_eq!(plex_compare(&w("-"), &w("+"), 1), Ordering3::Less);
        assert_eq!(plex_compare(&w("-++"), &w("-+-"), 3), Ordering3::Less);
        assert_eq!(plex_compare(&w("---"), &w("--+"), 3), Ordering3::Less);
        assert_eq!(plex_compare(&w("+-"), &w("++"), 2), Ordering3::Greater);
        assert_eq!(plex_compare(&w("-~"), &w("-+"), 2), Ordering3::Less);
        assert_eq!(plex_compare(&w("+~"), &w("++"), 2), Ordering3::Greater);
        assert_eq!(plex_compare(&w("-+"), &w("-+"), 2), Ordering3::EqualUpToDepth(2));
        assert_eq!(plex_compare(&w("-+"), &w("+"), 0), Ordering3::EqualUpToDepth(0));
    }

    #[test]
    fn plus_minus_clash_stops() {
        assert_eq!(plex_compare(&w("+~-"), &w("+~+"), 3), Ordering3::EqualUpToDepth(1));
    }

    #[test]
    fn window_text_roundtrip() {
        for s in ["+++-+.+--", "(+)-+.+--", "(+).+", ".", "-~.+"] {
            let win: TwoSidedWindow = s.parse().unwrap();
            assert_eq!(win.to_string(), s);
        }
        let bare: TwoSidedWindow = "+-".parse().unwrap();
        assert_eq!(bare.to_string(), ".+-");
        assert!(matches!("+x".parse::<TwoSidedWindow>(), Err(SymbolicError::Parse { position: 1, found: 'x' })));
        assert!(matches!("+..".parse::<TwoSidedWindow>(), Err(SymbolicError::DuplicateOrigin { position: 2 })));
    }

    #[test]
    fn plus_tail_is_normalized() {
        let win: TwoSidedWindow = "(+)++-+.+".parse().unwrap();
        assert_eq!(win.left_word().to_string(), "-+");
        assert_eq!(win.get(-5), Some(Symbol::Plus));
        assert_eq!(win.get(-2), Some(Symbol::Minus));
    }

    #[test]
    fn shift_round_trip() {
        let win: TwoSidedWindow = "-+-.++-".parse().unwrap();
        assert_eq!(win.shift(0).unwrap(), win);
        let s = win.shift(2).unwrap();
        assert_eq!(s.to_string(), "-+-++.-");
        assert_eq!(s.shift(-2).unwrap(), win);
        assert!(win.shift(4).is_err());
        assert!(win.shift(-4).is_err());

        let x = TwoSidedWindow::all_plus(5);
        assert_eq!(x.shift(3).unwrap(), TwoSidedWindow::all_plus(2));
        assert_eq!(x.shift(-3).unwrap(), TwoSidedWindow::all_plus(8));
    }

    #[test]
    fn gplex_basics() {
        let x = TwoSidedWindow::all_plus(6);
        assert_eq!(gplex_compare(&x, &x).unwrap(), Ordering3::EqualUpToDepth(6));
        // n = 1 reduces to plex on the right words
        let p: TwoSidedWindow = "(+).+-+".parse().unwrap();
        let q: TwoSidedWindow = "(+).++-".parse().unwrap();
        assert_eq!(gplex_compare(&p, &q).unwrap(), plex_compare(&w("+-+"), &w("++-"), 3));
        let f: TwoSidedWindow = "-.+".parse().unwrap();
        assert_eq!(gplex_compare(&f, &p), Err(SymbolicError::InsufficientWindow));
    }

    #[test]
    fn expansion_counts() {
        let e = SymbolWord::from_str("~-~").unwrap().expansions();
        let got: Vec<String> = e.iter().map(|x| x.to_string()).collect();
        assert_eq!(got, ["---", "--+", "+--", "+-+"]);
    }
}
