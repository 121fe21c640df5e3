//! Kneading sequences, kneading sets and the admissibility tests.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{expand, plex_cmp, plex_compare, Ordering3, Symbol, SymbolWord, TwoSidedWindow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KneadingError {
    #[error("arc-code {0:?} must be empty or start with '-'")]
    InvalidArcCode(String),
    #[error("tail {0:?} must be concrete and start with '+'")]
    InvalidTail(String),
    #[error("duplicate arc-code {0:?}")]
    DuplicateArcCode(String),
    #[error("duplicate index {0}")]
    DuplicateIndex(i64),
    #[error("no entry with empty arc-code")]
    MissingRoot,
    #[error("empty arc-code must carry index 0")]
    RootIndex,
    #[error("sequence must start with '-'")]
    BadFirstSymbol,
    #[error("search budget of {budget} candidates exceeded")]
    SearchBudgetExceeded { budget: usize },
    #[error("window must store coordinates -{n}..{n}")]
    ShortWindow { n: usize },
}

/// A kneading sequence `+^inf w ~ . tail`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KneadingSequence {
    pub arc_code: SymbolWord,
    pub tail: SymbolWord,
}

impl KneadingSequence {
    pub fn new(arc_code: SymbolWord, tail: SymbolWord) -> Result<Self, KneadingError> {
        check_arc_code(&arc_code)?;
        if !tail.is_concrete() || tail.0.first().is_some_and(|&s| s != Symbol::Plus) {
            return Err(KneadingError::InvalidTail(tail.to_string()));
        }
        Ok(KneadingSequence { arc_code, tail })
    }

    pub fn depth(&self) -> usize {
        self.tail.len()
    }

    pub fn truncated(&self, depth: usize) -> KneadingSequence {
        KneadingSequence { arc_code: self.arc_code.clone(), tail: self.tail.truncated(depth) }
    }
}

fn check_arc_code(w: &SymbolWord) -> Result<(), KneadingError> {
    if !w.is_concrete() || w.0.first().is_some_and(|&s| s != Symbol::Minus) {
        return Err(KneadingError::InvalidArcCode(w.to_string()));
    }
    Ok(())
}

/// Indexed kneading sequences with distinct arc-codes.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KneadingSet {
    entries: BTreeMap<i64, KneadingSequence>,
    by_code: HashMap<Vec<Symbol>, i64>,
}

impl KneadingSet {
    /// Builds a set from explicitly indexed entries.
    pub fn from_indexed<I: IntoIterator<Item = (i64, KneadingSequence)>>(items: I) -> Result<Self, KneadingError> {
        let mut set = KneadingSet::default();
        for (i, k) in items {
            check_arc_code(&k.arc_code)?;
            if k.arc_code.is_empty() != (i == 0) {
                return Err(KneadingError::RootIndex);
            }
            if set.entries.contains_key(&i) {
                return Err(KneadingError::DuplicateIndex(i));
            }
            if set.by_code.insert(k.arc_code.0.clone(), i).is_some() {
                return Err(KneadingError::DuplicateArcCode(k.arc_code.to_string()));
            }
            set.entries.insert(i, k);
        }
        if !set.entries.contains_key(&0) {
            return Err(KneadingError::MissingRoot);
        }
        Ok(set)
    }

    pub fn get(&self, i: i64) -> Option<&KneadingSequence> {
        self.entries.get(&i)
    }

    pub fn index_of(&self, arc_code: &[Symbol]) -> Option<i64> {
        self.by_code.get(arc_code).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &KneadingSequence)> {
        self.entries.iter().map(|(&i, k)| (i, k))
    }

    pub fn sequences(&self) -> Vec<KneadingSequence> {
        self.entries.values().cloned().collect()
    }

    pub fn index_range(&self) -> (i64, i64) {
        let lo = *self.entries.keys().next().unwrap_or(&0);
        let hi = *self.entries.keys().next_back().unwrap_or(&0);
        (lo, hi)
    }

    pub fn min_depth(&self) -> usize {
        self.entries.values().map(|k| k.depth()).min().unwrap_or(0)
    }

    pub fn truncated(&self, depth: usize) -> KneadingSet {
        let mut out = self.clone();
        for k in out.entries.values_mut() {
            *k = k.truncated(depth);
        }
        out
    }

    /// Keeps entries whose index passes `keep`.
    pub fn filtered(&self, keep: impl Fn(i64) -> bool) -> KneadingSet {
        KneadingSet::from_indexed(self.iter().filter(|(i, _)| keep(*i)).map(|(i, k)| (i, k.clone())))
            .expect("subset of a valid set")
    }

    /// Largest `c` such that the set presumably holds every arc-code of
    /// length `<= c`.
    ///
    /// Assumes the entries are the turning points nearest to the fixed point
    /// on each branch, so each parity is complete below its longest code.
    pub fn complete_code_length(&self) -> usize {
        let mut max_even = 0usize;
        let mut max_odd = 0usize;
        for k in self.entries.values() {
            let l = k.arc_code.len();
            if l % 2 == 0 {
                max_even = max_even.max(l);
            } else {
                max_odd = max_odd.max(l);
            }
        }
        if max_odd == 0 {
            return 0;
        }
        (max_even.max(1) - 1).min(max_odd - 1)
    }
}

/// Relative position of two basic arcs on the unstable manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcOrder {
    FartherFromX,
    CloserToX,
    SameArc,
    IncomparableParity,
}

/// Where the arc `I_u` sits relative to `I_v`.
///
/// The empty code names the arc through the fixed point, which is closer
/// than every other arc on either branch.
pub fn basic_arc_order(u: &SymbolWord, v: &SymbolWord) -> Result<ArcOrder, KneadingError> {
    check_arc_code(u)?;
    check_arc_code(v)?;
    if u == v {
        return Ok(ArcOrder::SameArc);
    }
    if u.is_empty() {
        return Ok(ArcOrder::CloserToX);
    }
    if v.is_empty() {
        return Ok(ArcOrder::FartherFromX);
    }
    if u.len() % 2 != v.len() % 2 {
        return Ok(ArcOrder::IncomparableParity);
    }
    let farther = match u.len().cmp(&v.len()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => plex_cmp(&u.0, &v.0) == std::cmp::Ordering::Less,
    };
    Ok(if farther { ArcOrder::FartherFromX } else { ArcOrder::CloserToX })
}

/// Assigns indices from arc-codes alone.
///
/// The code of `z_i` is that of the arc holding its preimage, which lies on
/// the opposite branch. Nonempty even-length codes therefore belong to
/// `z_1, z_2, ..` and get `1, 2, ..` by distance from X; odd-length codes
/// get `-1, -2, ..`; the empty code gets 0.
pub fn recover_indices(entries: Vec<KneadingSequence>) -> Result<KneadingSet, KneadingError> {
    let mut odd = Vec::new();
    let mut even = Vec::new();
    let mut root = None;
    for k in entries {
        check_arc_code(&k.arc_code)?;
        if k.arc_code.is_empty() {
            if root.is_some() {
                return Err(KneadingError::DuplicateArcCode(String::new()));
            }
            root = Some(k);
        } else if k.arc_code.len() % 2 == 1 {
            odd.push(k);
        } else {
            even.push(k);
        }
    }
    let root = root.ok_or(KneadingError::MissingRoot)?;
    let by_distance = |a: &KneadingSequence, b: &KneadingSequence| {
        a.arc_code.len().cmp(&b.arc_code.len()).then_with(|| plex_cmp(&b.arc_code.0, &a.arc_code.0))
    };
    odd.sort_by(by_distance);
    even.sort_by(by_distance);
    let items = std::iter::once((0, root))
        .chain(even.into_iter().enumerate().map(|(r, k)| (r as i64 + 1, k)))
        .chain(odd.into_iter().enumerate().map(|(r, k)| (-(r as i64) - 1, k)));
    KneadingSet::from_indexed(items)
}

/// Outcome of an admissibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Certified on the first `d` symbols.
    AdmissibleUpTo(usize),
    /// The kneading sequence `index`, whose arc-code is `p_0..p_position`,
    /// is exceeded. Index 0 has the empty code and position 0.
    Rejected { index: i64, position: usize },
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Verdict::AdmissibleUpTo(_))
    }
}

/// Unstable-manifold admissibility of `+^inf . p` with `p[0] = -`, checked
/// on the first `depth` symbols.
///
/// Every kneading sequence whose arc-code is `p_0..p_m` must satisfy
/// `sigma^(m+2) p <= tail` in plex order. The entry with the empty code
/// bounds both `sigma p` and `+p`, and is reported as
/// `Rejected { index: 0, position: 0 }`.
/// `~` is expanded; the result is admissible if some expansion is.
pub fn is_wu_admissible(p: &[Symbol], k: &KneadingSet, depth: usize) -> Result<Verdict, KneadingError> {
    let depth = depth.min(p.len());
    let p = &p[..depth];
    if p.first().is_some_and(|&s| s == Symbol::Minus) || p.first() == Some(&Symbol::PlusMinus) {
        let mut first_reject = None;
        let mut best: Option<usize> = None;
        for e in expand(p) {
            if e[0] != Symbol::Minus {
                continue;
            }
            match wu_concrete(&e, k) {
                Verdict::AdmissibleUpTo(d) => best = Some(best.map_or(d, |b| b.max(d))),
                r => {
                    first_reject.get_or_insert(r);
                }
            }
        }
        return Ok(match best {
            Some(d) => Verdict::AdmissibleUpTo(d),
            None => first_reject.expect("at least one expansion"),
        });
    }
    if p.is_empty() {
        return Ok(Verdict::AdmissibleUpTo(0));
    }
    Err(KneadingError::BadFirstSymbol)
}

fn wu_concrete(p: &[Symbol], k: &KneadingSet) -> Verdict {
    let mut certified = p.len().min(k.complete_code_length() + 2);
    // [z_0, z_0^1] lies inside its own image, so both the preimage and the
    // image of the point sit on the leaves of z_0^1
    if let Some(root) = k.get(0) {
        let tail = &root.tail.0;
        let mut back = Vec::with_capacity(p.len() + 1);
        back.push(Symbol::Plus);
        back.extend_from_slice(p);
        for (q, offset) in [(&back[..], -1), (&p[1.min(p.len())..], 1)] {
            match plex_compare(q, tail, q.len().min(tail.len())) {
                Ordering3::Greater => return Verdict::Rejected { index: 0, position: 0 },
                Ordering3::EqualUpToDepth(d) if d < q.len() => {
                    certified = certified.min((d as i64 + offset).max(0) as usize)
                }
                _ => {}
            }
        }
    }
    for m in 0..p.len().saturating_sub(1) {
        let Some(i) = k.index_of(&p[..=m]) else { continue };
        let tail = &k.get(i).expect("indexed").tail.0;
        let rest = &p[(m + 2).min(p.len())..];
        match plex_compare(rest, tail, rest.len().min(tail.len())) {
            Ordering3::Greater => return Verdict::Rejected { index: i, position: m },
            Ordering3::EqualUpToDepth(d) if d < rest.len() => certified = certified.min(m + 2 + d),
            _ => {}
        }
    }
    Verdict::AdmissibleUpTo(certified)
}

/// Options for [`is_admissible`].
#[derive(Clone, Copy, Debug)]
pub struct AdmissibleOptions {
    /// Longest prelude word tried; `None` means the window radius.
    pub prelude_len: Option<usize>,
    /// Maximum number of concrete candidates examined.
    pub budget: usize,
}

impl Default for AdmissibleOptions {
    fn default() -> Self {
        AdmissibleOptions { prelude_len: None, budget: 1 << 22 }
    }
}

/// Attractor admissibility of the window on coordinates `-n..n`.
///
/// Tries every completion `+^inf u w` with `u` empty or a `-`-initial word of
/// length up to the prelude bound, and tests each on the unstable manifold.
/// The verdict is `AdmissibleUpTo(r)` where `r <= n` is the radius the best
/// candidate certifies.
pub fn is_admissible(
    w: &TwoSidedWindow,
    k: &KneadingSet,
    n: usize,
    opts: AdmissibleOptions,
) -> Result<Verdict, KneadingError> {
    if w.known_depth() < n + 1 || (!w.left_tail_all_plus() && w.left_word().len() < n) {
        return Err(KneadingError::ShortWindow { n });
    }
    let core: Vec<Symbol> = (-(n as i64)..=(n as i64)).map(|c| w.get(c).expect("stored")).collect();
    let max_prelude = if w.left_tail_all_plus() { 0 } else { opts.prelude_len.unwrap_or(n) };
    let core_expanded = expand(&core);
    let prelude_count: usize = 1usize.checked_shl(max_prelude as u32).unwrap_or(usize::MAX);
    let total = prelude_count.saturating_mul(core_expanded.len());
    if total > opts.budget {
        return Err(KneadingError::SearchBudgetExceeded { budget: opts.budget });
    }
    let mut best: Option<usize> = None;
    let mut first_reject = None;
    for core in &core_expanded {
        for u in preludes(max_prelude) {
            // coordinate of the candidate's first symbol relative to the window origin
            let start = -(n as i64) - u.len() as i64;
            let mut seq = u;
            seq.extend_from_slice(core);
            let Some(first_minus) = seq.iter().position(|&s| s == Symbol::Minus) else {
                return Ok(Verdict::AdmissibleUpTo(n));
            };
            match wu_concrete(&seq[first_minus..], k) {
                Verdict::AdmissibleUpTo(d) => {
                    let last = start + first_minus as i64 + d as i64 - 1;
                    let r = last.clamp(0, n as i64) as usize;
                    if r == n {
                        return Ok(Verdict::AdmissibleUpTo(n));
                    }
                    best = Some(best.map_or(r, |b| b.max(r)));
                }
                rej => {
                    first_reject.get_or_insert(rej);
                }
            }
        }
    }
    Ok(match best {
        Some(r) => Verdict::AdmissibleUpTo(r),
        None => first_reject.expect("at least one candidate"),
    })
}

/// The empty word followed by all `-`-initial words of length `1..=max`.
fn preludes(max: usize) -> impl Iterator<Item = Vec<Symbol>> {
    std::iter::once(Vec::new()).chain((1..=max).flat_map(|len| {
        (0..1u64 << (len - 1)).map(move |bits| {
            let mut v = vec![Symbol::Minus];
            v.extend((0..len - 1).map(|b| if bits >> b & 1 == 1 { Symbol::Plus } else { Symbol::Minus }));
            v
        })
    }))
}

/// Kind of the first difference between two kneading sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DifferenceKind {
    MissingEntry,
    ArcCodeMismatch,
    TailMismatch { position: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetComparison {
    EqualUpToDepth(usize),
    Differ { index: i64, kind: DifferenceKind },
}

/// Compares two sets over their shared index range, nearest indices first
/// (`0, -1, 1, -2, 2, ..`).
pub fn compare_kneading_sets(k1: &KneadingSet, k2: &KneadingSet, depth: usize) -> SetComparison {
    let (lo1, hi1) = k1.index_range();
    let (lo2, hi2) = k2.index_range();
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2));
    let mut indices: Vec<i64> = (lo..=hi).collect();
    indices.sort_by_key(|&i| (i.unsigned_abs(), i > 0));
    let mut certified = depth;
    for i in indices {
        let (a, b) = match (k1.get(i), k2.get(i)) {
            (Some(a), Some(b)) => (a, b),
            (None, None) => continue,
            _ => return SetComparison::Differ { index: i, kind: DifferenceKind::MissingEntry },
        };
        if a.arc_code != b.arc_code {
            return SetComparison::Differ { index: i, kind: DifferenceKind::ArcCodeMismatch };
        }
        let d = depth.min(a.tail.len()).min(b.tail.len());
        if let Some(position) = (0..d).find(|&j| a.tail.0[j] != b.tail.0[j]) {
            return SetComparison::Differ { index: i, kind: DifferenceKind::TailMismatch { position } };
        }
        certified = certified.min(d);
    }
    SetComparison::EqualUpToDepth(certified)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(code: &str, tail: &str) -> KneadingSequence {
        KneadingSequence::new(code.parse().unwrap(), tail.parse().unwrap()).unwrap()
    }

    #[test]
    fn arc_order_examples() {
        let o = |u: &str, v: &str| basic_arc_order(&u.parse().unwrap(), &v.parse().unwrap()).unwrap();
        assert_eq!(o("-+--", "-+"), ArcOrder::FartherFromX);
        assert_eq!(o("---", "-+-"), ArcOrder::FartherFromX);
        assert_eq!(o("-+-", "---"), ArcOrder::CloserToX);
        assert_eq!(o("--", "--"), ArcOrder::SameArc);
        assert_eq!(o("-", "--"), ArcOrder::IncomparableParity);
        assert_eq!(o("", "-"), ArcOrder::CloserToX);
        assert!(basic_arc_order(&"+".parse().unwrap(), &"-".parse().unwrap()).is_err());
    }

    #[test]
    fn recover_small_sets() {
        let set = recover_indices(vec![ks("", "+")]).unwrap();
        assert_eq!(set.iter().map(|(i, _)| i).collect::<Vec<_>>(), [0]);

        let set = recover_indices(vec![ks("-+-", "+"), ks("--", "+"), ks("", "+"), ks("-", "+")]).unwrap();
        let got: Vec<(i64, String)> = set.iter().map(|(i, k)| (i, k.arc_code.to_string())).collect();
        assert_eq!(got, [(-2, "-+-".into()), (-1, "-".into()), (0, "".into()), (1, "--".into())]);

        assert_eq!(recover_indices(vec![ks("-", "+")]), Err(KneadingError::MissingRoot));
        assert!(matches!(
            recover_indices(vec![ks("", "+"), ks("-", "+"), ks("-", "++")]),
            Err(KneadingError::DuplicateArcCode(_))
        ));
    }

    #[test]
    fn invalid_sequences() {
        assert!(KneadingSequence::new("+".parse().unwrap(), "+".parse().unwrap()).is_err());
        assert!(KneadingSequence::new("-".parse().unwrap(), "-".parse().unwrap()).is_err());
        assert!(KneadingSequence::new("-".parse().unwrap(), "+~".parse().unwrap()).is_err());
    }

    #[test]
    fn wu_admissibility_by_hand() {
        // k0 = +^inf ~ . + - - ; k1 has code "-"
        let set = recover_indices(vec![ks("", "+--+"), ks("-", "+-+-")]).unwrap();
        let p: Vec<Symbol> = "-+-+-".parse::<SymbolWord>().unwrap().0;
        // code "-" matches p_0, compare p_2.. = "-+-" with "+-+-": less
        assert!(is_wu_admissible(&p, &set, 5).unwrap().is_admissible());
        let p: Vec<Symbol> = "-++--".parse::<SymbolWord>().unwrap().0;
        // p_2.. = "+--" vs "+-+-": prefix "+-" has one plus, so '-' > '+' there
        assert_eq!(is_wu_admissible(&p, &set, 5).unwrap(), Verdict::Rejected { index: -1, position: 0 });
        // "+----" vs "+--+": one plus before the difference, so '-' > '+'
        let p: Vec<Symbol> = "----".parse::<SymbolWord>().unwrap().0;
        assert_eq!(is_wu_admissible(&p, &set, 4).unwrap(), Verdict::Rejected { index: 0, position: 0 });
        let bad: Vec<Symbol> = "+-".parse::<SymbolWord>().unwrap().0;
        assert_eq!(is_wu_admissible(&bad, &set, 2), Err(KneadingError::BadFirstSymbol));
    }

    #[test]
    fn admissible_trivial_windows() {
        let set = recover_indices(vec![ks("", "+--+")]).unwrap();
        let w: TwoSidedWindow = ".+".parse().unwrap();
        assert_eq!(is_admissible(&w, &set, 0, AdmissibleOptions::default()).unwrap(), Verdict::AdmissibleUpTo(0));
    }

    #[test]
    fn prelude_enumeration() {
        let all: Vec<Vec<Symbol>> = preludes(3).collect();
        assert_eq!(all.len(), 8);
        assert!(all[1..].iter().all(|u| u[0] == Symbol::Minus));
    }

    #[test]
    fn set_comparison() {
        let a = recover_indices(vec![ks("", "+--+"), ks("-", "+-+-"), ks("--", "++")]).unwrap();
        assert_eq!(compare_kneading_sets(&a, &a, 2), SetComparison::EqualUpToDepth(2));
        let b = recover_indices(vec![ks("", "+--+"), ks("-", "+-++"), ks("--", "++")]).unwrap();
        assert_eq!(
            compare_kneading_sets(&a, &b, 4),
            SetComparison::Differ { index: -1, kind: DifferenceKind::TailMismatch { position: 3 } }
        );
    }
}
