//! Pruned trees: the leveled transition tree of basic arcs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding::{annotate, kneading_to_folding, FoldingError, FoldingPattern, Mark};
use crate::kneading::{KneadingSequence, KneadingSet};
use crate::symbolic::{Symbol, SymbolWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("shape violation: {0}")]
    ShapeViolation(String),
    #[error("tree too shallow: needs depth {needed}")]
    InsufficientDepth { needed: usize },
    #[error(transparent)]
    Folding(#[from] FoldingError),
}

/// Vertices are basic arcs: `0` is the arc through X, `n > 0` the n-th arc
/// right of it, `-n` the n-th arc left of it.
///
/// Levels `0..=depth` are stored; vertices on level `depth` are open (their
/// children are not known). The root's arrows `0 -> 0` and `0 -> -1` are
/// implicit and not in `children`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedTree {
    pub levels: Vec<Vec<i64>>,
    pub children: BTreeMap<i64, Vec<i64>>,
}

/// Children of the root, drawn specially: the root maps over itself.
pub const ROOT_CHILDREN: [i64; 2] = [0, -1];

impl PrunedTree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn children_of(&self, v: i64) -> Option<&[i64]> {
        if v == 0 {
            Some(&ROOT_CHILDREN)
        } else {
            self.children.get(&v).map(|c| c.as_slice())
        }
    }

    pub fn is_open(&self, v: i64) -> bool {
        v != 0 && !self.children.contains_key(&v)
    }

    /// Parent of every vertex below level 1.
    fn parents(&self) -> BTreeMap<i64, i64> {
        let mut out = BTreeMap::new();
        for (&p, cs) in &self.children {
            for &c in cs {
                out.insert(c, p);
            }
        }
        out
    }

    /// Checks numbering, planar order and the one-or-two children rule.
    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |m: String| Err(TreeError::ShapeViolation(m));
        if self.levels.len() < 2 || self.levels[0] != [0] || self.levels[1] != [-1] {
            return bad("levels 0 and 1 must be [0] and [-1]".into());
        }
        let expected = relabel_naked_tree(&strip_labels(self)?)?;
        if expected != *self {
            return bad("ids do not follow the level numbering".into());
        }
        Ok(())
    }

    /// Graphviz text of the tree.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph pruned_tree {\n  rankdir=TB;\n");
        for (n, level) in self.levels.iter().enumerate() {
            let ids: Vec<String> = level.iter().map(|v| format!("\"{v}\"")).collect();
            let _ = writeln!(s, "  {{ rank=same; {} }} // level {n}", ids.join("; "));
        }
        let _ = writeln!(s, "  \"0\" -> \"0\";\n  \"0\" -> \"-1\";");
        for (p, cs) in &self.children {
            for c in cs {
                let _ = writeln!(s, "  \"{p}\" -> \"{c}\";");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// A tree without ids: `child_counts[k]` lists the number of children of
/// each vertex on level `k + 1`, in planar order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NakedTree {
    pub depth: usize,
    pub child_counts: Vec<Vec<usize>>,
}

/// Forgets the ids.
pub fn strip_labels(t: &PrunedTree) -> Result<NakedTree, TreeError> {
    let mut child_counts = Vec::new();
    for level in &t.levels[1..t.depth()] {
        let counts = level
            .iter()
            .map(|v| t.children.get(v).map(|c| c.len()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| TreeError::ShapeViolation("closed level has a vertex without children".into()))?;
        child_counts.push(counts);
    }
    Ok(NakedTree { depth: t.depth(), child_counts })
}

/// Assigns ids from the level and planar order alone.
///
/// Odd levels carry negative ids, even levels positive ones, with moduli
/// increasing left to right and continuing from level `n` to level `n + 2`.
pub fn relabel_naked_tree(shape: &NakedTree) -> Result<PrunedTree, TreeError> {
    let bad = |m: String| Err(TreeError::ShapeViolation(m));
    if shape.depth < 1 || shape.child_counts.len() != shape.depth - 1 {
        return bad(format!("expected {} rows of child counts", shape.depth.saturating_sub(1)));
    }
    let mut levels = vec![vec![0i64], vec![-1i64]];
    let mut children = BTreeMap::new();
    let mut next = [1i64, 2i64]; // next modulus for even and odd levels
    for (k, counts) in shape.child_counts.iter().enumerate() {
        let n = k + 1;
        if counts.len() != levels[n].len() {
            return bad(format!("level {n} has {} vertices, {} counts given", levels[n].len(), counts.len()));
        }
        let parity = (n + 1) % 2;
        let sign = if parity == 0 { 1 } else { -1 };
        let mut row = Vec::new();
        for (&v, &c) in levels[n].iter().zip(counts) {
            if !(1..=2).contains(&c) {
                return bad(format!("vertex {v} has {c} children"));
            }
            let ids: Vec<i64> = (0..c as i64).map(|d| sign * (next[parity] + d)).collect();
            next[parity] += c as i64;
            row.extend_from_slice(&ids);
            children.insert(v, ids);
        }
        levels.push(row);
    }
    Ok(PrunedTree { levels, children })
}

/// Reads the transition tree of basic arcs from a folding pattern, down to
/// its generation count.
pub fn folding_to_tree(fp: &FoldingPattern) -> Result<PrunedTree, TreeError> {
    let ann = annotate(fp)?;
    let g = fp.generations;
    // arc id -> (inner endpoint, outer endpoint)
    let ends = |id: i64| (id, id + id.signum());
    let image_arcs = |id: i64| -> Option<Vec<i64>> {
        let (e1, e2) = ends(id);
        let a = ann.at(e1)?.arrow?;
        let b = ann.at(e2)?.arrow?;
        let (lo, hi) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
        let s = a.signum();
        Some((lo..hi).map(|m| s * m).collect())
    };
    let mut levels = vec![vec![0i64], vec![-1i64]];
    let mut children = BTreeMap::new();
    for n in 1..g {
        let mut row = Vec::new();
        for &v in &levels[n] {
            let cs = image_arcs(v).ok_or_else(|| {
                TreeError::Folding(FoldingError::MalformedPattern(format!("image of arc {v} leaves the window")))
            })?;
            row.extend_from_slice(&cs);
            children.insert(v, cs);
        }
        levels.push(row);
    }
    let t = PrunedTree { levels, children };
    t.validate()?;
    Ok(t)
}

/// A pruned tree with the basic points between its vertices and the signs
/// of its arcs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedTree {
    pub tree: PrunedTree,
    /// Per level, in reading order: the mark right of each vertex. Level 1
    /// starts with the extra `0` of `z_0`.
    pub marks: Vec<Vec<Mark>>,
    pub signs: Vec<Vec<Symbol>>,
}

impl MarkedTree {
    /// Mark right of vertex `k` on level `n`.
    pub fn mark_after(&self, n: usize, k: usize) -> Mark {
        self.marks[n][k + usize::from(n == 1)]
    }

    fn sign_of(&self, n: usize, v: i64) -> Symbol {
        let k = self.tree.levels[n].iter().position(|&x| x == v).expect("vertex on level");
        self.signs[n][k]
    }

    /// Level `n` as text, e.g. `- 0 + 1 + 0 - 1`.
    pub fn row(&self, n: usize) -> String {
        let mut out = Vec::new();
        if n == 1 {
            out.push("0".to_string());
        }
        for (k, s) in self.signs[n].iter().enumerate() {
            out.push(s.to_string());
            out.push(self.mark_after(n, k).digit().to_string());
        }
        out.join(" ")
    }
}

/// Puts a 0 between siblings and a 1 everywhere else, then propagates signs.
pub fn mark_tree(t: &PrunedTree) -> MarkedTree {
    let parents = t.parents();
    let mut marks = Vec::new();
    let mut signs: Vec<Vec<Symbol>> = Vec::new();
    for (n, level) in t.levels.iter().enumerate() {
        let mut row = Vec::new();
        if n == 1 {
            row.push(Mark::Zero);
        }
        for k in 0..level.len() {
            let sibling = k + 1 < level.len() && n >= 2 && parents.get(&level[k]) == parents.get(&level[k + 1]);
            row.push(if sibling { Mark::Zero } else { Mark::One });
        }
        let mut s = match n {
            0 => Symbol::Plus,
            1 => Symbol::Minus,
            _ => *signs[n - 2].last().expect("nonempty level"),
        };
        let mut srow = Vec::with_capacity(level.len());
        for k in 0..level.len() {
            srow.push(s);
            if row[k + usize::from(n == 1)] == Mark::Zero {
                s = s.flip();
            }
        }
        marks.push(row);
        signs.push(srow);
    }
    MarkedTree { tree: t.clone(), marks, signs }
}

/// Reads kneading sequences off a marked tree.
///
/// The turning point below a 0 between siblings `u`, `u'` (children of `v`)
/// has the arc-code of `v` and the tail read along the last-child chain from
/// the last child of `u`.
pub fn tree_to_kneading(mt: &MarkedTree, depth: usize) -> Result<KneadingSet, TreeError> {
    let t = &mt.tree;
    let g = t.depth();
    let parents = t.parents();
    let code_of = |v: i64| -> Vec<Symbol> {
        let mut path = Vec::new();
        let mut v = v;
        let mut n = t.levels.iter().position(|l| l.contains(&v)).expect("vertex");
        while n >= 1 {
            path.push(mt.sign_of(n, v));
            if n == 1 {
                break;
            }
            v = parents[&v];
            n -= 1;
        }
        path.reverse();
        path
    };
    let tail_from = |a: i64, level: usize| -> Vec<Symbol> {
        let mut out = Vec::new();
        let (mut a, mut n) = (a, level);
        while out.len() < depth {
            out.push(mt.sign_of(n, a));
            if n == g {
                break;
            }
            a = *t.children_of(a).expect("closed").last().expect("nonempty");
            n += 1;
        }
        out
    };
    let mut items = Vec::new();
    let mut tail0 = vec![mt.signs[0][0]];
    if g >= 1 && depth > 1 {
        tail0.extend(tail_from(-1, 1));
    }
    tail0.truncate(depth);
    items.push((0, KneadingSequence::new(SymbolWord::empty(), SymbolWord(tail0)).map_err(FoldingError::from)?));
    let mut next = [1i64, 1i64];
    for n in 2..=g {
        let level = &t.levels[n];
        for k in 0..level.len() {
            if mt.mark_after(n, k) != Mark::Zero {
                continue;
            }
            let left = n % 2 == 1;
            let slot = usize::from(left);
            let index = if left { next[slot] } else { -next[slot] };
            next[slot] += 1;
            if n == g {
                continue;
            }
            let u = level[k];
            let a = *t.children_of(u).expect("closed").last().expect("nonempty");
            let v = parents[&u];
            let seq = KneadingSequence::new(SymbolWord(code_of(v)), SymbolWord(tail_from(a, n + 1)))
                .map_err(FoldingError::from)?;
            items.push((index, seq));
        }
    }
    Ok(KneadingSet::from_indexed(items).map_err(FoldingError::from)?)
}

/// Rebuilds the folding pattern of a tree through its kneading data.
pub fn tree_to_folding(t: &PrunedTree) -> Result<FoldingPattern, TreeError> {
    let k = tree_to_kneading(&mark_tree(t), usize::MAX)?;
    Ok(kneading_to_folding(&k, t.depth())?)
}
