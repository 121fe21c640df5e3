//! Kneading theory for Henon-type attractors.
//!
//! Symbolic side: [`symbolic`], [`kneading`], [`folding`], [`tree`].
//! Numerical side: [`lozi`] (piecewise-affine, exact bookkeeping) and
//! [`henon`] (heuristic critical points).

pub mod folding;
pub mod geometry;
pub mod henon;
pub mod io;
pub mod kneading;
pub mod lozi;
pub mod manifold;
pub mod symbolic;
pub mod tree;

pub use folding::{AnnotatedPattern, FoldingPattern, Mark};
pub use geometry::{ConvexPolygon, Point};
pub use kneading::{KneadingSequence, KneadingSet, Verdict};
pub use manifold::WuPolyline;
pub use symbolic::{Ordering3, Symbol, SymbolWord, TwoSidedWindow};
pub use tree::{MarkedTree, PrunedTree};
