//! The worked folding-pattern example and the trees drawn from it.

use std::collections::BTreeMap;

use knead_core::folding::{annotate, FoldingPattern, Mark};
use knead_core::symbolic::Symbol;
use knead_core::tree::{folding_to_tree, mark_tree, relabel_naked_tree, strip_labels, tree_to_folding};

const WINDOW: &str = "1 0 1 0 1 0 . 1 0 1 0 1 1 1 0 1";

fn window() -> FoldingPattern {
    WINDOW.parse().unwrap()
}

#[test]
fn window_parses_as_four_generations() {
    let fp = window();
    assert_eq!(fp.generations, 4);
    assert_eq!(fp.to_string(), WINDOW);
}

#[test]
fn labels_signs_and_arrows() {
    use Symbol::{Minus as M, Plus as P, PlusMinus as C};
    // coord, mark, subscript, superscript, sign, image coord
    let expected: [(i64, u8, i64, u32, Symbol, Option<i64>); 15] = [
        (-6, 1, 0, 4, M, Some(9)),
        (-5, 0, 2, 0, C, Some(7)),
        (-4, 1, -1, 1, P, Some(6)),
        (-3, 0, 1, 0, C, Some(5)),
        (-2, 1, 0, 2, M, Some(3)),
        (-1, 0, 0, 0, C, Some(1)),
        (1, 1, 0, 1, P, Some(-2)),
        (2, 0, -1, 0, C, Some(-4)),
        (3, 1, 0, 3, M, Some(-6)),
        (4, 0, -2, 0, C, None),
        (5, 1, 1, 1, P, None),
        (6, 1, -1, 2, P, None),
        (7, 1, 2, 1, P, None),
        (8, 0, -3, 0, C, None),
        (9, 1, 0, 5, M, None),
    ];
    let ann = annotate(&window()).unwrap();
    assert_eq!(ann.positions.len(), expected.len());
    for (c, mark, sub, sup, sign, arrow) in expected {
        let p = ann.at(c).unwrap();
        assert_eq!(p.mark.digit(), mark, "mark at {c}");
        assert_eq!(p.subscript, sub, "subscript at {c}");
        assert_eq!(p.superscript, sup, "superscript at {c}");
        assert_eq!(p.sign, sign, "sign at {c}");
        assert_eq!(p.arrow, arrow, "arrow at {c}");
    }
}

#[test]
fn signed_sequence() {
    // the sign changes at every 0; a 1 carries the sign on both its sides
    let text = "- 1 - 0 + 1 + 0 - 1 - 0 + . + 1 + 0 - 1 - 0 + 1 + 1 + 1 + 0 - 1 -";
    let ann = annotate(&window()).unwrap();
    let mut sign = ann.positions[0].sign;
    let mut out = Vec::new();
    for p in &ann.positions {
        if p.coord == 1 {
            out.push(sign.to_string());
            out.push(".".to_string());
        }
        if p.mark == Mark::One {
            assert_eq!(p.sign, sign, "sign of the 1 at {}", p.coord);
        }
        out.push(sign.to_string());
        out.push(p.mark.digit().to_string());
        if p.mark == Mark::Zero {
            sign = sign.flip();
        }
    }
    out.push(sign.to_string());
    assert_eq!(out.join(" "), text);
}

fn drawn_tree() -> (Vec<Vec<i64>>, BTreeMap<i64, Vec<i64>>) {
    let levels = vec![vec![0], vec![-1], vec![1, 2], vec![-2, -3, -4, -5], vec![3, 4, 5, 6, 7, 8]];
    let children = BTreeMap::from([
        (-1, vec![1, 2]),
        (1, vec![-2, -3]),
        (2, vec![-4, -5]),
        (-2, vec![3, 4]),
        (-3, vec![5]),
        (-4, vec![6]),
        (-5, vec![7, 8]),
    ]);
    (levels, children)
}

#[test]
fn tree_of_basic_arcs() {
    let t = folding_to_tree(&window()).unwrap();
    let (levels, children) = drawn_tree();
    assert_eq!(t.levels, levels);
    assert_eq!(t.children, children);
}

#[test]
fn naked_tree_relabels() {
    let t = folding_to_tree(&window()).unwrap();
    let naked = strip_labels(&t).unwrap();
    assert_eq!(naked.child_counts, vec![vec![2], vec![2, 2], vec![2, 1, 1, 2]]);
    assert_eq!(relabel_naked_tree(&naked).unwrap(), t);
}

#[test]
fn marked_tree_rows() {
    let mt = mark_tree(&folding_to_tree(&window()).unwrap());
    let rows: Vec<String> = (0..mt.tree.levels.len()).map(|n| mt.row(n)).collect();
    assert_eq!(rows, ["+ 1", "0 - 1", "+ 0 - 1", "- 0 + 1 + 0 - 1", "- 0 + 1 + 1 + 1 + 0 - 1"]);
}

#[test]
fn tree_gives_back_the_window() {
    let fp = window();
    assert_eq!(tree_to_folding(&folding_to_tree(&fp).unwrap()).unwrap(), fp);
}
