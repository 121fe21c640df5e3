//! The Lozi engine against the combinatorial side: round trips, admissibility
//! of computed itineraries, order and tail domination, regions.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use knead_core::folding::{compare_folding, folding_to_kneading, kneading_to_folding, FoldingComparison};
use knead_core::kneading::{is_admissible, is_wu_admissible, AdmissibleOptions, KneadingSet, Verdict};
use knead_core::lozi::{
    arc_code_at, folding_pattern_of, forward_symbols, grow_for_indices, itinerary_of, itinerary_to_region,
    kneading_set_from, kneading_set_of, lozi_apply, nearest_indices, GrowOptions, LoziParams,
};
use knead_core::manifold::{MarkerKind, WuPolyline};
use knead_core::symbolic::{gplex_compare, plex_compare, Ordering3, Symbol, SymbolWord, TwoSidedWindow};
use knead_core::tree::{folding_to_tree, mark_tree, tree_to_folding, tree_to_kneading};

const P: LoziParams = LoziParams::new(1.8, 0.3);
const EPS: f64 = 1e-9;

struct Setup {
    poly: WuPolyline,
    k: KneadingSet,
}

fn setup() -> Setup {
    let idx = nearest_indices(40);
    let poly = grow_for_indices(&P, -20, 19, &GrowOptions::default()).unwrap();
    let k = kneading_set_from(&P, &poly, &idx, 20, EPS).unwrap();
    Setup { poly, k }
}

fn has_undecided(w: &TwoSidedWindow) -> bool {
    w.left_word().0.contains(&Symbol::PlusMinus) || w.right_word().0.contains(&Symbol::PlusMinus)
}

/// `p` in `+^inf . p` form with `p_0 = -`; `None` for the fixed point's tail.
fn wu_word(w: &TwoSidedWindow) -> Option<Vec<Symbol>> {
    let mut all = w.left_word().0.clone();
    all.extend_from_slice(&w.right_word().0);
    let first = all.iter().position(|&s| s == Symbol::Minus)?;
    Some(all.split_off(first))
}

/// Each entry of `got` agrees with `want` on the arc-code and on the
/// shorter of the two tails.
fn agrees(got: &KneadingSet, want: &KneadingSet) -> usize {
    let mut checked = 0;
    for (i, e) in got.iter() {
        let Some(w) = want.get(i) else { continue };
        assert_eq!(e.arc_code, w.arc_code, "arc-code of {i}");
        let d = e.tail.len().min(w.tail.len());
        assert_eq!(e.tail.0[..d], w.tail.0[..d], "tail of {i}");
        checked += 1;
    }
    checked
}

#[test]
fn equivalence_round_trips() {
    let start = Instant::now();
    let opts = GrowOptions::default();
    let k = kneading_set_of(&P, 40, 20, &opts).unwrap();
    let fp = kneading_to_folding(&k, 6).unwrap();
    assert_eq!(fp, folding_pattern_of(&P, 6, &opts).unwrap());

    let back = folding_to_kneading(&fp, 20).unwrap();
    let n = agrees(&back, &k);
    assert_eq!(n, back.len(), "{n}");

    let tree = folding_to_tree(&fp).unwrap();
    assert_eq!(tree_to_folding(&tree).unwrap(), fp);

    // kneading -> folding -> tree -> kneading closes the triangle
    let via_tree = tree_to_kneading(&mark_tree(&tree), 20).unwrap();
    assert_eq!(via_tree, back);
    assert!(n >= 10, "{n}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn sampled_manifold_points_are_admissible() {
    let start = Instant::now();
    let s = setup();
    let (lo, hi) = s.poly.phi_range();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut tested, mut excluded) = (0, 0);
    while tested < 1000 {
        let phi = rng.gen_range(lo..hi);
        let w = itinerary_of(&P, &s.poly, phi, 20, EPS).unwrap();
        if has_undecided(&w) {
            excluded += 1;
            continue;
        }
        tested += 1;
        let Some(word) = wu_word(&w) else { continue };
        let v = is_wu_admissible(&word, &s.k, word.len()).unwrap();
        assert!(v.is_admissible(), "phi {phi}: {} {v:?}", SymbolWord(word));
    }
    assert!(excluded < 100);
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn manifold_order_is_gplex_order() {
    let s = setup();
    let (lo, hi) = s.poly.phi_range();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut resolved = 0;
    while resolved < 1000 {
        let a = rng.gen_range(lo..hi);
        // half the pairs are close together
        let b = if resolved % 2 == 0 { rng.gen_range(lo..hi) } else { (a + rng.gen_range(-1e-3..1e-3)).clamp(lo, hi) };
        if a == b {
            continue;
        }
        let wa = itinerary_of(&P, &s.poly, a, 30, EPS).unwrap();
        let wb = itinerary_of(&P, &s.poly, b, 30, EPS).unwrap();
        if has_undecided(&wa) || has_undecided(&wb) {
            continue;
        }
        let r = gplex_compare(&wa, &wb).unwrap();
        if let Ordering3::EqualUpToDepth(_) = r {
            continue;
        }
        assert_eq!(r == Ordering3::Less, a < b, "{wa} vs {wb} at {a}, {b}");
        resolved += 1;
    }
}

#[test]
fn leaf_tails_are_dominated_by_kneading_tails() {
    let s = setup();
    let post: Vec<f64> = s.poly.markers.iter().filter(|m| m.kind == MarkerKind::PostCritical).map(|m| m.phi).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in nearest_indices(20) {
        let turning = s.poly.marker(i, 1).unwrap();
        let tail = &s.k.get(i).unwrap().tail.0;
        let at = post.iter().position(|&f| f == turning.phi).unwrap();
        // both leaves with an endpoint at the turning point
        let (lo, hi) = (post[at - 1], post[at + 1]);
        let mut checked = 0;
        while checked < 50 {
            let phi = rng.gen_range(lo..hi);
            let q = s.poly.point_at(phi).unwrap();
            let p = forward_symbols(&P, q, 20, EPS);
            if p.contains(&Symbol::PlusMinus) {
                continue;
            }
            let r = plex_compare(&p, tail, 20);
            assert!(!r.is_greater(), "leaf point {phi} of z_{i}^1: {} > {}", SymbolWord(p), SymbolWord(tail.clone()));
            checked += 1;
        }
    }
}

#[test]
fn manifold_words_are_the_admissible_words() {
    let s = setup();
    let n = s.k.complete_code_length() + 2;
    let (lo, hi) = s.poly.phi_range();
    let m = 200_000;
    let mut realized = BTreeSet::new();
    for j in 0..m {
        let phi = lo + (hi - lo) * (j as f64 + 0.5) / m as f64;
        // points with itinerary +^inf . p, p_0 = -
        if arc_code_at(&s.poly, phi, EPS).unwrap().to_string() != "-" {
            continue;
        }
        let w = forward_symbols(&P, s.poly.point_at(phi).unwrap(), n, EPS);
        if !w.contains(&Symbol::PlusMinus) {
            realized.insert(w);
        }
    }
    let mut admissible = BTreeSet::new();
    for bits in 0..1u32 << (n - 1) {
        let mut w = vec![Symbol::Minus];
        w.extend((0..n - 1).map(|b| if bits >> b & 1 == 1 { Symbol::Plus } else { Symbol::Minus }));
        if is_wu_admissible(&w, &s.k, n).unwrap().is_admissible() {
            admissible.insert(w);
        }
    }
    assert!(realized.len() > 10);
    assert_eq!(realized, admissible);
}

#[test]
fn shifting_the_itinerary_follows_the_map() {
    let s = setup();
    let (lo, hi) = s.poly.phi_range();
    let map = s.poly.image_map.as_ref().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 200 {
        let phi = rng.gen_range(lo / 3.0..hi / 3.0);
        let Some(image) = map.eval(phi) else { continue };
        let w = itinerary_of(&P, &s.poly, phi, 20, EPS).unwrap();
        let v = itinerary_of(&P, &s.poly, image, 19, EPS).unwrap();
        if has_undecided(&w) || has_undecided(&v) {
            continue;
        }
        assert_eq!(w.shift(1).unwrap(), v);
        let q = lozi_apply(&P, s.poly.point_at(phi).unwrap());
        assert!(q.dist(s.poly.point_at(image).unwrap()) < 1e-9);
        checked += 1;
    }
}

#[test]
fn shift_does_not_preserve_admissibility() {
    // dropping the leading - of an admissible word can leave a rejected one
    let s = setup();
    let p: SymbolWord = "---+-+++----".parse().unwrap();
    let q: SymbolWord = "--+-+++----".parse().unwrap();
    assert!(is_wu_admissible(&p.0, &s.k, 12).unwrap().is_admissible());
    assert!(matches!(is_wu_admissible(&q.0, &s.k, 11).unwrap(), Verdict::Rejected { .. }));
}

#[test]
fn rejected_windows_have_empty_regions() {
    let s = setup();
    let n = 3;
    let mut rejected = 0;
    for bits in 0..1u32 << (2 * n + 1) {
        let syms: Vec<Symbol> =
            (0..2 * n + 1).map(|b| if bits >> b & 1 == 1 { Symbol::Plus } else { Symbol::Minus }).collect();
        let w = TwoSidedWindow::new(SymbolWord(syms[..n].to_vec()), false, SymbolWord(syms[n..].to_vec()));
        let v = is_admissible(&w, &s.k, n, AdmissibleOptions::default()).unwrap();
        let region = itinerary_to_region(&P, &w).unwrap();
        let area: f64 = region.iter().map(|r| r.area()).sum();
        if let Verdict::Rejected { .. } = v {
            rejected += 1;
            assert!(area < 1e-12, "{w} rejected but has area {area}");
        }
    }
    assert!(rejected > 0);
}

#[test]
fn all_plus_regions_shrink_to_the_fixed_point() {
    let diameter = |r: usize| {
        let w = TwoSidedWindow::new(SymbolWord(vec![Symbol::Plus; r]), false, SymbolWord(vec![Symbol::Plus; r + 1]));
        let region = itinerary_to_region(&P, &w).unwrap();
        assert_eq!(region.len(), 1);
        assert!(region[0].contains(P.fixed_point(), 1e-12));
        region[0].diameter()
    };
    let d: Vec<f64> = (2..=12).map(diameter).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    let d14 = diameter(14);
    assert!(d14 < 1e-2);
    assert!((d14 - 1.0136235e-4).abs() < 1e-10, "{d14:e}");
}

#[test]
fn folding_patterns_tell_parameters_apart() {
    let start = Instant::now();
    let opts = GrowOptions::default();
    let a = folding_pattern_of(&P, 6, &opts).unwrap();
    let b = folding_pattern_of(&LoziParams::new(1.7, 0.35), 6, &opts).unwrap();
    assert_eq!(compare_folding(&a, &b), FoldingComparison::DifferAt { coordinate: 10 });
    assert_eq!(compare_folding(&a, &a), FoldingComparison::EqualUpTo(6));
    assert!(start.elapsed().as_secs_f64() < 10.0);
}
