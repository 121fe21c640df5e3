//! Axioms of the parity-lexicographical order, checked exhaustively against
//! two independent oracles.

use std::time::Instant;

use knead_core::symbolic::{plex_cmp, plex_compare, Ordering3, Symbol};

const ALPHABET: [Symbol; 3] = [Symbol::Minus, Symbol::PlusMinus, Symbol::Plus];

fn words(len: usize, alphabet: &[Symbol]) -> Vec<Vec<Symbol>> {
    let k = alphabet.len();
    (0..k.pow(len as u32))
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let s = alphabet[code % k];
                    code /= k;
                    s
                })
                .collect()
        })
        .collect()
}

/// Literal reading of the definition: find the first index where the words
/// differ, count the `+` before it, and flip the symbol order if the count
/// is odd. A shared `~` before any difference leaves the order undecided.
fn oracle(u: &[Symbol], v: &[Symbol], depth: usize) -> Ordering3 {
    let n = depth.min(u.len()).min(v.len());
    let rank = |s: Symbol| match s {
        Symbol::Minus => 0,
        Symbol::PlusMinus => 1,
        Symbol::Plus => 2,
    };
    for m in 0..n {
        if u[m] == v[m] {
            if u[m] == Symbol::PlusMinus {
                return Ordering3::EqualUpToDepth(m);
            }
            continue;
        }
        let plus = u[..m].iter().filter(|&&s| s == Symbol::Plus).count();
        let less = rank(u[m]) < rank(v[m]);
        return if less == (plus % 2 == 0) { Ordering3::Less } else { Ordering3::Greater };
    }
    Ordering3::EqualUpToDepth(n)
}

/// Position of a concrete word in plex order, as an integer: the bits are
/// the running parities of `+` (the tent-map coordinate of the word).
fn rank(w: &[Symbol]) -> u32 {
    let mut parity = 0;
    let mut r = 0;
    for &s in w {
        if s == Symbol::Plus {
            parity ^= 1;
        }
        r = (r << 1) | parity;
    }
    r
}

#[test]
fn concrete_words_of_length_ten() {
    let start = Instant::now();
    let ws = words(10, &[Symbol::Minus, Symbol::Plus]);
    // ranks form a bijection onto 0..1024, so plex is a total order
    let mut seen = vec![false; ws.len()];
    for w in &ws {
        let r = rank(w) as usize;
        assert!(!seen[r]);
        seen[r] = true;
    }
    for u in &ws {
        let ru = rank(u);
        for v in &ws {
            let got = plex_compare(u, v, 10);
            let rv = rank(v);
            let want = match ru.cmp(&rv) {
                std::cmp::Ordering::Less => Ordering3::Less,
                std::cmp::Ordering::Greater => Ordering3::Greater,
                std::cmp::Ordering::Equal => Ordering3::EqualUpToDepth(10),
            };
            assert_eq!(got, want);
            assert_eq!(got, oracle(u, v, 10));
            // antisymmetry
            assert_eq!(plex_compare(v, u, 10), got.reverse());
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "took {:?}", start.elapsed());
}

#[test]
fn all_lengths_up_to_ten_match_the_oracle() {
    let all: Vec<Vec<Symbol>> = (0..=10).flat_map(|n| words(n, &[Symbol::Minus, Symbol::Plus])).collect();
    let mut pairs = 0u64;
    for u in &all {
        for v in &all {
            let d = u.len().max(v.len());
            assert_eq!(plex_compare(u, v, d), oracle(u, v, d));
            pairs += 1;
        }
    }
    assert_eq!(pairs, 2047 * 2047);
}

#[test]
fn words_with_plus_minus_match_the_oracle() {
    for len in 0..=6 {
        let ws = words(len, &ALPHABET);
        for u in &ws {
            for v in &ws {
                for depth in [len / 2, len] {
                    assert_eq!(plex_compare(u, v, depth), oracle(u, v, depth), "{u:?} {v:?} {depth}");
                }
            }
        }
    }
}

#[test]
fn transitive_including_plus_minus() {
    let ws: Vec<Vec<Symbol>> = words(5, &ALPHABET);
    let n = ws.len();
    let lt: Vec<bool> = (0..n * n).map(|k| plex_compare(&ws[k / n], &ws[k % n], 5) == Ordering3::Less).collect();
    for a in 0..n {
        for b in 0..n {
            if !lt[a * n + b] {
                continue;
            }
            for c in 0..n {
                if lt[b * n + c] {
                    assert!(lt[a * n + c], "{:?} < {:?} < {:?}", ws[a], ws[b], ws[c]);
                }
            }
        }
    }
}

#[test]
fn totality_on_concrete_words() {
    // distinct concrete words of equal length are always comparable
    let ws = words(8, &[Symbol::Minus, Symbol::Plus]);
    for u in &ws {
        for v in &ws {
            let r = plex_compare(u, v, 8);
            assert_eq!(matches!(r, Ordering3::EqualUpToDepth(_)), u == v);
        }
    }
}

#[test]
fn sorting_agrees_with_rank() {
    let mut ws = words(10, &[Symbol::Minus, Symbol::Plus]);
    ws.sort_by(|a, b| plex_cmp(a, b));
    let ranks: Vec<u32> = ws.iter().map(|w| rank(w)).collect();
    assert!(ranks.windows(2).all(|w| w[0] < w[1]));
}
