//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use featimp::{SubsetMask, ValueTable};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_table(r: &mut StdRng, n: usize) -> ValueTable {
    ValueTable::from_fn(n, |_| r.gen_range(-1.0..1.0)).unwrap()
}

/// Random table with `ν(∅) = 0`.
pub fn random_grounded(r: &mut StdRng, n: usize) -> ValueTable {
    ValueTable::from_fn(n, |s| if s.is_empty() { 0.0 } else { r.gen_range(-1.0..1.0) }).unwrap()
}

/// Dividend magnitude in `[lo, 1]` with a random sign.
pub fn big_dividend(r: &mut StdRng, lo: f64) -> f64 {
    let m = r.gen_range(lo..1.0);
    if r.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// `ν(T) = Σ_{W⊆T} m(W)` by direct summation.
pub fn table_from_dividends(n: usize, m: &[f64]) -> ValueTable {
    ValueTable::from_fn(n, |t| t.subsets().map(|w| m[w.index()]).sum()).unwrap()
}

/// Random partition of `0..n` into exactly `k` nonempty blocks.
pub fn random_blocks(r: &mut StdRng, n: usize, k: usize) -> Vec<SubsetMask> {
    assert!(1 <= k && k <= n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut blocks = vec![SubsetMask::EMPTY; k];
    for (i, &f) in order.iter().enumerate() {
        let b = if i < k { i } else { r.gen_range(0..k) };
        blocks[b] = blocks[b].with(f);
    }
    blocks
}

/// Dividends supported inside the given blocks, each nonzero with
/// probability `density` and magnitude at least `lo`; `ν(∅) = 0`.
pub fn block_dividends(r: &mut StdRng, n: usize, blocks: &[SubsetMask], density: f64, lo: f64) -> Vec<f64> {
    let mut m = vec![0.0; 1 << n];
    for &b in blocks {
        for w in b.subsets() {
            if w.is_empty() {
                continue;
            }
            // singletons always carry mass so every block is visible
            if w.len() == 1 || r.gen_bool(density) {
                m[w.index()] = big_dividend(r, lo);
            }
        }
    }
    m
}

/// Connects each block internally so it cannot split further.
pub fn connect_blocks(r: &mut StdRng, m: &mut [f64], blocks: &[SubsetMask], lo: f64) {
    for &b in blocks {
        let members: Vec<usize> = b.iter().collect();
        for pair in members.windows(2) {
            let w = SubsetMask::from_features(pair.iter().copied());
            if m[w.index()] == 0.0 {
                m[w.index()] = big_dividend(r, lo);
            }
        }
    }
}

pub fn popcount_parity(w: SubsetMask) -> f64 {
    if w.len().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Inclusion–exclusion, one dividend at a time.
pub fn naive_dividend(t: &ValueTable, w: SubsetMask) -> f64 {
    w.subsets().map(|u| popcount_parity(w.difference(u)) * t.get(u)).sum()
}

/// Separability straight from the definition.
pub fn naive_separable(t: &ValueTable, s: SubsetMask, tol: f64) -> bool {
    (0..1u32 << t.n()).all(|bits| {
        let tt = SubsetMask(bits);
        (t.get(tt) - t.get(tt.intersection(s)) - t.get(tt.difference(s))).abs() <= tol
    })
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut p in permutations(rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Shapley value as the average marginal contribution over all orderings.
pub fn permutation_shapley(t: &ValueTable) -> Vec<f64> {
    let n = t.n();
    let perms = permutations((0..n).collect());
    let mut phi = vec![0.0; n];
    for p in &perms {
        let mut before = SubsetMask::EMPTY;
        for &f in p {
            phi[f] += t.get(before.with(f)) - t.get(before);
            before = before.with(f);
        }
    }
    phi.iter().map(|x| x / perms.len() as f64).collect()
}

/// Scores computed straight from their definitions, no library help.
pub fn naive_scores(method: featimp::ScoreMethod, t: &ValueTable) -> Vec<f64> {
    use featimp::ScoreMethod::*;
    let n = t.n();
    let full = SubsetMask::full(n);
    (0..n)
        .map(|f| match method {
            Bivariate => t.get(SubsetMask::singleton(f)),
            Ablation => t.get(full) - t.get(full.without(f)),
            Shapley => permutation_shapley(t)[f],
            Mci => full
                .without(f)
                .subsets()
                .map(|s| t.get(s.with(f)) - t.get(s))
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect()
}
