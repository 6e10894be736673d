//! Reference implementations used as test oracles. They read the pattern's
//! stars directly and share no code with the library's graph, flow or
//! decision modules.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switchctl::decide::{Certificate, Verdict};
use switchctl::flow::{FlowAssignment, FlowNetwork};
use switchctl::pattern::{random_pattern, SparsityPattern};

pub fn five_state() -> SparsityPattern {
    SparsityPattern::from_one_based(
        5,
        2,
        [
            (1, 2),
            (1, 6),
            (1, 7),
            (2, 7),
            (3, 1),
            (4, 2),
            (4, 3),
            (5, 3),
            (5, 4),
        ],
    )
    .unwrap()
}

pub fn shared_pair() -> SparsityPattern {
    SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 3), (2, 1)]).unwrap()
}

pub fn two_cycle() -> SparsityPattern {
    SparsityPattern::from_one_based(2, 1, [(1, 2), (2, 1), (1, 3)]).unwrap()
}

pub fn integrator() -> SparsityPattern {
    SparsityPattern::from_one_based(1, 1, [(1, 2)]).unwrap()
}

/// Patterns with `1..=max_n` states, `0..=max_m` inputs and a density drawn
/// from {0.1, ..., 0.9}.
pub fn arb_pattern(max_n: usize, max_m: usize) -> impl Strategy<Value = SparsityPattern> {
    (1..=max_n, 0..=max_m, 1..=9u32, any::<u64>())
        .prop_map(|(n, m, d, seed)| random_pattern(n, m, d as f64 / 10.0, seed).unwrap())
}

/// Deterministic corpus of `count` patterns cycling through densities 0.1..0.9.
pub fn corpus(count: usize, max_n: usize, max_m: usize, seed: u64) -> Vec<SparsityPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_n);
            let m = rng.gen_range(0..=max_m);
            let density = ((i % 9) + 1) as f64 / 10.0;
            random_pattern(n, m, density, rng.gen()).unwrap()
        })
        .collect()
}

/// `(N^α_in, N^β_in)` read straight from the rows of the pattern.
pub fn neighbors(
    p: &SparsityPattern,
    subset: &BTreeSet<usize>,
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let n = p.n();
    let mut alpha = BTreeSet::new();
    let mut beta = BTreeSet::new();
    for &(i, j) in p.stars() {
        if subset.contains(&i) {
            if j < n {
                alpha.insert(j);
            } else {
                beta.insert(j - n);
            }
        }
    }
    (alpha, beta)
}

pub fn subset_of(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// State nodes reachable from some input, by repeated relaxation over stars.
pub fn reachable(p: &SparsityPattern) -> Vec<bool> {
    let n = p.n();
    let mut r = vec![false; n];
    for _ in 0..=n {
        for &(i, j) in p.stars() {
            if j >= n || r[j] {
                r[i] = true;
            }
        }
    }
    r
}

/// Controllability for `(k, q)` by direct enumeration of the counting condition.
pub fn reference_decision(p: &SparsityPattern, k: u64, q: u64) -> bool {
    if !reachable(p).iter().all(|&x| x) {
        return false;
    }
    let (k1, q) = (k as i128 + 1, q as i128);
    (1u32..1 << p.n()).all(|mask| {
        let s = subset_of(mask);
        let (a, b) = neighbors(p, &s);
        k1 * b.len() as i128 + k1 * q * a.len() as i128 >= q * s.len() as i128
    })
}

/// `k*` by its closed formula; `None` for infinity.
pub fn reference_kstar(p: &SparsityPattern) -> Option<u64> {
    if !reachable(p).iter().all(|&x| x) {
        return None;
    }
    let mut best = 0u64;
    for mask in 1u32..1 << p.n() {
        let s = subset_of(mask);
        let (a, _) = neighbors(p, &s);
        if a.is_empty() {
            return None;
        }
        best = best.max((s.len().div_ceil(a.len()) - 1) as u64);
    }
    Some(best)
}

/// Maximum flow value as the minimum over all s-t cuts; feasible for
/// networks with at most ~20 inner nodes.
pub fn min_cut_by_enumeration(net: &FlowNetwork) -> i128 {
    let inner: Vec<usize> = (0..net.node_count())
        .filter(|&v| v != net.source() && v != net.sink())
        .collect();
    assert!(inner.len() <= 22, "too many nodes for cut enumeration");
    let mut best = i128::MAX;
    for mask in 0u64..1 << inner.len() {
        let mut side = vec![false; net.node_count()];
        side[net.source()] = true;
        for (b, &v) in inner.iter().enumerate() {
            side[v] = mask >> b & 1 == 1;
        }
        let cap: i128 = net
            .arcs()
            .iter()
            .filter(|a| side[a.from] && !side[a.to])
            .map(|a| a.capacity as i128)
            .sum();
        best = best.min(cap);
    }
    best
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A random feasible flow: repeated augmentation along random forward
/// `s → L → R → t` paths by a random fraction of the bottleneck.
pub fn random_feasible_flow(net: &FlowNetwork, seed: u64) -> FlowAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flow = vec![BigRational::from_integer(0.into()); net.arc_count()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
    for (i, a) in net.arcs().iter().enumerate() {
        out[a.from].push(i);
    }
    let mut value = BigRational::from_integer(0.into());
    let rounds = rng.gen_range(0..=3 * net.node_count());
    for _ in 0..rounds {
        let mut path = Vec::new();
        let mut v = net.source();
        while v != net.sink() {
            let options: Vec<usize> = out[v]
                .iter()
                .copied()
                .filter(|&e| flow[e] < BigRational::from_integer(net.arcs()[e].capacity.into()))
                .collect();
            if options.is_empty() {
                break;
            }
            let e = options[rng.gen_range(0..options.len())];
            path.push(e);
            v = net.arcs()[e].to;
        }
        if v != net.sink() {
            continue;
        }
        let bottleneck = path
            .iter()
            .map(|&e| BigRational::from_integer(net.arcs()[e].capacity.into()) - &flow[e])
            .min()
            .unwrap();
        let den = rng.gen_range(1..=6);
        let num = rng.gen_range(1..=den);
        let push = bottleneck * rat(num, den);
        for &e in &path {
            flow[e] += &push;
        }
        value += push;
    }
    FlowAssignment {
        values: flow,
        value,
    }
}

/// Re-verify a false verdict's certificate from the stars alone, with plain
/// integer arithmetic.
pub fn certificate_reverifies(p: &SparsityPattern, v: &Verdict) -> bool {
    match &v.certificate {
        Certificate::Unreachable { nodes } => {
            let r = reachable(p);
            !nodes.is_empty() && nodes.iter().all(|&i| i < p.n() && !r[i])
        }
        Certificate::ViolatingSubset {
            subset,
            lhs,
            rhs,
            k,
            q,
        } => {
            if *k != v.k || *q != v.q || subset.is_empty() || subset.iter().any(|&i| i >= p.n()) {
                return false;
            }
            let s: BTreeSet<usize> = subset.iter().copied().collect();
            if s.len() != subset.len() {
                return false;
            }
            let (a, b) = neighbors(p, &s);
            let k1 = *k as i128 + 1;
            let l = k1 * b.len() as i128 + k1 * *q as i128 * a.len() as i128;
            let r = *q as i128 * s.len() as i128;
            l == *lhs && r == *rhs && l < r
        }
        Certificate::Saturated { .. } | Certificate::Exhaustive { .. } => false,
    }
}
