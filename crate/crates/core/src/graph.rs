//! The digraph induced by a sparsity pattern, neighbor-set queries, the
//! reachability precondition, and exhaustive evaluation of the counting
//! conditions.
//!
//! State node `α_i` is `Node::State(i - 1)` and control node `β_j` is
//! `Node::Control(j - 1)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::time::Instant;

use crate::decide::{Certificate, KStar, KStarResult, KStarWitness, Verdict, VerdictStats};
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

/// Largest state dimension for which subsets are enumerated.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Upper bound (inclusive) on `k + 1` and on `q` in the counting condition.
pub const MAX_MULTIPLIER: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    State(usize),
    Control(usize),
}

/// Digraph `G = (V^α ∪ V^β, E)`. Every edge ends at a state node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n_state: usize,
    n_control: usize,
    edges: BTreeSet<(Node, Node)>,
    state_in: Vec<Vec<usize>>,
    control_in: Vec<Vec<usize>>,
    state_out: Vec<Vec<usize>>,
    control_out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(
        n_state: usize,
        n_control: usize,
        edges: impl IntoIterator<Item = (Node, Node)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            let target = match to {
                Node::State(i) if i < n_state => i,
                Node::State(i) => {
                    return Err(Error::Domain(format!(
                        "edge target a{} out of range",
                        i + 1
                    )))
                }
                Node::Control(j) => {
                    return Err(Error::Domain(format!(
                        "edge targets control node b{}",
                        j + 1
                    )))
                }
            };
            match from {
                Node::State(i) if i >= n_state => {
                    return Err(Error::Domain(format!(
                        "edge source a{} out of range",
                        i + 1
                    )))
                }
                Node::Control(j) if j >= n_control => {
                    return Err(Error::Domain(format!(
                        "edge source b{} out of range",
                        j + 1
                    )))
                }
                _ => {}
            }
            set.insert((from, Node::State(target)));
        }
        let mut g = Self {
            n_state,
            n_control,
            edges: set,
            state_in: vec![Vec::new(); n_state],
            control_in: vec![Vec::new(); n_state],
            state_out: vec![Vec::new(); n_state],
            control_out: vec![Vec::new(); n_control],
        };
        for &(from, to) in &g.edges {
            let Node::State(w) = to else { unreachable!() };
            match from {
                Node::State(v) => {
                    g.state_in[w].push(v);
                    g.state_out[v].push(w);
                }
                Node::Control(c) => {
                    g.control_in[w].push(c);
                    g.control_out[c].push(w);
                }
            }
        }
        Ok(g)
    }

    pub fn n_state(&self) -> usize {
        self.n_state
    }

    pub fn n_control(&self) -> usize {
        self.n_control
    }

    pub fn edges(&self) -> &BTreeSet<(Node, Node)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: Node, to: Node) -> bool {
        self.edges.contains(&(from, to))
    }

    /// State in-neighbors of state node `i`.
    pub fn state_in(&self, i: usize) -> &[usize] {
        &self.state_in[i]
    }

    /// Control in-neighbors of state node `i`.
    pub fn control_in(&self, i: usize) -> &[usize] {
        &self.control_in[i]
    }

    /// Graphviz rendering: state nodes are circles `a1..an`, control nodes
    /// squares `b1..bm`, in index order.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for i in 0..self.n_state {
            let _ = writeln!(s, "  a{} [shape=circle];", i + 1);
        }
        for j in 0..self.n_control {
            let _ = writeln!(s, "  b{} [shape=square];", j + 1);
        }
        for &(from, to) in &self.edges {
            let _ = writeln!(s, "  {} -> {};", node_label(from), node_label(to));
        }
        s.push_str("}\n");
        s
    }
}

fn node_label(v: Node) -> String {
    match v {
        Node::State(i) => format!("a{}", i + 1),
        Node::Control(j) => format!("b{}", j + 1),
    }
}

/// In-neighbor sets `N^α_in(V′)` and `N^β_in(V′)`, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeighborSets {
    pub alpha_in: BTreeSet<usize>,
    pub beta_in: BTreeSet<usize>,
}

/// Edge `α_j → α_i` for every A-block star `(i, j)`, edge `β_j → α_i` for
/// every B-block star `(i, n + j)`.
pub fn to_digraph(pattern: &SparsityPattern) -> Digraph {
    let n = pattern.n();
    let edges = pattern.stars().iter().map(|&(i, j)| {
        if j < n {
            (Node::State(j), Node::State(i))
        } else {
            (Node::Control(j - n), Node::State(i))
        }
    });
    Digraph::new(n, pattern.m(), edges).expect("pattern stars are always in range")
}

pub fn in_neighbor_sets(g: &Digraph, subset: &[usize]) -> Result<NeighborSets> {
    let mut out = NeighborSets::default();
    for &w in subset {
        if w >= g.n_state {
            return Err(Error::Domain(format!(
                "state node a{} out of range 1..={}",
                w + 1,
                g.n_state
            )));
        }
        out.alpha_in.extend(g.state_in[w].iter().copied());
        out.beta_in.extend(g.control_in[w].iter().copied());
    }
    Ok(out)
}

/// State nodes with no directed path from any control node (BFS from a
/// virtual root joined to every control node). Empty iff the path condition holds.
pub fn reachability_check(g: &Digraph) -> BTreeSet<usize> {
    let mut seen = vec![false; g.n_state];
    let mut queue = VecDeque::new();
    for c in 0..g.n_control {
        for &w in &g.control_out[c] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &g.state_out[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    (0..g.n_state).filter(|&i| !seen[i]).collect()
}

/// Both sides of `(k+1)|N^β_in(V′)| + (k+1)q|N^α_in(V′)| ≥ q|V′|` for one subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreCheck {
    pub holds: bool,
    pub lhs: i128,
    pub rhs: i128,
}

pub(crate) fn check_multipliers(k: u64, q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::Domain("ensemble size q must be at least 1".into()));
    }
    if k >= MAX_MULTIPLIER || q > MAX_MULTIPLIER {
        return Err(Error::Range(format!(
            "k + 1 and q must not exceed 2^31 (got k = {k}, q = {q})"
        )));
    }
    Ok(())
}

pub(crate) fn core_sides(k: u64, q: u64, beta: usize, alpha: usize, size: usize) -> (i128, i128) {
    let k1 = k as i128 + 1;
    let q = q as i128;
    (k1 * beta as i128 + k1 * q * alpha as i128, q * size as i128)
}

pub fn core_condition_holds(g: &Digraph, k: u64, q: u64, subset: &[usize]) -> Result<CoreCheck> {
    check_multipliers(k, q)?;
    let sets = in_neighbor_sets(g, subset)?;
    let size = subset.iter().collect::<BTreeSet<_>>().len();
    let (lhs, rhs) = core_sides(k, q, sets.beta_in.len(), sets.alpha_in.len(), size);
    Ok(CoreCheck {
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}

/// Bitmask helpers for subset enumeration over at most [`BRUTE_FORCE_LIMIT`]
/// state nodes. Control in-neighbors are kept as word bitsets because `m`
/// is unbounded.
struct SubsetTables {
    n: usize,
    alpha_in: Vec<u32>,
    beta_in: Vec<Vec<u64>>,
    beta_words: usize,
}

impl SubsetTables {
    fn new(g: &Digraph) -> Result<Self> {
        let n = g.n_state;
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::Capacity {
                n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let beta_words = g.n_control.div_ceil(64);
        let mut alpha_in = vec![0u32; n];
        let mut beta_in = vec![vec![0u64; beta_words]; n];
        for w in 0..n {
            for &v in &g.state_in[w] {
                alpha_in[w] |= 1 << v;
            }
            for &c in &g.control_in[w] {
                beta_in[w][c / 64] |= 1 << (c % 64);
            }
        }
        Ok(Self {
            n,
            alpha_in,
            beta_in,
            beta_words,
        })
    }

    /// (|V′|, |N^β_in(V′)|, |N^α_in(V′)|) for the subset encoded by `mask`.
    fn counts(&self, mask: u32, scratch: &mut [u64]) -> (usize, usize, usize) {
        scratch.iter_mut().for_each(|w| *w = 0);
        let mut alpha = 0u32;
        let mut bits = mask;
        while bits != 0 {
            let w = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            alpha |= self.alpha_in[w];
            for (s, b) in scratch.iter_mut().zip(&self.beta_in[w]) {
                *s |= b;
            }
        }
        let beta: u32 = scratch.iter().map(|w| w.count_ones()).sum();
        (
            mask.count_ones() as usize,
            beta as usize,
            alpha.count_ones() as usize,
        )
    }

    fn masks(&self) -> impl Iterator<Item = u32> {
        1..(1u32 << self.n)
    }
}

pub(crate) fn mask_to_subset(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Path condition by naive fixed-point iteration over the edge list, kept
/// separate from the BFS in [`reachability_check`].
fn unreachable_by_closure(g: &Digraph) -> Vec<usize> {
    let mut reached = vec![false; g.n_state];
    loop {
        let mut changed = false;
        for &(from, to) in &g.edges {
            let Node::State(w) = to else { continue };
            let src_ok = match from {
                Node::Control(_) => true,
                Node::State(v) => reached[v],
            };
            if src_ok && !reached[w] {
                reached[w] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..g.n_state).filter(|&i| !reached[i]).collect()
}

/// Exhaustive check of the path condition and the counting condition over all
/// `2^n − 1` nonempty subsets. A failing subset is chosen by smallest
/// `rhs − lhs`, then smallest bitmask.
pub fn brute_force_check(g: &Digraph, k: u64, q: u64) -> Result<Verdict> {
    let start = Instant::now();
    check_multipliers(k, q)?;
    let tables = SubsetTables::new(g)?;
    let target = g.n_state as i128 * q as i128;
    let stats = |elapsed| VerdictStats {
        theta: None,
        target,
        network_nodes: 0,
        network_arcs: 0,
        elapsed,
        fallback_used: false,
    };

    let unreachable = unreachable_by_closure(g);
    if !unreachable.is_empty() {
        return Ok(Verdict {
            decision: false,
            k,
            q,
            certificate: Certificate::Unreachable { nodes: unreachable },
            stats: stats(start.elapsed()),
        });
    }

    let mut scratch = vec![0u64; tables.beta_words];
    let mut worst: Option<(i128, u32, i128, i128)> = None;
    let mut checked = 0u64;
    for mask in tables.masks() {
        checked += 1;
        let (size, beta, alpha) = tables.counts(mask, &mut scratch);
        let (lhs, rhs) = core_sides(k, q, beta, alpha, size);
        if lhs < rhs {
            let gap = rhs - lhs;
            if worst.is_none_or(|(g0, ..)| gap < g0) {
                worst = Some((gap, mask, lhs, rhs));
            }
        }
    }
    let certificate = match worst {
        Some((_, mask, lhs, rhs)) => Certificate::ViolatingSubset {
            subset: mask_to_subset(mask),
            lhs,
            rhs,
            k,
            q,
        },
        None => Certificate::Exhaustive {
            subsets_checked: checked,
        },
    };
    Ok(Verdict {
        decision: worst.is_none(),
        k,
        q,
        certificate,
        stats: stats(start.elapsed()),
    })
}

/// `k* = max_{V′} ⌈|V′| / |N^α_in(V′)|⌉ − 1` by enumeration, `Infinite` when
/// some subset has no state in-neighbor or the path condition fails.
pub fn kstar_brute(g: &Digraph) -> Result<KStarResult> {
    let tables = SubsetTables::new(g)?;
    let unreachable = unreachable_by_closure(g);
    if !unreachable.is_empty() {
        return Ok(KStarResult {
            value: KStar::Infinite,
            witness: Some(KStarWitness::Unreachable { nodes: unreachable }),
            trace: Vec::new(),
        });
    }
    let mut scratch = vec![0u64; tables.beta_words];
    let mut best: Option<(u64, u32, usize)> = None;
    for mask in tables.masks() {
        let (size, _beta, alpha) = tables.counts(mask, &mut scratch);
        if alpha == 0 {
            return Ok(KStarResult {
                value: KStar::Infinite,
                witness: Some(KStarWitness::EmptyAlphaIn {
                    subset: mask_to_subset(mask),
                }),
                trace: Vec::new(),
            });
        }
        let candidate = (size.div_ceil(alpha) - 1) as u64;
        if best.is_none_or(|(b, ..)| candidate > b) {
            best = Some((candidate, mask, alpha));
        }
    }
    let (value, mask, alpha) = best.expect("n >= 1 gives at least one nonempty subset");
    Ok(KStarResult {
        value: KStar::Finite(value),
        witness: Some(KStarWitness::Argmax {
            subset: mask_to_subset(mask),
            alpha_in: alpha,
        }),
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_state() -> SparsityPattern {
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

    fn shared_pair() -> SparsityPattern {
        SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 3), (2, 1)]).unwrap()
    }

    fn two_cycle() -> SparsityPattern {
        SparsityPattern::from_one_based(2, 1, [(1, 2), (2, 1), (1, 3)]).unwrap()
    }

    fn a(i: usize) -> Node {
        Node::State(i - 1)
    }

    fn b(j: usize) -> Node {
        Node::Control(j - 1)
    }

    #[test]
    fn five_state_digraph_edges() {
        let g = to_digraph(&five_state());
        assert_eq!(g.edge_count(), 9);
        let expected: BTreeSet<_> = [
            (b(1), a(1)),
            (b(2), a(1)),
            (b(2), a(2)),
            (a(2), a(1)),
            (a(1), a(3)),
            (a(2), a(4)),
            (a(3), a(4)),
            (a(3), a(5)),
            (a(4), a(5)),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.edges(), &expected);
    }

    #[test]
    fn shared_pair_digraph_edges() {
        let g = to_digraph(&shared_pair());
        let expected: BTreeSet<_> = [(b(1), a(1)), (b(1), a(2)), (a(1), a(2))]
            .into_iter()
            .collect();
        assert_eq!(g.edges(), &expected);
        assert_eq!(
            to_digraph(&SparsityPattern::empty(3, 1).unwrap()).edge_count(),
            0
        );
    }

    #[test]
    fn digraph_rejects_bad_edges() {
        assert!(Digraph::new(2, 1, [(a(1), b(1))]).is_err());
        assert!(Digraph::new(2, 1, [(a(3), a(1))]).is_err());
        assert!(Digraph::new(2, 1, [(b(2), a(1))]).is_err());
    }

    #[test]
    fn neighbor_sets_examples() {
        let g = to_digraph(&shared_pair());
        let s = in_neighbor_sets(&g, &[1]).unwrap();
        assert_eq!(s.alpha_in, BTreeSet::from([0]));
        assert_eq!(s.beta_in, BTreeSet::from([0]));
        assert_eq!(in_neighbor_sets(&g, &[]).unwrap(), NeighborSets::default());
        assert!(in_neighbor_sets(&g, &[2]).is_err());

        let g = to_digraph(&five_state());
        let s = in_neighbor_sets(&g, &[4]).unwrap();
        assert_eq!(s.alpha_in, BTreeSet::from([2, 3]));
        assert!(s.beta_in.is_empty());
    }

    #[test]
    fn reachability_examples() {
        assert!(reachability_check(&to_digraph(&five_state())).is_empty());
        assert!(reachability_check(&to_digraph(&shared_pair())).is_empty());
        let no_inputs = SparsityPattern::new(3, 0, [(1, 0), (2, 1)]).unwrap();
        assert_eq!(
            reachability_check(&to_digraph(&no_inputs)),
            BTreeSet::from([0, 1, 2])
        );
        // isolated cycle not fed by the input
        let p = SparsityPattern::from_one_based(3, 1, [(1, 4), (2, 3), (3, 2)]).unwrap();
        assert_eq!(reachability_check(&to_digraph(&p)), BTreeSet::from([1, 2]));
        assert_eq!(unreachable_by_closure(&to_digraph(&p)), vec![1, 2]);
    }

    #[test]
    fn core_condition_examples() {
        let g = to_digraph(&shared_pair());
        let c = core_condition_holds(&g, 1, 3, &[0]).unwrap();
        assert_eq!((c.holds, c.lhs, c.rhs), (false, 2, 3));
        let c = core_condition_holds(&g, 0, 5, &[1]).unwrap();
        assert_eq!((c.holds, c.lhs, c.rhs), (true, 6, 5));
        let c = core_condition_holds(&g, 7, 9, &[]).unwrap();
        assert_eq!((c.holds, c.lhs, c.rhs), (true, 0, 0));
    }

    #[test]
    fn core_condition_guards() {
        let g = to_digraph(&shared_pair());
        assert!(matches!(
            core_condition_holds(&g, 0, 0, &[0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            core_condition_holds(&g, MAX_MULTIPLIER, 1, &[0]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            core_condition_holds(&g, 0, MAX_MULTIPLIER + 1, &[0]),
            Err(Error::Range(_))
        ));
        // the largest admissible multipliers do not overflow
        let c = core_condition_holds(&g, MAX_MULTIPLIER - 1, MAX_MULTIPLIER, &[0, 1]).unwrap();
        assert_eq!(c.lhs, (1i128 << 31) + (1i128 << 62));
    }

    #[test]
    fn brute_force_shared_pair() {
        let g = to_digraph(&shared_pair());
        let v = brute_force_check(&g, 1, 3).unwrap();
        assert!(!v.decision);
        assert_eq!(
            v.certificate,
            Certificate::ViolatingSubset {
                subset: vec![0],
                lhs: 2,
                rhs: 3,
                k: 1,
                q: 3
            }
        );
        assert!(brute_force_check(&g, 2, 3).unwrap().decision);
        assert!(brute_force_check(&g, 0, 1).unwrap().decision);
    }

    #[test]
    fn brute_force_prefers_smallest_gap() {
        // a1, a2, a3 fed only by b1; no state edges into a2, a3; a1 <- a2.
        let p = SparsityPattern::from_one_based(3, 1, [(1, 4), (2, 4), (3, 4), (1, 2)]).unwrap();
        let g = to_digraph(&p);
        let v = brute_force_check(&g, 0, 3).unwrap();
        // {a2}: 1 vs 3 (gap 2); {a2,a3}: 1 vs 6 (gap 5); {a3}: gap 2 -> smallest mask {a2}
        match v.certificate {
            Certificate::ViolatingSubset {
                subset, lhs, rhs, ..
            } => {
                assert_eq!(subset, vec![1]);
                assert_eq!((lhs, rhs), (1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn brute_force_unreachable_wins() {
        let p = SparsityPattern::from_one_based(2, 1, [(1, 3)]).unwrap();
        let v = brute_force_check(&to_digraph(&p), 0, 1).unwrap();
        assert_eq!(v.certificate, Certificate::Unreachable { nodes: vec![1] });
    }

    #[test]
    fn brute_force_capacity_guard() {
        let p = SparsityPattern::empty(BRUTE_FORCE_LIMIT + 1, 1).unwrap();
        let g = to_digraph(&p);
        assert!(matches!(
            brute_force_check(&g, 0, 1),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(kstar_brute(&g), Err(Error::Capacity { .. })));
    }

    #[test]
    fn kstar_brute_examples() {
        let r = kstar_brute(&to_digraph(&two_cycle())).unwrap();
        assert_eq!(r.value, KStar::Finite(0));

        let r = kstar_brute(&to_digraph(&shared_pair())).unwrap();
        assert_eq!(r.value, KStar::Infinite);
        assert_eq!(
            r.witness,
            Some(KStarWitness::EmptyAlphaIn { subset: vec![0] })
        );

        let r = kstar_brute(&to_digraph(&five_state())).unwrap();
        assert_eq!(r.value, KStar::Infinite);
        assert_eq!(
            r.witness,
            Some(KStarWitness::EmptyAlphaIn { subset: vec![1] })
        );
    }

    #[test]
    fn kstar_brute_chain_into_self_loop() {
        // a1 has a self-loop and feeds a2..a4: V' = {a1..a4}, N^α = {a1} -> k* = 3
        let p = SparsityPattern::from_one_based(4, 1, [(1, 5), (1, 1), (2, 1), (3, 1), (4, 1)])
            .unwrap();
        let r = kstar_brute(&to_digraph(&p)).unwrap();
        assert_eq!(r.value, KStar::Finite(3));
        assert_eq!(
            r.witness,
            Some(KStarWitness::Argmax {
                subset: vec![0, 1, 2, 3],
                alpha_in: 1
            })
        );
    }

    #[test]
    fn dot_export_is_stable() {
        let dot = to_digraph(&shared_pair()).to_dot();
        assert_eq!(
            dot,
            "digraph G {\n  a1 [shape=circle];\n  a2 [shape=circle];\n  b1 [shape=square];\n  a1 -> a2;\n  b1 -> a1;\n  b1 -> a2;\n}\n"
        );
    }
}
