//! Decision procedures: the flow-based controllability test for a given
//! `(k, q)`, the binary search for `k*`, certificate extraction from minimum
//! cuts, and a grid cross-check against the enumeration oracles.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::{
    build_lifted_network, build_small_network, max_flow, max_flow_integral, min_cut, FlowNetwork,
};
use crate::graph::{
    brute_force_check, check_multipliers, core_condition_holds, core_sides, kstar_brute,
    reachability_check, to_digraph, Digraph, BRUTE_FORCE_LIMIT,
};
use crate::pattern::SparsityPattern;

/// Largest state dimension accepted by [`crosscheck`].
pub const CROSSCHECK_LIMIT: usize = 10;

/// Machine-checkable reason for a verdict. Node indices are 0-based here and
/// 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// State nodes with no path from any control node.
    Unreachable { nodes: Vec<usize> },
    /// A subset on which the counting condition fails: `lhs < rhs`.
    ViolatingSubset {
        subset: Vec<usize>,
        lhs: i128,
        rhs: i128,
        k: u64,
        q: u64,
    },
    /// A maximum flow of value `n·q`.
    Saturated { value: i64 },
    /// Every nonempty subset was enumerated and satisfied the condition.
    Exhaustive { subsets_checked: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictStats {
    /// Max-flow value of the small network, when one was solved.
    pub theta: Option<i64>,
    /// `n·q`.
    pub target: i128,
    pub network_nodes: usize,
    pub network_arcs: usize,
    pub elapsed: Duration,
    /// Set when the cut-derived subset failed re-verification and the
    /// certificate came from enumeration instead.
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub decision: bool,
    pub k: u64,
    pub q: u64,
    pub certificate: Certificate,
    pub stats: VerdictStats,
}

pub(crate) fn int_json(v: i128) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => Value::String(v.to_string()),
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Unreachable { nodes } => {
                json!({ "type": "unreachable", "nodes": one_based(nodes) })
            }
            Certificate::ViolatingSubset {
                subset,
                lhs,
                rhs,
                k,
                q,
            } => json!({
                "type": "violating_subset",
                "subset": one_based(subset),
                "lhs": int_json(*lhs),
                "rhs": int_json(*rhs),
                "k": k,
                "q": q,
            }),
            Certificate::Saturated { value } => json!({ "type": "saturated", "value": value }),
            Certificate::Exhaustive { subsets_checked } => {
                json!({ "type": "exhaustive", "subsets_checked": subsets_checked })
            }
        }
    }
}

impl Verdict {
    /// JSON form. Wall-clock time is only included on request so that
    /// repeated runs produce identical output.
    pub fn to_json(&self, include_timing: bool) -> Value {
        let mut stats = json!({
            "network_nodes": self.stats.network_nodes,
            "network_arcs": self.stats.network_arcs,
            "fallback_used": self.stats.fallback_used,
        });
        if include_timing {
            stats["elapsed_ms"] = json!(self.stats.elapsed.as_secs_f64() * 1e3);
        }
        json!({
            "decision": self.decision,
            "k": self.k,
            "q": self.q,
            "theta": self.stats.theta,
            "target": int_json(self.stats.target),
            "certificate": self.certificate.to_json(),
            "stats": stats,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum KStar {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KStarWitness {
    /// A subset with no state in-neighbor.
    EmptyAlphaIn {
        subset: Vec<usize>,
    },
    Unreachable {
        nodes: Vec<usize>,
    },
    /// A subset attaining the maximum `⌈|V′| / |N^α_in(V′)|⌉ − 1`.
    Argmax {
        subset: Vec<usize>,
        alpha_in: usize,
    },
}

/// One max-flow evaluation of the binary search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KStarProbe {
    pub k: u64,
    pub theta: i64,
    pub target: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KStarResult {
    pub value: KStar,
    pub witness: Option<KStarWitness>,
    pub trace: Vec<KStarProbe>,
}

impl KStarWitness {
    pub fn to_json(&self) -> Value {
        match self {
            KStarWitness::EmptyAlphaIn { subset } => {
                json!({ "type": "empty_alpha_in", "subset": one_based(subset) })
            }
            KStarWitness::Unreachable { nodes } => {
                json!({ "type": "unreachable", "nodes": one_based(nodes) })
            }
            KStarWitness::Argmax { subset, alpha_in } => {
                json!({ "type": "argmax", "subset": one_based(subset), "alpha_in": alpha_in })
            }
        }
    }
}

impl KStarResult {
    pub fn to_json(&self) -> Value {
        let kstar = match self.value {
            KStar::Finite(v) => json!(v),
            KStar::Infinite => json!("infinite"),
        };
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|p| json!({ "k": p.k, "theta": p.theta, "target": p.target }))
            .collect();
        json!({
            "kstar": kstar,
            "witness": self.witness.as_ref().map_or(Value::Null, KStarWitness::to_json),
            "trace": trace,
        })
    }
}

/// `V′ = {α_j : μ_j ∉ cut}` for a source side `cut` of the small network
/// built from `g` (any mode). The right layer `μ_1..μ_n` occupies node ids
/// `1 + m + n ..= m + 2n`.
pub fn witness_from_cut(g: &Digraph, cut: &BTreeSet<usize>) -> Vec<usize> {
    let offset = 1 + g.n_control() + g.n_state();
    (0..g.n_state())
        .filter(|j| !cut.contains(&(offset + j)))
        .collect()
}

/// Flow value of the small network; used by the binary search and by tests.
pub fn theta(g: &Digraph, k: u64, q: u64) -> Result<i64> {
    check_multipliers(k, q)?;
    let net = build_small_network(g, k, q, false)?;
    Ok(max_flow_integral(&net).1)
}

/// Flow value of the lifted unit-capacity network.
pub fn theta_lifted(g: &Digraph, k: u64, q: u64) -> Result<i64> {
    check_multipliers(k, q)?;
    let net = build_lifted_network(g, k, q)?;
    Ok(max_flow_integral(&net).1)
}

fn violation_certificate(
    g: &Digraph,
    k: u64,
    q: u64,
    witness_net: &FlowNetwork,
) -> Result<(Certificate, bool)> {
    let flow = max_flow(witness_net);
    let cut = min_cut(witness_net, &flow)?;
    let subset = witness_from_cut(g, &cut);
    let check = core_condition_holds(g, k, q, &subset)?;
    if !check.holds {
        return Ok((
            Certificate::ViolatingSubset {
                subset,
                lhs: check.lhs,
                rhs: check.rhs,
                k,
                q,
            },
            false,
        ));
    }
    if g.n_state() > BRUTE_FORCE_LIMIT {
        return Err(Error::CertificateUnavailable(format!(
            "decision is false but the cut-derived subset {:?} does not violate the counting condition",
            one_based(&subset)
        )));
    }
    let verdict = brute_force_check(g, k, q)?;
    match verdict.certificate {
        c @ Certificate::ViolatingSubset { .. } => Ok((c, true)),
        other => Err(Error::Internal(format!(
            "flow value below n*q but enumeration found no violation ({other:?})"
        ))),
    }
}

/// Decide structural controllability for `(k, q)`: reachability first, then
/// `θ(k, q) = n·q` on the small network. A false verdict carries either the
/// unreachable nodes or a violating subset read off a minimum cut.
pub fn check_structural(pattern: &SparsityPattern, k: u64, q: u64) -> Result<Verdict> {
    check_graph(&to_digraph(pattern), k, q)
}

/// [`check_structural`] on an already-built digraph.
pub fn check_graph(g: &Digraph, k: u64, q: u64) -> Result<Verdict> {
    let start = Instant::now();
    check_multipliers(k, q)?;
    let n = g.n_state();
    let target = n as i128 * q as i128;

    let unreachable = reachability_check(g);
    if !unreachable.is_empty() {
        return Ok(Verdict {
            decision: false,
            k,
            q,
            certificate: Certificate::Unreachable {
                nodes: unreachable.into_iter().collect(),
            },
            stats: VerdictStats {
                theta: None,
                target,
                network_nodes: 0,
                network_arcs: 0,
                elapsed: start.elapsed(),
                fallback_used: false,
            },
        });
    }

    let net = build_small_network(g, k, q, false)?;
    let (_, value) = max_flow_integral(&net);
    let (certificate, fallback_used) = if value as i128 == target {
        (Certificate::Saturated { value }, false)
    } else {
        let witness_net = build_small_network(g, k, q, true)?;
        violation_certificate(g, k, q, &witness_net)?
    };
    Ok(Verdict {
        decision: value as i128 == target,
        k,
        q,
        certificate,
        stats: VerdictStats {
            theta: Some(value),
            target,
            network_nodes: net.node_count(),
            network_arcs: net.arc_count(),
            elapsed: start.elapsed(),
            fallback_used,
        },
    })
}

/// Least `k` such that the pattern is structurally controllable for every
/// ensemble size. After the reachability check, `θ(n−1, mn+1)` decides
/// finiteness; a binary search over `0..=n−1` then finds the least `k` with
/// `θ(k, mn+1) = n(mn+1)`. The search starts at 0 because `k* = 0` occurs.
pub fn compute_kstar(pattern: &SparsityPattern) -> Result<KStarResult> {
    kstar_graph(&to_digraph(pattern))
}

/// [`compute_kstar`] on an already-built digraph.
pub fn kstar_graph(g: &Digraph) -> Result<KStarResult> {
    let (n, m) = (g.n_state(), g.n_control());
    let unreachable = reachability_check(g);
    if !unreachable.is_empty() {
        return Ok(KStarResult {
            value: KStar::Infinite,
            witness: Some(KStarWitness::Unreachable {
                nodes: unreachable.into_iter().collect(),
            }),
            trace: Vec::new(),
        });
    }
    let q_wide = m as u128 * n as u128 + 1;
    let q = u64::try_from(q_wide)
        .map_err(|_| Error::Range(format!("ensemble size mn+1 = {q_wide} is too large")))?;
    let k_max = n as u64 - 1;
    check_multipliers(k_max, q)?;
    let target_wide = n as i128 * q as i128;
    let target = i64::try_from(target_wide).map_err(|_| {
        Error::Range(format!(
            "target n(mn+1) = {target_wide} does not fit in 64 bits"
        ))
    })?;

    let mut trace = Vec::new();
    let mut probe = |k: u64| -> Result<bool> {
        let value = theta(g, k, q)?;
        trace.push(KStarProbe {
            k,
            theta: value,
            target,
        });
        Ok(value == target)
    };

    if !probe(k_max)? {
        // At k = n−1 and q = mn+1 a violation forces N^α_in(V′) = ∅, so every
        // node of the cut-derived subset lacks a state in-neighbor.
        let witness_net = build_small_network(g, k_max, q, true)?;
        let cut = min_cut(&witness_net, &max_flow(&witness_net))?;
        let subset = witness_from_cut(g, &cut);
        if subset.is_empty() || subset.iter().any(|&v| !g.state_in(v).is_empty()) {
            return Err(Error::Internal(format!(
                "cut-derived subset {:?} has a state in-neighbor",
                one_based(&subset)
            )));
        }
        let first = (0..n)
            .find(|&v| g.state_in(v).is_empty())
            .expect("the cut subset is nonempty");
        return Ok(KStarResult {
            value: KStar::Infinite,
            witness: Some(KStarWitness::EmptyAlphaIn {
                subset: vec![first],
            }),
            trace,
        });
    }

    let (mut lo, mut hi) = (0u64, k_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(KStarResult {
        value: KStar::Finite(lo),
        witness: None,
        trace,
    })
}

/// Re-check a verdict's certificate from the pattern's stars alone, with
/// integer arithmetic and no flow computation.
pub fn verify_certificate(pattern: &SparsityPattern, verdict: &Verdict) -> bool {
    let n = pattern.n();
    let mut reached = vec![false; n];
    loop {
        let mut changed = false;
        for &(i, j) in pattern.stars() {
            let src = j >= n || reached[j];
            if src && !reached[i] {
                reached[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let reachable_all = reached.iter().all(|&r| r);
    match &verdict.certificate {
        Certificate::Unreachable { nodes } => {
            !verdict.decision && !nodes.is_empty() && nodes.iter().all(|&v| v < n && !reached[v])
        }
        Certificate::ViolatingSubset {
            subset,
            lhs,
            rhs,
            k,
            q,
        } => {
            if verdict.decision
                || (*k, *q) != (verdict.k, verdict.q)
                || subset.iter().any(|&v| v >= n)
            {
                return false;
            }
            let members: BTreeSet<usize> = subset.iter().copied().collect();
            let mut alpha = BTreeSet::new();
            let mut beta = BTreeSet::new();
            for &(i, j) in pattern.stars() {
                if members.contains(&i) {
                    if j < n {
                        alpha.insert(j);
                    } else {
                        beta.insert(j - n);
                    }
                }
            }
            let (l, r) = core_sides(*k, *q, beta.len(), alpha.len(), members.len());
            (l, r) == (*lhs, *rhs) && l < r
        }
        Certificate::Saturated { value } => {
            verdict.decision && reachable_all && *value as i128 == n as i128 * verdict.q as i128
        }
        Certificate::Exhaustive { subsets_checked } => {
            verdict.decision && reachable_all && n < 64 && *subsets_checked == (1u64 << n) - 1
        }
    }
}

/// One `(k, q)` cell of a cross-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckCell {
    pub k: u64,
    pub q: u64,
    pub flow_decision: bool,
    pub brute_decision: bool,
    pub theta: Option<i64>,
    /// `None` when the lifted network exceeds its size guard.
    pub theta_lifted: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub cells: Vec<CrosscheckCell>,
    pub kstar_flow: KStar,
    pub kstar_brute: KStar,
    pub disagreements: Vec<String>,
}

impl CrosscheckReport {
    pub fn to_json(&self) -> Value {
        let kstar = |v: KStar| match v {
            KStar::Finite(x) => json!(x),
            KStar::Infinite => json!("infinite"),
        };
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                json!({
                    "k": c.k,
                    "q": c.q,
                    "flow": c.flow_decision,
                    "brute": c.brute_decision,
                    "theta": c.theta,
                    "theta_lifted": c.theta_lifted,
                })
            })
            .collect();
        json!({
            "cells": cells,
            "kstar_flow": kstar(self.kstar_flow),
            "kstar_brute": kstar(self.kstar_brute),
            "disagreements": self.disagreements,
        })
    }
}

/// Compare the flow-based procedures against the enumeration oracles over
/// `k ∈ 0..=k_max`, `q ∈ 1..=q_max`, plus `k*` against its brute-force twin.
pub fn crosscheck(pattern: &SparsityPattern, k_max: u64, q_max: u64) -> Result<CrosscheckReport> {
    let n = pattern.n();
    if n > CROSSCHECK_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: CROSSCHECK_LIMIT,
        });
    }
    let g = to_digraph(pattern);
    let mut cells = Vec::new();
    let mut disagreements = Vec::new();
    for k in 0..=k_max {
        for q in 1..=q_max {
            let flow = check_graph(&g, k, q)?;
            let brute = brute_force_check(&g, k, q)?;
            let theta = theta(&g, k, q)?;
            let theta_lifted = match theta_lifted(&g, k, q) {
                Ok(v) => Some(v),
                Err(Error::Size(_)) => None,
                Err(e) => return Err(e),
            };
            if flow.decision != brute.decision {
                disagreements.push(format!(
                    "k={k} q={q}: flow decision {} vs enumeration {}",
                    flow.decision, brute.decision
                ));
            }
            if flow.decision != (theta as i128 == n as i128 * q as i128)
                && flow.stats.theta.is_some()
            {
                disagreements.push(format!(
                    "k={k} q={q}: decision inconsistent with theta {theta}"
                ));
            }
            if let Some(t) = theta_lifted {
                if t != theta {
                    disagreements.push(format!("k={k} q={q}: theta {theta} vs lifted theta {t}"));
                }
            }
            if !flow.decision && !verify_certificate(pattern, &flow) {
                disagreements.push(format!("k={k} q={q}: certificate failed re-verification"));
            }
            cells.push(CrosscheckCell {
                k,
                q,
                flow_decision: flow.decision,
                brute_decision: brute.decision,
                theta: Some(theta),
                theta_lifted,
            });
        }
    }
    let kstar_flow = kstar_graph(&g)?.value;
    let kstar_enum = kstar_brute(&g)?.value;
    if kstar_flow != kstar_enum {
        disagreements.push(format!(
            "k*: flow {kstar_flow:?} vs enumeration {kstar_enum:?}"
        ));
    }
    Ok(CrosscheckReport {
        cells,
        kstar_flow,
        kstar_brute: kstar_enum,
        disagreements,
    })
}
