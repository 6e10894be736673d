//! Numerical referee: sample concrete matrices in a pattern and test
//! controllability of the switched ensemble by exact rank computation.

use std::fmt;

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::decide::check_structural;
use crate::error::{Error, Result};
use crate::linalg::{bareiss_rank, clear_denominators, RationalMatrix, Subspace};
use crate::pattern::{sample_instance, EnsembleInstance, SparsityPattern, DEFAULT_VALUE_BOUND};

/// Largest ensemble state dimension `q·n` the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 64;

/// Default number of random instances per cell.
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Span of the columns of `A[ℓ]^d B[ℓ]` over all segments ℓ and powers d.
    PowerSpan,
    /// Dimension of `V_k` with `V_0 = reach(A[0], im B[0])` and
    /// `V_{ℓ+1} = reach(A[ℓ+1], im B[ℓ+1] + V_ℓ)`.
    SequentialSubspace,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::PowerSpan => "paper_lemma1",
            Criterion::SequentialSubspace => "sequential_subspace",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    pub full_dim: usize,
    pub controllable: bool,
    pub criterion: Criterion,
    pub d_range_used: (usize, usize),
}

impl RankReport {
    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "full_dim": self.full_dim,
            "controllable": self.controllable,
            "criterion": self.criterion.to_string(),
            "d_range_used": [self.d_range_used.0, self.d_range_used.1],
        })
    }
}

fn check_dim(n: usize, q: usize) -> Result<usize> {
    match n.checked_mul(q) {
        Some(dim) if dim <= MAX_ORACLE_DIM => Ok(dim),
        _ => Err(Error::Size(format!(
            "ensemble dimension q*n = {q}*{n} exceeds {MAX_ORACLE_DIM}"
        ))),
    }
}

/// Confirms that the assembled matrices are block-diagonal / block-stacked
/// copies of the stored per-member blocks.
fn check_block_structure(
    inst: &EnsembleInstance,
    l: usize,
    a: &RationalMatrix,
    b: &RationalMatrix,
) -> Result<()> {
    let n = inst.n();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let expected = if r / n == c / n {
                inst.block(r / n, l).0.get(r % n, c % n).clone()
            } else {
                BigRational::default()
            };
            if *a.get(r, c) != expected {
                return Err(Error::Internal(format!(
                    "assembled A[{l}] entry ({}, {}) breaks the block-diagonal structure",
                    r + 1,
                    c + 1
                )));
            }
        }
        for c in 0..b.cols() {
            if b.get(r, c) != inst.block(r / n, l).1.get(r % n, c) {
                return Err(Error::Internal(format!(
                    "assembled B[{l}] entry ({}, {}) breaks the stacked structure",
                    r + 1,
                    c + 1
                )));
            }
        }
    }
    Ok(())
}

/// Exact rank of the controllability span of `instance` under `criterion`.
/// With `include_d0` the power-span range is `0..=qn`, otherwise `1..=qn`.
pub fn controllability_rank(
    inst: &EnsembleInstance,
    criterion: Criterion,
    include_d0: bool,
) -> Result<RankReport> {
    let dim = check_dim(inst.n(), inst.q())?;
    let segments = inst.k() + 1;
    let mut assembled = Vec::with_capacity(segments);
    for l in 0..segments {
        let (a, b) = (inst.assembled_a(l), inst.assembled_b(l));
        check_block_structure(inst, l, &a, &b)?;
        assembled.push((a, b));
    }

    let (rank, d_range_used) = match criterion {
        Criterion::PowerSpan => {
            let d_min = usize::from(!include_d0);
            let mut columns = Vec::new();
            for (a, b) in &assembled {
                let mut power = b.clone();
                for d in 0..=dim {
                    if d >= d_min {
                        columns.extend(
                            (0..power.cols()).map(|c| clear_denominators(&power.column(c))),
                        );
                    }
                    if d < dim {
                        power = a.mul(&power);
                    }
                }
            }
            (bareiss_rank(&columns, dim), (d_min, dim))
        }
        Criterion::SequentialSubspace => {
            let mut v = Subspace::new(dim);
            for (a, b) in &assembled {
                for c in 0..b.cols() {
                    v.insert(&b.column(c));
                }
                let (closed, sweeps) = v.invariant_closure(a);
                if sweeps > dim + 1 {
                    return Err(Error::Internal(format!(
                        "invariant closure took {sweeps} sweeps in dimension {dim}"
                    )));
                }
                v = closed;
            }
            (v.dim(), (0, dim))
        }
    };
    Ok(RankReport {
        rank,
        full_dim: dim,
        controllable: rank == dim,
        criterion,
        d_range_used,
    })
}

/// Seed of trial `t`: a SplitMix64 step over `seed` and `t`, so trials are
/// independent of evaluation order.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    let mut z = seed ^ t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial outcome under both criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub span: bool,
    pub sequential: bool,
}

/// Run `trials` random instances with trial indices `first..first+trials`.
pub fn sample_trials(
    pattern: &SparsityPattern,
    k: usize,
    q: usize,
    first: u64,
    trials: usize,
    seed: u64,
    value_bound: u64,
) -> Result<Vec<TrialOutcome>> {
    check_dim(pattern.n(), q)?;
    (first..first + trials as u64)
        .map(|t| {
            let inst = sample_instance(pattern, k, q, trial_seed(seed, t), value_bound)?;
            Ok(TrialOutcome {
                span: controllability_rank(&inst, Criterion::PowerSpan, true)?.controllable,
                sequential: controllability_rank(&inst, Criterion::SequentialSubspace, true)?
                    .controllable,
            })
        })
        .collect()
}

/// Existential test: true iff some sampled instance is controllable under
/// the default criterion. Returns the number of controllable samples too.
pub fn monte_carlo_controllable(
    pattern: &SparsityPattern,
    k: usize,
    q: usize,
    trials: usize,
    seed: u64,
    value_bound: u64,
) -> Result<(bool, usize)> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    check_dim(pattern.n(), q)?;
    let mut successes = 0;
    for t in 0..trials as u64 {
        let inst = sample_instance(pattern, k, q, trial_seed(seed, t), value_bound)?;
        if controllability_rank(&inst, Criterion::PowerSpan, true)?.controllable {
            successes += 1;
        }
    }
    Ok((successes > 0, successes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementCell {
    pub pattern: String,
    pub k: usize,
    pub q: usize,
    pub structural: bool,
    pub numerical: bool,
    /// Controllable samples under the default criterion, over all rounds.
    pub successes: usize,
    pub trials: usize,
    pub sequential_successes: usize,
    /// Largest value bound used (raised on a persistent genericity miss).
    pub value_bound: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgreementReport {
    pub cells: Vec<AgreementCell>,
    /// Structurally uncontrollable cells with a controllable sample.
    pub hard_disagreements: Vec<String>,
    /// Structurally controllable cells that needed extra trials.
    pub genericity_misses: Vec<String>,
    /// Misses that survived 4× trials and a 10× value bound.
    pub persistent_misses: Vec<String>,
    /// Samples on which the two criteria disagree.
    pub criterion_divergences: Vec<String>,
}

impl AgreementReport {
    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                json!({
                    "pattern": c.pattern,
                    "k": c.k,
                    "q": c.q,
                    "structural": c.structural,
                    "numerical": c.numerical,
                    "successes": c.successes,
                    "trials": c.trials,
                    "sequential_successes": c.sequential_successes,
                    "value_bound": c.value_bound,
                    "criterion": Criterion::PowerSpan.to_string(),
                })
            })
            .collect();
        json!({
            "cells": cells,
            "hard_disagreements": self.hard_disagreements,
            "genericity_misses": self.genericity_misses,
            "persistent_misses": self.persistent_misses,
            "criterion_divergences": self.criterion_divergences,
        })
    }

    /// One row per cell.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record([
            "pattern",
            "k",
            "q",
            "structural",
            "numerical",
            "successes",
            "trials",
            "sequential_successes",
            "value_bound",
        ])
        .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                c.pattern.clone(),
                c.k.to_string(),
                c.q.to_string(),
                c.structural.to_string(),
                c.numerical.to_string(),
                c.successes.to_string(),
                c.trials.to_string(),
                c.sequential_successes.to_string(),
                c.value_bound.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Internal(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(format!("csv: {e}")))
    }
}

/// Compare structural verdicts with sampled ranks over
/// `k ∈ 0..=k_max`, `q ∈ 1..=q_max` for every named pattern.
pub fn oracle_agreement(
    corpus: &[(String, SparsityPattern)],
    k_max: usize,
    q_max: usize,
    trials: usize,
    seed: u64,
) -> Result<AgreementReport> {
    oracle_agreement_with_bound(corpus, k_max, q_max, trials, seed, DEFAULT_VALUE_BOUND)
}

pub fn oracle_agreement_with_bound(
    corpus: &[(String, SparsityPattern)],
    k_max: usize,
    q_max: usize,
    trials: usize,
    seed: u64,
    value_bound: u64,
) -> Result<AgreementReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let mut report = AgreementReport::default();
    for (name, pattern) in corpus {
        check_dim(pattern.n(), q_max.max(1))?;
        for k in 0..=k_max {
            for q in 1..=q_max {
                let structural = check_structural(pattern, k as u64, q as u64)?.decision;
                let cell_seed = trial_seed(seed, ((k as u64) << 32) | q as u64);
                let mut outcomes = sample_trials(pattern, k, q, 0, trials, cell_seed, value_bound)?;
                let mut bound = value_bound;
                let count = |o: &[TrialOutcome]| o.iter().filter(|t| t.span).count();
                if structural && count(&outcomes) == 0 {
                    report.genericity_misses.push(format!(
                        "{name} k={k} q={q}: no controllable sample in {trials} trials; retrying with {}",
                        4 * trials
                    ));
                    outcomes = sample_trials(pattern, k, q, 0, 4 * trials, cell_seed, bound)?;
                    if count(&outcomes) == 0 {
                        bound = value_bound.saturating_mul(10);
                        outcomes = sample_trials(pattern, k, q, 0, 4 * trials, cell_seed, bound)?;
                        if count(&outcomes) == 0 {
                            report.persistent_misses.push(format!(
                                "{name} k={k} q={q}: no controllable sample in {} trials at value bound {bound}",
                                4 * trials
                            ));
                        }
                    }
                }
                let successes = count(&outcomes);
                if !structural && successes > 0 {
                    report.hard_disagreements.push(format!(
                        "{name} k={k} q={q}: structurally uncontrollable but {successes} sample(s) have full rank"
                    ));
                }
                for (t, o) in outcomes.iter().enumerate() {
                    if o.span != o.sequential {
                        report.criterion_divergences.push(format!(
                            "{name} k={k} q={q} trial {t}: paper_lemma1={} sequential_subspace={}",
                            o.span, o.sequential
                        ));
                    }
                }
                report.cells.push(AgreementCell {
                    pattern: name.clone(),
                    k,
                    q,
                    structural,
                    numerical: successes > 0,
                    successes,
                    trials: outcomes.len(),
                    sequential_successes: outcomes.iter().filter(|t| t.sequential).count(),
                    value_bound: bound,
                });
            }
        }
    }
    Ok(report)
}
