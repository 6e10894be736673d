use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::SparsityPattern;
use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;

/// Default upper end of the uniform draw for ⋆-entries.
pub const DEFAULT_VALUE_BOUND: u64 = 10007;

/// Upper bound on `(k+1) · q · n · (n+m)` sampled entries.
const MAX_SAMPLED_ENTRIES: u128 = 1 << 24;

/// Concrete matrices `(A_p[ℓ], B_p[ℓ])` for every ensemble member `p` and
/// segment `ℓ`, all conforming to one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleInstance {
    n: usize,
    m: usize,
    k: usize,
    q: usize,
    /// Indexed `[p][ℓ]`.
    blocks: Vec<Vec<(RationalMatrix, RationalMatrix)>>,
}

impl EnsembleInstance {
    /// Assemble an instance from explicit blocks indexed `[p][ℓ]`.
    pub fn from_blocks(
        n: usize,
        m: usize,
        blocks: Vec<Vec<(RationalMatrix, RationalMatrix)>>,
    ) -> Result<Self> {
        let q = blocks.len();
        if q == 0 || blocks[0].is_empty() {
            return Err(Error::Domain(
                "an instance needs q >= 1 members and at least one segment".into(),
            ));
        }
        let segments = blocks[0].len();
        for (p, member) in blocks.iter().enumerate() {
            if member.len() != segments {
                return Err(Error::Domain(format!(
                    "member {} has {} segments, expected {segments}",
                    p + 1,
                    member.len()
                )));
            }
            for (l, (a, b)) in member.iter().enumerate() {
                if (a.rows(), a.cols(), b.rows(), b.cols()) != (n, n, n, m) {
                    return Err(Error::Domain(format!(
                        "block (p={}, l={}) has shape A {}x{}, B {}x{}; expected A {n}x{n}, B {n}x{m}",
                        p + 1,
                        l,
                        a.rows(),
                        a.cols(),
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(Self {
            n,
            m,
            k: segments - 1,
            q,
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of switches; there are `k + 1` segments.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `(A_p[ℓ], B_p[ℓ])` with 0-based `p`.
    pub fn block(&self, p: usize, l: usize) -> &(RationalMatrix, RationalMatrix) {
        &self.blocks[p][l]
    }

    /// Block-diagonal `A[ℓ] = diag(A_1[ℓ], …, A_q[ℓ])`.
    pub fn assembled_a(&self, l: usize) -> RationalMatrix {
        let dim = self.n * self.q;
        let mut out = RationalMatrix::zeros(dim, dim);
        for p in 0..self.q {
            out.place(p * self.n, p * self.n, &self.blocks[p][l].0);
        }
        out
    }

    /// Stacked `B[ℓ] = [B_1[ℓ]; …; B_q[ℓ]]`.
    pub fn assembled_b(&self, l: usize) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.n * self.q, self.m);
        for p in 0..self.q {
            out.place(p * self.n, 0, &self.blocks[p][l].1);
        }
        out
    }

    /// True iff every nonzero entry of every `[A_p[ℓ] B_p[ℓ]]` sits on a star.
    pub fn conforms_to(&self, pattern: &SparsityPattern) -> bool {
        if pattern.n() != self.n || pattern.m() != self.m {
            return false;
        }
        self.blocks.iter().flatten().all(|(a, b)| {
            a.support().into_iter().all(|(i, j)| pattern.is_star(i, j))
                && b.support()
                    .into_iter()
                    .all(|(i, j)| pattern.is_star(i, self.n + j))
        })
    }

    /// Debug export; rationals are written as `"p/q"` strings.
    pub fn to_json(&self) -> Value {
        let mat = |m: &RationalMatrix| -> Value {
            Value::Array(
                (0..m.rows())
                    .map(|r| {
                        Value::Array(
                            (0..m.cols())
                                .map(|c| {
                                    let x = m.get(r, c);
                                    Value::String(format!("{}/{}", x.numer(), x.denom()))
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            )
        };
        let blocks: Vec<Value> =
            self.blocks
                .iter()
                .enumerate()
                .flat_map(|(p, member)| {
                    member.iter().enumerate().map(
                        move |(l, (a, b))| json!({ "p": p + 1, "l": l, "A": mat(a), "B": mat(b) }),
                    )
                })
                .collect();
        json!({ "n": self.n, "m": self.m, "k": self.k, "q": self.q, "blocks": blocks })
    }
}

/// Draw every ⋆-entry of every block uniformly from `{1, …, value_bound}`;
/// 0-entries stay exactly zero.
pub fn sample_instance(
    pattern: &SparsityPattern,
    k: usize,
    q: usize,
    seed: u64,
    value_bound: u64,
) -> Result<EnsembleInstance> {
    if q == 0 {
        return Err(Error::Domain("ensemble size q must be at least 1".into()));
    }
    if value_bound < 2 {
        return Err(Error::Domain(format!(
            "value_bound must be >= 2, got {value_bound}"
        )));
    }
    let (n, m) = (pattern.n(), pattern.m());
    let entries = (k as u128 + 1) * q as u128 * n as u128 * (n + m) as u128;
    if entries > MAX_SAMPLED_ENTRIES {
        return Err(Error::Size(format!(
            "instance would hold {entries} entries, limit is {MAX_SAMPLED_ENTRIES}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(q);
    for _p in 0..q {
        let mut member = Vec::with_capacity(k + 1);
        for _l in 0..=k {
            let mut a = RationalMatrix::zeros(n, n);
            let mut b = RationalMatrix::zeros(n, m);
            for &(i, j) in pattern.stars() {
                let v = BigRational::from_integer(BigInt::from(rng.gen_range(1..=value_bound)));
                if j < n {
                    a.set(i, j, v);
                } else {
                    b.set(i, j - n, v);
                }
            }
            member.push((a, b));
        }
        blocks.push(member);
    }
    Ok(EnsembleInstance { n, m, k, q, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn empty_pattern_gives_zero_blocks() {
        let p = SparsityPattern::empty(3, 2).unwrap();
        let inst = sample_instance(&p, 2, 3, 5, DEFAULT_VALUE_BOUND).unwrap();
        for pp in 0..3 {
            for l in 0..=2 {
                let (a, b) = inst.block(pp, l);
                assert!(a.support().is_empty());
                assert!(b.support().is_empty());
            }
        }
    }

    #[test]
    fn single_integrator_values() {
        let p = SparsityPattern::from_one_based(1, 1, [(1, 2)]).unwrap();
        let bound = 50;
        let inst = sample_instance(&p, 1, 2, 11, bound).unwrap();
        let mut count = 0;
        for pp in 0..2 {
            for l in 0..=1 {
                let (a, b) = inst.block(pp, l);
                assert!(a.get(0, 0).is_zero());
                let v = b.get(0, 0);
                assert!(v.is_integer());
                let v = v.to_integer();
                assert!(v >= BigInt::from(1) && v <= BigInt::from(bound));
                count += 1;
            }
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn shared_pair_single_block_has_three_nonzeros() {
        let p = SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 3), (2, 1)]).unwrap();
        let inst = sample_instance(&p, 0, 1, 3, DEFAULT_VALUE_BOUND).unwrap();
        let (a, b) = inst.block(0, 0);
        assert_eq!(a.support().len() + b.support().len(), 3);
        assert!(inst.conforms_to(&p));
    }

    #[test]
    fn deterministic_and_guarded() {
        let p = SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 1)]).unwrap();
        assert_eq!(
            sample_instance(&p, 1, 2, 9, 100).unwrap(),
            sample_instance(&p, 1, 2, 9, 100).unwrap()
        );
        assert!(sample_instance(&p, 1, 2, 9, 1).is_err());
        assert!(sample_instance(&p, 1, 0, 9, 100).is_err());
        assert!(matches!(
            sample_instance(&p, 1 << 20, 1 << 10, 9, 100),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn assembled_blocks_have_block_structure() {
        let p = SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 3), (2, 1)]).unwrap();
        let inst = sample_instance(&p, 1, 3, 1, 100).unwrap();
        let a = inst.assembled_a(1);
        let b = inst.assembled_b(1);
        assert_eq!((a.rows(), a.cols(), b.rows(), b.cols()), (6, 6, 6, 1));
        for (r, c) in a.support() {
            assert_eq!(r / 2, c / 2, "off-diagonal block entry at ({r}, {c})");
        }
        assert_eq!(b.support().len(), 6);
        let exported = inst.to_json();
        assert_eq!(exported["blocks"].as_array().unwrap().len(), 6);
        assert!(exported["blocks"][0]["B"][0][0]
            .as_str()
            .unwrap()
            .ends_with("/1"));
    }
}
