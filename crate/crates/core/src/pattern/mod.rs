//! Sparsity patterns: the ⋆/0 template `[A B]` every downstream object is
//! derived from.
//!
//! Internally rows and columns are 0-based. All text formats, JSON and error
//! messages use 1-based indices.

mod format;
mod instance;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use format::{parse_pattern, serialize_pattern, PatternFormat};
pub use instance::{sample_instance, EnsembleInstance, DEFAULT_VALUE_BOUND};

/// Largest state dimension accepted by [`lift_ensemble`].
pub const MAX_LIFTED_DIM: usize = 1 << 20;
/// Largest dimensions accepted by [`random_pattern`].
pub const MAX_RANDOM_DIM: usize = 1 << 12;

/// A sparsity pattern on `n × (n + m)`: columns `0..n` are the A-block,
/// columns `n..n+m` the B-block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsityPattern {
    n: usize,
    m: usize,
    stars: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    /// Build a pattern from 0-based star positions.
    pub fn new(
        n: usize,
        m: usize,
        stars: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("state dimension n must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in stars {
            if i >= n || j >= n + m {
                return Err(Error::Domain(format!(
                    "star ({}, {}) outside the {}x{} pattern",
                    i + 1,
                    j + 1,
                    n,
                    n + m
                )));
            }
            set.insert((i, j));
        }
        Ok(Self { n, m, stars: set })
    }

    /// Build a pattern from 1-based star positions, as written in the text formats.
    pub fn from_one_based(
        n: usize,
        m: usize,
        stars: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut zero_based = Vec::new();
        for (i, j) in stars {
            if i == 0 || j == 0 {
                return Err(Error::Domain(format!("index ({i}, {j}) is not 1-based")));
            }
            zero_based.push((i - 1, j - 1));
        }
        Self::new(n, m, zero_based)
    }

    /// The all-zero pattern.
    pub fn empty(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// 0-based star positions in row-major order.
    pub fn stars(&self) -> &BTreeSet<(usize, usize)> {
        &self.stars
    }

    pub fn star_count(&self) -> usize {
        self.stars.len()
    }

    pub fn is_star(&self, i: usize, j: usize) -> bool {
        self.stars.contains(&(i, j))
    }

    /// 1-based star positions in row-major order.
    pub fn stars_one_based(&self) -> Vec<(usize, usize)> {
        self.stars.iter().map(|&(i, j)| (i + 1, j + 1)).collect()
    }
}

/// Sparsity pattern of the q-ensemble: block-diagonal copies of the A-block
/// and stacked copies of the B-block, sharing the m input columns.
pub fn lift_ensemble(pattern: &SparsityPattern, q: usize) -> Result<SparsityPattern> {
    if q == 0 {
        return Err(Error::Domain("ensemble size q must be at least 1".into()));
    }
    let n = pattern.n;
    let nq = n
        .checked_mul(q)
        .filter(|&v| v <= MAX_LIFTED_DIM)
        .ok_or_else(|| {
            Error::Size(format!(
                "lifted dimension n*q = {n}*{q} exceeds {MAX_LIFTED_DIM}"
            ))
        })?;
    let mut stars = BTreeSet::new();
    for p in 0..q {
        let off = p * n;
        for &(i, j) in &pattern.stars {
            if j < n {
                stars.insert((off + i, off + j));
            } else {
                stars.insert((off + i, nq + (j - n)));
            }
        }
    }
    Ok(SparsityPattern {
        n: nq,
        m: pattern.m,
        stars,
    })
}

/// Random pattern in which every cell is a star independently with
/// probability `density`. The stream is ChaCha8 seeded from `seed`, so the
/// same arguments always give the same pattern.
pub fn random_pattern(n: usize, m: usize, density: f64, seed: u64) -> Result<SparsityPattern> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Domain(format!("density {density} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::Domain("state dimension n must be at least 1".into()));
    }
    if n > MAX_RANDOM_DIM || m > MAX_RANDOM_DIM {
        return Err(Error::Size(format!(
            "random pattern dimensions ({n}, {m}) exceed {MAX_RANDOM_DIM}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stars = BTreeSet::new();
    for i in 0..n {
        for j in 0..n + m {
            if rng.gen_bool(density) {
                stars.insert((i, j));
            }
        }
    }
    Ok(SparsityPattern { n, m, stars })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shared_pair() -> SparsityPattern {
        SparsityPattern::from_one_based(2, 1, [(1, 3), (2, 3), (2, 1)]).unwrap()
    }

    #[test]
    fn new_rejects_out_of_range_and_zero_n() {
        assert!(matches!(
            SparsityPattern::new(0, 1, []),
            Err(Error::Domain(_))
        ));
        assert!(SparsityPattern::new(2, 1, [(0, 3)]).is_err());
        assert!(SparsityPattern::new(2, 1, [(2, 0)]).is_err());
        assert!(SparsityPattern::from_one_based(2, 1, [(0, 1)]).is_err());
        // m = 0 is allowed
        assert!(SparsityPattern::new(2, 0, [(0, 1)]).is_ok());
    }

    #[test]
    fn lift_q1_is_identity() {
        let p = shared_pair();
        assert_eq!(lift_ensemble(&p, 1).unwrap(), p);
    }

    #[test]
    fn lift_shared_pair_q2() {
        let lifted = lift_ensemble(&shared_pair(), 2).unwrap();
        assert_eq!(lifted.n(), 4);
        assert_eq!(lifted.m(), 1);
        let expected: BTreeSet<_> = [(1, 5), (2, 5), (2, 1), (3, 5), (4, 5), (4, 3)]
            .into_iter()
            .map(|(i, j)| (i - 1, j - 1))
            .collect();
        assert_eq!(lifted.stars(), &expected);
    }

    #[test]
    fn lift_multiplies_star_count() {
        let p = random_pattern(3, 2, 0.5, 7).unwrap();
        assert_eq!(
            lift_ensemble(&p, 3).unwrap().star_count(),
            3 * p.star_count()
        );
    }

    #[test]
    fn lift_guards() {
        assert!(matches!(
            lift_ensemble(&shared_pair(), 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            lift_ensemble(&shared_pair(), MAX_LIFTED_DIM),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn random_pattern_extremes() {
        assert_eq!(random_pattern(5, 2, 0.0, 1).unwrap().star_count(), 0);
        assert_eq!(random_pattern(5, 2, 1.0, 1).unwrap().star_count(), 35);
        assert!(random_pattern(5, 2, 1.5, 1).is_err());
        assert!(random_pattern(5, 2, -0.1, 1).is_err());
        assert!(random_pattern(5, 2, f64::NAN, 1).is_err());
    }

    #[test]
    fn random_pattern_is_deterministic() {
        let a = random_pattern(6, 3, 0.3, 99).unwrap();
        let b = random_pattern(6, 3, 0.3, 99).unwrap();
        assert_eq!(a, b);
    }
}
