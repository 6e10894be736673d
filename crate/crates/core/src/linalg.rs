//! Dense exact-rational matrices and the exact rank / subspace routines the
//! numerical oracle is built on. No floating point is used anywhere here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Row-major dense matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    /// Positions `(row, col)` of all nonzero entries, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c).is_zero() {
                    out.push((r, c));
                }
            }
        }
        out
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(r, t);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(t, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = BigRational::zero();
                for (c, x) in v.iter().enumerate() {
                    let a = self.get(r, c);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<BigRational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    /// Copy `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &RationalMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c).clone());
            }
        }
    }
}

/// Scale a rational vector by the lcm of its denominators to obtain an
/// integer vector spanning the same line.
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Rank of the integer matrix whose rows are `vectors`, by fraction-free
/// (Bareiss) elimination. Stops early once the rank reaches the ambient
/// dimension.
pub fn bareiss_rank(vectors: &[Vec<BigInt>], dim: usize) -> usize {
    let mut m: Vec<Vec<BigInt>> = vectors
        .iter()
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    for v in &m {
        assert_eq!(v.len(), dim, "vector length mismatch");
    }
    let rows = m.len();
    let mut rank = 0usize;
    let mut prev_pivot = BigInt::one();
    for col in 0..dim {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..rows {
            let factor = m[r][col].clone();
            for c in col..dim {
                // Bareiss step: exact division by the previous pivot.
                let v = &pivot * &m[r][c] - &factor * &m[rank][c];
                m[r][c] = v / &prev_pivot;
            }
        }
        prev_pivot = pivot;
        rank += 1;
    }
    rank
}

/// A subspace of Q^dim held as a reduced row-echelon basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    dim: usize,
    /// Basis rows with a leading 1 at `pivots[i]`, zero in all other pivot columns.
    basis: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.basis
    }

    fn reduce(&self, v: &[BigRational]) -> Vec<BigRational> {
        let mut w = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (wi, bi) in w.iter_mut().zip(b) {
                if !bi.is_zero() {
                    *wi -= &f * bi;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Insert `v`; returns true if the dimension grew.
    pub fn insert(&mut self, v: &[BigRational]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = w[p].clone();
        for x in w.iter_mut() {
            *x /= &lead;
        }
        for b in self.basis.iter_mut() {
            if b[p].is_zero() {
                continue;
            }
            let f = b[p].clone();
            for (bi, wi) in b.iter_mut().zip(&w) {
                if !wi.is_zero() {
                    *bi -= &f * wi;
                }
            }
        }
        self.basis.push(w);
        self.pivots.push(p);
        true
    }

    /// Smallest `a`-invariant subspace containing `self`.
    /// Returns the closure together with the number of sweeps taken.
    pub fn invariant_closure(&self, a: &RationalMatrix) -> (Subspace, usize) {
        assert_eq!(a.rows(), self.dim);
        assert_eq!(a.cols(), self.dim);
        let mut out = self.clone();
        let mut frontier: Vec<Vec<BigRational>> = self.basis.clone();
        let mut sweeps = 0;
        while !frontier.is_empty() {
            sweeps += 1;
            let mut next = Vec::new();
            for v in &frontier {
                let av = a.mul_vec(v);
                if out.insert(&av) {
                    next.push(av);
                }
            }
            frontier = next;
        }
        (out, sweeps)
    }

    /// True iff `a` maps this subspace into itself.
    pub fn is_invariant_under(&self, a: &RationalMatrix) -> bool {
        self.basis.iter().all(|b| self.contains(&a.mul_vec(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn bareiss_rank_small_cases() {
        assert_eq!(bareiss_rank(&[], 3), 0);
        assert_eq!(bareiss_rank(&[ints(&[0, 0, 0])], 3), 0);
        assert_eq!(bareiss_rank(&[ints(&[1, 2]), ints(&[2, 4])], 2), 1);
        assert_eq!(bareiss_rank(&[ints(&[1, 2]), ints(&[2, 5])], 2), 2);
        let rows = [ints(&[1, 2, 3]), ints(&[4, 5, 6]), ints(&[7, 8, 9])];
        assert_eq!(bareiss_rank(&rows, 3), 2);
        let rows = [ints(&[0, 1, 0]), ints(&[0, 0, 1]), ints(&[0, 3, 4])];
        assert_eq!(bareiss_rank(&rows, 3), 2);
    }

    #[test]
    fn subspace_insert_and_closure() {
        let mut s = Subspace::new(3);
        assert!(s.insert(&[r(1), r(0), r(0)]));
        assert!(!s.insert(&[r(2), r(0), r(0)]));
        assert_eq!(s.dim(), 1);
        // shift e1 -> e2 -> e3
        let mut a = RationalMatrix::zeros(3, 3);
        a.set(1, 0, r(1));
        a.set(2, 1, r(1));
        let (c, sweeps) = s.invariant_closure(&a);
        assert_eq!(c.dim(), 3);
        assert!(sweeps <= 3);
        assert!(c.is_invariant_under(&a));
    }

    #[test]
    fn clear_denominators_keeps_direction() {
        let v = vec![
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::new(BigInt::from(2), BigInt::from(3)),
        ];
        assert_eq!(clear_denominators(&v), ints(&[3, 4]));
    }
}
