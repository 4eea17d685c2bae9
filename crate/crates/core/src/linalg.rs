//! Banded LU with partial pivoting and a Sturm-sequence tridiagonal eigensolver.

use crate::real::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision at pivot {0}")]
    Singular(usize),
    #[error("entry ({0}, {1}) lies outside the band")]
    OutsideBand(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigenvalue bisection did not converge after {0} iterations")]
    EigenNonConvergence(usize),
    #[error("eigenvalue index {index} out of range for order {n}")]
    EigenIndex { index: usize, n: usize },
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Rows are stored with `kl` extra super-diagonals so that partial pivoting
/// can fill in without reallocation.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku {
            T::zero()
        } else {
            self.data[self.pos(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) -> Result<(), LinalgError> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku {
            return Err(LinalgError::OutsideBand(i, j));
        }
        let p = self.pos(i, j);
        self.data[p] = self.data[p] + v;
        Ok(())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.pos(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization with row pivoting.
    pub fn factor(mut self) -> Result<BandLu<T>, LinalgError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let tiny = scale * T::epsilon() * T::count(n.max(1));
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.pos(k, k)].abs();
            for r in k + 1..=last {
                let a = self.data[self.pos(r, k)].abs();
                if a > best {
                    best = a;
                    p = r;
                }
            }
            if best <= tiny || best == T::zero() {
                return Err(LinalgError::Singular(k));
            }
            piv[k] = p;
            let cmax = (k + ku + kl).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (a, b) = (self.pos(k, c), self.pos(p, c));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.pos(k, k)];
            for r in k + 1..=last {
                let prk = self.pos(r, k);
                let l = self.data[prk] / d;
                self.data[prk] = l;
                if l != T::zero() {
                    for c in k + 1..=cmax {
                        let (prc, pkc) = (self.pos(r, c), self.pos(k, c));
                        self.data[prc] = self.data[prc] - l * self.data[pkc];
                    }
                }
            }
        }
        Ok(BandLu { a: self, piv })
    }
}

/// Factorized band matrix.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) -> Result<(), LinalgError> {
        let a = &self.a;
        let n = a.n;
        if b.len() != n {
            return Err(LinalgError::Dimension { expected: n, got: b.len() });
        }
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != T::zero() {
                for r in k + 1..=(k + a.kl).min(n - 1) {
                    b[r] = b[r] - a.data[a.pos(r, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + a.ku + a.kl).min(n - 1) {
                s = s - a.data[a.pos(k, c)] * b[c];
            }
            b[k] = s / a.data[a.pos(k, k)];
        }
        Ok(())
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (`e.len() = d.len() − 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal<T> {
    pub d: Vec<T>,
    pub e: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    /// Symmetric form of `K u = λ M u` with tridiagonal symmetric `K` and positive diagonal `M`.
    pub fn from_generalized(kd: &[T], ke: &[T], m: &[T]) -> Self {
        let d = kd.iter().zip(m).map(|(&k, &w)| k / w).collect();
        let e = ke.iter().enumerate().map(|(i, &k)| k / (m[i] * m[i + 1]).sqrt()).collect();
        Self { d, e }
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let mut count = 0;
        let mut q = T::one();
        let floor = T::min_positive_value().sqrt();
        for (k, &dk) in self.d.iter().enumerate() {
            let off = if k == 0 { T::zero() } else { self.e[k - 1] * self.e[k - 1] / q };
            q = dk - x - off;
            if q == T::zero() {
                q = -floor;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<T, LinalgError> {
        let n = self.d.len();
        if index >= n {
            return Err(LinalgError::EigenIndex { index, n });
        }
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 0..n {
            let r = (if k > 0 { self.e[k - 1].abs() } else { T::zero() })
                + (if k + 1 < n { self.e[k].abs() } else { T::zero() });
            lo = lo.min(self.d[k] - r);
            hi = hi.max(self.d[k] + r);
        }
        let span = (hi - lo).max(T::one());
        lo = lo - span * T::epsilon();
        hi = hi + span * T::epsilon();
        let max_iter = 400;
        for _ in 0..max_iter {
            let mid = T::lit(0.5) * (lo + hi);
            let tol = T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()) + T::epsilon() * T::epsilon() * span;
            if hi - lo <= tol || mid == lo || mid == hi {
                return Ok(mid);
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(LinalgError::EigenNonConvergence(max_iter))
    }
}
