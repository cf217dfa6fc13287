//! Dense matrices over any [`Scalar`] domain.
//!
//! Used for residue matrices of the linear problem, Jacobians of canonical
//! transformations, and the small linear solves behind change-of-variable
//! chain rules. Sizes here are tiny (at most `(L*(N+2))` square), so the
//! implementations favor clarity over asymptotics.

use std::fmt;
use std::ops::{Index, IndexMut};

use num::bigint::BigInt;

use crate::error::{Error, Result};

use super::laurent::Rat;
use super::scalar::Scalar;

/// A dense `rows x cols` matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<K> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: Scalar> Mat<K> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> K) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged matrix rows"
        );
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| K::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { K::one() } else { K::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &K)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / self.cols, k % self.cols, v))
    }

    pub fn map<M: Scalar>(&self, mut f: impl FnMut(&K) -> M) -> Mat<M> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(v)).collect(),
        }
    }

    /// Entry-wise fallible map, short-circuiting on the first error.
    pub fn try_map<M: Scalar>(&self, mut f: impl FnMut(&K) -> Result<M>) -> Result<Mat<M>> {
        let mut data = Vec::with_capacity(self.data.len());
        for v in &self.data {
            data.push(f(v)?);
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v.clone())
    }

    pub fn scale(&self, c: &K) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = K::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * rhs[(k, j)].clone();
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[K]) -> Vec<K> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = K::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)].clone() * v[k].clone();
                }
                acc
            })
            .collect()
    }

    /// Outer product `col * row^T` of two vectors.
    pub fn outer(col: &[K], row: &[K]) -> Self {
        Self::from_fn(col.len(), row.len(), |i, j| col[i].clone() * row[j].clone())
    }

    pub fn trace(&self) -> K {
        assert!(self.is_square(), "trace of a non-square matrix");
        let mut acc = K::zero();
        for i in 0..self.rows {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    /// `AB - BA`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        a.matmul(b).sub(&b.matmul(a))
    }

    /// Coefficients `[c_0, ..., c_{n-1}, 1]` of the characteristic polynomial
    /// `det(lambda I - A) = lambda^n + c_{n-1} lambda^{n-1} + ... + c_0`,
    /// computed by the Faddeev-LeVerrier recurrence (division-free except for
    /// exact integer divisors, so it works over every scalar domain).
    pub fn char_poly(&self) -> Result<Vec<K>> {
        assert!(self.is_square(), "characteristic polynomial needs a square matrix");
        let n = self.rows;
        let mut coeffs = vec![K::zero(); n + 1];
        coeffs[n] = K::one();
        let mut m = Mat::identity(n);
        for k in 1..=n {
            let am = self.matmul(&m);
            let inv_k = K::from_rat(&Rat::new(BigInt::from(-1), BigInt::from(k as i64)));
            let c = am.trace() * inv_k;
            coeffs[n - k] = c.clone();
            if k < n {
                m = am.add(&Mat::identity(n).scale(&c));
            }
        }
        Ok(coeffs)
    }

    /// Solves `A x = b` by fraction-free-ish Gaussian elimination with the
    /// first nonzero pivot in each column; fails on a singular matrix.
    pub fn solve(&self, b: &[K]) -> Result<Vec<K>> {
        assert!(self.is_square(), "solve needs a square matrix");
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or_else(|| Error::DivisionByZero("singular linear system".into()))?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a[(pivot, j)].clone();
                    a[(pivot, j)] = a[(col, j)].clone();
                    a[(col, j)] = tmp;
                }
                rhs.swap(pivot, col);
            }
            let inv = a[(col, col)].try_inv()?;
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() * inv.clone();
            }
            rhs[col] = rhs[col].clone() * inv;
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in 0..n {
                    a[(r, j)] = a[(r, j)].clone() - factor.clone() * a[(col, j)].clone();
                }
                rhs[r] = rhs[r].clone() - factor * rhs[col].clone();
            }
        }
        Ok(rhs)
    }

    /// Matrix inverse via [`Mat::solve`] against the identity columns.
    pub fn inverse(&self) -> Result<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let e: Vec<K> = (0..n)
                .map(|i| if i == j { K::one() } else { K::zero() })
                .collect();
            cols.push(self.solve(&e)?);
        }
        Ok(Self::from_fn(n, n, |i, j| cols[j][i].clone()))
    }
}

impl<K> Index<(usize, usize)> for Mat<K> {
    type Output = K;
    fn index(&self, (i, j): (usize, usize)) -> &K {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<K> IndexMut<(usize, usize)> for Mat<K> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut K {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<K: Scalar> fmt::Display for Mat<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].describe()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat_i64(rows: &[&[i64]]) -> Mat<Rat> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat_int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn basic_operations() {
        let a = mat_i64(&[&[1, 2], &[3, 4]]);
        let b = mat_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.matmul(&b), mat_i64(&[&[2, 1], &[4, 3]]));
        assert_eq!(a.add(&b).sub(&b), a);
        assert_eq!(a.trace(), rat_int(5));
        assert_eq!(a.transpose(), mat_i64(&[&[1, 3], &[2, 4]]));
        assert_eq!(a.mul_vec(&[rat_int(1), rat_int(1)]), vec![rat_int(3), rat_int(7)]);
        assert!(Mat::<Rat>::zeros(2, 3).is_zero());
        assert!(Mat::commutator(&a, &a).is_zero());
    }

    #[test]
    fn char_poly_small_cases() {
        // 2x2: lambda^2 - tr lambda + det.
        let a = mat_i64(&[&[1, 2], &[3, 4]]);
        assert_eq!(
            a.char_poly().unwrap(),
            vec![rat_int(-2), rat_int(-5), rat_int(1)]
        );
        // Diagonal 3x3: (l-1)(l-2)(l-3) = l^3 - 6l^2 + 11l - 6.
        let d = mat_i64(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        assert_eq!(
            d.char_poly().unwrap(),
            vec![rat_int(-6), rat_int(11), rat_int(-6), rat_int(1)]
        );
    }

    #[test]
    fn char_poly_of_rank_one_matrix() {
        // b c^T has characteristic polynomial l^{n-1} (l - c.b).
        let b = [rat(1, 2), rat_int(-3), rat(2, 5), rat_int(1)];
        let c = [rat_int(2), rat(1, 3), rat_int(0), rat(7, 2)];
        let a = Mat::outer(&b, &c);
        let dot: Rat = b
            .iter()
            .zip(&c)
            .map(|(x, y)| x * y)
            .fold(rat_int(0), |s, v| s + v);
        let mut expect = vec![rat_int(0); 5];
        expect[4] = rat_int(1);
        expect[3] = -dot;
        assert_eq!(a.char_poly().unwrap(), expect);
    }

    #[test]
    fn char_poly_float_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let exact = Mat::<Rat>::from_fn(4, 4, |_, _| rat_int(rng.random_range(-5..6)));
            let float = exact.map(|v| f64::from_rat(v));
            let ce = exact.char_poly().unwrap();
            let cf = float.char_poly().unwrap();
            for (e, f) in ce.iter().zip(&cf) {
                assert!((f64::from_rat(e) - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn solve_and_inverse() {
        let a = mat_i64(&[&[2, 1], &[1, 3]]);
        let x = a.solve(&[rat_int(5), rat_int(10)]).unwrap();
        assert_eq!(x, vec![rat_int(1), rat_int(3)]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.matmul(&inv), Mat::identity(2));
        assert!(mat_i64(&[&[1, 2], &[2, 4]]).inverse().is_err());

        // Random invertible-by-construction systems round-trip.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..50 {
            let a = Mat::<Rat>::from_fn(3, 3, |i, j| {
                rat_int(rng.random_range(-4..5)) + if i == j { rat_int(7) } else { rat_int(0) }
            });
            let b: Vec<Rat> = (0..3).map(|_| rat(rng.random_range(-9..10), 2)).collect();
            let x = a.solve(&b).unwrap();
            assert_eq!(a.mul_vec(&x), b);
        }
    }

    #[test]
    fn cayley_hamilton_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let a = Mat::<Rat>::from_fn(3, 3, |_, _| rat(rng.random_range(-6..7), 2));
            let coeffs = a.char_poly().unwrap();
            // p(A) = 0.
            let mut acc = Mat::<Rat>::zeros(3, 3);
            let mut power = Mat::<Rat>::identity(3);
            for c in &coeffs {
                acc = acc.add(&power.scale(c));
                power = power.matmul(&a);
            }
            assert!(acc.is_zero(), "Cayley-Hamilton failed");
        }
    }
}
