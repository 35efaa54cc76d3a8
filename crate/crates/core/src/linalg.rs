//! Dense row-major matrices with Cholesky and partially pivoted LU solvers.

use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        self.rows().map(|r| dot(r, x)).collect()
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot(x, &self.mul_vec(x))
    }

    /// `self + diag(d)`.
    pub fn plus_diagonal(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut m = self.clone();
        for (i, di) in d.iter().enumerate() {
            m.data[i * self.n + i] = m.data[i * self.n + i] + *di;
        }
        m
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry magnitude.
    pub fn asymmetry(&self) -> T {
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    lower: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Fails with [`Error::SingularOperator`] when a pivot is not positive,
    /// i.e. when the matrix is not positive definite.
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let (head, tail) = l.split_at_mut(j * n);
            let row_j = &mut tail[..n];
            // off-diagonal entries of row j, using rows already finished
            for k in 0..j {
                let row_k = &head[k * n..k * n + k];
                let s = a.get(j, k) - dot(&row_j[..k], row_k);
                row_j[k] = s / head[k * n + k];
            }
            let d = a.get(j, j) - dot(&row_j[..j], &row_j[..j]);
            if !(d > T::zero()) {
                return Err(Error::SingularOperator {
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            row_j[j] = d.sqrt();
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            y[i] = (y[i] - dot(row, &y[..i])) / self.lower[i * n + i];
        }
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(y[i], |s, k| s - self.lower[k * n + i] * y[k]);
            y[i] = s / self.lower[i * n + i];
        }
        y
    }

    /// Smallest diagonal entry of `L`; its square bounds the smallest pivot.
    pub fn min_pivot(&self) -> T {
        (0..self.n)
            .map(|i| self.lower[i * self.n + i])
            .fold(T::infinity(), T::min)
    }
}

/// LU factorization with partial pivoting, for the (possibly indefinite)
/// Newton Jacobians.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, T::neg_infinity()), |best, c| if c.1 > best.1 { c } else { best });
            if !(pv > tiny) {
                return Err(Error::SingularOperator {
                    pivot: k,
                    value: pv.as_f64(),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        lu[i * n + j] = lu[i * n + j] - f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu[i * n..i * n + i], &y[..i]);
            y[i] = y[i] - s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu[i * n + i + 1..(i + 1) * n], &y[i + 1..]);
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd(n: usize) -> DenseMatrix<f64> {
        // 1D Dirichlet Laplacian plus a rank-one bump
        DenseMatrix::from_fn(n, |i, j| {
            let base = if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            };
            base + 0.01 / (1.0 + (i + j) as f64)
        })
    }

    #[test]
    fn cholesky_round_trip() {
        let a = spd(40);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let got = Cholesky::factor(&a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert_relative_eq!(g, e, epsilon = 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(
            Cholesky::factor(&a),
            Err(Error::SingularOperator { pivot: 1, .. })
        ));
    }

    #[test]
    fn lu_solves_indefinite_system() {
        let a = DenseMatrix::from_fn(3, |i, j| [[0.0, 2.0, 1.0], [1.0, -1.0, 0.0], [3.0, 0.0, -2.0]][i][j]);
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let got = Lu::factor(&a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert_relative_eq!(g, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn lu_flags_singular() {
        let a = DenseMatrix::from_fn(2, |i, _| if i == 0 { 1.0 } else { 2.0 });
        let a = DenseMatrix::from_fn(2, |i, j| a.get(i, j) * if i == 1 { 0.5 } else { 1.0 });
        assert!(Lu::factor(&a).is_err());
    }

    #[test]
    fn asymmetry_of_symmetric_is_zero() {
        assert_eq!(spd(10).asymmetry(), 0.0);
        let mut a = spd(3);
        a.set(0, 2, 1.0);
        assert!(a.asymmetry() > 0.1);
    }
}
