//! Dense Cholesky factorization for the small systems GP regression builds.

use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor stored row-major.
#[derive(Clone, Debug)]
pub(crate) struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factor a symmetric positive definite matrix given row-major.
    /// Returns `None` when a pivot is not strictly positive.
    pub fn factor(a: &[T], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum = sum - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > T::zero()) || !sum.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(Self { n, l })
    }

    /// Factor, retrying with growing diagonal jitter if the matrix is
    /// numerically singular.
    pub fn factor_with_jitter(a: &[T], n: usize, scale: T) -> Option<Self> {
        if let Some(c) = Self::factor(a, n) {
            return Some(c);
        }
        let mut jitter = scale * T::epsilon().sqrt() * T::of(1e-3);
        let mut work = a.to_vec();
        for _ in 0..8 {
            for i in 0..n {
                work[i * n + i] = a[i * n + i] + jitter;
            }
            if let Some(c) = Self::factor(&work, n) {
                return Some(c);
            }
            jitter = jitter * T::of(10.0);
        }
        None
    }

    /// Solve `L y = b` in place.
    pub fn forward(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let sum = row.iter().zip(&b[..i]).fold(b[i], |s, (&l, &x)| s - l * x);
            b[i] = sum / self.l[i * n + i];
        }
    }

    /// Solve `L^T x = y` in place.
    pub fn backward(&self, b: &mut [T]) {
        let n = self.n;
        for i in (0..n).rev() {
            let sum = (i + 1..n).zip(&b[i + 1..]).fold(b[i], |s, (k, &x)| s - self.l[k * n + i] * x);
            b[i] = sum / self.l[i * n + i];
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// `sum(log(diag(L)))`, i.e. half the log-determinant of `A`.
    pub fn half_log_det(&self) -> T {
        (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum()
    }
}
