//! Dense complex linear algebra helpers shared by the modules.
//!
//! GNS vectors and superoperators are flattened row-major per block: matrix
//! entry `(i, j)` of an `n x n` block lives at `offset + i * n + j`.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::scalar::{cr, Real, C};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(m: &CMatrix<T>) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: CMatrix::zeros(0, 0),
            };
        }
        let eig = hermitize(m).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// `V diag(g(λ)) V*`.
    pub fn apply_fn(&self, g: impl Fn(T) -> C<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let s = g(v);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

/// `(m + m*) / 2`.
pub fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

/// Largest absolute entry of `m - m*`.
pub fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let d = m - m.adjoint();
    d.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Frobenius inner product `tr(a* b)`.
pub fn hs_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> C<T> {
    a.iter()
        .zip(b.iter())
        .fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Operator (spectral) norm.
pub fn op_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.nrows() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s))
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Matrix of the superoperator `ξ ↦ a ξ b` on row-major vectorized `n x n`
/// matrices: entry `[(i, j), (k, l)] = a[i, k] * b[l, j]`.
pub fn left_right_superop<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    let mut s = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let aik = a[(i, k)];
                if aik == C::new(T::zero(), T::zero()) {
                    continue;
                }
                for l in 0..n {
                    s[(i * n + j, k * n + l)] = aik * b[(l, j)];
                }
            }
        }
    }
    s
}

/// Row-major flattening of a square matrix.
pub fn vec_row_major<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    let n = m.nrows();
    CVector::from_fn(n * m.ncols(), |idx, _| m[(idx / n, idx % n)])
}

pub fn unvec_row_major<T: Real>(v: &[C<T>], n: usize) -> CMatrix<T> {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0)],
        );
        let eig = HermitianEigen::new(&m);
        assert!(eig.values[0] <= eig.values[1]);
        let back = eig.apply_fn(cr);
        assert!(max_abs(&(back - &m)) < 1e-14);
    }

    #[test]
    fn superop_matches_direct_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0));
        let x = CMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, 0.25));
        let direct = vec_row_major(&(&a * &x * &b));
        let via = left_right_superop(&a, &b) * vec_row_major(&x);
        assert!((direct - via).norm() < 1e-12);
    }
}
