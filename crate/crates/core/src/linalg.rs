//! Small dense symmetric matrices and Cholesky factorization.
//!
//! Dimensions here are tiny (the ambient space is at most three dimensional in
//! practice), so everything is stored row-major in a flat `Vec`.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Pivots at or below this value reject a factorization.
pub const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from row-major data, symmetrizing as `(A + Aᵀ)/2`.
    pub fn from_rows(dim: usize, rows: &[T]) -> Self {
        assert_eq!(rows.len(), dim * dim, "row data must be dim × dim");
        let half = T::lit(0.5);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = half * (rows[i * dim + j] + rows[j * dim + i]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        let ax = self.mul_vec(x);
        ax.iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    /// `Qᵀ A Q` for a square (not necessarily symmetric) `Q` in row-major order.
    pub fn congruence(&self, q: &[T]) -> Self {
        let d = self.dim;
        let mut out = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = T::zero();
                for k in 0..d {
                    for l in 0..d {
                        acc += q[k * d + i] * self.get(k, l) * q[l * d + j];
                    }
                }
                out[i * d + j] = acc;
            }
        }
        Self::from_rows(d, &out)
    }

    pub fn as_rows(&self) -> &[T] {
        &self.data
    }

    pub fn to_nested_f64(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).as_f64()).collect())
            .collect()
    }

    pub fn cholesky(&self) -> Option<Cholesky<T>> {
        Cholesky::factor(self)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Returns `None` unless every pivot exceeds [`PIVOT_FLOOR`].
    pub fn factor(a: &SymMatrix<T>) -> Option<Self> {
        let d = a.dim();
        let floor = T::lit(PIVOT_FLOOR);
        let mut l = vec![T::zero(); d * d];
        for j in 0..d {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l[j * d + k] * l[j * d + k];
            }
            if !(diag > floor) {
                return None;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = ljj;
            for i in (j + 1)..d {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = s / ljj;
            }
        }
        Some(Self { dim: d, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> T {
        self.lower[i * self.dim + j]
    }

    /// Determinant as the product of squared pivots.
    pub fn det(&self) -> T {
        (0..self.dim).map(|i| self.l(i, i) * self.l(i, i)).fold(T::one(), |a, b| a * b)
    }

    /// `L z`.
    pub fn mul_lower(&self, z: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| (0..=i).map(|j| self.l(i, j) * z[j]).sum())
            .collect()
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let d = self.dim;
        let mut y = vec![T::zero(); d];
        for i in 0..d {
            let mut s = b[i];
            for j in 0..i {
                s -= self.l(i, j) * y[j];
            }
            y[i] = s / self.l(i, i);
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[T]) -> Vec<T> {
        let d = self.dim;
        let mut x = vec![T::zero(); d];
        for i in (0..d).rev() {
            let mut s = y[i];
            for j in (i + 1)..d {
                s -= self.l(j, i) * x[j];
            }
            x[i] = s / self.l(i, i);
        }
        x
    }

    /// `A⁻¹` assembled column by column.
    pub fn inverse(&self) -> SymMatrix<T> {
        let d = self.dim;
        let mut rows = vec![T::zero(); d * d];
        for c in 0..d {
            let mut e = vec![T::zero(); d];
            e[c] = T::one();
            let col = self.solve_upper(&self.solve_lower(&e));
            for r in 0..d {
                rows[r * d + c] = col[r];
            }
        }
        SymMatrix::from_rows(d, &rows)
    }

    /// `‖L⁻¹ x‖²`, i.e. `xᵀ A⁻¹ x`.
    pub fn inv_quad_form(&self, x: &[T]) -> T {
        self.solve_lower(x).iter().map(|&v| v * v).sum()
    }
}

/// Positive-definiteness via attempted Cholesky with pivots above 1e-12.
pub fn check_positive_definite<T: Real>(h: &SymMatrix<T>) -> bool {
    h.is_finite() && Cholesky::factor(h).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_positive_definite() {
        assert!(check_positive_definite(&SymMatrix::<f64>::identity(2)));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = SymMatrix::from_rows(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!check_positive_definite(&m));
    }

    #[test]
    fn radial_volcano_hessian_is_positive_definite() {
        assert!(check_positive_definite(&SymMatrix::from_rows(1, &[1.0f64])));
    }

    #[test]
    fn tiny_pivot_rejected() {
        assert!(!check_positive_definite(&SymMatrix::diagonal(&[1.0, 1e-13])));
        assert!(check_positive_definite(&SymMatrix::diagonal(&[1.0f32, 1e-3])));
    }

    #[test]
    fn determinant_and_inverse() {
        let m = SymMatrix::from_rows(2, &[4.0, 1.0, 1.0, 3.0]);
        let c = m.cholesky().unwrap();
        assert!((c.det() - 11.0f64).abs() < 1e-12);
        let inv = c.inverse();
        let prod = m.mul_vec(&inv.mul_vec(&[0.3, -0.7]));
        assert!((prod[0] - 0.3).abs() < 1e-12 && (prod[1] + 0.7).abs() < 1e-12);
        assert!((c.inv_quad_form(&[1.0, 2.0]) - inv.quad_form(&[1.0, 2.0])).abs() < 1e-12);
    }
}
