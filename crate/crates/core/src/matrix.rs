//! Small dense complex square matrices, row-major.
//!
//! Only what the master-equation integrator and the density-matrix checks
//! need; dimensions here are `L + 2` for a handful of pseudomodes.

use core::ops::{Index, IndexMut};

use crate::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        Self { dim, data }
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        let dim = u.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
    }

    /// Matrix unit `|i><j|`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &CMatrix) -> Self {
        let mut out = Self::zeros(self.dim);
        mul_into(self.dim, &self.data, &other.data, &mut out.data);
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm of `M - M^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Replace by `(M + M^dagger) / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            let d = self[(i, i)];
            self[(i, i)] = Complex64::new(d.re, 0.0);
            for j in (i + 1)..self.dim {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Tr(M^2)`, the purity for a density matrix.
    pub fn purity(&self) -> f64 {
        self.mul(self).trace().re
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `out = a * b` on row-major slices of a `dim x dim` matrix.
pub(crate) fn mul_into(dim: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += a[i * dim + k] * b[k * dim + j];
            }
            out[i * dim + j] = acc;
        }
    }
}

/// Eigenvalues of a Hermitian 2x2 matrix `[[a, b], [b*, c]]`, ascending.
pub fn hermitian_2x2_eigenvalues(a: f64, b: Complex64, c: f64) -> [f64; 2] {
    let mean = 0.5 * (a + c);
    let half_gap = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The matrix is embedded as the real symmetric `[[Re, -Im], [Im, Re]]`,
/// whose spectrum is that of the input with every eigenvalue doubled, and
/// diagonalized with cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.dim();
    let size = 2 * n;
    let mut a = vec![0.0_f64; size * size];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i * size + j] = z.re;
            a[(i + n) * size + (j + n)] = z.re;
            a[(i + n) * size + j] = z.im;
            a[i * size + (j + n)] = -z.im;
        }
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..size {
            for q in (p + 1)..size {
                off += a[p * size + q] * a[p * size + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..size {
            for q in (p + 1)..size {
                let apq = a[p * size + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * size + q] - a[p * size + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let akp = a[k * size + p];
                    let akq = a[k * size + q];
                    a[k * size + p] = c * akp - s * akq;
                    a[k * size + q] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[p * size + k];
                    let aqk = a[q * size + k];
                    a[p * size + k] = c * apk - s * aqk;
                    a[q * size + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..size).map(|i| a[i * size + i]).collect();
    diag.sort_by(f64::total_cmp);
    diag.into_iter().step_by(2).collect()
}
