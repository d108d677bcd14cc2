// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices and a Jacobi eigensolver for Hermitian
//! matrices. Sizes here stay in the hundreds, so the O(n^3) per sweep cost
//! is irrelevant next to the accuracy Jacobi rotations give.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

// The methods are inherent when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: alloc::vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
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

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Entrywise (Hadamard / Schur) product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest entrywise `|a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.data.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol)
            })
    }

    /// `max |(U†U - I)_ij|`.
    pub fn unitarity_defect(&self) -> Result<f64> {
        let gram = self.adjoint().matmul(self)?;
        gram.max_abs_diff(&Matrix::identity(self.cols))
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Sub-block `[r0..r0+h, c0..c0+w]`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        Matrix::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a Hermitian matrix: `A = V diag(values) V†`,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi. Each rotation first rotates the phase of the
/// pivot `a_pq` to make it real, then applies the real symmetric rotation
/// that annihilates it.
pub fn hermitian_eigen(a: &Matrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    // Symmetrize against rounding in the caller's assembly.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e_minus = phase.conj(); // e^{-iφ}
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on (p, q).
                // Columns: A ← A J.
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * e_minus * s;
                    m[(k, q)] = akp * s + akq * e_minus * c;
                }
                // Rows: A ← J† A.
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * phase * s;
                    m[(q, k)] = apk * s + aqk * phase * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * e_minus * s;
                    v[(k, q)] = vkp * s + vkq * e_minus * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending, without eigenvectors.
///
/// Householder reduction to a Hermitian tridiagonal matrix, whose
/// off-diagonal phases are then dropped (a diagonal unitary similarity),
/// followed by implicit QL on the real symmetric tridiagonal.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut diag = alloc::vec![0.0; n];
    let mut off = alloc::vec![0.0; n];
    let mut v = alloc::vec![ZERO; n];
    let mut w = alloc::vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let lo = k + 1;
        let norm = (lo..n).map(|i| m[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = m[(lo, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        // Reflect the column onto -phase * norm * e_lo; v is the unit normal.
        for i in lo..n {
            v[i] = m[(i, k)];
        }
        v[lo] += phase * norm;
        let vnorm = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v[lo..n] {
            *x /= vnorm;
        }
        // A <- H A H with H = I - 2 v v†: A - 2 (v w† + w v†), w = p - (v†p) v, p = A v.
        // Column k is handled too, which zeroes it below the subdiagonal.
        for i in k..n {
            w[i] = (lo..n).map(|j| m[(i, j)] * v[j]).sum();
        }
        let vk: Complex64 = (lo..n).map(|i| v[i].conj() * w[i]).sum();
        for i in lo..n {
            w[i] -= vk * v[i];
        }
        v[k] = ZERO;
        for i in k..n {
            for j in k..n {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                m[(i, j)] -= delta * 2.0;
            }
        }
    }
    for i in 0..n {
        diag[i] = m[(i, i)].re;
        if i + 1 < n {
            off[i] = m[(i + 1, i)].norm();
        }
    }
    tridiagonal_ql(&mut diag, &mut off);
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal
/// matrix. `off[i]` couples `diag[i]` and `diag[i + 1]`; the eigenvalues
/// are left in `diag`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        for _ in 0..64 {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(a: &Matrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.last().copied().unwrap_or(0.0))
}

/// Spectral norm, computed as `sqrt(lambda_max(A†A))` so that it does not
/// share a route with `lambda_max(A)`.
pub fn operator_norm(a: &Matrix) -> Result<f64> {
    let gram = a.adjoint().matmul(a)?;
    Ok(lambda_max(&gram)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::seeded_rng;
    use rand::Rng;

    fn random_hermitian(n: usize, seed: u64) -> Matrix {
        let mut rng = seeded_rng(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = hermitian_eigen(&x).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, -1.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => ZERO,
        });
        assert!((lambda_max(&y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (5, 2), (17, 3), (40, 4)] {
            let a = random_hermitian(n, seed);
            let eig = hermitian_eigen(&a).unwrap();
            let d = Matrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(eig.values[i], 0.0)
                } else {
                    ZERO
                }
            });
            let rebuilt = eig
                .vectors
                .matmul(&d)
                .unwrap()
                .matmul(&eig.vectors.adjoint())
                .unwrap();
            assert!(rebuilt.max_abs_diff(&a).unwrap() < 1e-12, "n={n}");
            assert!(eig.vectors.unitarity_defect().unwrap() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            // trace check
            let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
            assert!((eig.values.iter().sum::<f64>() - trace).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_route_matches_jacobi() {
        for (n, seed) in [(1, 10), (2, 11), (3, 12), (8, 13), (33, 14), (64, 15)] {
            let a = random_hermitian(n, seed);
            let fast = hermitian_eigenvalues(&a).unwrap();
            let slow = hermitian_eigen(&a).unwrap().values;
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn degenerate_and_diagonal_spectra() {
        let d = Matrix::from_real(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), alloc::vec![-1.0, 2.0, 2.0]);
        // All-ones 4x4: eigenvalues 0, 0, 0, 4.
        let ones = Matrix::from_fn(4, 4, |_, _| Complex64::new(1.0, 0.0));
        let values = hermitian_eigenvalues(&ones).unwrap();
        assert!((values[3] - 4.0).abs() < 1e-13);
        assert!(values[..3].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn operator_norm_matches_spectrum_for_hermitian() {
        let a = random_hermitian(12, 9);
        let eig = hermitian_eigen(&a).unwrap();
        let spectral = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((operator_norm(&a).unwrap() - spectral).abs() < 1e-12);
    }
}
