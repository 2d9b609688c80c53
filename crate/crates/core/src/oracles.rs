//! Dense `O(n³)` reference computations used by the test suites and the
//! benchmark harness: Gram matrices, Householder QR, Cholesky, triangular
//! solves, one-norm condition numbers and the displacement operator.
//!
//! None of these touch the lattice code; they are the independent side of
//! every comparison.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::lattice::UpperTriangular;
use crate::toeplitz::{HankelSpec, ToeplitzSpec};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub m: usize,
    pub n: usize,
    pub data: Vec<f64>,
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl DenseMatrix {
    pub fn zeros(m: usize, n: usize) -> Self {
        DenseMatrix { m, n, data: vec![0.0; m * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
        a
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut a = Self::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "ragged rows");
            a.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        a
    }

    pub fn from_toeplitz(t: &ToeplitzSpec) -> Self {
        let mut a = Self::zeros(t.rows(), t.cols());
        for i in 0..a.m {
            for j in 0..a.n {
                a[(i, j)] = t.get(i, j);
            }
        }
        a
    }

    pub fn from_hankel(h: &HankelSpec) -> Self {
        let mut a = Self::zeros(h.rows(), h.cols());
        for i in 0..a.m {
            for j in 0..a.n {
                a[(i, j)] = h.get(i, j);
            }
        }
        a
    }

    pub fn from_upper(r: &UpperTriangular) -> Self {
        let n = r.order();
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            for (off, v) in r.row(i).iter().enumerate() {
                a[(i, i + off)] = *v;
            }
        }
        a
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.m);
        for i in 0..self.m {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.n, other.m, "inner dimensions differ");
        let mut c = Self::zeros(self.m, other.n);
        for i in 0..self.m {
            for k in 0..self.n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n {
                    c[(i, j)] += a * other[(k, j)];
                }
            }
        }
        c
    }

    /// `AᵀA`, upper triangle computed and mirrored so the result is exactly
    /// symmetric.
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let mut acc = 0.0;
                for k in 0..self.m {
                    acc += self[(k, i)] * self[(k, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc;
            }
        }
        g
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.m)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        assert_eq!((self.m, self.n), (other.m, other.n));
        DenseMatrix {
            m: self.m,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.m).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `AᵀA + αI` for a Toeplitz matrix, by direct summation.
pub fn gram(t: &ToeplitzSpec, alpha: f64) -> DenseMatrix {
    let mut g = DenseMatrix::from_toeplitz(t).gram();
    for i in 0..g.n {
        g[(i, i)] += alpha;
    }
    g
}

/// Householder QR of a full column rank `m × n` matrix, `m ≥ n`. Returns the
/// `n × n` triangular factor with its diagonal made positive.
pub fn householder_qr(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = (a.m, a.n);
    if m < n {
        return Err(Error::Shape(format!("householder_qr needs m >= n, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut v = vec![0.0; m];
    for k in 0..n {
        let norm = (k..m).map(|i| w[(i, k)] * w[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }
        let alpha = if w[(k, k)] > 0.0 { -norm } else { norm };
        for i in k..m {
            v[i] = w[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| v[i] * v[i]).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i] * w[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    w[(i, j)] -= f * v[i];
                }
            }
        }
        w[(k, k)] = alpha;
        for i in k + 1..m {
            w[(i, k)] = 0.0;
        }
    }
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let sign = if w[(i, i)] < 0.0 { -1.0 } else { 1.0 };
        for j in i..n {
            r[(i, j)] = sign * w[(i, j)];
        }
    }
    Ok(r)
}

/// Upper Cholesky factor `R` with `RᵀR = S`.
pub fn cholesky(s: &DenseMatrix) -> Result<DenseMatrix> {
    let n = s.n;
    if s.m != n {
        return Err(Error::Shape("cholesky needs a square matrix".into()));
    }
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut d = s[(i, i)];
        for k in 0..i {
            d -= r[(k, i)] * r[(k, i)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { index: i });
        }
        let rii = d.sqrt();
        r[(i, i)] = rii;
        for j in i + 1..n {
            let mut v = s[(i, j)];
            for k in 0..i {
                v -= r[(k, i)] * r[(k, j)];
            }
            r[(i, j)] = v / rii;
        }
    }
    Ok(r)
}

fn check_diag(r: &DenseMatrix) -> Result<()> {
    for i in 0..r.n {
        if r[(i, i)] == 0.0 || !r[(i, i)].is_finite() {
            return Err(Error::SingularTriangular { index: i });
        }
    }
    Ok(())
}

/// Solves `Rᵀ w = rhs` for upper-triangular `R`.
pub fn tri_solve_forward(r: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_diag(r)?;
    let n = r.n;
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut v = rhs[i];
        for k in 0..i {
            v -= r[(k, i)] * w[k];
        }
        w[i] = v / r[(i, i)];
    }
    Ok(w)
}

/// Solves `R x = rhs` for upper-triangular `R`.
pub fn tri_solve_backward(r: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_diag(r)?;
    let n = r.n;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        for j in i + 1..n {
            v -= r[(i, j)] * x[j];
        }
        x[i] = v / r[(i, i)];
    }
    Ok(x)
}

/// Explicit inverse of an upper-triangular matrix.
pub fn tri_inverse(r: &DenseMatrix) -> Result<DenseMatrix> {
    let n = r.n;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = tri_solve_backward(r, &e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// `κ₁(R) = ‖R‖₁ ‖R⁻¹‖₁` with `R⁻¹` formed explicitly.
pub fn cond1_triangular(r: &DenseMatrix) -> Result<f64> {
    Ok(r.norm1() * tri_inverse(r)?.norm1())
}

/// The displacement `c_{i,j} = b_{i+1,j+1} - b_{i,j}`, which vanishes exactly
/// on Toeplitz matrices.
pub fn displacement(b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.m < 2 || b.n < 2 {
        return Err(Error::Shape("displacement needs at least 2x2".into()));
    }
    let mut c = DenseMatrix::zeros(b.m - 1, b.n - 1);
    for i in 0..b.m - 1 {
        for j in 0..b.n - 1 {
            c[(i, j)] = b[(i + 1, j + 1)] - b[(i, j)];
        }
    }
    Ok(c)
}

/// `yyᵀ - vvᵀ`.
pub fn outer_difference(y: &[f64], v: &[f64]) -> DenseMatrix {
    let n = y.len();
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = y[i] * y[j] - v[i] * v[j];
        }
    }
    c
}

/// Solves `Ax = b` (least squares when `m > n`) through the dense Cholesky
/// factor of `AᵀA`.
pub fn cholesky_normal_solve(t: &ToeplitzSpec, b: &[f64]) -> Result<Vec<f64>> {
    let a = DenseMatrix::from_toeplitz(t);
    let r = cholesky(&a.gram())?;
    let d = a.transpose().matvec(b);
    tri_solve_backward(&r, &tri_solve_forward(&r, &d)?)
}

/// Least squares solution through Householder QR: applies the reflectors to
/// `b` and back-substitutes.
pub fn householder_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.m, a.n);
    let mut aug = DenseMatrix::zeros(m, n + 1);
    for i in 0..m {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(i, n)] = b[i];
    }
    let mut v = vec![0.0; m];
    for k in 0..n {
        let norm = (k..m).map(|i| aug[(i, k)] * aug[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }
        let alpha = if aug[(k, k)] > 0.0 { -norm } else { norm };
        for i in k..m {
            v[i] = aug[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| v[i] * v[i]).sum();
        for j in k..=n {
            let dot: f64 = (k..m).map(|i| v[i] * aug[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                aug[(i, j)] -= f * v[i];
            }
        }
    }
    let mut r = DenseMatrix::zeros(n, n);
    let mut qtb = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = aug[(i, j)];
        }
        qtb[i] = aug[(i, n)];
    }
    tri_solve_backward(&r, &qtb)
}
