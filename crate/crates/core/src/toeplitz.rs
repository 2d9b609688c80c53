//! Toeplitz and Hankel matrices stored by their generating first column and
//! first row, with the partitions used by the factorization lattice and
//! schoolbook matrix-vector products.
//!
//! Entry `(i, j)` (zero based) of an `m × n` Toeplitz matrix is `a_{j-i}`,
//! where `a_d = row[d]` for `d ≥ 0` and `a_d = col[-d]` for `d < 0`.

use crate::error::{Error, Result};
use crate::tally::Tally;

/// An `m × n` real Toeplitz matrix with `m ≥ n`, held as its first column
/// `(a_0, a_{-1}, …, a_{1-m})` and first row `(a_0, a_1, …, a_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    col: Vec<f64>,
    row: Vec<f64>,
}

impl ToeplitzSpec {
    /// Validates and builds a Toeplitz matrix from its first column and row.
    pub fn new(col: Vec<f64>, row: Vec<f64>) -> Result<Self> {
        if col.is_empty() || row.is_empty() {
            return Err(Error::Shape("first column and first row must be nonempty".into()));
        }
        if col.len() < row.len() {
            return Err(Error::Shape(format!(
                "expected m >= n, got m = {}, n = {}",
                col.len(),
                row.len()
            )));
        }
        if col.iter().chain(row.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        #[allow(clippy::float_cmp)]
        if col[0] != row[0] {
            return Err(Error::MismatchedCorner { col: col[0], row: row[0] });
        }
        Ok(ToeplitzSpec { col, row })
    }

    /// The `n × n` identity.
    pub fn identity(n: usize) -> Self {
        let mut col = vec![0.0; n.max(1)];
        col[0] = 1.0;
        ToeplitzSpec { row: col.clone(), col }
    }

    /// Square symmetric Toeplitz matrix generated by its first row.
    pub fn symmetric(row: Vec<f64>) -> Result<Self> {
        Self::new(row.clone(), row)
    }

    pub fn rows(&self) -> usize {
        self.col.len()
    }

    pub fn cols(&self) -> usize {
        self.row.len()
    }

    pub fn is_square(&self) -> bool {
        self.col.len() == self.row.len()
    }

    pub fn first_col(&self) -> &[f64] {
        &self.col
    }

    pub fn first_row(&self) -> &[f64] {
        &self.row
    }

    /// The diagonal value `a_d`, with `d = j - i`.
    #[inline]
    pub fn diag(&self, d: isize) -> f64 {
        if d >= 0 {
            self.row[d as usize]
        } else {
            self.col[(-d) as usize]
        }
    }

    /// Entry `(i, j)`, zero based.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.diag(j as isize - i as isize)
    }

    /// `‖A‖₁`: the largest column absolute sum.
    pub fn norm1(&self) -> f64 {
        let (m, n) = (self.rows(), self.cols());
        (0..n)
            .map(|j| (0..m).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Schoolbook product `A v` in `mn` multiplications.
    pub fn matvec(&self, v: &[f64], tally: &mut Tally) -> Result<Vec<f64>> {
        let (m, n) = (self.rows(), self.cols());
        if v.len() != n {
            return Err(Error::Shape(format!("matvec expects length {n}, got {}", v.len())));
        }
        let out = (0..m)
            .map(|i| {
                let mut acc = 0.0;
                for (j, vj) in v.iter().enumerate() {
                    acc += self.get(i, j) * vj;
                }
                acc
            })
            .collect();
        tally.add_usize(m * n);
        Ok(out)
    }

    /// Schoolbook product `Aᵀ v` in `mn` multiplications.
    pub fn matvec_transpose(&self, v: &[f64], tally: &mut Tally) -> Result<Vec<f64>> {
        let (m, n) = (self.rows(), self.cols());
        if v.len() != m {
            return Err(Error::Shape(format!(
                "transpose matvec expects length {m}, got {}",
                v.len()
            )));
        }
        let out = (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for (i, vi) in v.iter().enumerate() {
                    acc += self.get(i, j) * vi;
                }
                acc
            })
            .collect();
        tally.add_usize(m * n);
        Ok(out)
    }

    /// The two border partitions of `A`:
    ///
    /// ```text
    ///     [ a_0 | yᵀ   ]   [ A_{-1} | ȳ       ]
    /// A = [-----+------] = [--------+---------]
    ///     [ z   | A_{-1}]   [ z̄ᵀ     | a_{n-m} ]
    /// ```
    pub fn partition_vectors(&self) -> Result<PartitionVectors> {
        let (m, n) = (self.rows(), self.cols());
        if n < 2 {
            return Err(Error::Shape("partition needs at least two columns".into()));
        }
        Ok(PartitionVectors {
            y: self.row[1..].to_vec(),
            z: self.col[1..].to_vec(),
            ybar: (0..m - 1).map(|i| self.get(i, n - 1)).collect(),
            zbar: (0..n - 1).map(|j| self.get(m - 1, j)).collect(),
        })
    }
}

/// Border vectors of a Toeplitz matrix. `y` is the first row and `z` the first
/// column without `a_0`; `z̄` is the last row and `ȳ` the last column without
/// the corner `a_{n-m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionVectors {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub ybar: Vec<f64>,
    pub zbar: Vec<f64>,
}

/// An `m × n` Hankel matrix `h_{i,j} = h_{i+j}` held as its first column
/// `(h_0, …, h_{m-1})` and last row `(h_{m-1}, …, h_{m+n-2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelSpec {
    col: Vec<f64>,
    row: Vec<f64>,
}

impl HankelSpec {
    pub fn new(col: Vec<f64>, row: Vec<f64>) -> Result<Self> {
        if col.is_empty() || row.is_empty() {
            return Err(Error::Shape("first column and last row must be nonempty".into()));
        }
        if col.len() < row.len() {
            return Err(Error::Shape(format!(
                "expected m >= n, got m = {}, n = {}",
                col.len(),
                row.len()
            )));
        }
        if col.iter().chain(row.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let last = *col.last().unwrap();
        #[allow(clippy::float_cmp)]
        if last != row[0] {
            return Err(Error::MismatchedCorner { col: last, row: row[0] });
        }
        Ok(HankelSpec { col, row })
    }

    /// Builds the Hankel matrix from its anti-diagonal sequence
    /// `(h_0, …, h_{m+n-2})`.
    pub fn from_sequence(m: usize, n: usize, h: &[f64]) -> Result<Self> {
        if m == 0 || n == 0 || h.len() != m + n - 1 {
            return Err(Error::Shape(format!(
                "Hankel sequence for {m}x{n} needs {} values, got {}",
                (m + n).saturating_sub(1),
                h.len()
            )));
        }
        Self::new(h[..m].to_vec(), h[m - 1..].to_vec())
    }

    pub fn rows(&self) -> usize {
        self.col.len()
    }

    pub fn cols(&self) -> usize {
        self.row.len()
    }

    pub fn first_col(&self) -> &[f64] {
        &self.col
    }

    pub fn last_row(&self) -> &[f64] {
        &self.row
    }

    /// Entry `(i, j)`, zero based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let k = i + j;
        if k < self.col.len() {
            self.col[k]
        } else {
            self.row[k + 1 - self.col.len()]
        }
    }
}

/// Reverses the row order of a Hankel system: returns `(JH, Jb)`, where `JH`
/// is Toeplitz. Solving `(JH) x = Jb` solves `H x = b`, and since `J` is a
/// permutation, `(JH)ᵀ(JH) = HᵀH` exactly.
pub fn hankel_adapter(h: &HankelSpec, b: &[f64]) -> Result<(ToeplitzSpec, Vec<f64>)> {
    if b.len() != h.rows() {
        return Err(Error::Shape(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            h.rows()
        )));
    }
    let col: Vec<f64> = h.col.iter().rev().copied().collect();
    let t = ToeplitzSpec::new(col, h.row.clone())?;
    let jb = b.iter().rev().copied().collect();
    Ok((t, jb))
}
