//! JSON file formats.
//!
//! Matrices: `{"kind":"toeplitz","col":[…],"row":[…]}` (first column, first
//! row) or `{"kind":"hankel","col":[…],"row":[…]}` (first column, last row).
//! Vectors are bare arrays. Floats are printed in shortest round-trip form.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{RFactor, RotationLog};
use crate::rotations::RotationKind;
use crate::toeplitz::{HankelSpec, ToeplitzSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixFile {
    Toeplitz { col: Vec<f64>, row: Vec<f64> },
    Hankel { col: Vec<f64>, row: Vec<f64> },
}

/// A parsed and validated matrix file.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Toeplitz(ToeplitzSpec),
    Hankel(HankelSpec),
}

impl MatrixFile {
    pub fn validate(self) -> Result<Matrix> {
        match self {
            MatrixFile::Toeplitz { col, row } => ToeplitzSpec::new(col, row).map(Matrix::Toeplitz),
            MatrixFile::Hankel { col, row } => HankelSpec::new(col, row).map(Matrix::Hankel),
        }
    }
}

impl From<&ToeplitzSpec> for MatrixFile {
    fn from(t: &ToeplitzSpec) -> Self {
        MatrixFile::Toeplitz { col: t.first_col().to_vec(), row: t.first_row().to_vec() }
    }
}

impl From<&HankelSpec> for MatrixFile {
    fn from(h: &HankelSpec) -> Self {
        MatrixFile::Hankel { col: h.first_col().to_vec(), row: h.last_row().to_vec() }
    }
}

/// `{"n":…, "rows":[[r11,…],[r22,…],…]}`; row `k` starts at the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFactorFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl RFactorFile {
    pub fn from_factor(f: &RFactor) -> Option<Self> {
        f.rows.as_ref().map(|r| RFactorFile { n: f.n, rows: r.to_rows() })
    }
}

/// `{"rotations":[[c,s,kind]…], "last_column":[…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationLogFile {
    pub rotations: Vec<(f64, f64, RotationKind)>,
    pub last_column: Vec<f64>,
}

impl From<&RotationLog> for RotationLogFile {
    fn from(log: &RotationLog) -> Self {
        RotationLogFile {
            rotations: log.rotations.iter().map(|r| (r.c, r.s, r.kind)).collect(),
            last_column: log.last_column.clone(),
        }
    }
}
