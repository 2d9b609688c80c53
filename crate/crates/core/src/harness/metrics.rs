//! Normalized stability measures for one solved instance:
//!
//! ```text
//! e1  = ‖R̃ᵀR̃ - AᵀA‖₁ / (ε ‖AᵀA‖₁)
//! e2  = ‖x̃ - x‖₂ / (ε κ₁² ‖x‖₂)
//! e3  = ‖Ax̃ - b‖₂ / (ε κ₁ ‖A‖₁ ‖x‖₂)
//! e3c = e3 for the solution obtained from the dense Cholesky factor of AᵀA
//! ```
//!
//! with `κ₁ = ‖R̃‖₁ ‖R̃⁻¹‖₁` and `ε` the unit roundoff.

use serde::Serialize;

use crate::error::Result;
use crate::lattice::UpperTriangular;
use crate::oracles::{cholesky_normal_solve, cond1_triangular, gram, DenseMatrix};
use crate::seminormal::{norm2, StabilityMetrics};
use crate::tally::Tally;
use crate::toeplitz::ToeplitzSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub cond1: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// NaN when the dense Cholesky comparison itself breaks down.
    pub e3c: f64,
}

impl Measured {
    pub fn stability(&self) -> StabilityMetrics {
        StabilityMetrics { e1: self.e1, e2: self.e2, e3: self.e3 }
    }
}

/// `‖R̃ᵀR̃ - (AᵀA + αI)‖₁ / ‖AᵀA + αI‖₁`, without the `ε` normalization.
pub fn factor_backward_error(t: &ToeplitzSpec, alpha: f64, r: &UpperTriangular) -> f64 {
    let g = gram(t, alpha);
    let rd = DenseMatrix::from_upper(r);
    rd.transpose().matmul(&rd).sub(&g).norm1() / g.norm1()
}

fn residual_norm(t: &ToeplitzSpec, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = t.matvec(x, &mut Tally::new())?;
    Ok(norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>()))
}

/// Computes the measures for solution `x_tilde` of `Ax = b`, `b = A x_true`,
/// where `r` is the factor `x_tilde` was computed from.
pub fn compute_metrics(
    t: &ToeplitzSpec,
    x_true: &[f64],
    b: &[f64],
    x_tilde: &[f64],
    r: &UpperTriangular,
    eps: f64,
) -> Result<Measured> {
    let cond1 = cond1_triangular(&DenseMatrix::from_upper(r))?;
    let e1 = factor_backward_error(t, 0.0, r) / eps;
    let xnorm = norm2(x_true);
    let err: Vec<f64> = x_tilde.iter().zip(x_true).map(|(p, q)| p - q).collect();
    let e2 = norm2(&err) / (eps * cond1 * cond1 * xnorm);
    let scale = eps * cond1 * t.norm1() * xnorm;
    let e3 = residual_norm(t, x_tilde, b)? / scale;
    let e3c = match cholesky_normal_solve(t, b) {
        Ok(xc) => residual_norm(t, &xc, b)? / scale,
        Err(_) => f64::NAN,
    };
    Ok(Measured { cond1, e1, e2, e3, e3c })
}
