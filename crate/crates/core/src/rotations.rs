//! Plane rotations for Cholesky updating and mixed-form rotations for
//! Cholesky downdating, applied one row at a time.
//!
//! Updating `UᵀU = RᵀR + xxᵀ` rotates the pair `(R[k][j], x[j])` with an
//! orthogonal plane rotation. Downdating `UᵀU = RᵀR - xxᵀ` uses the mixed
//! recurrence
//!
//! ```text
//! u_j  = (r_j - s·x_j) / c
//! x'_j = c·x_j - s·u_j
//! ```
//!
//! where the second line consumes the freshly computed `u_j`. This ordering is
//! what gives the row-wise downdate its mixed forward/backward error bound;
//! the pure hyperbolic form `x'_j = (x_j - s·r_j)/c` is available for
//! experiments only.
//!
//! Each generator or application adds its multiplication-equivalents to the
//! caller's [`Tally`].

use serde::{Deserialize, Serialize};

use crate::error::{DowndateStage, Error, Result};
use crate::tally::Tally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationKind {
    PlaneUpdate,
    MixedDowndate,
}

/// One rotation `(c, s)`. For both kinds `c² + s² = 1`; for downdates
/// `c = u_kk / r_kk > 0` and `s = x_k / r_kk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParam {
    pub kind: RotationKind,
    pub c: f64,
    pub s: f64,
}

impl RotationParam {
    pub const IDENTITY_PLANE: RotationParam =
        RotationParam { kind: RotationKind::PlaneUpdate, c: 1.0, s: 0.0 };
    pub const IDENTITY_DOWNDATE: RotationParam =
        RotationParam { kind: RotationKind::MixedDowndate, c: 1.0, s: 0.0 };

    pub fn is_identity(&self) -> bool {
        self.c == 1.0 && self.s == 0.0
    }

    fn expect(&self, kind: RotationKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: match kind {
                    RotationKind::PlaneUpdate => "PlaneUpdate",
                    RotationKind::MixedDowndate => "MixedDowndate",
                },
            });
        }
        if kind == RotationKind::MixedDowndate && !(self.c > 0.0) {
            return Err(Error::InvalidOption(format!(
                "downdate rotation needs c > 0, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Generates the plane rotation that maps `(a, b)` to `(r, 0)`.
/// `a` is the current diagonal and is expected to be nonnegative.
pub fn gen_plane(a: f64, b: f64, tally: &mut Tally) -> Result<(RotationParam, f64)> {
    if b == 0.0 && a > 0.0 {
        return Ok((RotationParam::IDENTITY_PLANE, a));
    }
    // a², b², sqrt, two divisions
    tally.add(5);
    let r = (a * a + b * b).sqrt();
    if !(r > 0.0) {
        return Err(Error::ZeroPivot("plane rotation of a zero pair"));
    }
    Ok((RotationParam { kind: RotationKind::PlaneUpdate, c: a / r, s: b / r }, r))
}

/// Applies a plane rotation to the pair `(t, v)`:
/// `t' = c·t + s·v`, `v' = c·v - s·t`.
#[inline]
pub fn apply_plane(rot: &RotationParam, t: f64, v: f64, tally: &mut Tally) -> Result<(f64, f64)> {
    rot.expect(RotationKind::PlaneUpdate)?;
    tally.add(4);
    Ok((rot.c * t + rot.s * v, rot.c * v - rot.s * t))
}

/// Generates the downdating rotation that removes `x_k` from the diagonal
/// `r_kk`, returning `u_kk = √(r_kk² - x_k²)`.
///
/// `|x_k| ≥ r_kk` means `RᵀR - xxᵀ` is not positive definite and is reported as
/// [`Error::DowndateBreakdown`] (equality included: a zero diagonal would
/// poison every later division).
pub fn gen_downdate(r_kk: f64, x_k: f64, tally: &mut Tally) -> Result<(RotationParam, f64)> {
    if !(r_kk > 0.0) {
        return Err(Error::ZeroPivot("downdate of a nonpositive diagonal"));
    }
    if x_k == 0.0 {
        return Ok((RotationParam::IDENTITY_DOWNDATE, r_kk));
    }
    if !(x_k.abs() < r_kk) {
        return Err(Error::DowndateBreakdown { row: 0, stage: DowndateStage::Standalone });
    }
    // product, sqrt, two divisions
    tally.add(4);
    let u = ((r_kk - x_k) * (r_kk + x_k)).sqrt();
    if !(u > 0.0) {
        return Err(Error::DowndateBreakdown { row: 0, stage: DowndateStage::Standalone });
    }
    Ok((RotationParam { kind: RotationKind::MixedDowndate, c: u / r_kk, s: x_k / r_kk }, u))
}

/// Applies a downdating rotation in mixed form to `(r_j, x_j)`, returning
/// `(u_j, x'_j)`.
#[inline]
pub fn apply_downdate_mixed(
    rot: &RotationParam,
    r_j: f64,
    x_j: f64,
    tally: &mut Tally,
) -> Result<(f64, f64)> {
    rot.expect(RotationKind::MixedDowndate)?;
    tally.add(4);
    let u = (r_j - rot.s * x_j) / rot.c;
    Ok((u, rot.c * x_j - rot.s * u))
}

/// Hyperbolic form of the downdate: `x'_j` is formed from the old `r_j`.
/// Algebraically equal to [`apply_downdate_mixed`] but without its error
/// bound; kept for experiments.
#[inline]
pub fn apply_downdate_hyperbolic(
    rot: &RotationParam,
    r_j: f64,
    x_j: f64,
    tally: &mut Tally,
) -> Result<(f64, f64)> {
    rot.expect(RotationKind::MixedDowndate)?;
    tally.add(4);
    Ok(((r_j - rot.s * x_j) / rot.c, (x_j - rot.s * r_j) / rot.c))
}

/// Transpose of [`apply_plane`].
#[inline]
pub fn invert_plane(rot: &RotationParam, t2: f64, v2: f64, tally: &mut Tally) -> Result<(f64, f64)> {
    rot.expect(RotationKind::PlaneUpdate)?;
    tally.add(4);
    Ok((rot.c * t2 - rot.s * v2, rot.s * t2 + rot.c * v2))
}

/// Algebraic inverse of [`apply_downdate_mixed`]: recovers `(r_j, x_j)` from
/// `(u_j, x'_j)`.
#[inline]
pub fn invert_downdate(
    rot: &RotationParam,
    u_j: f64,
    x2_j: f64,
    tally: &mut Tally,
) -> Result<(f64, f64)> {
    rot.expect(RotationKind::MixedDowndate)?;
    tally.add(4);
    let x = (x2_j + rot.s * u_j) / rot.c;
    Ok((rot.c * u_j + rot.s * x, x))
}

/// Row-wise Cholesky update of an upper-triangular `R` (packed as dense rows
/// `r[i][j]`, `j ≥ i`) by `x`, returning `U` with `UᵀU = RᵀR + xxᵀ`.
pub fn cholesky_update(r: &[Vec<f64>], x: &[f64], tally: &mut Tally) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut x = x.to_vec();
    let mut u = r.to_vec();
    for k in 0..n {
        let (rot, diag) = gen_plane(u[k][k], x[k], tally)?;
        u[k][k] = diag;
        x[k] = 0.0;
        for j in k + 1..n {
            let (t, v) = apply_plane(&rot, u[k][j], x[j], tally)?;
            u[k][j] = t;
            x[j] = v;
        }
    }
    Ok(u)
}

/// Row-wise Cholesky downdate, returning `U` with `UᵀU = RᵀR - xxᵀ`.
pub fn cholesky_downdate(r: &[Vec<f64>], x: &[f64], tally: &mut Tally) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut x = x.to_vec();
    let mut u = r.to_vec();
    for k in 0..n {
        let (rot, diag) = gen_downdate(u[k][k], x[k], tally).map_err(|e| match e {
            Error::DowndateBreakdown { stage, .. } => Error::DowndateBreakdown { row: k, stage },
            other => other,
        })?;
        u[k][k] = diag;
        x[k] = 0.0;
        for j in k + 1..n {
            let (t, v) = apply_downdate_mixed(&rot, u[k][j], x[j], tally)?;
            u[k][j] = t;
            x[j] = v;
        }
    }
    Ok(u)
}
