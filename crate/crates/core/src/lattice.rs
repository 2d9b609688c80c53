//! The BBH factorization lattice.
//!
//! For an `m × n` Toeplitz matrix `A` the Cholesky factor `R` of `AᵀA + αI`
//! satisfies, with `R_t` the leading and `R_b` the trailing `(n-1) × (n-1)`
//! blocks of `R`,
//!
//! ```text
//! R_bᵀR_b = R_tᵀR_t + yyᵀ - uuᵀ - z̄z̄ᵀ
//! ```
//!
//! where `y` and `z̄` are border vectors of `A` and `uᵀ` is the first row of
//! `R` without its diagonal. Row `k` of `R_b` is row `k + 1` of `R`, and row
//! `k + 1` of `R_t` is that row without its last element, so one update and
//! two downdates per row generate all of `R` in `7n² + O(n)` multiplications
//! (plus `mn` for the first row).
//!
//! Rows are zero based throughout: row `k` of `R` spans columns `k..n`.

use crate::error::{DowndateStage, Error, Result};
use crate::rotations::{
    apply_downdate_hyperbolic, apply_downdate_mixed, apply_plane, gen_downdate, gen_plane,
    invert_downdate, invert_plane, RotationKind, RotationParam,
};
use crate::tally::Tally;
use crate::toeplitz::ToeplitzSpec;

/// Formula used for the two downdating rotations of each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DowndateVariant {
    /// Mixed recurrence; the variant covered by the weak stability bound.
    #[default]
    MixedC,
    /// Pure hyperbolic rotation. Unsupported by the stability bound.
    PureHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    /// Shift `α ≥ 0`: the factorization is of `AᵀA + αI`.
    pub alpha: f64,
    pub variant: DowndateVariant,
    /// Keep the full upper triangle in the result.
    pub keep_dense: bool,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { alpha: 0.0, variant: DowndateVariant::MixedC, keep_dense: true }
    }
}

impl FactorOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        FactorOptions { alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidOption(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// The three carried vectors, in the order their rotations are applied within
/// a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carried {
    /// `y`, folded in with a plane rotation.
    Y,
    /// `u`, removed with a downdate.
    U,
    /// `z̄`, removed with a downdate.
    Zbar,
}

/// Application order within one lattice step. The update runs first so the
/// diagonal is as large as possible before anything is subtracted.
pub const STEP_ORDER: [Carried; 3] = [Carried::Y, Carried::U, Carried::Zbar];

/// Computes the first row of `R`: `r₁₁² = a₀² + zᵀz + α` and
/// `r₁₁ u = a₀ y + A₋₁ᵀ z`, the latter by direct Toeplitz summation.
pub fn first_row(t: &ToeplitzSpec, alpha: f64, tally: &mut Tally) -> Result<(f64, Vec<f64>)> {
    let (m, n) = (t.rows(), t.cols());
    let col = t.first_col();
    let row = t.first_row();
    let a0 = row[0];

    let mut radicand = a0 * a0 + alpha;
    for z in &col[1..] {
        radicand += z * z;
    }
    tally.add_usize(m + 1);
    if !(radicand > 0.0) {
        return Err(Error::ZeroPivot("first column is zero"));
    }
    let r11 = radicand.sqrt();

    // (A₋₁ᵀ z)_j = Σ_i a_{j-i} z_i with z_i = col[i + 1].
    let u = (0..n - 1)
        .map(|j| {
            let mut acc = a0 * row[j + 1];
            for i in 0..m - 1 {
                acc += t.diag(j as isize - i as isize) * col[i + 1];
            }
            acc / r11
        })
        .collect();
    tally.add_usize((n - 1) * (m + 1));
    Ok((r11, u))
}

/// Working state of the lattice between steps: the current row `k` of `R`
/// and the carried vectors `y⁽ᵏ⁾`, `u⁽ᵏ⁾`, `z̄⁽ᵏ⁾`. Uses `4n` words.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    k: usize,
    /// Row `k` of `R` lives in `row[k..n]`; earlier positions are dead.
    row: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
    zbar: Vec<f64>,
}

impl LatticeState {
    /// Sets up the lattice at row 0 (requires `n ≥ 2`).
    pub fn new(t: &ToeplitzSpec, alpha: f64, tally: &mut Tally) -> Result<Self> {
        let n = t.cols();
        let parts = t.partition_vectors()?;
        let (r11, u) = first_row(t, alpha, tally)?;
        let mut row = Vec::with_capacity(n);
        row.push(r11);
        row.extend_from_slice(&u);
        Ok(LatticeState { k: 0, row, y: parts.y, u, zbar: parts.zbar })
    }

    pub fn order(&self) -> usize {
        self.row.len()
    }

    /// Index of the row of `R` currently held.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Row `k` of `R`, columns `k..n`.
    pub fn current_row(&self) -> &[f64] {
        &self.row[self.k..]
    }

    pub fn carried(&self, which: Carried) -> &[f64] {
        match which {
            Carried::Y => &self.y,
            Carried::U => &self.u,
            Carried::Zbar => &self.zbar,
        }
    }

    /// Storage held by the state, in words.
    pub fn words(&self) -> usize {
        self.row.len() + self.y.len() + self.u.len() + self.zbar.len()
    }

    pub fn is_done(&self) -> bool {
        self.k + 1 >= self.row.len()
    }

    /// Advances from row `k` to row `k + 1` of `R`, returning the three
    /// rotations in application order.
    pub fn step(&mut self, variant: DowndateVariant, tally: &mut Tally) -> Result<[RotationParam; 3]> {
        let n = self.row.len();
        let k = self.k;
        if k + 1 >= n {
            return Err(Error::Shape("lattice already produced every row".into()));
        }
        // Row k of R_t occupies row[k..n-1]; row[n-1] is r_{k,n}, outside R_t.
        let mut rots = [RotationParam::IDENTITY_PLANE; 3];
        for (slot, which) in STEP_ORDER.iter().enumerate() {
            let LatticeState { row, y, u, zbar, .. } = self;
            let rt = &mut row[..n - 1];
            let carried = match which {
                Carried::Y => y,
                Carried::U => u,
                Carried::Zbar => zbar,
            };
            rots[slot] = match which {
                Carried::Y => {
                    let (rot, diag) = gen_plane(rt[k], carried[k], tally)?;
                    rt[k] = diag;
                    for j in k + 1..n - 1 {
                        (rt[j], carried[j]) = apply_plane(&rot, rt[j], carried[j], tally)?;
                    }
                    rot
                }
                Carried::U | Carried::Zbar => {
                    let stage = if *which == Carried::U {
                        DowndateStage::FirstRow
                    } else {
                        DowndateStage::LastRow
                    };
                    let (rot, diag) = gen_downdate(rt[k], carried[k], tally).map_err(|e| match e {
                        Error::DowndateBreakdown { .. } => Error::DowndateBreakdown { row: k + 1, stage },
                        other => other,
                    })?;
                    rt[k] = diag;
                    match variant {
                        DowndateVariant::MixedC => {
                            for j in k + 1..n - 1 {
                                (rt[j], carried[j]) = apply_downdate_mixed(&rot, rt[j], carried[j], tally)?;
                            }
                        }
                        DowndateVariant::PureHyperbolic => {
                            for j in k + 1..n - 1 {
                                (rt[j], carried[j]) =
                                    apply_downdate_hyperbolic(&rot, rt[j], carried[j], tally)?;
                            }
                        }
                    }
                    rot
                }
            };
            carried[k] = 0.0;
        }
        // Row k of R_b is row k+1 of R, shifted one column to the right.
        self.row.copy_within(k..n - 1, k + 1);
        self.row[k] = 0.0;
        self.k = k + 1;
        Ok(rots)
    }
}

/// Saved rotations of a factorization: enough to regenerate the rows of `R`
/// in reverse order with `O(n)` storage.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationLog {
    pub n: usize,
    /// Three rotations per step `k = 0..n-1`, in [`STEP_ORDER`].
    pub rotations: Vec<RotationParam>,
    pub final_y: Vec<f64>,
    pub final_u: Vec<f64>,
    pub final_zbar: Vec<f64>,
    /// `(r_{0,n-1}, …, r_{n-1,n-1})`: the last column of `R`, which the
    /// reverse pass cannot reconstruct.
    pub last_column: Vec<f64>,
}

impl RotationLog {
    /// Storage held by the log, in words (each rotation counts two).
    pub fn words(&self) -> usize {
        2 * self.rotations.len()
            + self.final_y.len()
            + self.final_u.len()
            + self.final_zbar.len()
            + self.last_column.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        let steps = n.saturating_sub(1);
        if n == 0
            || self.rotations.len() != 3 * steps
            || self.last_column.len() != n
            || [&self.final_y, &self.final_u, &self.final_zbar].iter().any(|v| v.len() != steps)
        {
            return Err(Error::Shape("incomplete rotation log".into()));
        }
        if !(self.last_column[n - 1] > 0.0) {
            return Err(Error::Shape("rotation log has a nonpositive final diagonal".into()));
        }
        Ok(())
    }
}

/// Packed upper-triangular matrix: row `k` holds columns `k..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    n: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn zeros(n: usize) -> Self {
        UpperTriangular { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Self::zeros(n);
        for k in 0..n {
            r.row_mut(k)[0] = 1.0;
        }
        r
    }

    /// Builds from rows where row `k` has length `n - k`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut r = Self::zeros(n);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n - k {
                return Err(Error::Shape(format!("row {k} has length {}, expected {}", row.len(), n - k)));
            }
            r.row_mut(k).copy_from_slice(row);
        }
        Ok(r)
    }

    #[inline]
    fn offset(&self, k: usize) -> usize {
        k * self.n - k * k.saturating_sub(1) / 2
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Row `k`, columns `k..n`.
    pub fn row(&self, k: usize) -> &[f64] {
        let start = self.offset(k);
        &self.data[start..start + self.n - k]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let start = self.offset(k);
        let len = self.n - k;
        &mut self.data[start..start + len]
    }

    /// Entry `(i, j)`; zero below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j < i {
            0.0
        } else {
            self.row(i)[j - i]
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |k| self.row(k))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Storage in words.
    pub fn words(&self) -> usize {
        self.data.len()
    }
}

/// Result of a factorization: the upper-triangular `R` with positive diagonal
/// (when kept) and the rotation log.
#[derive(Debug, Clone, PartialEq)]
pub struct RFactor {
    pub n: usize,
    pub rows: Option<UpperTriangular>,
    pub log: RotationLog,
}

impl RFactor {
    pub fn dense(&self) -> Option<&UpperTriangular> {
        self.rows.as_ref()
    }
}

/// Factorizes `AᵀA + αI = RᵀR`, emitting row `k` of `R` (columns `k..n`) as
/// soon as it is known. Working storage is `O(n)` words beyond the log.
pub fn factor_streaming<F>(
    t: &ToeplitzSpec,
    opts: &FactorOptions,
    tally: &mut Tally,
    mut emit: F,
) -> Result<RotationLog>
where
    F: FnMut(usize, &[f64]),
{
    opts.validate()?;
    let n = t.cols();
    if n == 1 {
        let (r11, _) = first_row(t, opts.alpha, tally)?;
        emit(0, &[r11]);
        return Ok(RotationLog {
            n,
            rotations: Vec::new(),
            final_y: Vec::new(),
            final_u: Vec::new(),
            final_zbar: Vec::new(),
            last_column: vec![r11],
        });
    }
    let mut state = LatticeState::new(t, opts.alpha, tally)?;
    let mut rotations = Vec::with_capacity(3 * (n - 1));
    let mut last_column = Vec::with_capacity(n);
    emit(0, state.current_row());
    last_column.push(state.row[n - 1]);
    while !state.is_done() {
        rotations.extend_from_slice(&state.step(opts.variant, tally)?);
        emit(state.k, state.current_row());
        last_column.push(state.row[n - 1]);
    }
    Ok(RotationLog {
        n,
        rotations,
        final_y: state.y,
        final_u: state.u,
        final_zbar: state.zbar,
        last_column,
    })
}

/// Factorizes `AᵀA + αI = RᵀR`, keeping the full triangle when
/// `opts.keep_dense` is set.
pub fn factor(t: &ToeplitzSpec, opts: &FactorOptions, tally: &mut Tally) -> Result<RFactor> {
    let n = t.cols();
    let mut dense = opts.keep_dense.then(|| UpperTriangular::zeros(n));
    let log = factor_streaming(t, opts, tally, |k, row| {
        if let Some(d) = dense.as_mut() {
            d.row_mut(k).copy_from_slice(row);
        }
    })?;
    Ok(RFactor { n, rows: dense, log })
}

/// Regenerates the rows of `R` in reverse order `n-1, …, 0` from a rotation
/// log by undoing each step's rotations (z̄-downdate, u-downdate, y-update).
///
/// The regenerated rows agree with the forward rows only up to rounding
/// amplified by the conditioning of `R`.
pub fn regenerate_reverse<F>(log: &RotationLog, tally: &mut Tally, mut emit: F) -> Result<()>
where
    F: FnMut(usize, &[f64]),
{
    log.validate()?;
    let n = log.n;
    let mut row = vec![0.0; n];
    row[n - 1] = log.last_column[n - 1];
    emit(n - 1, &row[n - 1..]);
    if n == 1 {
        return Ok(());
    }
    let mut y = log.final_y.clone();
    let mut u = log.final_u.clone();
    let mut zbar = log.final_zbar.clone();

    for k in (0..n - 1).rev() {
        // Row k+1 of R is row k of R_b: move it into R_t coordinates.
        row.copy_within(k + 1..n, k);
        let rots = &log.rotations[3 * k..3 * k + 3];
        for (which, rot) in STEP_ORDER.iter().zip(rots).rev() {
            let carried = match which {
                Carried::Y => &mut y,
                Carried::U => &mut u,
                Carried::Zbar => &mut zbar,
            };
            let rt = &mut row[..n - 1];
            match which {
                Carried::Y => {
                    for j in k..n - 1 {
                        (rt[j], carried[j]) = invert_plane(rot, rt[j], carried[j], tally)?;
                    }
                }
                Carried::U | Carried::Zbar => {
                    if rot.kind != RotationKind::MixedDowndate {
                        return Err(Error::KindMismatch { expected: "MixedDowndate" });
                    }
                    for j in k..n - 1 {
                        (rt[j], carried[j]) = invert_downdate(rot, rt[j], carried[j], tally)?;
                    }
                }
            }
        }
        row[n - 1] = log.last_column[k];
        emit(k, &row[k..]);
    }
    Ok(())
}
