//! Semi-normal equation solvers built on the lattice factor.
//!
//! `Ax = b` (or `min ‖Ax - b‖₂`) is solved as `R̃ᵀR̃x = Aᵀb` with two triangular
//! sweeps: `R̃ᵀw = d` consumes the rows of `R̃` first to last, `R̃x = w` consumes
//! them last to first. Three storage strategies supply the rows:
//!
//! * [`StorageMode::Dense`] keeps all of `R̃` (`n²/2` words).
//! * [`StorageMode::RotationReverse`] fuses the forward sweep with the
//!   factorization and regenerates rows backwards from the rotation log
//!   (`O(n)` words; the regenerated rows differ from `R̃` by rounding).
//! * [`StorageMode::Checkpointed`] regenerates rows backwards by recursive
//!   forward recomputation (`O(n log n)` words; rows bitwise equal to `R̃`).
//!
//! All modes share one substitution order, so Dense and Checkpointed solves
//! agree bitwise.

mod checkpoint;

pub use checkpoint::checkpointed_reverse;

use std::borrow::Cow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{factor, factor_streaming, regenerate_reverse, FactorOptions, RFactor, RotationLog, UpperTriangular};
use crate::tally::{StorageMeter, Tally};
use crate::toeplitz::ToeplitzSpec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum StorageMode {
    #[default]
    Dense,
    RotationReverse,
    Checkpointed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub alpha: f64,
    pub refine_steps: usize,
    pub storage_mode: StorageMode,
    /// Rows buffered directly at the bottom of the checkpoint recursion.
    pub checkpoint_block: usize,
    /// Compute `κ₁(R̃)` (an `O(n³)` explicit inversion) for the report.
    pub compute_cond1: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            alpha: 0.0,
            refine_steps: 0,
            storage_mode: StorageMode::Dense,
            checkpoint_block: 8,
            compute_cond1: false,
        }
    }
}

impl SolveOptions {
    fn factor_options(&self, keep_dense: bool) -> FactorOptions {
        FactorOptions { alpha: self.alpha, keep_dense, ..FactorOptions::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.checkpoint_block == 0 {
            return Err(Error::InvalidOption("checkpoint block must be at least 1".into()));
        }
        self.factor_options(false).validate()
    }
}

/// Normalized error measures `e1`, `e2`, `e3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMetrics {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `‖Ax̃ - b‖₂`.
    #[serde(rename = "residual")]
    pub residual_2norm: f64,
    /// `‖Aᵀ(Ax̃ - b)‖₂`.
    #[serde(rename = "normal_residual")]
    pub normal_residual_2norm: f64,
    /// Multiplications spent by the solve (factorization, `Aᵀb`, sweeps and
    /// refinement); residual reporting is not counted.
    pub tally: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cond1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<StabilityMetrics>,
    /// `‖b - Ax‖₂` before and after each refinement step.
    #[serde(skip)]
    pub refinement_history: Vec<f64>,
    /// Peak working storage in words, excluding inputs and outputs.
    #[serde(skip)]
    pub peak_words: usize,
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Forward substitution for `R̃ᵀw = d`, fed one row of `R̃` at a time.
///
/// Column-oriented: when row `k` arrives, `w_k` is final and `r_{k,j} w_k` is
/// folded into the pending entries `j > k`. The summation order is therefore
/// fixed by the row order.
#[derive(Debug, Clone)]
pub struct ForwardSweep {
    acc: Vec<f64>,
    next: usize,
}

impl ForwardSweep {
    pub fn new(d: &[f64]) -> Self {
        ForwardSweep { acc: d.to_vec(), next: 0 }
    }

    pub fn push_row(&mut self, k: usize, row: &[f64], tally: &mut Tally) -> Result<()> {
        debug_assert_eq!(k, self.next, "rows must arrive in order");
        let diag = row[0];
        if diag == 0.0 || !diag.is_finite() {
            return Err(Error::SingularTriangular { index: k });
        }
        let wk = self.acc[k] / diag;
        self.acc[k] = wk;
        for (a, r) in self.acc[k + 1..].iter_mut().zip(&row[1..]) {
            *a -= r * wk;
        }
        tally.add_usize(row.len());
        self.next = k + 1;
        Ok(())
    }

    pub fn finish(self) -> Vec<f64> {
        debug_assert_eq!(self.next, self.acc.len());
        self.acc
    }
}

/// Back substitution for `R̃x = w`, fed rows of `R̃` last to first.
#[derive(Debug, Clone)]
pub struct BackSweep {
    x: Vec<f64>,
}

impl BackSweep {
    pub fn new(w: Vec<f64>) -> Self {
        BackSweep { x: w }
    }

    pub fn push_row(&mut self, k: usize, row: &[f64], tally: &mut Tally) -> Result<()> {
        let diag = row[0];
        if diag == 0.0 || !diag.is_finite() {
            return Err(Error::SingularTriangular { index: k });
        }
        let mut v = self.x[k];
        for (r, xj) in row[1..].iter().zip(&self.x[k + 1..]) {
            v -= r * xj;
        }
        self.x[k] = v / diag;
        tally.add_usize(row.len());
        Ok(())
    }

    pub fn finish(self) -> Vec<f64> {
        self.x
    }
}

enum Backing<'a> {
    Dense(Cow<'a, UpperTriangular>),
    Log(RotationLog),
    Recompute,
}

/// Solves `R̃ᵀR̃ v = d` repeatedly with rows supplied by one storage strategy.
struct NormalSolver<'a> {
    t: &'a ToeplitzSpec,
    fopts: FactorOptions,
    block: usize,
    backing: Backing<'a>,
    meter: StorageMeter,
}

/// Runs `factor_streaming` while feeding each row to `sink`, keeping the first
/// sink error.
fn stream_rows<S>(
    t: &ToeplitzSpec,
    fopts: &FactorOptions,
    tally: &mut Tally,
    mut sink: S,
) -> Result<RotationLog>
where
    S: FnMut(usize, &[f64], &mut Tally) -> Result<()>,
{
    let mut sink_tally = Tally::new();
    let mut failure = None;
    let log = factor_streaming(t, fopts, tally, |k, row| {
        if failure.is_none() {
            if let Err(e) = sink(k, row, &mut sink_tally) {
                failure = Some(e);
            }
        }
    })?;
    *tally += sink_tally.get();
    match failure {
        Some(e) => Err(e),
        None => Ok(log),
    }
}

impl<'a> NormalSolver<'a> {
    /// Factorizes and runs the first forward sweep on `d`, fused with the
    /// factorization in the streaming modes. Returns the solver and `w`.
    fn prepare(
        t: &'a ToeplitzSpec,
        opts: &SolveOptions,
        d: &[f64],
        tally: &mut Tally,
    ) -> Result<(Self, Vec<f64>)> {
        let n = t.cols();
        let mut meter = StorageMeter::new();
        let lattice_words = 4 * n;
        match opts.storage_mode {
            StorageMode::Dense => {
                let fopts = opts.factor_options(true);
                meter.alloc(lattice_words);
                let f = factor(t, &fopts, tally)?;
                let rows = f.rows.expect("dense factor requested");
                meter.alloc(rows.words() + f.log.words());
                meter.free(lattice_words);
                let mut solver = NormalSolver {
                    t,
                    fopts,
                    block: opts.checkpoint_block,
                    backing: Backing::Dense(Cow::Owned(rows)),
                    meter,
                };
                let w = solver.forward(d, tally)?;
                Ok((solver, w))
            }
            StorageMode::RotationReverse | StorageMode::Checkpointed => {
                let fopts = opts.factor_options(false);
                meter.alloc(lattice_words + n);
                let mut sweep = ForwardSweep::new(d);
                let log = stream_rows(t, &fopts, tally, |k, row, tl| sweep.push_row(k, row, tl))?;
                meter.free(lattice_words);
                let backing = if opts.storage_mode == StorageMode::RotationReverse {
                    meter.alloc(log.words());
                    Backing::Log(log)
                } else {
                    Backing::Recompute
                };
                let solver = NormalSolver { t, fopts, block: opts.checkpoint_block, backing, meter };
                Ok((solver, sweep.finish()))
            }
        }
    }

    fn from_dense(t: &'a ToeplitzSpec, alpha: f64, rows: &'a UpperTriangular) -> Self {
        let mut meter = StorageMeter::new();
        meter.alloc(rows.words());
        NormalSolver {
            t,
            fopts: FactorOptions { alpha, keep_dense: true, ..FactorOptions::default() },
            block: 8,
            backing: Backing::Dense(Cow::Borrowed(rows)),
            meter,
        }
    }

    /// `w` with `R̃ᵀw = d`.
    fn forward(&mut self, d: &[f64], tally: &mut Tally) -> Result<Vec<f64>> {
        let mut sweep = ForwardSweep::new(d);
        self.meter.alloc(d.len());
        match &self.backing {
            Backing::Dense(rows) => {
                for (k, row) in rows.rows().enumerate() {
                    sweep.push_row(k, row, tally)?;
                }
            }
            Backing::Log(_) | Backing::Recompute => {
                let n = self.t.cols();
                self.meter.alloc(4 * n);
                stream_rows(self.t, &self.fopts, tally, |k, row, tl| sweep.push_row(k, row, tl))?;
                self.meter.free(4 * n);
            }
        }
        self.meter.free(d.len());
        Ok(sweep.finish())
    }

    /// `x` with `R̃x = w`.
    fn backward(&mut self, w: Vec<f64>, tally: &mut Tally) -> Result<Vec<f64>> {
        let n = w.len();
        self.meter.alloc(n);
        let mut sweep = BackSweep::new(w);
        let mut sweep_tally = Tally::new();
        let mut failure = None;
        let mut sink = |k: usize, row: &[f64]| {
            if failure.is_none() {
                if let Err(e) = sweep.push_row(k, row, &mut sweep_tally) {
                    failure = Some(e);
                }
            }
        };
        match &self.backing {
            Backing::Dense(rows) => {
                for k in (0..n).rev() {
                    sink(k, rows.row(k));
                }
            }
            Backing::Log(log) => {
                self.meter.alloc(4 * n);
                regenerate_reverse(log, tally, &mut sink)?;
                self.meter.free(4 * n);
            }
            Backing::Recompute => {
                checkpointed_reverse(self.t, &self.fopts, self.block, tally, &mut self.meter, &mut sink)?;
            }
        }
        *tally += sweep_tally.get();
        self.meter.free(n);
        match failure {
            Some(e) => Err(e),
            None => Ok(sweep.finish()),
        }
    }

    fn solve(&mut self, d: &[f64], tally: &mut Tally) -> Result<Vec<f64>> {
        let w = self.forward(d, tally)?;
        self.backward(w, tally)
    }
}

/// Refinement loop shared by the solvers: `r = b - Ax`, `R̃ᵀR̃δ = Aᵀr`,
/// `x ← x + δ`, with residuals in working precision. Returns the history of
/// `‖b - Ax‖₂`, starting with the initial iterate.
fn refine(
    t: &ToeplitzSpec,
    b: &[f64],
    x: &mut [f64],
    solver: &mut NormalSolver<'_>,
    steps: usize,
    tally: &mut Tally,
) -> Result<Vec<f64>> {
    let mut history = Vec::with_capacity(steps + 1);
    let mut r = residual(t, b, x, tally)?;
    history.push(norm2(&r));
    for _ in 0..steps {
        let d = t.matvec_transpose(&r, tally)?;
        let delta = solver.solve(&d, tally)?;
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        r = residual(t, b, x, tally)?;
        history.push(norm2(&r));
    }
    Ok(history)
}

/// `b - Ax`.
fn residual(t: &ToeplitzSpec, b: &[f64], x: &[f64], tally: &mut Tally) -> Result<Vec<f64>> {
    let ax = t.matvec(x, tally)?;
    Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
}

/// Iterative refinement of `x0` using a dense factor of the same `A` and `α`.
/// Returns the refined iterate and `‖b - Ax‖₂` before and after each step.
pub fn iterative_refinement(
    t: &ToeplitzSpec,
    b: &[f64],
    x0: &[f64],
    r: &RFactor,
    steps: usize,
    alpha: f64,
    tally: &mut Tally,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = r
        .rows
        .as_ref()
        .ok_or_else(|| Error::InvalidOption("iterative refinement needs a dense factor".into()))?;
    check_rhs(t, b)?;
    if x0.len() != t.cols() || rows.order() != t.cols() {
        return Err(Error::Shape("initial iterate or factor has the wrong order".into()));
    }
    let mut solver = NormalSolver::from_dense(t, alpha, rows);
    let mut x = x0.to_vec();
    let history = refine(t, b, &mut x, &mut solver, steps, tally)?;
    Ok((x, history))
}

fn check_rhs(t: &ToeplitzSpec, b: &[f64]) -> Result<()> {
    if b.len() != t.rows() {
        return Err(Error::Shape(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            t.rows()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

fn semi_normal(t: &ToeplitzSpec, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    check_rhs(t, b)?;
    let mut tally = Tally::new();
    let d = t.matvec_transpose(b, &mut tally)?;
    let (mut solver, w) = NormalSolver::prepare(t, opts, &d, &mut tally)?;
    let mut x = solver.backward(w, &mut tally)?;
    let refinement_history = if opts.refine_steps > 0 {
        refine(t, b, &mut x, &mut solver, opts.refine_steps, &mut tally)?
    } else {
        Vec::new()
    };

    let mut scratch = Tally::new();
    let r: Vec<f64> = residual(t, b, &x, &mut scratch)?.iter().map(|v| -v).collect();
    let atr = t.matvec_transpose(&r, &mut scratch)?;

    let cond1 = if opts.compute_cond1 {
        let dense_owned;
        let rows = match &solver.backing {
            Backing::Dense(rows) => rows.as_ref(),
            _ => {
                let f = factor(t, &opts.factor_options(true), &mut scratch)?;
                dense_owned = f.rows.expect("dense factor requested");
                &dense_owned
            }
        };
        Some(crate::oracles::cond1_triangular(&crate::oracles::DenseMatrix::from_upper(rows))?)
    } else {
        None
    };

    Ok(SolveReport {
        x,
        residual_2norm: norm2(&r),
        normal_residual_2norm: norm2(&atr),
        tally: tally.get(),
        cond1,
        metrics: None,
        refinement_history,
        peak_words: solver.meter.peak(),
    })
}

/// Solves the square system `Ax = b` through the semi-normal equations.
pub fn solve(t: &ToeplitzSpec, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    if !t.is_square() {
        return Err(Error::Shape(format!(
            "solve needs a square matrix, got {}x{}; use least_squares",
            t.rows(),
            t.cols()
        )));
    }
    semi_normal(t, b, opts)
}

/// Solves `min ‖Ax - b‖₂` for full column rank `A` (`m ≥ n`).
pub fn least_squares(t: &ToeplitzSpec, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    semi_normal(t, b, opts)
}

/// [`solve`] with `O(n)` working storage: the forward sweep runs alongside the
/// factorization and the back sweep alongside reverse regeneration.
pub fn solve_streaming(t: &ToeplitzSpec, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    let opts = SolveOptions { storage_mode: StorageMode::RotationReverse, ..*opts };
    solve(t, b, &opts)
}

/// `‖R̃′ - R̃‖₁ / ‖R̃‖₁` for the rows regenerated in reverse from the log of a
/// dense factorization.
pub fn regeneration_discrepancy(f: &RFactor) -> Result<f64> {
    let rows = f
        .rows
        .as_ref()
        .ok_or_else(|| Error::InvalidOption("discrepancy needs a dense factor".into()))?;
    let n = f.n;
    let mut col_diff = vec![0.0; n];
    let mut col_norm = vec![0.0; n];
    let mut tally = Tally::new();
    regenerate_reverse(&f.log, &mut tally, |k, row| {
        for (off, (a, b)) in row.iter().zip(rows.row(k)).enumerate() {
            col_diff[k + off] += (a - b).abs();
            col_norm[k + off] += b.abs();
        }
    })?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(max(&col_diff) / max(&col_norm))
}
