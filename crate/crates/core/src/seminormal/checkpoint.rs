//! Reverse row generation by recursive forward recomputation.
//!
//! To produce rows `lo..hi` of `R` last-to-first from the lattice state at row
//! `lo`: advance a copy of the state to the midpoint, produce the upper half
//! in reverse from that copy, drop it, then produce the lower half from the
//! original state. Blocks of at most `block` rows are buffered and emitted
//! directly. Every row comes out of the same forward arithmetic as the
//! streaming factorization, so the rows are bitwise identical to it.
//!
//! With `L = ⌈log₂(n / block)⌉` levels this costs `O(n² L)` operations and
//! holds at most `L + 1` lattice states plus one buffered block.

use crate::error::{Error, Result};
use crate::lattice::{FactorOptions, LatticeState};
use crate::tally::{StorageMeter, Tally};
use crate::toeplitz::ToeplitzSpec;

/// Emits rows `n-1, …, 0` of the factor of `AᵀA + αI`.
pub fn checkpointed_reverse<F>(
    t: &ToeplitzSpec,
    opts: &FactorOptions,
    block: usize,
    tally: &mut Tally,
    meter: &mut StorageMeter,
    mut emit: F,
) -> Result<()>
where
    F: FnMut(usize, &[f64]),
{
    opts.validate()?;
    if block == 0 {
        return Err(Error::InvalidOption("checkpoint block must be at least 1".into()));
    }
    let n = t.cols();
    if n == 1 {
        let (r11, _) = crate::lattice::first_row(t, opts.alpha, tally)?;
        emit(0, &[r11]);
        return Ok(());
    }
    let state = LatticeState::new(t, opts.alpha, tally)?;
    let mut sweep = Sweep { opts, block, tally, meter, emit: &mut emit };
    sweep.meter.alloc(state.words());
    sweep.reverse(state, n)
}

struct Sweep<'a, F> {
    opts: &'a FactorOptions,
    block: usize,
    tally: &'a mut Tally,
    meter: &'a mut StorageMeter,
    emit: &'a mut F,
}

impl<F: FnMut(usize, &[f64])> Sweep<'_, F> {
    /// Emits rows `state.k()..hi` in reverse, consuming `state` (whose words
    /// are already on the meter).
    fn reverse(&mut self, mut state: LatticeState, hi: usize) -> Result<()> {
        let lo = state.k();
        let state_words = state.words();
        if hi - lo <= self.block {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(hi - lo);
            let mut buffered = 0;
            loop {
                let row = state.current_row().to_vec();
                buffered += row.len();
                self.meter.alloc(row.len());
                rows.push(row);
                if state.k() + 1 == hi {
                    break;
                }
                state.step(self.opts.variant, self.tally)?;
            }
            for (i, row) in rows.iter().enumerate().rev() {
                (self.emit)(lo + i, row);
            }
            self.meter.free(buffered + state_words);
            return Ok(());
        }
        let mid = lo + (hi - lo) / 2;
        let mut upper = state.clone();
        self.meter.alloc(state_words);
        while upper.k() < mid {
            upper.step(self.opts.variant, self.tally)?;
        }
        self.reverse(upper, hi)?;
        self.reverse(state, mid)
    }
}
