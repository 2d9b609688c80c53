//! Instrumentation: multiplication counts and working-storage audits.
//!
//! Counting convention: every multiplication, division and square root is one
//! multiplication-equivalent. Additions are not counted.

use std::ops::AddAssign;

/// Running count of multiplication-equivalents. Owned by the caller and
/// threaded through every counted operation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tally(pub u64);

impl Tally {
    pub fn new() -> Self {
        Tally(0)
    }

    #[inline]
    pub fn add(&mut self, count: u64) {
        self.0 += count;
    }

    #[inline]
    pub fn add_usize(&mut self, count: usize) {
        self.0 += count as u64;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

impl AddAssign<u64> for Tally {
    fn add_assign(&mut self, rhs: u64) {
        self.0 += rhs;
    }
}

/// Tracks the number of `f64` words of working storage currently held by an
/// algorithm and the high-water mark. Input data is not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StorageMeter {
    current: usize,
    peak: usize,
}

impl StorageMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, words: usize) {
        self.current += words;
        self.peak = self.peak.max(self.current);
    }

    pub fn free(&mut self, words: usize) {
        debug_assert!(words <= self.current, "freeing more than allocated");
        self.current -= words;
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}
