//! Seeded random Toeplitz ensembles.
//!
//! Generator: ChaCha20 seeded with `seed` (via `seed_from_u64`) and switched
//! to stream `index`, so each instance has its own independent stream and is
//! a pure function of `(seed, index)`. Uniforms are `(next_u64 >> 11) · 2⁻⁵³`
//! in `[0, 1)`; normals come from the Box–Muller transform on consecutive
//! uniform pairs `(u₁, u₂)`:
//!
//! ```text
//! ρ = √(-2 ln(1 - u₁)),  g₀ = ρ cos(2π u₂),  g₁ = ρ sin(2π u₂)
//! ```
//!
//! Draw order for a Toeplitz instance: the first column `(a₀, a₋₁, …)`, then
//! the first row without `a₀`, then the solution vector.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::tally::Tally;
use crate::toeplitz::{HankelSpec, ToeplitzSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    /// Row count; `None` means square.
    pub m: Option<usize>,
    pub mu: f64,
    pub sigma: f64,
    pub count: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn square(n: usize, mu_over_sigma: f64, count: usize, seed: u64) -> Self {
        EnsembleConfig { n, m: None, mu: mu_over_sigma, sigma: 1.0, count, seed }
    }

    pub fn rows(&self) -> usize {
        self.m.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() || !self.mu.is_finite() {
            return Err(Error::InvalidOption("ensemble needs finite mu and sigma > 0".into()));
        }
        if self.count == 0 || self.n == 0 || self.rows() < self.n {
            return Err(Error::InvalidOption("ensemble needs count >= 1 and m >= n >= 1".into()));
        }
        Ok(())
    }
}

/// Standard normal deviates from a ChaCha20 stream.
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NormalStream { rng, spare: None }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let rho = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(rho * theta.sin());
        rho * theta.cos()
    }
}

/// One random test problem with known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub t: ToeplitzSpec,
    pub x_true: Vec<f64>,
    pub b: Vec<f64>,
}

/// Toeplitz entries i.i.d. `N(μ, σ²)`, solution i.i.d. `N(0, 1)`, `b = Ax`.
pub fn gen_instance(cfg: &EnsembleConfig, index: u64) -> Result<Instance> {
    cfg.validate()?;
    let (m, n) = (cfg.rows(), cfg.n);
    let mut g = NormalStream::new(cfg.seed, index);
    let col: Vec<f64> = (0..m).map(|_| cfg.mu + cfg.sigma * g.normal()).collect();
    let mut row = Vec::with_capacity(n);
    row.push(col[0]);
    row.extend((1..n).map(|_| cfg.mu + cfg.sigma * g.normal()));
    let x_true: Vec<f64> = (0..n).map(|_| g.normal()).collect();
    let t = ToeplitzSpec::new(col, row)?;
    let b = t.matvec(&x_true, &mut Tally::new())?;
    Ok(Instance { t, x_true, b })
}

/// Like [`gen_instance`] but with `a₋₁ = a₀ = a₁`, so the leading 2 × 2
/// principal submatrix (and possibly others) is singular.
pub fn gen_singular_minor_instance(cfg: &EnsembleConfig, index: u64) -> Result<Instance> {
    let base = gen_instance(cfg, index)?;
    let mut col = base.t.first_col().to_vec();
    let mut row = base.t.first_row().to_vec();
    if col.len() > 1 {
        col[1] = col[0];
    }
    if row.len() > 1 {
        row[1] = row[0];
    }
    let t = ToeplitzSpec::new(col, row)?;
    let b = t.matvec(&base.x_true, &mut Tally::new())?;
    Ok(Instance { t, x_true: base.x_true, b })
}

/// A random Hankel system: anti-diagonals i.i.d. `N(μ, σ²)`, `b = Hx`.
pub fn gen_hankel_instance(cfg: &EnsembleConfig, index: u64) -> Result<(HankelSpec, Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let (m, n) = (cfg.rows(), cfg.n);
    let mut g = NormalStream::new(cfg.seed, index);
    let h: Vec<f64> = (0..m + n - 1).map(|_| cfg.mu + cfg.sigma * g.normal()).collect();
    let x_true: Vec<f64> = (0..n).map(|_| g.normal()).collect();
    let hs = HankelSpec::from_sequence(m, n, &h)?;
    let b = (0..m)
        .map(|i| (0..n).map(|j| hs.get(i, j) * x_true[j]).sum())
        .collect();
    Ok((hs, x_true, b))
}

/// SplitMix64 finalizer, used to derive per-cell seeds.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
