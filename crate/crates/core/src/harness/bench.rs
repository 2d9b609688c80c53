//! Random-ensemble benchmark: one row of metrics per instance and a median
//! row per cell, as CSV or JSON.
//!
//! Each cell `(n, μ/σ)` draws its instances from seed
//! `mix_seed(seed ^ mix_seed(n ^ bits(μ/σ)))`, stream = instance index, so a
//! cell's instances do not depend on the rest of the grid. Instances run in
//! parallel but rows are always ordered by cell, then index.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{gen_instance, gen_singular_minor_instance, mix_seed, EnsembleConfig, Instance};
use super::metrics::compute_metrics;
use crate::error::Result;
use crate::lattice::{factor, FactorOptions};
use crate::seminormal::{BackSweep, ForwardSweep};
use crate::tally::Tally;
use crate::UNIT_ROUNDOFF;

const SINGULAR_TAG: u64 = 0x5349_4E47_4D49_4E52;

/// The instance families the benchmark can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    /// Random entries with `a₋₁ = a₀ = a₁`.
    SingularMinors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub mu_sigmas: Vec<f64>,
    pub count: usize,
    pub seed: u64,
    /// Also run the singular-principal-submatrix family at each `n` (μ/σ = 0).
    pub singular_family: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub n: usize,
    pub mu_sigma: f64,
    pub family: Family,
    pub seed: u64,
    pub index: u64,
    pub cond1: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e3c: f64,
    pub tally: u64,
    pub status: String,
}

impl MetricsRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(n: usize, mu_sigma: f64, family: Family, seed: u64, index: u64, why: String) -> Self {
        MetricsRow {
            n,
            mu_sigma,
            family,
            seed,
            index,
            cond1: f64::NAN,
            e1: f64::NAN,
            e2: f64::NAN,
            e3: f64::NAN,
            e3c: f64::NAN,
            tally: 0,
            status: why,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub note: &'static str,
    pub rows: Vec<MetricsRow>,
    pub medians: Vec<MetricsRow>,
}

pub const REPORT_NOTE: &str = "normalized errors e1..e3c are compared as order-of-magnitude bands \
(e1 <= 10n, median e2 <= 10, median e3 <= 10, median e3/e3c <= 20 where cond1^2*eps <= 0.01); \
eps = 2^-53";

/// Seed used for the instances of one cell.
pub fn cell_seed(seed: u64, n: usize, mu_sigma: f64, family: Family) -> u64 {
    let tag = match family {
        Family::Random => 0,
        Family::SingularMinors => SINGULAR_TAG,
    };
    mix_seed(seed ^ mix_seed(n as u64 ^ mu_sigma.to_bits() ^ tag))
}

/// Solves one instance through the dense semi-normal pipeline and measures
/// it. Breakdowns are returned as errors.
pub fn measure_instance(inst: &Instance) -> Result<(super::metrics::Measured, u64)> {
    let t = &inst.t;
    let mut tally = Tally::new();
    let d = t.matvec_transpose(&inst.b, &mut tally)?;
    let f = factor(t, &FactorOptions::default(), &mut tally)?;
    let r = f.rows.as_ref().expect("dense factor");
    let mut fwd = ForwardSweep::new(&d);
    for (k, row) in r.rows().enumerate() {
        fwd.push_row(k, row, &mut tally)?;
    }
    let mut back = BackSweep::new(fwd.finish());
    for k in (0..f.n).rev() {
        back.push_row(k, r.row(k), &mut tally)?;
    }
    let x = back.finish();
    let m = compute_metrics(t, &inst.x_true, &inst.b, &x, r, UNIT_ROUNDOFF)?;
    Ok((m, tally.get()))
}

struct Cell {
    n: usize,
    mu_sigma: f64,
    family: Family,
    seed: u64,
}

fn run_one(cell: &Cell, count: usize, index: u64) -> MetricsRow {
    let cfg = EnsembleConfig::square(cell.n, cell.mu_sigma, count, cell.seed);
    let inst = match cell.family {
        Family::Random => gen_instance(&cfg, index),
        Family::SingularMinors => gen_singular_minor_instance(&cfg, index),
    };
    let outcome = inst.and_then(|inst| measure_instance(&inst));
    match outcome {
        Ok((m, tally)) => MetricsRow {
            n: cell.n,
            mu_sigma: cell.mu_sigma,
            family: cell.family,
            seed: cell.seed,
            index,
            cond1: m.cond1,
            e1: m.e1,
            e2: m.e2,
            e3: m.e3,
            e3c: m.e3c,
            tally,
            status: "ok".into(),
        },
        Err(e) => MetricsRow::failed(cell.n, cell.mu_sigma, cell.family, cell.seed, index, format!("failed: {e}")),
    }
}

/// Median of the finite values, `NaN` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn median_row(cell: &Cell, rows: &[MetricsRow]) -> MetricsRow {
    let ok: Vec<&MetricsRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let med = |f: fn(&MetricsRow) -> f64| median(ok.iter().map(|r| f(r)));
    let tally = median(ok.iter().map(|r| r.tally as f64));
    MetricsRow {
        n: cell.n,
        mu_sigma: cell.mu_sigma,
        family: cell.family,
        seed: cell.seed,
        index: rows.len() as u64,
        cond1: med(|r| r.cond1),
        e1: med(|r| r.e1),
        e2: med(|r| r.e2),
        e3: med(|r| r.e3),
        e3c: med(|r| r.e3c),
        tally: if tally.is_finite() { tally as u64 } else { 0 },
        status: format!("median {}/{}", ok.len(), rows.len()),
    }
}

/// Runs every cell of the grid (plus the singular-minor family if requested).
pub fn bench(cfg: &BenchConfig) -> BenchTable {
    let mut cells = Vec::new();
    for &n in &cfg.ns {
        for &mu_sigma in &cfg.mu_sigmas {
            cells.push(Cell { n, mu_sigma, family: Family::Random, seed: cell_seed(cfg.seed, n, mu_sigma, Family::Random) });
        }
        if cfg.singular_family {
            cells.push(Cell {
                n,
                mu_sigma: 0.0,
                family: Family::SingularMinors,
                seed: cell_seed(cfg.seed, n, 0.0, Family::SingularMinors),
            });
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.count as u64).map(move |i| (c, i)))
        .collect();
    let rows: Vec<MetricsRow> = jobs
        .par_iter()
        .map(|&(c, i)| run_one(&cells[c], cfg.count, i))
        .collect();
    let medians = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| median_row(cell, &rows[c * cfg.count..(c + 1) * cfg.count]))
        .collect();
    BenchTable { note: REPORT_NOTE, rows, medians }
}

fn family_suffix(f: Family) -> &'static str {
    match f {
        Family::Random => "",
        Family::SingularMinors => "/singular-minors",
    }
}

impl BenchTable {
    /// CSV with columns `n,mu_sigma,seed,cond1,e1,e2,e3,e3c,tally,status`,
    /// instance rows first, then the per-cell medians. The family is carried
    /// as a suffix on `status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(self.note);
        out.push('\n');
        out.push_str("n,mu_sigma,seed,cond1,e1,e2,e3,e3c,tally,status\n");
        for r in self.rows.iter().chain(&self.medians) {
            out.push_str(&format!(
                "{},{:e},{},{:e},{:e},{:e},{:e},{:e},{},{}{}\n",
                r.n,
                r.mu_sigma,
                r.seed,
                r.cond1,
                r.e1,
                r.e2,
                r.e3,
                r.e3c,
                r.tally,
                r.status.replace(',', ";"),
                family_suffix(r.family)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable table")
    }

    fn to_json_value(&self) -> serde_json::Value {
        // Non-finite floats become null.
        serde_json::to_value(self).expect("serializable table")
    }
}
