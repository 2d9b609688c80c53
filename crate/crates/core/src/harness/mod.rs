//! Stability-measurement harness: seeded ensembles, the `e1`/`e2`/`e3`/`e3c`
//! metrics and the benchmark table.

pub mod bench;
pub mod ensemble;
pub mod metrics;

pub use bench::{bench, BenchConfig, BenchTable, Family, MetricsRow};
pub use ensemble::{gen_hankel_instance, gen_instance, gen_singular_minor_instance, EnsembleConfig, Instance};
pub use metrics::{compute_metrics, factor_backward_error, Measured};
