use proptest::prelude::*;

use toeplitz_bbh::harness::{factor_backward_error, gen_instance, EnsembleConfig};
use toeplitz_bbh::lattice::DowndateVariant;
use toeplitz_bbh::oracles::{householder_solve, DenseMatrix};
use toeplitz_bbh::seminormal::{least_squares, norm2, solve};
use toeplitz_bbh::{factor, FactorOptions, SolveOptions, StorageMode, Tally, ToeplitzSpec, UNIT_ROUNDOFF as EPS};

fn toeplitz(m: usize, n: usize) -> impl Strategy<Value = ToeplitzSpec> {
    (prop::collection::vec(-4.0f64..4.0, m), prop::collection::vec(-4.0f64..4.0, n)).prop_map(|(col, mut row)| {
        row[0] = col[0];
        ToeplitzSpec::new(col, row).unwrap()
    })
}

fn square() -> impl Strategy<Value = ToeplitzSpec> {
    (2usize..24).prop_flat_map(|n| toeplitz(n, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Factorizations that complete satisfy the backward error bound K n² ε.
    #[test]
    fn factor_backward_error_bound(t in square()) {
        let n = t.cols() as f64;
        if let Ok(f) = factor(&t, &FactorOptions::default(), &mut Tally::new()) {
            let err = factor_backward_error(&t, 0.0, f.rows.as_ref().unwrap());
            prop_assert!(err <= 100.0 * n * n * EPS, "err {err:e}");
        }
    }

    #[test]
    fn tall_factor_backward_error_bound(t in (2usize..16, 0usize..10).prop_flat_map(|(n, extra)| toeplitz(n + extra, n))) {
        let n = t.cols() as f64;
        if let Ok(f) = factor(&t, &FactorOptions::default(), &mut Tally::new()) {
            let err = factor_backward_error(&t, 0.0, f.rows.as_ref().unwrap());
            prop_assert!(err <= 100.0 * n * n * EPS, "err {err:e}");
        }
    }

    #[test]
    fn tally_cap(t in square()) {
        let n = t.cols() as u64;
        let mut tally = Tally::new();
        if factor(&t, &FactorOptions::default(), &mut tally).is_ok() {
            prop_assert!(tally.get() <= 7 * n * n + 200 * n);
        }
    }

    // Every storage mode and block size gives the same solution.
    #[test]
    fn storage_modes_agree(t in square(), block in 1usize..6) {
        let b: Vec<f64> = (0..t.rows()).map(|i| (i as f64).sin()).collect();
        let dense = solve(&t, &b, &SolveOptions::default());
        let ck = solve(&t, &b, &SolveOptions { storage_mode: StorageMode::Checkpointed, checkpoint_block: block, ..SolveOptions::default() });
        match (dense, ck) {
            (Ok(d), Ok(c)) => prop_assert_eq!(d.x, c.x),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "modes disagree on breakdown"),
        }
    }
}

#[test]
fn least_squares_matches_householder() {
    for index in 0..10 {
        let cfg = EnsembleConfig { m: Some(60), ..EnsembleConfig::square(40, 0.0, 1, 11) };
        let inst = gen_instance(&cfg, index).unwrap();
        // Perturb b out of the range of A.
        let b: Vec<f64> = inst.b.iter().enumerate().map(|(i, v)| v + 0.1 * ((i * 7 % 5) as f64 - 2.0)).collect();
        let rep = least_squares(&inst.t, &b, &SolveOptions { refine_steps: 1, compute_cond1: true, ..SolveOptions::default() }).unwrap();
        let x_ref = householder_solve(&DenseMatrix::from_toeplitz(&inst.t), &b).unwrap();
        let diff: Vec<f64> = rep.x.iter().zip(&x_ref).map(|(a, b)| a - b).collect();
        let kappa = rep.cond1.unwrap();
        assert!(norm2(&diff) / norm2(&x_ref) <= 1e3 * kappa * kappa * 40.0 * EPS);
    }
}

#[test]
fn regularization_shifts_the_gram_matrix() {
    let t = gen_instance(&EnsembleConfig::square(30, 1.0, 1, 3), 0).unwrap().t;
    for alpha in [0.0, 1e-6, 0.5, 10.0] {
        let f = factor(&t, &FactorOptions::with_alpha(alpha), &mut Tally::new()).unwrap();
        assert!(factor_backward_error(&t, alpha, f.rows.as_ref().unwrap()) <= 300.0 * EPS);
    }
}

#[test]
fn hyperbolic_variant_factors_well_conditioned_matrices() {
    let t = gen_instance(&EnsembleConfig::square(40, 0.0, 1, 8), 2).unwrap().t;
    let opts = FactorOptions { variant: DowndateVariant::PureHyperbolic, ..FactorOptions::default() };
    let f = factor(&t, &opts, &mut Tally::new()).unwrap();
    let err = factor_backward_error(&t, 0.0, f.rows.as_ref().unwrap());
    assert!(err <= 100.0 * 40.0 * 40.0 * EPS, "err {err:e}");
}
