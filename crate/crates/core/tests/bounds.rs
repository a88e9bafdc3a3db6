mod common;

use common::{ring_bonds, DenseFock};
use faer::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thermal_arealaw::bounds::{
    default_gamma, lemma1_bound, main_constant, peierls_bogoliubov_check, prop1_bound, prop2_bound,
    random_commuting_pair, step4_particle_bound, theorem_bound, verify_chain, ChainParams,
    Couplings,
};
use thermal_arealaw::lattice::LatticeSpec;
use thermal_arealaw::quasifree::{error_terms, one_particle_dm};

fn block_diag(blocks: &[Mat<f64>]) -> Mat<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = Mat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                m[(off + r, off + c)] = b[(r, c)];
            }
        }
        off += b.nrows();
    }
    m
}

/// `(tr(P e^K)/tr e^K, ln(tr e^{K+P}/tr e^K), tr(P e^{K+P})/tr e^{K+P})` from
/// dense matrix exponentials.
fn pb_oracle(k: &Mat<f64>, p: &Mat<f64>) -> (f64, f64, f64) {
    let ek = common::matrix_function(k, f64::exp);
    let ekp = common::matrix_function(&(k + p), f64::exp);
    let (zk, zkp) = (common::trace(&ek), common::trace(&ekp));
    (
        common::expectation(p, &ek) / zk,
        (zkp / zk).ln(),
        common::expectation(p, &ekp) / zkp,
    )
}

#[test]
fn peierls_bogoliubov_matches_dense_exponentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dims in [vec![3], vec![1, 2, 4], vec![5, 5]] {
        let (k, p) = random_commuting_pair(&dims, 1.0, &mut rng);
        let check = peierls_bogoliubov_check(&k, &p).unwrap();
        let (lhs, s1, s2) = pb_oracle(&block_diag(&k), &block_diag(&p));
        assert!((check.lhs - lhs).abs() < 1e-12);
        assert!((check.s1_rhs - s1).abs() < 1e-12);
        assert!((check.s2_rhs - s2).abs() < 1e-12);
    }
}

#[test]
fn peierls_bogoliubov_is_tight_for_scalar_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (k, _) = random_commuting_pair(&[2, 3], 1.0, &mut rng);
    let zero: Vec<Mat<f64>> = k.iter().map(|b| Mat::zeros(b.nrows(), b.ncols())).collect();
    let c = peierls_bogoliubov_check(&k, &zero).unwrap();
    assert_eq!((c.lhs, c.s1_rhs, c.s2_rhs), (0.0, 0.0, 0.0));
    let shift: Vec<Mat<f64>> = k
        .iter()
        .map(|b| Mat::from_fn(b.nrows(), b.ncols(), |r, c| if r == c { 0.7 } else { 0.0 }))
        .collect();
    let c = peierls_bogoliubov_check(&k, &shift).unwrap();
    assert!(c.s1_slack().abs() < 1e-14 && c.s2_slack().abs() < 1e-14);
}

#[test]
fn closed_form_values() {
    assert_eq!(prop1_bound(1.0, 1.0, 4, 2.0), 4.0);
    assert_eq!(prop1_bound(1.0, 0.0, 4, 2.0), 0.0);
    assert_eq!(lemma1_bound(2.0, -1.0, 0.5), 3.0);
    let c = main_constant(1.0, 1.0, 1.0, 1).unwrap();
    assert!((c - 106.958).abs() < 2e-3);
    assert_eq!(main_constant(0.0, 1.0, 1.0, 2).unwrap(), 0.0);
    assert_eq!(theorem_bound(0.5, 4, 1, 1.0, 1.0, 1.0).unwrap(), c);
    assert_eq!(theorem_bound(2.0, 9, 1, 1.0, 1.0, 1.0).unwrap(), 2.0 * c);
    let c2 = main_constant(1.0, 1.0, 1.0, 2).unwrap();
    assert!((theorem_bound(1.0, 3, 2, 1.0, 1.0, 1.0).unwrap() - 3.0 * c2).abs() < 1e-12);
    assert!(main_constant(1.0, 0.0, 1.0, 1).is_err());
    assert!(main_constant(1.0, 1.0, 0.0, 1).is_err());
    assert!(main_constant(-1.0, 1.0, 1.0, 1).is_err());
}

/// The mutual-information form of the comparison-state bound on `<N>`.
fn prop2_mi(dim: usize, side: usize, beta: f64, j: f64, u: f64, mu: f64) -> f64 {
    let lattice = LatticeSpec::new(dim, side).unwrap();
    let gamma = default_gamma(beta, dim, j);
    let dm = one_particle_dm(&lattice, beta, gamma, j).unwrap();
    let couplings = Couplings {
        dim,
        side,
        j,
        u,
        mu,
    };
    prop1_bound(beta, j, side, prop2_bound(&dm, &couplings).unwrap().exact)
}

#[test]
fn theorem_dominates_the_comparison_bound_for_beta_at_least_one() {
    let mut checked = 0;
    for dim in 1..=2 {
        for side in [3, 4, 6, 8, 12] {
            for &beta in &[1.0, 2.0, 4.0, 8.0] {
                for &j in &[0.25, 0.5, 1.0] {
                    for &u in &[0.5, 1.0, 2.0, 4.0, 8.0] {
                        for &mu in &[0.5, 1.0, 2.0] {
                            let lhs = prop2_mi(dim, side, beta, j, u, mu);
                            let rhs = theorem_bound(beta, side, dim, j, u, mu).unwrap();
                            assert!(
                                lhs <= rhs,
                                "d={dim} L={side} beta={beta} J={j} U={u} mu={mu}: {lhs} > {rhs}"
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(checked, 2 * 5 * 4 * 3 * 5 * 3);
}

/// `<W>_free` carries a `U/2` prefactor, so for `U <= 2` the interaction
/// term of the fully relaxed bound stays under the one in the closed-form
/// constant; at large `U` it grows linearly and overtakes it.
#[test]
fn relaxed_chain_meets_the_constant_up_to_u_two() {
    let step4_mi = |side: usize, beta: f64, u: f64| {
        let gamma = default_gamma(beta, 1, 1.0);
        let (e1, e2) = error_terms(side, 1, beta, gamma).unwrap();
        let c = Couplings {
            dim: 1,
            side,
            j: 1.0,
            u,
            mu: 1.0,
        };
        prop1_bound(
            beta,
            1.0,
            side,
            step4_particle_bound(&c, beta, gamma, e1, e2),
        )
    };
    for side in [4, 8, 16, 64] {
        for &beta in &[1.0, 2.0, 4.0] {
            for &u in &[0.5, 1.0, 2.0] {
                assert!(
                    step4_mi(side, beta, u) <= theorem_bound(beta, side, 1, 1.0, u, 1.0).unwrap()
                );
            }
        }
    }
    assert!(step4_mi(64, 1.0, 256.0) > theorem_bound(1.0, 64, 1, 1.0, 256.0, 1.0).unwrap());
}

#[test]
fn chain_matches_dense_oracle() {
    let (side, n_max, beta) = (4, 3, 1.0);
    let mut p = ChainParams::new(1, side, n_max, 1.0, 1.0, 1.0);
    p.width = Some(2);
    let chain = verify_chain(&p, beta).unwrap();

    let space = DenseFock::new(side, n_max);
    let rho = common::gibbs(&space.bose_hubbard(&ring_bonds(side), 1.0, 1.0, 1.0), beta);
    let rho_a = space.partial_trace(&rho, &[0, 1]);
    let rho_b = space.partial_trace(&rho, &[2, 3]);
    let mi = common::entropy(&rho_a) + common::entropy(&rho_b) - common::entropy(&rho);
    assert!((chain.exact_mi - mi).abs() < 1e-8);

    let cut = LatticeSpec::new(1, side).unwrap().bipartition(2).unwrap();
    let boundary = common::hopping(&space, cut.boundary_bonds(), 1.0);
    let product = common::tensor(&rho_a, &rho_b);
    let lemma1 =
        beta * (common::expectation(&boundary, &product) - common::expectation(&boundary, &rho));
    assert!((chain.lemma1_value - lemma1).abs() < 1e-10);

    let n_total = (0..side)
        .map(|x| common::expectation(&space.hop(x, x), &rho))
        .sum::<f64>();
    assert!((chain.mean_particles - n_total).abs() < 1e-10);
    assert!((chain.prop1_value - 2.0 * n_total).abs() < 1e-9);
    assert!((chain.theorem_value - main_constant(1.0, 1.0, 1.0, 1).unwrap()).abs() < 1e-12);
    assert!(chain.violations.is_empty(), "{:?}", chain.violations);
    assert!(chain.slack_lemma1 > 0.0 && chain.slack_prop1 > 0.0 && chain.slack_theorem > 0.0);
}

#[test]
fn zero_hopping_collapses_the_chain() {
    for &beta in &[0.25, 1.0, 4.0] {
        let chain = verify_chain(&ChainParams::new(1, 4, 3, 0.0, 1.0, 1.0), beta).unwrap();
        assert!(chain.exact_mi.abs() < 1e-10);
        assert!(chain.lemma1_value.abs() < 1e-10);
        assert_eq!(chain.prop1_value, 0.0);
        assert_eq!(chain.theorem_value, 0.0);
    }
}

#[test]
fn hypotheses_are_rejected() {
    assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 0.0, 1.0), 1.0).is_err());
    assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 1.0, -1.0), 1.0).is_err());
    assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 1.0, 1.0), 0.0).is_err());
    let mut p = ChainParams::new(1, 4, 2, 1.0, 1.0, 1.0);
    // below 2dJ - mu the free reference is not normalizable
    p.gamma = Some(0.5);
    assert!(verify_chain(&p, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn peierls_bogoliubov_random_pairs(
        seed in any::<u64>(),
        dims in proptest::collection::vec(1usize..=8, 1..=4),
        scale in 0.05f64..4.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, p) = random_commuting_pair(&dims, scale, &mut rng);
        let c = peierls_bogoliubov_check(&k, &p).unwrap();
        prop_assert!(c.s1_slack() >= -1e-10);
        prop_assert!(c.s2_slack() >= -1e-10);
        // (S1) sits between the two means
        prop_assert!(c.s1_rhs <= c.s2_rhs + 1e-10);
    }

    #[test]
    fn scalar_step_inequality(n in 0u32..=1000, c in 0.01f64..10.0) {
        let n = n as f64;
        prop_assert!(n <= c * n * (n - 1.0) + c / 4.0 * (1.0 + 1.0 / c).powi(2) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn finite_dimensional_links_hold(
        side in 2usize..=4,
        n_max in 1usize..=3,
        beta in 0.2f64..5.0,
        j in 0.1f64..1.5,
        u in 0.2f64..3.0,
        mu in 0.2f64..2.0,
    ) {
        let mut p = ChainParams::new(1, side, n_max, j, u, mu);
        p.pinsker = true;
        let chain = verify_chain(&p, beta).unwrap();
        for name in ["mi_nonnegative", "lemma1", "prop1", "pb_genuine", "pb_literal", "pinsker", "correlation", "translation"] {
            prop_assert!(!chain.flagged(name), "{name}: {:?}", chain.violations);
        }
        prop_assert!(chain.translation_deviation < 1e-10);
        prop_assert_eq!(chain.boundary_bonds, if side == 2 { 1 } else { 2 });
    }
}
