mod common;

use common::*;
use nfg_core::gen::*;
use nfg_core::lct::*;
use nfg_core::limits::Limits;
use nfg_core::nfg::*;
use nfg_core::spa::*;
use nfg_core::tensor::{CMatrix, C64};
use nfg_core::NfgError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn de(t: Topology, ensemble: Ensemble, seed: u64) -> FactorGraph {
    gen(&GeneratorSpec::new(t, GraphKind::DoubleEdge, ensemble, seed)).unwrap()
}

fn snfg(t: Topology, seed: u64) -> FactorGraph {
    gen(&GeneratorSpec::new(t, GraphKind::Standard, Ensemble::PositiveSnfg, seed)).unwrap()
}

fn transformed(g: &FactorGraph) -> (SpaReport, LctResult) {
    let r = spa_run(g, &SpaOptions { tol_fp: 1e-13, ..Default::default() });
    let lr = transform(g, &r).unwrap();
    (r, lr)
}

fn cv(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x)).collect()
}

#[test]
fn unit_belief_branch() {
    let p = resolve_params(0, &cv(&[1.0, 0.0]), &cv(&[1.0, 0.0])).unwrap();
    assert!(p.unit_branch);
    assert_eq!(p.z_e, 1.0);
    assert_eq!(p.delta, [1.0, 1.0]);
    assert_eq!(p.epsilon, [-0.5, -0.5]);
    assert!((1.0 + p.delta[0] * p.epsilon[1] + p.delta[1] * p.epsilon[0]).abs() < 1e-12);
}

#[test]
fn uniform_messages_plug_in() {
    let mu = cv(&[0.5, 0.5]);
    let p = resolve_params(0, &mu, &mu).unwrap();
    assert!(!p.unit_branch);
    assert!((p.z_e - 0.5).abs() < 1e-15);
    assert!((p.beta0 - 0.5).abs() < 1e-15);
    let d = 0.5f64.sqrt();
    let eps = (0.5 - d) / 0.25;
    for k in 0..2 {
        assert!((p.delta[k] - d).abs() < 1e-12);
        assert!((p.epsilon[k] - eps).abs() < 1e-12);
        assert!((p.zeta[k] - 1.0 / d).abs() < 1e-12);
        assert_eq!(p.chi[k], 1.0);
    }
    // δ + Z_e (1 − β_e(0)) ε = µ_other(0) at both endpoints.
    for k in 0..2 {
        assert!((p.delta[k] + p.z_e * (1.0 - p.beta0) * p.epsilon[k] - 0.5).abs() < 1e-12);
    }
    assert!(p.constraint_residual(0.5, 0.5) < 1e-12);
}

#[test]
fn orthogonal_messages_are_inapplicable() {
    let r = resolve_params(3, &cv(&[0.0, 1.0]), &cv(&[1.0, 0.0]));
    match r {
        Err(NfgError::LctInapplicable { edge, z_e }) => {
            assert_eq!(edge, 3);
            assert_eq!(z_e, c(0.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn binary_matrices_have_the_closed_form() {
    let mu_i = cv(&[0.3, 0.7]);
    let mu_j = cv(&[0.6, 0.4]);
    let p = resolve_params_with(0, &mu_i, &mu_j, 2.0).unwrap();
    let (mi, mj) = build_m_matrices(&mu_i, &mu_j, &p).unwrap();
    let (z, x) = (p.zeta[0], p.chi[0]);
    let expected = [[z * 0.3, -z * x * 0.4], [z * 0.7, z * x * 0.6]];
    for r in 0..2 {
        for col in 0..2 {
            assert!((mi.get(r, col) - c(expected[r][col])).norm() < 1e-12);
        }
    }
    // Column 0 encodes the messages at both endpoints.
    for k in 0..2 {
        assert!((mj.get(k, 0) - mu_j[k] * p.zeta[1]).norm() < 1e-12);
    }
    let id = CMatrix::identity(2);
    assert!(mi.mul(&mj.transpose()).max_abs_diff(&id) < 1e-10);
    assert!(mi.transpose().mul(&mj).max_abs_diff(&id) < 1e-10);
}

#[test]
fn equal_real_messages_give_an_orthogonal_matrix() {
    let mu = cv(&[0.2, 0.5, 0.3]);
    let p = resolve_params(0, &mu, &mu).unwrap();
    let (mi, mj) = build_m_matrices(&mu, &mu, &p).unwrap();
    assert!(mi.max_abs_diff(&mj) < 1e-12);
    assert!(mi.transpose().mul(&mi).max_abs_diff(&CMatrix::identity(3)) < 1e-10);
}

#[test]
fn conjugate_double_edge_messages_give_unitary_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let mu_i = random_message(GraphKind::DoubleEdge, 2, &mut rng);
        let mu_j: Vec<C64> = mu_i.iter().map(|z| z.conj()).collect();
        let p = resolve_params(0, &mu_i, &mu_j).unwrap();
        let (mi, mj) = build_m_matrices(&mu_i, &mu_j, &p).unwrap();
        assert!(mi.max_abs_diff(&mj.conj()) < 1e-12);
        let id = CMatrix::identity(4);
        assert!(mi.adjoint().mul(&mi).max_abs_diff(&id) < 1e-10);
        assert!(mj.adjoint().mul(&mj).max_abs_diff(&id) < 1e-10);
    }
}

#[test]
fn double_edge_matrices_have_hermitian_choi() {
    let g = de(Topology::Fig3, Ensemble::PsdRandom, 2);
    let (_, lr) = transformed(&g);
    for (mi, mj) in &lr.m_matrices {
        for m in [mi, mj] {
            // C_M((x, x̃), (x', x̃')) = M((x, x'), (x̃, x̃')).
            let choi = CMatrix::from_fn(4, 4, |r, col| {
                let (x, xt) = (r / 2, r % 2);
                let (xp, xtp) = (col / 2, col % 2);
                m.get(x * 2 + xp, xt * 2 + xtp)
            });
            assert!(choi.hermitian_deviation() < 1e-12);
        }
    }
}

#[test]
fn tree_transform_keeps_only_the_zero_configuration() {
    for seed in 0..5 {
        let g = snfg(Topology::Tree(5), seed);
        let (_, lr) = transformed(&g);
        let z = partition_exact(&g).unwrap();
        let ls = loop_series(&lr, &Limits::default()).unwrap();
        assert!(rel(ls.g0, z) < 1e-9);
        assert!(ls.terms.iter().all(|t| t.weight.norm() < 1e-9), "seed {seed}");
        assert!(induced_fixed_point_check(&lr) < 1e-12);
    }
}

#[test]
fn fig3_standard_transform_preserves_the_partition_function() {
    for seed in 0..10 {
        let g = snfg(Topology::Fig3, seed);
        let (r, lr) = transformed(&g);
        let z = partition_exact(&g).unwrap();
        assert!(rel(partition_exact(&lr.transformed).unwrap(), z) <= 1e-9);
        assert!(rel(lr.diagnostics.g0, r.z_bethe.unwrap()) <= 1e-9);
        assert!(lr.diagnostics.max_weight_one <= 1e-10);
        assert_eq!(lr.transformed.kind(), GraphKind::Standard);
    }
}

#[test]
fn double_edge_transform_is_weak_sense_hermitian() {
    for seed in 0..10 {
        let g = de(Topology::FigB, Ensemble::PsdRandom, seed);
        let (_, lr) = transformed(&g);
        assert!(lr.transformed.weak_sense());
        for f in 0..lr.transformed.num_nodes() {
            assert!(lr.transformed.choi_matrix(f).hermitian_deviation() < 1e-9);
        }
        assert!(rel(partition_exact(&lr.transformed).unwrap(), partition_exact(&g).unwrap()) <= 1e-9);
    }
}

#[test]
fn alternative_chi_preserves_the_partition_function() {
    for seed in 0..10u64 {
        let g = de(Topology::Fig3, Ensemble::PsdRandom, seed);
        let r = spa_run(&g, &SpaOptions { tol_fp: 1e-13, ..Default::default() });
        let m = r.messages.unwrap();
        let chi: Vec<f64> = (0..g.num_edges()).map(|e| if (e as u64 + seed) % 2 == 0 { 0.5 } else { 2.0 }).collect();
        let lr = transform_messages(&g, &m, Some(&chi)).unwrap();
        for (e, p) in lr.params.iter().enumerate() {
            assert_eq!(p.chi, [chi[e], 1.0 / chi[e]]);
            assert!(p.constraint_residual(m.get(e, 0)[0].re, m.get(e, 1)[0].re) < 1e-12);
        }
        assert!(rel(partition_exact(&lr.transformed).unwrap(), partition_exact(&g).unwrap()) <= 1e-9);
        assert!(lr.diagnostics.max_weight_one <= 1e-10);
    }
}

#[test]
fn cycle_loop_series_activates_the_whole_cycle() {
    for seed in 0..5 {
        let g = snfg(Topology::Cycle(4), seed);
        let (_, lr) = transformed(&g);
        let ls = loop_series(&lr, &Limits::default()).unwrap();
        assert!(!ls.terms.is_empty());
        for t in &ls.terms {
            assert!(t.configuration.iter().all(|&x| x != 0));
        }
        assert!(ls.max_non_loop_weight < 1e-9);
        let z = partition_exact(&g).unwrap();
        assert!(rel(ls.resummed(), z) <= 1e-8);
    }
}

#[test]
fn fig3_loop_weights_sum_to_the_ratio() {
    for seed in 0..5 {
        for g in [snfg(Topology::Fig3, seed), de(Topology::Fig3, Ensemble::PsdRandom, seed)] {
            let (r, lr) = transformed(&g);
            let ls = loop_series(&lr, &Limits::default()).unwrap();
            let ratio = partition_exact(&g).unwrap() / r.z_bethe.unwrap() - c(1.0);
            assert!((ls.weight_sum() - ratio).norm() <= 1e-8 * (1.0 + ratio.norm()));
            for t in &ls.terms {
                assert!(is_generalized_loop(&lr.transformed, &t.configuration));
            }
        }
    }
}

#[test]
fn induced_messages_are_fixed_points() {
    for seed in 0..100 {
        let g = de(Topology::Fig3, Ensemble::PsdRandom, seed);
        let (_, lr) = transformed(&g);
        assert!(induced_fixed_point_check(&lr) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn g_split_matches_enumeration() {
    for seed in 0..5 {
        let g = de(Topology::Cycle(3), Ensemble::PsdRandom, seed);
        let (_, lr) = transformed(&g);
        let split = g_split(&lr);
        let enumerated = g1_sum_enumerated(&lr, &Limits::default()).unwrap();
        assert!((split.sum_g1 - enumerated).norm() <= 1e-9 * (1.0 + enumerated.norm()));
        assert!(split.max_low_weight_g1 <= 1e-10);
    }
}

#[test]
fn single_edge_tree_meets_the_condition_trivially() {
    let g = de(Topology::Tree(2), Ensemble::PsdRandom, 1);
    let (_, lr) = transformed(&g);
    let c = check_condition(&lr);
    assert!((c.s - c.z_star).abs() <= 1e-9 * c.z_star);
    assert!(c.alpha.abs() <= 1e-9);
    assert!(c.holds() && c.agree);
}

#[test]
fn near_identity_meets_the_condition() {
    for seed in 0..10 {
        let g = de(Topology::Fig3, Ensemble::PsdNearIdentity { eta: 0.01 }, seed);
        let (_, lr) = transformed(&g);
        let c = check_condition(&lr);
        // Direct evaluation of S and α.
        let s: f64 = lr.transformed.functions().iter().map(|t| t.data().iter().map(|z| z.norm()).sum::<f64>()).product();
        assert!((s - c.s).abs() <= 1e-12 * s);
        assert!(((s - c.z_star) / c.z_star - c.alpha).abs() <= 1e-12);
        assert!(c.holds(), "seed {seed}: alpha {}", c.alpha);
    }
}

#[test]
fn strong_coupling_fails_the_condition() {
    let g = de(Topology::FigB, Ensemble::PsdRandom, 0);
    let (_, lr) = transformed(&g);
    let c = check_condition(&lr);
    assert!(!c.holds());
    assert!(c.alpha.is_finite() && c.alpha >= 0.5);
    assert!(c.agree);
}

#[test]
fn non_converged_reports_are_rejected() {
    let g = jordan_cycle();
    let r = spa_run(&g, &SpaOptions { max_iter: 50, restarts: 0, ..Default::default() });
    assert!(!r.converged);
    assert!(matches!(transform(&g, &r), Err(NfgError::NonConvergence(_))));
}
