mod common;

use common::{scalar2, scalar3};
use stokes_lab::glrep::defining_rep;
use stokes_lab::hypersys::BlockedSystem;
use stokes_lab::numkit::{c, cr, gamma, identity, inverse, norm2, rgamma, CMatrix, C64};
use stokes_lab::oracle::{connection_via_ode, stokes_via_ode, OracleConfig};
use stokes_lab::stokes::*;
use stokes_lab::Error;
use std::f64::consts::PI;

fn cfg() -> ProductConfig {
    ProductConfig::default()
}

fn zero_system(nu: usize) -> BlockedSystem {
    let u = (0..nu).map(|k| C64::from_polar(1.0 + k as f64 * 0.3, 0.9 * k as f64)).collect();
    BlockedSystem::new(u, vec![1; nu], CMatrix::zeros(nu, nu)).unwrap()
}

fn gl2(hbar: f64) -> BlockedSystem {
    BlockedSystem::from_quantum(&defining_rep(2), vec![c(0.0, 0.0), c(1.0, 0.0)], cr(hbar)).unwrap()
}

#[test]
fn zero_residue_gives_zero_entries_and_unit_rows() {
    let sys = zero_system(2);
    assert!(norm2(&stokes_entry_plus(&sys, 0, 1, &cfg()).unwrap().0) < 1e-14);
    assert!(norm2(&stokes_entry_minus(&sys, 0, 1, &cfg()).unwrap().0) < 1e-14);
    let (row, _) = connection_row(&sys, 1, 0, None, &cfg()).unwrap();
    assert!((row[(0, 1)] - cr(1.0)).norm() < 1e-12 && row[(0, 0)].norm() < 1e-12);
    let set = assemble_Sd(&sys, 0.2, &cfg()).unwrap();
    assert_eq!(set.plus, identity(2));
    let rep = monodromy_check(&sys, &set.plus, &set.minus, Some(&identity(2))).unwrap();
    assert!(rep.eigen_mismatch < 1e-14 && rep.conjugation_residual.unwrap() < 1e-14);
    assert!(duality_check(&sys, 0.2, &cfg()).unwrap() < 1e-14);
}

#[test]
fn plus_entry_matches_the_ode_oracle() {
    let sys = scalar2();
    let (v, trace) = stokes_entry_plus(&sys, 0, 1, &cfg()).unwrap();
    assert!(trace.converged && trace.is_consistent());
    let s = stokes_via_ode(&sys, 0.0, &OracleConfig::default()).unwrap();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    // Δ = 1 and A_ss = A_tt = 0, so the normalization is the 1/(2πi) factor only.
    assert!((v[(0, 0)] * two_pi_i - s[(0, 1)]).norm() < 1e-5);
    assert!((s[(0, 0)] - cr(1.0)).norm() < 1e-6 && (s[(1, 1)] - cr(1.0)).norm() < 1e-6);
}

#[test]
fn plus_and_minus_agree_for_quantum_gl2() {
    let sys = gl2(0.3);
    for (s, t) in [(0, 1), (1, 0)] {
        let (p, _) = stokes_entry_plus(&sys, s, t, &cfg()).unwrap();
        let (m, _) = stokes_entry_minus(&sys, s, t, &cfg()).unwrap();
        assert!(norm2(&(p - m)) < 1e-6);
    }
}

#[test]
fn plus_and_minus_agree_on_mutually_nearest_pairs() {
    let mut r = common::rng(11);
    let mut checked = 0;
    for _ in 0..6 {
        let u: Vec<C64> = (0..3).map(|_| common::rand_c(&mut r, 1.5)).collect();
        let a = common::rand_matrix(&mut r, 3, 3, 0.25);
        let Ok(sys) = BlockedSystem::new(u.clone(), vec![1, 1, 1], a) else { continue };
        for s in 0..3 {
            for t in 0..3 {
                if s == t {
                    continue;
                }
                let d = |i: usize, j: usize| (u[i] - u[j]).norm();
                let mutual = (0..3).filter(|&k| k != s && k != t).all(|k| d(k, t) > d(s, t) && d(k, s) > d(s, t));
                if !mutual {
                    continue;
                }
                let (p, _) = stokes_entry_plus(&sys, s, t, &cfg()).unwrap();
                let (m, _) = stokes_entry_minus(&sys, s, t, &cfg()).unwrap();
                assert!(norm2(&(p - m)) < 1e-6);
                checked += 1;
            }
        }
    }
    assert!(checked >= 6);
}

#[test]
fn wrong_normalizer_sign_breaks_convergence() {
    let sys = gl2(0.3);
    let form = QuantumForm::Second;
    assert!(quantum_entry(&sys, 0, 1, form, form.standard_shift(), &cfg()).is_ok());
    let wrong = quantum_entry(&sys, 0, 1, form, -form.standard_shift(), &cfg());
    assert!(matches!(wrong, Err(Error::NotConverged { .. })), "{wrong:?}");
}

#[test]
fn blocked_segments_and_lines_are_reported() {
    let sys = BlockedSystem::new(vec![c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)], vec![1, 1, 1], CMatrix::zeros(3, 3)).unwrap();
    assert!(matches!(stokes_entry_plus(&sys, 0, 2, &cfg()), Err(Error::SegmentBlocked { blocker: 1, .. })));
    let sys = BlockedSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], vec![1, 1, 1], CMatrix::zeros(3, 3)).unwrap();
    assert!(matches!(connection_row(&sys, 1, 0, None, &cfg()), Err(Error::LineBlocked { .. })));
}

/// `C_d` for `u = (0, 1)` and `d ∈ (0, π)`: row 1 is constant across the ray
/// `τ = 0` and row 0 across `τ = π`.
fn connection_from_rows(sys: &BlockedSystem) -> CMatrix {
    let (r1, _) = connection_row(sys, 1, 0, Some(0.0), &cfg()).unwrap();
    let (r0, _) = connection_row(sys, 0, 1, Some(PI), &cfg()).unwrap();
    let mut m = CMatrix::zeros(2, 2);
    m.row_mut(0).copy_from(&r0.row(0));
    m.row_mut(1).copy_from(&r1.row(0));
    m
}

#[test]
fn connection_rows_match_the_ode_oracle() {
    let sys = scalar2();
    let from_rows = connection_from_rows(&sys);
    let ode = connection_via_ode(&sys, PI / 2.0, &OracleConfig::default()).unwrap();
    assert!(norm2(&(&from_rows - &ode)) < 1e-4, "{from_rows} {ode}");
}

#[test]
fn connection_rows_and_columns_are_inverse() {
    let sys = scalar2();
    let rows = connection_from_rows(&sys);
    let (c0, _) = connection_col(&sys, 1, 0, Some(0.0), &cfg()).unwrap();
    let (c1, _) = connection_col(&sys, 0, 1, Some(PI), &cfg()).unwrap();
    let mut cols = CMatrix::zeros(2, 2);
    cols.column_mut(0).copy_from(&c0.column(0));
    cols.column_mut(1).copy_from(&c1.column(0));
    assert!(norm2(&(rows * cols - identity(2))) < 1e-5);
}

#[test]
fn two_point_assembly_has_one_upper_factor() {
    let sys = scalar2();
    let set = assemble_Sd(&sys, -0.5, &cfg()).unwrap();
    let upper: Vec<_> = set.rays.iter().filter(|r| r.tau > set.d).collect();
    assert_eq!(upper.len(), 1);
    assert!(upper[0].tau.abs() < 1e-12);
    assert_eq!(upper[0].pairs, vec![(0, 1)]);
    assert!(set.plus[(1, 0)].norm() == 0.0 && set.plus[(0, 1)].norm() > 1e-3);
    assert!(norm2(&(&set.stokes - (&set.plus - &set.minus))) == 0.0);
}

#[test]
fn triangularity_and_unit_diagonal() {
    let sys = scalar3();
    let set = assemble_Sd(&sys, 0.1, &cfg()).or_else(|_| {
        assemble_hybrid(&sys, 0.1, &cfg(), &OracleConfig::default())
    }).unwrap();
    let rep = triangularity(&sys, &set).unwrap();
    assert!(rep.plus_lower == 0.0 && rep.minus_upper == 0.0 && rep.diagonal == 0.0, "{rep:?}");
    for ray in &set.rays {
        for k in 0..3 {
            assert_eq!(ray.matrix[(k, k)], cr(1.0));
        }
    }
}

#[test]
fn half_turn_exchanges_plus_and_minus() {
    let sys = scalar3();
    let ocfg = OracleConfig::default();
    let d = 0.1;
    let a = assemble_hybrid(&sys, d, &cfg(), &ocfg).unwrap();
    let below = assemble_hybrid(&sys, d - PI, &cfg(), &ocfg).unwrap();
    let above = assemble_hybrid(&sys, d + PI, &cfg(), &ocfg).unwrap();
    assert!(norm2(&(&below.plus - inverse(&a.minus).unwrap())) < 1e-8);
    assert!(norm2(&(&above.minus - inverse(&a.plus).unwrap())) < 1e-8);
}

#[test]
fn rotation_is_a_group_action() {
    let sys = scalar3();
    let set = assemble_hybrid(&sys, 0.1, &cfg(), &OracleConfig::default()).unwrap();
    let da = sys.delta_a();
    let pair = (&set.plus, &set.minus);
    let same = rotate_stokes(pair, &da, 0).unwrap();
    assert_eq!(same.0, set.plus);
    let once = rotate_stokes(pair, &da, 1).unwrap();
    let twice = rotate_stokes((&once.0, &once.1), &da, 1).unwrap();
    let direct = rotate_stokes(pair, &da, 2).unwrap();
    assert!(norm2(&(&twice.0 - &direct.0)) < 1e-12 && norm2(&(&twice.1 - &direct.1)) < 1e-12);
    let zero = CMatrix::zeros(3, 3);
    let fixed = rotate_stokes(pair, &zero, 3).unwrap();
    assert!(norm2(&(&fixed.0 - &set.plus)) < 1e-14);
}

#[test]
fn monodromy_spectrum_and_duality() {
    let ocfg = OracleConfig::default();
    for sys in [scalar2(), scalar3(), gl2(0.3)] {
        let set = assemble_hybrid(&sys, 0.1, &cfg(), &ocfg).unwrap();
        let rep = monodromy_check(&sys, &set.plus, &set.minus, None).unwrap();
        assert!(rep.eigen_mismatch < 1e-6);
        let dual = duality_check_with(&sys, 0.1, &|s: &BlockedSystem, a, b, t| Ok(hybrid_entry(s, a, b, t, &cfg(), &ocfg)?.0)).unwrap();
        assert!(dual < 1e-6);
    }
}

#[test]
fn connection_conjugates_the_residue_into_the_monodromy_logarithm() {
    let sys = scalar2();
    let d = PI / 2.0;
    let set = assemble_Sd(&sys, d, &cfg()).unwrap();
    let c_d = connection_from_rows(&sys);
    let rep = monodromy_check(&sys, &set.plus, &set.minus, Some(&c_d)).unwrap();
    assert!(rep.conjugation_residual.unwrap() < 1e-6);
}

#[test]
fn difference_solutions_for_zero_residue_are_gamma_functions() {
    let sys = zero_system(3);
    let k = 0;
    for z in [c(0.3, 0.2), c(1.7, -0.4)] {
        let (m, _) = difference_solution(&sys, k, Side::Minus, z, &cfg()).unwrap();
        let (p, _) = difference_solution(&sys, k, Side::Plus, z, &cfg()).unwrap();
        let g1mz = gamma(C64::new(1.0, 0.0) - z).unwrap();
        let rg1pz = rgamma(C64::new(1.0, 0.0) + z);
        for (row, j) in [1usize, 2].into_iter().enumerate() {
            let w = sys.u[k] - sys.u[j];
            let want_m = (-z * (-w).ln()).exp() / g1mz;
            let want_p = ((C64::new(1.0, 0.0) + z) * w.ln()).exp() * rg1pz;
            assert!((m[(row, row)] - want_m).norm() < 1e-7 * want_m.norm().max(1.0));
            assert!((p[(row, row)] - want_p).norm() < 1e-7 * want_p.norm().max(1.0));
        }
    }
}

#[test]
fn difference_laws_on_a_three_point_system() {
    let sys = common::isosceles3();
    for z in [c(0.3, 0.2), c(-0.6, 0.45), c(1.2, -0.7)] {
        let (rm, rp) = difference_residuals(&sys, 1, z, &cfg()).unwrap();
        assert!(rm < 1e-8 && rp < 1e-8, "{rm:.3e} {rp:.3e}");
    }
    let ocfg = OracleConfig::default();
    let rep = connection_Lk_with(&sys, 1, c(0.3, 0.2), &cfg(), &|s: &BlockedSystem, a, b, t| {
        Ok(hybrid_entry(s, a, b, t, &cfg(), &ocfg)?.0)
    })
    .unwrap();
    assert!(rep.periodicity < 1e-7, "{:.3e}", rep.periodicity);
    assert!(rep.residue_mismatch < 1e-5, "{:.3e}", rep.residue_mismatch);
}

#[test]
fn pole_arguments_are_rejected() {
    let sys = zero_system(2);
    assert!(matches!(difference_solution(&sys, 0, Side::Minus, cr(2.0), &cfg()), Err(Error::PoleHit { .. })));
}

#[test]
fn full_turn_matches_the_rotation_formula() {
    let sys = scalar3();
    let ocfg = OracleConfig::default();
    let a = assemble_hybrid(&sys, 0.1, &cfg(), &ocfg).unwrap();
    let b = assemble_hybrid(&sys, 0.1 + 2.0 * PI, &cfg(), &ocfg).unwrap();
    let (p, m) = rotate_stokes((&a.plus, &a.minus), &sys.delta_a(), 1).unwrap();
    assert!(norm2(&(&b.plus - p)) < 1e-8 && norm2(&(&b.minus - m)) < 1e-8);
}
