use stokes_lab::glrep::{defining_rep, sym_power_rep};
use stokes_lab::hypersys::{
    formal_inf_coeffs, formal_zero_coeffs, ode_residual, quantum_H_coeffs, quantum_column_identity_residual, Base,
    BlockedSystem,
};
use stokes_lab::numkit::{c, cr, norm_fro, CMatrix, C64};

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let s = norm_fro(a).max(norm_fro(b));
    if s == 0.0 {
        0.0
    } else {
        norm_fro(&(a - b)) / s
    }
}

#[test]
fn quantum_and_product_coefficients_agree() {
    let cases = [
        (defining_rep(2), vec![cr(0.0), cr(1.0)]),
        (defining_rep(3), vec![cr(0.0), c(1.0, 0.3), c(-0.4, 1.2)]),
        (sym_power_rep(2, 2), vec![c(0.2, -0.1), c(1.1, 0.7)]),
    ];
    for (rep, u) in cases {
        for hbar in [cr(0.3), c(0.3, 0.1)] {
            let sys = BlockedSystem::from_quantum(&rep, u.clone(), hbar).unwrap();
            let a = formal_inf_coeffs(&sys, 30).unwrap();
            let b = quantum_H_coeffs(&sys, 30).unwrap();
            for p in 0..=30 {
                let d = rel_diff(&a.coeffs[p], &b.coeffs[p]);
                assert!(d <= 1e-11, "order {p}: relative difference {d:e}");
            }
            assert!(quantum_column_identity_residual(&sys, &b).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn tagged_series_match_cauchy_product() {
    let a = CMatrix::from_fn(3, 3, |i, j| c(0.13 * (i as f64 + 1.0) - 0.07 * j as f64, 0.05 * ((i * j) % 2) as f64));
    let sys = BlockedSystem::new(vec![cr(0.0), c(1.0, 0.2), c(-0.3, 0.9)], vec![1, 1, 1], a).unwrap();
    let order = 25;
    let h0 = formal_zero_coeffs(&sys, Base::Zero, order).unwrap();
    for k in 0..3 {
        let hk = formal_zero_coeffs(&sys, Base::Tagged(k), order).unwrap();
        // H^[k](z) = H^[0](z) e^{−u_k z}
        let mut fact = vec![cr(1.0)];
        for m in 1..=order {
            let prev = fact[m - 1];
            fact.push(prev * (-sys.u[k]) / m as f64);
        }
        for p in 0..=order {
            let mut expect = CMatrix::zeros(3, 3);
            for m in 0..=p {
                expect += &h0.coeffs[p - m] * fact[m];
            }
            let d = norm_fro(&(&hk.coeffs[p] - &expect));
            assert!(d <= 1e-11 * (1.0 + norm_fro(&expect)), "k={k} p={p} diff {d:e}");
        }
    }
}

#[test]
fn zero_series_has_infinite_radius() {
    let a = CMatrix::from_fn(2, 2, |i, j| cr(if i == j { 0.0 } else { 0.2 + 0.1 * i as f64 }));
    let sys = BlockedSystem::new(vec![cr(0.0), cr(1.0)], vec![1, 1], a).unwrap();
    let h = formal_zero_coeffs(&sys, Base::Zero, 60).unwrap();
    let r = 5.0_f64;
    let terms: Vec<f64> = h.coeffs.iter().enumerate().map(|(p, m)| norm_fro(m) * r.powi(p as i32)).collect();
    assert!(terms[60] < 1e-20 * terms[5].max(1.0));
    let residual = ode_residual(&sys, &h, 60).unwrap();
    assert!(residual.iter().all(|x| x.1 <= 1e-12));
    let _ = C64::new(0.0, 0.0);
}
