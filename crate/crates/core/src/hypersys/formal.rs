//! Formal and convergent series solutions at `z = ∞` and `z = 0`.

use super::recursive::{scale_rows, RecursiveOp};
use super::{nonresonance_check, BlockedSystem, NONRESONANCE_TOL};
use crate::error::{Error, Result};
use crate::numkit::{identity, norm_fro, zeros, CMatrix, ShiftSolver, SylvesterSolver, C64};
use crate::yangian::build_tk;

/// Expansion point of a coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    /// `F = (I + Σ H_p z^{−p}) z^{δ_u A} e^{uz}`.
    Infinity,
    /// `F = (I + Σ H_p z^p) z^A`.
    Zero,
    /// `H^[k](z) = H^[0](z) e^{−u_k z}` for block `k`.
    Tagged(usize),
}

/// Coefficients `H_0 = I, H_1, …, H_P`.
#[derive(Debug, Clone)]
pub struct SeriesCoeffs {
    pub base: Base,
    pub coeffs: Vec<CMatrix>,
}

impl SeriesCoeffs {
    /// Highest order `P`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn ensure_blocks_nonresonant(sys: &BlockedSystem) -> Result<()> {
    let rep = nonresonance_check(sys, NONRESONANCE_TOL)?;
    if let Some((k, m)) = rep.block_margins.iter().enumerate().find(|(_, &m)| m <= rep.tol) {
        return Err(Error::Resonant(format!("diagonal block {k} (margin {m:.3e})")));
    }
    Ok(())
}

/// Canonical formal solution at `∞` through ordered products of `L_k`.
pub fn formal_inf_coeffs(sys: &BlockedSystem, order: usize) -> Result<SeriesCoeffs> {
    ensure_blocks_nonresonant(sys)?;
    let n = sys.n();
    let mut coeffs = vec![zeros(n, n); order + 1];
    coeffs[0] = identity(n);
    for k in 0..sys.nu() {
        let op = RecursiveOp::new(sys, k);
        let kk_solver = ShiftSolver::new(&op.a_kk)?;
        let right = op.right_solver(&op.a_kk)?;
        let range = sys.range(k);
        let mut x = scale_rows(&op.v, &op.a_hk);
        for p in 1..=order {
            let pc = C64::new(p as f64, 0.0);
            let diag_block = -kk_solver.solve(pc, &(&op.a_kh * &x))?;
            let h = &mut coeffs[p];
            for (a, &row) in op.hat.iter().enumerate() {
                for (b, col) in range.clone().enumerate() {
                    h[(row, col)] = x[(a, b)];
                }
            }
            h.view_mut((range.start, range.start), (range.len(), range.len())).copy_from(&diag_block);
            if p < order {
                x = op.apply_right(pc, &op.a_kk, &right, &x)?;
            }
        }
    }
    Ok(SeriesCoeffs { base: Base::Infinity, coeffs })
}

/// Formal solution at `∞` of a quantum system through the matrices `T_k(p)`.
#[allow(non_snake_case)]
pub fn quantum_H_coeffs(sys: &BlockedSystem, order: usize) -> Result<SeriesCoeffs> {
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    ensure_blocks_nonresonant(sys)?;
    let (nu, d, hbar) = (sys.nu(), q.rep.dim, q.hbar);
    let n = sys.n();
    let mut coeffs = vec![zeros(n, n); order + 1];
    coeffs[0] = identity(n);
    for k in 0..nu {
        let hat = sys.hat_blocks(k);
        let mut col = zeros((nu - 1) * d, d);
        for (a, &i) in hat.iter().enumerate() {
            let blk = q.rep.e(i, k) * (-hbar / (sys.u[k] - sys.u[i]));
            col.view_mut((a * d, 0), (d, d)).copy_from(&blk);
        }
        for p in 1..=order {
            let pc = C64::new(p as f64, 0.0);
            let mut kk = zeros(d, d);
            for (a, &j) in hat.iter().enumerate() {
                kk += q.rep.e(k, j) * col.view((a * d, 0), (d, d)) * (hbar / pc);
            }
            let h = &mut coeffs[p];
            for (a, &i) in hat.iter().enumerate() {
                h.view_mut((i * d, k * d), (d, d)).copy_from(&col.view((a * d, 0), (d, d)));
            }
            h.view_mut((k * d, k * d), (d, d)).copy_from(&kk);
            if p < order {
                col = build_tk(sys, k, pc)?.mat * col;
            }
        }
    }
    Ok(SeriesCoeffs { base: Base::Infinity, coeffs })
}

/// Residual of the commutation identity `(H_p)_k̂k e_kk = diag(e_kk + 1, …)(H_p)_k̂k`
/// over all `k` and `p ≤ P`, relative to `‖(H_p)_k̂k‖`.
pub fn quantum_column_identity_residual(sys: &BlockedSystem, series: &SeriesCoeffs) -> Result<f64> {
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    let d = q.rep.dim;
    let mut worst: f64 = 0.0;
    for h in series.coeffs.iter().skip(1) {
        for k in 0..sys.nu() {
            let ekk = q.rep.e(k, k);
            for i in sys.hat_blocks(k) {
                let blk = h.view((i * d, k * d), (d, d)).into_owned();
                let r = &blk * ekk - (ekk + identity(d)) * &blk;
                let scale = norm_fro(&blk) * (1.0 + norm_fro(ekk));
                if scale > 0.0 {
                    worst = worst.max(norm_fro(&r) / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Coefficients at `z = 0` (`Base::Zero`) or of `H^[k]` (`Base::Tagged(k)`)
/// through the inverse ordered products of the recursive matrices.
pub fn formal_zero_coeffs(sys: &BlockedSystem, base: Base, order: usize) -> Result<SeriesCoeffs> {
    let rep = nonresonance_check(sys, NONRESONANCE_TOL)?;
    if !rep.full_pass() {
        return Err(Error::Resonant(format!("residue matrix (margin {:.3e})", rep.full_margin)));
    }
    let n = sys.n();
    let solver = ShiftSolver::new(&sys.a)?;
    let u = sys.u_matrix();
    let mut coeffs = vec![identity(n)];
    match base {
        Base::Infinity => return Err(Error::Invalid("formal_zero_coeffs needs a finite base".into())),
        Base::Zero => {
            for p in 1..=order {
                let rhs = -(&u * &coeffs[p - 1]);
                let h = solver.solve(C64::new(-(p as f64), 0.0), &rhs).map_err(|_| Error::SingularProduct)?;
                coeffs.push(h);
            }
        }
        Base::Tagged(k) => {
            if k >= sys.nu() {
                return Err(Error::Invalid(format!("block index {k} out of range")));
            }
            let op = RecursiveOp::new(sys, k);
            let row_solver = SylvesterSolver::new(&op.a_kk, &sys.a)?;
            let vinv: Vec<C64> = op.v.iter().map(|&x| C64::new(1.0, 0.0) / x).collect();
            let range = sys.range(k);
            let mut y = CMatrix::from_fn(op.dim(), n, |a, j| if op.hat[a] == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            for p in 1..=order {
                let shift = C64::new(-(p as f64), 0.0);
                let mut x = zeros(n, n);
                let scaled = scale_rows(&vinv, &y);
                for (a, &row) in op.hat.iter().enumerate() {
                    x.row_mut(row).copy_from(&scaled.row(a));
                }
                let w = solver.solve(shift, &x).map_err(|_| Error::SingularProduct)?;
                y = CMatrix::from_fn(op.dim(), n, |a, j| w[(op.hat[a], j)]);
                let krow = -row_solver.solve(shift, &(&op.a_kh * &y)).map_err(|_| Error::SingularProduct)?;
                let mut h = zeros(n, n);
                for (a, &row) in op.hat.iter().enumerate() {
                    h.row_mut(row).copy_from(&y.row(a));
                }
                h.view_mut((range.start, 0), (range.len(), n)).copy_from(&krow);
                coeffs.push(h);
            }
        }
    }
    Ok(SeriesCoeffs { base, coeffs })
}

/// Per-order residual of the differential equation for a coefficient
/// sequence, as `(absolute, relative)` pairs for orders `0..=P`.
///
/// At `∞` the entry of order `p ≥ 1` combines the equation that fixes the
/// off-diagonal blocks of `H_p` from `H_{p−1}` with the diagonal-block
/// equation at level `p`. At `0` or a tagged point it is the equation
/// `pH_p + H_p A − A H_p = (u − c) H_{p−1}`.
pub fn ode_residual(sys: &BlockedSystem, series: &SeriesCoeffs, order: usize) -> Result<Vec<(f64, f64)>> {
    if series.order() < order {
        return Err(Error::Invalid(format!("series order {} below requested {order}", series.order())));
    }
    let n = sys.n();
    let h = &series.coeffs;
    let u = sys.u_matrix();
    let a = &sys.a;
    let na = norm_fro(a);
    let nu_norm = norm_fro(&u);
    let mut out = vec![(norm_fro(&(&h[0] - identity(n))), 0.0)];
    out[0].1 = out[0].0;
    match series.base {
        Base::Infinity => {
            let da = sys.delta_a();
            let eq = |p: usize| -> CMatrix {
                let pc = C64::new(p as f64, 0.0);
                let mut r = &h[p] * pc - &h[p] * &da + a * &h[p];
                if p + 1 < h.len() {
                    r += &u * &h[p + 1] - &h[p + 1] * &u;
                }
                r
            };
            let diag_part = |m: &CMatrix| -> f64 {
                (0..sys.nu())
                    .map(|k| {
                        let r = sys.range(k);
                        m.view((r.start, r.start), (r.len(), r.len())).norm_squared()
                    })
                    .sum::<f64>()
                    .sqrt()
            };
            for p in 1..=order {
                let prev = eq(p - 1);
                let mut full_prev = prev.clone();
                for k in 0..sys.nu() {
                    let r = sys.range(k);
                    full_prev.view_mut((r.start, r.start), (r.len(), r.len())).fill(C64::new(0.0, 0.0));
                }
                let cur = eq(p);
                let abs = (norm_fro(&full_prev).powi(2) + diag_part(&cur).powi(2)).sqrt();
                let scale = (p as f64 + 2.0 * na) * (norm_fro(&h[p - 1]) + norm_fro(&h[p])) + 2.0 * nu_norm * norm_fro(&h[p]);
                out.push((abs, if scale > 0.0 { abs / scale } else { abs }));
            }
        }
        Base::Zero | Base::Tagged(_) => {
            let shifted = match series.base {
                Base::Tagged(k) => &u - identity(n) * sys.u[k],
                _ => u.clone(),
            };
            let ns = norm_fro(&shifted);
            for p in 1..=order {
                let pc = C64::new(p as f64, 0.0);
                let r = &h[p] * pc + &h[p] * a - a * &h[p] - &shifted * &h[p - 1];
                let abs = norm_fro(&r);
                let scale = (p as f64 + 2.0 * na) * norm_fro(&h[p]) + ns * norm_fro(&h[p - 1]);
                out.push((abs, if scale > 0.0 { abs / scale } else { abs }));
            }
        }
    }
    Ok(out)
}
