//! The matrices `T_k(λ)` built from a quantum system and their RTT relations.

use crate::error::{Error, Result};
use crate::hypersys::BlockedSystem;
use crate::numkit::{identity, norm2, zeros, CMatrix, C64};

/// `T_k(λ)` as a `(ν−1)·dim` square matrix over the blocks `{0..ν}∖{k}`.
#[derive(Debug, Clone)]
pub struct TkMatrix {
    pub k: usize,
    pub lambda: C64,
    /// Block index set, in increasing order.
    pub blocks: Vec<usize>,
    pub dim: usize,
    pub mat: CMatrix,
}

impl TkMatrix {
    /// Block `(i, j)` addressed by positions in [`Self::blocks`].
    pub fn block(&self, a: usize, b: usize) -> CMatrix {
        self.mat.view((a * self.dim, b * self.dim), (self.dim, self.dim)).into_owned()
    }
}

/// Evaluates `T_k(λ)_ij = ((λ + ħ(e_kk + 1))δ_ij − ħ e_ij − ħ² e_ik e_kj / λ) / (u_k − u_i)`.
pub fn build_tk(sys: &BlockedSystem, k: usize, lambda: C64) -> Result<TkMatrix> {
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    if lambda.norm() == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if k >= sys.nu() {
        return Err(Error::Invalid(format!("block index {k} out of range")));
    }
    let (d, hbar, rep) = (q.rep.dim, q.hbar, &q.rep);
    let blocks = sys.hat_blocks(k);
    let m = blocks.len();
    let mut mat = zeros(m * d, m * d);
    let ekk1 = rep.e(k, k) + identity(d);
    for (a, &i) in blocks.iter().enumerate() {
        let pre = C64::new(1.0, 0.0) / (sys.u[k] - sys.u[i]);
        for (b, &j) in blocks.iter().enumerate() {
            let mut blk = rep.e(i, j) * (-hbar) - rep.e(i, k) * rep.e(k, j) * (hbar * hbar / lambda);
            if i == j {
                blk += identity(d) * lambda + &ekk1 * hbar;
            }
            mat.view_mut((a * d, b * d), (d, d)).copy_from(&(blk * pre));
        }
    }
    Ok(TkMatrix { k, lambda, blocks, dim: d, mat })
}

/// Maximal residual of
/// `(1/ħ)[T(λ₁)_{i₁i₀}, T(λ₂)_{j₁j₀}] − (T(λ₂)_{j₁i₀}T(λ₁)_{i₁j₀} − T(λ₁)_{j₁i₀}T(λ₂)_{i₁j₀})/(λ₁ − λ₂)`
/// over all index quadruples, as `(absolute, relative to ‖T(λ₁)‖‖T(λ₂)‖)`.
pub fn rtt_residual(sys: &BlockedSystem, k: usize, lambda1: C64, lambda2: C64) -> Result<(f64, f64)> {
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    if q.hbar.norm() == 0.0 {
        return Err(Error::ZeroHbar);
    }
    if lambda1.norm() == 0.0 || lambda2.norm() == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if (lambda1 - lambda2).norm() == 0.0 {
        return Err(Error::EqualLambdas);
    }
    let t1 = build_tk(sys, k, lambda1)?;
    let t2 = build_tk(sys, k, lambda2)?;
    let m = t1.blocks.len();
    let b1: Vec<Vec<CMatrix>> = (0..m).map(|a| (0..m).map(|b| t1.block(a, b)).collect()).collect();
    let b2: Vec<Vec<CMatrix>> = (0..m).map(|a| (0..m).map(|b| t2.block(a, b)).collect()).collect();
    let inv_h = C64::new(1.0, 0.0) / q.hbar;
    let inv_l = C64::new(1.0, 0.0) / (lambda1 - lambda2);
    let mut worst: f64 = 0.0;
    for i0 in 0..m {
        for i1 in 0..m {
            for j0 in 0..m {
                for j1 in 0..m {
                    let lhs = (&b1[i1][i0] * &b2[j1][j0] - &b2[j1][j0] * &b1[i1][i0]) * inv_h;
                    let rhs = (&b2[j1][i0] * &b1[i1][j0] - &b1[j1][i0] * &b2[i1][j0]) * inv_l;
                    worst = worst.max(norm2(&(lhs - rhs)));
                }
            }
        }
    }
    let scale = norm2(&t1.mat) * norm2(&t2.mat);
    Ok((worst, worst / scale.max(f64::MIN_POSITIVE)))
}

/// Residual of `[T_k(λ), diag(e_kk + 1, …, e_kk + 1)] = 0`.
pub fn tk_weight_commutation_residual(sys: &BlockedSystem, t: &TkMatrix) -> Result<f64> {
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    let d = t.dim;
    let m = t.blocks.len();
    let blk = q.rep.e(t.k, t.k) + identity(d);
    let mut dmat = zeros(m * d, m * d);
    for a in 0..m {
        dmat.view_mut((a * d, a * d), (d, d)).copy_from(&blk);
    }
    Ok(norm2(&(&t.mat * &dmat - &dmat * &t.mat)))
}
