//! Blocked confluent hypergeometric systems `dF/dz = (u + A/z) F`.
//!
//! Block indices are zero-based. A system with `ν` distinct values
//! `u_0, …, u_{ν−1}` of multiplicities `n_0, …, n_{ν−1}` has size
//! `n = Σ n_k`; `A` is viewed as a `ν × ν` block matrix.

mod formal;
mod recursive;

pub use formal::{
    formal_inf_coeffs, formal_zero_coeffs, ode_residual, quantum_H_coeffs, quantum_column_identity_residual,
    Base, SeriesCoeffs,
};
pub use recursive::{recursive_matrix, RecursiveOp};
pub(crate) use recursive::{scale_cols, scale_rows};

use crate::error::{Error, Result};
use crate::glrep::Rep;
use crate::numkit::{block_diag, diag, eig, ensure_finite, wrap_angle, zeros, CMatrix, C64};
use std::f64::consts::PI;

/// Minimum pairwise distance of the `u` values.
pub const DISTINCT_U_TOL: f64 = 1e-9;

/// Default non-resonance tolerance.
pub const NONRESONANCE_TOL: f64 = 1e-8;

/// Quantum provenance of a system with `A = −ħ E^V`.
#[derive(Debug, Clone)]
pub struct QuantumTag {
    pub rep: Rep,
    pub hbar: C64,
}

/// A system `dF/dz = (u + A/z) F` with block-scalar diagonal `u`.
#[derive(Debug, Clone)]
pub struct BlockedSystem {
    pub u: Vec<C64>,
    pub mult: Vec<usize>,
    pub a: CMatrix,
    pub quantum: Option<QuantumTag>,
    offsets: Vec<usize>,
}

impl BlockedSystem {
    /// Classical system from distinct `u`, multiplicities and residue `A`.
    pub fn new(u: Vec<C64>, mult: Vec<usize>, a: CMatrix) -> Result<Self> {
        if u.len() != mult.len() || u.is_empty() {
            return Err(Error::ShapeMismatch("u and mult must be non-empty and of equal length".into()));
        }
        if mult.iter().any(|&m| m == 0) {
            return Err(Error::Invalid("multiplicities must be positive".into()));
        }
        let n: usize = mult.iter().sum();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::ShapeMismatch(format!("A must be {n}×{n}")));
        }
        ensure_finite(&a, "residue matrix")?;
        for i in 0..u.len() {
            if !(u[i].re.is_finite() && u[i].im.is_finite()) {
                return Err(Error::NonFinite("u"));
            }
            for j in (i + 1)..u.len() {
                if (u[i] - u[j]).norm() <= DISTINCT_U_TOL {
                    return Err(Error::DegenerateU(i, j));
                }
            }
        }
        let mut offsets = Vec::with_capacity(mult.len() + 1);
        let mut acc = 0;
        for &m in &mult {
            offsets.push(acc);
            acc += m;
        }
        offsets.push(acc);
        Ok(Self { u, mult, a, quantum: None, offsets })
    }

    /// Quantum system `A_ij = −ħ e_ij` in the representation `rep`.
    pub fn from_quantum(rep: &Rep, u: Vec<C64>, hbar: C64) -> Result<Self> {
        if u.len() != rep.nu {
            return Err(Error::RankMismatch(u.len(), rep.nu));
        }
        let d = rep.dim;
        let n = rep.nu * d;
        let mut a = zeros(n, n);
        for i in 0..rep.nu {
            for j in 0..rep.nu {
                a.view_mut((i * d, j * d), (d, d)).copy_from(&(rep.e(i, j) * (-hbar)));
            }
        }
        let mut sys = Self::new(u, vec![d; rep.nu], a)?;
        sys.quantum = Some(QuantumTag { rep: rep.clone(), hbar });
        Ok(sys)
    }

    /// Number of distinct `u` values.
    pub fn nu(&self) -> usize {
        self.u.len()
    }

    /// Total dimension.
    pub fn n(&self) -> usize {
        self.offsets[self.nu()]
    }

    /// Row range of block `k`.
    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Offset of block `k`.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Row indices of every block except `k`, in increasing order.
    pub fn hat_indices(&self, k: usize) -> Vec<usize> {
        (0..self.n()).filter(|i| !self.range(k).contains(i)).collect()
    }

    /// Block indices other than `k`.
    pub fn hat_blocks(&self, k: usize) -> Vec<usize> {
        (0..self.nu()).filter(|&j| j != k).collect()
    }

    /// Block `A_ij`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        self.a.view((self.offsets[i], self.offsets[j]), (self.mult[i], self.mult[j])).into_owned()
    }

    /// The full diagonal matrix `u`.
    pub fn u_matrix(&self) -> CMatrix {
        let vals: Vec<C64> = (0..self.nu()).flat_map(|k| std::iter::repeat(self.u[k]).take(self.mult[k])).collect();
        diag(&vals)
    }

    /// Formal monodromy `δ_u A = diag(A_00, …, A_{ν−1,ν−1})`.
    pub fn delta_a(&self) -> CMatrix {
        let blocks: Vec<CMatrix> = (0..self.nu()).map(|k| self.block(k, k)).collect();
        block_diag(&blocks)
    }

    /// Diagonal blocks of `A`.
    pub fn diagonal_blocks(&self) -> Vec<CMatrix> {
        (0..self.nu()).map(|k| self.block(k, k)).collect()
    }

    /// The dual system `(−uᵀ, −Aᵀ)` with the same multiplicities.
    pub fn dual(&self) -> Result<Self> {
        let u = self.u.iter().map(|&x| -x).collect();
        Self::new(u, self.mult.clone(), -self.a.transpose())
    }

    /// Copy with the blocks permuted: block `k` of the result is block
    /// `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let u = perm.iter().map(|&k| self.u[k]).collect();
        let mult: Vec<usize> = perm.iter().map(|&k| self.mult[k]).collect();
        let rows: Vec<usize> = perm.iter().flat_map(|&k| self.range(k)).collect();
        let a = CMatrix::from_fn(self.n(), self.n(), |i, j| self.a[(rows[i], rows[j])]);
        let mut out = Self::new(u, mult, a)?;
        if let Some(q) = &self.quantum {
            let gen = perm.iter().map(|&i| perm.iter().map(|&j| q.rep.gen[i][j].clone()).collect()).collect();
            let rep = Rep::from_generators(q.rep.nu, gen)?;
            out.quantum = Some(QuantumTag { rep, hbar: q.hbar });
        }
        Ok(out)
    }

    /// Permutation matrix `P` with `P · M_perm · Pᵀ = M` for matrices built
    /// on [`Self::permuted`]`(perm)`.
    pub fn permutation_matrix(&self, perm: &[usize]) -> CMatrix {
        let rows: Vec<usize> = perm.iter().flat_map(|&k| self.range(k)).collect();
        let mut p = zeros(self.n(), self.n());
        for (new, &old) in rows.iter().enumerate() {
            p[(old, new)] = C64::new(1.0, 0.0);
        }
        p
    }
}

/// Result of a non-resonance check.
#[derive(Debug, Clone)]
pub struct NonresonanceReport {
    /// Per diagonal block: distance of eigenvalue differences to ℤ∖{0}.
    pub block_margins: Vec<f64>,
    /// Same quantity for the full matrix `A`.
    pub full_margin: f64,
    pub tol: f64,
}

impl NonresonanceReport {
    /// True iff every diagonal block is non-resonant.
    pub fn blocks_pass(&self) -> bool {
        self.block_margins.iter().all(|&m| m > self.tol)
    }

    /// True iff the full residue is non-resonant.
    pub fn full_pass(&self) -> bool {
        self.full_margin > self.tol
    }
}

/// Distance from the set of eigenvalue differences of `m` to ℤ∖{0}.
pub fn resonance_margin(m: &CMatrix) -> Result<f64> {
    let vals = eig(m)?.values;
    let mut best = f64::INFINITY;
    for a in &vals {
        for b in &vals {
            let d = a - b;
            let mut k = d.re.round();
            if k == 0.0 {
                k = if d.re >= 0.0 { 1.0 } else { -1.0 };
            }
            best = best.min((d - C64::new(k, 0.0)).norm());
        }
    }
    Ok(best)
}

/// Checks every diagonal block and the full residue for resonance.
pub fn nonresonance_check(sys: &BlockedSystem, tol: f64) -> Result<NonresonanceReport> {
    let block_margins = (0..sys.nu()).map(|k| resonance_margin(&sys.block(k, k))).collect::<Result<Vec<_>>>()?;
    let full_margin = resonance_margin(&sys.a)?;
    Ok(NonresonanceReport { block_margins, full_margin, tol })
}

/// One anti-Stokes direction with the ordered pairs `(s, t)` it supports,
/// meaning `−arg(u_t − u_s) ≡ τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiStokesRay {
    pub tau: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// Anti-Stokes directions in `(−π, π]`, sorted increasingly. Directions come
/// in pairs `τ`, `τ + π`; the number of them is `2l` with `l` the period.
pub fn anti_stokes(sys: &BlockedSystem) -> Vec<AntiStokesRay> {
    anti_stokes_of(&sys.u)
}

/// [`anti_stokes`] from the `u` values alone.
pub fn anti_stokes_of(u: &[C64]) -> Vec<AntiStokesRay> {
    let mut rays: Vec<AntiStokesRay> = Vec::new();
    for s in 0..u.len() {
        for t in 0..u.len() {
            if s == t {
                continue;
            }
            let tau = wrap_angle(-(u[t] - u[s]).arg());
            match rays.iter_mut().find(|r| wrap_angle(r.tau - tau).abs() <= 1e-10) {
                Some(r) => r.pairs.push((s, t)),
                None => rays.push(AntiStokesRay { tau, pairs: vec![(s, t)] }),
            }
        }
    }
    rays.sort_by(|a, b| a.tau.partial_cmp(&b.tau).expect("finite angles"));
    rays
}

/// Anti-Stokes direction `−arg(u_t − u_s)` in `(−π, π]` of the pair `(s, t)`.
pub fn pair_direction(u: &[C64], s: usize, t: usize) -> f64 {
    wrap_angle(-(u[t] - u[s]).arg())
}

/// Anti-Stokes directions lying in the open interval `(lo, hi)` of the
/// universal cover, with their supporting pairs, sorted increasingly.
pub fn anti_stokes_in(u: &[C64], lo: f64, hi: f64) -> Vec<AntiStokesRay> {
    let base = anti_stokes_of(u);
    let mut out = Vec::new();
    let kmin = ((lo - PI) / (2.0 * PI)).floor() as i64 - 1;
    let kmax = ((hi + PI) / (2.0 * PI)).ceil() as i64 + 1;
    for k in kmin..=kmax {
        for r in &base {
            let tau = r.tau + 2.0 * PI * k as f64;
            if tau > lo && tau < hi {
                out.push(AntiStokesRay { tau, pairs: r.pairs.clone() });
            }
        }
    }
    out.sort_by(|a, b| a.tau.partial_cmp(&b.tau).expect("finite angles"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glrep::defining_rep;
    use crate::numkit::{c, cr, from_real_rows};

    #[test]
    fn quantum_blocks() {
        let sys = BlockedSystem::from_quantum(&defining_rep(2), vec![cr(0.0), cr(1.0)], cr(0.3)).unwrap();
        assert_eq!(sys.n(), 4);
        let a01 = sys.block(0, 1);
        assert_eq!(a01[(0, 1)], cr(-0.3));
        assert_eq!(a01[(1, 0)], cr(0.0));
        let zero = BlockedSystem::from_quantum(&defining_rep(2), vec![cr(0.0), cr(1.0)], cr(0.0)).unwrap();
        assert!(zero.a.iter().all(|z| z.norm() == 0.0));
        assert!(matches!(
            BlockedSystem::from_quantum(&defining_rep(2), vec![cr(0.0), cr(0.0)], cr(0.3)),
            Err(Error::DegenerateU(0, 1))
        ));
    }

    #[test]
    fn nonresonance() {
        let z = BlockedSystem::new(vec![cr(0.0), cr(1.0)], vec![1, 1], zeros(2, 2)).unwrap();
        assert!(nonresonance_check(&z, NONRESONANCE_TOL).unwrap().full_pass());
        let r = BlockedSystem::new(vec![cr(0.0), cr(1.0)], vec![1, 1], from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(!nonresonance_check(&r, NONRESONANCE_TOL).unwrap().full_pass());
        let q = BlockedSystem::from_quantum(&defining_rep(2), vec![cr(0.0), cr(1.0)], cr(0.3)).unwrap();
        let rep = nonresonance_check(&q, NONRESONANCE_TOL).unwrap();
        assert!(rep.blocks_pass() && rep.full_pass());
    }

    #[test]
    fn anti_stokes_two_points() {
        let rays = anti_stokes_of(&[cr(0.0), cr(1.0)]);
        assert_eq!(rays.len(), 2);
        assert!(rays[0].tau.abs() < 1e-15 && rays[0].pairs == vec![(0, 1)]);
        assert!((rays[1].tau - PI).abs() < 1e-15 && rays[1].pairs == vec![(1, 0)]);
        assert!(anti_stokes_of(&[cr(0.0)]).is_empty());
        assert_eq!(anti_stokes_of(&[cr(0.0), cr(1.0), c(0.0, 1.0)]).len(), 6);
    }

    #[test]
    fn anti_stokes_collinear_shares_direction() {
        let rays = anti_stokes_of(&[cr(0.0), cr(1.0), cr(2.0)]);
        assert_eq!(rays.len(), 2);
        assert_eq!(rays[0].pairs.len(), 3);
    }
}
