//! Quantum group structure of Stokes matrices of quantum systems: the
//! standard R-matrix, the RLL relations of the modified Stokes matrices,
//! the induced `U_q(gl_ν)` generators, and the commutation relations of the
//! product matrix `𝒯`.

mod oneside;

pub use oneside::{
    classify_segments, oneside_residuals, script_T, OnesideReport, RelationKind, RelationResidual, ScriptT,
    SegmentRelation, GEOMETRY_BAND,
};

use crate::error::{Error, Result};
use crate::hypersys::BlockedSystem;
use crate::numkit::{identity, inverse, mat_fun, norm2, zeros, CMatrix, C64};
use crate::stokes::{assemble_with, im_ordering, EntryProvider};
use std::f64::consts::PI;

/// `R = Σ_{i≠j} E_ii⊗E_jj + q Σ E_ii⊗E_ii + (q − q⁻¹) Σ_{j<i} E_ij⊗E_ji`
/// on `ℂ^ν ⊗ ℂ^ν`, with `(a, c)` stored at index `a·ν + c`.
#[derive(Debug, Clone)]
pub struct RMatrix {
    pub nu: usize,
    pub q: C64,
    pub mat: CMatrix,
}

/// The standard R-matrix for `gl_ν` at parameter `q`.
#[allow(non_snake_case)]
pub fn standard_R(nu: usize, q: C64) -> Result<RMatrix> {
    if q.norm() == 0.0 {
        return Err(Error::Invalid("q must be nonzero".into()));
    }
    let mut mat = zeros(nu * nu, nu * nu);
    for i in 0..nu {
        for j in 0..nu {
            let k = i * nu + j;
            mat[(k, k)] = if i == j { q } else { C64::new(1.0, 0.0) };
        }
    }
    for i in 0..nu {
        for j in 0..i {
            // E_ij ⊗ E_ji maps e_j ⊗ e_i to e_i ⊗ e_j.
            mat[(i * nu + j, j * nu + i)] = q - q.inv();
        }
    }
    Ok(RMatrix { nu, q, mat })
}

impl RMatrix {
    /// `R₂₁ = P R P` with `P` the flip of the two factors.
    pub fn flipped(&self) -> RMatrix {
        let nu = self.nu;
        let sw = |k: usize| (k % nu) * nu + k / nu;
        let mat = CMatrix::from_fn(nu * nu, nu * nu, |i, j| self.mat[(sw(i), sw(j))]);
        RMatrix { nu, q: self.q, mat }
    }
}

/// RLL residuals of modified Stokes matrices against `R₂₁`, the form in which
/// they hold when `S_d^+` is block upper triangular in the `Im(u_k e^{id})`
/// decreasing labelling.
pub fn rll_check(l: &ModifiedL) -> Result<(f64, f64, f64)> {
    let r = standard_R(l.sys.nu(), l.q)?.flipped();
    rll_residuals(&r, &l.l_plus, &l.l_minus, l.dim())
}

/// Places a two-slot operator on slots `(a, b)` of `(ℂ^ν)^{⊗3}`.
fn embed_pair(r: &CMatrix, nu: usize, a: usize, b: usize) -> CMatrix {
    let n3 = nu * nu * nu;
    let digits = |k: usize| [k / (nu * nu), (k / nu) % nu, k % nu];
    CMatrix::from_fn(n3, n3, |row, col| {
        let (x, y) = (digits(row), digits(col));
        let spectator = 3 - a - b;
        if x[spectator] != y[spectator] {
            return C64::new(0.0, 0.0);
        }
        r[(x[a] * nu + x[b], y[a] * nu + y[b])]
    })
}

/// `‖R₁₂R₁₃R₂₃ − R₂₃R₁₃R₁₂‖₂`.
pub fn yang_baxter_residual(r: &RMatrix) -> f64 {
    let r12 = embed_pair(&r.mat, r.nu, 0, 1);
    let r13 = embed_pair(&r.mat, r.nu, 0, 2);
    let r23 = embed_pair(&r.mat, r.nu, 1, 2);
    norm2(&(&r12 * &r13 * &r23 - &r23 * &r13 * &r12))
}

/// `q = e^{πiħ}`.
pub fn q_of(hbar: C64) -> C64 {
    (C64::new(0.0, PI) * hbar).exp()
}

/// `q^X = e^{πiħX}` for diagonalizable `X`.
pub fn q_power(hbar: C64, x: &CMatrix) -> Result<CMatrix> {
    mat_fun(x, |l| Ok((C64::new(0.0, PI) * hbar * l).exp()))
}

/// Modified Stokes matrices `L_± = q^{∓δ_u E} S_d^±` of a quantum system,
/// after reindexing the blocks so that `Im(u_k e^{id})` decreases in `k`.
#[derive(Debug, Clone)]
pub struct ModifiedL {
    /// `perm[k]` is the original index of block `k`.
    pub perm: Vec<usize>,
    /// The reindexed system.
    pub sys: BlockedSystem,
    pub d: f64,
    pub hbar: C64,
    pub q: C64,
    pub s_plus: CMatrix,
    pub s_minus: CMatrix,
    pub l_plus: CMatrix,
    pub l_minus: CMatrix,
    /// `e_kk` acting on `V`, in the reindexed labelling.
    pub cartan: Vec<CMatrix>,
}

impl ModifiedL {
    /// Dimension of `V`.
    pub fn dim(&self) -> usize {
        self.sys.mult[0]
    }
}

/// Assembles `S_d^±` of a quantum system from `provider` in the reindexed
/// labelling and forms `L_± = q^{∓δ_u E} S_d^±`. Raises
/// [`Error::OrderingFailure`] when two points have equal `Im(u_k e^{id})`.
#[allow(non_snake_case)]
pub fn modified_L(sys: &BlockedSystem, d: f64, provider: &EntryProvider) -> Result<ModifiedL> {
    let tag = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("modified_L needs a quantum system".into()))?;
    let perm = im_ordering(&sys.u, d)?;
    let psys = sys.permuted(&perm)?;
    let rep = &psys.quantum.as_ref().expect("permuted keeps the tag").rep;
    let hbar = tag.hbar;
    let set = assemble_with(&psys, d, provider)?;
    let n = psys.n();
    let dim = rep.dim;
    let cartan: Vec<CMatrix> = (0..psys.nu()).map(|k| rep.e(k, k).clone()).collect();
    let mut delta_e = zeros(n, n);
    for (k, h) in cartan.iter().enumerate() {
        delta_e.view_mut((k * dim, k * dim), (dim, dim)).copy_from(h);
    }
    let l_plus = q_power(hbar, &(-&delta_e))? * &set.plus;
    let l_minus = q_power(hbar, &delta_e)? * &set.minus;
    Ok(ModifiedL {
        perm,
        sys: psys,
        d,
        hbar,
        q: q_of(hbar),
        s_plus: set.plus,
        s_minus: set.minus,
        l_plus,
        l_minus,
        cartan,
    })
}

/// `L^{(1)}` or `L^{(2)}` on `V ⊗ ℂ^ν ⊗ ℂ^ν` for `L` stored block-major on
/// `ℂ^ν ⊗ V`.
fn lift(l: &CMatrix, nu: usize, dim: usize, slot: usize) -> CMatrix {
    let n = dim * nu * nu;
    let split = |k: usize| (k / (nu * nu), (k / nu) % nu, k % nu);
    CMatrix::from_fn(n, n, |row, col| {
        let (v, a, c) = split(row);
        let (w, b, dd) = split(col);
        let zero = C64::new(0.0, 0.0);
        match slot {
            1 if c == dd => l[(a * dim + v, b * dim + w)],
            2 if a == b => l[(c * dim + v, dd * dim + w)],
            _ => zero,
        }
    })
}

/// Spectral-norm residuals of `R L_±⁽¹⁾ L_±⁽²⁾ = L_±⁽²⁾ L_±⁽¹⁾ R` and
/// `R L_+⁽¹⁾ L_−⁽²⁾ = L_−⁽²⁾ L_+⁽¹⁾ R`, returned as `(r_pp, r_mm, r_pm)`.
pub fn rll_residuals(r: &RMatrix, l_plus: &CMatrix, l_minus: &CMatrix, dim: usize) -> Result<(f64, f64, f64)> {
    let nu = r.nu;
    if l_plus.nrows() != nu * dim || l_minus.nrows() != nu * dim {
        return Err(Error::ShapeMismatch("L must be (ν·dim V)×(ν·dim V)".into()));
    }
    let r12 = identity(dim).kronecker(&r.mat);
    let (p1, p2) = (lift(l_plus, nu, dim, 1), lift(l_plus, nu, dim, 2));
    let (m1, m2) = (lift(l_minus, nu, dim, 1), lift(l_minus, nu, dim, 2));
    let res = |a1: &CMatrix, b2: &CMatrix, a2: &CMatrix, b1: &CMatrix| norm2(&(&r12 * a1 * b2 - a2 * b1 * &r12));
    Ok((res(&p1, &p2, &p2, &p1), res(&m1, &m2, &m2, &m1), res(&p1, &m2, &m2, &p1)))
}

/// Images of the `U_q(gl_ν)` generators and the largest residual of each
/// family of defining relations.
#[derive(Debug, Clone)]
pub struct UqReport {
    pub f: Vec<CMatrix>,
    pub e: Vec<CMatrix>,
    /// Images of `q^{h_j}`.
    pub k: Vec<CMatrix>,
    /// `q^{h_j} x q^{−h_j} = q^{c} x` for `x = f_i, e_i`.
    pub weight: f64,
    /// `f_i e_i − e_i f_i = (q^{h_i−h_{i+1}} − q^{h_{i+1}−h_i})/(q − q⁻¹)`.
    pub fe_diagonal: f64,
    /// `f_{i₂} e_{i₁} = e_{i₁} f_{i₂}` for `i₁ ≠ i₂`.
    pub fe_cross: f64,
    /// Cubic Serre relations for `|i₁ − i₂| = 1`.
    pub serre: f64,
    /// Commutation for `|i₁ − i₂| ≥ 2`.
    pub far: f64,
}

impl UqReport {
    pub fn max_residual(&self) -> f64 {
        [self.weight, self.fe_diagonal, self.fe_cross, self.serre, self.far].into_iter().fold(0.0, f64::max)
    }
}

/// `f_i ↦ s⁺_{i,i+1}/(q − q⁻¹)`, `e_i ↦ −q^{h_{i+1}} s⁻_{i+1,i} q^{−h_i}/(q − q⁻¹)`,
/// `q^{±h_j} ↦ q^{±e_jj}`, with the relation residuals.
pub fn uq_generator_map(l: &ModifiedL) -> Result<UqReport> {
    let nu = l.sys.nu();
    let dim = l.dim();
    let q = l.q;
    let qq = q - q.inv();
    if qq.norm() < 1e-14 {
        return Err(Error::Invalid("q − q⁻¹ vanishes".into()));
    }
    let blk = |m: &CMatrix, i: usize, j: usize| m.view((i * dim, j * dim), (dim, dim)).into_owned();
    let k: Vec<CMatrix> = l.cartan.iter().map(|h| q_power(l.hbar, h)).collect::<Result<_>>()?;
    let kinv: Vec<CMatrix> = k.iter().map(inverse).collect::<Result<_>>()?;
    let f: Vec<CMatrix> = (0..nu - 1).map(|i| blk(&l.s_plus, i, i + 1) / qq).collect();
    let e: Vec<CMatrix> =
        (0..nu - 1).map(|i| -(&k[i + 1] * blk(&l.s_minus, i + 1, i) * &kinv[i]) / qq).collect();
    let qp = |x: f64| (C64::new(0.0, PI) * l.hbar * x).exp();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut weight: f64 = 0.0;
    for j in 0..nu {
        for i in 0..nu - 1 {
            let cf = qp(delta(i, j) - delta(j, i + 1));
            let ce = qp(delta(i + 1, j) - delta(j, i));
            weight = weight.max(norm2(&(&k[j] * &f[i] * &kinv[j] - &f[i] * cf)));
            weight = weight.max(norm2(&(&k[j] * &e[i] * &kinv[j] - &e[i] * ce)));
        }
    }
    let mut fe_diagonal: f64 = 0.0;
    let mut fe_cross: f64 = 0.0;
    let mut serre: f64 = 0.0;
    let mut far: f64 = 0.0;
    let qsum = q + q.inv();
    let cubic = |x: &CMatrix, y: &CMatrix| x * x * y - x * y * x * qsum + y * x * x;
    for i1 in 0..nu - 1 {
        let rhs = (&k[i1] * &kinv[i1 + 1] - &k[i1 + 1] * &kinv[i1]) / qq;
        fe_diagonal = fe_diagonal.max(norm2(&(&f[i1] * &e[i1] - &e[i1] * &f[i1] - rhs)));
        for i2 in 0..nu - 1 {
            if i1 == i2 {
                continue;
            }
            fe_cross = fe_cross.max(norm2(&(&f[i2] * &e[i1] - &e[i1] * &f[i2])));
            if i1.abs_diff(i2) == 1 {
                serre = serre.max(norm2(&cubic(&f[i1], &f[i2]))).max(norm2(&cubic(&e[i1], &e[i2])));
            } else {
                far = far.max(norm2(&(&f[i1] * &f[i2] - &f[i2] * &f[i1])));
                far = far.max(norm2(&(&e[i1] * &e[i2] - &e[i2] * &e[i1])));
            }
        }
    }
    Ok(UqReport { f, e, k, weight, fe_diagonal, fe_cross, serre, far })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, cr};

    #[test]
    fn rank_one_r_matrix_is_q() {
        let q = c(0.3, 0.7);
        let r = standard_R(1, q).unwrap();
        assert_eq!(r.mat.shape(), (1, 1));
        assert_eq!(r.mat[(0, 0)], q);
    }

    #[test]
    fn r_matrix_at_q_one_is_identity() {
        let r = standard_R(3, cr(1.0)).unwrap();
        assert!(norm2(&(r.mat - identity(9))) == 0.0);
    }

    #[test]
    fn yang_baxter_holds() {
        for nu in 2..=3 {
            let r = standard_R(nu, q_of(cr(0.3))).unwrap();
            assert!(yang_baxter_residual(&r) <= 1e-13, "nu = {nu}");
            assert!(yang_baxter_residual(&r.flipped()) <= 1e-13);
        }
    }

    #[test]
    fn zero_q_is_rejected() {
        assert!(standard_R(2, cr(0.0)).is_err());
    }

    #[test]
    fn flip_moves_the_off_diagonal_term_above_the_diagonal() {
        let r = standard_R(2, c(0.5, 0.5)).unwrap();
        let f = r.flipped();
        let qq = r.q - r.q.inv();
        assert_eq!(r.mat[(2, 1)], qq);
        assert_eq!(f.mat[(1, 2)], qq);
        assert_eq!(f.mat[(2, 1)], cr(0.0));
    }

    #[test]
    fn q_power_of_identity_is_scalar() {
        let h = c(0.3, 0.1);
        let p = q_power(h, &identity(2)).unwrap();
        assert!((p[(0, 0)] - q_of(h)).norm() < 1e-15);
        assert!(p[(0, 1)].norm() < 1e-15);
    }
}
