//! Assembly of `S_[τ]`, `S_d^±` and checks of the identities they satisfy.

use super::accel::ProductConfig;
use super::entries::{stokes_entry_minus_at, stokes_entry_plus_at};
use crate::error::{Error, Result};
use crate::hypersys::{anti_stokes_in, BlockedSystem};
use crate::oracle::{oracle_entry, OracleConfig};
use crate::numkit::{eig, identity, inverse, mat_fun, match_values, norm2, CMatrix, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Source of Stokes entries: `(sys, s, t, τ) ↦ (S_[τ])_st` for `τ` on the
/// universal cover with `−arg(u_t − u_s) ≡ τ`.
pub type EntryProvider<'a> = dyn Fn(&BlockedSystem, usize, usize, f64) -> Result<CMatrix> + Sync + 'a;

/// One Stokes factor `S_[τ]`.
#[derive(Debug, Clone)]
pub struct StokesRay {
    pub tau: f64,
    pub pairs: Vec<(usize, usize)>,
    pub matrix: CMatrix,
}

/// Stokes data of a system in the direction `d`.
#[derive(Debug, Clone)]
pub struct StokesSet {
    pub d: f64,
    /// Factors with `τ ∈ (d − π, d + π)`, sorted by `τ`.
    pub rays: Vec<StokesRay>,
    pub plus: CMatrix,
    pub minus: CMatrix,
    /// `S_d = S_d^+ − S_d^−`.
    pub stokes: CMatrix,
    /// Block-diagonal part `δA` of the residue.
    pub formal_monodromy: CMatrix,
}

/// Product entry `(S_[τ])_st`: the plus formula, or the minus formula when
/// the plus product does not converge.
pub fn product_entry(sys: &BlockedSystem, s: usize, t: usize, tau: f64, cfg: &ProductConfig) -> Result<CMatrix> {
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    match stokes_entry_plus_at(sys, s, t, Some(tau), cfg) {
        Ok((v, _)) => Ok(v * two_pi_i),
        Err(Error::NotConverged { .. }) => Ok(stokes_entry_minus_at(sys, s, t, Some(tau), cfg)?.0 * two_pi_i),
        Err(e) => Err(e),
    }
}

/// Where a [`hybrid_entry`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySource {
    Product,
    Oracle,
}

/// `(S_[τ])_st` from the products when either of them converges, and from
/// [`oracle_entry`] when both diverge or the segment `[u_s, u_t]` is blocked.
pub fn hybrid_entry(
    sys: &BlockedSystem,
    s: usize,
    t: usize,
    tau: f64,
    cfg: &ProductConfig,
    ocfg: &OracleConfig,
) -> Result<(CMatrix, EntrySource)> {
    match product_entry(sys, s, t, tau, cfg) {
        Ok(v) => Ok((v, EntrySource::Product)),
        Err(Error::NotConverged { .. } | Error::SegmentBlocked { .. }) => {
            Ok((oracle_entry(sys, s, t, tau, ocfg)?, EntrySource::Oracle))
        }
        Err(e) => Err(e),
    }
}

/// [`assemble_Sd`] with [`hybrid_entry`] as the entry source.
pub fn assemble_hybrid(sys: &BlockedSystem, d: f64, cfg: &ProductConfig, ocfg: &OracleConfig) -> Result<StokesSet> {
    assemble_with(sys, d, &|sys: &BlockedSystem, s, t, tau| Ok(hybrid_entry(sys, s, t, tau, cfg, ocfg)?.0))
}

/// Identity plus the given blocks `(s, t) ↦ X`.
fn unipotent(sys: &BlockedSystem, blocks: &[((usize, usize), CMatrix)]) -> CMatrix {
    let mut m = identity(sys.n());
    for ((s, t), x) in blocks {
        m.view_mut((sys.offset(*s), sys.offset(*t)), (x.nrows(), x.ncols())).copy_from(x);
    }
    m
}

/// `S_d^±` and all factors in `(d − π, d + π)` from product entries.
#[allow(non_snake_case)]
pub fn assemble_Sd(sys: &BlockedSystem, d: f64, cfg: &ProductConfig) -> Result<StokesSet> {
    assemble_with(sys, d, &|sys: &BlockedSystem, s, t, tau| product_entry(sys, s, t, tau, cfg))
}

/// [`assemble_Sd`] with an arbitrary entry source.
pub fn assemble_with(sys: &BlockedSystem, d: f64, provider: &EntryProvider) -> Result<StokesSet> {
    let rays = anti_stokes_in(&sys.u, d - PI - 1e-12, d + PI + 1e-12);
    if rays.iter().any(|r| (r.tau - d).abs() < 1e-10 || ((r.tau - d).abs() - PI).abs() < 1e-10) {
        return Err(Error::Invalid(format!("direction {d} is anti-Stokes")));
    }
    let tasks: Vec<(usize, usize, usize, f64)> = rays
        .iter()
        .enumerate()
        .flat_map(|(r, ray)| ray.pairs.iter().map(move |&(s, t)| (r, s, t, ray.tau)))
        .collect();
    let values: Vec<CMatrix> = tasks.par_iter().map(|&(_, s, t, tau)| provider(sys, s, t, tau)).collect::<Result<_>>()?;
    let mut out_rays = Vec::with_capacity(rays.len());
    for (r, ray) in rays.iter().enumerate() {
        let blocks: Vec<((usize, usize), CMatrix)> = tasks
            .iter()
            .zip(&values)
            .filter(|((rr, ..), _)| *rr == r)
            .map(|((_, s, t, _), v)| ((*s, *t), v.clone()))
            .collect();
        out_rays.push(StokesRay { tau: ray.tau, pairs: ray.pairs.clone(), matrix: unipotent(sys, &blocks) });
    }
    let n = sys.n();
    let mut plus = identity(n);
    for ray in out_rays.iter().filter(|r| r.tau > d) {
        plus = &ray.matrix * plus;
    }
    let mut minus = identity(n);
    for ray in out_rays.iter().filter(|r| r.tau < d) {
        minus *= inverse(&ray.matrix)?;
    }
    let stokes = &plus - &minus;
    Ok(StokesSet { d, rays: out_rays, plus, minus, stokes, formal_monodromy: sys.delta_a() })
}

/// `e^{2πik·E}` for a matrix `E`.
fn exp_2pi_i(e: &CMatrix, k: f64) -> Result<CMatrix> {
    mat_fun(e, |lam| Ok((lam * C64::new(0.0, 2.0 * PI * k)).exp()))
}

/// `S_{d+2kπ}^± = e^{−2kπiδA} S_d^± e^{2kπiδA}`.
pub fn rotate_stokes(pair: (&CMatrix, &CMatrix), delta_a: &CMatrix, k: i64) -> Result<(CMatrix, CMatrix)> {
    if k == 0 {
        return Ok((pair.0.clone(), pair.1.clone()));
    }
    let left = exp_2pi_i(delta_a, -(k as f64))?;
    let right = exp_2pi_i(delta_a, k as f64)?;
    Ok((&left * pair.0 * &right, &left * pair.1 * &right))
}

/// Residuals of the monodromy identities.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyReport {
    /// Largest distance between eigenvalues of `(S^−)⁻¹e^{2πiδA}S^+` and `e^{2πi·Eigen(A)}`.
    pub eigen_mismatch: f64,
    /// `‖C_d A C_d⁻¹ − M_d‖₂` when a connection matrix is supplied.
    pub conjugation_residual: Option<f64>,
}

/// Checks `e^{2πiM_d} = (S_d^−)⁻¹ e^{2πiδA} S_d^+` against the spectrum of
/// `A`, and `M_d = C_d A C_d⁻¹` when `c_d` is given.
pub fn monodromy_check(sys: &BlockedSystem, plus: &CMatrix, minus: &CMatrix, c_d: Option<&CMatrix>) -> Result<MonodromyReport> {
    let mono = inverse(minus)? * exp_2pi_i(&sys.delta_a(), 1.0)? * plus;
    let spec_a = eig(&sys.a)?;
    let lam: Vec<C64> = spec_a.values.iter().copied().collect();
    let want: Vec<C64> = lam.iter().map(|l| (l * C64::new(0.0, 2.0 * PI)).exp()).collect();
    let spec_m = eig(&mono)?;
    let got: Vec<C64> = spec_m.values.iter().copied().collect();
    let (perm, eigen_mismatch) = match_values(&got, &want);
    let conjugation_residual = match c_d {
        None => None,
        Some(c) => {
            // Principal logarithm with the branch fixed by the matched eigenvalue of A.
            let logs: Vec<C64> = got
                .iter()
                .zip(&perm)
                .map(|(mu, &j)| {
                    let base = mu.ln() / C64::new(0.0, 2.0 * PI);
                    base + C64::new((lam[j].re - base.re).round(), 0.0)
                })
                .collect();
            let md = &spec_m.vectors * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(logs)) * &spec_m.inv_vectors;
            Some(norm2(&(c * &sys.a * inverse(c)? - md)))
        }
    };
    Ok(MonodromyReport { eigen_mismatch, conjugation_residual })
}

/// `max(‖S_d^±(−u, −Aᵀ) − S_d^±(u, A)^{−ᵀ}‖₂)` over both signs.
pub fn duality_check(sys: &BlockedSystem, d: f64, cfg: &ProductConfig) -> Result<f64> {
    duality_check_with(sys, d, &|sys: &BlockedSystem, s, t, tau| product_entry(sys, s, t, tau, cfg))
}

/// [`duality_check`] with an arbitrary entry source.
pub fn duality_check_with(sys: &BlockedSystem, d: f64, provider: &EntryProvider) -> Result<f64> {
    let a = assemble_with(sys, d, provider)?;
    let b = assemble_with(&sys.dual()?, d, provider)?;
    let rp = norm2(&(&b.plus - inverse(&a.plus)?.transpose()));
    let rm = norm2(&(&b.minus - inverse(&a.minus)?.transpose()));
    Ok(rp.max(rm))
}

/// Block order with `Im(u_k e^{id})` strictly decreasing.
pub fn im_ordering(u: &[C64], d: f64) -> Result<Vec<usize>> {
    let rot = C64::from_polar(1.0, d);
    let mut idx: Vec<usize> = (0..u.len()).collect();
    idx.sort_by(|&a, &b| (u[b] * rot).im.total_cmp(&(u[a] * rot).im));
    for w in idx.windows(2) {
        if ((u[w[0]] - u[w[1]]) * rot).im.abs() < 1e-10 {
            return Err(Error::OrderingFailure);
        }
    }
    Ok(idx)
}

/// Block-structure residuals of `S_d^±` after reordering the blocks by
/// [`im_ordering`].
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularityReport {
    pub order: Vec<usize>,
    /// Largest strictly-lower block of the reordered `S_d^+`.
    pub plus_lower: f64,
    /// Largest strictly-upper block of the reordered `S_d^−`.
    pub minus_upper: f64,
    /// Largest `‖(S)_kk − I‖₂` over both matrices.
    pub diagonal: f64,
}

/// Computes the [`TriangularityReport`] of an assembled set.
pub fn triangularity(sys: &BlockedSystem, set: &StokesSet) -> Result<TriangularityReport> {
    let order = im_ordering(&sys.u, set.d)?;
    let blk = |m: &CMatrix, i: usize, j: usize| {
        let (bi, bj) = (order[i], order[j]);
        m.view((sys.offset(bi), sys.offset(bj)), (sys.mult[bi], sys.mult[bj])).into_owned()
    };
    let (mut plus_lower, mut minus_upper, mut diagonal) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..sys.nu() {
        for j in 0..sys.nu() {
            if i > j {
                plus_lower = plus_lower.max(norm2(&blk(&set.plus, i, j)));
            } else if i < j {
                minus_upper = minus_upper.max(norm2(&blk(&set.minus, i, j)));
            } else {
                let id = identity(sys.mult[order[i]]);
                diagonal = diagonal.max(norm2(&(blk(&set.plus, i, i) - &id))).max(norm2(&(blk(&set.minus, i, i) - &id)));
            }
        }
    }
    Ok(TriangularityReport { order, plus_lower, minus_upper, diagonal })
}
