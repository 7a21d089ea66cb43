//! The product matrix `𝒯` and its commutation relations, classified by the
//! relative position of the segments `[u_s, u_t]`.

use crate::error::{Error, Result};
use crate::hypersys::{pair_direction, BlockedSystem};
use crate::numkit::{cpow, norm2, CMatrix, C64};
use crate::stokes::EntryProvider;
use std::f64::consts::PI;

/// `𝒯_st = (u_t − u_s)^{ħe_ss} (S_[τ])_st (u_t − u_s)^{−ħe_tt} / (2πi)` with
/// `τ = −arg(u_t − u_s)`, for every ordered pair the entry source resolves.
#[derive(Debug, Clone)]
#[allow(non_snake_case)]
pub struct ScriptT {
    pub nu: usize,
    pub dim: usize,
    pub hbar: C64,
    pub q: C64,
    pub u: Vec<C64>,
    /// `e_kk` acting on `V`.
    pub cartan: Vec<CMatrix>,
    /// `entries[s][t]`, `None` on the diagonal and where the source failed.
    pub entries: Vec<Vec<Option<CMatrix>>>,
    /// Ray `τ_st` used for each entry; the power arguments are `−τ_st`.
    pub tau: Vec<Vec<f64>>,
    /// Failure messages for unresolved entries.
    pub failures: Vec<((usize, usize), String)>,
}

impl ScriptT {
    pub fn get(&self, s: usize, t: usize) -> Result<&CMatrix> {
        self.entries[s][t]
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("entry ({s}, {t}) of the product matrix is unavailable")))
    }
}

/// Builds `𝒯` of a quantum system from Stokes entries supplied by
/// `provider`. Entries the source cannot resolve (non-convergent products,
/// inaccurate integration, blocked segments) are recorded in `failures`.
#[allow(non_snake_case)]
pub fn script_T(sys: &BlockedSystem, provider: &EntryProvider) -> Result<ScriptT> {
    let tag = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("script_T needs a quantum system".into()))?;
    let nu = sys.nu();
    let dim = tag.rep.dim;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut entries = vec![vec![None; nu]; nu];
    let mut tau = vec![vec![0.0; nu]; nu];
    let mut failures = Vec::new();
    for s in 0..nu {
        for t in 0..nu {
            if s == t {
                continue;
            }
            let tt = pair_direction(&sys.u, s, t);
            tau[s][t] = tt;
            match provider(sys, s, t, tt) {
                Ok(x) => {
                    let delta = sys.u[t] - sys.u[s];
                    let left = cpow(delta, -tt, &(-sys.block(s, s)))?;
                    let right = cpow(delta, -tt, &sys.block(t, t))?;
                    entries[s][t] = Some(left * x * right / two_pi_i);
                }
                Err(e @ (Error::NotConverged { .. } | Error::NotAccurate(_) | Error::SegmentBlocked { .. })) => {
                    failures.push(((s, t), e.to_string()));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ScriptT {
        nu,
        dim,
        hbar: tag.hbar,
        q: super::q_of(tag.hbar),
        u: sys.u.clone(),
        cartan: (0..nu).map(|k| tag.rep.e(k, k).clone()).collect(),
        entries,
        tau,
        failures,
    })
}

/// Relative position of two segments `[u_{s₁}, u_{t₁}]`, `[u_{s₂}, u_{t₂}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRelation {
    /// Four distinct endpoints, segments do not meet.
    Disjoint,
    /// Four distinct endpoints, segments cross at an interior point.
    Crossing,
    /// Exactly one endpoint in common.
    SharedEndpoint,
    /// Same endpoints, possibly in opposite order.
    SamePair,
}

/// Orientation of `(a, b, c)`: sign of `Im((b − a) conj(c − a))` scaled by the
/// lengths, with `0` inside the degeneracy band.
fn orientation(a: C64, b: C64, c: C64, band: f64) -> i32 {
    let (x, y) = (b - a, c - a);
    let cross = x.re * y.im - x.im * y.re;
    let scale = x.norm() * y.norm();
    if cross.abs() <= band * scale.max(f64::MIN_POSITIVE) {
        0
    } else if cross > 0.0 {
        1
    } else {
        -1
    }
}

/// Degeneracy band of the orientation predicates.
pub const GEOMETRY_BAND: f64 = 1e-9;

/// Classifies two index pairs by the relative position of their segments,
/// using orientation predicates with the band [`GEOMETRY_BAND`].
pub fn classify_segments(u: &[C64], p1: (usize, usize), p2: (usize, usize)) -> Result<SegmentRelation> {
    let (s1, t1) = p1;
    let (s2, t2) = p2;
    let mut ends = [s1, t1, s2, t2];
    ends.sort_unstable();
    let distinct = 1 + ends.windows(2).filter(|w| w[0] != w[1]).count();
    match distinct {
        2 => return Ok(SegmentRelation::SamePair),
        3 => return Ok(SegmentRelation::SharedEndpoint),
        4 => {}
        _ => return Err(Error::Invalid("segments need distinct endpoints".into())),
    }
    let o1 = orientation(u[s1], u[t1], u[s2], GEOMETRY_BAND);
    let o2 = orientation(u[s1], u[t1], u[t2], GEOMETRY_BAND);
    let o3 = orientation(u[s2], u[t2], u[s1], GEOMETRY_BAND);
    let o4 = orientation(u[s2], u[t2], u[t1], GEOMETRY_BAND);
    if [o1, o2, o3, o4].contains(&0) {
        return Err(Error::GeometryAmbiguous(format!(
            "points of ({}, {}) and ({}, {}) are collinear within the band",
            s1 + 1,
            t1 + 1,
            s2 + 1,
            t2 + 1
        )));
    }
    if o1 != o2 && o3 != o4 {
        Ok(SegmentRelation::Crossing)
    } else {
        Ok(SegmentRelation::Disjoint)
    }
}

/// The commutation relation a residual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    /// `[𝒯_{s₁t₁}, 𝒯_{s₂t₂}] = 0` for disjoint segments.
    Disjoint,
    /// Crossing segments with `arg(u_{t₂}−u_{s₂}) − arg(u_{t₁}−u_{s₁}) ∈ (0, π)`.
    Crossing,
    /// `𝒯_sm 𝒯_mt` against `𝒯_mt 𝒯_sm` and `𝒯_st`.
    TriangleChain,
    /// `𝒯_ms 𝒯_mt` against `𝒯_mt 𝒯_ms`.
    TriangleSource,
    /// `𝒯_sm 𝒯_tm` against `𝒯_tm 𝒯_sm`.
    TriangleSink,
    /// `[𝒯_st, 𝒯_ts]` against `q^{e_ss−e_tt} − q^{e_tt−e_ss}`.
    Opposite,
    /// `q^{e_kk} 𝒯_st q^{−e_kk} = q^{δ_sk − δ_kt} 𝒯_st`.
    Weight,
}

/// One evaluated relation.
#[derive(Debug, Clone)]
pub struct RelationResidual {
    pub kind: RelationKind,
    /// Indices in the order `(s₁, t₁, s₂, t₂)`, `(s, m, t)`, `(s, t)` or `(s, t, k)`.
    pub indices: Vec<usize>,
    /// `‖LHS − RHS‖₂`.
    pub residual: f64,
    /// `‖RHS‖₂`, or the norm of the first product when the right side vanishes.
    pub scale: f64,
    /// Crossing relation only: residual with the scalar powers placed to the
    /// right of `𝒯_{s₁t₂} 𝒯_{s₂t₁}`.
    pub alternative: Option<f64>,
}

/// All relations that apply to the available entries of a [`ScriptT`].
#[derive(Debug, Clone)]
pub struct OnesideReport {
    pub residuals: Vec<RelationResidual>,
    /// Index tuples skipped because an entry was unavailable.
    pub skipped: Vec<(RelationKind, Vec<usize>)>,
}

impl OnesideReport {
    /// Largest residual of one kind, `None` if no relation of that kind fired.
    pub fn max_of(&self, kind: RelationKind) -> Option<f64> {
        self.residuals.iter().filter(|r| r.kind == kind).map(|r| r.residual).reduce(f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// `(num/den)^ħ` on the principal branch of the ratio.
fn ratio_power(num: C64, den: C64, hbar: C64) -> C64 {
    ((num / den).ln() * hbar).exp()
}

/// Operator power `(num/den)^{ħX}` on the principal branch of the ratio.
fn ratio_power_op(num: C64, den: C64, hbar: C64, x: &CMatrix) -> Result<CMatrix> {
    let r = num / den;
    cpow(r, r.arg(), &(x * hbar))
}

/// Tolerance on the distance of an argument difference from `0` or `±π`.
const ARG_BAND: f64 = 1e-9;

/// Evaluates every relation among distinct indices whose entries are
/// available. Scalar powers of ratios use the principal branch of the
/// ratio; the powers in the crossing relation use arguments of `u_t − u_s`
/// lifted to within `π` of `arg(u_{t₁} − u_{s₁})`, and are applied to the
/// left of `𝒯_{s₁t₂} 𝒯_{s₂t₁}`.
pub fn oneside_residuals(t: &ScriptT) -> Result<OnesideReport> {
    let nu = t.nu;
    let u = &t.u;
    let hbar = t.hbar;
    let q = t.q;
    let qq = q - q.inv();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let id = CMatrix::identity(t.dim, t.dim);
    let h = &t.cartan;
    let qpow = |x: &CMatrix| super::q_power(hbar, x);
    let mut residuals = Vec::new();
    let mut skipped = Vec::new();
    let avail = |s: usize, tt: usize| t.entries[s][tt].is_some();

    // Weight relations.
    for s in 0..nu {
        for tt in 0..nu {
            if s == tt || !avail(s, tt) {
                continue;
            }
            let x = t.get(s, tt)?;
            for k in 0..nu {
                let shift = if k == s { 1.0 } else { 0.0 } - if k == tt { 1.0 } else { 0.0 };
                let lhs = qpow(&h[k])? * x * qpow(&(-&h[k]))?;
                let rhs = x * (C64::new(0.0, PI) * hbar * shift).exp();
                residuals.push(RelationResidual {
                    kind: RelationKind::Weight,
                    indices: vec![s, tt, k],
                    residual: norm2(&(lhs - &rhs)),
                    scale: norm2(&rhs),
                    alternative: None,
                });
            }
        }
    }

    // Opposite pairs.
    for s in 0..nu {
        for tt in 0..nu {
            if s == tt {
                continue;
            }
            if !(avail(s, tt) && avail(tt, s)) {
                skipped.push((RelationKind::Opposite, vec![s, tt]));
                continue;
            }
            let (a, b) = (t.get(s, tt)?, t.get(tt, s)?);
            let lhs = (a * b - b * a) / (qq / two_pi_i);
            let rhs = (qpow(&(&h[s] - &h[tt]))? - qpow(&(&h[tt] - &h[s]))?) / two_pi_i;
            residuals.push(RelationResidual {
                kind: RelationKind::Opposite,
                indices: vec![s, tt],
                residual: norm2(&(lhs - &rhs)),
                scale: norm2(&rhs),
                alternative: None,
            });
        }
    }

    // Triangles.
    for s in 0..nu {
        for m in 0..nu {
            for tt in 0..nu {
                if s == m || m == tt || s == tt {
                    continue;
                }
                let idx = vec![s, m, tt];
                if avail(s, m) && avail(m, tt) && avail(s, tt) {
                    let (sm, mt, st) = (t.get(s, m)?, t.get(m, tt)?, t.get(s, tt)?);
                    let base = u[tt] - u[s];
                    let lhs = (sm * mt * ratio_power(u[s] - u[m], base, hbar)
                        - mt * sm * ratio_power(u[tt] - u[m], base, hbar))
                        / (qq / two_pi_i);
                    let rhs = -(ratio_power_op(u[m] - u[s], base, hbar, &(&h[s] - &h[m]))?
                        * ratio_power_op(u[tt] - u[m], base, hbar, &(&h[m] - &h[tt]))?
                        * st);
                    residuals.push(RelationResidual {
                        kind: RelationKind::TriangleChain,
                        indices: idx.clone(),
                        residual: norm2(&(lhs - &rhs)),
                        scale: norm2(&rhs),
                        alternative: None,
                    });
                } else {
                    skipped.push((RelationKind::TriangleChain, idx.clone()));
                }
                let factor = ratio_power(u[m] - u[s], u[tt] - u[m], hbar);
                if avail(m, s) && avail(m, tt) {
                    let (ms, mt) = (t.get(m, s)?, t.get(m, tt)?);
                    residuals.push(RelationResidual {
                        kind: RelationKind::TriangleSource,
                        indices: idx.clone(),
                        residual: norm2(&(ms * mt - mt * ms * factor)),
                        scale: norm2(&(ms * mt)),
                        alternative: None,
                    });
                } else {
                    skipped.push((RelationKind::TriangleSource, idx.clone()));
                }
                if avail(s, m) && avail(tt, m) {
                    let (sm, tm) = (t.get(s, m)?, t.get(tt, m)?);
                    residuals.push(RelationResidual {
                        kind: RelationKind::TriangleSink,
                        indices: idx.clone(),
                        residual: norm2(&(sm * tm - tm * sm * factor)),
                        scale: norm2(&(sm * tm)),
                        alternative: None,
                    });
                } else {
                    skipped.push((RelationKind::TriangleSink, idx));
                }
            }
        }
    }

    // Four distinct indices.
    for s1 in 0..nu {
        for t1 in 0..nu {
            for s2 in 0..nu {
                for t2 in 0..nu {
                    let idx = [s1, t1, s2, t2];
                    if (0..4).any(|a| (a + 1..4).any(|b| idx[a] == idx[b])) {
                        continue;
                    }
                    let idx = idx.to_vec();
                    match classify_segments(u, (s1, t1), (s2, t2))? {
                        SegmentRelation::Disjoint => {
                            if !(avail(s1, t1) && avail(s2, t2)) {
                                skipped.push((RelationKind::Disjoint, idx));
                                continue;
                            }
                            let (x, y) = (t.get(s1, t1)?, t.get(s2, t2)?);
                            residuals.push(RelationResidual {
                                kind: RelationKind::Disjoint,
                                indices: idx,
                                residual: norm2(&(x * y - y * x)),
                                scale: norm2(&(x * y)),
                                alternative: None,
                            });
                        }
                        SegmentRelation::Crossing => {
                            let a1 = (u[t1] - u[s1]).arg();
                            let diff = crate::numkit::wrap_angle((u[t2] - u[s2]).arg() - a1);
                            if diff.abs() < ARG_BAND || (PI - diff.abs()) < ARG_BAND {
                                return Err(Error::GeometryAmbiguous(format!(
                                    "crossing segments ({}, {}) and ({}, {}) are parallel within the band",
                                    s1 + 1,
                                    t1 + 1,
                                    s2 + 1,
                                    t2 + 1
                                )));
                            }
                            if diff < 0.0 {
                                continue;
                            }
                            if !(avail(s1, t1) && avail(s2, t2) && avail(s1, t2) && avail(s2, t1)) {
                                skipped.push((RelationKind::Crossing, idx));
                                continue;
                            }
                            let lifted = |a: usize, b: usize| a1 + crate::numkit::wrap_angle((u[b] - u[a]).arg() - a1);
                            let pairs = [(s1, t1), (s2, t2), (s1, t2), (s2, t1)];
                            let args: Vec<f64> = pairs.iter().map(|&(a, b)| lifted(a, b)).collect();
                            for i in 0..4 {
                                for j in 0..4 {
                                    if (args[i] - args[j]).abs() >= PI {
                                        return Err(Error::ArgumentWindowViolation(format!(
                                            "arguments of u_{} − u_{} and u_{} − u_{} differ by at least π",
                                            pairs[i].1 + 1,
                                            pairs[i].0 + 1,
                                            pairs[j].1 + 1,
                                            pairs[j].0 + 1
                                        )));
                                    }
                                }
                            }
                            let power = |k: usize| -> Result<CMatrix> {
                                let (a, b) = pairs[k];
                                cpow(u[b] - u[a], args[k], &((&h[b] - &h[a] + &id) * hbar))
                            };
                            let pre = power(2)? * power(3)? * crate::numkit::inverse(&(power(0)? * power(1)?))?;
                            let (x, y) = (t.get(s1, t1)?, t.get(s2, t2)?);
                            let lhs = (x * y - y * x) / qq;
                            let prod = t.get(s1, t2)? * t.get(s2, t1)?;
                            let rhs = &pre * &prod;
                            residuals.push(RelationResidual {
                                kind: RelationKind::Crossing,
                                indices: idx,
                                residual: norm2(&(&lhs - &rhs)),
                                scale: norm2(&rhs),
                                alternative: Some(norm2(&(&lhs - &prod * &pre))),
                            });
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(OnesideReport { residuals, skipped })
}
