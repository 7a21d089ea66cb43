//! Canonical solutions `ℒ_k^±` of the difference system `Ψ(z+1) = L_k(z)Ψ(z)`
//! and the periodic connection matrix `𝔏_k(z) = ℒ_k^+(z)⁻¹ℒ_k^−(z)`.

use super::accel::{accelerate, state_scale, ProductConfig, ProductTrace, Stepper};
use super::assemble::{product_entry, EntryProvider};
use crate::error::{Error, Result};
use crate::hypersys::{pair_direction, BlockedSystem, RecursiveOp};
use crate::numkit::{block_diag, cpow, eig, scalar_cpow, zeros, CMatrix, Spectral, C64};
use std::f64::consts::PI;

/// Which canonical solution to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `ℒ_k^+(1+z)⁻¹`.
    Plus,
    /// `ℒ_k^−(z)`.
    Minus,
}

/// Block data of `k̂`: for each complementary block, `u_k − u_j` and `A_jj`.
struct Complement {
    blocks: Vec<usize>,
    diffs: Vec<C64>,
    row_diffs: Vec<C64>,
    delta_b: Spectral,
}

impl Complement {
    fn new(sys: &BlockedSystem, k: usize) -> Result<Self> {
        let blocks = sys.hat_blocks(k);
        let diffs: Vec<C64> = blocks.iter().map(|&j| sys.u[k] - sys.u[j]).collect();
        let row_diffs = blocks.iter().zip(&diffs).flat_map(|(&j, &d)| std::iter::repeat_n(d, sys.mult[j])).collect();
        let db = block_diag(&blocks.iter().map(|&j| sys.block(j, j)).collect::<Vec<_>>());
        Ok(Self { blocks, diffs, row_diffs, delta_b: eig(&db)? })
    }

    /// Ratios `(u_k − u_j)/(u_k − u_i)` of distinct complementary values.
    fn modes(&self) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::new();
        for (a, da) in self.diffs.iter().enumerate() {
            for (b, db) in self.diffs.iter().enumerate() {
                let r = da / db;
                if a != b && !out.iter().any(|o| (o - r).norm() < 1e-12) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Block-diagonal `diag((±(u_k − u_j))^e_j)` with principal arguments.
    fn scalar_power(&self, sys: &BlockedSystem, sign: f64, e: C64) -> Result<CMatrix> {
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (&j, &d) in self.blocks.iter().zip(&self.diffs) {
            let w = d * sign;
            let f = scalar_cpow(w, w.arg(), e)?;
            parts.push(CMatrix::identity(sys.mult[j], sys.mult[j]) * f);
        }
        Ok(block_diag(&parts))
    }
}

fn check_pole(sys: &BlockedSystem, k: usize, z: C64, side: Side) -> Result<()> {
    let lam = eig(&sys.block(k, k))?;
    for l in lam.values.iter() {
        // Factors L_k(w) are singular at w = −λ.
        let w = -l - z;
        let m = w.re.round();
        let hit = match side {
            Side::Plus => m >= 1.0,
            Side::Minus => m <= -1.0,
        };
        if hit && (w - C64::new(m, 0.0)).norm() < 1e-10 {
            return Err(Error::PoleHit { re: z.re, im: z.im });
        }
    }
    Ok(())
}

struct DiffStepper {
    op: RecursiveOp,
    side: Side,
    z: C64,
    row_diffs: Vec<C64>,
    p: usize,
    x: CMatrix,
    delta_b: Spectral,
}

impl Stepper for DiffStepper {
    fn p(&self) -> usize {
        self.p
    }
    fn step(&mut self) -> Result<()> {
        let m = self.p + 1;
        let mf = m as f64;
        let pm = (m - 1) as i32;
        // X_m = D^m/m! · L(z+m)⋯L(z+1) for the plus side, so
        // X_m = (D/m)(D^{m−1} L D^{−(m−1)}) X_{m−1}; the minus side mirrors it.
        let d = &self.row_diffs;
        self.x = match self.side {
            Side::Plus => {
                let mut l = self.op.matrix(self.z + mf)?;
                for i in 0..l.nrows() {
                    for j in 0..l.ncols() {
                        if i != j && l[(i, j)] != C64::new(0.0, 0.0) {
                            l[(i, j)] *= (d[i] / d[j]).powi(pm);
                        }
                    }
                }
                let scale: Vec<C64> = d.iter().map(|x| x / mf).collect();
                crate::hypersys::scale_rows(&scale, &(l * &self.x))
            }
            Side::Minus => {
                let mut l = self.op.matrix(self.z - mf)?;
                for i in 0..l.nrows() {
                    for j in 0..l.ncols() {
                        if i != j && l[(i, j)] != C64::new(0.0, 0.0) {
                            l[(i, j)] *= (d[j] / d[i]).powi(pm);
                        }
                    }
                }
                let scale: Vec<C64> = d.iter().map(|x| -x / mf).collect();
                crate::hypersys::scale_cols(&(&self.x * l), &scale)
            }
        };
        self.p = m;
        Ok(())
    }
    fn value(&self) -> Result<CMatrix> {
        let lp = (self.p as f64).ln();
        match self.side {
            Side::Plus => {
                let pw = self.delta_b.apply(|lam| Ok((-(lam + self.z) * lp).exp()))?;
                Ok(pw * &self.x)
            }
            Side::Minus => {
                let pw = self.delta_b.apply(|lam| Ok(((lam + self.z) * lp).exp()))?;
                Ok(&self.x * pw)
            }
        }
    }
    fn scale(&self) -> f64 {
        state_scale(&self.x)
    }
}

/// `ℒ_k^+(1+z)⁻¹` or `ℒ_k^−(z)` as a normalized product limit. The scalar
/// powers of `u_k − u_j` use principal arguments.
pub fn difference_solution(sys: &BlockedSystem, k: usize, side: Side, z: C64, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    if k >= sys.nu() || sys.nu() < 2 {
        return Err(Error::Invalid(format!("block index {k} out of range")));
    }
    check_pole(sys, k, z, side)?;
    let comp = Complement::new(sys, k)?;
    let op = RecursiveOp::new(sys, k);
    let dim = op.dim();
    let modes = comp.modes();
    let mut st = DiffStepper {
        op,
        side,
        z,
        row_diffs: comp.row_diffs.clone(),
        p: 0,
        x: CMatrix::identity(dim, dim),
        delta_b: comp.delta_b.clone(),
    };
    let (lim, trace) = accelerate(&mut st, &modes, cfg)?;
    let value = match side {
        Side::Plus => comp.scalar_power(sys, 1.0, C64::new(1.0, 0.0) + z)? * lim,
        Side::Minus => lim * comp.scalar_power(sys, -1.0, -z)?,
    };
    Ok((value, trace))
}

/// Residuals of the difference equation at `z`: for `ℒ^−`,
/// `‖ℒ^−(z+1) − L_k(z)ℒ^−(z)‖`; for `W(z) = ℒ^+(1+z)⁻¹`,
/// `‖W(z)L_k(z) − W(z−1)‖`. Both relative to the size of the compared values.
pub fn difference_residuals(sys: &BlockedSystem, k: usize, z: C64, cfg: &ProductConfig) -> Result<(f64, f64)> {
    let l = RecursiveOp::new(sys, k).matrix(z)?;
    let m0 = difference_solution(sys, k, Side::Minus, z, cfg)?.0;
    let m1 = difference_solution(sys, k, Side::Minus, z + 1.0, cfg)?.0;
    let lhs = &l * &m0;
    let rm = crate::numkit::norm2(&(&m1 - &lhs)) / crate::numkit::norm2(&m1).max(1e-300);
    let w0 = difference_solution(sys, k, Side::Plus, z, cfg)?.0;
    let wm = difference_solution(sys, k, Side::Plus, z - 1.0, cfg)?.0;
    let rhs = &w0 * &l;
    let rp = crate::numkit::norm2(&(&rhs - &wm)) / crate::numkit::norm2(&wm).max(1e-300);
    Ok((rm, rp))
}

/// `𝔏_k(z) = ℒ_k^+(z)⁻¹ ℒ_k^−(z)`.
#[allow(non_snake_case)]
pub fn connection_Lk_value(sys: &BlockedSystem, k: usize, z: C64, cfg: &ProductConfig) -> Result<CMatrix> {
    let w = difference_solution(sys, k, Side::Plus, z - 1.0, cfg)?.0;
    let m = difference_solution(sys, k, Side::Minus, z, cfg)?.0;
    Ok(w * m)
}

/// Periodicity and residue data of `𝔏_k`.
#[derive(Debug, Clone)]
pub struct ConnectionReport {
    pub z: C64,
    pub value: CMatrix,
    pub value_shifted: CMatrix,
    /// `‖𝔏_k(z+1) − 𝔏_k(z)‖₂`.
    pub periodicity: f64,
    /// Poles `Λ = Eigen(−A_kk)` in one period.
    pub poles: Vec<C64>,
    pub radius: f64,
    /// Sum of the residues over one period, by contour quadrature.
    pub residue_sum: CMatrix,
    /// `((u_k−u_s)^{−A_ss}(S)_sk(S)_kt(u_t−u_k)^{A_tt}/(4π²))_{s,t≠k}`.
    pub predicted: CMatrix,
    /// `‖residue_sum − predicted‖₂`.
    pub residue_mismatch: f64,
}

/// Number of contour nodes used for residues.
pub const CONTOUR_NODES: usize = 64;

/// [`ConnectionReport`] with Stokes entries from the product formulas.
#[allow(non_snake_case)]
pub fn connection_Lk(sys: &BlockedSystem, k: usize, z: C64, cfg: &ProductConfig) -> Result<ConnectionReport> {
    connection_Lk_with(sys, k, z, cfg, &|sys: &BlockedSystem, s, t, tau| product_entry(sys, s, t, tau, cfg))
}

/// [`connection_Lk`] with an arbitrary source of Stokes entries.
#[allow(non_snake_case)]
pub fn connection_Lk_with(sys: &BlockedSystem, k: usize, z: C64, cfg: &ProductConfig, provider: &EntryProvider) -> Result<ConnectionReport> {
    let value = connection_Lk_value(sys, k, z, cfg)?;
    let value_shifted = connection_Lk_value(sys, k, z + 1.0, cfg)?;
    let periodicity = crate::numkit::norm2(&(&value_shifted - &value));
    let poles: Vec<C64> = eig(&sys.block(k, k))?.values.iter().map(|l| -l).collect();
    let mut gap = f64::INFINITY;
    for (a, pa) in poles.iter().enumerate() {
        for (b, pb) in poles.iter().enumerate() {
            for shift in [-1.0, 0.0, 1.0] {
                if a != b || shift != 0.0 {
                    let dist = (pa - pb - shift).norm();
                    if dist > 1e-12 {
                        gap = gap.min(dist);
                    }
                }
            }
        }
    }
    let radius = (gap / 3.0).min(0.1);
    let dim = value.nrows();
    let mut residue_sum = zeros(dim, dim);
    let mut distinct: Vec<C64> = Vec::new();
    for p in &poles {
        if !distinct.iter().any(|q| (q - p).norm() < 1e-12) {
            distinct.push(*p);
        }
    }
    for p in &distinct {
        for j in 0..CONTOUR_NODES {
            let phi = 2.0 * PI * (j as f64 + 0.5) / CONTOUR_NODES as f64;
            let e = C64::from_polar(1.0, phi);
            let f = connection_Lk_value(sys, k, p + e * radius, cfg)?;
            residue_sum += f * (e * (radius / CONTOUR_NODES as f64));
        }
    }
    let predicted = residue_prediction(sys, k, provider)?;
    let residue_mismatch = crate::numkit::norm2(&(&residue_sum - &predicted));
    Ok(ConnectionReport { z, value, value_shifted, periodicity, poles, radius, residue_sum, predicted, residue_mismatch })
}

/// The Stokes-product side of the residue identity.
pub fn residue_prediction(sys: &BlockedSystem, k: usize, provider: &EntryProvider) -> Result<CMatrix> {
    let hat = sys.hat_blocks(k);
    let dim = sys.n() - sys.mult[k];
    let mut out = zeros(dim, dim);
    let mut row = 0;
    for &s in &hat {
        let s_sk = provider(sys, s, k, pair_direction(&sys.u, s, k))?;
        let ws = sys.u[k] - sys.u[s];
        let left = cpow(ws, ws.arg(), &(-sys.block(s, s)))?;
        let mut col = 0;
        for &t in &hat {
            let s_kt = provider(sys, k, t, pair_direction(&sys.u, k, t))?;
            let wt = sys.u[t] - sys.u[k];
            let right = cpow(wt, wt.arg(), &sys.block(t, t))?;
            let blk = &left * &s_sk * &s_kt * right / C64::new(4.0 * PI * PI, 0.0);
            out.view_mut((row, col), (sys.mult[s], sys.mult[t])).copy_from(&blk);
            col += sys.mult[t];
        }
        row += sys.mult[s];
    }
    Ok(out)
}
