//! Single Stokes entries and connection rows/columns as normalized products.

use super::accel::{accelerate, state_scale, ProductConfig, ProductTrace, Stepper};
use crate::error::{Error, Result};
use crate::hypersys::{scale_rows, RecursiveOp};
use crate::hypersys::{pair_direction, BlockedSystem};
use crate::numkit::{cpow, eig, zeros, CMatrix, ShiftSolver, Spectral, SylvesterSolver, C64};
use crate::yangian::build_tk;

/// First index `i ∉ {s, t}` whose `u_i` lies on the closed segment
/// `[u_s, u_t]` within `tol · |u_t − u_s|`.
pub fn segment_blocker(u: &[C64], s: usize, t: usize, tol: f64) -> Option<usize> {
    let d = u[t] - u[s];
    let len = d.norm();
    (0..u.len()).filter(|&i| i != s && i != t).find(|&i| {
        let w = (u[i] - u[s]) / d;
        let along = w.re.clamp(0.0, 1.0);
        (w - C64::new(along, 0.0)).norm() * len < tol * len
    })
}

/// First index `i ∉ {s, t}` whose `u_i` lies on the line through `u_s`, `u_t`.
pub fn line_blocker(u: &[C64], s: usize, t: usize, tol: f64) -> Option<usize> {
    let d = u[t] - u[s];
    (0..u.len())
        .filter(|&i| i != s && i != t)
        .find(|&i| ((u[i] - u[s]) / d).im.abs() < tol)
}

/// Diagnostic form of the sufficient convergence condition: the largest
/// diagonal-block norm, and whether `u_s` is the nearest point to `u_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardReport {
    pub max_block_norm: f64,
    pub block_norm_ok: bool,
    pub nearest_ok: bool,
}

/// Computes the [`GuardReport`] of the pair `(s, t)` for the plus product.
pub fn convergence_guard(sys: &BlockedSystem, s: usize, t: usize) -> GuardReport {
    let max_block_norm = sys.diagonal_blocks().iter().map(crate::numkit::norm2).fold(0.0, f64::max);
    let d = (sys.u[t] - sys.u[s]).norm();
    let nearest_ok = (0..sys.nu()).filter(|&j| j != t).all(|j| (sys.u[t] - sys.u[j]).norm() >= d * (1.0 - 1e-12));
    GuardReport { max_block_norm, block_norm_ok: max_block_norm < 0.25, nearest_ok }
}

/// Positions inside `hat` of the rows belonging to block `b`.
fn positions(sys: &BlockedSystem, hat: &[usize], b: usize) -> Vec<usize> {
    let r = sys.range(b);
    hat.iter().enumerate().filter(|(_, i)| r.contains(i)).map(|(p, _)| p).collect()
}

fn rows(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

fn cols(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

/// `p^{±E}` from a cached eigendecomposition.
fn ppow(sp: &Spectral, p: usize, sign: f64) -> Result<CMatrix> {
    let l = (p as f64).ln() * sign;
    sp.apply(|lam| Ok((lam * l).exp()))
}

/// The pair data shared by all formulas: `Δ = u_t − u_s` with argument `θ`.
struct PairData {
    delta: C64,
    theta: f64,
}

impl PairData {
    fn new(sys: &BlockedSystem, s: usize, t: usize, tau: Option<f64>) -> Result<Self> {
        let delta = sys.u[t] - sys.u[s];
        let tau = tau.unwrap_or_else(|| pair_direction(&sys.u, s, t));
        let theta = -tau;
        if crate::numkit::wrap_angle(theta - delta.arg()).abs() > 1e-9 {
            return Err(Error::ArgumentMismatch { re: delta.re, im: delta.im, theta });
        }
        Ok(Self { delta, theta })
    }

    /// `Δ^{E_l} X Δ^{−E_r}`.
    fn conj(&self, el: &CMatrix, x: &CMatrix, er: &CMatrix) -> Result<CMatrix> {
        Ok(cpow(self.delta, self.theta, el)? * x * cpow(self.delta, self.theta, &(-er))?)
    }
}

fn check_indices(sys: &BlockedSystem, s: usize, t: usize) -> Result<()> {
    if s >= sys.nu() || t >= sys.nu() || s == t {
        return Err(Error::Invalid(format!("invalid pair ({s}, {t})")));
    }
    Ok(())
}

fn check_segment(sys: &BlockedSystem, s: usize, t: usize, cfg: &ProductConfig) -> Result<()> {
    check_indices(sys, s, t)?;
    if let Some(b) = segment_blocker(&sys.u, s, t, cfg.segment_tol) {
        return Err(Error::SegmentBlocked { s, t, blocker: b });
    }
    Ok(())
}

/// `G_p = Δ^p/(p−1)! · (H_p)_t̂t`, advanced by `G_{p+1} = L_t(p − A_tt^r) G_p · Δ/p`.
struct PlusStepper {
    op: RecursiveOp,
    solver: SylvesterSolver,
    delta: C64,
    p: usize,
    g: CMatrix,
    rows_s: Vec<usize>,
    spec_s: Spectral,
    spec_t: Spectral,
}

impl Stepper for PlusStepper {
    fn p(&self) -> usize {
        self.p
    }
    fn step(&mut self) -> Result<()> {
        let shift = C64::new(self.p as f64, 0.0);
        let next = self.op.apply_right(shift, &self.op.a_kk, &self.solver, &self.g)?;
        self.g = next * (self.delta / self.p as f64);
        self.p += 1;
        Ok(())
    }
    fn value(&self) -> Result<CMatrix> {
        Ok(ppow(&self.spec_s, self.p, -1.0)? * rows(&self.g, &self.rows_s) * ppow(&self.spec_t, self.p, 1.0)?)
    }
    fn scale(&self) -> f64 {
        state_scale(&self.g)
    }
}

/// `Y_p = A_sŝ · Π_{m=1}^{p} (L_s(−m − A_ss^l) · Δ/m)`.
struct MinusStepper {
    op: RecursiveOp,
    solver: SylvesterSolver,
    delta: C64,
    p: usize,
    y: CMatrix,
    cols_t: Vec<usize>,
    spec_s: Spectral,
    spec_t: Spectral,
}

impl Stepper for MinusStepper {
    fn p(&self) -> usize {
        self.p
    }
    fn step(&mut self) -> Result<()> {
        let m = self.p + 1;
        let shift = C64::new(-(m as f64), 0.0);
        let next = self.op.apply_left(shift, &self.op.a_kk, &self.solver, &self.y)?;
        self.y = next * (self.delta / m as f64);
        self.p = m;
        Ok(())
    }
    fn value(&self) -> Result<CMatrix> {
        Ok(ppow(&self.spec_s, self.p, -1.0)? * cols(&self.y, &self.cols_t) * ppow(&self.spec_t, self.p, 1.0)?)
    }
    fn scale(&self) -> f64 {
        state_scale(&self.y)
    }
}

/// `(S_[τ])_st / (2πi)` for `τ = −arg(u_t − u_s)` from the right-sided
/// product of `L_t`. Convergent when `u_s` is the point nearest to `u_t`.
pub fn stokes_entry_plus(sys: &BlockedSystem, s: usize, t: usize, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    stokes_entry_plus_at(sys, s, t, None, cfg)
}

/// [`stokes_entry_plus`] with the representative `τ` on the universal cover.
pub fn stokes_entry_plus_at(sys: &BlockedSystem, s: usize, t: usize, tau: Option<f64>, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    check_segment(sys, s, t, cfg)?;
    let pd = PairData::new(sys, s, t, tau)?;
    let op = RecursiveOp::new(sys, t);
    let solver = op.right_solver(&op.a_kk)?;
    let g = scale_rows(&op.v, &op.a_hk) * pd.delta;
    let rows_s = positions(sys, &op.hat, s);
    let (a_ss, a_tt) = (sys.block(s, s), sys.block(t, t));
    let modes: Vec<C64> = (0..sys.nu()).filter(|&j| j != s && j != t).map(|j| pd.delta / (sys.u[t] - sys.u[j])).collect();
    let mut st = PlusStepper { spec_s: eig(&a_ss)?, spec_t: eig(&a_tt)?, op, solver, delta: pd.delta, p: 1, g, rows_s };
    let (lim, trace) = accelerate(&mut st, &modes, cfg)?;
    Ok((pd.conj(&a_ss, &lim, &a_tt)?, trace))
}

/// `(S_[τ])_st / (2πi)` from the left-sided product of `L_s`. Convergent
/// when `u_t` is the point nearest to `u_s`.
pub fn stokes_entry_minus(sys: &BlockedSystem, s: usize, t: usize, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    stokes_entry_minus_at(sys, s, t, None, cfg)
}

/// [`stokes_entry_minus`] with the representative `τ` on the universal cover.
pub fn stokes_entry_minus_at(sys: &BlockedSystem, s: usize, t: usize, tau: Option<f64>, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    check_segment(sys, s, t, cfg)?;
    let pd = PairData::new(sys, s, t, tau)?;
    let op = RecursiveOp::new(sys, s);
    let solver = op.left_solver(&op.a_kk)?;
    let y = op.a_kh.clone();
    let cols_t = positions(sys, &op.hat, t);
    let (a_ss, a_tt) = (sys.block(s, s), sys.block(t, t));
    let modes: Vec<C64> = (0..sys.nu()).filter(|&j| j != s && j != t).map(|j| pd.delta / (sys.u[j] - sys.u[s])).collect();
    let mut st = MinusStepper { spec_s: eig(&a_ss)?, spec_t: eig(&a_tt)?, op, solver, delta: pd.delta, p: 0, y, cols_t };
    let (lim, trace) = accelerate(&mut st, &modes, cfg)?;
    Ok((pd.conj(&a_ss, &lim, &a_tt)?, trace))
}

/// Which of the two quantum product forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumForm {
    /// Right-sided product of `T_j(m)`, `m = 1..p`.
    First,
    /// Left-sided product of `T_i(m)`, `m = −p..−1`.
    Second,
}

impl QuantumForm {
    /// The exponent shift `c` in the normalizer `p^{ħ(e_ii − e_jj + c)}`.
    pub fn standard_shift(self) -> f64 {
        match self {
            QuantumForm::First => -1.0,
            QuantumForm::Second => 1.0,
        }
    }
}

struct QuantumStepper {
    sys: BlockedSystem,
    form: QuantumForm,
    /// The block whose `T` is multiplied in: `j` for the first form, `i` for the second.
    k: usize,
    delta: C64,
    p: usize,
    x: CMatrix,
    pos: usize,
    dim: usize,
    norm: Spectral,
}

impl Stepper for QuantumStepper {
    fn p(&self) -> usize {
        self.p
    }
    fn step(&mut self) -> Result<()> {
        let m = self.p + 1;
        let f = self.delta / m as f64;
        self.x = match self.form {
            QuantumForm::First => build_tk(&self.sys, self.k, C64::new(m as f64, 0.0))?.mat * &self.x * f,
            QuantumForm::Second => &self.x * build_tk(&self.sys, self.k, C64::new(-(m as f64), 0.0))?.mat * f,
        };
        self.p = m;
        Ok(())
    }
    fn value(&self) -> Result<CMatrix> {
        let d = self.dim;
        let pw = ppow(&self.norm, self.p, 1.0)?;
        Ok(match self.form {
            QuantumForm::First => pw * self.x.view((self.pos * d, 0), (d, d)),
            QuantumForm::Second => self.x.view((0, self.pos * d), (d, d)) * pw,
        })
    }
    fn scale(&self) -> f64 {
        state_scale(&self.x)
    }
}

/// `Δ^{ħe_ii} (S_[τ])_ij Δ^{−ħe_jj} / (2πi)` for a quantum system from the
/// products of `T_k(m)`. The normalizer exponent is `ħ(e_ii − e_jj + shift)`;
/// [`QuantumForm::standard_shift`] gives the convergent choice.
pub fn quantum_entry(sys: &BlockedSystem, i: usize, j: usize, form: QuantumForm, shift: f64, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    check_segment(sys, i, j, cfg)?;
    let q = sys.quantum.as_ref().ok_or_else(|| Error::Invalid("system has no quantum tag".into()))?;
    let (hbar, rep) = (q.hbar, &q.rep);
    let d = rep.dim;
    let delta = sys.u[j] - sys.u[i];
    let expo = (rep.e(i, i) - rep.e(j, j) + CMatrix::identity(d, d) * C64::new(shift, 0.0)) * hbar;
    let norm = eig(&expo)?;
    let (k, other) = match form {
        QuantumForm::First => (j, i),
        QuantumForm::Second => (i, j),
    };
    let blocks = sys.hat_blocks(k);
    let pos = blocks.iter().position(|&b| b == other).expect("other block in complement");
    let mut x = match form {
        QuantumForm::First => zeros(blocks.len() * d, d),
        QuantumForm::Second => zeros(d, blocks.len() * d),
    };
    for (a, &b) in blocks.iter().enumerate() {
        match form {
            QuantumForm::First => {
                let blk = rep.e(b, j) * (-hbar / (sys.u[j] - sys.u[b]) * delta);
                x.view_mut((a * d, 0), (d, d)).copy_from(&blk);
            }
            QuantumForm::Second => {
                let blk = rep.e(i, b) * (-hbar);
                x.view_mut((0, a * d), (d, d)).copy_from(&blk);
            }
        }
    }
    let modes: Vec<C64> = (0..sys.nu())
        .filter(|&m| m != i && m != j)
        .map(|m| match form {
            QuantumForm::First => delta / (sys.u[j] - sys.u[m]),
            QuantumForm::Second => delta / (sys.u[m] - sys.u[i]),
        })
        .collect();
    let mut st = QuantumStepper { sys: sys.clone(), form, k, delta, p: 0, x, pos, dim: d, norm };
    accelerate(&mut st, &modes, cfg)
}

/// Row `t` of the connection matrix `C_{τ±ε}`, `τ = −arg(u_t − u_s)`, taken
/// at the representative `tau` (principal when `None`). Convergent when
/// `u_t` is the point farthest from `u_s`.
pub fn connection_row(sys: &BlockedSystem, t: usize, s: usize, tau: Option<f64>, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    check_indices(sys, s, t)?;
    if let Some(b) = line_blocker(&sys.u, s, t, cfg.segment_tol) {
        return Err(Error::LineBlocked { s, t, blocker: b });
    }
    let pd = PairData::new(sys, s, t, tau)?;
    let hat = sys.hat_indices(s);
    let pos_t = positions(sys, &hat, t);
    let vinv: Vec<C64> = hat
        .iter()
        .map(|&r| {
            let b = (0..sys.nu()).find(|&b| sys.range(b).contains(&r)).expect("row in some block");
            sys.u[s] - sys.u[b]
        })
        .collect();
    let n = sys.n();
    let mut g = zeros(hat.len(), n);
    for (a, &r) in hat.iter().enumerate() {
        g[(a, r)] = C64::new(1.0, 0.0);
    }
    let a_tt = sys.block(t, t);
    let modes: Vec<C64> = (0..sys.nu()).filter(|&j| j != s && j != t).map(|j| (sys.u[j] - sys.u[s]) / pd.delta).collect();
    let mut st = RowStepper {
        solver: ShiftSolver::new(&sys.a)?,
        hat,
        vinv,
        n,
        delta: pd.delta,
        p: 0,
        g,
        pos_t,
        spec_t: eig(&a_tt)?,
        spec_a: eig(&sys.a)?,
    };
    let (lim, trace) = accelerate(&mut st, &modes, cfg)?;
    Ok((cpow(pd.delta, pd.theta, &a_tt)? * lim * cpow(pd.delta, pd.theta, &(-&sys.a))?, trace))
}

/// `G_p = p!/Δ^p · L_s(−p − A^r)⁻¹ ⋯ L_s(−1 − A^r)⁻¹ I_ŝ∗`, using
/// `L_s(w)⁻¹ = [(w + A)⁻¹]_ŝŝ v⁻¹`.
struct RowStepper {
    solver: ShiftSolver,
    hat: Vec<usize>,
    vinv: Vec<C64>,
    n: usize,
    delta: C64,
    p: usize,
    g: CMatrix,
    pos_t: Vec<usize>,
    spec_t: Spectral,
    spec_a: Spectral,
}

impl Stepper for RowStepper {
    fn p(&self) -> usize {
        self.p
    }
    fn step(&mut self) -> Result<()> {
        let m = self.p + 1;
        let mut e = zeros(self.n, self.n);
        for (a, &r) in self.hat.iter().enumerate() {
            for c in 0..self.n {
                e[(r, c)] = self.g[(a, c)] * self.vinv[a];
            }
        }
        let z = self.solver.solve(C64::new(-(m as f64), 0.0), &e)?;
        self.g = rows(&z, &self.hat) * (C64::new(m as f64, 0.0) / self.delta);
        self.p = m;
        Ok(())
    }
    fn value(&self) -> Result<CMatrix> {
        Ok(ppow(&self.spec_t, self.p, -1.0)? * rows(&self.g, &self.pos_t) * ppow(&self.spec_a, self.p, 1.0)?)
    }
    fn scale(&self) -> f64 {
        state_scale(&self.g)
    }
}

/// Column `s` of `C_{τ±ε}⁻¹`, `τ = −arg(u_t − u_s)`, obtained as the
/// transposed row `s` of the connection matrix of the dual system
/// `(−u, −Aᵀ)` in the same direction. Convergent when `u_s` is the point
/// farthest from `u_t`.
pub fn connection_col(sys: &BlockedSystem, t: usize, s: usize, tau: Option<f64>, cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    let dual = sys.dual()?;
    let (row, trace) = connection_row(&dual, s, t, tau.or_else(|| Some(pair_direction(&sys.u, s, t))), cfg)?;
    Ok((row.transpose(), trace))
}
