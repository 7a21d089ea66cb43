//! Independent evaluation of Stokes and connection matrices by direct
//! integration of `dF/dz = (u + A/z)F`.
//!
//! Each column block `j` of the canonical solution `F_d` is started on a ray
//! inside its sector where `e^{u_j z}` is recessive against the other
//! exponentials, from the optimally truncated asymptotic series, and is then
//! continued to a common matching point by a Taylor-series integrator. The
//! solution at zero is the convergent series `(I + Σ H_p z^p) z^A`. Nothing
//! here uses the product formulas.

use crate::error::{Error, Result};
use crate::hypersys::{anti_stokes_in, BlockedSystem};
use crate::numkit::{cpow, inverse, norm_fro, zeros, CMatrix, SylvesterSolver, C64};
use std::f64::consts::PI;

/// Settings of the oracle.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Target accuracy of truncation and integration.
    pub tol: f64,
    /// Modulus of the matching point.
    pub match_radius: f64,
    /// Largest starting radius, as a multiple of `1/min_i |u_i − u_j|`.
    pub start_factor: f64,
    /// Order of the Taylor steps.
    pub taylor_order: usize,
    /// Upper bound on the number of integration steps per path.
    pub max_steps: usize,
    /// Largest predicted start error accepted for a column block.
    pub max_error: f64,
    /// Predicted start error accepted when neither a direct start nor
    /// transport resolves a column block.
    pub fallback_error: f64,
    /// Nesting depth of the sector-to-sector transport of column blocks.
    pub transport_depth: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            match_radius: 1.0,
            start_factor: 40.0,
            taylor_order: 36,
            max_steps: 200_000,
            max_error: 1e-9,
            fallback_error: 1e-6,
            transport_depth: 2,
        }
    }
}

/// Coefficients `H_p` of the formal solution `(I + Σ H_p z^{−p}) z^{δA} e^{uz}`
/// from `[u, H_{p+1}] = −p H_p + H_p δA − A H_p` and the vanishing of the
/// diagonal blocks of the same equation one order higher.
pub fn asymptotic_coeffs(sys: &BlockedSystem, order: usize) -> Result<Vec<CMatrix>> {
    let n = sys.n();
    let nu = sys.nu();
    let solvers: Vec<SylvesterSolver> =
        (0..nu).map(|j| SylvesterSolver::new(&sys.block(j, j), &sys.block(j, j))).collect::<Result<_>>()?;
    let da = sys.delta_a();
    let mut out = vec![CMatrix::identity(n, n)];
    for p in 0..order {
        // Coefficients grow factorially; later ones are never used by optimal truncation.
        if norm_fro(&out[p]) > 1e200 {
            break;
        }
        let h = &out[p];
        let rhs = h * &da - &sys.a * h - h * C64::new(p as f64, 0.0);
        let mut next = zeros(n, n);
        for i in 0..nu {
            for j in 0..nu {
                if i != j {
                    let blk = rhs.view((sys.offset(i), sys.offset(j)), (sys.mult[i], sys.mult[j])) / (sys.u[i] - sys.u[j]);
                    next.view_mut((sys.offset(i), sys.offset(j)), (sys.mult[i], sys.mult[j])).copy_from(&blk);
                }
            }
        }
        let q = C64::new((p + 1) as f64, 0.0);
        for j in 0..nu {
            let (oj, nj) = (sys.offset(j), sys.mult[j]);
            let mut y = zeros(nj, nj);
            for k in 0..nu {
                if k != j {
                    y -= sys.a.view((oj, sys.offset(k)), (nj, sys.mult[k])) * next.view((sys.offset(k), oj), (sys.mult[k], nj));
                }
            }
            let x = solvers[j].solve(q, &y)?;
            next.view_mut((oj, oj), (nj, nj)).copy_from(&x);
        }
        out.push(next);
    }
    Ok(out)
}

/// Value of `F^[0](z) = (I + Σ H_p^[0] z^p) z^A` at `z` with `arg z = theta`.
pub fn series_f0(sys: &BlockedSystem, z: C64, theta: f64, tol: f64) -> Result<CMatrix> {
    series_f0_capped(sys, z, theta, tol, 10_000)
}

/// [`series_f0`] with an explicit cap on the number of terms.
pub fn series_f0_capped(sys: &BlockedSystem, z: C64, theta: f64, tol: f64, max_terms: usize) -> Result<CMatrix> {
    let n = sys.n();
    let neg = -&sys.a;
    let solver = SylvesterSolver::new(&neg, &neg)?;
    let u = sys.u_matrix();
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    let mut small = 0;
    for p in 1..=max_terms {
        // p H_p − A H_p + H_p A = u H_{p−1}, carried with the factor z^p.
        term = solver.solve(C64::new(p as f64, 0.0), &(&u * &term * z))?;
        sum += &term;
        let rel = norm_fro(&term) / norm_fro(&sum).max(1e-300);
        small = if rel < tol * 1e-2 { small + 1 } else { 0 };
        if small >= 3 && p as f64 > 2.0 * z.norm() * sys.u.iter().map(|x| x.norm()).fold(0.0, f64::max) {
            return Ok(sum * cpow(z, theta, &sys.a)?);
        }
    }
    Err(Error::TailTooLarge(norm_fro(&term)))
}

/// Taylor integrator for `dY/dz = (U + A/z) Y` with diagonal `U`.
struct Taylor<'a> {
    u: Vec<C64>,
    a: &'a CMatrix,
    order: usize,
    tol: f64,
    max_steps: usize,
}

impl Taylor<'_> {
    fn coeffs(&self, z0: C64, y: &CMatrix) -> Vec<CMatrix> {
        let mut c: Vec<CMatrix> = Vec::with_capacity(self.order + 1);
        c.push(y.clone());
        for p in 0..self.order {
            let mut rhs = self.a * &c[p] - &c[p] * C64::new(p as f64, 0.0);
            for i in 0..rhs.nrows() {
                for k in 0..rhs.ncols() {
                    let mut v = self.u[i] * z0 * c[p][(i, k)];
                    if p > 0 {
                        v += self.u[i] * c[p - 1][(i, k)];
                    }
                    rhs[(i, k)] += v;
                }
            }
            c.push(rhs / (z0 * (p + 1) as f64));
        }
        c
    }

    /// Integrates along the straight segment `from → to`; returns the final
    /// value and the accumulated local error estimate.
    fn segment(&self, from: C64, to: C64, mut y: CMatrix, steps: &mut usize) -> Result<(CMatrix, f64)> {
        let mut z = from;
        let mut err = 0.0;
        let n = self.order;
        while (to - z).norm() > 1e-15 * (1.0 + to.norm()) {
            *steps += 1;
            if *steps > self.max_steps {
                return Err(Error::NotAccurate(format!("step limit reached near z = {z}")));
            }
            let c = self.coeffs(z, &y);
            let scale = norm_fro(&y).max(1e-300);
            let mut h_max = 0.5 * z.norm();
            for k in [n - 1, n] {
                let ck = norm_fro(&c[k]);
                if ck > 0.0 {
                    h_max = h_max.min((self.tol * scale / ck).powf(1.0 / k as f64));
                }
            }
            let rem = to - z;
            let h = if rem.norm() <= h_max { rem } else { rem * (h_max / rem.norm()) };
            let mut acc = c[n].clone();
            for k in (0..n).rev() {
                acc = acc * h + &c[k];
            }
            err += (norm_fro(&c[n - 1]) * h.norm().powi(n as i32 - 1) + norm_fro(&c[n]) * h.norm().powi(n as i32)) / scale;
            y = acc;
            z += h;
        }
        Ok((y, err))
    }

    fn path(&self, points: &[C64], y: CMatrix) -> Result<(CMatrix, f64)> {
        let mut steps = 0;
        let (mut y, mut err) = (y, 0.0);
        for w in points.windows(2) {
            let (ny, e) = self.segment(w[0], w[1], y, &mut steps)?;
            y = ny;
            err += e;
        }
        Ok((y, err))
    }
}

/// Value of the canonical solution `F_d` at `z = r e^{i·arg}`, stored as
/// `F_d(z) = scaled · diag(e^{u z})` to keep the exponentials separate.
#[derive(Debug, Clone)]
pub struct FundamentalValue {
    pub z: C64,
    pub arg: f64,
    pub scaled: CMatrix,
    /// Start ray and radius of each column block.
    pub start_args: Vec<f64>,
    pub start_radii: Vec<f64>,
    /// Accumulated local error estimate of the integration.
    pub error_estimate: f64,
}

impl FundamentalValue {
    /// `F_d(z)` with the exponentials multiplied in.
    pub fn full(&self, sys: &BlockedSystem) -> CMatrix {
        let mut f = self.scaled.clone();
        for j in 0..sys.nu() {
            let e = (sys.u[j] * self.z).exp();
            for c in sys.range(j) {
                for r in 0..f.nrows() {
                    f[(r, c)] *= e;
                }
            }
        }
        f
    }
}


/// Start data for one column block: ray, radius and predicted log-error.
#[derive(Debug, Clone, Copy)]
struct StartChoice {
    theta: f64,
    radius: f64,
    log_error: f64,
}

/// Chooses the start ray and radius of column block `j` for `F_d`.
///
/// Along a ray with argument `θ`, let `c_i = Re((u_i − u_j)e^{iθ})`. A block
/// `i` with `c_i < 0` is subdominant there, and the truncated series fixes
/// the column only up to multiples of that solution. Across a direction
/// `−arg(u_j − u_i)` (mod 2π), where `e^{u_i z}` is maximally subdominant,
/// the column of the canonical solution picks up a multiple of block `i`;
/// the start ray is therefore kept on the side of `d` of every such direction.
/// Inward integration magnifies rounding by `e^{|c_i|R}`, while the
/// truncation error relative to the column after integration is
/// `e^{−R(|u_i − u_j| − |c_i|)}`.
fn choose_start(u: &[C64], j: usize, d: f64, r_min: f64, r_max: f64) -> Option<StartChoice> {
    let ln_eps = (1e-16f64).ln();
    let samples = 3000;
    let mut best: Option<StartChoice> = None;
    for k in 1..samples {
        let theta = d - PI + 2.0 * PI * k as f64 / samples as f64;
        let e = C64::from_polar(1.0, theta);
        let (mut a, mut b) = (0.0f64, f64::INFINITY);
        let mut ok = true;
        for i in (0..u.len()).filter(|&i| i != j) {
            let diff = u[i] - u[j];
            let ci = (diff * e).re;
            let sub = (-ci).max(0.0);
            let sigma = -(u[j] - u[i]).arg();
            let (lo, hi) = if theta < d { (theta, d) } else { (d, theta) };
            let kk = ((lo - sigma) / (2.0 * PI)).ceil();
            if sigma + 2.0 * PI * kk <= hi {
                ok = false;
                break;
            }
            a = a.max(sub);
            b = b.min(diff.norm() - sub);
        }
        if !ok || b <= 0.0 {
            continue;
        }
        let r_opt = if a > 0.0 { -ln_eps / (a + b) } else { r_max };
        let radius = r_opt.clamp(r_min, r_max);
        let log_error = (ln_eps + a * radius).max(-b * radius);
        if best.is_none_or(|bst| log_error < bst.log_error) {
            best = Some(StartChoice { theta, radius, log_error });
        }
    }
    best
}

/// Optimally truncated asymptotic series of column block `j` at `z`, with
/// the factor `z^{A_jj}` (argument `theta`) included and `e^{u_j z}` removed.
fn asymptotic_column(sys: &BlockedSystem, coeffs: &[CMatrix], j: usize, z: C64, theta: f64) -> Result<(CMatrix, f64)> {
    let (oj, nj) = (sys.offset(j), sys.mult[j]);
    let n = sys.n();
    let mut sum = zeros(n, nj);
    let mut zp = C64::new(1.0, 0.0);
    let mut best = f64::INFINITY;
    for h in coeffs {
        let term = h.view((0, oj), (n, nj)) * zp;
        let t = norm_fro(&term);
        if t > best && t > 0.0 {
            break;
        }
        best = best.min(t);
        sum += term;
        zp /= z;
    }
    Ok((sum * cpow(z, theta, &sys.block(j, j))?, best))
}

/// `F_d` at the matching point `match_radius · e^{id}`.
pub fn integrate_fundamental(sys: &BlockedSystem, d: f64, cfg: &OracleConfig) -> Result<FundamentalValue> {
    integrate_fundamental_at(sys, d, d, cfg)
}

/// `F_d` at `match_radius · e^{i·arg}`, where `arg` is taken on the same
/// sheet as `d` and no anti-Stokes direction lies strictly between them.
///
/// When some column block has no accurate direct start, every block is
/// obtained by sector transport instead; the start data and the error
/// estimate of the result are then `NaN`.
pub fn integrate_fundamental_at(sys: &BlockedSystem, d: f64, arg: f64, cfg: &OracleConfig) -> Result<FundamentalValue> {
    let all: Vec<usize> = (0..sys.nu()).collect();
    match fundamental_columns(sys, d, arg, &all, cfg) {
        Err(Error::NotAccurate(_)) if cfg.transport_depth > 0 => {}
        other => return other,
    }
    let n = sys.n();
    let mut scaled = zeros(n, n);
    for j in 0..sys.nu() {
        scaled.columns_mut(sys.offset(j), sys.mult[j]).copy_from(&column(sys, j, d, arg, cfg, cfg.transport_depth)?);
    }
    Ok(FundamentalValue {
        z: C64::from_polar(cfg.match_radius, arg),
        arg,
        scaled,
        start_args: vec![f64::NAN; sys.nu()],
        start_radii: vec![f64::NAN; sys.nu()],
        error_estimate: f64::NAN,
    })
}

/// Column blocks `cols` of `F_d` at `match_radius · e^{i·arg}`; the other
/// blocks of `scaled` are left at zero and their start data is `NaN`.
pub fn fundamental_columns(
    sys: &BlockedSystem,
    d: f64,
    arg: f64,
    cols: &[usize],
    cfg: &OracleConfig,
) -> Result<FundamentalValue> {
    let rays = anti_stokes_in(&sys.u, d - 2.0 * PI, d + 2.0 * PI);
    if rays.iter().any(|r| (r.tau - d).abs() < 1e-10) {
        return Err(Error::Invalid(format!("direction {d} is anti-Stokes")));
    }
    let n = sys.n();
    let nu = sys.nu();
    let zm = C64::from_polar(cfg.match_radius, arg);
    let mut choices = Vec::with_capacity(nu);
    for j in 0..nu {
        if !cols.contains(&j) {
            choices.push(StartChoice { theta: f64::NAN, radius: f64::NAN, log_error: f64::NEG_INFINITY });
            continue;
        }
        if nu == 1 {
            choices.push(StartChoice { theta: arg, radius: 4.0 * cfg.match_radius, log_error: f64::NEG_INFINITY });
            continue;
        }
        let mj = (0..nu).filter(|&i| i != j).map(|i| (sys.u[i] - sys.u[j]).norm()).fold(f64::INFINITY, f64::min);
        let r_max = (cfg.start_factor / mj).max(4.0 * cfg.match_radius);
        let ch = choose_start(&sys.u, j, d, 4.0 * cfg.match_radius, r_max)
            .ok_or_else(|| Error::NotAccurate(format!("no admissible start ray for block {j}")))?;
        if ch.log_error > cfg.max_error.ln() {
            return Err(Error::NotAccurate(format!("predicted error {:.1e} for block {j}", ch.log_error.exp())));
        }
        choices.push(ch);
    }
    let spread = sys.u.iter().flat_map(|a| sys.u.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
    let r_top = choices.iter().map(|c| c.radius).filter(|r| r.is_finite()).fold(0.0, f64::max);
    let order = (r_top * spread * 1.2) as usize + 30;
    let coeffs = asymptotic_coeffs(sys, order)?;
    let mut scaled = zeros(n, n);
    let mut error_estimate: f64 = 0.0;
    for (j, ch) in choices.iter().enumerate() {
        if !cols.contains(&j) {
            continue;
        }
        let z0 = C64::from_polar(ch.radius, ch.theta);
        let (y0, trunc) = asymptotic_column(sys, &coeffs, j, z0, ch.theta)?;
        let shift: Vec<C64> = (0..nu).flat_map(|k| std::iter::repeat_n(sys.u[k] - sys.u[j], sys.mult[k])).collect();
        let tay = Taylor { u: shift, a: &sys.a, order: cfg.taylor_order, tol: cfg.tol, max_steps: cfg.max_steps };
        let mut points = vec![z0, C64::from_polar(cfg.match_radius, ch.theta)];
        let arcs = ((arg - ch.theta).abs() / 0.05).ceil().max(1.0) as usize;
        for k in 1..=arcs {
            points.push(C64::from_polar(cfg.match_radius, ch.theta + (arg - ch.theta) * k as f64 / arcs as f64));
        }
        let (y, err) = tay.path(&points, y0)?;
        error_estimate = error_estimate.max(err + trunc + ch.log_error.exp());
        scaled.view_mut((0, sys.offset(j)), (n, sys.mult[j])).copy_from(&y);
    }
    Ok(FundamentalValue {
        z: zm,
        arg,
        scaled,
        start_args: choices.iter().map(|c| c.theta).collect(),
        start_radii: choices.iter().map(|c| c.radius).collect(),
        error_estimate,
    })
}

/// Half the angular distance from `tau` to the nearest other anti-Stokes
/// direction.
fn ray_margin(u: &[C64], tau: f64) -> f64 {
    let rays = anti_stokes_in(u, tau - 2.0 * PI, tau + 2.0 * PI);
    0.5 * rays.iter().map(|r| (r.tau - tau).abs()).filter(|&x| x > 1e-9).fold(PI, f64::min)
}

/// Column block `j` of `F_d` at `match_radius · e^{i·arg}`, scaled as in
/// [`FundamentalValue`]. A block that no start ray resolves is carried over
/// from the nearest sector where it is resolved: across each anti-Stokes
/// direction in between it changes by `Σ_i f_i S_ij`, with the entries and the
/// blocks `f_i` computed the same way one level deeper.
fn column(sys: &BlockedSystem, j: usize, d: f64, arg: f64, cfg: &OracleConfig, depth: usize) -> Result<CMatrix> {
    let first = match fundamental_columns(sys, d, arg, &[j], cfg) {
        Ok(f) => return Ok(f.scaled.columns(sys.offset(j), sys.mult[j]).into_owned()),
        Err(e @ Error::NotAccurate(_)) if depth > 0 => e,
        Err(e) => return Err(e),
    };
    let rays = anti_stokes_in(&sys.u, d - 2.0 * PI, d + 2.0 * PI);
    let jumps: Vec<_> = rays.iter().filter(|r| r.pairs.iter().any(|&(_, b)| b == j)).collect();
    let mut targets: Vec<f64> = jumps
        .windows(2)
        .map(|w| 0.5 * (w[0].tau + w[1].tau))
        .filter(|&m| (m - d).abs() < PI && jumps.iter().any(|r| (r.tau - d) * (r.tau - m) < 0.0))
        .collect();
    targets.sort_by(|a, b| (a - d).abs().total_cmp(&(b - d).abs()));
    let z = C64::from_polar(cfg.match_radius, arg);
    'target: for m in targets {
        let mut acc = match fundamental_columns(sys, m, arg, &[j], cfg) {
            Ok(f) => f.scaled.columns(sys.offset(j), sys.mult[j]).into_owned(),
            Err(Error::NotAccurate(_)) => continue,
            Err(e) => return Err(e),
        };
        let sign = if m > d { 1.0 } else { -1.0 };
        let (lo, hi) = if m > d { (d, m) } else { (m, d) };
        for r in jumps.iter().filter(|r| r.tau > lo && r.tau < hi) {
            let side = r.tau + sign * ray_margin(&sys.u, r.tau);
            for &(i, _) in r.pairs.iter().filter(|&&(_, b)| b == j) {
                let pieces = entry(sys, i, j, r.tau, cfg, depth - 1)
                    .and_then(|s_ij| Ok((s_ij, column(sys, i, side, arg, cfg, depth - 1)?)));
                let (s_ij, f_i) = match pieces {
                    Ok(v) => v,
                    Err(Error::NotAccurate(_)) => continue 'target,
                    Err(e) => return Err(e),
                };
                acc += f_i * s_ij * (((sys.u[i] - sys.u[j]) * z).exp() * sign);
            }
        }
        return Ok(acc);
    }
    let loose = OracleConfig { max_error: cfg.fallback_error, ..cfg.clone() };
    match fundamental_columns(sys, d, arg, &[j], &loose) {
        Ok(f) => Ok(f.scaled.columns(sys.offset(j), sys.mult[j]).into_owned()),
        Err(Error::NotAccurate(_)) => Err(first),
        Err(e) => Err(e),
    }
}

/// Block `(s, t)` of `S_[τ]` as `g_sᵀ f_t`, with `g_s` a column block of the
/// dual solution on one side of the ray and `f_t` one of `F` on the other.
fn entry(sys: &BlockedSystem, s: usize, t: usize, tau: f64, cfg: &OracleConfig, depth: usize) -> Result<CMatrix> {
    let rays = anti_stokes_in(&sys.u, tau - 2.0 * PI, tau + 2.0 * PI);
    let ray = rays
        .iter()
        .find(|r| (r.tau - tau).abs() < 1e-9)
        .ok_or_else(|| Error::Invalid(format!("{tau} is not an anti-Stokes direction")))?;
    if !ray.pairs.contains(&(s, t)) {
        return Err(Error::Invalid(format!("pair ({s}, {t}) does not lie on the ray {tau}")));
    }
    let chained = is_chained(&ray.pairs);
    let eps = ray_margin(&sys.u, tau);
    let dual = sys.dual()?;
    let z = C64::from_polar(cfg.match_radius, tau);
    let block = |d_dual: f64, d_direct: f64| -> Result<CMatrix> {
        let gs = column(&dual, s, d_dual, tau, cfg, depth)?;
        let ft = column(sys, t, d_direct, tau, cfg, depth)?;
        Ok(gs.transpose() * ft * ((sys.u[t] - sys.u[s]) * z).exp())
    };
    match block(tau + eps, tau - eps) {
        Err(Error::NotAccurate(_)) if !chained => Ok(-block(tau - eps, tau + eps)?),
        other => other,
    }
}

/// `S_[τ] = F_{τ+ε}⁻¹ F_{τ−ε}` at `match_radius · e^{iτ}`. The inverse is
/// taken as `F_{τ+ε}⁻¹ = (F̃_{τ+ε})ᵀ`, with `F̃` the canonical solution of the
/// dual system `(−u, −Aᵀ)`, so every block of the result is a product of one
/// column block of each factor.
///
/// When a column block cannot be resolved on its side of a ray without
/// chained pairs, the affected blocks are read off `S_[τ]⁻¹ = F_{τ−ε}⁻¹ F_{τ+ε}`
/// instead, using `S⁻¹ = 2I − S` off the diagonal and inverting diagonal blocks.
pub fn stokes_via_ode(sys: &BlockedSystem, tau: f64, cfg: &OracleConfig) -> Result<CMatrix> {
    let rays = anti_stokes_in(&sys.u, tau - 2.0 * PI, tau + 2.0 * PI);
    let ray = rays
        .iter()
        .find(|r| (r.tau - tau).abs() < 1e-9)
        .ok_or_else(|| Error::Invalid(format!("{tau} is not an anti-Stokes direction")))?;
    let eps = ray_margin(&sys.u, tau);
    let dual = sys.dual()?;
    let nu = sys.nu();
    let depth = cfg.transport_depth;
    let columns = |s: &BlockedSystem, d: f64| -> Vec<Result<CMatrix>> {
        (0..nu).map(|j| column(s, j, d, tau, cfg, depth)).collect()
    };
    let (g_above, f_below) = (columns(&dual, tau + eps), columns(sys, tau - eps));
    let direct = |s: usize, t: usize| -> Result<CMatrix> {
        Ok(g_above[s].clone()?.transpose() * f_below[t].clone()?)
    };
    let z = C64::from_polar(cfg.match_radius, tau);
    let n = sys.n();
    let mut out = zeros(n, n);
    if g_above.iter().chain(&f_below).all(|c| c.is_ok()) {
        for s in 0..nu {
            for t in 0..nu {
                out.view_mut((sys.offset(s), sys.offset(t)), (sys.mult[s], sys.mult[t])).copy_from(&direct(s, t)?);
            }
        }
        return Ok(conjugate_exponentials(sys, &out, z));
    }
    let first_failure = || {
        g_above.iter().chain(&f_below).find_map(|c| c.as_ref().err().cloned()).expect("some block failed")
    };
    if is_chained(&ray.pairs) {
        return Err(first_failure());
    }
    let (g_below, f_above) = (columns(&dual, tau - eps), columns(sys, tau + eps));
    for s in 0..nu {
        for t in 0..nu {
            let block = match direct(s, t) {
                Ok(b) => b,
                Err(Error::NotAccurate(_)) => {
                    let (g, f) = (g_below[s].clone()?, f_above[t].clone()?);
                    let inv = g.transpose() * f;
                    if s == t {
                        inverse(&inv)?
                    } else {
                        -inv
                    }
                }
                Err(e) => return Err(e),
            };
            out.view_mut((sys.offset(s), sys.offset(t)), (sys.mult[s], sys.mult[t])).copy_from(&block);
        }
    }
    Ok(conjugate_exponentials(sys, &out, z))
}

/// Whether some block is both the target of one pair and the source of
/// another on the same ray, so that `S − I` is not square-zero.
fn is_chained(pairs: &[(usize, usize)]) -> bool {
    pairs.iter().any(|&(_, b)| pairs.iter().any(|&(c, _)| c == b))
}

/// `diag(e^{−u z}) X diag(e^{u z})`, formed entrywise.
fn conjugate_exponentials(sys: &BlockedSystem, x: &CMatrix, z: C64) -> CMatrix {
    let mut out = x.clone();
    for i in 0..sys.nu() {
        for j in 0..sys.nu() {
            let f = ((sys.u[j] - sys.u[i]) * z).exp();
            for r in sys.range(i) {
                for c in sys.range(j) {
                    out[(r, c)] *= f;
                }
            }
        }
    }
    out
}

/// `C_d = F_d(z)⁻¹ F^[0](z)` at `z = match_radius · e^{id}`, with `arg z = d`
/// in both factors and `F_d⁻¹` taken as the transposed dual solution.
pub fn connection_via_ode(sys: &BlockedSystem, d: f64, cfg: &OracleConfig) -> Result<CMatrix> {
    let z = C64::from_polar(cfg.match_radius, d);
    let f0 = series_f0(sys, z, d, cfg.tol)?;
    let dual = sys.dual()?;
    let n = sys.n();
    let mut g = zeros(n, n);
    for j in 0..sys.nu() {
        let (o, m) = (sys.offset(j), sys.mult[j]);
        g.columns_mut(o, m).copy_from(&column(&dual, j, d, d, cfg, cfg.transport_depth)?);
    }
    // Rows of F_d⁻¹ F^[0] carry the factor e^{−u_i z}.
    let mut c = g.transpose() * f0;
    for i in 0..sys.nu() {
        let e = (-sys.u[i] * z).exp();
        for r in sys.range(i) {
            for k in 0..c.ncols() {
                c[(r, k)] *= e;
            }
        }
    }
    Ok(c)
}

/// Block `(s, t)` of `S_[τ]` from one column block of the dual solution and
/// one of `F`, on opposite sides of the ray.
pub fn oracle_entry(sys: &BlockedSystem, s: usize, t: usize, tau: f64, cfg: &OracleConfig) -> Result<CMatrix> {
    entry(sys, s, t, tau, cfg, cfg.transport_depth)
}
