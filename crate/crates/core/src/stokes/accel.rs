//! Acceleration of normalized matrix products.
//!
//! Partial values are sampled on a doubling schedule `p₀, 2p₀, 4p₀, …`.
//! When a competing geometric mode `ρ^p` with `|ρ|` close to one is known,
//! each sample is first passed through the filter
//! `a_p ↦ (a_{p+1} − ρ a_p)/(1 − ρ)` several times; every pass lowers the
//! amplitude of that mode by one power of `p`. The filtered samples are
//! then Richardson-extrapolated in `1/p`.

use crate::error::{Error, Result};
use crate::numkit::{max_abs, norm_fro, CMatrix, C64};

/// Settings of the product evaluation.
#[derive(Debug, Clone)]
pub struct ProductConfig {
    /// First schedule point.
    pub p0: usize,
    /// Largest product length.
    pub pmax: usize,
    /// Target for the error estimate (relative to `max(1, ‖limit‖)`).
    pub tol: f64,
    /// Richardson order.
    pub order: usize,
    /// Number of filter passes per competing mode.
    pub filter_depth: usize,
    /// Competing modes with `|ρ|` at least this large are filtered, unless
    /// `|ρ|^p0` is already below `1e-3·tol`.
    pub filter_threshold: f64,
    /// Relative distance below which a point counts as lying on a segment.
    pub segment_tol: f64,
}

impl Default for ProductConfig {
    fn default() -> Self {
        Self {
            p0: 64,
            pmax: 65_536,
            tol: 1e-8,
            order: 2,
            filter_depth: 4,
            filter_threshold: 0.5,
            segment_tol: 1e-8,
        }
    }
}

/// Record of an accelerated product evaluation.
#[derive(Debug, Clone)]
pub struct ProductTrace {
    /// Schedule points actually used.
    pub schedule: Vec<usize>,
    /// Raw normalized partial values at the schedule points.
    pub partials: Vec<CMatrix>,
    /// Highest-order Richardson value available at each schedule point.
    pub accelerated: Vec<CMatrix>,
    pub extrapolated: CMatrix,
    /// Norm of the last increment of the accelerated sequence.
    pub estimate: f64,
    pub converged: bool,
    /// Competing modes removed by filtering.
    pub filtered: Vec<C64>,
}

impl ProductTrace {
    /// Distance between the extrapolated limit and the accelerated value one
    /// schedule point earlier, in units of the reported estimate.
    pub fn consistency_ratio(&self) -> f64 {
        match self.accelerated.len() {
            0 | 1 => 0.0,
            n => norm_fro(&(&self.accelerated[n - 2] - &self.extrapolated)) / self.estimate.max(f64::MIN_POSITIVE),
        }
    }

    /// Whether the error estimate accounts for the last accelerated step
    /// within a factor of ten.
    pub fn is_consistent(&self) -> bool {
        self.consistency_ratio() <= 10.0
    }
}

/// A normalized product that can be advanced one factor at a time.
pub(crate) trait Stepper {
    /// Current product length `p`.
    fn p(&self) -> usize;
    /// Multiplies in the next factor.
    fn step(&mut self) -> Result<()>;
    /// Normalized partial value at the current `p`.
    fn value(&self) -> Result<CMatrix>;
    /// Size of the internal state, used to detect divergence.
    fn scale(&self) -> f64;
}

const DIVERGENCE_SCALE: f64 = 1e150;

fn mode_is_active(rho: f64, cfg: &ProductConfig) -> bool {
    let decayed = rho.powf(cfg.p0.max(1) as f64) < 1e-3 * cfg.tol;
    rho >= cfg.filter_threshold && !decayed
}

fn filter(values: &[CMatrix], rho: C64) -> Vec<CMatrix> {
    let denom = C64::new(1.0, 0.0) - rho;
    values.windows(2).map(|w| (&w[1] - &w[0] * rho) / denom).collect()
}

/// Drives `stepper` along the schedule and extrapolates the limit.
pub(crate) fn accelerate<S: Stepper>(stepper: &mut S, modes: &[C64], cfg: &ProductConfig) -> Result<(CMatrix, ProductTrace)> {
    let modes: Vec<C64> = modes.iter().copied().filter(|r| mode_is_active(r.norm(), cfg)).collect();
    let window = cfg.filter_depth * modes.len();
    let mut schedule = Vec::new();
    let mut partials = Vec::new();
    let mut table: Vec<Vec<CMatrix>> = Vec::new();
    let mut accelerated: Vec<CMatrix> = Vec::new();
    let mut estimate = f64::INFINITY;
    let mut target = cfg.p0.max(1);
    let mut first_norm = None;
    while target + window <= cfg.pmax {
        while stepper.p() < target {
            stepper.step()?;
            if !(stepper.scale() < DIVERGENCE_SCALE) {
                return Err(Error::NotConverged { estimate, tol: cfg.tol, p: stepper.p() });
            }
        }
        let mut samples = Vec::with_capacity(window + 1);
        samples.push(stepper.value()?);
        for _ in 0..window {
            stepper.step()?;
            samples.push(stepper.value()?);
        }
        partials.push(samples[0].clone());
        for &rho in &modes {
            for _ in 0..cfg.filter_depth {
                samples = filter(&samples, rho);
            }
        }
        let b = samples.swap_remove(0);
        let nb = norm_fro(&b);
        let base = *first_norm.get_or_insert(nb.max(1e-300));
        if !nb.is_finite() || nb > 1e6 * base.max(1.0) {
            return Err(Error::NotConverged { estimate, tol: cfg.tol, p: target });
        }
        // Richardson table in h = 1/p with ratio 2 between rows.
        let j = table.len();
        let mut row = vec![b];
        for m in 1..=cfg.order.min(j) {
            let f = (1u64 << m) as f64;
            let prev = &table[j - 1][m - 1];
            let next = (&row[m - 1] * C64::new(f, 0.0) - prev) / C64::new(f - 1.0, 0.0);
            row.push(next);
        }
        let best = row.last().expect("non-empty row").clone();
        if let Some(last) = accelerated.last() {
            estimate = norm_fro(&(&best - last));
        }
        let reached_order = row.len() == cfg.order + 1;
        table.push(row);
        schedule.push(target);
        accelerated.push(best.clone());
        if reached_order && accelerated.len() >= 2 && estimate <= cfg.tol * norm_fro(&best).max(1.0) {
            let trace = ProductTrace {
                schedule,
                partials,
                accelerated,
                extrapolated: best.clone(),
                estimate,
                converged: true,
                filtered: modes,
            };
            return Ok((best, trace));
        }
        target *= 2;
    }
    Err(Error::NotConverged { estimate, tol: cfg.tol, p: stepper.p() })
}

/// Largest entry modulus, used as the state scale of steppers.
pub(crate) fn state_scale(m: &CMatrix) -> f64 {
    max_abs(m)
}
