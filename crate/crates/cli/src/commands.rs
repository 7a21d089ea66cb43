//! Command implementations. Each returns a JSON report or a [`CliError`].

use crate::config::{Setup, ValidationError};
use crate::json::{check, cvec, cx, labels, mat, mats, pairs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use stokes_lab::braid::{
    apply_braid_word_formal, sigma_action_formal, sigma_inverse_action_formal, BraidWord, MonodromyPair, UnipotentPair,
};
use stokes_lab::hypersys::{
    anti_stokes, formal_inf_coeffs, nonresonance_check, ode_residual, pair_direction, quantum_H_coeffs, BlockedSystem,
    NONRESONANCE_TOL,
};
use stokes_lab::numkit::{norm_fro, wrap_angle, CMatrix, C64};
use stokes_lab::oracle::{connection_via_ode, oracle_entry};
use stokes_lab::qrel::{modified_L, oneside_residuals, q_of, rll_check, script_T, uq_generator_map, RelationKind};
use stokes_lab::stokes::{
    assemble_hybrid, connection_Lk_with, difference_residuals, duality_check_with, hybrid_entry, im_ordering,
    monodromy_check, stokes_entry_minus, stokes_entry_plus, triangularity, ProductTrace,
};
use stokes_lab::Error;

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Validation(ValidationError),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Validation(e)
    }
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_GEOMETRY: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                Error::NotConverged { .. }
                | Error::NotAccurate(_)
                | Error::NonConvergence
                | Error::IllConditioned { .. }
                | Error::TailTooLarge(_)
                | Error::NonFinite(_)
                | Error::SingularProduct
                | Error::Singular(_) => EXIT_CONVERGENCE,
                Error::SegmentBlocked { .. }
                | Error::LineBlocked { .. }
                | Error::OrderingFailure
                | Error::GeometryAmbiguous(_)
                | Error::ArgumentWindowViolation(_) => EXIT_GEOMETRY,
                _ => EXIT_VALIDATION,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Validation(v) => {
                json!({ "error": { "kind": "validation", "pointer": v.pointer, "message": v.message } })
            }
            CliError::Core(e) => {
                let kind = match self.exit_code() {
                    EXIT_CONVERGENCE => "convergence",
                    EXIT_GEOMETRY => "geometry",
                    _ => "validation",
                };
                json!({ "error": { "kind": kind, "message": describe(e) } })
            }
        }
    }
}

/// Core error text with block indices shifted to the 1-based labels used in
/// reports.
pub fn describe(e: &Error) -> String {
    match *e {
        Error::SegmentBlocked { s, t, blocker } => {
            format!("u_{} lies on the segment [u_{}, u_{}]", blocker + 1, s + 1, t + 1)
        }
        Error::LineBlocked { s, t, blocker } => {
            format!("u_{} lies on the line through u_{}, u_{}", blocker + 1, s + 1, t + 1)
        }
        Error::DegenerateU(a, b) => format!("u values {} and {} coincide", a + 1, b + 1),
        _ => e.to_string(),
    }
}

pub type Outcome = Result<Value, CliError>;

fn arg_error(flag: &str, message: impl Into<String>) -> CliError {
    CliError::Validation(ValidationError { pointer: flag.to_string(), message: message.into() })
}

fn need_quantum(sys: &BlockedSystem, what: &str) -> Result<(), CliError> {
    if sys.quantum.is_none() {
        return Err(CliError::Validation(ValidationError {
            pointer: "/hbar".into(),
            message: format!("`{what}` needs a quantum problem (\"hbar\" and \"rep\")"),
        }));
    }
    Ok(())
}

/// Argument conventions shared by all reports.
fn conventions(d: Option<f64>, order: Option<&[usize]>) -> Value {
    let mut m = Map::new();
    m.insert("labels".into(), json!("blocks are labelled 1..nu"));
    m.insert("complex".into(), json!("[re, im]"));
    m.insert("tau".into(), json!("tau = -arg(u_t - u_s) in (-pi, pi] for the pair (s, t)"));
    m.insert("powers".into(), json!("(u_t - u_s)^X uses arg(u_t - u_s) = -tau; other powers use principal arguments"));
    m.insert("stokes_entry".into(), json!("(S_[tau])_st, the full Stokes factor block, not divided by 2 pi i"));
    if let Some(d) = d {
        m.insert("d".into(), json!(d));
        m.insert("z_argument".into(), json!("arg z = d at the matching point"));
    }
    if let Some(o) = order {
        m.insert("ordering".into(), labels(o));
        m.insert("ordering_rule".into(), json!("Im(u_k e^{id}) strictly decreasing"));
    }
    Value::Object(m)
}

fn finish(command: &str, d: Option<f64>, order: Option<&[usize]>, mut body: Map<String, Value>) -> Value {
    body.insert("command".into(), json!(command));
    body.insert("conventions".into(), conventions(d, order));
    Value::Object(body)
}

/// The midpoint of the widest gap between consecutive anti-Stokes
/// directions; `0` when there are none.
pub fn default_direction(sys: &BlockedSystem) -> f64 {
    let taus: Vec<f64> = anti_stokes(sys).iter().map(|r| r.tau).collect();
    if taus.is_empty() {
        return 0.0;
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (i, &a) in taus.iter().enumerate() {
        let b = if i + 1 < taus.len() { taus[i + 1] } else { taus[0] + 2.0 * PI };
        if b - a > best.0 {
            best = (b - a, wrap_angle(0.5 * (a + b)));
        }
    }
    best.1
}

fn direction(setup: &Setup, d: Option<f64>) -> Result<f64, CliError> {
    match d {
        Some(d) if !d.is_finite() => Err(arg_error("--d", "direction must be finite")),
        Some(d) => Ok(d),
        None => Ok(default_direction(&setup.sys)),
    }
}

fn provider(setup: &Setup) -> impl Fn(&BlockedSystem, usize, usize, f64) -> stokes_lab::Result<CMatrix> + Sync + '_ {
    move |s: &BlockedSystem, a, b, t| Ok(hybrid_entry(s, a, b, t, &setup.product, &setup.oracle)?.0)
}

fn trace_json(t: &ProductTrace) -> Value {
    json!({
        "schedule": t.schedule,
        "estimate": t.estimate,
        "converged": t.converged,
        "consistent": t.is_consistent(),
        "filtered_modes": cvec(&t.filtered),
    })
}

fn system_json(sys: &BlockedSystem) -> Value {
    let mut m = Map::new();
    m.insert("nu".into(), json!(sys.nu()));
    m.insert("n".into(), json!(sys.n()));
    m.insert("mult".into(), json!(sys.mult));
    m.insert("u".into(), cvec(&sys.u));
    if let Some(q) = &sys.quantum {
        m.insert("hbar".into(), cx(q.hbar));
        m.insert("q".into(), cx(q_of(q.hbar)));
        m.insert("rep_dim".into(), json!(q.rep.dim));
    }
    Value::Object(m)
}

pub fn formal(setup: &Setup, order: usize) -> Outcome {
    if order == 0 {
        return Err(arg_error("--order", "order must be positive"));
    }
    let sys = &setup.sys;
    let series = formal_inf_coeffs(sys, order)?;
    let res = ode_residual(sys, &series, order)?;
    let max_rel = res.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut body = Map::new();
    body.insert("system".into(), system_json(sys));
    body.insert("order".into(), json!(order));
    body.insert("coefficients".into(), mats(&series.coeffs));
    body.insert("formal_monodromy".into(), mat(&sys.delta_a()));
    body.insert("ode_residual".into(), json!(res.iter().map(|r| [r.0, r.1]).collect::<Vec<_>>()));
    body.insert("max_relative_residual".into(), check(max_rel, 1e-10));
    if sys.quantum.is_some() {
        let q = quantum_H_coeffs(sys, order)?;
        let diff = series
            .coeffs
            .iter()
            .zip(&q.coeffs)
            .map(|(a, b)| norm_fro(&(a - b)) / norm_fro(a).max(1.0))
            .fold(0.0, f64::max);
        body.insert("quantum_recursion_agreement".into(), check(diff, 1e-11));
    }
    Ok(finish("formal", None, None, body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Product,
    Ode,
    Both,
}

/// Parses a 1-based pair `s,t` into zero-based indices.
pub fn parse_pair(text: &str, nu: usize) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [s, t] = parts.as_slice() else {
        return Err(arg_error("--pair", "expected two labels `s,t`"));
    };
    let parse = |x: &str| -> Result<usize, CliError> {
        match x.parse::<usize>() {
            Ok(k) if (1..=nu).contains(&k) => Ok(k - 1),
            _ => Err(arg_error("--pair", format!("labels must be integers in 1..={nu}"))),
        }
    };
    let (s, t) = (parse(s)?, parse(t)?);
    if s == t {
        return Err(arg_error("--pair", "labels must differ"));
    }
    Ok((s, t))
}

pub fn stokes(setup: &Setup, pair: &str, method: Method) -> Outcome {
    let sys = &setup.sys;
    let (s, t) = parse_pair(pair, sys.nu())?;
    let tau = pair_direction(&sys.u, s, t);
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut body = Map::new();
    body.insert("pair".into(), json!([s + 1, t + 1]));
    body.insert("tau".into(), json!(tau + 0.0));
    let mut product_value = None;
    if method != Method::Ode {
        let (formula, (v, trace)) = match stokes_entry_plus(sys, s, t, &setup.product) {
            Ok(r) => ("plus", r),
            Err(Error::NotConverged { .. }) => ("minus", stokes_entry_minus(sys, s, t, &setup.product)?),
            Err(e) => return Err(e.into()),
        };
        let v = v * two_pi_i;
        body.insert("product".into(), json!({ "formula": formula, "value": mat(&v), "trace": trace_json(&trace) }));
        product_value = Some(v);
    }
    if method != Method::Product {
        let v = oracle_entry(sys, s, t, tau, &setup.oracle)?;
        body.insert("ode".into(), json!({ "value": mat(&v) }));
        if let Some(p) = &product_value {
            body.insert("difference".into(), json!(norm_fro(&(p - &v))));
        }
    }
    Ok(finish("stokes", None, None, body))
}

pub fn assemble(setup: &Setup, d: f64) -> Outcome {
    let sys = &setup.sys;
    let set = assemble_hybrid(sys, d, &setup.product, &setup.oracle)?;
    let tri = triangularity(sys, &set)?;
    let rays: Vec<Value> = set
        .rays
        .iter()
        .map(|r| json!({ "tau": r.tau, "pairs": pairs(&r.pairs), "matrix": mat(&r.matrix) }))
        .collect();
    let mut body = Map::new();
    body.insert("system".into(), system_json(sys));
    body.insert("rays".into(), Value::Array(rays));
    body.insert("plus".into(), mat(&set.plus));
    body.insert("minus".into(), mat(&set.minus));
    body.insert("formal_monodromy".into(), mat(&set.formal_monodromy));
    body.insert(
        "triangularity".into(),
        json!({ "plus_lower": tri.plus_lower, "minus_upper": tri.minus_upper, "diagonal": tri.diagonal }),
    );
    Ok(finish("assemble", Some(d), Some(&tri.order), body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    Rtt,
    Rll,
    Uq,
    Oneside,
    Monodromy,
    Duality,
    Difference,
    Braid,
}

impl Check {
    pub const ALL: [Check; 8] =
        [Check::Rtt, Check::Rll, Check::Uq, Check::Oneside, Check::Monodromy, Check::Duality, Check::Difference, Check::Braid];

    pub fn name(self) -> &'static str {
        match self {
            Check::Rtt => "rtt",
            Check::Rll => "rll",
            Check::Uq => "uq",
            Check::Oneside => "oneside",
            Check::Monodromy => "monodromy",
            Check::Duality => "duality",
            Check::Difference => "difference",
            Check::Braid => "braid",
        }
    }

    pub fn needs_quantum(self) -> bool {
        matches!(self, Check::Rtt | Check::Rll | Check::Uq | Check::Oneside)
    }
}

pub fn verify(setup: &Setup, what: Check, d: f64) -> Outcome {
    let body = match what {
        Check::Rtt => verify_rtt(setup)?,
        Check::Rll => verify_rll(setup, d)?,
        Check::Uq => verify_uq(setup, d)?,
        Check::Oneside => verify_oneside(setup)?,
        Check::Monodromy => verify_monodromy(setup, d)?,
        Check::Duality => verify_duality(setup, d)?,
        Check::Difference => verify_difference(setup)?,
        Check::Braid => verify_braid(setup, d)?,
    };
    let mut body = body;
    body.insert("check".into(), json!(what.name()));
    let uses_d = !matches!(what, Check::Rtt | Check::Oneside | Check::Difference);
    Ok(finish("verify", uses_d.then_some(d), None, body))
}

fn random_lambda(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let z = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if z.norm() > 0.3 {
            return z;
        }
    }
}

const RTT_SAMPLES: usize = 4;

fn verify_rtt(setup: &Setup) -> Result<Map<String, Value>, CliError> {
    let sys = &setup.sys;
    need_quantum(sys, "verify rtt")?;
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let (mut abs, mut rel, mut weight) = (0.0f64, 0.0f64, 0.0f64);
    let mut samples = Vec::new();
    for k in 0..sys.nu() {
        for _ in 0..RTT_SAMPLES {
            let l1 = random_lambda(&mut rng);
            let l2 = loop {
                let l = random_lambda(&mut rng);
                if (l - l1).norm() > 0.3 {
                    break l;
                }
            };
            let (a, r) = stokes_lab::yangian::rtt_residual(sys, k, l1, l2)?;
            let t = stokes_lab::yangian::build_tk(sys, k, l1)?;
            weight = weight.max(stokes_lab::yangian::tk_weight_commutation_residual(sys, &t)?);
            abs = abs.max(a);
            rel = rel.max(r);
            samples.push(json!({ "k": k + 1, "lambda1": cx(l1), "lambda2": cx(l2), "residual": a }));
        }
    }
    let mut m = Map::new();
    m.insert("samples".into(), Value::Array(samples));
    m.insert("max_residual".into(), json!(abs));
    m.insert("max_relative_residual".into(), json!(rel));
    m.insert("weight_commutation".into(), check(weight, 1e-10));
    m.insert("seed".into(), json!(setup.seed));
    m.insert("result".into(), check(abs, 1e-10));
    Ok(m)
}

fn verify_rll(setup: &Setup, d: f64) -> Result<Map<String, Value>, CliError> {
    need_quantum(&setup.sys, "verify rll")?;
    let l = modified_L(&setup.sys, d, &provider(setup))?;
    let (pp, mm, pm) = rll_check(&l)?;
    let mut m = Map::new();
    m.insert("ordering".into(), labels(&l.perm));
    m.insert("q".into(), cx(l.q));
    m.insert("plus_plus".into(), json!(pp));
    m.insert("minus_minus".into(), json!(mm));
    m.insert("plus_minus".into(), json!(pm));
    m.insert("result".into(), check(pp.max(mm).max(pm), 1e-6));
    Ok(m)
}

fn verify_uq(setup: &Setup, d: f64) -> Result<Map<String, Value>, CliError> {
    need_quantum(&setup.sys, "verify uq")?;
    let l = modified_L(&setup.sys, d, &provider(setup))?;
    let rep = uq_generator_map(&l)?;
    let mut m = Map::new();
    m.insert("ordering".into(), labels(&l.perm));
    m.insert("weight".into(), json!(rep.weight));
    m.insert("fe_diagonal".into(), json!(rep.fe_diagonal));
    m.insert("fe_cross".into(), json!(rep.fe_cross));
    m.insert("serre".into(), json!(rep.serre));
    m.insert("far".into(), json!(rep.far));
    m.insert("result".into(), check(rep.max_residual(), 1e-6));
    Ok(m)
}

fn verify_oneside(setup: &Setup) -> Result<Map<String, Value>, CliError> {
    need_quantum(&setup.sys, "verify oneside")?;
    let t = script_T(&setup.sys, &provider(setup))?;
    let rep = oneside_residuals(&t)?;
    let kinds = [
        RelationKind::Disjoint,
        RelationKind::Crossing,
        RelationKind::TriangleChain,
        RelationKind::TriangleSource,
        RelationKind::TriangleSink,
        RelationKind::Opposite,
        RelationKind::Weight,
    ];
    let mut per_kind = Map::new();
    for k in kinds {
        per_kind.insert(format!("{k:?}"), json!(rep.max_of(k)));
    }
    let mut m = Map::new();
    m.insert("relations".into(), json!(rep.residuals.len()));
    m.insert("skipped".into(), json!(rep.skipped.len()));
    m.insert("max_by_kind".into(), Value::Object(per_kind));
    m.insert("result".into(), check(rep.max_residual(), 1e-5));
    Ok(m)
}

fn verify_monodromy(setup: &Setup, d: f64) -> Result<Map<String, Value>, CliError> {
    let sys = &setup.sys;
    let set = assemble_hybrid(sys, d, &setup.product, &setup.oracle)?;
    let c_d = connection_via_ode(sys, d, &setup.oracle);
    let rep = monodromy_check(sys, &set.plus, &set.minus, c_d.as_ref().ok())?;
    let mut m = Map::new();
    m.insert("eigen_mismatch".into(), check(rep.eigen_mismatch, 1e-6));
    match (rep.conjugation_residual, c_d) {
        (Some(r), _) => {
            m.insert("conjugation".into(), check(r, 1e-6));
        }
        (None, Err(e)) => {
            m.insert("conjugation".into(), json!({ "error": describe(&e) }));
        }
        (None, Ok(_)) => {}
    }
    m.insert("result".into(), check(rep.eigen_mismatch, 1e-6));
    Ok(m)
}

fn verify_duality(setup: &Setup, d: f64) -> Result<Map<String, Value>, CliError> {
    let r = duality_check_with(&setup.sys, d, &provider(setup))?;
    let mut m = Map::new();
    m.insert("result".into(), check(r, 1e-6));
    Ok(m)
}

fn verify_difference(setup: &Setup) -> Result<Map<String, Value>, CliError> {
    let sys = &setup.sys;
    if sys.nu() < 2 {
        return Err(arg_error("/u", "difference systems need at least two points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let prov = provider(setup);
    let mut blocks = Vec::new();
    let mut worst: Option<f64> = None;
    let mut last_error = None;
    for k in 0..sys.nu() {
        let z = C64::new(rng.random_range(-0.9..0.9), rng.random_range(0.1..0.9));
        let run = || -> stokes_lab::Result<Value> {
            let (rm, rp) = difference_residuals(sys, k, z, &setup.product)?;
            let rep = connection_Lk_with(sys, k, z, &setup.product, &prov)?;
            Ok(json!({
                "k": k + 1,
                "z": cx(z),
                "minus_equation": check(rm, 1e-8),
                "plus_equation": check(rp, 1e-8),
                "periodicity": check(rep.periodicity, 1e-7),
                "residue_sum": check(rep.residue_mismatch, 1e-5),
                "poles": cvec(&rep.poles),
            }))
        };
        match run() {
            Ok(v) => {
                let fails = ["minus_equation", "plus_equation", "periodicity", "residue_sum"]
                    .iter()
                    .filter(|key| v[**key]["pass"] == json!(false))
                    .count();
                worst = Some(worst.unwrap_or(0.0) + fails as f64);
                blocks.push(v);
            }
            Err(e) => {
                blocks.push(json!({ "k": k + 1, "z": cx(z), "error": describe(&e) }));
                last_error = Some(e);
            }
        }
    }
    let Some(failed_checks) = worst else {
        return Err(last_error.expect("at least one block was attempted").into());
    };
    let mut m = Map::new();
    m.insert("blocks".into(), Value::Array(blocks));
    m.insert("seed".into(), json!(setup.seed));
    m.insert("failed_checks".into(), json!(failed_checks as usize));
    Ok(m)
}

/// The Stokes pair of the reindexed system at `d`, with its formal
/// monodromy blocks.
fn ordered_pair(setup: &Setup, d: f64) -> Result<(Vec<usize>, MonodromyPair), CliError> {
    let order = im_ordering(&setup.sys.u, d)?;
    let ps = setup.sys.permuted(&order)?;
    let set = assemble_hybrid(&ps, d, &setup.product, &setup.oracle)?;
    let pair = UnipotentPair::new(ps.mult.clone(), set.plus, set.minus)?;
    Ok((order, MonodromyPair::new(pair, ps.diagonal_blocks())?))
}

fn spectrum_gap(a: &[C64], b: &[C64]) -> f64 {
    stokes_lab::numkit::match_values(a, b).1
}

fn verify_braid(setup: &Setup, d: f64) -> Result<Map<String, Value>, CliError> {
    let (order, data) = ordered_pair(setup, d)?;
    let nu = data.pair.nu();
    let inv0 = data.invariant()?;
    let (mut relation, mut far, mut cancel, mut spectrum) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 1..nu {
        let there = sigma_action_formal(i, &data)?;
        let back = sigma_inverse_action_formal(i, &there)?;
        cancel = cancel.max(back.pair.distance(&data.pair));
        spectrum = spectrum.max(spectrum_gap(&there.invariant()?, &inv0));
        if i + 1 < nu {
            let lhs = sigma_action_formal(i, &sigma_action_formal(i + 1, &sigma_action_formal(i, &data)?)?)?;
            let rhs = sigma_action_formal(i + 1, &sigma_action_formal(i, &sigma_action_formal(i + 1, &data)?)?)?;
            relation = relation.max(lhs.pair.distance(&rhs.pair));
        }
        for j in i + 2..nu {
            let lhs = sigma_action_formal(i, &sigma_action_formal(j, &data)?)?;
            let rhs = sigma_action_formal(j, &sigma_action_formal(i, &data)?)?;
            far = far.max(lhs.pair.distance(&rhs.pair));
        }
    }
    let scale = norm_fro(&data.pair.xp).max(norm_fro(&data.pair.xm)).max(1.0);
    let mut m = Map::new();
    m.insert("ordering".into(), labels(&order));
    m.insert("braid_relation".into(), check(relation / scale, 1e-10));
    m.insert("far_commutation".into(), check(far / scale, 1e-10));
    m.insert("inverse_cancels".into(), check(cancel / scale, 1e-10));
    m.insert("invariant_preserved".into(), check(spectrum, 1e-8));
    m.insert("invariant".into(), cvec(&inv0));
    let worst = [relation / scale, far / scale, cancel / scale].into_iter().fold(spectrum, f64::max);
    m.insert("result".into(), check(worst, 1e-8));
    Ok(m)
}

pub fn braid(setup: &Setup, word: &str, d: f64) -> Outcome {
    let (order, data) = ordered_pair(setup, d)?;
    let w = BraidWord::parse(word, data.pair.nu()).map_err(|e| arg_error("--word", e.to_string()))?;
    let out = apply_braid_word_formal(&w, &data)?;
    let before = data.invariant()?;
    let after = out.invariant()?;
    let mut body = Map::new();
    body.insert("word".into(), json!(w.to_string()));
    body.insert("permutation".into(), labels(&w.permutation()));
    body.insert("mult".into(), json!(out.pair.mult));
    body.insert("plus".into(), mat(&out.pair.xp));
    body.insert("minus".into(), mat(&out.pair.xm));
    body.insert("blocks".into(), mats(&out.blocks));
    body.insert("invariant_before".into(), cvec(&before));
    body.insert("invariant_after".into(), cvec(&after));
    body.insert("invariant_preserved".into(), check(spectrum_gap(&after, &before), 1e-8));
    Ok(finish("braid", Some(d), Some(&order), body))
}

pub fn report(setup: &Setup, all: bool, d: f64) -> Outcome {
    let sys = &setup.sys;
    let rays: Vec<Value> =
        anti_stokes(sys).iter().map(|r| json!({ "tau": r.tau, "pairs": pairs(&r.pairs) })).collect();
    let nr = nonresonance_check(sys, NONRESONANCE_TOL)?;
    let mut body = Map::new();
    body.insert("system".into(), system_json(sys));
    body.insert("anti_stokes".into(), Value::Array(rays));
    body.insert(
        "nonresonance".into(),
        json!({
            "block_margins": nr.block_margins,
            "full_margin": nr.full_margin,
            "blocks_pass": nr.blocks_pass(),
            "full_pass": nr.full_pass(),
        }),
    );
    if all {
        let mut sections = Map::new();
        let section = |r: Outcome| r.unwrap_or_else(|e| e.to_json());
        sections.insert("assemble".into(), section(assemble(setup, d)));
        for c in Check::ALL {
            if c.needs_quantum() && sys.quantum.is_none() {
                continue;
            }
            if c == Check::Braid && sys.nu() < 2 {
                continue;
            }
            sections.insert(c.name().into(), section(verify(setup, c, d)));
        }
        body.insert("sections".into(), Value::Object(sections));
    }
    Ok(finish("report", Some(d), None, body))
}

pub fn resolve_direction(setup: &Setup, d: Option<f64>) -> Result<f64, CliError> {
    direction(setup, d)
}
