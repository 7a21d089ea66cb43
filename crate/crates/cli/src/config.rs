//! Problem description: JSON schema, validation and conversion to core types.

use serde::Deserialize;
use stokes_lab::glrep::{defining_rep, sym_power_rep, Rep};
use stokes_lab::hypersys::BlockedSystem;
use stokes_lab::numkit::{CMatrix, C64};
use stokes_lab::oracle::OracleConfig;
use stokes_lab::stokes::ProductConfig;

/// A complex number written as `[re, im]`.
pub type Pair = [f64; 2];

/// A matrix written as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<Pair>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default)]
    pub hbar: Option<Pair>,
    pub u: Vec<Pair>,
    #[serde(default)]
    pub rep: Option<RepInput>,
    #[serde(default)]
    pub classical: Option<Classical>,
    #[serde(default)]
    pub tol: Option<Tolerances>,
    #[serde(default)]
    pub pmax: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    Defining,
    Sym,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepInput {
    #[serde(rename = "type")]
    pub kind: RepKind,
    pub nu: usize,
    #[serde(default)]
    pub power: Option<usize>,
    /// `matrices[i][j]` is the image of `E_ij`.
    #[serde(default)]
    pub matrices: Option<Vec<Vec<MatrixRows>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classical {
    pub mult: Vec<usize>,
    #[serde(rename = "A")]
    pub a: MatrixRows,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub product: Option<f64>,
    #[serde(default)]
    pub ode: Option<f64>,
}

/// A rejected input, located by a JSON pointer.
#[derive(Debug, Clone)]
pub struct ValidationError {
    pub pointer: String,
    pub message: String,
}

impl ValidationError {
    fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self { pointer: pointer.into(), message: message.into() }
    }
}

/// Everything a command needs: the system and the numerical settings.
#[derive(Debug, Clone)]
pub struct Setup {
    pub sys: BlockedSystem,
    pub product: ProductConfig,
    pub oracle: OracleConfig,
    pub seed: u64,
}

pub const DEFAULT_PRODUCT_TOL: f64 = 1e-8;
pub const DEFAULT_ODE_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 1;

/// Converts a serde path such as `u[2].re` into the pointer `/u/2/re`.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Parses the problem text; syntax and type errors carry the pointer of the
/// value being read when they occurred.
pub fn parse(text: &str) -> Result<Problem, ValidationError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        ValidationError::at(pointer, e.into_inner().to_string())
    })
}

fn complex(p: &Pair, pointer: &str) -> Result<C64, ValidationError> {
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(ValidationError::at(pointer, "complex entries must be finite"));
    }
    Ok(C64::new(p[0], p[1]))
}

fn matrix(rows: &MatrixRows, n: usize, pointer: &str) -> Result<CMatrix, ValidationError> {
    if rows.len() != n {
        return Err(ValidationError::at(pointer, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ValidationError::at(format!("{pointer}/{i}"), format!("expected {n} entries, found {}", row.len())));
        }
        for (j, p) in row.iter().enumerate() {
            m[(i, j)] = complex(p, &format!("{pointer}/{i}/{j}"))?;
        }
    }
    Ok(m)
}

fn positive(value: Option<f64>, default: f64, pointer: &str) -> Result<f64, ValidationError> {
    match value {
        None => Ok(default),
        Some(v) if v.is_finite() && v > 0.0 => Ok(v),
        Some(_) => Err(ValidationError::at(pointer, "must be a positive finite number")),
    }
}

fn build_rep(wanted: &RepInput) -> Result<Rep, ValidationError> {
    if wanted.nu == 0 {
        return Err(ValidationError::at("/rep/nu", "rank must be positive"));
    }
    match wanted.kind {
        RepKind::Defining => Ok(defining_rep(wanted.nu)),
        RepKind::Sym => {
            let m = wanted.power.ok_or_else(|| ValidationError::at("/rep/power", "symmetric power needs \"power\""))?;
            Ok(sym_power_rep(wanted.nu, m))
        }
        RepKind::Explicit => {
            let mats = wanted.matrices.as_ref().ok_or_else(|| ValidationError::at("/rep/matrices", "explicit rep needs \"matrices\""))?;
            if mats.len() != wanted.nu {
                return Err(ValidationError::at("/rep/matrices", format!("expected {} rows of generators", wanted.nu)));
            }
            let dim = mats.first().and_then(|r| r.first()).map(|m| m.len()).unwrap_or(0);
            if dim == 0 {
                return Err(ValidationError::at("/rep/matrices/0/0", "generators must be non-empty square matrices"));
            }
            let mut gen = Vec::with_capacity(wanted.nu);
            for (i, row) in mats.iter().enumerate() {
                if row.len() != wanted.nu {
                    return Err(ValidationError::at(format!("/rep/matrices/{i}"), format!("expected {} generators", wanted.nu)));
                }
                let mut out = Vec::with_capacity(wanted.nu);
                for (j, m) in row.iter().enumerate() {
                    out.push(matrix(m, dim, &format!("/rep/matrices/{i}/{j}"))?);
                }
                gen.push(out);
            }
            Rep::from_generators(wanted.nu, gen).map_err(|e| ValidationError::at("/rep/matrices", e.to_string()))
        }
    }
}

/// Validates the problem and builds the system and numerical settings.
pub fn setup(p: &Problem) -> Result<Setup, ValidationError> {
    if p.u.is_empty() {
        return Err(ValidationError::at("/u", "at least one point is required"));
    }
    let u: Vec<C64> = p.u.iter().enumerate().map(|(i, z)| complex(z, &format!("/u/{i}"))).collect::<Result<_, _>>()?;
    let quantum = p.hbar.is_some() || p.rep.is_some();
    let sys = match (&p.classical, quantum) {
        (Some(_), true) => {
            return Err(ValidationError::at("/classical", "give either \"hbar\" with \"rep\" or \"classical\", not both"));
        }
        (None, false) => return Err(ValidationError::at("", "one of \"hbar\" with \"rep\", or \"classical\", is required")),
        (Some(cl), false) => {
            if cl.mult.len() != u.len() {
                return Err(ValidationError::at("/classical/mult", format!("expected {} multiplicities", u.len())));
            }
            if let Some(i) = cl.mult.iter().position(|&m| m == 0) {
                return Err(ValidationError::at(format!("/classical/mult/{i}"), "multiplicities must be positive"));
            }
            let n = cl.mult.iter().sum();
            let a = matrix(&cl.a, n, "/classical/A")?;
            BlockedSystem::new(u, cl.mult.clone(), a).map_err(|e| system_error(e, "/classical/A"))?
        }
        (None, true) => {
            let h = p.hbar.as_ref().ok_or_else(|| ValidationError::at("/hbar", "quantum problems need \"hbar\""))?;
            let hbar = complex(h, "/hbar")?;
            let wanted = p.rep.as_ref().ok_or_else(|| ValidationError::at("/rep", "quantum problems need \"rep\""))?;
            let rep = build_rep(wanted)?;
            if rep.nu != u.len() {
                return Err(ValidationError::at("/rep/nu", format!("rank {} does not match {} points", rep.nu, u.len())));
            }
            BlockedSystem::from_quantum(&rep, u, hbar).map_err(|e| system_error(e, "/hbar"))?
        }
    };
    let tol = p.tol.as_ref();
    let product_tol = positive(tol.and_then(|t| t.product), DEFAULT_PRODUCT_TOL, "/tol/product")?;
    let ode_tol = positive(tol.and_then(|t| t.ode), DEFAULT_ODE_TOL, "/tol/ode")?;
    let mut product = ProductConfig { tol: product_tol, ..ProductConfig::default() };
    if let Some(pmax) = p.pmax {
        if pmax < 2 * product.p0 {
            return Err(ValidationError::at("/pmax", format!("must be at least {}", 2 * product.p0)));
        }
        product.pmax = pmax;
    }
    let oracle = OracleConfig { max_error: ode_tol, ..OracleConfig::default() };
    Ok(Setup { sys, product, oracle, seed: p.seed.unwrap_or(DEFAULT_SEED) })
}

fn system_error(e: stokes_lab::Error, fallback: &str) -> ValidationError {
    match e {
        stokes_lab::Error::DegenerateU(_, j) => ValidationError::at(format!("/u/{j}"), e.to_string()),
        other => ValidationError::at(fallback, other.to_string()),
    }
}
