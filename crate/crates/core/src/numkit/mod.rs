//! Complex dense linear algebra and matrix functions.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. Every public
//! routine that produces a matrix checks its entries for finiteness and
//! reports [`Error::NonFinite`] instead of returning NaN or infinity.

mod gamma;
mod spectral;
mod sylvester;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use spectral::{cpow, eig, eig_with_bound, mat_fun, scalar_cpow, Spectral, DEFAULT_COND_BOUND};
pub use sylvester::{sylvester_shift_solve, ShiftSolver, SylvesterSolver};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex scalar used everywhere.
pub type C64 = Complex64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real scalar as a complex number.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `n × n` identity.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `r × c` zero matrix.
pub fn zeros(r: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(r, cols)
}

/// Diagonal matrix with the given entries.
pub fn diag(values: &[C64]) -> CMatrix {
    let n = values.len();
    let mut m = zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

/// Builds a matrix from row slices. All rows must have the same length.
pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::ShapeMismatch("ragged rows".into()));
    }
    let m = CMatrix::from_fn(r, cols, |i, j| rows[i][j]);
    ensure_finite(&m, "from_rows")?;
    Ok(m)
}

/// Real matrix from row slices, convenient in tests and examples.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| cr(rows[i][j]))
}

/// Returns `Err(NonFinite)` if any entry is NaN or infinite.
pub fn ensure_finite(m: &CMatrix, ctx: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(ctx))
    }
}

/// Spectral (operator 2-) norm.
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return norm_fro(m);
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn norm_fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// True when every off-diagonal entry has modulus at most `tol`.
pub fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() <= tol))
}

/// Inverse via LU with partial pivoting.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular("inverse"))?;
    ensure_finite(&inv, "inverse")?;
    Ok(inv)
}

/// Solves `a x = b`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch("solve".into()));
    }
    let x = a.clone().lu().solve(b).ok_or(Error::Singular("solve"))?;
    ensure_finite(&x, "solve")?;
    Ok(x)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Commutator `ab − ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Reduces an angle to the interval `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Block direct sum of square matrices.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(n, m);
    let (mut r, mut col) = (0, 0);
    for b in blocks {
        out.view_mut((r, col), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        col += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norms_of_diagonal() {
        let m = diag(&[cr(3.0), c(0.0, -4.0)]);
        assert!((norm2(&m) - 4.0).abs() < 1e-12);
        assert!((norm_fro(&m) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(inverse(&m).is_err());
    }

    #[test]
    fn kron_dimensions() {
        let k = kron(&identity(2), &identity(3));
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k, identity(6));
    }
}

/// Greedy matching of the multiset `got` to `want` (equal lengths): each
/// element of `got` in turn takes the nearest unused element of `want`.
/// Returns the chosen indices into `want` and the largest matched distance.
pub fn match_values(got: &[C64], want: &[C64]) -> (Vec<usize>, f64) {
    assert_eq!(got.len(), want.len(), "multisets of different size");
    let mut used = vec![false; want.len()];
    let mut perm = Vec::with_capacity(got.len());
    let mut worst: f64 = 0.0;
    for g in got {
        let (j, dist) = want
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (g - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("equal lengths");
        used[j] = true;
        perm.push(j);
        worst = worst.max(dist);
    }
    (perm, worst)
}
