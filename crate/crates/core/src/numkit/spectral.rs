//! Eigendecomposition and matrix functions through eigenvectors.

use super::{ensure_finite, inverse, is_diagonal, norm2, wrap_angle, CMatrix, C64};
use crate::error::{Error, Result};
use nalgebra::Schur;

/// Default upper bound on the eigenvector condition number.
pub const DEFAULT_COND_BOUND: f64 = 1e8;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigen-decomposition `M = V diag(values) V⁻¹`.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, each of unit Euclidean norm.
    pub vectors: CMatrix,
    /// Inverse of `vectors`.
    pub inv_vectors: CMatrix,
    /// 2-norm condition number of `vectors`.
    pub cond: f64,
}

impl Spectral {
    /// Evaluates `V diag(f(λ)) V⁻¹`.
    pub fn apply<F>(&self, f: F) -> Result<CMatrix>
    where
        F: Fn(C64) -> Result<C64>,
    {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fl = f(lam)?;
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fl;
            }
        }
        let out = scaled * &self.inv_vectors;
        ensure_finite(&out, "mat_fun")?;
        Ok(out)
    }

    /// Rebuilds the decomposed matrix.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply(Ok).expect("identity function is total")
    }
}

/// Eigendecomposition with the default conditioning bound.
pub fn eig(m: &CMatrix) -> Result<Spectral> {
    eig_with_bound(m, DEFAULT_COND_BOUND)
}

/// Eigendecomposition rejecting eigenvector matrices with `cond > bound`.
///
/// Diagonal inputs are decomposed exactly. Otherwise a complex Schur form
/// `M = Q T Q*` is computed and eigenvectors of `T` are recovered by
/// back-substitution.
pub fn eig_with_bound(m: &CMatrix, bound: f64) -> Result<Spectral> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("eig of a non-square matrix".into()));
    }
    ensure_finite(m, "eig input")?;
    let n = m.nrows();
    if is_diagonal(m, 0.0) {
        let values = (0..n).map(|i| m[(i, i)]).collect();
        return Ok(Spectral {
            values,
            vectors: CMatrix::identity(n, n),
            inv_vectors: CMatrix::identity(n, n),
            cond: 1.0,
        });
    }
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or(Error::NonConvergence)?;
    let (q, t) = schur.unpack();
    let scale = norm2(&t).max(f64::MIN_POSITIVE);
    let same_tol = 1e-9 * scale;
    let defect_tol = 1e-7 * scale;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = values[k];
        y[(k, k)] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut num = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                num += t[(j, l)] * y[(l, k)];
            }
            let den = t[(j, j)] - lam;
            if den.norm() <= same_tol {
                if num.norm() <= defect_tol {
                    y[(j, k)] = C64::new(0.0, 0.0);
                } else {
                    return Err(Error::IllConditioned { cond: f64::INFINITY, bound });
                }
            } else {
                y[(j, k)] = -num / den;
            }
        }
    }
    let mut vectors = q * y;
    for j in 0..n {
        let nrm = vectors.column(j).norm();
        for i in 0..n {
            vectors[(i, j)] /= nrm;
        }
    }
    let inv_vectors = inverse(&vectors).map_err(|_| Error::IllConditioned { cond: f64::INFINITY, bound })?;
    let cond = norm2(&vectors) * norm2(&inv_vectors);
    if !(cond <= bound) {
        return Err(Error::IllConditioned { cond, bound });
    }
    Ok(Spectral { values, vectors, inv_vectors, cond })
}

/// Matrix function `f(M) = V diag(f(λ)) V⁻¹`.
pub fn mat_fun<F>(m: &CMatrix, f: F) -> Result<CMatrix>
where
    F: Fn(C64) -> Result<C64>,
{
    eig(m)?.apply(f)
}

/// Checks that `theta` is an argument of `w` and returns `ln|w| + iθ`.
fn log_with_arg(w: C64, theta: f64) -> Result<C64> {
    let r = w.norm();
    if !(r > 0.0) || !theta.is_finite() {
        return Err(Error::ArgumentMismatch { re: w.re, im: w.im, theta });
    }
    if wrap_angle(theta - w.arg()).abs() > 1e-9 {
        return Err(Error::ArgumentMismatch { re: w.re, im: w.im, theta });
    }
    Ok(C64::new(r.ln(), theta))
}

/// Scalar power `w^e = exp(e (ln|w| + iθ))` with an explicit argument `θ`.
pub fn scalar_cpow(w: C64, theta: f64, e: C64) -> Result<C64> {
    let l = log_with_arg(w, theta)?;
    let out = (e * l).exp();
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::NonFinite("scalar_cpow"))
    }
}

/// Matrix power `w^E = exp(E (ln|w| + iθ))` with an explicit argument `θ`.
pub fn cpow(w: C64, theta: f64, e: &CMatrix) -> Result<CMatrix> {
    let l = log_with_arg(w, theta)?;
    mat_fun(e, |lam| Ok((lam * l).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, cr, diag, from_real_rows, identity, norm2};
    use std::f64::consts::PI;

    #[test]
    fn eig_identity() {
        let s = eig(&identity(2)).unwrap();
        assert_eq!(s.values, vec![cr(1.0), cr(1.0)]);
        assert!((s.cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_diagonal_values() {
        let s = eig(&diag(&[cr(2.0), c(0.0, 3.0)])).unwrap();
        assert_eq!(s.values, vec![cr(2.0), c(0.0, 3.0)]);
    }

    #[test]
    fn eig_rejects_jordan_block() {
        let j = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig(&j), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn eig_reconstructs_general_matrix() {
        let m = CMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.37 - 1.1, ((i + 2 * j) % 5) as f64 * 0.21));
        let s = eig(&m).unwrap();
        assert!(norm2(&(s.reconstruct() - &m)) <= 1e-10 * norm2(&m));
    }

    #[test]
    fn eig_repeated_eigenvalue_diagonalizable() {
        let p = from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]]);
        let d = diag(&[cr(2.0), cr(2.0), cr(-1.0)]);
        let m = &p * d * inverse(&p).unwrap();
        let s = eig(&m).unwrap();
        assert!(norm2(&(s.reconstruct() - &m)) <= 1e-10 * norm2(&m));
    }

    #[test]
    fn cpow_branch_and_mismatch() {
        let r = cpow(cr(-1.0), PI, &diag(&[cr(0.5)])).unwrap();
        assert!((r[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(cpow(cr(-1.0), 0.0, &diag(&[cr(0.5)])), Err(Error::ArgumentMismatch { .. })));
        let r3 = cpow(cr(-1.0), 3.0 * PI, &diag(&[cr(0.5)])).unwrap();
        assert!((r3[(0, 0)] - c(0.0, -1.0)).norm() < 1e-14);
    }
}
