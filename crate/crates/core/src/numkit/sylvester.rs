//! Solver for the shifted commutator equation `pX − XA + AX = Y`.

use super::{ensure_finite, is_diagonal, CMatrix, C64};
use crate::error::{Error, Result};
use nalgebra::Schur;

/// Pivots smaller than this (relative to `1 + |p| + max|λ|`) count as resonant.
const RESONANCE_REL_TOL: f64 = 1e-12;

fn schur_of(a: &CMatrix) -> Result<(Option<CMatrix>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("Sylvester coefficient must be square".into()));
    }
    ensure_finite(a, "Sylvester coefficient")?;
    if is_diagonal(a, 0.0) {
        return Ok((None, a.clone()));
    }
    let (q, t) = Schur::try_new(a.clone(), 1e-15, 10_000).ok_or(Error::NonConvergence)?.unpack();
    Ok((Some(q), t))
}

fn diag_scale(t: &CMatrix) -> f64 {
    (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
}

/// Solver for `pX + CX − XB = Y` with precomputed Schur forms of `C` and
/// `B`, reusable across many shifts `p` (Bartels–Stewart).
#[derive(Debug, Clone)]
pub struct SylvesterSolver {
    qc: Option<CMatrix>,
    tc: CMatrix,
    qb: Option<CMatrix>,
    tb: CMatrix,
    scale: f64,
}

impl SylvesterSolver {
    /// Prepares the solver for left coefficient `c` and right coefficient `b`.
    pub fn new(c: &CMatrix, b: &CMatrix) -> Result<Self> {
        let (qc, tc) = schur_of(c)?;
        let (qb, tb) = schur_of(b)?;
        let scale = diag_scale(&tc) + diag_scale(&tb);
        Ok(Self { qc, tc, qb, tb, scale })
    }

    /// Shape `(rows, cols)` of the unknown.
    pub fn shape(&self) -> (usize, usize) {
        (self.tc.nrows(), self.tb.nrows())
    }

    /// Solves `pX + CX − XB = Y` for `X`.
    pub fn solve(&self, p: C64, y: &CMatrix) -> Result<CMatrix> {
        let (m, n) = self.shape();
        if y.nrows() != m || y.ncols() != n {
            return Err(Error::ShapeMismatch("Sylvester right-hand side".into()));
        }
        let mut yt = match &self.qc {
            Some(q) => q.adjoint() * y,
            None => y.clone(),
        };
        if let Some(q) = &self.qb {
            yt *= q;
        }
        let (tc, tb) = (&self.tc, &self.tb);
        let tol = RESONANCE_REL_TOL * (1.0 + p.norm() + self.scale);
        let mut x = CMatrix::zeros(m, n);
        let mut rhs = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            // (p + T_C − (T_B)_jj) x_j = y_j + Σ_{l<j} (T_B)_lj x_l
            for i in 0..m {
                rhs[i] = yt[(i, j)];
            }
            for l in 0..j {
                let tlj = tb[(l, j)];
                if tlj != C64::new(0.0, 0.0) {
                    for i in 0..m {
                        rhs[i] += tlj * x[(i, l)];
                    }
                }
            }
            for i in (0..m).rev() {
                let mut acc = rhs[i];
                for l in (i + 1)..m {
                    acc -= tc[(i, l)] * x[(l, j)];
                }
                let piv = p + tc[(i, i)] - tb[(j, j)];
                if piv.norm() <= tol {
                    return Err(Error::Resonant(format!(
                        "shift {p} matches eigenvalue difference {}",
                        tb[(j, j)] - tc[(i, i)]
                    )));
                }
                x[(i, j)] = acc / piv;
            }
        }
        let mut out = match &self.qc {
            Some(q) => q * x,
            None => x,
        };
        if let Some(q) = &self.qb {
            out *= q.adjoint();
        }
        ensure_finite(&out, "Sylvester solve")?;
        Ok(out)
    }
}

/// Solver for `pX − XA + AX = Y` with `A` fixed and `p` varying.
#[derive(Debug, Clone)]
pub struct ShiftSolver(SylvesterSolver);

impl ShiftSolver {
    /// Prepares the solver for a square matrix `a`.
    pub fn new(a: &CMatrix) -> Result<Self> {
        Ok(Self(SylvesterSolver::new(a, a)?))
    }

    /// Dimension of `A`.
    pub fn dim(&self) -> usize {
        self.0.shape().0
    }

    /// Solves `pX − XA + AX = Y` for `X`.
    pub fn solve(&self, p: C64, y: &CMatrix) -> Result<CMatrix> {
        self.0.solve(p, y)
    }
}

/// Solves `pX − XA + AX = Y`.
pub fn sylvester_shift_solve(p: C64, a: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    ShiftSolver::new(a)?.solve(p, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, cr, diag, norm2, zeros};

    #[test]
    fn zero_matrix_collapses_to_division() {
        let y = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let x = sylvester_shift_solve(cr(4.0), &zeros(2, 2), &y).unwrap();
        assert!(norm2(&(x - y / cr(4.0))) < 1e-15);
    }

    #[test]
    fn diagonal_entrywise_formula() {
        let a = diag(&[cr(0.3), c(-0.2, 0.1)]);
        let y = CMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, 2.0 - j as f64));
        let p = cr(2.0);
        let x = sylvester_shift_solve(p, &a, &y).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = y[(i, j)] / (p - a[(j, j)] + a[(i, i)]);
                assert!((x[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn general_pair_residual() {
        let cm = CMatrix::from_fn(2, 2, |i, j| c(0.1 * (i + 2 * j) as f64, 0.05 * i as f64));
        let bm = CMatrix::from_fn(3, 3, |i, j| c(0.2 * ((i * j) % 3) as f64 - 0.1, 0.03 * j as f64));
        let y = CMatrix::from_fn(2, 3, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
        let p = c(-2.5, 0.1);
        let x = SylvesterSolver::new(&cm, &bm).unwrap().solve(p, &y).unwrap();
        let r = &x * p + &cm * &x - &x * &bm - &y;
        assert!(norm2(&r) < 1e-13);
    }

    #[test]
    fn resonance_detected() {
        let a = diag(&[cr(0.0), cr(1.0)]);
        let y = CMatrix::from_element(2, 2, cr(1.0));
        assert!(matches!(sylvester_shift_solve(cr(1.0), &a, &y), Err(Error::Resonant(_))));
    }
}
