//! The recursive matrices `L_k(z)` and their actions with operator arguments.

use super::BlockedSystem;
use crate::error::{Error, Result};
use crate::numkit::{ensure_finite, solve, CMatrix, SylvesterSolver, C64};

/// Data of the `k`-th recursive matrix
/// `L_k(z) = v ((z + A_k̂k̂) − A_k̂k (z + A_kk)⁻¹ A_kk̂)`, `v = (u_k − u_k̂k̂)⁻¹`.
#[derive(Debug, Clone)]
pub struct RecursiveOp {
    pub k: usize,
    /// Rows of the complement of block `k`.
    pub hat: Vec<usize>,
    /// Diagonal of `v`, one entry per row in `hat`.
    pub v: Vec<C64>,
    pub a_hh: CMatrix,
    pub a_hk: CMatrix,
    pub a_kh: CMatrix,
    pub a_kk: CMatrix,
}

fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Multiplies row `i` of `x` by `d[i]`.
pub(crate) fn scale_rows(d: &[C64], x: &CMatrix) -> CMatrix {
    let mut out = x.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] *= d[i];
        }
    }
    out
}

/// Multiplies column `j` of `x` by `d[j]`.
pub(crate) fn scale_cols(x: &CMatrix, d: &[C64]) -> CMatrix {
    let mut out = x.clone();
    for j in 0..out.ncols() {
        for i in 0..out.nrows() {
            out[(i, j)] *= d[j];
        }
    }
    out
}

impl RecursiveOp {
    /// Builds the data for block `k`.
    pub fn new(sys: &BlockedSystem, k: usize) -> Self {
        let hat = sys.hat_indices(k);
        let kk: Vec<usize> = sys.range(k).collect();
        let v = hat
            .iter()
            .map(|&i| {
                let b = (0..sys.nu()).find(|&b| sys.range(b).contains(&i)).expect("row in some block");
                C64::new(1.0, 0.0) / (sys.u[k] - sys.u[b])
            })
            .collect();
        Self {
            k,
            a_hh: select(&sys.a, &hat, &hat),
            a_hk: select(&sys.a, &hat, &kk),
            a_kh: select(&sys.a, &kk, &hat),
            a_kk: select(&sys.a, &kk, &kk),
            hat,
            v,
        }
    }

    /// Dimension `n − n_k` of the complement.
    pub fn dim(&self) -> usize {
        self.hat.len()
    }

    /// Plain evaluation of `L_k(z)`.
    pub fn matrix(&self, z: C64) -> Result<CMatrix> {
        let nk = self.a_kk.nrows();
        let shifted = CMatrix::identity(nk, nk) * z + &self.a_kk;
        let scale = 1.0 + z.norm() + self.a_kk.norm();
        let sv = shifted.clone().singular_values();
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) <= 1e-13 * scale {
            return Err(Error::SingularShift { re: z.re, im: z.im });
        }
        let w = solve(&shifted, &self.a_kh).map_err(|_| Error::SingularShift { re: z.re, im: z.im })?;
        let inner = CMatrix::identity(self.dim(), self.dim()) * z + &self.a_hh - &self.a_hk * w;
        let out = scale_rows(&self.v, &inner);
        ensure_finite(&out, "recursive matrix")?;
        Ok(out)
    }

    /// Solver used by [`Self::apply_right`] for a right coefficient `b`.
    pub fn right_solver(&self, b: &CMatrix) -> Result<SylvesterSolver> {
        SylvesterSolver::new(&self.a_kk, b)
    }

    /// `L_k(shift − B^r) · X = v (shift·X − X B + A_k̂k̂ X − A_k̂k W)` with
    /// `shift·W + A_kk W − W B = A_kk̂ X`.
    pub fn apply_right(&self, shift: C64, b: &CMatrix, solver: &SylvesterSolver, x: &CMatrix) -> Result<CMatrix> {
        let w = solver.solve(shift, &(&self.a_kh * x))?;
        let inner = x * shift - x * b + &self.a_hh * x - &self.a_hk * w;
        Ok(scale_rows(&self.v, &inner))
    }

    /// Solver used by [`Self::apply_left`] for a left coefficient `c`.
    pub fn left_solver(&self, c: &CMatrix) -> Result<SylvesterSolver> {
        SylvesterSolver::new(&(-c), &(-&self.a_kk))
    }

    /// `X · L_k(shift − C^l) = shift·Y − C Y + Y A_k̂k̂ − W A_kk̂` with
    /// `Y = X v` and `shift·W − C W + W A_kk = Y A_k̂k`.
    pub fn apply_left(&self, shift: C64, c: &CMatrix, solver: &SylvesterSolver, x: &CMatrix) -> Result<CMatrix> {
        let y = scale_cols(x, &self.v);
        let w = solver.solve(shift, &(&y * &self.a_hk))?;
        Ok(&y * shift - c * &y + &y * &self.a_hh - w * &self.a_kh)
    }
}

/// The recursive matrix `L_k(z)` for a block `k`, or `L_0(z) = −u⁻¹(z + A)`
/// when `k` is `None`.
pub fn recursive_matrix(sys: &BlockedSystem, k: Option<usize>, z: C64) -> Result<CMatrix> {
    match k {
        Some(k) => {
            if k >= sys.nu() {
                return Err(Error::Invalid(format!("block index {k} out of range")));
            }
            RecursiveOp::new(sys, k).matrix(z)
        }
        None => {
            let n = sys.n();
            let u = sys.u_matrix();
            if (0..n).any(|i| u[(i, i)].norm() == 0.0) {
                return Err(Error::Singular("u in L_0"));
            }
            let mut out = CMatrix::identity(n, n) * z + &sys.a;
            for i in 0..n {
                let s = -C64::new(1.0, 0.0) / u[(i, i)];
                for j in 0..n {
                    out[(i, j)] *= s;
                }
            }
            ensure_finite(&out, "recursive matrix")?;
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{cr, diag, norm2, zeros};

    #[test]
    fn l0_example() {
        let sys = BlockedSystem::new(vec![cr(1.0), cr(2.0)], vec![1, 1], zeros(2, 2)).unwrap();
        let l = recursive_matrix(&sys, None, cr(3.0)).unwrap();
        assert!(norm2(&(l - diag(&[cr(-3.0), cr(-1.5)]))) < 1e-15);
    }

    #[test]
    fn zero_residue_collapse() {
        let sys = BlockedSystem::new(vec![cr(0.0), cr(1.0), cr(3.0)], vec![1, 2, 1], zeros(4, 4)).unwrap();
        let z = cr(2.5);
        let l = recursive_matrix(&sys, Some(0), z).unwrap();
        let expect = diag(&[z / (0.0 - 1.0), z / (0.0 - 1.0), z / (0.0 - 3.0)]);
        assert!(norm2(&(l - expect)) < 1e-15);
    }

    #[test]
    fn singular_shift_detected() {
        let sys = BlockedSystem::new(vec![cr(0.0), cr(1.0)], vec![1, 1], diag(&[cr(0.25), cr(0.0)])).unwrap();
        assert!(matches!(recursive_matrix(&sys, Some(0), cr(-0.25)), Err(Error::SingularShift { .. })));
    }

    #[test]
    fn operator_action_with_zero_coefficient_matches_plain_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new(0.1 * (i as f64 - j as f64), 0.05 * (i + j) as f64));
        let sys = BlockedSystem::new(vec![cr(0.0), cr(1.0)], vec![1, 2], a).unwrap();
        let op = RecursiveOp::new(&sys, 0);
        let z = C64::new(1.3, -0.4);
        let x = CMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64));
        let b = zeros(2, 2);
        let solver = op.right_solver(&b).unwrap();
        let lhs = op.apply_right(z, &b, &solver, &x).unwrap();
        assert!(norm2(&(lhs - op.matrix(z).unwrap() * &x)) < 1e-13);
        let cz = zeros(2, 2);
        let ls = op.left_solver(&cz).unwrap();
        let lhs = op.apply_left(z, &cz, &ls, &x).unwrap();
        assert!(norm2(&(lhs - &x * op.matrix(z).unwrap())) < 1e-13);
    }
}
