//! Finite-dimensional representations of gl_ν given by generator matrices.
//!
//! Indices are zero-based: `gen[i][j]` is the image of `e_{i+1, j+1}`.

use crate::error::{Error, Result};
use crate::numkit::{commutator, cr, ensure_finite, identity, is_diagonal, kron, norm2, zeros, CMatrix};

/// Diagonality threshold used for the weight-basis flag.
const WEIGHT_BASIS_TOL: f64 = 1e-14;

/// A representation of gl_ν on a `dim`-dimensional space.
#[derive(Debug, Clone)]
pub struct Rep {
    pub nu: usize,
    pub dim: usize,
    /// `gen[i][j]` is the action of `e_ij`.
    pub gen: Vec<Vec<CMatrix>>,
    /// True iff every `gen[k][k]` is diagonal.
    pub weight_basis: bool,
}

impl Rep {
    /// Wraps explicit generator matrices after shape checks. The gl relations
    /// are not enforced here; call [`verify_gl_relations`] to validate.
    pub fn from_generators(nu: usize, gen: Vec<Vec<CMatrix>>) -> Result<Self> {
        if nu == 0 || gen.len() != nu || gen.iter().any(|row| row.len() != nu) {
            return Err(Error::ShapeMismatch(format!("expected a {nu}×{nu} grid of generators")));
        }
        let dim = gen[0][0].nrows();
        for row in &gen {
            for g in row {
                if g.nrows() != dim || g.ncols() != dim {
                    return Err(Error::ShapeMismatch("generator matrices must share one square shape".into()));
                }
                ensure_finite(g, "generator")?;
            }
        }
        let weight_basis = (0..nu).all(|k| is_diagonal(&gen[k][k], WEIGHT_BASIS_TOL));
        Ok(Self { nu, dim, gen, weight_basis })
    }

    /// Image of `e_ij`.
    pub fn e(&self, i: usize, j: usize) -> &CMatrix {
        &self.gen[i][j]
    }

    /// Image of the Casimir-like sum `Σ_k e_kk`.
    pub fn trace_element(&self) -> CMatrix {
        let mut s = zeros(self.dim, self.dim);
        for k in 0..self.nu {
            s += &self.gen[k][k];
        }
        s
    }
}

/// Defining representation on ℂ^ν, `e_ij ↦ E_ij`.
pub fn defining_rep(nu: usize) -> Rep {
    let gen = (0..nu)
        .map(|i| {
            (0..nu)
                .map(|j| {
                    let mut m = zeros(nu, nu);
                    m[(i, j)] = cr(1.0);
                    m
                })
                .collect()
        })
        .collect();
    Rep { nu, dim: nu, gen, weight_basis: true }
}

/// Coproduct representation on `V₁ ⊗ V₂`, `e ↦ e ⊗ 1 + 1 ⊗ e`.
pub fn tensor_rep(r1: &Rep, r2: &Rep) -> Result<Rep> {
    if r1.nu != r2.nu {
        return Err(Error::RankMismatch(r1.nu, r2.nu));
    }
    let (i1, i2) = (identity(r1.dim), identity(r2.dim));
    let gen = (0..r1.nu)
        .map(|i| (0..r1.nu).map(|j| kron(&r1.gen[i][j], &i2) + kron(&i1, &r2.gen[i][j])).collect())
        .collect();
    Rep::from_generators(r1.nu, gen)
}

/// Exponent vectors `a` with `|a| = m`, in descending lexicographic order.
fn compositions(nu: usize, m: usize) -> Vec<Vec<usize>> {
    if nu == 0 {
        return if m == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=m).rev() {
        for mut rest in compositions(nu - 1, m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Symmetric power `Sym^m ℂ^ν` on the monomial basis `x^a`, where `e_ij`
/// acts as the operator `x_i ∂/∂x_j`.
pub fn sym_power_rep(nu: usize, m: usize) -> Rep {
    let basis = compositions(nu, m);
    let dim = basis.len();
    let index = |a: &Vec<usize>| basis.iter().position(|b| b == a).expect("monomial in basis");
    let mut gen = vec![vec![zeros(dim, dim); nu]; nu];
    for (col, a) in basis.iter().enumerate() {
        for i in 0..nu {
            for j in 0..nu {
                if a[j] == 0 {
                    continue;
                }
                let mut b = a.clone();
                b[j] -= 1;
                b[i] += 1;
                gen[i][j][(index(&b), col)] += cr(a[j] as f64);
            }
        }
    }
    Rep { nu, dim, gen, weight_basis: true }
}

/// Largest spectral-norm residual of `[e_ij, e_kl] − δ_jk e_il + δ_li e_kj`.
pub fn verify_gl_relations(r: &Rep) -> f64 {
    let nu = r.nu;
    let mut worst: f64 = 0.0;
    for i in 0..nu {
        for j in 0..nu {
            for k in 0..nu {
                for l in 0..nu {
                    let mut d = commutator(&r.gen[i][j], &r.gen[k][l]);
                    if j == k {
                        d -= &r.gen[i][l];
                    }
                    if l == i {
                        d += &r.gen[k][j];
                    }
                    worst = worst.max(norm2(&d));
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::eig;

    #[test]
    fn defining_generators() {
        let r = defining_rep(2);
        assert_eq!(r.e(0, 1)[(0, 1)], cr(1.0));
        assert_eq!(r.trace_element(), identity(2));
        let lhs = commutator(r.e(0, 1), r.e(1, 0));
        assert_eq!(lhs, r.e(0, 0) - r.e(1, 1));
        assert!(verify_gl_relations(&defining_rep(3)) <= 1e-15);
    }

    #[test]
    fn tensor_dimension_and_weights() {
        let d = defining_rep(2);
        let t = tensor_rep(&d, &d).unwrap();
        assert_eq!(t.dim, 4);
        assert!(t.weight_basis);
        let w: Vec<f64> = (0..4).map(|i| t.e(0, 0)[(i, i)].re).collect();
        assert_eq!(w, vec![2.0, 1.0, 1.0, 0.0]);
        assert!(verify_gl_relations(&t) <= 1e-12);
        assert!(matches!(tensor_rep(&d, &defining_rep(3)), Err(Error::RankMismatch(2, 3))));
    }

    #[test]
    fn symmetric_powers() {
        let s = sym_power_rep(2, 2);
        assert_eq!(s.dim, 3);
        let mut w: Vec<f64> = eig(s.e(0, 0)).unwrap().values.iter().map(|z| z.re).collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(w, vec![2.0, 1.0, 0.0]);
        let triv = sym_power_rep(3, 0);
        assert_eq!(triv.dim, 1);
        assert!(triv.gen.iter().flatten().all(|g| g[(0, 0)] == cr(0.0)));
        let one = sym_power_rep(3, 1);
        let def = defining_rep(3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(one.e(i, j), def.e(i, j));
            }
        }
        assert_eq!(sym_power_rep(3, 3).dim, 10);
        assert!(verify_gl_relations(&sym_power_rep(3, 3)) <= 1e-12);
    }

    #[test]
    fn perturbation_is_detected() {
        let mut r = defining_rep(2);
        r.gen[0][1][(0, 0)] += cr(1e-3);
        assert!(verify_gl_relations(&r) >= 1e-4);
    }
}
