//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_lab::braid::UnipotentPair;
use stokes_lab::hypersys::BlockedSystem;
use stokes_lab::numkit::{c, CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(r.random_range(-scale..scale), r.random_range(-scale..scale))
}

pub fn rand_matrix(r: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, m, |_, _| rand_c(r, scale))
}

pub fn offsets(mult: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for m in mult {
        off.push(off.last().unwrap() + m);
    }
    off
}

/// Random block unipotent pair with entries uniform in the box of half-width `scale`.
pub fn random_pair(r: &mut ChaCha8Rng, mult: &[usize], scale: f64) -> UnipotentPair {
    let off = offsets(mult);
    let n = off[mult.len()];
    let mut xp = CMatrix::identity(n, n);
    let mut xm = CMatrix::identity(n, n);
    for i in 0..mult.len() {
        for j in i + 1..mult.len() {
            for a in off[i]..off[i + 1] {
                for b in off[j]..off[j + 1] {
                    xp[(a, b)] = rand_c(r, scale);
                    xm[(b, a)] = rand_c(r, scale);
                }
            }
        }
    }
    UnipotentPair::new(mult.to_vec(), xp, xm).unwrap()
}

/// The ν = 2 scalar system `u = (0, 1)`, `A = [[0, 0.2], [0.3, 0]]`.
pub fn scalar2() -> BlockedSystem {
    BlockedSystem::new(
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![1, 1],
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.2, 0.0), c(0.3, 0.0), c(0.0, 0.0)]),
    )
    .unwrap()
}

/// A ν = 3 scalar system in generic position with unit-scale gaps.
pub fn scalar3() -> BlockedSystem {
    BlockedSystem::new(
        vec![c(0.0, 0.0), c(1.0, 0.3), c(0.4, 1.1)],
        vec![1, 1, 1],
        CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.1, 0.05),
                c(0.2, -0.1),
                c(-0.15, 0.1),
                c(0.25, 0.1),
                c(-0.2, 0.0),
                c(0.1, 0.2),
                c(0.05, -0.2),
                c(0.3, 0.1),
                c(0.15, -0.1),
            ],
        ),
    )
    .unwrap()
}

/// Three-point system with `u_1` equidistant from `u_0` and `u_2`, so every
/// row of the difference products for `k = 1` converges.
pub fn isosceles3() -> BlockedSystem {
    let u1 = c(1.0, 0.3);
    let u = vec![c(0.0, 0.0), u1, u1 + C64::from_polar(u1.norm(), 2.2)];
    BlockedSystem::new(u, vec![1, 1, 1], scalar3().a.clone()).unwrap()
}
