//! Braid-group action on pairs of block unipotent matrices.
//!
//! A pair `(X⁺, X⁻)` consists of a block upper unipotent and a block lower
//! unipotent matrix for a multiplicity vector `(n₁, …, n_ν)`. The generator
//! `σ_i`, `1 ≤ i ≤ ν − 1`, acts by `(K_i⁻ X⁺ K_i⁺, K_i⁻ X⁻ K_i⁺)` where
//! `K_i^±` differ from the identity only in the `2 × 2` block window at
//! positions `i, i + 1`:
//!
//! ```text
//! K_i⁻ = [ −X⁻_{i+1,i}  I ]      K_i⁺ = [ −X⁺_{i,i+1}  I ]
//!        [  I           0 ]             [  I           0 ]
//! ```
//!
//! Generator indices are 1-based, as in the word syntax `"s1 s2 s1^-1"`.

use crate::error::{Error, Result};
use crate::numkit::{block_diag, eig, inverse, mat_fun, norm2, CMatrix, C64};
use std::f64::consts::PI;
use std::fmt;

/// Largest deviation of a diagonal block from the identity accepted after a
/// generator is applied.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// A block upper unipotent `xp` and a block lower unipotent `xm`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnipotentPair {
    pub mult: Vec<usize>,
    pub xp: CMatrix,
    pub xm: CMatrix,
}

fn offsets(mult: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(mult.len() + 1);
    off.push(0);
    for m in mult {
        off.push(off.last().unwrap() + m);
    }
    off
}

impl UnipotentPair {
    /// Validates shapes, the unipotent diagonal blocks (within
    /// [`DIAGONAL_TOL`]) and the vanishing of the blocks on the wrong side of
    /// the diagonal.
    pub fn new(mult: Vec<usize>, xp: CMatrix, xm: CMatrix) -> Result<Self> {
        let n: usize = mult.iter().sum();
        if mult.is_empty() || mult.contains(&0) {
            return Err(Error::Invalid("multiplicities must be positive".into()));
        }
        if xp.shape() != (n, n) || xm.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!("pair must be {n}×{n}")));
        }
        let pair = Self { mult, xp, xm };
        let dev = pair.structure_residual();
        if dev > DIAGONAL_TOL {
            return Err(Error::InvariantViolation(format!("pair is not block unipotent (deviation {dev:.3e})")));
        }
        Ok(pair)
    }

    /// The pair `(I, I)`.
    pub fn identity(mult: Vec<usize>) -> Self {
        let n = mult.iter().sum();
        Self { mult, xp: CMatrix::identity(n, n), xm: CMatrix::identity(n, n) }
    }

    pub fn nu(&self) -> usize {
        self.mult.len()
    }

    pub fn dim(&self) -> usize {
        self.xp.nrows()
    }

    /// Block `(i, j)` (0-based) of `m` in this pair's block structure.
    pub fn block(&self, m: &CMatrix, i: usize, j: usize) -> CMatrix {
        let off = offsets(&self.mult);
        m.view((off[i], off[j]), (self.mult[i], self.mult[j])).into_owned()
    }

    /// Largest of `‖X^±_kk − I‖₂`, `‖X⁺_ij‖₂` for `i > j` and `‖X⁻_ij‖₂` for `i < j`.
    pub fn structure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nu() {
            for j in 0..self.nu() {
                let (p, m) = (self.block(&self.xp, i, j), self.block(&self.xm, i, j));
                worst = worst.max(match i.cmp(&j) {
                    std::cmp::Ordering::Equal => {
                        let id = CMatrix::identity(self.mult[i], self.mult[i]);
                        norm2(&(p - &id)).max(norm2(&(m - id)))
                    }
                    std::cmp::Ordering::Greater => norm2(&p),
                    std::cmp::Ordering::Less => norm2(&m),
                });
            }
        }
        worst
    }

    /// `max(‖X⁺ − Y⁺‖₂, ‖X⁻ − Y⁻‖₂)`; infinite when the block structures differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.mult != other.mult {
            return f64::INFINITY;
        }
        norm2(&(&self.xp - &other.xp)).max(norm2(&(&self.xm - &other.xm)))
    }
}

fn check_generator(i: usize, nu: usize) -> Result<()> {
    if i == 0 || i >= nu {
        return Err(Error::InvalidWord(format!("generator s{i} needs 1 ≤ i ≤ {}", nu.saturating_sub(1))));
    }
    Ok(())
}

/// The `n × n` identity with the square diagonal window starting at `off`
/// replaced by `window`.
fn embed(n: usize, off: usize, window: &CMatrix) -> CMatrix {
    let mut k = CMatrix::identity(n, n);
    k.view_mut((off, off), window.shape()).copy_from(window);
    k
}

/// The `2 × 2` block window `[[−X, I], [I, 0]]` for an `r × c` block `X`;
/// the result is `(r + c) × (c + r)`.
fn k_window(x: &CMatrix) -> CMatrix {
    let (r, c) = x.shape();
    let mut w = CMatrix::zeros(r + c, c + r);
    w.view_mut((0, 0), (r, c)).copy_from(&(-x));
    for a in 0..r {
        w[(a, c + a)] = C64::new(1.0, 0.0);
    }
    for a in 0..c {
        w[(r + a, a)] = C64::new(1.0, 0.0);
    }
    w
}

/// Inverse of [`k_window`]: `[[0, I], [I, X]]`, `(c + r) × (r + c)`.
fn k_window_inverse(x: &CMatrix) -> CMatrix {
    let (r, c) = x.shape();
    let mut w = CMatrix::zeros(c + r, r + c);
    for a in 0..c {
        w[(a, r + a)] = C64::new(1.0, 0.0);
    }
    for a in 0..r {
        w[(c + a, a)] = C64::new(1.0, 0.0);
    }
    w.view_mut((c, r), (r, c)).copy_from(x);
    w
}

/// The matrices `(K_i⁻, K_i⁺)` of a pair (generator index 1-based).
pub fn k_matrices(i: usize, pair: &UnipotentPair) -> Result<(CMatrix, CMatrix)> {
    check_generator(i, pair.nu())?;
    Ok((k_embed(pair, i, &pair.block(&pair.xm, i, i - 1)), k_embed(pair, i, &pair.block(&pair.xp, i - 1, i))))
}

fn k_embed(pair: &UnipotentPair, i: usize, x: &CMatrix) -> CMatrix {
    embed(pair.dim(), offsets(&pair.mult)[i - 1], &k_window(x))
}

fn swapped<T: Clone>(v: &[T], i: usize) -> Vec<T> {
    let mut m = v.to_vec();
    m.swap(i - 1, i);
    m
}

fn finish(mult: Vec<usize>, xp: CMatrix, xm: CMatrix) -> Result<UnipotentPair> {
    let out = UnipotentPair { mult, xp, xm };
    let dev = out.structure_residual();
    if dev > DIAGONAL_TOL * (1.0 + norm2(&out.xp).max(norm2(&out.xm))) {
        return Err(Error::InvariantViolation(format!("braid action left a non-unipotent pair (deviation {dev:.3e})")));
    }
    Ok(out)
}

/// `(e^{2πiΛ_i}, e^{2πiΛ_{i+1}})` for the two blocks a generator exchanges.
type Twist = (CMatrix, CMatrix);

/// Forward generator. With a twist, the `K_i⁻` applied to `X⁺` is built from
/// `e^{−2πiΛ_{i+1}} X⁻_{i+1,i} e^{2πiΛ_i}` instead of `X⁻_{i+1,i}`.
fn forward(i: usize, pair: &UnipotentPair, twist: Option<&Twist>) -> Result<UnipotentPair> {
    check_generator(i, pair.nu())?;
    let c = pair.block(&pair.xm, i, i - 1);
    let b = pair.block(&pair.xp, i - 1, i);
    let kp = k_embed(pair, i, &b);
    let km = k_embed(pair, i, &c);
    let km_plus = match twist {
        None => km.clone(),
        Some((ei, ej)) => k_embed(pair, i, &(inverse(ej)? * &c * ei)),
    };
    finish(swapped(&pair.mult, i), &km_plus * &pair.xp * &kp, &km * &pair.xm * &kp)
}

/// Inverse generator: the blocks that enter `K_i^±` are read off the image,
/// `X⁺_{i,i+1} = −Y⁻_{i+1,i}` and `X⁻_{i+1,i} = −Y⁺_{i,i+1}` (untwisted
/// through the exponentials when a twist is present), and the explicit block
/// inverses of `K_i^±` are applied.
fn backward(i: usize, pair: &UnipotentPair, twist: Option<&Twist>) -> Result<UnipotentPair> {
    check_generator(i, pair.nu())?;
    let mult = swapped(&pair.mult, i);
    let b = -pair.block(&pair.xm, i, i - 1);
    let c_plus = -pair.block(&pair.xp, i - 1, i);
    let c = match twist {
        None => c_plus.clone(),
        Some((ei, ej)) => ej * &c_plus * inverse(ei)?,
    };
    let n = pair.dim();
    let off = offsets(&mult)[i - 1];
    let kp_inv = embed(n, off, &k_window_inverse(&b));
    let km_inv = embed(n, off, &k_window_inverse(&c));
    let km_plus_inv = embed(n, off, &k_window_inverse(&c_plus));
    finish(mult, &km_plus_inv * &pair.xp * &kp_inv, &km_inv * &pair.xm * &kp_inv)
}

/// Applies the generator `σ_i` (1-based) by the untwisted formula
/// `(K_i⁻ X⁺ K_i⁺, K_i⁻ X⁻ K_i⁺)`.
pub fn sigma_action(i: usize, pair: &UnipotentPair) -> Result<UnipotentPair> {
    forward(i, pair, None)
}

/// Applies `σ_i⁻¹`: the `X` with `σ_i(X) = pair`.
pub fn sigma_inverse_action(i: usize, pair: &UnipotentPair) -> Result<UnipotentPair> {
    backward(i, pair, None)
}

/// A unipotent pair together with the diagonal blocks `Λ_k` of the formal
/// monodromy, one per block of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyPair {
    pub pair: UnipotentPair,
    pub blocks: Vec<CMatrix>,
}

impl MonodromyPair {
    pub fn new(pair: UnipotentPair, blocks: Vec<CMatrix>) -> Result<Self> {
        check_blocks(&pair, &blocks)?;
        Ok(Self { pair, blocks })
    }

    fn twist(&self, i: usize) -> Result<Twist> {
        let e = |b: &CMatrix| mat_fun(b, |l| Ok((l * C64::new(0.0, 2.0 * PI)).exp()));
        Ok((e(&self.blocks[i - 1])?, e(&self.blocks[i])?))
    }

    /// [`monodromy_invariant`] of this pair and its blocks.
    pub fn invariant(&self) -> Result<Vec<C64>> {
        monodromy_invariant(&self.pair, &self.blocks)
    }
}

/// Generator `σ_i` acting on a pair with formal monodromy: the `K_i⁻`
/// applied to `X⁺` uses `e^{−2πiΛ_{i+1}} X⁻_{i+1,i} e^{2πiΛ_i}`, and the
/// blocks `Λ_i, Λ_{i+1}` are exchanged. With all `Λ_k = 0` this is
/// [`sigma_action`].
pub fn sigma_action_formal(i: usize, data: &MonodromyPair) -> Result<MonodromyPair> {
    check_generator(i, data.pair.nu())?;
    let pair = forward(i, &data.pair, Some(&data.twist(i)?))?;
    Ok(MonodromyPair { pair, blocks: swapped(&data.blocks, i) })
}

/// Inverse of [`sigma_action_formal`].
pub fn sigma_inverse_action_formal(i: usize, data: &MonodromyPair) -> Result<MonodromyPair> {
    check_generator(i, data.pair.nu())?;
    let blocks = swapped(&data.blocks, i);
    let e = |b: &CMatrix| mat_fun(b, |l| Ok((l * C64::new(0.0, 2.0 * PI)).exp()));
    let twist = (e(&blocks[i - 1])?, e(&blocks[i])?);
    let pair = backward(i, &data.pair, Some(&twist))?;
    Ok(MonodromyPair { pair, blocks })
}

/// A word in the generators `σ_i^{±1}` of the braid group on `nu` strands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BraidWord {
    pub nu: usize,
    /// `(i, ±1)` with `1 ≤ i ≤ nu − 1`, applied left to right.
    pub letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn new(nu: usize, letters: Vec<(usize, i8)>) -> Result<Self> {
        for &(i, e) in &letters {
            check_generator(i, nu)?;
            if e != 1 && e != -1 {
                return Err(Error::InvalidWord(format!("exponent {e} of s{i} must be ±1")));
            }
        }
        Ok(Self { nu, letters })
    }

    /// Parses whitespace-separated tokens `s<i>` and `s<i>^-1`.
    pub fn parse(text: &str, nu: usize) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let body = tok.strip_prefix('s').ok_or_else(|| Error::InvalidWord(format!("token {tok:?} does not start with 's'")))?;
            let (idx, sign) = match body.split_once('^') {
                None => (body, 1),
                Some((idx, "-1")) => (idx, -1),
                Some((_, e)) => return Err(Error::InvalidWord(format!("exponent {e:?} in {tok:?}; only ^-1 is allowed"))),
            };
            let i: usize = idx.parse().map_err(|_| Error::InvalidWord(format!("index {idx:?} in {tok:?} is not a positive integer")))?;
            letters.push((i, sign));
        }
        Self::new(nu, letters)
    }

    /// The inverse word.
    pub fn inverse(&self) -> Self {
        Self { nu: self.nu, letters: self.letters.iter().rev().map(|&(i, e)| (i, -e)).collect() }
    }

    /// Concatenation `self · other` (`self` applied first).
    pub fn then(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { nu: self.nu.max(other.nu), letters }
    }

    /// Underlying permutation: entry `k` is the original position of the
    /// strand that ends at position `k`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.nu).collect();
        for &(i, _) in &self.letters {
            perm.swap(i - 1, i);
        }
        perm
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> =
            self.letters.iter().map(|&(i, e)| if e == 1 { format!("s{i}") } else { format!("s{i}^-1") }).collect();
        f.write_str(&toks.join(" "))
    }
}

/// Applies the letters of `word` from left to right.
pub fn apply_braid_word(word: &BraidWord, pair: &UnipotentPair) -> Result<UnipotentPair> {
    if word.nu != pair.nu() {
        return Err(Error::ShapeMismatch(format!("word on {} strands, pair with {} blocks", word.nu, pair.nu())));
    }
    let mut cur = pair.clone();
    for &(i, e) in &word.letters {
        cur = if e == 1 { sigma_action(i, &cur)? } else { sigma_inverse_action(i, &cur)? };
    }
    Ok(cur)
}

/// Applies the letters of `word` from left to right with
/// [`sigma_action_formal`] and its inverse.
pub fn apply_braid_word_formal(word: &BraidWord, data: &MonodromyPair) -> Result<MonodromyPair> {
    if word.nu != data.pair.nu() {
        return Err(Error::ShapeMismatch(format!("word on {} strands, pair with {} blocks", word.nu, data.pair.nu())));
    }
    let mut cur = data.clone();
    for &(i, e) in &word.letters {
        cur = if e == 1 { sigma_action_formal(i, &cur)? } else { sigma_inverse_action_formal(i, &cur)? };
    }
    Ok(cur)
}

/// Reorders diagonal blocks along the permutation of `word`.
pub fn permute_blocks(word: &BraidWord, blocks: &[CMatrix]) -> Vec<CMatrix> {
    word.permutation().into_iter().map(|k| blocks[k].clone()).collect()
}

fn check_blocks(pair: &UnipotentPair, blocks: &[CMatrix]) -> Result<()> {
    if blocks.len() != pair.nu() || blocks.iter().zip(&pair.mult).any(|(b, &m)| b.shape() != (m, m)) {
        return Err(Error::ShapeMismatch("diagonal blocks do not match the pair's multiplicities".into()));
    }
    Ok(())
}

fn sorted_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let mut v: Vec<C64> = eig(m)?.values.iter().copied().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

/// `e^{2πi·x·Λ}` for the block-diagonal `Λ` assembled from `blocks`.
fn exp_blocks(blocks: &[CMatrix], x: f64) -> Result<CMatrix> {
    let parts = blocks
        .iter()
        .map(|b| mat_fun(b, |l| Ok((l * C64::new(0.0, 2.0 * PI * x)).exp())))
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&parts))
}

/// Eigenvalues of `(X⁻)⁻¹ e^{2πiΛ} X⁺`, sorted by real then imaginary part,
/// where `Λ` is block diagonal with the given blocks.
pub fn monodromy_invariant(pair: &UnipotentPair, blocks: &[CMatrix]) -> Result<Vec<C64>> {
    check_blocks(pair, blocks)?;
    sorted_eigenvalues(&(inverse(&pair.xm)? * exp_blocks(blocks, 1.0)? * &pair.xp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, cr, from_rows};

    fn scalar_pair(b: C64, cc: C64) -> UnipotentPair {
        let xp = from_rows(&[vec![cr(1.0), b], vec![cr(0.0), cr(1.0)]]).unwrap();
        let xm = from_rows(&[vec![cr(1.0), cr(0.0)], vec![cc, cr(1.0)]]).unwrap();
        UnipotentPair::new(vec![1, 1], xp, xm).unwrap()
    }

    #[test]
    fn identity_pair_is_fixed() {
        let p = UnipotentPair::identity(vec![1, 2, 1]);
        for i in 1..3 {
            let q = sigma_action(i, &p).unwrap();
            assert_eq!(q.mult, swapped(&p.mult, i));
            assert!(q.distance(&UnipotentPair::identity(q.mult.clone())) < 1e-15);
        }
    }

    #[test]
    fn scalar_generator_matches_explicit_k_blocks() {
        let (b, cc) = (c(0.3, -0.2), c(-1.1, 0.4));
        let p = scalar_pair(b, cc);
        let (km, kp) = k_matrices(1, &p).unwrap();
        let want_km = from_rows(&[vec![-cc, cr(1.0)], vec![cr(1.0), cr(0.0)]]).unwrap();
        let want_kp = from_rows(&[vec![-b, cr(1.0)], vec![cr(1.0), cr(0.0)]]).unwrap();
        assert!(norm2(&(km - want_km)) < 1e-15);
        assert!(norm2(&(kp - want_kp)) < 1e-15);
        let q = sigma_action(1, &p).unwrap();
        assert!(q.distance(&scalar_pair(-cc, -b)) < 1e-14);
    }

    #[test]
    fn generator_and_inverse_cancel() {
        let xp = from_rows(&[
            vec![cr(1.0), c(0.2, 0.1), c(-0.3, 0.5), cr(0.7)],
            vec![cr(0.0), cr(1.0), cr(0.0), c(0.4, -0.6)],
            vec![cr(0.0), cr(0.0), cr(1.0), c(1.2, 0.3)],
            vec![cr(0.0), cr(0.0), cr(0.0), cr(1.0)],
        ])
        .unwrap();
        let xm = from_rows(&[
            vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0)],
            vec![c(0.5, 0.5), cr(1.0), cr(0.0), cr(0.0)],
            vec![c(-0.8, 0.1), cr(0.0), cr(1.0), cr(0.0)],
            vec![cr(0.3), c(0.0, 0.9), c(0.6, -0.2), cr(1.0)],
        ])
        .unwrap();
        let p = UnipotentPair::new(vec![1, 2, 1], xp, xm).unwrap();
        for i in 1..3 {
            let back = sigma_inverse_action(i, &sigma_action(i, &p).unwrap()).unwrap();
            assert!(back.distance(&p) < 1e-14);
            let fwd = sigma_action(i, &sigma_inverse_action(i, &p).unwrap()).unwrap();
            assert!(fwd.distance(&p) < 1e-14);
        }
    }

    #[test]
    fn formal_action_with_zero_blocks_is_the_plain_action() {
        let p = scalar_pair(c(0.3, -0.2), c(-1.1, 0.4));
        let data = MonodromyPair::new(p.clone(), vec![CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)]).unwrap();
        let q = sigma_action_formal(1, &data).unwrap();
        assert!(q.pair.distance(&sigma_action(1, &p).unwrap()) < 1e-15);
    }

    #[test]
    fn scalar_formal_action_preserves_the_trace() {
        let p = scalar_pair(c(0.3, -0.2), c(-1.1, 0.4));
        let blocks = vec![CMatrix::from_element(1, 1, c(0.2, 0.1)), CMatrix::from_element(1, 1, c(-0.35, 0.0))];
        let data = MonodromyPair::new(p, blocks).unwrap();
        let q = sigma_action_formal(1, &data).unwrap();
        let (a, b) = (data.invariant().unwrap(), q.invariant().unwrap());
        assert!(crate::numkit::match_values(&a, &b).1 < 1e-13);
        let back = sigma_inverse_action_formal(1, &q).unwrap();
        assert!(back.pair.distance(&data.pair) < 1e-14);
        assert_eq!(back.blocks, data.blocks);
    }

    #[test]
    fn invariant_of_identity_pair_with_zero_blocks_is_all_ones() {
        let p = UnipotentPair::identity(vec![2, 1]);
        let inv = monodromy_invariant(&p, &[CMatrix::zeros(2, 2), CMatrix::zeros(1, 1)]).unwrap();
        assert_eq!(inv.len(), 3);
        assert!(inv.iter().all(|v| (v - cr(1.0)).norm() < 1e-14));
    }

    #[test]
    fn word_parsing() {
        let w = BraidWord::parse("s1 s2  s1^-1", 3).unwrap();
        assert_eq!(w.letters, vec![(1, 1), (2, 1), (1, -1)]);
        assert_eq!(w.to_string(), "s1 s2 s1^-1");
        assert_eq!(w.inverse().to_string(), "s1 s2^-1 s1^-1");
        assert_eq!(BraidWord::parse("", 3).unwrap().letters, vec![]);
        for bad in ["t1", "s0", "s3", "s1^2", "s", "sx"] {
            assert!(matches!(BraidWord::parse(bad, 3), Err(Error::InvalidWord(_))), "{bad}");
        }
    }

    #[test]
    fn word_permutation_tracks_blocks() {
        let w = BraidWord::parse("s1 s2", 3).unwrap();
        assert_eq!(w.permutation(), vec![1, 2, 0]);
        let p = UnipotentPair::identity(vec![1, 2, 3]);
        assert_eq!(apply_braid_word(&w, &p).unwrap().mult, vec![2, 3, 1]);
    }

    #[test]
    fn rejects_non_unipotent_input() {
        let mut xp = CMatrix::identity(2, 2);
        xp[(1, 0)] = cr(0.5);
        assert!(matches!(UnipotentPair::new(vec![1, 1], xp, CMatrix::identity(2, 2)), Err(Error::InvariantViolation(_))));
    }
}
