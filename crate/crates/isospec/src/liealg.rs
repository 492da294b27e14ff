//! Compact classical matrix algebras and their standard embeddings.
//!
//! Three families are supported, each realised concretely as complex
//! matrices:
//!
//! - `so(n)`: real antisymmetric `n x n`,
//! - `su(n)`: traceless skew-Hermitian `n x n`,
//! - `sp(n)`: quaternionic skew-Hermitian, stored as complex `2n x 2n` with
//!   the quaternionic coordinates interleaved in 2x2 cells.
//!
//! The inner product throughout is `g0(X, Y) = -Re tr(XY)`, and every basis
//! produced here is g0-orthonormal with a fixed deterministic ordering.
//! Embeddings place `g_n` as the leading block of `g_{n+p}` (p = 4, 3, 2 by
//! family) and expose the rank-two torus subalgebra `h` that commutes with
//! the embedded block.

use crate::linalg::{self, CMat, RMat, RVec, C};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Relative singular-value cutoff for rank decisions on exact-algebra data
/// such as centralizer computations.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "so")]
    Orthogonal,
    #[serde(rename = "su")]
    Unitary,
    #[serde(rename = "sp")]
    Symplectic,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Orthogonal => "so",
            Family::Unitary => "su",
            Family::Symplectic => "sp",
        }
    }

    /// Padding of the ambient group: `g_n` embeds in `g_{n+p}`.
    pub fn padding(self) -> usize {
        match self {
            Family::Orthogonal => 4,
            Family::Unitary => 3,
            Family::Symplectic => 2,
        }
    }

    pub fn algebra_dim(self, n: usize) -> usize {
        match self {
            Family::Orthogonal => n * (n - 1) / 2,
            Family::Unitary => n * n - 1,
            Family::Symplectic => n * (2 * n + 1),
        }
    }

    /// Side length of the complex matrices realising rank-`n` elements.
    pub fn matrix_side(self, n: usize) -> usize {
        match self {
            Family::Orthogonal | Family::Unitary => n,
            Family::Symplectic => 2 * n,
        }
    }

    fn min_rank(self) -> usize {
        match self {
            Family::Orthogonal | Family::Unitary => 2,
            Family::Symplectic => 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "so" => Ok(Family::Orthogonal),
            "su" => Ok(Family::Unitary),
            "sp" => Ok(Family::Symplectic),
            other => Err(Error::Invalid(format!(
                "unknown family {other:?}, expected so, su, or sp"
            ))),
        }
    }
}

/// A concrete algebra: family, rank, and a g0-orthonormal basis in a fixed
/// order. `dim` is the basis length, `matrix_side` the complex matrix size.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    pub family: Family,
    pub n: usize,
    pub dim: usize,
    pub matrix_side: usize,
    pub basis: Vec<CMat>,
}

/// Residual summary from [`AlgebraSpec::validate`]. All entries are maxima
/// over the exercised tuples.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraValidation {
    pub orthonormality: f64,
    pub skewness: f64,
    pub structure: f64,
    pub closure: f64,
    pub jacobi: f64,
}

impl AlgebraValidation {
    pub fn max_residual(&self) -> f64 {
        self.orthonormality
            .max(self.skewness)
            .max(self.structure)
            .max(self.closure)
            .max(self.jacobi)
    }
}

pub fn build_algebra(family: Family, n: usize) -> Result<Arc<AlgebraSpec>> {
    if n < family.min_rank() {
        return Err(Error::Invalid(format!(
            "{} requires rank at least {}, got {}",
            family.label(),
            family.min_rank(),
            n
        )));
    }
    let basis = match family {
        Family::Orthogonal => so_basis(n),
        Family::Unitary => su_basis(n),
        Family::Symplectic => sp_basis(n),
    };
    Ok(Arc::new(AlgebraSpec {
        family,
        n,
        dim: basis.len(),
        matrix_side: family.matrix_side(n),
        basis,
    }))
}

fn so_basis(n: usize) -> Vec<CMat> {
    let s = C::new(1.0 / 2.0f64.sqrt(), 0.0);
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = linalg::czeros(n, n);
            m[(a, b)] = s;
            m[(b, a)] = -s;
            basis.push(m);
        }
    }
    basis
}

fn su_basis(n: usize) -> Vec<CMat> {
    let s = 1.0 / 2.0f64.sqrt();
    let mut basis = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut re = linalg::czeros(n, n);
            re[(a, b)] = C::new(s, 0.0);
            re[(b, a)] = C::new(-s, 0.0);
            basis.push(re);
            let mut im = linalg::czeros(n, n);
            im[(a, b)] = C::new(0.0, s);
            im[(b, a)] = C::new(0.0, s);
            basis.push(im);
        }
    }
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = linalg::czeros(n, n);
        for t in 0..k {
            m[(t, t)] = C::new(0.0, scale);
        }
        m[(k, k)] = C::new(0.0, -(k as f64) * scale);
        basis.push(m);
    }
    basis
}

/// Quaternion units as 2x2 complex cells. Row index first.
fn qunit(u: usize) -> [[C; 2]; 2] {
    let o = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match u {
        0 => [[one, o], [o, one]],
        1 => [[i, o], [o, -i]],
        2 => [[o, one], [-one, o]],
        3 => [[o, i], [i, o]],
        _ => unreachable!(),
    }
}

fn sp_cell(n: usize, k: usize, l: usize, q: [[C; 2]; 2], scale: f64) -> CMat {
    let mut m = linalg::czeros(2 * n, 2 * n);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * k + r, 2 * l + c)] = q[r][c] * scale;
        }
    }
    m
}

fn sp_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(n * (2 * n + 1));
    let diag_scale = 1.0 / 2.0f64.sqrt();
    for k in 0..n {
        for u in 1..4 {
            basis.push(sp_cell(n, k, k, qunit(u), diag_scale));
        }
        for l in (k + 1)..n {
            for u in 0..4 {
                let q = qunit(u);
                let mut m = sp_cell(n, k, l, q, 0.5);
                for r in 0..2 {
                    for c in 0..2 {
                        m[(2 * l + r, 2 * k + c)] = -q[c][r].conj() * 0.5;
                    }
                }
                basis.push(m);
            }
        }
    }
    basis
}

/// The bi-invariant inner product `-Re tr(XY)`.
pub fn g0(x: &CMat, y: &CMat) -> f64 {
    let mut acc = C::new(0.0, 0.0);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    -acc.re
}

pub fn bracket(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

/// Coordinates of `x` over the basis. Exact up to rounding when `x` lies in
/// the algebra; see [`member_residual`] for the reconstruction error.
pub fn coords(alg: &AlgebraSpec, x: &CMat) -> RVec {
    RVec::from_iterator(alg.dim, alg.basis.iter().map(|b| g0(b, x)))
}

pub fn from_coords(alg: &AlgebraSpec, c: &RVec) -> CMat {
    assert_eq!(c.len(), alg.dim, "coordinate length mismatch");
    let mut m = linalg::czeros(alg.matrix_side, alg.matrix_side);
    for (i, b) in alg.basis.iter().enumerate() {
        let ci = C::new(c[i], 0.0);
        m.zip_apply(b, |entry, bij| *entry += ci * bij);
    }
    m
}

/// Frobenius distance from `x` to its basis reconstruction; zero exactly on
/// algebra elements.
pub fn member_residual(alg: &AlgebraSpec, x: &CMat) -> f64 {
    let back = from_coords(alg, &coords(alg, x));
    linalg::frobenius(&(x - back))
}

pub fn exp_matrix(x: &CMat) -> CMat {
    x.exp()
}

impl AlgebraSpec {
    /// Exhaustive structural checks: orthonormality, skewness, the family
    /// constraint (realness, tracelessness, or the quaternionic identity),
    /// bracket closure over all pairs, and the Jacobi identity on a fixed
    /// deterministic sample of triples.
    pub fn validate(&self) -> AlgebraValidation {
        let mut orth: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                orth = orth.max((g0(a, b) - target).abs());
            }
        }

        let mut skew: f64 = 0.0;
        for b in &self.basis {
            skew = skew.max(linalg::hermitian_residual(&(b * C::new(0.0, 1.0))));
        }

        let mut structure: f64 = 0.0;
        match self.family {
            Family::Orthogonal => {
                for b in &self.basis {
                    let imag = b.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                    structure = structure.max(imag);
                }
            }
            Family::Unitary => {
                for b in &self.basis {
                    structure = structure.max(b.trace().norm());
                }
            }
            Family::Symplectic => {
                let j = sp_structure_matrix(self.n);
                for b in &self.basis {
                    let twisted = &j * b.map(|z| z.conj()) * (-&j);
                    structure = structure.max(linalg::frobenius(&(twisted - b)));
                }
            }
        }

        let mut closure: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for b in self.basis.iter().skip(i + 1) {
                closure = closure.max(member_residual(self, &bracket(a, b)));
            }
        }

        let mut jacobi: f64 = 0.0;
        let d = self.dim;
        for t in 0..50 {
            let (i, j, k) = ((7 * t + 1) % d, (11 * t + 3) % d, (13 * t + 5) % d);
            let (a, b, c) = (&self.basis[i], &self.basis[j], &self.basis[k]);
            let cyclic = bracket(a, &bracket(b, c))
                + bracket(b, &bracket(c, a))
                + bracket(c, &bracket(a, b));
            jacobi = jacobi.max(linalg::frobenius(&cyclic));
        }

        AlgebraValidation {
            orthonormality: orth,
            skewness: skew,
            structure,
            closure,
            jacobi,
        }
    }
}

/// Diagonal torus generator of `sp(m)` supported on quaternionic slot
/// `slot`: the cell `i/sqrt(2)` at position `(slot, slot)`.
pub fn sp_diagonal_torus_generator(m: usize, slot: usize) -> CMat {
    assert!(slot < m, "slot {slot} outside sp({m})");
    sp_cell(m, slot, slot, qunit(1), 1.0 / 2.0f64.sqrt())
}

/// Block-diagonal symplectic structure `diag([[0,-1],[1,0]], ...)` matching
/// the interleaved cell layout: `sp(n)` elements satisfy `J conj(X) J^{-1} = X`.
pub fn sp_structure_matrix(n: usize) -> CMat {
    let mut j = linalg::czeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = C::new(-1.0, 0.0);
        j[(2 * k + 1, 2 * k)] = C::new(1.0, 0.0);
    }
    j
}

/// Dimension of the joint centralizer of `elems` inside the algebra: the
/// nullity of the stacked adjoint action, with ranks cut at
/// `rel_tol * sigma_max`.
pub fn centralizer_dim(alg: &AlgebraSpec, elems: &[CMat], rel_tol: f64) -> usize {
    if elems.is_empty() {
        return alg.dim;
    }
    let mut stacked = RMat::zeros(elems.len() * alg.dim, alg.dim);
    for (col, b) in alg.basis.iter().enumerate() {
        for (e, elem) in elems.iter().enumerate() {
            let c = coords(alg, &bracket(elem, b));
            for r in 0..alg.dim {
                stacked[(e * alg.dim + r, col)] = c[r];
            }
        }
    }
    alg.dim - linalg::rank(&stacked, rel_tol)
}

/// Generator of the central `u(1)` of `u(n)` embedded in `su(n+3)`:
/// `i diag(1/n, ..., 1/n, -1/3, -1/3, -1/3)`.
pub fn su_central_u(n: usize) -> CMat {
    let side = n + 3;
    let mut m = linalg::czeros(side, side);
    for t in 0..n {
        m[(t, t)] = C::new(0.0, 1.0 / n as f64);
    }
    for t in n..side {
        m[(t, t)] = C::new(0.0, -1.0 / 3.0);
    }
    m
}

/// Orthonormal generators of the torus subalgebra `h` commuting with the
/// embedded inner block.
#[derive(Debug, Clone)]
pub struct TorusSubalgebra {
    pub z1: CMat,
    pub z2: CMat,
}

/// The inclusion `g_n -> g_{n+p}` as leading blocks, with the torus
/// complement living in the padding.
#[derive(Debug, Clone)]
pub struct EmbeddingSpec {
    pub inner: Arc<AlgebraSpec>,
    pub ambient: Arc<AlgebraSpec>,
}

pub fn embedding(family: Family, n: usize) -> Result<EmbeddingSpec> {
    let inner = build_algebra(family, n)?;
    let ambient = build_algebra(family, n + family.padding())?;
    Ok(EmbeddingSpec { inner, ambient })
}

impl EmbeddingSpec {
    /// Copy an inner element into the leading block of the ambient algebra.
    pub fn embed(&self, x: &CMat) -> Result<CMat> {
        let side = self.inner.matrix_side;
        if x.nrows() != side || x.ncols() != side {
            return Err(Error::AlgebraMismatch(format!(
                "expected {side}x{side} inner element, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut m = linalg::czeros(self.ambient.matrix_side, self.ambient.matrix_side);
        m.view_mut((0, 0), (side, side)).copy_from(x);
        Ok(m)
    }

    /// The fixed g0-orthonormal pair spanning `h`. For `su` the diagonal
    /// directions are not canonical; this normalisation is one valid choice
    /// and every consumer goes through it.
    pub fn torus_generators(&self) -> TorusSubalgebra {
        let n = self.inner.n;
        let side = self.ambient.matrix_side;
        match self.inner.family {
            Family::Orthogonal => {
                let s = C::new(1.0 / 2.0f64.sqrt(), 0.0);
                let mut z1 = linalg::czeros(side, side);
                z1[(n, n + 1)] = s;
                z1[(n + 1, n)] = -s;
                let mut z2 = linalg::czeros(side, side);
                z2[(n + 2, n + 3)] = s;
                z2[(n + 3, n + 2)] = -s;
                TorusSubalgebra { z1, z2 }
            }
            Family::Unitary => {
                let mut z1 = linalg::czeros(side, side);
                let s1 = 1.0 / 2.0f64.sqrt();
                z1[(n, n)] = C::new(0.0, s1);
                z1[(n + 1, n + 1)] = C::new(0.0, -s1);
                let mut z2 = linalg::czeros(side, side);
                let s2 = 1.0 / 6.0f64.sqrt();
                z2[(n, n)] = C::new(0.0, s2);
                z2[(n + 1, n + 1)] = C::new(0.0, s2);
                z2[(n + 2, n + 2)] = C::new(0.0, -2.0 * s2);
                TorusSubalgebra { z1, z2 }
            }
            Family::Symplectic => {
                let scale = 1.0 / 2.0f64.sqrt();
                let amb_n = self.ambient.n;
                let z1 = sp_cell(amb_n, n, n, qunit(1), scale);
                let z2 = sp_cell(amb_n, n + 1, n + 1, qunit(1), scale);
                TorusSubalgebra { z1, z2 }
            }
        }
    }

    /// Max residual over: torus orthonormality, `[z1, z2] = 0`, and
    /// commutation of both generators with every embedded basis element.
    pub fn torus_residual(&self) -> f64 {
        let t = self.torus_generators();
        let mut r: f64 = (g0(&t.z1, &t.z1) - 1.0).abs();
        r = r.max((g0(&t.z2, &t.z2) - 1.0).abs());
        r = r.max(g0(&t.z1, &t.z2).abs());
        r = r.max(linalg::frobenius(&bracket(&t.z1, &t.z2)));
        for b in &self.inner.basis {
            let e = self.embed(b).expect("inner basis embeds");
            r = r.max(linalg::frobenius(&bracket(&t.z1, &e)));
            r = r.max(linalg::frobenius(&bracket(&t.z2, &e)));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(alg: &AlgebraSpec, rng: &mut ChaCha8Rng) -> CMat {
        let c = RVec::from_iterator(alg.dim, (0..alg.dim).map(|_| rng.gen::<f64>() - 0.5));
        from_coords(alg, &c)
    }

    #[test]
    fn dimensions_by_family() {
        assert_eq!(build_algebra(Family::Orthogonal, 5).unwrap().dim, 10);
        assert_eq!(build_algebra(Family::Unitary, 4).unwrap().dim, 15);
        assert_eq!(build_algebra(Family::Symplectic, 3).unwrap().dim, 21);
        assert_eq!(build_algebra(Family::Symplectic, 3).unwrap().matrix_side, 6);
    }

    #[test]
    fn rank_below_minimum_is_rejected() {
        assert!(build_algebra(Family::Orthogonal, 1).is_err());
        assert!(build_algebra(Family::Unitary, 1).is_err());
        assert!(build_algebra(Family::Symplectic, 0).is_err());
    }

    #[test]
    fn bases_validate_to_machine_precision() {
        for (family, n) in [
            (Family::Orthogonal, 5),
            (Family::Unitary, 4),
            (Family::Symplectic, 2),
        ] {
            let alg = build_algebra(family, n).unwrap();
            let v = alg.validate();
            assert!(
                v.max_residual() < 1e-12,
                "{} rank {}: {:?}",
                family,
                n,
                v
            );
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for family in [Family::Orthogonal, Family::Unitary, Family::Symplectic] {
            let alg = build_algebra(family, 3).unwrap();
            let x = random_element(&alg, &mut rng);
            assert!(member_residual(&alg, &x) < 1e-13);
            let c = coords(&alg, &x);
            assert_relative_eq!(
                linalg::frobenius(&(from_coords(&alg, &c) - &x)),
                0.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn g0_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for family in [Family::Orthogonal, Family::Unitary, Family::Symplectic] {
            let alg = build_algebra(family, 3).unwrap();
            for _ in 0..10 {
                let (x, y, z) = (
                    random_element(&alg, &mut rng),
                    random_element(&alg, &mut rng),
                    random_element(&alg, &mut rng),
                );
                let lhs = g0(&bracket(&z, &x), &y);
                let rhs = -g0(&x, &bracket(&z, &y));
                assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generic_centralizers_have_torus_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cases = [
            (Family::Orthogonal, 5, 2),
            (Family::Unitary, 4, 3),
            (Family::Symplectic, 2, 2),
        ];
        for (family, n, expected) in cases {
            let alg = build_algebra(family, n).unwrap();
            let x = random_element(&alg, &mut rng);
            assert_eq!(
                centralizer_dim(&alg, &[x], RANK_TOL),
                expected,
                "{family} rank {n}"
            );
        }
    }

    #[test]
    fn torus_centralizer_matches_block_plus_torus() {
        // centralizer of h in so(n+4) is so(n) + h
        let emb = embedding(Family::Orthogonal, 4).unwrap();
        let t = emb.torus_generators();
        let dim = centralizer_dim(&emb.ambient, &[t.z1, t.z2], RANK_TOL);
        assert_eq!(dim, 4 * 3 / 2 + 2);
    }

    #[test]
    fn embeddings_preserve_brackets_and_g0() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for family in [Family::Orthogonal, Family::Unitary, Family::Symplectic] {
            let emb = embedding(family, 2).unwrap();
            for _ in 0..10 {
                let x = random_element(&emb.inner, &mut rng);
                let y = random_element(&emb.inner, &mut rng);
                let ex = emb.embed(&x).unwrap();
                let ey = emb.embed(&y).unwrap();
                assert_relative_eq!(g0(&ex, &ey), g0(&x, &y), epsilon = 1e-13);
                let eb = emb.embed(&bracket(&x, &y)).unwrap();
                assert_relative_eq!(
                    linalg::frobenius(&(bracket(&ex, &ey) - eb)),
                    0.0,
                    epsilon = 1e-13
                );
                assert!(member_residual(&emb.ambient, &ex) < 1e-13);
            }
        }
    }

    #[test]
    fn torus_generators_commute_with_inner_block() {
        for family in [Family::Orthogonal, Family::Unitary, Family::Symplectic] {
            let emb = embedding(family, 3).unwrap();
            assert!(emb.torus_residual() < 1e-13, "{family}");
            let t = emb.torus_generators();
            assert!(member_residual(&emb.ambient, &t.z1) < 1e-13);
            assert!(member_residual(&emb.ambient, &t.z2) < 1e-13);
        }
    }

    #[test]
    fn central_u1_commutes_with_embedded_block() {
        let n = 4;
        let emb = embedding(Family::Unitary, n).unwrap();
        let u = su_central_u(n);
        assert!(u.trace().norm() < 1e-15);
        assert!(member_residual(&emb.ambient, &u) < 1e-13);
        for b in &emb.inner.basis {
            let e = emb.embed(b).unwrap();
            assert!(linalg::frobenius(&bracket(&u, &e)) < 1e-14);
        }
    }

    #[test]
    fn exponential_of_rotation_generator() {
        let alg = build_algebra(Family::Orthogonal, 2).unwrap();
        let theta = 0.3f64;
        let x = &alg.basis[0] * C::new(theta * 2.0f64.sqrt(), 0.0);
        let g = exp_matrix(&x);
        assert_relative_eq!(g[(0, 0)].re, theta.cos(), epsilon = 1e-14);
        assert_relative_eq!(g[(0, 1)].re, theta.sin(), epsilon = 1e-14);
        let unitary = linalg::frobenius(&(&g * g.adjoint() - CMat::identity(2, 2)));
        assert!(unitary < 1e-14);
    }

    #[test]
    fn sp_structure_matrix_squares_to_minus_identity() {
        let j = sp_structure_matrix(3);
        let sq = &j * &j;
        let target = CMat::identity(6, 6) * C::new(-1.0, 0.0);
        assert!(linalg::frobenius(&(sq - target)) < 1e-15);
    }
}
