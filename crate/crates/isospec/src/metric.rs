//! Left-invariant metrics `g_j = (Id + j^t)* g0`.
//!
//! After embedding, the two torus images `jhat1, jhat2` live in the leading
//! block `k` of the ambient algebra, and `j^t X = g0(X, jhat1) z1 +
//! g0(X, jhat2) z2` is the g0-adjoint of the map. Since the image of `j^t`
//! lies in `h` and its kernel contains `h`, the operator squares to zero,
//! `Id + j^t` is unimodular, and the metric it pulls back differs from `g0`
//! only on the `k + h` block.
//!
//! The frame produced here is exactly `g_j`-orthonormal: the complement `W`
//! of `k + h` and the torus directions are untouched, while each `k`
//! direction `X` is replaced by `X - j^t X`.

use crate::liealg::{self, AlgebraSpec, EmbeddingSpec};
use crate::linalg::{self, CMat, RMat};
use crate::{Error, Result};
use std::sync::Arc;

/// An embedded map: torus generators, embedded images, and the embedded
/// basis of the subalgebra `k` they came from. All matrices are ambient
/// sized, and `jhat_c`, `k_basis` are orthogonal to `h`.
#[derive(Debug, Clone)]
pub struct EmbeddedJMap {
    pub ambient: Arc<AlgebraSpec>,
    pub z1: CMat,
    pub z2: CMat,
    pub jhat1: CMat,
    pub jhat2: CMat,
    pub k_basis: Vec<CMat>,
}

/// Embed a map along the standard inclusion of its algebra.
pub fn embed_jmap(j: &crate::jmap::JMap, emb: &EmbeddingSpec) -> Result<EmbeddedJMap> {
    if j.algebra.family != emb.inner.family || j.algebra.n != emb.inner.n {
        return Err(Error::AlgebraMismatch(format!(
            "map over {}({}) does not fit embedding of {}({})",
            j.algebra.family, j.algebra.n, emb.inner.family, emb.inner.n
        )));
    }
    let torus = emb.torus_generators();
    let k_basis = emb
        .inner
        .basis
        .iter()
        .map(|b| emb.embed(b).expect("inner basis embeds"))
        .collect();
    Ok(EmbeddedJMap {
        ambient: Arc::clone(&emb.ambient),
        z1: torus.z1,
        z2: torus.z2,
        jhat1: emb.embed(&j.j1)?,
        jhat2: emb.embed(&j.j2)?,
        k_basis,
    })
}

/// The g0-adjoint `j^t` as an operator on the ambient algebra, stored in
/// basis coordinates. Nilpotent of order two.
#[derive(Debug, Clone)]
pub struct JTranspose {
    pub ambient: Arc<AlgebraSpec>,
    pub matrix: RMat,
}

impl JTranspose {
    pub fn apply(&self, x: &CMat) -> CMat {
        let c = liealg::coords(&self.ambient, x);
        liealg::from_coords(&self.ambient, &(&self.matrix * c))
    }
}

pub fn j_transpose(ej: &EmbeddedJMap) -> JTranspose {
    let alg = &ej.ambient;
    let mut z_coords = RMat::zeros(alg.dim, 2);
    z_coords.set_column(0, &liealg::coords(alg, &ej.z1));
    z_coords.set_column(1, &liealg::coords(alg, &ej.z2));
    let mut image_rows = RMat::zeros(2, alg.dim);
    for (i, b) in alg.basis.iter().enumerate() {
        image_rows[(0, i)] = liealg::g0(b, &ej.jhat1);
        image_rows[(1, i)] = liealg::g0(b, &ej.jhat2);
    }
    JTranspose {
        ambient: Arc::clone(alg),
        matrix: z_coords * image_rows,
    }
}

/// Gram matrix of `g_j` over the ambient basis together with an exactly
/// `g_j`-orthonormal frame, both in basis coordinates.
#[derive(Debug, Clone)]
pub struct LeftInvariantMetric {
    pub ambient: Arc<AlgebraSpec>,
    pub gram: RMat,
    pub frame: RMat,
}

impl LeftInvariantMetric {
    /// `g_j(X, Y)` on coordinate vectors.
    pub fn inner(&self, x: &nalgebra::DVector<f64>, y: &nalgebra::DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    /// `|det(gram) - 1|`; the deformation is unimodular.
    pub fn det_residual(&self) -> f64 {
        (self.gram.determinant() - 1.0).abs()
    }

    /// Largest deviation of `frame^T gram frame` from the identity.
    pub fn frame_residual(&self) -> f64 {
        let m = self.frame.transpose() * &self.gram * &self.frame;
        let mut r: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                r = r.max((m[(i, j)] - target).abs());
            }
        }
        r
    }
}

pub fn metric_from_embedded(ej: &EmbeddedJMap) -> LeftInvariantMetric {
    let alg = &ej.ambient;
    let dim = alg.dim;
    let jt = j_transpose(ej).matrix;

    let ident = RMat::identity(dim, dim);
    let a = &ident + &jt;
    let gram = a.transpose() * &a;

    let k_count = ej.k_basis.len();
    let mut kz = RMat::zeros(dim, k_count + 2);
    for (c, b) in ej.k_basis.iter().enumerate() {
        kz.set_column(c, &liealg::coords(alg, b));
    }
    kz.set_column(k_count, &liealg::coords(alg, &ej.z1));
    kz.set_column(k_count + 1, &liealg::coords(alg, &ej.z2));

    let w = linalg::orthonormal_complement(&kz);
    let corrected_k = (&ident - &jt) * kz.columns(0, k_count);

    let mut frame = RMat::zeros(dim, dim);
    frame.columns_mut(0, w.ncols()).copy_from(&w);
    frame
        .columns_mut(w.ncols(), k_count)
        .copy_from(&corrected_k);
    frame
        .columns_mut(w.ncols() + k_count, 2)
        .copy_from(&kz.columns(k_count, 2));
    LeftInvariantMetric {
        ambient: Arc::clone(alg),
        gram,
        frame,
    }
}

/// The undeformed metric on a bare algebra: gram and frame are the
/// identity, so the frame is the basis itself.
pub fn bi_invariant_metric(alg: &Arc<AlgebraSpec>) -> LeftInvariantMetric {
    LeftInvariantMetric {
        ambient: Arc::clone(alg),
        gram: RMat::identity(alg.dim, alg.dim),
        frame: RMat::identity(alg.dim, alg.dim),
    }
}

/// Metric of an inner map along its standard embedding.
pub fn build_metric(
    j: &crate::jmap::JMap,
    emb: &EmbeddingSpec,
) -> Result<(EmbeddedJMap, LeftInvariantMetric)> {
    let ej = embed_jmap(j, emb)?;
    let metric = metric_from_embedded(&ej);
    Ok((ej, metric))
}
