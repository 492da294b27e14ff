//! Laplace spectra on finite-dimensional representation blocks.
//!
//! For a `g_j`-orthonormal frame `{E_i}` and a block `pi`, the operator
//! `Omega = -sum dpi(E_i)^2` is the restriction of the Laplace operator of
//! the left-invariant metric to the block. It depends only on the metric,
//! not on the frame choice, and is Hermitian positive semidefinite.
//!
//! Spectra are kept as merged multisets: eigenvalues within
//! `1e-9 * |Omega|` of each other collapse into one level carrying the
//! cluster mean and its multiplicity.

use crate::liealg::AlgebraSpec;
use crate::linalg::{self, CMat, C};
use crate::metric::LeftInvariantMetric;
use crate::{Error, Result};
use serde::Serialize;

/// Largest block dimension the eigensolver path accepts.
pub const REP_DIM_BUDGET: usize = 2000;

/// Relative spacing below which adjacent eigenvalues merge into one level.
pub const MERGE_REL_TOL: f64 = 1e-9;

/// A representation block: images of the ambient basis under `dpi`.
#[derive(Debug, Clone)]
pub struct RepresentationBlock {
    pub label: String,
    pub dim: usize,
    pub images: Vec<CMat>,
}

/// The block on which the group acts by its defining matrices.
pub fn defining_rep(alg: &AlgebraSpec) -> RepresentationBlock {
    RepresentationBlock {
        label: "defining".into(),
        dim: alg.matrix_side,
        images: alg.basis.clone(),
    }
}

/// Tensor square of the defining block: `dpi(X) = X (x) I + I (x) X`.
pub fn tensor_square_rep(alg: &AlgebraSpec) -> Result<RepresentationBlock> {
    let n = alg.matrix_side;
    let dim = n * n;
    if dim > REP_DIM_BUDGET {
        return Err(Error::BudgetExceeded {
            got: dim,
            budget: REP_DIM_BUDGET,
        });
    }
    let eye = CMat::identity(n, n);
    let images = alg
        .basis
        .iter()
        .map(|b| b.kronecker(&eye) + eye.kronecker(b))
        .collect();
    Ok(RepresentationBlock {
        label: "square".into(),
        dim,
        images,
    })
}

/// Eigenvalue multiset of one block, already merged.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumMultiset {
    pub rep_label: String,
    /// `(eigenvalue, multiplicity)` levels, ascending.
    pub entries: Vec<(f64, usize)>,
    pub merge_tol: f64,
    /// Largest absolute eigenvalue before merging.
    pub op_norm: f64,
}

impl SpectrumMultiset {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    fn expanded(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.total_multiplicity());
        for &(v, m) in &self.entries {
            flat.extend(std::iter::repeat(v).take(m));
        }
        flat
    }
}

fn cluster(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] - sorted[end - 1] <= tol {
            end += 1;
        }
        let mean = sorted[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, end - start));
        start = end;
    }
    out
}

/// Assemble `Omega` for one block and return its merged spectrum.
pub fn laplace_block_spectrum(
    metric: &LeftInvariantMetric,
    rep: &RepresentationBlock,
) -> Result<SpectrumMultiset> {
    if rep.dim > REP_DIM_BUDGET {
        return Err(Error::BudgetExceeded {
            got: rep.dim,
            budget: REP_DIM_BUDGET,
        });
    }
    if rep.images.len() != metric.ambient.dim {
        return Err(Error::AlgebraMismatch(format!(
            "block carries {} images for an algebra of dimension {}",
            rep.images.len(),
            metric.ambient.dim
        )));
    }

    let mut omega = linalg::czeros(rep.dim, rep.dim);
    for col in 0..metric.ambient.dim {
        let mut e = linalg::czeros(rep.dim, rep.dim);
        for (i, img) in rep.images.iter().enumerate() {
            let w = metric.frame[(i, col)];
            if w != 0.0 {
                e.zip_apply(img, |entry, m| *entry += C::new(w, 0.0) * m);
            }
        }
        omega -= &e * &e;
    }

    let herm = linalg::hermitian_residual(&omega);
    if herm > 1e-10 * (1.0 + linalg::frobenius(&omega)) {
        return Err(Error::Numerical(format!(
            "Laplace block is not Hermitian: residual {herm:.3e}"
        )));
    }

    let eigs = linalg::hermitian_eigenvalues(&omega);
    let op_norm = eigs.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let merge_tol = MERGE_REL_TOL * op_norm;
    Ok(SpectrumMultiset {
        rep_label: rep.label.clone(),
        entries: cluster(&eigs, merge_tol),
        merge_tol,
        op_norm,
    })
}

/// Largest matched-level eigenvalue discrepancy after re-merging both
/// spectra at `tol`. Returns infinity when level multiplicities disagree,
/// and an error when even the total dimensions differ.
pub fn compare_spectra(a: &SpectrumMultiset, b: &SpectrumMultiset, tol: f64) -> Result<f64> {
    if a.total_multiplicity() != b.total_multiplicity() {
        return Err(Error::MultiplicityMismatch(
            a.total_multiplicity(),
            b.total_multiplicity(),
        ));
    }
    let la = cluster(&a.expanded(), tol);
    let lb = cluster(&b.expanded(), tol);
    if la.len() != lb.len() {
        return Ok(f64::INFINITY);
    }
    let mut disc: f64 = 0.0;
    for (&(va, ma), &(vb, mb)) in la.iter().zip(&lb) {
        if ma != mb {
            return Ok(f64::INFINITY);
        }
        disc = disc.max((va - vb).abs());
    }
    Ok(disc)
}

/// `sum_k mult_k exp(-t lambda_k)`, the block's heat-trace surrogate.
pub fn heat_trace(spec: &SpectrumMultiset, t: f64) -> f64 {
    spec.entries
        .iter()
        .map(|&(v, m)| m as f64 * (-t * v).exp())
        .sum()
}
