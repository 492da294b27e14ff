//! Dense linear-algebra helpers shared by every module.
//!
//! Thin wrappers over nalgebra with the conventions fixed once: singular
//! values are reported in descending order, kernel bases ascend from the
//! smallest singular value, and rank decisions are always relative to the
//! largest singular value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C = Complex<f64>;
pub type CMat = DMatrix<C>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub fn czeros(nrows: usize, ncols: usize) -> CMat {
    CMat::zeros(nrows, ncols)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deviation of `m` from its own conjugate transpose, in Frobenius norm.
pub fn hermitian_residual(m: &CMat) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// Eigenvalues of a Hermitian matrix, ascending. The caller is responsible
/// for checking `hermitian_residual` first; only one triangle is read.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut eigs: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Singular values, descending.
pub fn singular_values(m: &RMat) -> Vec<f64> {
    let mut svals: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svals
}

pub fn rank_from_singular_values(svals: &[f64], rel_tol: f64) -> usize {
    let smax = svals.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    svals.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn rank(m: &RMat, rel_tol: f64) -> usize {
    rank_from_singular_values(&singular_values(m), rel_tol)
}

/// Singular values (descending) together with an orthonormal basis of the
/// kernel, columns ordered from the smallest singular value upward.
///
/// Works through the spectral decomposition of `mᵀm`, so the kernel is
/// available even when `m` is wide and a thin SVD would truncate it.
pub fn kernel_and_singular_values(m: &RMat, rel_tol: f64) -> (Vec<f64>, RMat) {
    let gram = m.transpose() * m;
    let se = gram.symmetric_eigen();
    let dim = se.eigenvalues.len();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let sval = |i: usize| se.eigenvalues[order[i]].max(0.0).sqrt();
    let smax = sval(dim.saturating_sub(1));
    let cutoff = rel_tol * smax;

    let null_count = (0..dim).take_while(|&i| sval(i) <= cutoff).count();
    let mut kernel = RMat::zeros(dim, null_count);
    for (col, &src) in order.iter().take(null_count).enumerate() {
        kernel.set_column(col, &se.eigenvectors.column(src));
    }

    let mut svals: Vec<f64> = (0..dim).map(sval).collect();
    svals.reverse();
    (svals, kernel)
}

/// Orthonormal basis of the column space, via the spectral decomposition of
/// `m mᵀ`. Columns are ordered by descending singular value.
pub fn column_space_basis(m: &RMat, rel_tol: f64) -> RMat {
    let gram = m * m.transpose();
    let se = gram.symmetric_eigen();
    let dim = se.eigenvalues.len();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());

    let sval = |i: usize| se.eigenvalues[order[i]].max(0.0).sqrt();
    let smax = sval(0);
    let keep = (0..dim)
        .take_while(|&i| smax > 0.0 && sval(i) > rel_tol * smax)
        .count();

    let mut basis = RMat::zeros(dim, keep);
    for (col, &src) in order.iter().take(keep).enumerate() {
        basis.set_column(col, &se.eigenvectors.column(src));
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of the column span of `p`,
/// where `p` already has orthonormal columns. The eigenvalues of `p pᵀ` are
/// then 0 or 1 and the split at 1/2 is unambiguous.
pub fn orthonormal_complement(p: &RMat) -> RMat {
    let proj = p * p.transpose();
    let se = proj.symmetric_eigen();
    let dim = se.eigenvalues.len();

    let mut cols: Vec<usize> = (0..dim).filter(|&i| se.eigenvalues[i] < 0.5).collect();
    cols.sort();
    let mut basis = RMat::zeros(dim, cols.len());
    for (col, &src) in cols.iter().enumerate() {
        basis.set_column(col, &se.eigenvectors.column(src));
    }
    basis
}

/// Least-squares solution of `a x = b` through the SVD pseudoinverse with
/// relative cutoff `rel_tol`.
pub fn least_squares(a: &RMat, b: &RVec, rel_tol: f64) -> RVec {
    let svd = a.clone().svd(true, true);
    let smax = svd
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s));
    svd.solve(b, rel_tol * smax).expect("svd factors requested")
}

/// Pfaffian of a real antisymmetric matrix, by expansion along the first
/// remaining row. Exponential in the half-size; intended for matrices of
/// order at most a dozen or so.
pub fn pfaffian(a: &RMat) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "pfaffian needs a square matrix");
    if a.nrows() % 2 != 0 {
        return 0.0;
    }
    let live: Vec<usize> = (0..a.nrows()).collect();
    pfaffian_rec(a, &live)
}

fn pfaffian_rec(a: &RMat, live: &[usize]) -> f64 {
    if live.is_empty() {
        return 1.0;
    }
    let i = live[0];
    let mut acc = 0.0;
    let mut sign = 1.0;
    for (pos, &j) in live.iter().enumerate().skip(1) {
        let entry = a[(i, j)];
        if entry != 0.0 {
            let rest: Vec<usize> = live[1..]
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != pos - 1)
                .map(|(_, &v)| v)
                .collect();
            acc += sign * entry * pfaffian_rec(a, &rest);
        }
        sign = -sign;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> RMat {
        let mut m = RMat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = StandardNormal.sample(rng);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    #[test]
    fn pfaffian_order_four_closed_form() {
        // pf = a01*a23 - a02*a13 + a03*a12
        let (a, b, c, d, e, f) = (1.5, -2.0, 0.5, 3.0, 1.0, 2.0);
        let mut m = RMat::zeros(4, 4);
        let upper = [(0, 1, a), (0, 2, b), (0, 3, c), (1, 2, d), (1, 3, e), (2, 3, f)];
        for &(i, j, v) in &upper {
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
        assert_relative_eq!(pfaffian(&m), a * f - b * e + c * d, epsilon = 1e-14);
        assert_relative_eq!(pfaffian(&m), 6.5, epsilon = 1e-14);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 4, 6, 8] {
            let m = random_skew(n, &mut rng);
            let pf = pfaffian(&m);
            assert_relative_eq!(pf * pf, m.determinant(), max_relative = 1e-10);
        }
    }

    #[test]
    fn pfaffian_odd_order_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_skew(5, &mut rng);
        assert_eq!(pfaffian(&m), 0.0);
    }

    #[test]
    fn kernel_of_rank_one_map() {
        // rows are multiples of (1, 2): kernel is spanned by (2, -1)/sqrt(5)
        let m = RMat::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0]);
        let (svals, kernel) = kernel_and_singular_values(&m, 1e-10);
        assert_eq!(rank_from_singular_values(&svals, 1e-10), 1);
        assert_eq!(kernel.ncols(), 1);
        let v = kernel.column(0);
        assert_relative_eq!((v[0] * 1.0 + v[1] * 2.0).abs(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_matches_wide_matrices_too() {
        let m = RMat::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let (_, kernel) = kernel_and_singular_values(&m, 1e-10);
        assert_eq!(kernel.ncols(), 2);
        for c in 0..2 {
            let v = kernel.column(c);
            assert_relative_eq!(v[0] + v[1] + v[2], 0.0, epsilon = 1e-12);
        }
        assert_relative_eq!(
            kernel.column(0).dot(&kernel.column(1)),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn complement_of_coordinate_plane() {
        let mut p = RMat::zeros(4, 2);
        p[(0, 0)] = 1.0;
        p[(1, 1)] = 1.0;
        let q = orthonormal_complement(&p);
        assert_eq!(q.ncols(), 2);
        for c in 0..2 {
            assert_relative_eq!(q.column(c)[0], 0.0, epsilon = 1e-14);
            assert_relative_eq!(q.column(c)[1], 0.0, epsilon = 1e-14);
            assert_relative_eq!(q.column(c).norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = RMat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x_true = RVec::from_row_slice(&[2.0, -1.0]);
        let b = &a * &x_true;
        let x = least_squares(&a, &b, 1e-12);
        assert_relative_eq!((x - x_true).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_are_sorted() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                C::new(2.0, 0.0),
                C::new(0.0, -1.0),
                C::new(0.0, 1.0),
                C::new(-1.0, 0.0),
            ],
        );
        assert!(hermitian_residual(&m) < 1e-15);
        let eigs = hermitian_eigenvalues(&m);
        // roots of x^2 - x - 3
        let disc = (13.0f64).sqrt();
        assert_relative_eq!(eigs[0], (1.0 - disc) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(eigs[1], (1.0 + disc) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn column_space_of_duplicated_column() {
        let m = RMat::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let basis = column_space_basis(&m, 1e-10);
        assert_eq!(basis.ncols(), 1);
        let v = basis.column(0);
        assert_relative_eq!(v[0].abs(), 1.0 / 3.0f64.sqrt(), epsilon = 1e-12);
    }
}
