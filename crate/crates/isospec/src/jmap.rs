//! Linear maps `j: h -> g_n` and the invariants of their matrix pencils.
//!
//! A map is stored through its two images `J1 = j(z1)`, `J2 = j(z2)`. The
//! pencil `s J1 + t J2` is skew-Hermitian for real `(s, t)`, so its
//! characteristic polynomial coefficients are homogeneous binary forms
//! `c_k(s, t)`; for even orthogonal ranks the Pfaffian form joins them.
//! Two maps with equal forms are isospectral: every pencil member of one is
//! conjugate to the matching member of the other.
//!
//! The forms are recovered by sampling the pencil on the half circle and
//! fitting each degree separately, which keeps the extraction exact to
//! eigensolver precision. Everything downstream (tangent dimensions,
//! continuation, certificates) consumes the stacked coefficient vector.

use crate::liealg::{self, AlgebraSpec, Family};
use crate::linalg::{self, CMat, RMat, RVec, C};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Default relative rank cutoff for tangent-space computations on finite
/// difference Jacobians.
pub const DEFORM_RANK_TOL: f64 = 1e-6;

/// Residual ceiling for accepting a corrected point as isospectral.
pub const ISOSPEC_TOL: f64 = 1e-9;

/// A linear map `h -> g_n`, carried by the images of the two torus
/// generators. Both images are validated as algebra members on
/// construction.
#[derive(Debug, Clone)]
pub struct JMap {
    pub algebra: Arc<AlgebraSpec>,
    pub j1: CMat,
    pub j2: CMat,
    pub seed: Option<u64>,
}

impl JMap {
    pub fn new(algebra: Arc<AlgebraSpec>, j1: CMat, j2: CMat, seed: Option<u64>) -> Result<Self> {
        for (label, m) in [("j1", &j1), ("j2", &j2)] {
            let r = liealg::member_residual(&algebra, m);
            if r > 1e-10 {
                return Err(Error::Membership(r)).map_err(|e| {
                    Error::Invalid(format!("{label} is not an algebra element: {e}"))
                });
            }
        }
        Ok(JMap {
            algebra,
            j1,
            j2,
            seed,
        })
    }

    pub fn zero(algebra: Arc<AlgebraSpec>) -> Self {
        let side = algebra.matrix_side;
        JMap {
            algebra,
            j1: linalg::czeros(side, side),
            j2: linalg::czeros(side, side),
            seed: None,
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> CMat {
        &self.j1 * C::new(s, 0.0) + &self.j2 * C::new(t, 0.0)
    }

    /// Stacked coordinates `[coords(j1); coords(j2)]`, the chart used by all
    /// tangent-space computations.
    pub fn stacked_coords(&self) -> RVec {
        let a = liealg::coords(&self.algebra, &self.j1);
        let b = liealg::coords(&self.algebra, &self.j2);
        let mut v = RVec::zeros(2 * self.algebra.dim);
        v.rows_mut(0, self.algebra.dim).copy_from(&a);
        v.rows_mut(self.algebra.dim, self.algebra.dim).copy_from(&b);
        v
    }

    pub fn from_stacked_coords(algebra: Arc<AlgebraSpec>, v: &RVec, seed: Option<u64>) -> Self {
        assert_eq!(v.len(), 2 * algebra.dim, "stacked coordinate length");
        let a = RVec::from_iterator(algebra.dim, v.iter().take(algebra.dim).copied());
        let b = RVec::from_iterator(algebra.dim, v.iter().skip(algebra.dim).copied());
        let j1 = liealg::from_coords(&algebra, &a);
        let j2 = liealg::from_coords(&algebra, &b);
        JMap {
            algebra,
            j1,
            j2,
            seed,
        }
    }

    /// Flat `g0` distance `sqrt(|j1-j1'|^2 + |j2-j2'|^2)`.
    pub fn distance(&self, other: &JMap) -> f64 {
        let d1 = linalg::frobenius(&(&self.j1 - &other.j1));
        let d2 = linalg::frobenius(&(&self.j2 - &other.j2));
        (d1 * d1 + d2 * d2).sqrt()
    }
}

/// Conjugate both images by a seeded group element. The result carries the
/// same pencil invariants as `j`, so the pair is equivalent and separation
/// searches must come back inconclusive. Stream 3 of the seed.
pub fn conjugated(j: &JMap, seed: u64) -> JMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    let c = RVec::from_iterator(j.algebra.dim, (0..j.algebra.dim).map(|_| {
        let x: f64 = StandardNormal.sample(&mut rng);
        0.3 * x
    }));
    let g = liealg::exp_matrix(&liealg::from_coords(&j.algebra, &c));
    let gi = g.adjoint();
    JMap {
        algebra: Arc::clone(&j.algebra),
        j1: &g * &j.j1 * &gi,
        j2: &g * &j.j2 * &gi,
        seed: None,
    }
}

/// Draw a map with i.i.d. standard normal basis coefficients, each image
/// rescaled to unit g0 norm. Stream 1 of the global seed.
pub fn sample_jmap(algebra: &Arc<AlgebraSpec>, seed: u64) -> JMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let draw = |rng: &mut ChaCha8Rng| {
        let c = RVec::from_iterator(
            algebra.dim,
            (0..algebra.dim).map(|_| StandardNormal.sample(rng)),
        );
        let m = liealg::from_coords(algebra, &c);
        let norm = linalg::frobenius(&m);
        &m * C::new(1.0 / norm, 0.0)
    };
    let j1 = draw(&mut rng);
    let j2 = draw(&mut rng);
    JMap {
        algebra: Arc::clone(algebra),
        j1,
        j2,
        seed: Some(seed),
    }
}

/// Coefficient forms of the pencil. `charpoly[k-1]` holds the `k+1`
/// coefficients of the degree-`k` form, ordered `s^k, s^{k-1} t, ..., t^k`;
/// `pfaffian` joins in for even orthogonal ranks, as real coefficients of
/// the degree `N/2` form.
#[derive(Debug, Clone)]
pub struct PencilInvariants {
    pub charpoly: Vec<Vec<C>>,
    pub pfaffian: Option<Vec<f64>>,
}

impl PencilInvariants {
    /// Real coefficient stack: `(Re, Im)` pairs for every characteristic
    /// coefficient in order, then the Pfaffian coefficients.
    pub fn flatten(&self) -> RVec {
        let mut out = Vec::new();
        for form in &self.charpoly {
            for z in form {
                out.push(z.re);
                out.push(z.im);
            }
        }
        if let Some(pf) = &self.pfaffian {
            out.extend_from_slice(pf);
        }
        RVec::from_vec(out)
    }

    /// Largest coefficient deviation between two invariant sets.
    pub fn max_deviation(&self, other: &PencilInvariants) -> f64 {
        let mut r: f64 = 0.0;
        for (a, b) in self.charpoly.iter().zip(&other.charpoly) {
            for (x, y) in a.iter().zip(b) {
                r = r.max((x - y).norm());
            }
        }
        match (&self.pfaffian, &other.pfaffian) {
            (Some(a), Some(b)) => {
                for (x, y) in a.iter().zip(b) {
                    r = r.max((x - y).abs());
                }
            }
            (None, None) => {}
            _ => r = f64::INFINITY,
        }
        r
    }

    /// Evaluate the degree-`k` characteristic form at `(s, t)`.
    pub fn eval_charpoly_form(&self, k: usize, s: f64, t: f64) -> C {
        eval_form(&self.charpoly[k - 1], s, t)
    }
}

fn eval_form(coeffs: &[C], s: f64, t: f64) -> C {
    let k = coeffs.len() - 1;
    let mut acc = C::new(0.0, 0.0);
    for (a, c) in coeffs.iter().enumerate() {
        acc += c * C::new(s.powi((k - a) as i32) * t.powi(a as i32), 0.0);
    }
    acc
}

/// Coefficients of `prod (lambda - r_i)` in descending powers, leading 1.
fn poly_from_roots(roots: &[C]) -> Vec<C> {
    let mut coeffs = vec![C::new(1.0, 0.0)];
    for r in roots {
        coeffs.push(C::new(0.0, 0.0));
        for k in (1..coeffs.len()).rev() {
            let prev = coeffs[k - 1];
            coeffs[k] -= r * prev;
        }
    }
    coeffs
}

fn wants_pfaffian(alg: &AlgebraSpec) -> bool {
    alg.family == Family::Orthogonal && alg.n % 2 == 0
}

/// Extract the coefficient forms of the pencil of `j`.
///
/// Samples `N(N+3)/2 + 8` angles on the half circle, reads each pencil
/// member's spectrum through the Hermitian matrix `i (s J1 + t J2)`, and
/// fits every degree by least squares. Conditioning of the fits is checked;
/// with the fixed half-circle sampling it never degenerates in practice.
pub fn pencil_invariants(j: &JMap) -> Result<PencilInvariants> {
    let n = j.algebra.matrix_side;
    let samples = n * (n + 3) / 2 + 8;
    let i_unit = C::new(0.0, 1.0);

    let mut angles = Vec::with_capacity(samples);
    let mut coeff_samples: Vec<Vec<C>> = vec![Vec::with_capacity(samples); n];
    let mut pf_samples: Vec<f64> = Vec::new();
    let take_pf = wants_pfaffian(&j.algebra);

    for idx in 0..samples {
        let theta = PI * (idx as f64 + 0.5) / samples as f64;
        let (s, t) = (theta.cos(), theta.sin());
        angles.push((s, t));

        let pencil = j.eval(s, t);
        let h = &pencil * i_unit;
        let herm = linalg::hermitian_residual(&h);
        if herm > 1e-10 * (1.0 + linalg::frobenius(&h)) {
            return Err(Error::Numerical(format!(
                "pencil member is not skew-Hermitian: residual {herm:.3e}"
            )));
        }
        let mu = linalg::hermitian_eigenvalues(&h);
        let roots: Vec<C> = mu.iter().map(|&m| C::new(0.0, -m)).collect();
        let poly = poly_from_roots(&roots);
        for k in 1..=n {
            coeff_samples[k - 1].push(poly[k]);
        }
        if take_pf {
            pf_samples.push(linalg::pfaffian(&pencil.map(|z| z.re)));
        }
    }

    let mut charpoly = Vec::with_capacity(n);
    for k in 1..=n {
        let (re, im) = fit_form(&angles, &coeff_samples[k - 1], k)?;
        charpoly.push(
            re.iter()
                .zip(im.iter())
                .map(|(&x, &y)| C::new(x, y))
                .collect(),
        );
    }

    let pfaffian = if take_pf {
        let vals: Vec<C> = pf_samples.iter().map(|&v| C::new(v, 0.0)).collect();
        let (re, _) = fit_form(&angles, &vals, n / 2)?;
        Some(re)
    } else {
        None
    };

    Ok(PencilInvariants { charpoly, pfaffian })
}

/// Least-squares fit of a degree-`k` binary form through sampled values.
fn fit_form(angles: &[(f64, f64)], values: &[C], k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = angles.len();
    let mut design = RMat::zeros(rows, k + 1);
    for (r, &(s, t)) in angles.iter().enumerate() {
        for a in 0..=k {
            design[(r, a)] = s.powi((k - a) as i32) * t.powi(a as i32);
        }
    }
    let svals = linalg::singular_values(&design);
    let smax = svals[0];
    let smin = svals[svals.len() - 1];
    if smin < 1e-10 * smax {
        return Err(Error::Numerical(format!(
            "degree-{k} form fit is ill conditioned: {:.3e}",
            smin / smax
        )));
    }

    let svd = design.svd(true, true);
    let solve = |vals: RVec| -> Vec<f64> {
        svd.solve(&vals, 1e-12 * smax)
            .expect("svd factors requested")
            .iter()
            .copied()
            .collect()
    };
    let re = solve(RVec::from_iterator(rows, values.iter().map(|z| z.re)));
    let im = solve(RVec::from_iterator(rows, values.iter().map(|z| z.im)));
    Ok((re, im))
}

#[derive(Debug, Clone, Serialize)]
pub struct IsospecCheck {
    pub isospectral: bool,
    pub residual: f64,
    pub tol: f64,
}

/// Compare the invariant forms of two maps over the same algebra.
pub fn is_isospectral(a: &JMap, b: &JMap, tol: f64) -> Result<IsospecCheck> {
    require_same_algebra(a, b)?;
    let pa = pencil_invariants(a)?;
    let pb = pencil_invariants(b)?;
    let residual = pa.max_deviation(&pb);
    Ok(IsospecCheck {
        isospectral: residual <= tol,
        residual,
        tol,
    })
}

fn require_same_algebra(a: &JMap, b: &JMap) -> Result<()> {
    if a.algebra.family != b.algebra.family || a.algebra.n != b.algebra.n {
        return Err(Error::AlgebraMismatch(format!(
            "{}({}) vs {}({})",
            a.algebra.family,
            a.algebra.n,
            b.algebra.family,
            b.algebra.n
        )));
    }
    Ok(())
}

/// Jacobian of the stacked invariant vector in the stacked-coordinate
/// chart, by central differences with step `1e-6`.
pub fn constraint_jacobian(j: &JMap) -> Result<RMat> {
    let h = 1e-6;
    let x0 = j.stacked_coords();
    let dim = x0.len();
    let probe = |x: &RVec| -> Result<RVec> {
        let jm = JMap::from_stacked_coords(Arc::clone(&j.algebra), x, None);
        Ok(pencil_invariants(&jm)?.flatten())
    };
    let f0 = probe(&x0)?;
    let mut jac = RMat::zeros(f0.len(), dim);
    for c in 0..dim {
        let mut xp = x0.clone();
        xp[c] += h;
        let mut xm = x0.clone();
        xm[c] -= h;
        let fp = probe(&xp)?;
        let fm = probe(&xm)?;
        for r in 0..f0.len() {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Columns spanning the tangent space of the equivalence orbit at `j`:
/// conjugation directions `([b, j1], [b, j2])` for every basis element,
/// plus the pencil rotation direction `(j2, -j1)`.
fn orbit_span(j: &JMap) -> RMat {
    let alg = &j.algebra;
    let dim = alg.dim;
    let mut span = RMat::zeros(2 * dim, dim + 1);
    for (col, b) in alg.basis.iter().enumerate() {
        let c1 = liealg::coords(alg, &liealg::bracket(b, &j.j1));
        let c2 = liealg::coords(alg, &liealg::bracket(b, &j.j2));
        for r in 0..dim {
            span[(r, col)] = c1[r];
            span[(dim + r, col)] = c2[r];
        }
    }
    let r1 = liealg::coords(alg, &j.j2);
    let r2 = liealg::coords(alg, &(-&j.j1));
    for r in 0..dim {
        span[(r, dim)] = r1[r];
        span[(dim + r, dim)] = r2[r];
    }
    span
}

fn rank_and_gap(svals: &[f64], rel_tol: f64) -> (usize, f64) {
    let rank = linalg::rank_from_singular_values(svals, rel_tol);
    if rank == 0 || rank >= svals.len() || svals[rank] == 0.0 {
        (rank, f64::INFINITY)
    } else {
        (rank, svals[rank - 1] / svals[rank])
    }
}

/// Tangent dimensions at a map: the isospectral variety tangent, the part
/// of it filled by the equivalence orbit, and the difference `d`, which
/// counts genuinely inequivalent deformation directions.
#[derive(Debug, Clone, Serialize)]
pub struct DeformationDims {
    pub variety_tangent_dim: usize,
    pub orbit_tangent_dim: usize,
    pub d: i64,
    pub orbit_span_dim: usize,
    /// Smallest ratio across the retained/discarded singular-value split of
    /// the three rank decisions involved.
    pub rank_gap: f64,
    /// Set when any rank decision has gap below 10; dimensions are then
    /// unreliable.
    pub flagged: bool,
}

pub fn deformation_dims(j: &JMap, rank_tol: f64) -> Result<DeformationDims> {
    let jac = constraint_jacobian(j)?;
    let (jac_svals, kernel) = linalg::kernel_and_singular_values(&jac, rank_tol);
    let (jac_rank, jac_gap) = rank_and_gap(&jac_svals, rank_tol);
    let nullity = 2 * j.algebra.dim - jac_rank;

    let orbit = orbit_span(j);
    let orbit_svals = linalg::singular_values(&orbit);
    let (orbit_rank, orbit_gap) = rank_and_gap(&orbit_svals, rank_tol);

    // dim(orbit ∩ kernel) = rank(O) + rank(K) - rank([O K])
    let mut joint = RMat::zeros(2 * j.algebra.dim, orbit.ncols() + kernel.ncols());
    for c in 0..orbit.ncols() {
        let col = orbit.column(c);
        let norm = col.norm();
        if norm > 0.0 {
            joint.set_column(c, &(col / norm));
        }
    }
    for c in 0..kernel.ncols() {
        joint.set_column(orbit.ncols() + c, &kernel.column(c));
    }
    let joint_svals = linalg::singular_values(&joint);
    let (joint_rank, joint_gap) = rank_and_gap(&joint_svals, rank_tol);

    let orbit_tangent_dim = (orbit_rank + kernel.ncols()).saturating_sub(joint_rank);
    let rank_gap = jac_gap.min(orbit_gap).min(joint_gap);
    Ok(DeformationDims {
        variety_tangent_dim: nullity,
        orbit_tangent_dim,
        d: nullity as i64 - orbit_tangent_dim as i64,
        orbit_span_dim: orbit_rank,
        rank_gap,
        flagged: rank_gap < 10.0,
    })
}

/// A map is generic when nothing in `g_n` commutes with both images.
pub fn genericity_check(j: &JMap) -> bool {
    liealg::centralizer_dim(&j.algebra, &[j.j1.clone(), j.j2.clone()], liealg::RANK_TOL) == 0
}

/// Lattice of corrected isospectral maps around a base point.
///
/// `points[0]` is the base; `steps[i]` gives each point's lattice index.
/// When the corrector fails to converge the family is truncated at the last
/// good point and `truncated` is set.
#[derive(Debug, Clone)]
pub struct IsospectralFamily {
    pub base: JMap,
    pub points: Vec<JMap>,
    pub steps: Vec<Vec<usize>>,
    pub residuals: Vec<f64>,
    pub num_params: usize,
    pub num_steps: usize,
    pub step_size: f64,
    pub truncated: bool,
}

impl IsospectralFamily {
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min(self.points[i].distance(&self.points[j]));
            }
        }
        best
    }
}

/// Tangent directions transverse to the orbit, smallest singular value
/// first, orthonormalised against the orbit span and each other.
fn transverse_directions(
    kernel: &RMat,
    orbit: &RMat,
    rank_tol: f64,
    count: usize,
) -> Result<Vec<RVec>> {
    let orbit_basis = linalg::column_space_basis(orbit, rank_tol);
    let mut dirs: Vec<RVec> = Vec::new();
    for c in 0..kernel.ncols() {
        if dirs.len() == count {
            break;
        }
        let k = kernel.column(c).clone_owned();
        let mut w = &k - &orbit_basis * (orbit_basis.transpose() * &k);
        for d in &dirs {
            let proj = d.dot(&w);
            w -= d * proj;
        }
        let norm = w.norm();
        if norm > 1e-2 {
            dirs.push(w / norm);
        }
    }
    if dirs.len() < count {
        return Err(Error::Numerical(format!(
            "only {} of {count} transverse tangent directions could be extracted",
            dirs.len()
        )));
    }
    Ok(dirs)
}

/// Damped Gauss-Newton projection back onto the isospectral variety.
/// Returns the corrected coordinates and the final max-abs residual.
fn correct_to_variety(
    algebra: &Arc<AlgebraSpec>,
    start: RVec,
    target: &RVec,
    rank_tol: f64,
) -> Result<(RVec, f64)> {
    let eval = |x: &RVec| -> Result<RVec> {
        let jm = JMap::from_stacked_coords(Arc::clone(algebra), x, None);
        Ok(pencil_invariants(&jm)?.flatten() - target)
    };
    let mut x = start;
    let mut r = eval(&x)?;
    for _ in 0..40 {
        let rinf = r.amax();
        if rinf < 1e-12 {
            break;
        }
        let jm = JMap::from_stacked_coords(Arc::clone(algebra), &x, None);
        let jac = constraint_jacobian(&jm)?;
        let svd = jac.clone().svd(true, true);
        let smax = svd
            .singular_values
            .iter()
            .fold(0.0f64, |acc, &s| acc.max(s));
        let delta = svd.solve(&r, rank_tol * smax).expect("svd factors requested");

        let mut alpha = 1.0;
        let base_norm = r.norm();
        loop {
            let cand = &x - &delta * alpha;
            let rc = eval(&cand)?;
            if rc.norm() < base_norm || alpha < 1.0 / 256.0 {
                x = cand;
                r = rc;
                break;
            }
            alpha *= 0.5;
        }
    }
    let rinf = r.amax();
    Ok((x, rinf))
}

/// Continue a base map through its isospectral variety on a parameter
/// lattice `{0..num_steps}^num_params` with spacing `step_size`.
///
/// Directions are fixed at the base point; each lattice point is predicted
/// from its already-corrected predecessor and projected back by
/// Gauss-Newton. Requires `d >= num_params` at the base.
pub fn generate_family(
    base: &JMap,
    num_params: usize,
    num_steps: usize,
    step_size: f64,
    rank_tol: f64,
) -> Result<IsospectralFamily> {
    if num_params == 0 || num_steps == 0 || step_size <= 0.0 {
        return Err(Error::Invalid(
            "family needs num_params >= 1, num_steps >= 1, step_size > 0".into(),
        ));
    }
    let dims = deformation_dims(base, rank_tol)?;
    if dims.d < num_params as i64 {
        return Err(Error::Invalid(format!(
            "requested {num_params} parameters but the deformation dimension is {}",
            dims.d
        )));
    }

    let jac = constraint_jacobian(base)?;
    let (_, kernel) = linalg::kernel_and_singular_values(&jac, rank_tol);
    let orbit = orbit_span(base);
    let dirs = transverse_directions(&kernel, &orbit, rank_tol, num_params)?;

    let target = pencil_invariants(base)?.flatten();
    let base_coords = base.stacked_coords();

    let lattice = lattice_indices(num_params, num_steps);
    let mut coords_by_index: Vec<RVec> = Vec::with_capacity(lattice.len());
    let mut points = Vec::with_capacity(lattice.len());
    let mut steps = Vec::with_capacity(lattice.len());
    let mut residuals = Vec::with_capacity(lattice.len());
    let mut truncated = false;

    for idx in &lattice {
        let (coords, residual) = if idx.iter().all(|&a| a == 0) {
            (base_coords.clone(), 0.0)
        } else {
            let axis = idx.iter().position(|&a| a > 0).expect("nonzero index");
            let mut pred_idx = idx.clone();
            pred_idx[axis] -= 1;
            let pred_pos = lattice
                .iter()
                .position(|cand| cand == &pred_idx)
                .expect("predecessor precedes in lex order");
            let predicted = &coords_by_index[pred_pos] + &dirs[axis] * step_size;
            correct_to_variety(&base.algebra, predicted, &target, rank_tol)?
        };
        if residual > ISOSPEC_TOL {
            truncated = true;
            break;
        }
        let point = JMap::from_stacked_coords(Arc::clone(&base.algebra), &coords, base.seed);
        coords_by_index.push(coords);
        points.push(point);
        steps.push(idx.clone());
        residuals.push(residual);
    }

    Ok(IsospectralFamily {
        base: base.clone(),
        points,
        steps,
        residuals,
        num_params,
        num_steps,
        step_size,
        truncated,
    })
}

fn lattice_indices(num_params: usize, num_steps: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    let mut cur = vec![0usize; num_params];
    loop {
        all.push(cur.clone());
        let mut axis = num_params;
        while axis > 0 {
            axis -= 1;
            if cur[axis] < num_steps {
                cur[axis] += 1;
                for later in cur.iter_mut().skip(axis + 1) {
                    *later = 0;
                }
                break;
            }
            if axis == 0 {
                return all;
            }
        }
    }
}

/// All words in two letters up to `max_len`, breadth first; labels use
/// letters `1` and `2`.
pub fn word_set(max_len: usize) -> Vec<String> {
    let mut words = Vec::new();
    let mut level: Vec<String> = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for w in &level {
            for letter in ["1", "2"] {
                let mut ext = w.clone();
                ext.push_str(letter);
                next.push(ext);
            }
        }
        words.extend(next.iter().cloned());
        level = next;
    }
    words
}

/// Real parts of the traces of all words in `(m1, m2)` up to `max_len`,
/// breadth first, matching [`word_set`] order.
fn word_traces(m1: &CMat, m2: &CMat, max_len: usize) -> Vec<f64> {
    let mut traces = Vec::new();
    let mut level: Vec<CMat> = vec![m1.clone(), m2.clone()];
    traces.extend(level.iter().map(|m| m.trace().re));
    for _ in 1..max_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for prod in &level {
            next.push(prod * m1);
            next.push(prod * m2);
        }
        traces.extend(next.iter().map(|m: &CMat| m.trace().re));
        level = next;
    }
    traces
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Nonequivalent,
    Inconclusive,
}

/// Outcome of the trace-word separation search between two maps.
///
/// The margin is the smallest, over all torus reparametrisations in the
/// candidate O(2) set, of the largest word-trace discrepancy. A margin
/// above `tol` certifies that no map equivalence carries one map to the
/// other; equivalences would preserve every word trace.
#[derive(Debug, Clone, Serialize)]
pub struct NonequivCertificate {
    pub margin: f64,
    pub verdict: Verdict,
    pub word_set: Vec<String>,
    pub max_word_len: usize,
    pub grid_size: usize,
    pub best_angle: f64,
    pub best_reflected: bool,
    pub tol: f64,
}

fn reparametrised(b: &JMap, theta: f64, reflected: bool) -> (CMat, CMat) {
    let (c, s) = (theta.cos(), theta.sin());
    let m1 = &b.j1 * C::new(c, 0.0) + &b.j2 * C::new(s, 0.0);
    let m2 = if reflected {
        &b.j1 * C::new(s, 0.0) + &b.j2 * C::new(-c, 0.0)
    } else {
        &b.j1 * C::new(-s, 0.0) + &b.j2 * C::new(c, 0.0)
    };
    (m1, m2)
}

pub fn nonequiv_certificate(
    a: &JMap,
    b: &JMap,
    max_word_len: usize,
    grid_size: usize,
    tol: f64,
) -> Result<NonequivCertificate> {
    require_same_algebra(a, b)?;
    if max_word_len == 0 || grid_size < 8 {
        return Err(Error::Invalid(
            "certificate needs max_word_len >= 1 and grid_size >= 8".into(),
        ));
    }

    let reference = word_traces(&a.j1, &a.j2, max_word_len);
    let margin_at = |theta: f64, reflected: bool| -> f64 {
        let (m1, m2) = reparametrised(b, theta, reflected);
        let traces = word_traces(&m1, &m2, max_word_len);
        traces
            .iter()
            .zip(&reference)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    };

    let margins: Vec<f64> = (0..2 * grid_size)
        .into_par_iter()
        .map(|flat| {
            let reflected = flat >= grid_size;
            let g = flat % grid_size;
            let theta = 2.0 * PI * g as f64 / grid_size as f64;
            margin_at(theta, reflected)
        })
        .collect();

    let mut best = (f64::INFINITY, 0.0f64, false);
    for reflected in [false, true] {
        let off = if reflected { grid_size } else { 0 };
        let mut coarse = (f64::INFINITY, 0usize);
        for g in 0..grid_size {
            if margins[off + g] < coarse.0 {
                coarse = (margins[off + g], g);
            }
        }
        let center = 2.0 * PI * coarse.1 as f64 / grid_size as f64;
        let spacing = 2.0 * PI / grid_size as f64;
        let mut lo = center - spacing;
        let mut hi = center + spacing;
        for _ in 0..140 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if margin_at(m1, reflected) < margin_at(m2, reflected) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let theta = 0.5 * (lo + hi);
        let refined = margin_at(theta, reflected).min(coarse.0);
        let angle = if refined < coarse.0 { theta } else { center };
        if refined < best.0 {
            best = (refined, angle, reflected);
        }
    }

    let verdict = if best.0 > tol {
        Verdict::Nonequivalent
    } else {
        Verdict::Inconclusive
    };
    Ok(NonequivCertificate {
        margin: best.0,
        verdict,
        word_set: word_set(max_word_len),
        max_word_len,
        grid_size,
        best_angle: best.1,
        best_reflected: best.2,
        tol,
    })
}
