//! Conformal potentials on doubled symplectic groups.
//!
//! Two isospectral maps over `sp(n)` are planted into disjoint leading
//! blocks A and E of `sp(2n+r)`, with the torus directions in the trailing
//! block L. On the group, the potential
//!
//! `phi(X) = exp(c1 Re det A(X) + c2 Re det E(X))`, `c1 > c2 > 0`,
//!
//! reads the two diagonal blocks of the defining matrix. The involution
//! `tau` conjugates by the permutation swapping A and E, so the pullback
//! `tau* phi` exchanges the roles of the two determinants; since `c1` and
//! `c2` differ, `phi` and `tau* phi` are distinct functions even though
//! both are invariant under the same torus and factor actions.

use crate::jmap::{self, JMap};
use crate::liealg::{self, AlgebraSpec, Family};
use crate::linalg::{self, CMat, RMat, RVec, C};
use crate::metric::{metric_from_embedded, EmbeddedJMap, LeftInvariantMetric};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Block sizes of the doubled group `Sp(2n+r)`: quaternionic slots
/// `0..n` form A, `n..2n` form E, `2n..2n+r` form L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticBlockLayout {
    pub n: usize,
    pub r: usize,
}

impl SymplecticBlockLayout {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 1 || r < 2 {
            return Err(Error::Invalid(format!(
                "doubled layout needs n >= 1 and r >= 2, got n={n}, r={r}"
            )));
        }
        Ok(SymplecticBlockLayout { n, r })
    }

    pub fn ambient_rank(&self) -> usize {
        2 * self.n + self.r
    }

    /// Complex row range of block A; E and L follow contiguously.
    pub fn a_rows(&self) -> std::ops::Range<usize> {
        0..2 * self.n
    }

    pub fn e_rows(&self) -> std::ops::Range<usize> {
        2 * self.n..4 * self.n
    }

    pub fn l_rows(&self) -> std::ops::Range<usize> {
        4 * self.n..4 * self.n + 2 * self.r
    }
}

/// Distance of `x` from the compact symplectic group in its interleaved
/// realisation: unitarity plus the quaternionic reality condition.
pub fn sp_group_residual(x: &CMat) -> f64 {
    let m = x.nrows() / 2;
    let eye = CMat::identity(x.nrows(), x.ncols());
    let unitarity = linalg::frobenius(&(x.adjoint() * x - eye));
    let j = liealg::sp_structure_matrix(m);
    let twisted = &j * x.map(|z| z.conj()) * (-&j);
    let reality = linalg::frobenius(&(twisted - x));
    unitarity.max(reality)
}

/// The potential data: exponents and the block layout they read.
#[derive(Debug, Clone, Serialize)]
pub struct Potential {
    pub c1: f64,
    pub c2: f64,
    pub layout: SymplecticBlockLayout,
}

impl Potential {
    pub fn new(c1: f64, c2: f64, layout: SymplecticBlockLayout) -> Result<Self> {
        if !(c1 > c2 && c2 > 0.0) {
            return Err(Error::Invalid(format!(
                "potential exponents must satisfy c1 > c2 > 0, got c1={c1}, c2={c2}"
            )));
        }
        Ok(Potential { c1, c2, layout })
    }
}

fn block_det(x: &CMat, rows: std::ops::Range<usize>) -> C {
    let side = rows.len();
    x.view((rows.start, rows.start), (side, side))
        .into_owned()
        .determinant()
}

/// Evaluate the potential at a group element. Membership is enforced to
/// `1e-10` before any block is read.
pub fn phi_eval(p: &Potential, x: &CMat) -> Result<f64> {
    let side = 2 * p.layout.ambient_rank();
    if x.nrows() != side || x.ncols() != side {
        return Err(Error::Invalid(format!(
            "expected {side}x{side} group element, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let residual = sp_group_residual(x);
    if residual > 1e-10 {
        return Err(Error::Membership(residual));
    }
    let da = block_det(x, p.layout.a_rows());
    let de = block_det(x, p.layout.e_rows());
    Ok((p.c1 * da.re + p.c2 * de.re).exp())
}

/// The involution swapping the A and E blocks, as a group element.
#[derive(Debug, Clone)]
pub struct SwapInvolution {
    pub layout: SymplecticBlockLayout,
    pub c: CMat,
}

pub fn swap_involution(layout: SymplecticBlockLayout) -> SwapInvolution {
    let side = 2 * layout.ambient_rank();
    let mut c = linalg::czeros(side, side);
    let one = C::new(1.0, 0.0);
    for k in 0..layout.n {
        for d in 0..2 {
            c[(2 * k + d, 2 * (layout.n + k) + d)] = one;
            c[(2 * (layout.n + k) + d, 2 * k + d)] = one;
        }
    }
    for row in layout.l_rows() {
        c[(row, row)] = one;
    }
    SwapInvolution { layout, c }
}

impl SwapInvolution {
    /// `tau(x) = c x c`; the matrix is its own inverse.
    pub fn tau(&self, x: &CMat) -> CMat {
        &self.c * x * &self.c
    }
}

/// Place an `sp(n)` matrix into quaternionic slots starting at `slot`.
fn place(layout: SymplecticBlockLayout, x: &CMat, slot: usize) -> CMat {
    let side = 2 * layout.ambient_rank();
    let mut m = linalg::czeros(side, side);
    m.view_mut((2 * slot, 2 * slot), (x.nrows(), x.ncols()))
        .copy_from(x);
    m
}

/// The doubled system: ambient algebra, embedded map, and its metric.
#[derive(Debug, Clone)]
pub struct DoubledSystem {
    pub layout: SymplecticBlockLayout,
    pub inner: Arc<AlgebraSpec>,
    pub ambient: Arc<AlgebraSpec>,
    pub embedded: EmbeddedJMap,
    pub metric: LeftInvariantMetric,
}

impl DoubledSystem {
    pub fn place_a(&self, x: &CMat) -> CMat {
        place(self.layout, x, 0)
    }

    pub fn place_e(&self, x: &CMat) -> CMat {
        place(self.layout, x, self.layout.n)
    }
}

/// Plant an isospectral pair into the A and E blocks of `sp(2n+r)`.
///
/// The doubled map sends each torus generator to the sum of the two
/// planted images, so its metric restricts to the first map's deformation
/// on A and the second's on E. Rejects pairs whose pencil invariants
/// disagree beyond the isospectrality tolerance.
pub fn double_jmap(
    j_a: &JMap,
    j_e: &JMap,
    layout: SymplecticBlockLayout,
) -> Result<DoubledSystem> {
    if j_a.algebra.family != Family::Symplectic || j_a.algebra.n != layout.n {
        return Err(Error::AlgebraMismatch(format!(
            "doubling expects maps over sp({}), got {}({})",
            layout.n, j_a.algebra.family, j_a.algebra.n
        )));
    }
    let check = jmap::is_isospectral(j_a, j_e, jmap::ISOSPEC_TOL)?;
    if !check.isospectral {
        return Err(Error::NotIsospectral(check.residual));
    }

    let inner = Arc::clone(&j_a.algebra);
    let ambient = liealg::build_algebra(Family::Symplectic, layout.ambient_rank())?;
    let m = layout.ambient_rank();
    let z1 = liealg::sp_diagonal_torus_generator(m, 2 * layout.n);
    let z2 = liealg::sp_diagonal_torus_generator(m, 2 * layout.n + 1);

    let jhat1 = place(layout, &j_a.j1, 0) + place(layout, &j_e.j1, layout.n);
    let jhat2 = place(layout, &j_a.j2, 0) + place(layout, &j_e.j2, layout.n);

    let mut k_basis = Vec::with_capacity(2 * inner.dim);
    for b in &inner.basis {
        k_basis.push(place(layout, b, 0));
    }
    for b in &inner.basis {
        k_basis.push(place(layout, b, layout.n));
    }

    let embedded = EmbeddedJMap {
        ambient: Arc::clone(&ambient),
        z1,
        z2,
        jhat1,
        jhat2,
        k_basis,
    };
    let metric = metric_from_embedded(&embedded);
    Ok(DoubledSystem {
        layout,
        inner,
        ambient,
        embedded,
        metric,
    })
}

/// Genericity of a doubled pair: the stacked image columns span a plane,
/// and each factor's image has trivial centralizer in its own `sp(n)`.
#[derive(Debug, Clone, Serialize)]
pub struct DoubledGenericity {
    pub stacked_rank_full: bool,
    pub centralizers_trivial: bool,
}

impl DoubledGenericity {
    pub fn generic(&self) -> bool {
        self.stacked_rank_full && self.centralizers_trivial
    }
}

pub fn doubled_genericity(j_a: &JMap, j_e: &JMap) -> DoubledGenericity {
    let dim = j_a.algebra.dim;
    let mut stacked = RMat::zeros(2 * dim, 2);
    let ca1 = liealg::coords(&j_a.algebra, &j_a.j1);
    let ca2 = liealg::coords(&j_a.algebra, &j_a.j2);
    let ce1 = liealg::coords(&j_e.algebra, &j_e.j1);
    let ce2 = liealg::coords(&j_e.algebra, &j_e.j2);
    for i in 0..dim {
        stacked[(i, 0)] = ca1[i];
        stacked[(dim + i, 0)] = ce1[i];
        stacked[(i, 1)] = ca2[i];
        stacked[(dim + i, 1)] = ce2[i];
    }
    DoubledGenericity {
        stacked_rank_full: linalg::rank(&stacked, liealg::RANK_TOL) == 2,
        centralizers_trivial: jmap::genericity_check(j_a) && jmap::genericity_check(j_e),
    }
}

/// Sampled invariance audit of a potential over a doubled system.
///
/// The first five entries are max violations over the samples and must all
/// be near zero; `phi_differs_from_pullback` records that `phi` and
/// `tau* phi` were separated at some sample, which is the sixth check.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub samples: usize,
    pub seed: u64,
    pub torus_right_invariance: f64,
    pub factor_conjugation_invariance: f64,
    pub tau_fixes_torus: f64,
    pub tau_star_swaps_factors: f64,
    pub tau_preserves_g0: f64,
    pub phi_differs_from_pullback: bool,
    pub max_phi_pullback_gap: f64,
    /// Pointwise residual of `tau* phi = exp(c1 Re det E + c2 Re det A)`.
    pub pullback_identity: f64,
    /// How far `|log phi|` exceeds its bound `c1 + c2` (zero when inside).
    pub log_bound_excess: f64,
    /// Smallest eigenvalue of `phi * gram` seen; positive means the
    /// conformal pair stays a metric.
    pub conformal_min_eigenvalue: f64,
}

impl SuiteReport {
    /// Largest violation across the six invariance checks; the sixth
    /// (separation) contributes infinity when no witness was found.
    pub fn max_violation(&self) -> f64 {
        let sixth = if self.phi_differs_from_pullback {
            0.0
        } else {
            f64::INFINITY
        };
        self.torus_right_invariance
            .max(self.factor_conjugation_invariance)
            .max(self.tau_fixes_torus)
            .max(self.tau_star_swaps_factors)
            .max(self.tau_preserves_g0)
            .max(sixth)
    }
}

fn random_algebra_element(alg: &AlgebraSpec, rng: &mut ChaCha8Rng, scale: f64) -> CMat {
    let c = RVec::from_iterator(alg.dim, (0..alg.dim).map(|_| StandardNormal.sample(rng)));
    let m = liealg::from_coords(alg, &c);
    let norm = linalg::frobenius(&m);
    &m * C::new(scale / norm, 0.0)
}

/// Run the invariance suite: `samples` random group elements, all drawn
/// from stream 2 of `seed`.
pub fn potential_invariance_suite(
    p: &Potential,
    sys: &DoubledSystem,
    samples: usize,
    seed: u64,
) -> Result<SuiteReport> {
    if p.layout != sys.layout {
        return Err(Error::AlgebraMismatch(
            "potential and system layouts differ".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Invalid("suite needs at least one sample".into()));
    }
    let swap = swap_involution(sys.layout);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);

    let gram_min_eig = linalg::hermitian_eigenvalues(
        &sys.metric.gram.map(|v| C::new(v, 0.0)),
    )[0];

    let mut report = SuiteReport {
        samples,
        seed,
        torus_right_invariance: 0.0,
        factor_conjugation_invariance: 0.0,
        tau_fixes_torus: 0.0,
        tau_star_swaps_factors: 0.0,
        tau_preserves_g0: 0.0,
        phi_differs_from_pullback: false,
        max_phi_pullback_gap: 0.0,
        pullback_identity: 0.0,
        log_bound_excess: 0.0,
        conformal_min_eigenvalue: f64::INFINITY,
    };
    let bound = p.c1 + p.c2;

    for _ in 0..samples {
        let x = liealg::exp_matrix(&random_algebra_element(&sys.ambient, &mut rng, 0.8));
        let phi_x = phi_eval(p, &x)?;

        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let t = liealg::exp_matrix(
            &(&sys.embedded.z1 * C::new(a, 0.0) + &sys.embedded.z2 * C::new(b, 0.0)),
        );
        let phi_xt = phi_eval(p, &(&x * &t))?;
        report.torus_right_invariance = report.torus_right_invariance.max((phi_xt - phi_x).abs());

        let ga = random_algebra_element(&sys.inner, &mut rng, 0.7);
        let ge = random_algebra_element(&sys.inner, &mut rng, 0.7);
        let g = liealg::exp_matrix(&(sys.place_a(&ga) + sys.place_e(&ge)));
        let phi_conj = phi_eval(p, &(&g * &x * g.adjoint()))?;
        report.factor_conjugation_invariance = report
            .factor_conjugation_invariance
            .max((phi_conj - phi_x).abs());

        report.tau_fixes_torus = report
            .tau_fixes_torus
            .max(linalg::frobenius(&(swap.tau(&t) - &t)));

        let planted = sys.place_a(&ga) + sys.place_e(&ge);
        let swapped = sys.place_a(&ge) + sys.place_e(&ga);
        report.tau_star_swaps_factors = report
            .tau_star_swaps_factors
            .max(linalg::frobenius(&(swap.tau(&planted) - swapped)))
            .max(linalg::frobenius(&(swap.tau(&sys.embedded.z1) - &sys.embedded.z1)))
            .max(linalg::frobenius(&(swap.tau(&sys.embedded.z2) - &sys.embedded.z2)));

        let u = random_algebra_element(&sys.ambient, &mut rng, 1.0);
        let v = random_algebra_element(&sys.ambient, &mut rng, 1.0);
        report.tau_preserves_g0 = report
            .tau_preserves_g0
            .max((liealg::g0(&swap.tau(&u), &swap.tau(&v)) - liealg::g0(&u, &v)).abs());

        let phi_tau = phi_eval(p, &swap.tau(&x))?;
        report.max_phi_pullback_gap = report.max_phi_pullback_gap.max((phi_tau - phi_x).abs());

        let da = block_det(&x, p.layout.a_rows());
        let de = block_det(&x, p.layout.e_rows());
        let swapped_exponents = (p.c1 * de.re + p.c2 * da.re).exp();
        report.pullback_identity = report
            .pullback_identity
            .max((phi_tau - swapped_exponents).abs());

        report.log_bound_excess = report
            .log_bound_excess
            .max((phi_x.ln().abs() - bound).max(0.0));
        report.conformal_min_eigenvalue = report
            .conformal_min_eigenvalue
            .min(phi_x * gram_min_eig);
    }

    report.phi_differs_from_pullback = report.max_phi_pullback_gap > 1e-6;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jmap::sample_jmap;
    use crate::liealg::build_algebra;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn isospectral_pair(n: usize, seed: u64) -> (JMap, JMap) {
        let alg = build_algebra(Family::Symplectic, n).unwrap();
        let j = sample_jmap(&alg, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let c = RVec::from_iterator(alg.dim, (0..alg.dim).map(|_| rng.gen::<f64>() - 0.5));
        let g = liealg::exp_matrix(&liealg::from_coords(&alg, &c));
        let gi = g.adjoint();
        let twin = JMap::new(Arc::clone(&alg), &g * &j.j1 * &gi, &g * &j.j2 * &gi, None).unwrap();
        (j, twin)
    }

    #[test]
    fn exponent_ordering_is_enforced() {
        let layout = SymplecticBlockLayout::new(1, 2).unwrap();
        assert!(Potential::new(2.0, 1.0, layout).is_ok());
        assert!(Potential::new(1.0, 1.0, layout).is_err());
        assert!(Potential::new(1.0, 2.0, layout).is_err());
        assert!(Potential::new(2.0, -1.0, layout).is_err());
        assert!(SymplecticBlockLayout::new(1, 1).is_err());
    }

    #[test]
    fn phi_at_identity_and_at_the_swap() {
        let layout = SymplecticBlockLayout::new(2, 2).unwrap();
        let p = Potential::new(2.0, 1.0, layout).unwrap();
        let side = 2 * layout.ambient_rank();
        let eye = CMat::identity(side, side);
        assert_relative_eq!(phi_eval(&p, &eye).unwrap(), (3.0f64).exp(), epsilon = 1e-12);

        let swap = swap_involution(layout);
        assert!(sp_group_residual(&swap.c) < 1e-14);
        assert_relative_eq!(phi_eval(&p, &swap.c).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn membership_gate_rejects_non_group_input() {
        let layout = SymplecticBlockLayout::new(1, 2).unwrap();
        let p = Potential::new(2.0, 1.0, layout).unwrap();
        let side = 2 * layout.ambient_rank();
        let bad = CMat::identity(side, side) * C::new(1.1, 0.0);
        assert!(matches!(phi_eval(&p, &bad), Err(Error::Membership(_))));
    }

    #[test]
    fn doubling_requires_isospectral_input() {
        let layout = SymplecticBlockLayout::new(1, 2).unwrap();
        let alg = build_algebra(Family::Symplectic, 1).unwrap();
        let a = sample_jmap(&alg, 1);
        let b = sample_jmap(&alg, 2);
        assert!(matches!(
            double_jmap(&a, &b, layout),
            Err(Error::NotIsospectral(_))
        ));
    }

    #[test]
    fn doubled_metric_is_well_formed() {
        let layout = SymplecticBlockLayout::new(1, 2).unwrap();
        let (a, e) = isospectral_pair(1, 3);
        let sys = double_jmap(&a, &e, layout).unwrap();
        assert_eq!(sys.ambient.n, 4);
        assert!(sys.metric.det_residual() < 1e-10);
        assert!(sys.metric.frame_residual() < 1e-12);
    }

    #[test]
    fn genericity_of_stacked_images() {
        let (a, e) = isospectral_pair(2, 7);
        let gen = doubled_genericity(&a, &e);
        assert!(gen.generic());

        // collapsing the second image to the first kills the plane
        let degenerate = JMap::new(
            Arc::clone(&a.algebra),
            a.j1.clone(),
            a.j1.clone(),
            None,
        )
        .unwrap();
        let gen2 = doubled_genericity(&degenerate, &degenerate);
        assert!(!gen2.stacked_rank_full);
    }

    #[test]
    fn invariance_suite_on_a_small_system() {
        let layout = SymplecticBlockLayout::new(1, 2).unwrap();
        let (a, e) = isospectral_pair(1, 5);
        let sys = double_jmap(&a, &e, layout).unwrap();
        let p = Potential::new(2.0, 1.0, layout).unwrap();
        let report = potential_invariance_suite(&p, &sys, 20, 11).unwrap();
        assert!(
            report.max_violation() < 1e-11,
            "violations: {report:?}"
        );
        assert!(report.pullback_identity < 1e-12);
        assert!(report.phi_differs_from_pullback);
        assert!(report.log_bound_excess == 0.0);
        assert!(report.conformal_min_eigenvalue > 0.0);
        // determinism
        let again = potential_invariance_suite(&p, &sys, 20, 11).unwrap();
        assert_eq!(
            report.max_phi_pullback_gap,
            again.max_phi_pullback_gap
        );
    }
}
