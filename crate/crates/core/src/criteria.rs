//! Separability decision for `rho = p P(E1) + (1-p) P(E2)`.
//!
//! A separable rank-two state is a mixture of exactly two product vectors
//! `E_i' ∝ E1 + mu_i E2` from its range. `decide` finds the candidate roots
//! `mu_1, mu_2` from the family set, checks the phase relation
//! `gamma = e^{iθ} (1 - 1/p) alpha` on every family, verifies that
//! `z = mu_2 - mu_1` satisfies `z = e^{iθ} z*`, and recovers the weight
//! `p' = mu_2 (1 + |mu_1|^2) / (z - mu_1 mu_2 z*)`. Every `Separable` verdict is
//! re-checked by rebuilding `rho` from the decomposition.

use crate::error::{Error, Result};
use crate::family::{analyze_common_roots, CoefficientSet, FamilyIndex, Inconsistency, RootAnalysis};
use crate::invariants::{default_separability_tol, pure_is_separable};
use crate::state::{make_pure_state, mixture_distance, CoefficientTensor, DimensionProfile, PureState, RankTwoState};
use crate::C64;

/// Tolerance for the recomputed eigenvalue `p = (1 - mu_1 mu_2 z*/z)^{-1}`,
/// which compounds eigensolver and root errors.
pub const P_CONSISTENCY_TOL: f64 = 1e-6;

/// Largest imaginary part tolerated in the recovered weight `p'`.
pub const WEIGHT_IMAG_TOL: f64 = 1e-6;

/// Frobenius bound on `|| p' P(E1') + (1-p') P(E2') - rho ||`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Amplitudes with imaginary part above this are not treated as real.
pub const REAL_AMPLITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableRoots {
    pub mu1: C64,
    pub mu2: C64,
    /// Phase in `gamma = e^{iθ} (1 - 1/p) alpha`, in `(-π, π]`.
    pub theta: f64,
}

/// `rho = p' P(e1p) + (1 - p') P(e2p)` with both vectors fully separable.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `None` when the eigenvectors themselves are already product vectors.
    pub roots: Option<SeparableRoots>,
    pub p_prime: f64,
    pub e1p: PureState,
    pub e2p: PureState,
    pub reconstruction_residual: f64,
}

/// The violated condition certifying entanglement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    PhaseEquationViolated { family: FamilyIndex, residual: f64 },
    ProportionalityViolated {
        reference: FamilyIndex,
        family: FamilyIndex,
        residual: f64,
    },
    DoubleRoot { reference: FamilyIndex, root: C64 },
    WeightOutOfRange { p_prime: C64 },
    E2SeparableE1Not { family: FamilyIndex },
    ConcurrenceRatioViolated { c1: f64, c2: f64, p: f64 },
}

impl Witness {
    pub fn name(&self) -> &'static str {
        match self {
            Witness::PhaseEquationViolated { .. } => "PhaseEquationViolated",
            Witness::ProportionalityViolated { .. } => "ProportionalityViolated",
            Witness::DoubleRoot { .. } => "DoubleRoot",
            Witness::WeightOutOfRange { .. } => "WeightOutOfRange",
            Witness::E2SeparableE1Not { .. } => "E2SeparableE1Not",
            Witness::ConcurrenceRatioViolated { .. } => "ConcurrenceRatioViolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparabilityVerdict {
    Separable(Decomposition),
    Entangled(Witness),
}

impl SeparabilityVerdict {
    pub fn is_separable(&self) -> bool {
        matches!(self, SeparabilityVerdict::Separable(_))
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            SeparabilityVerdict::Separable(d) => Some(d),
            SeparabilityVerdict::Entangled(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SeparabilityVerdict::Separable(_) => None,
            SeparabilityVerdict::Entangled(w) => Some(w),
        }
    }
}

pub fn decide(rho: &RankTwoState, rel_tol: f64) -> Result<SeparabilityVerdict> {
    let set = CoefficientSet::compute(rho.e1(), rho.e2());
    decide_with(rho, &set, rel_tol)
}

/// [`decide`] on precomputed coefficients.
pub fn decide_with(rho: &RankTwoState, set: &CoefficientSet, rel_tol: f64) -> Result<SeparabilityVerdict> {
    let analysis = analyze_common_roots(set, rel_tol);
    let reference = match analysis {
        RootAnalysis::AllZero => {
            return certify(rho, None, rho.p(), rho.e1().clone(), rho.e2().clone());
        }
        RootAnalysis::E1OnlyConstraints { witness, .. } => {
            return Ok(SeparabilityVerdict::Entangled(Witness::E2SeparableE1Not { family: witness }));
        }
        RootAnalysis::Proportional { reference, .. } | RootAnalysis::Inconsistent(
            Inconsistency::NotProportional { reference, .. } | Inconsistency::DoubleRoot { reference, .. },
        ) => reference,
    };

    let p = rho.p();
    // gamma = e^{iθ} (1 - 1/p) alpha, with 1 - 1/p = -k.
    let k = p.recip() - 1.0;
    let scale = set.scale();
    let coef_tol = scale * rel_tol * k.max(1.0);
    let rt = set
        .triples
        .iter()
        .find(|t| t.family == reference)
        .expect("reference family belongs to the set");

    let modulus_residual = (rt.gamma.norm() - k * rt.alpha.norm()).abs();
    if modulus_residual > coef_tol {
        return Ok(SeparabilityVerdict::Entangled(Witness::PhaseEquationViolated {
            family: reference,
            residual: modulus_residual,
        }));
    }
    let ratio = -rt.gamma / rt.alpha;
    let phase = if ratio.norm() > 0.0 {
        ratio / ratio.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let factor = -phase * k;
    let mut worst: Option<(f64, FamilyIndex)> = None;
    for t in &set.triples {
        let r = (t.gamma - factor * t.alpha).norm();
        if r > coef_tol && worst.is_none_or(|(w, _)| r > w) {
            worst = Some((r, t.family));
        }
    }
    if let Some((residual, family)) = worst {
        return Ok(SeparabilityVerdict::Entangled(Witness::PhaseEquationViolated { family, residual }));
    }

    let (mu1, mu2) = match analysis {
        RootAnalysis::Proportional { mu1, mu2, .. } => (mu1, mu2),
        RootAnalysis::Inconsistent(Inconsistency::NotProportional {
            reference,
            family,
            residual,
        }) => {
            return Ok(SeparabilityVerdict::Entangled(Witness::ProportionalityViolated {
                reference,
                family,
                residual,
            }))
        }
        RootAnalysis::Inconsistent(Inconsistency::DoubleRoot { reference, root }) => {
            return Ok(SeparabilityVerdict::Entangled(Witness::DoubleRoot { reference, root }))
        }
        _ => unreachable!("handled above"),
    };

    let (mu1, mu2) = (refine_root(set, mu1), refine_root(set, mu2));

    // z = e^{iθ} z*; symmetric under swapping the roots.
    let z = mu2 - mu1;
    let z_residual = (z - phase * z.conj()).norm();
    if z_residual > rel_tol * (mu1.norm() + mu2.norm()).max(1.0) {
        return Ok(SeparabilityVerdict::Entangled(Witness::PhaseEquationViolated {
            family: reference,
            residual: z_residual,
        }));
    }

    let weight = |a: C64, b: C64| -> C64 {
        let z = b - a;
        b * (1.0 + a.norm_sqr()) / (z - a * b * z.conj())
    };
    let admissible = |w: C64| w.im.abs() <= WEIGHT_IMAG_TOL && w.re > rel_tol && w.re < 1.0 - rel_tol;
    let first = weight(mu1, mu2);
    let (a, b, p_prime) = if admissible(first) {
        (mu1, mu2, first)
    } else {
        let second = weight(mu2, mu1);
        if !admissible(second) {
            return Ok(SeparabilityVerdict::Entangled(Witness::WeightOutOfRange { p_prime: first }));
        }
        (mu2, mu1, second)
    };

    let z = b - a;
    let p_check = (C64::new(1.0, 0.0) - a * b * z.conj() / z).inv();
    if (p_check - C64::new(p, 0.0)).norm() > P_CONSISTENCY_TOL {
        return Err(Error::NumericalInconsistency(format!(
            "root-derived eigenvalue {p_check} differs from input p = {p}"
        )));
    }

    let combine = |mu: C64| -> Result<PureState> {
        let amp = rho
            .e1()
            .amplitudes()
            .iter()
            .zip(rho.e2().amplitudes())
            .map(|(x, y)| x + mu * y)
            .collect();
        make_pure_state(CoefficientTensor::new(rho.profile().clone(), amp)?)
    };
    let roots = SeparableRoots {
        mu1: a,
        mu2: b,
        theta: phase.arg(),
    };
    certify(rho, Some(roots), p_prime.re.clamp(0.0, 1.0), combine(a)?, combine(b)?)
}

/// Gauss-Newton polish of a common root against every family: the reference
/// quadratic alone fixes the roots only to its own conditioning.
fn refine_root(set: &CoefficientSet, mut mu: C64) -> C64 {
    for _ in 0..3 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for t in &set.triples {
            let r = (t.alpha * mu + t.beta) * mu + t.gamma;
            let j = t.alpha * 2.0 * mu + t.beta;
            num += j.conj() * r;
            den += j.norm_sqr();
        }
        if den == 0.0 {
            break;
        }
        let step = num / den;
        mu -= step;
        if step.norm() <= f64::EPSILON * mu.norm().max(1.0) {
            break;
        }
    }
    mu
}

/// Rebuilds `rho` from the decomposition and confirms both vectors are product.
fn certify(
    rho: &RankTwoState,
    roots: Option<SeparableRoots>,
    p_prime: f64,
    e1p: PureState,
    e2p: PureState,
) -> Result<SeparabilityVerdict> {
    let residual = mixture_distance(
        &[(p_prime, &e1p), (1.0 - p_prime, &e2p)],
        &[(rho.p(), rho.e1()), (rho.q(), rho.e2())],
    );
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::NumericalInconsistency(format!(
            "decomposition reconstructs rho only to {residual:e}"
        )));
    }
    for (name, v) in [("E1'", &e1p), ("E2'", &e2p)] {
        if !pure_is_separable(v, default_separability_tol(v)) {
            return Err(Error::NumericalInconsistency(format!("{name} is not a product vector")));
        }
    }
    Ok(SeparabilityVerdict::Separable(Decomposition {
        roots,
        p_prime,
        e1p,
        e2p,
        reconstruction_residual: residual,
    }))
}

/// Sums whose vanishing decides separability when both eigenvectors are
/// real (after canonical phasing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealCaseDeltas {
    /// `sum |gamma - (1-1/p) alpha|^2 + sum_{f<g} |beta_f alpha_g - alpha_f beta_g|^2`.
    pub delta1: f64,
    /// `sum |gamma + (1-1/p) alpha|^2 + sum |beta|^2`.
    pub delta2: f64,
    pub scale: f64,
}

impl RealCaseDeltas {
    pub fn is_separable(&self, rel_tol: f64) -> bool {
        self.delta1.min(self.delta2) <= self.scale * self.scale * rel_tol
    }
}

pub fn real_case_deltas(rho: &RankTwoState) -> Result<RealCaseDeltas> {
    let e1 = rho.e1().canonical_phase();
    let e2 = rho.e2().canonical_phase();
    let max_imag = e1.max_imag().max(e2.max_imag());
    if max_imag > REAL_AMPLITUDE_TOL {
        return Err(Error::NotRealCoefficients { max_imag });
    }
    let set = CoefficientSet::compute(&e1, &e2);
    let k1 = 1.0 - rho.p().recip();
    let t = &set.triples;
    let mut delta1 = 0.0;
    let mut delta2 = 0.0;
    for (i, f) in t.iter().enumerate() {
        delta1 += (f.gamma - f.alpha * k1).norm_sqr();
        delta2 += (f.gamma + f.alpha * k1).norm_sqr() + f.beta.norm_sqr();
        for g in &t[i + 1..] {
            delta1 += (f.beta * g.alpha - f.alpha * g.beta).norm_sqr();
        }
    }
    Ok(RealCaseDeltas {
        delta1,
        delta2,
        scale: set.scale(),
    })
}

/// Necessary condition `p C(E1) = (1 - p) C(E2)` with both concurrences
/// measured over the family set. Returns a witness when it fails and `None`
/// otherwise (which proves nothing).
pub fn concurrence_ratio_screen(rho: &RankTwoState, rel_tol: f64) -> Option<Witness> {
    let set = CoefficientSet::compute(rho.e1(), rho.e2());
    screen_with(rho, &set, rel_tol)
}

pub fn screen_with(rho: &RankTwoState, set: &CoefficientSet, rel_tol: f64) -> Option<Witness> {
    let (c1, c2) = set.concurrences();
    let p = rho.p();
    let gap = (c1 * p - c2 * (1.0 - p)).abs();
    (gap > set.scale() * rel_tol * p.max(1.0 - p)).then_some(Witness::ConcurrenceRatioViolated { c1, c2, p })
}

/// `(1/sqrt N) sum_i |i, i, ..., i>` with `N` the smallest mode dimension.
pub fn maximally_entangled(profile: &DimensionProfile) -> PureState {
    let n = profile.min_dim();
    let mut t = CoefficientTensor::zeros(profile.clone());
    for i in 0..n {
        t.set(&vec![i; profile.modes()], C64::new(1.0, 0.0));
    }
    make_pure_state(t).expect("nonzero")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryOutcome {
    Entangled,
    Inconclusive,
}

/// With `E2` maximally entangled and `E1 ⊥ E2`, every weight `p < 1/2` on
/// `E1` gives an entangled state. No claim is made for `p >= 1/2`.
pub fn corollary_threshold(e2: &PureState, e1: &PureState, p: f64, rel_tol: f64) -> Result<CorollaryOutcome> {
    if e1.profile() != e2.profile() {
        return Err(Error::DimensionMismatch("E1 and E2 profiles differ".into()));
    }
    let canonical = maximally_entangled(e2.profile());
    let fidelity = canonical.inner(e2).norm_sqr();
    if fidelity < 1.0 - 1e-9 {
        return Err(Error::NotMaximallyEntangled { fidelity });
    }
    let overlap = e1.inner(e2).norm();
    if overlap > crate::state::ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidWeight(p));
    }
    Ok(if p < 0.5 - rel_tol {
        CorollaryOutcome::Entangled
    } else {
        CorollaryOutcome::Inconclusive
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::DEFAULT_REL_TOL;
    use crate::state::random;

    fn profile(d: &[usize]) -> DimensionProfile {
        DimensionProfile::new(d.to_vec()).unwrap()
    }

    fn state(dims: &[usize], entries: &[(&[usize], f64)]) -> PureState {
        let mut t = CoefficientTensor::zeros(profile(dims));
        for (idx, x) in entries {
            t.set(idx, C64::new(*x, 0.0));
        }
        make_pure_state(t).unwrap()
    }

    fn half_half() -> RankTwoState {
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[0, 1, 1], 1.0)]);
        let e2 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[0, 1, 1], -1.0)]);
        RankTwoState::new(0.5, e1, e2).unwrap()
    }

    fn ghz() -> PureState {
        state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[1, 1, 1], 1.0)])
    }

    #[test]
    fn worked_separable_instance() {
        let v = decide(&half_half(), DEFAULT_REL_TOL).unwrap();
        let d = v.decomposition().expect("separable");
        let r = d.roots.unwrap();
        assert!((r.mu1 - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((r.mu2 - C64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!(r.theta.abs() < 1e-14);
        assert!((d.p_prime - 0.5).abs() < 1e-14);
        assert!((d.e1p.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((d.e2p.amplitudes()[3].norm() - 1.0).abs() < 1e-14);
        assert!(d.reconstruction_residual < 1e-12);
    }

    #[test]
    fn basis_plus_ghz_is_entangled() {
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 1], 1.0)]);
        let rho = RankTwoState::new(0.3, e1, ghz()).unwrap();
        match decide(&rho, DEFAULT_REL_TOL).unwrap() {
            SeparabilityVerdict::Entangled(Witness::PhaseEquationViolated { .. }) => {}
            other => panic!("{other:?}"),
        }
        // Same state, eigenvectors in descending-weight order.
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 1], 1.0)]);
        let rho = RankTwoState::new(0.7, ghz(), e1).unwrap();
        match decide(&rho, DEFAULT_REL_TOL).unwrap() {
            SeparabilityVerdict::Entangled(Witness::E2SeparableE1Not { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn product_eigenvectors_decompose_to_themselves() {
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0)]);
        let e2 = state(&[2, 2, 2], &[(&[0, 1, 1], 1.0)]);
        let rho = RankTwoState::new(0.4, e1.clone(), e2.clone()).unwrap();
        let v = decide(&rho, DEFAULT_REL_TOL).unwrap();
        let d = v.decomposition().unwrap();
        assert!(d.roots.is_none());
        assert_eq!(d.p_prime, 0.4);
        assert_eq!(d.e1p, e1);
        assert_eq!(d.e2p, e2);
    }

    #[test]
    fn deltas_for_worked_instance() {
        let d = real_case_deltas(&half_half()).unwrap();
        assert!(d.delta1 < 1e-28);
        assert!(d.delta2 > 0.1);
        assert!(d.is_separable(DEFAULT_REL_TOL));
    }

    #[test]
    fn deltas_for_basis_plus_ghz() {
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 1], 1.0)]);
        let d = real_case_deltas(&RankTwoState::new(0.3, e1, ghz()).unwrap()).unwrap();
        assert!(d.delta1 > 0.1 && d.delta2 > 0.1);
        assert!(!d.is_separable(DEFAULT_REL_TOL));
    }

    #[test]
    fn deltas_vanish_for_product_pair() {
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0)]);
        let e2 = state(&[2, 2, 2], &[(&[1, 1, 0], 1.0)]);
        let d = real_case_deltas(&RankTwoState::new(0.6, e1, e2).unwrap()).unwrap();
        // Delta2 keeps sum |beta|^2, which is alive for this pair.
        assert_eq!(d.delta1, 0.0);
        assert!(d.is_separable(DEFAULT_REL_TOL));
    }

    #[test]
    fn deltas_reject_complex_amplitudes() {
        let p = profile(&[2, 2]);
        let e2 = maximally_entangled(&p);
        let e1 = PureState::from_amplitudes(
            p,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.5), C64::new(-1.0, 0.0)],
        )
        .unwrap();
        let rho = RankTwoState::new(0.5, e1, e2).unwrap();
        assert!(matches!(real_case_deltas(&rho), Err(Error::NotRealCoefficients { .. })));
    }

    #[test]
    fn screen_examples() {
        assert!(concurrence_ratio_screen(&half_half(), DEFAULT_REL_TOL).is_none());
        let e1 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0)]);
        let e2 = state(&[2, 2, 2], &[(&[0, 1, 1], 1.0)]);
        assert!(concurrence_ratio_screen(&RankTwoState::new(0.2, e1, e2).unwrap(), DEFAULT_REL_TOL).is_none());
        let p = profile(&[2, 2, 3]);
        let e2 = maximally_entangled(&p);
        let e1 = state(&[2, 2, 3], &[(&[0, 1, 2], 1.0), (&[1, 0, 1], 0.5)]);
        let rho = RankTwoState::new(0.3, e1, e2).unwrap();
        assert!(matches!(
            concurrence_ratio_screen(&rho, DEFAULT_REL_TOL),
            Some(Witness::ConcurrenceRatioViolated { .. })
        ));
    }

    #[test]
    fn corollary_outcomes() {
        let p = profile(&[2, 2, 3]);
        let e2 = maximally_entangled(&p);
        assert!((e2.tensor().get(&[1, 1, 1]).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let e1 = PureState::basis(p.clone(), &[0, 1, 2]);
        assert_eq!(
            corollary_threshold(&e2, &e1, 0.49, DEFAULT_REL_TOL).unwrap(),
            CorollaryOutcome::Entangled
        );
        assert_eq!(
            corollary_threshold(&e2, &e1, 0.5, DEFAULT_REL_TOL).unwrap(),
            CorollaryOutcome::Inconclusive
        );
        let not_max = PureState::basis(p.clone(), &[0, 0, 0]);
        assert!(matches!(
            corollary_threshold(&not_max, &e1, 0.3, DEFAULT_REL_TOL),
            Err(Error::NotMaximallyEntangled { .. })
        ));
        let e1_bad = PureState::basis(p, &[0, 0, 0]);
        assert!(matches!(
            corollary_threshold(&e2, &e1_bad, 0.3, DEFAULT_REL_TOL),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn global_phases_do_not_change_verdict() {
        let p = profile(&[2, 2, 2]);
        let mut rng = random::rng(5);
        for _ in 0..20 {
            let x = random::random_product_state_with(&p, &mut rng);
            let y = random::random_product_state_with(&p, &mut rng);
            let rho = crate::state::DensityMatrix::from_mixture(&[(0.35, &x), (0.65, &y)]).unwrap();
            let r2 = crate::state::rank2_eigendecompose(&rho, 1e-9).unwrap();
            let shifted = RankTwoState::new(
                r2.p(),
                r2.e1().with_phase(C64::from_polar(1.0, 0.4)),
                r2.e2().with_phase(C64::from_polar(1.0, -2.2)),
            )
            .unwrap();
            assert!(decide(&r2, DEFAULT_REL_TOL).unwrap().is_separable());
            assert!(decide(&shifted, DEFAULT_REL_TOL).unwrap().is_separable());
        }
    }
}
