//! Quadratic equation families `alpha λ^2 + beta λ + gamma = 0`, one per
//! nontrivial minor, whose common roots `λ` are exactly the values for which
//! `E1 + λ E2` is fully separable.

use crate::invariants::{minor, Bipartition, Split};
use crate::state::{DimensionProfile, PureState};
use crate::C64;

pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// One minor: a bipartition class plus an unordered pair of linear indices
/// `u < v` that differ on both sides of the cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyIndex {
    pub bipartition: Bipartition,
    pub u: usize,
    pub v: usize,
}

impl FamilyIndex {
    pub fn describe(&self, profile: &DimensionProfile) -> String {
        format!(
            "{} u={:?} v={:?}",
            self.bipartition,
            profile.multi_index(self.u),
            profile.multi_index(self.v)
        )
    }
}

/// Every nontrivial family, ordered by bipartition class, then `(u, v)`.
pub fn enumerate_families(profile: &DimensionProfile) -> impl Iterator<Item = FamilyIndex> + '_ {
    let d = profile.total_dim();
    Bipartition::all(profile.modes()).into_iter().flat_map(move |bp| {
        let split = Split::new(profile, bp);
        (0..d).flat_map(move |u| {
            let split = split.clone();
            (u + 1..d)
                .filter(move |&v| split.nontrivial(u, v))
                .map(move |v| FamilyIndex { bipartition: bp, u, v })
        })
    })
}

/// Closed-form family count:
/// `sum_T N_T (N_T - 1) N_S (N_S - 1) / 2` over the canonical classes.
pub fn family_count(profile: &DimensionProfile) -> usize {
    Bipartition::all(profile.modes())
        .into_iter()
        .map(|bp| {
            let nt: usize = bp.members().iter().map(|&k| profile.dims()[k]).product();
            let ns = profile.total_dim() / nt;
            nt * (nt - 1) * ns * (ns - 1) / 2
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTriple {
    pub family: FamilyIndex,
    /// Minor of `E2`.
    pub alpha: C64,
    /// Symmetric cross term.
    pub beta: C64,
    /// Minor of `E1`.
    pub gamma: C64,
}

impl CoefficientTriple {
    fn max_abs(&self) -> f64 {
        self.alpha.norm().max(self.beta.norm()).max(self.gamma.norm())
    }
}

fn triple_with(e1: &[C64], e2: &[C64], split: &Split, family: FamilyIndex) -> CoefficientTriple {
    let (u, v) = (family.u, family.v);
    let mu = split.mix(u, v);
    let nu = split.mix(v, u);
    CoefficientTriple {
        family,
        alpha: minor(e2, split, u, v),
        beta: e2[u] * e1[v] + e1[u] * e2[v] - e2[mu] * e1[nu] - e1[mu] * e2[nu],
        gamma: minor(e1, split, u, v),
    }
}

/// `(alpha, beta, gamma)` for a single family.
pub fn coefficient_triple(e1: &PureState, e2: &PureState, family: FamilyIndex) -> CoefficientTriple {
    assert_eq!(e1.profile(), e2.profile(), "eigenvectors must share a profile");
    let split = Split::new(e1.profile(), family.bipartition);
    triple_with(e1.amplitudes(), e2.amplitudes(), &split, family)
}

/// All triples of a pair of eigenvectors, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub profile: DimensionProfile,
    pub triples: Vec<CoefficientTriple>,
}

impl CoefficientSet {
    pub fn compute(e1: &PureState, e2: &PureState) -> CoefficientSet {
        assert_eq!(e1.profile(), e2.profile(), "eigenvectors must share a profile");
        let profile = e1.profile().clone();
        let (a1, a2) = (e1.amplitudes(), e2.amplitudes());
        let d = profile.total_dim();
        let mut triples = Vec::with_capacity(family_count(&profile));
        for bp in Bipartition::all(profile.modes()) {
            let split = Split::new(&profile, bp);
            for u in 0..d {
                for v in u + 1..d {
                    if split.nontrivial(u, v) {
                        let family = FamilyIndex { bipartition: bp, u, v };
                        triples.push(triple_with(a1, a2, &split, family));
                    }
                }
            }
        }
        CoefficientSet { profile, triples }
    }

    /// Magnitude reference for residual tests: the largest coefficient
    /// modulus, floored at `1 / total_dim` (the typical size of a minor of a
    /// normalized state) so that all-noise inputs are not compared against
    /// their own noise.
    pub fn scale(&self) -> f64 {
        let floor = 1.0 / self.profile.total_dim() as f64;
        self.triples.iter().map(CoefficientTriple::max_abs).fold(floor, f64::max)
    }

    /// `(sqrt(sum |gamma|^2), sqrt(sum |alpha|^2))`: the concurrences of `E1`
    /// and `E2` measured over the family set.
    pub fn concurrences(&self) -> (f64, f64) {
        let c1 = self.triples.iter().map(|t| t.gamma.norm_sqr()).sum::<f64>().sqrt();
        let c2 = self.triples.iter().map(|t| t.alpha.norm_sqr()).sum::<f64>().sqrt();
        (c1, c2)
    }
}

/// Why the families admit no pair of distinct common roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inconsistency {
    /// Family not proportional to the reference equation.
    NotProportional {
        reference: FamilyIndex,
        family: FamilyIndex,
        residual: f64,
    },
    /// The reference equation has a double root.
    DoubleRoot { reference: FamilyIndex, root: C64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootAnalysis {
    /// Every `alpha` and every `gamma` vanishes: both eigenvectors are product.
    AllZero,
    /// Every `alpha` vanishes but some `gamma` does not; `witness` has the
    /// largest `|gamma|`.
    E1OnlyConstraints { witness: FamilyIndex, gamma: C64 },
    /// All families are multiples of the reference, which has two distinct roots.
    Proportional {
        reference: FamilyIndex,
        mu1: C64,
        mu2: C64,
    },
    Inconsistent(Inconsistency),
}

impl RootAnalysis {
    pub fn reference(&self) -> Option<FamilyIndex> {
        match *self {
            RootAnalysis::Proportional { reference, .. } => Some(reference),
            RootAnalysis::Inconsistent(Inconsistency::NotProportional { reference, .. })
            | RootAnalysis::Inconsistent(Inconsistency::DoubleRoot { reference, .. }) => Some(reference),
            _ => None,
        }
    }
}

/// Roots of `a x^2 + b x + c = 0` (`a != 0`), computed without cancellation:
/// `q = -(b + s sqrt(b^2 - 4ac)) / 2` with the sign `s` that maximizes `|q|`,
/// then `x1 = q / a`, `x2 = c / q`.
pub fn solve_quadratic(a: C64, b: C64, c: C64) -> (C64, C64) {
    let disc = (b * b - a * c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(b + disc * s) * 0.5;
    if q == C64::new(0.0, 0.0) {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    (q / a, c / q)
}

/// Largest `|alpha|`; exact ties go to the smallest family so the choice does
/// not depend on the order of `triples`.
fn reference_triple(triples: &[CoefficientTriple]) -> Option<&CoefficientTriple> {
    triples.iter().reduce(|best, t| {
        let (nb, nt) = (best.alpha.norm(), t.alpha.norm());
        if nt > nb || (nt == nb && t.family < best.family) {
            t
        } else {
            best
        }
    })
}

/// Common-root structure of the whole family set.
///
/// Residuals are compared against `scale * rel_tol` for coefficients and
/// `scale^2 * rel_tol` for the cross products `beta alpha_ref - beta_ref alpha`
/// and `gamma alpha_ref - gamma_ref alpha`.
pub fn analyze_common_roots(set: &CoefficientSet, rel_tol: f64) -> RootAnalysis {
    let scale = set.scale();
    let coef_tol = scale * rel_tol;
    let cross_tol = scale * scale * rel_tol;
    let Some(reference) = reference_triple(&set.triples) else {
        return RootAnalysis::AllZero;
    };

    if reference.alpha.norm() <= coef_tol {
        let worst = set.triples.iter().reduce(|best, t| {
            let (nb, nt) = (best.gamma.norm(), t.gamma.norm());
            if nt > nb || (nt == nb && t.family < best.family) {
                t
            } else {
                best
            }
        });
        return match worst {
            Some(t) if t.gamma.norm() > coef_tol => RootAnalysis::E1OnlyConstraints {
                witness: t.family,
                gamma: t.gamma,
            },
            _ => RootAnalysis::AllZero,
        };
    }

    let (ar, br, gr) = (reference.alpha, reference.beta, reference.gamma);
    let mut worst: Option<(f64, FamilyIndex)> = None;
    for t in &set.triples {
        let r = (t.beta * ar - br * t.alpha).norm().max((t.gamma * ar - gr * t.alpha).norm());
        if r > cross_tol && worst.is_none_or(|(w, f)| r > w || (r == w && t.family < f)) {
            worst = Some((r, t.family));
        }
    }
    if let Some((residual, family)) = worst {
        return RootAnalysis::Inconsistent(Inconsistency::NotProportional {
            reference: reference.family,
            family,
            residual,
        });
    }

    let disc = br * br - ar * gr * 4.0;
    let (mu1, mu2) = solve_quadratic(ar, br, gr);
    if disc.norm() <= cross_tol {
        return RootAnalysis::Inconsistent(Inconsistency::DoubleRoot {
            reference: reference.family,
            root: (mu1 + mu2) * 0.5,
        });
    }
    RootAnalysis::Proportional {
        reference: reference.family,
        mu1,
        mu2,
    }
}
