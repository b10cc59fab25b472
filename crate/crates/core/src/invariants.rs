//! Local-unitary invariants, the generalized concurrence and the pure-state
//! full-separability test.
//!
//! For a bipartition `T|S` of the modes and two multi-indices `u`, `v`, the
//! hybrid index `mix(T<-u, S<-v)` takes `u`'s coordinates on the modes of `T`
//! and `v`'s on the modes of `S`. All four hybrid amplitudes of a 2x2 minor
//! are built from this one construction.

use crate::error::{Error, Result};
use crate::state::{CoefficientTensor, DimensionProfile, PureState};
use crate::C64;

/// Disagreement between the two concurrence routes (squared form) that is
/// reported as an implementation fault.
pub const FORMULA_MISMATCH_TOL: f64 = 1e-7;

/// A nonempty proper subset `T` of the modes, stored as the representative
/// that contains mode 0 (`T` and its complement define the same minors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    mask: u32,
    modes: u8,
}

/// Number of bipartition classes for `modes` modes: `2^(M-1) - 1`.
pub fn bipartition_count(modes: usize) -> usize {
    (1usize << (modes - 1)) - 1
}

impl Bipartition {
    /// All canonical classes, ordered by bitmask.
    pub fn all(modes: usize) -> Vec<Bipartition> {
        assert!((2..=31).contains(&modes), "unsupported mode count {modes}");
        (0..bipartition_count(modes) as u32)
            .map(|m| Bipartition {
                mask: (m << 1) | 1,
                modes: modes as u8,
            })
            .collect()
    }

    /// Class of the subset `members`; a subset without mode 0 is replaced by
    /// its complement.
    pub fn from_members(members: &[usize], modes: usize) -> Result<Bipartition> {
        if !(2..=31).contains(&modes) {
            return Err(Error::InvalidProfile(format!("unsupported mode count {modes}")));
        }
        let mut mask = 0u32;
        for &k in members {
            if k >= modes {
                return Err(Error::DimensionMismatch(format!("mode {k} out of range")));
            }
            mask |= 1 << k;
        }
        let full = (1u32 << modes) - 1;
        if mask == 0 || mask == full {
            return Err(Error::DimensionMismatch("bipartition must be nonempty and proper".into()));
        }
        if mask & 1 == 0 {
            mask = full & !mask;
        }
        Ok(Bipartition {
            mask,
            modes: modes as u8,
        })
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.mask >> mode & 1 == 1
    }

    /// Modes in `T`.
    pub fn members(&self) -> Vec<usize> {
        (0..self.modes as usize).filter(|&k| self.contains(k)).collect()
    }

    /// Modes in `S`.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.modes as usize).filter(|&k| !self.contains(k)).collect()
    }

    /// Position within [`Bipartition::all`].
    pub fn class_index(&self) -> usize {
        (self.mask >> 1) as usize
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: Vec<usize>| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(self.members()), join(self.complement()))
    }
}

/// Per-linear-index offsets of the `T` and `S` coordinates, so that
/// `mix(T<-u, S<-v) = t[u] + s[v]`.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub t: Vec<usize>,
    pub s: Vec<usize>,
}

impl Split {
    pub fn new(profile: &DimensionProfile, bp: Bipartition) -> Split {
        let d = profile.total_dim();
        let mut t = vec![0; d];
        let mut s = vec![0; d];
        for lin in 0..d {
            let tp: usize = (0..profile.modes())
                .filter(|&k| bp.contains(k))
                .map(|k| profile.coordinate(lin, k) * profile.strides()[k])
                .sum();
            t[lin] = tp;
            s[lin] = lin - tp;
        }
        Split { t, s }
    }

    #[inline]
    pub fn mix(&self, u: usize, v: usize) -> usize {
        self.t[u] + self.s[v]
    }

    /// The minor for `(u, v)` is identically zero when `u` and `v` agree on
    /// all of `T` or all of `S`.
    #[inline]
    pub fn nontrivial(&self, u: usize, v: usize) -> bool {
        self.t[u] != self.t[v] && self.s[u] != self.s[v]
    }
}

/// `a[u] a[v] - a[mix(T<-u,S<-v)] a[mix(T<-v,S<-u)]`.
#[inline]
pub(crate) fn minor(a: &[C64], split: &Split, u: usize, v: usize) -> C64 {
    a[u] * a[v] - a[split.mix(u, v)] * a[split.mix(v, u)]
}

/// `I_0` and the `2^(M-1) - 1` biquadratic invariants `I_TS`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    pub i0: f64,
    pub i_ts: Vec<(Bipartition, f64)>,
    /// Largest imaginary residue seen across the `I_TS` sums.
    pub max_imag_residue: f64,
}

impl InvariantSet {
    pub fn values(&self) -> Vec<f64> {
        self.i_ts.iter().map(|(_, v)| *v).collect()
    }

    /// `2 (d I_0^2 - sum I_TS)`, the squared concurrence by the invariant route.
    pub fn concurrence_sq(&self) -> f64 {
        let d = self.i_ts.len() as f64;
        2.0 * (d * self.i0 * self.i0 - self.i_ts.iter().map(|(_, v)| v).sum::<f64>())
    }
}

pub fn compute_invariants(state: &PureState) -> InvariantSet {
    invariants_of(state.tensor())
}

pub(crate) fn invariants_of(tensor: &CoefficientTensor) -> InvariantSet {
    let profile = tensor.profile();
    let a = tensor.amplitudes();
    let d = profile.total_dim();
    let i0 = a.iter().map(|z| z.norm_sqr()).sum();
    let mut max_imag_residue: f64 = 0.0;
    let i_ts = Bipartition::all(profile.modes())
        .into_iter()
        .map(|bp| {
            let split = Split::new(profile, bp);
            let mut acc = C64::new(0.0, 0.0);
            for u in 0..d {
                if a[u] == C64::new(0.0, 0.0) {
                    continue;
                }
                for v in 0..d {
                    acc += a[u] * a[split.mix(u, v)].conj() * a[v] * a[split.mix(v, u)].conj();
                }
            }
            max_imag_residue = max_imag_residue.max(acc.im.abs());
            (bp, acc.re)
        })
        .collect();
    InvariantSet {
        i0,
        i_ts,
        max_imag_residue,
    }
}

/// Both evaluations of the squared generalized concurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrencePaths {
    /// Sum of `|minor|^2` over all ordered index pairs and bipartition classes.
    pub minor_sum_sq: f64,
    /// `2 (d I_0^2 - sum I_TS)`.
    pub invariant_sq: f64,
}

impl ConcurrencePaths {
    pub fn discrepancy(&self) -> f64 {
        (self.minor_sum_sq - self.invariant_sq).abs()
    }
}

/// Squared minor sum. Each unordered nontrivial pair stands for the two
/// ordered pairs `(u, v)`, `(v, u)`, which share the same minor.
pub(crate) fn minor_sum_sq(tensor: &CoefficientTensor) -> f64 {
    let profile = tensor.profile();
    let a = tensor.amplitudes();
    let d = profile.total_dim();
    let mut total = 0.0;
    for bp in Bipartition::all(profile.modes()) {
        let split = Split::new(profile, bp);
        for u in 0..d {
            for v in u + 1..d {
                if split.nontrivial(u, v) {
                    total += 2.0 * minor(a, &split, u, v).norm_sqr();
                }
            }
        }
    }
    total
}

pub fn concurrence_paths(state: &PureState) -> ConcurrencePaths {
    ConcurrencePaths {
        minor_sum_sq: minor_sum_sq(state.tensor()),
        invariant_sq: compute_invariants(state).concurrence_sq(),
    }
}

/// Generalized concurrence `C = sqrt(sum |a_TS a_T'S' - a_TS' a_T'S|^2)`,
/// cross-checked against the invariant form.
pub fn generalized_concurrence(state: &PureState) -> Result<f64> {
    let paths = concurrence_paths(state);
    if paths.discrepancy() > FORMULA_MISMATCH_TOL {
        return Err(Error::FormulaMismatch {
            minor_sum: paths.minor_sum_sq,
            invariant_form: paths.invariant_sq,
        });
    }
    Ok(paths.minor_sum_sq.sqrt())
}

/// Scale-aware default: `1e-9 * max(1, max|a|^2 * total_dim)`.
pub fn default_separability_tol(state: &PureState) -> f64 {
    let m = state.tensor().max_abs();
    1e-9 * (m * m * state.profile().total_dim() as f64).max(1.0)
}

/// Fully separable iff the generalized concurrence is at most `tol`.
pub fn pure_is_separable(state: &PureState, tol: f64) -> bool {
    minor_sum_sq(state.tensor()).sqrt() <= tol
}

/// One unit vector per mode whose outer product reproduces the state's
/// amplitudes. The state's global phase is carried by the first factor.
pub fn extract_product_factors(state: &PureState, tol: f64) -> Result<Vec<Vec<C64>>> {
    let concurrence = minor_sum_sq(state.tensor()).sqrt();
    if concurrence > tol {
        return Err(Error::NotSeparable { concurrence });
    }
    let profile = state.profile();
    let a = state.amplitudes();
    let anchor = (0..a.len())
        .fold(0, |best, i| if a[i].norm() > a[best].norm() { i } else { best });
    let mut factors = Vec::with_capacity(profile.modes());
    for k in 0..profile.modes() {
        let stride = profile.strides()[k];
        let pinned = anchor - profile.coordinate(anchor, k) * stride;
        let fiber: Vec<C64> = (0..profile.dims()[k]).map(|i| a[pinned + i * stride]).collect();
        let norm = fiber.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let anchor_phase = {
            let z = fiber[profile.coordinate(anchor, k)];
            z.conj() / z.norm()
        };
        factors.push(fiber.into_iter().map(|z| z * anchor_phase / norm).collect::<Vec<_>>());
    }
    let global = a[anchor] / a[anchor].norm();
    for z in factors[0].iter_mut() {
        *z *= global;
    }
    Ok(factors)
}
