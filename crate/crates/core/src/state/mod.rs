//! Dense complex tensors for pure states and rank-two mixed states.
//!
//! Amplitudes are stored row-major over the multi-index `(i_1, ..., i_M)`:
//! the last mode varies fastest. All indices are 0-based.

mod density;
pub mod random;

pub use density::{rank2_eigendecompose, DensityMatrix, DEFAULT_RANK_TOL};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Largest supported `total_dim`. Dense density matrices beyond this size
/// stop being desk-scale.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Squared norm below which a tensor is treated as the zero vector.
pub const ZERO_NORM_SQ: f64 = 1e-14;

/// Tolerance on `<E1|E2>` for a rank-two eigenpair.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Tolerance used when checking that a local operator is unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Mode dimensions `(N_1, ..., N_M)` of a multipartite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimensionProfile {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl DimensionProfile {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least 2 modes, got {}",
                dims.len()
            )));
        }
        if let Some((k, &n)) = dims.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::InvalidProfile(format!(
                "mode {k} has dimension {n}, minimum is 2"
            )));
        }
        let mut total = 1usize;
        for &n in &dims {
            total = match total.checked_mul(n) {
                Some(t) if t <= MAX_TOTAL_DIM => t,
                _ => {
                    return Err(Error::ProfileTooLarge {
                        total: total.saturating_mul(n),
                        max: MAX_TOTAL_DIM,
                    })
                }
            };
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self {
            dims,
            strides,
            total,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Row-major position of a multi-index. Panics on out-of-range entries.
    pub fn linear_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.dims.len(), "multi-index arity");
        index
            .iter()
            .zip(&self.dims)
            .zip(&self.strides)
            .map(|((&i, &n), &s)| {
                assert!(i < n, "index {i} out of range for dimension {n}");
                i * s
            })
            .sum()
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in 0..self.dims.len() {
            out[k] = linear / self.strides[k];
            linear %= self.strides[k];
        }
        out
    }

    /// Coordinate of mode `mode` in the multi-index at `linear`.
    pub fn coordinate(&self, linear: usize, mode: usize) -> usize {
        (linear / self.strides[mode]) % self.dims[mode]
    }

    pub fn min_dim(&self) -> usize {
        *self.dims.iter().min().expect("profile has modes")
    }
}

/// Complex amplitude array `a_{i_1 ... i_M}` over a [`DimensionProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    profile: DimensionProfile,
    amp: Vec<C64>,
}

impl CoefficientTensor {
    pub fn new(profile: DimensionProfile, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != profile.total_dim() {
            return Err(Error::ShapeMismatch {
                expected: profile.total_dim(),
                found: amp.len(),
            });
        }
        if let Some(pos) = amp.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { profile, amp })
    }

    pub fn zeros(profile: DimensionProfile) -> Self {
        let amp = vec![C64::new(0.0, 0.0); profile.total_dim()];
        Self { profile, amp }
    }

    /// Outer product of one vector per mode.
    pub fn outer(profile: DimensionProfile, factors: &[Vec<C64>]) -> Result<Self> {
        if factors.len() != profile.modes() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for {} modes",
                factors.len(),
                profile.modes()
            )));
        }
        for (k, (f, &n)) in factors.iter().zip(profile.dims()).enumerate() {
            if f.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "factor {k} has length {}, mode dimension is {n}",
                    f.len()
                )));
            }
        }
        let mut amp = vec![C64::new(1.0, 0.0); profile.total_dim()];
        for (lin, a) in amp.iter_mut().enumerate() {
            for (k, f) in factors.iter().enumerate() {
                *a *= f[profile.coordinate(lin, k)];
            }
        }
        Self::new(profile, amp)
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.amp[self.profile.linear_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: C64) {
        let lin = self.profile.linear_index(index);
        self.amp[lin] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Reorders modes so that new mode `k` is old mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let m = self.profile.modes();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation of {m} modes")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.profile.dims()[p]).collect();
        let profile = DimensionProfile::new(dims)?;
        let mut amp = vec![C64::new(0.0, 0.0); self.amp.len()];
        for (lin, a) in self.amp.iter().enumerate() {
            let old = self.profile.multi_index(lin);
            let new: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
            amp[profile.linear_index(&new)] = *a;
        }
        Self::new(profile, amp)
    }
}

/// Unit-norm [`CoefficientTensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    tensor: CoefficientTensor,
    scale: f64,
}

/// Rescales `tensor` to unit norm.
pub fn make_pure_state(tensor: CoefficientTensor) -> Result<PureState> {
    let norm_sq = tensor.norm_sqr();
    if norm_sq < ZERO_NORM_SQ {
        return Err(Error::AllZeroTensor { norm_sq });
    }
    let scale = norm_sq.sqrt().recip();
    let CoefficientTensor { profile, amp } = tensor;
    let amp = amp.into_iter().map(|a| a * scale).collect();
    Ok(PureState {
        tensor: CoefficientTensor { profile, amp },
        scale,
    })
}

impl PureState {
    pub fn from_amplitudes(profile: DimensionProfile, amp: Vec<C64>) -> Result<Self> {
        make_pure_state(CoefficientTensor::new(profile, amp)?)
    }

    /// Computational basis vector `|index>`.
    pub fn basis(profile: DimensionProfile, index: &[usize]) -> Self {
        let mut t = CoefficientTensor::zeros(profile);
        t.set(index, C64::new(1.0, 0.0));
        make_pure_state(t).expect("basis vector is nonzero")
    }

    pub fn tensor(&self) -> &CoefficientTensor {
        &self.tensor
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.tensor.profile
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.tensor.amp
    }

    /// Factor that was applied to the input tensor to normalize it.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn with_phase(&self, phase: C64) -> PureState {
        let amp = self.tensor.amp.iter().map(|a| a * phase).collect();
        PureState {
            tensor: CoefficientTensor {
                profile: self.tensor.profile.clone(),
                amp,
            },
            scale: self.scale,
        }
    }

    /// Global phase fixed so the largest-magnitude amplitude is real and
    /// positive. Ties go to the lowest linear index.
    pub fn canonical_phase(&self) -> PureState {
        let max = self.tensor.max_abs();
        let anchor = self
            .amplitudes()
            .iter()
            .find(|a| a.norm() >= max * (1.0 - 1e-12))
            .copied()
            .expect("normalized state has a nonzero amplitude");
        self.with_phase(anchor.conj() / anchor.norm())
    }

    pub fn max_imag(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }
}

/// `rho = p |E1><E1| + q |E2><E2|` with orthonormal `E1`, `E2` and `q = 1 - p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTwoState {
    p: f64,
    e1: PureState,
    e2: PureState,
}

impl RankTwoState {
    pub fn new(p: f64, e1: PureState, e2: PureState) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidWeight(p));
        }
        if e1.profile() != e2.profile() {
            return Err(Error::DimensionMismatch(format!(
                "E1 dims {:?} vs E2 dims {:?}",
                e1.profile().dims(),
                e2.profile().dims()
            )));
        }
        let overlap = e1.inner(&e2).norm();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { overlap });
        }
        Ok(Self { p, e1, e2 })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn e1(&self) -> &PureState {
        &self.e1
    }

    pub fn e2(&self) -> &PureState {
        &self.e2
    }

    pub fn profile(&self) -> &DimensionProfile {
        self.e1.profile()
    }

    /// Dense `p P(E1) + q P(E2)`.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_mixture(&[(self.p, &self.e1), (self.q(), &self.e2)])
            .expect("orthonormal eigenpair forms a valid density matrix")
    }
}

/// `|| sum_i w_i P(x_i) - sum_j v_j P(y_j) ||_F` without forming a
/// `D x D` matrix: every vector is expressed in an orthonormal basis of
/// their joint span and the difference is taken entrywise there, so the
/// result stays accurate down to rounding level.
pub fn mixture_distance(lhs: &[(f64, &PureState)], rhs: &[(f64, &PureState)]) -> f64 {
    let states: Vec<&PureState> = lhs.iter().chain(rhs).map(|(_, s)| *s).collect();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for s in &states {
        let mut v = s.amplitudes().to_vec();
        for _pass in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (y, x) in v.iter_mut().zip(b) {
                    *y -= c * x;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let k = basis.len();
    let coords = |s: &PureState| -> Vec<C64> {
        basis
            .iter()
            .map(|b| b.iter().zip(s.amplitudes()).map(|(x, y)| x.conj() * y).sum())
            .collect()
    };
    let mut diff = DMatrix::<C64>::zeros(k, k);
    for (terms, sign) in [(lhs, 1.0), (rhs, -1.0)] {
        for (w, s) in terms {
            let c = coords(s);
            for i in 0..k {
                for j in 0..k {
                    diff[(i, j)] += c[i] * c[j].conj() * (sign * w);
                }
            }
        }
    }
    diff.norm()
}

/// Applies one `N_k x N_k` unitary to each mode: `a -> (U_1 ⊗ ... ⊗ U_M) a`.
pub fn apply_local_unitaries(state: &PureState, unitaries: &[DMatrix<C64>]) -> Result<PureState> {
    let profile = state.profile();
    if unitaries.len() != profile.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} unitaries for {} modes",
            unitaries.len(),
            profile.modes()
        )));
    }
    for (k, (u, &n)) in unitaries.iter().zip(profile.dims()).enumerate() {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "mode {k} needs a {n}x{n} matrix, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let deviation = unitarity_deviation(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { mode: k, deviation });
        }
    }

    let mut amp = state.amplitudes().to_vec();
    for (k, u) in unitaries.iter().enumerate() {
        let stride = profile.strides()[k];
        let n = profile.dims()[k];
        let mut next = vec![C64::new(0.0, 0.0); amp.len()];
        for (lin, a) in amp.iter().enumerate() {
            let i = (lin / stride) % n;
            let base = lin - i * stride;
            for j in 0..n {
                next[base + j * stride] += u[(j, i)] * a;
            }
        }
        amp = next;
    }
    let tensor = CoefficientTensor::new(profile.clone(), amp)?;
    Ok(PureState {
        tensor,
        scale: state.scale,
    })
}

/// `max |U U^† - 1|` entrywise.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let prod = u * u.adjoint();
    let mut dev: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(d: &[usize]) -> DimensionProfile {
        DimensionProfile::new(d.to_vec()).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(DimensionProfile::new(vec![2]).is_err());
        assert!(DimensionProfile::new(vec![2, 1, 3]).is_err());
        assert!(matches!(
            DimensionProfile::new(vec![2; 13]),
            Err(Error::ProfileTooLarge { .. })
        ));
        let p = profile(&[2, 3, 4]);
        assert_eq!(p.total_dim(), 24);
        assert_eq!(p.strides(), &[12, 4, 1]);
        for lin in 0..24 {
            assert_eq!(p.linear_index(&p.multi_index(lin)), lin);
        }
        assert_eq!(p.coordinate(p.linear_index(&[1, 2, 3]), 1), 2);
    }

    #[test]
    fn basis_state_is_normalized() {
        let s = PureState::basis(profile(&[2, 2, 2]), &[0, 0, 0]);
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert!((s.tensor().norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_normalizes_to_inverse_sqrt_two() {
        let mut t = CoefficientTensor::zeros(profile(&[2, 2, 2]));
        t.set(&[0, 0, 0], C64::new(1.0, 0.0));
        t.set(&[1, 1, 1], C64::new(1.0, 0.0));
        let s = make_pure_state(t).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.tensor().get(&[0, 0, 0]).re - h).abs() < 1e-15);
        assert!((s.tensor().get(&[1, 1, 1]).re - h).abs() < 1e-15);
        assert!((s.scale() - h).abs() < 1e-15);
    }

    #[test]
    fn zero_tensor_rejected() {
        let t = CoefficientTensor::zeros(profile(&[2, 2, 2]));
        assert!(matches!(make_pure_state(t), Err(Error::AllZeroTensor { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let mut amp = vec![C64::new(0.0, 0.0); 4];
        amp[2] = C64::new(f64::NAN, 0.0);
        assert_eq!(
            CoefficientTensor::new(profile(&[2, 2]), amp),
            Err(Error::NonFinite(2))
        );
    }

    #[test]
    fn rank_two_state_checks() {
        let p = profile(&[2, 2]);
        let a = PureState::basis(p.clone(), &[0, 0]);
        let b = PureState::basis(p.clone(), &[1, 1]);
        assert!(RankTwoState::new(0.3, a.clone(), b.clone()).is_ok());
        assert!(matches!(
            RankTwoState::new(0.0, a.clone(), b.clone()),
            Err(Error::InvalidWeight(_))
        ));
        let plus = PureState::from_amplitudes(p, vec![C64::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(
            RankTwoState::new(0.5, a, plus),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn identity_unitaries_leave_state_unchanged() {
        let p = profile(&[2, 3]);
        let s = random::random_pure_state(&p, 3);
        let ids = vec![DMatrix::identity(2, 2), DMatrix::identity(3, 3)];
        let t = apply_local_unitaries(&s, &ids).unwrap();
        assert_eq!(s.amplitudes(), t.amplitudes());
    }

    #[test]
    fn phase_gate_multiplies_single_amplitude() {
        let p = profile(&[2, 2, 2]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amp = vec![C64::new(0.0, 0.0); 8];
        amp[0] = C64::new(h, 0.0);
        amp[7] = C64::new(h, 0.0);
        let ghz = PureState::from_amplitudes(p, amp).unwrap();
        let phi = 0.7_f64;
        let mut gate = DMatrix::identity(2, 2);
        gate[(1, 1)] = C64::from_polar(1.0, phi);
        let ops = vec![gate, DMatrix::identity(2, 2), DMatrix::identity(2, 2)];
        let out = apply_local_unitaries(&ghz, &ops).unwrap();
        assert!((out.amplitudes()[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[7] - C64::from_polar(h, phi)).norm() < 1e-15);
        assert!((out.tensor().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_unitary_errors() {
        let p = profile(&[2, 2]);
        let s = PureState::basis(p, &[0, 1]);
        assert!(matches!(
            apply_local_unitaries(&s, &[DMatrix::identity(2, 2)]),
            Err(Error::DimensionMismatch(_))
        ));
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            apply_local_unitaries(&s, &[DMatrix::identity(2, 2), bad]),
            Err(Error::NotUnitary { mode: 1, .. })
        ));
    }

    #[test]
    fn canonical_phase_makes_anchor_real() {
        let p = profile(&[2, 2]);
        let s = random::random_pure_state(&p, 11).with_phase(C64::from_polar(1.0, 2.1));
        let c = s.canonical_phase();
        let anchor = c
            .amplitudes()
            .iter()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        assert!(anchor.im.abs() < 1e-15 && anchor.re > 0.0);
    }

    #[test]
    fn permute_modes_moves_coordinates() {
        let p = profile(&[2, 3, 4]);
        let s = random::random_pure_state(&p, 5);
        let t = s.tensor().permute_modes(&[2, 0, 1]).unwrap();
        assert_eq!(t.profile().dims(), &[4, 2, 3]);
        assert_eq!(t.get(&[3, 1, 2]), s.tensor().get(&[1, 2, 3]));
        assert!(s.tensor().permute_modes(&[0, 0, 1]).is_err());
    }

    #[test]
    fn mixture_distance_matches_dense() {
        let p = profile(&[2, 2]);
        let a = random::random_pure_state(&p, 1);
        let b = random::random_pure_state(&p, 2);
        let c = random::random_pure_state(&p, 3);
        let lhs = DensityMatrix::from_mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
        let rhs = DensityMatrix::from_mixture(&[(1.0, &c)]).unwrap();
        let dense = (lhs.matrix() - rhs.matrix()).norm();
        let fast = mixture_distance(&[(0.3, &a), (0.7, &b)], &[(1.0, &c)]);
        assert!((dense - fast).abs() < 1e-12);
    }
}
