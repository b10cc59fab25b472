#![allow(dead_code)]

use nalgebra::DMatrix;
use qsep::state::random;
use qsep::{CoefficientTensor, DensityMatrix, DimensionProfile, PureState, C64};
use rand::Rng;

pub fn profile(dims: &[usize]) -> DimensionProfile {
    DimensionProfile::new(dims.to_vec()).unwrap()
}

pub fn state(dims: &[usize], entries: &[(&[usize], f64)]) -> PureState {
    let mut t = CoefficientTensor::zeros(profile(dims));
    for (idx, x) in entries {
        t.set(idx, C64::new(*x, 0.0));
    }
    qsep::make_pure_state(t).unwrap()
}

pub fn ghz3() -> PureState {
    state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[1, 1, 1], 1.0)])
}

/// Product state whose mode-0 factor is orthogonal to that of `other`.
pub fn orthogonal_product_with<R: Rng>(other_first: &[C64], p: &DimensionProfile, rng: &mut R) -> (PureState, Vec<C64>) {
    let mut factors = random::random_product_factors_with(p, rng);
    let f = &mut factors[0];
    let c: C64 = other_first.iter().zip(f.iter()).map(|(o, x)| o.conj() * x).sum();
    for (x, o) in f.iter_mut().zip(other_first) {
        *x -= c * o;
    }
    let first = f.clone();
    let t = CoefficientTensor::outer(p.clone(), &factors).unwrap();
    (qsep::make_pure_state(t).unwrap(), first)
}

/// Smallest eigenvalue of the partial transpose over the second mode of a
/// bipartite density matrix.
pub fn partial_transpose_min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let dims = rho.profile().dims();
    assert_eq!(dims.len(), 2);
    let (na, nb) = (dims[0], dims[1]);
    let m = rho.matrix();
    let d = na * nb;
    let pt = DMatrix::from_fn(d, d, |r, c| {
        let (i, j) = (r / nb, r % nb);
        let (k, l) = (c / nb, c % nb);
        m[(i * nb + l, k * nb + j)]
    });
    pt.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
