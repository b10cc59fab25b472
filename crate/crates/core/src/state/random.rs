//! Seeded generators for test and sampling workloads.
//!
//! Every `*_with` function draws from a caller-supplied RNG; the seed-based
//! wrappers use `ChaCha8Rng`, so output is identical across platforms.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{make_pure_state, CoefficientTensor, DimensionProfile, PureState};
use crate::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

fn real_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| C64::new(x / norm, 0.0)).collect();
        }
    }
}

pub fn random_pure_state_with<R: Rng + ?Sized>(profile: &DimensionProfile, rng: &mut R) -> PureState {
    let amp = unit_vector(rng, profile.total_dim());
    let t = CoefficientTensor::new(profile.clone(), amp).expect("finite gaussian draw");
    make_pure_state(t).expect("unit vector")
}

pub fn random_product_factors_with<R: Rng + ?Sized>(
    profile: &DimensionProfile,
    rng: &mut R,
) -> Vec<Vec<C64>> {
    profile.dims().iter().map(|&n| unit_vector(rng, n)).collect()
}

pub fn random_product_state_with<R: Rng + ?Sized>(profile: &DimensionProfile, rng: &mut R) -> PureState {
    let factors = random_product_factors_with(profile, rng);
    let t = CoefficientTensor::outer(profile.clone(), &factors).expect("factor shapes match profile");
    make_pure_state(t).expect("outer product of unit vectors")
}

/// Pure state with real amplitudes.
pub fn random_real_state_with<R: Rng + ?Sized>(profile: &DimensionProfile, rng: &mut R) -> PureState {
    let amp = real_unit_vector(rng, profile.total_dim());
    PureState::from_amplitudes(profile.clone(), amp).expect("unit vector")
}

/// Product state with real per-mode factors.
pub fn random_real_product_state_with<R: Rng + ?Sized>(
    profile: &DimensionProfile,
    rng: &mut R,
) -> PureState {
    let factors: Vec<Vec<C64>> = profile.dims().iter().map(|&n| real_unit_vector(rng, n)).collect();
    let t = CoefficientTensor::outer(profile.clone(), &factors).expect("factor shapes match profile");
    make_pure_state(t).expect("outer product of unit vectors")
}

/// Random state orthogonal to `other`: a Gaussian draw with the `other`
/// component projected out (twice, for accuracy).
pub fn random_orthogonal_state_with<R: Rng + ?Sized>(other: &PureState, rng: &mut R) -> PureState {
    loop {
        let mut v: Vec<C64> = (0..other.profile().total_dim()).map(|_| complex_gaussian(rng)).collect();
        for _pass in 0..2 {
            let overlap: C64 = other.amplitudes().iter().zip(&v).map(|(o, x)| o.conj() * x).sum();
            for (x, o) in v.iter_mut().zip(other.amplitudes()) {
                *x -= overlap * o;
            }
        }
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6 {
            let t = CoefficientTensor::new(other.profile().clone(), v).expect("finite gaussian draw");
            return make_pure_state(t).expect("nonzero after projection");
        }
    }
}

/// Haar-like unitary: Gram-Schmidt (two passes) on the columns of a complex
/// Gaussian matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    loop {
        let mut m = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
        let mut ok = true;
        for j in 0..n {
            for _pass in 0..2 {
                for k in 0..j {
                    let proj: C64 = (0..n).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
                    for i in 0..n {
                        let mk = m[(i, k)];
                        m[(i, j)] -= proj * mk;
                    }
                }
            }
            let norm = (0..n).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for i in 0..n {
                m[(i, j)] /= norm;
            }
        }
        if ok {
            return m;
        }
    }
}

pub fn random_local_unitaries_with<R: Rng + ?Sized>(
    profile: &DimensionProfile,
    rng: &mut R,
) -> Vec<DMatrix<C64>> {
    profile.dims().iter().map(|&n| random_unitary_with(n, rng)).collect()
}

pub fn random_pure_state(profile: &DimensionProfile, seed: u64) -> PureState {
    random_pure_state_with(profile, &mut rng(seed))
}

pub fn random_product_state(profile: &DimensionProfile, seed: u64) -> PureState {
    random_product_state_with(profile, &mut rng(seed))
}

pub fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    random_unitary_with(n, &mut rng(seed))
}
