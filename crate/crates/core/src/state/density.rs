use nalgebra::{DMatrix, SymmetricEigen};

use super::{make_pure_state, CoefficientTensor, DimensionProfile, PureState, RankTwoState};
use crate::error::{Error, Result};
use crate::C64;

/// Relative rank threshold: eigenvalues at or below `tol * lambda_max` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const NEGATIVITY_TOL: f64 = 1e-9;

/// Dense `total_dim x total_dim` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    profile: DimensionProfile,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(profile: DimensionProfile, entries: DMatrix<C64>) -> Result<Self> {
        let d = profile.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, profile needs {d}x{d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let mut deviation: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                deviation = deviation.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace: f64 = (0..d).map(|i| entries[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let rho = Self { profile, entries };
        let min_eigenvalue = rho.spectrum().last().copied().unwrap_or(0.0);
        if min_eigenvalue < -NEGATIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(rho)
    }

    /// `sum_i w_i |psi_i><psi_i|`, validated.
    pub fn from_mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty mixture".into()))?;
        let profile = first.1.profile().clone();
        let d = profile.total_dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for (w, psi) in terms {
            if psi.profile() != &profile {
                return Err(Error::DimensionMismatch("mixture terms differ in profile".into()));
            }
            let a = psi.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += a[i] * a[j].conj() * *w;
                }
            }
        }
        Self::new(profile, m)
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Eigenpairs sorted by descending eigenvalue (ties keep solver order).
    fn eigenpairs(&self) -> Vec<(f64, Vec<C64>)> {
        let d = self.profile.total_dim();
        let mut pairs: Vec<(f64, Vec<C64>)> = if self.is_real() {
            let real = self.entries.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            (0..d)
                .map(|k| {
                    let v = eig.eigenvectors.column(k).iter().map(|&x| C64::new(x, 0.0)).collect();
                    (eig.eigenvalues[k], v)
                })
                .collect()
        } else {
            let eig = SymmetricEigen::new(self.entries.clone());
            (0..d)
                .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
                .collect()
        };
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.is_real() {
            self.entries.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
        } else {
            self.entries.clone().symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `|| rho v - lambda v ||_2`.
    pub fn eigen_residual(&self, lambda: f64, v: &PureState) -> f64 {
        let d = self.profile.total_dim();
        let a = v.amplitudes();
        let mut acc = 0.0;
        for i in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..d {
                row += self.entries[(i, j)] * a[j];
            }
            acc += (row - a[i] * lambda).norm_sqr();
        }
        acc.sqrt()
    }
}

/// Splits a numerically rank-two density matrix into `p P(E1) + q P(E2)`
/// with `p >= q`.
///
/// `tol` is relative to the largest eigenvalue. The returned eigenvectors have
/// canonical global phase and `p + q = 1` exactly.
pub fn rank2_eigendecompose(rho: &DensityMatrix, tol: f64) -> Result<RankTwoState> {
    let pairs = rho.eigenpairs();
    let spectrum: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let lmax = spectrum[0];
    let cutoff = tol * lmax.max(f64::MIN_POSITIVE);
    if spectrum.len() < 2 || spectrum[1] <= cutoff {
        return Err(Error::RankOne {
            second: spectrum.get(1).copied().unwrap_or(0.0),
        });
    }
    if spectrum.iter().skip(2).any(|l| l.abs() > cutoff) {
        return Err(Error::NotRankTwo { spectrum });
    }
    let to_state = |v: &[C64]| -> Result<PureState> {
        let t = CoefficientTensor::new(rho.profile.clone(), v.to_vec())?;
        Ok(make_pure_state(t)?.canonical_phase())
    };
    let e1 = to_state(&pairs[0].1)?;
    let e2 = to_state(&pairs[1].1)?;
    let p = spectrum[0] / (spectrum[0] + spectrum[1]);
    RankTwoState::new(p, e1, e2)
}
