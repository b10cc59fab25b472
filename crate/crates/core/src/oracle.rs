//! Brute-force cross-checks. Nothing here calls into `invariants` or `family`:
//! index arithmetic is redone locally with explicit loops.

use crate::error::{Error, Result};
use crate::state::{CoefficientTensor, DensityMatrix, PureState};
use crate::C64;

/// Largest `total_dim` the exhaustive oracles accept.
pub const ORACLE_MAX_DIM: usize = 256;

fn guard(total: usize) -> Result<()> {
    if total > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            total,
            limit: ORACLE_MAX_DIM,
        });
    }
    Ok(())
}

/// True iff every 2x2 minor of the mode-`mode` unfolding (an
/// `N_mode x total/N_mode` matrix) is at most `tol * max|a|^2` in modulus.
pub fn unfolding_rank_one(tensor: &CoefficientTensor, mode: usize, tol: f64) -> Result<bool> {
    let dims = tensor.profile().dims();
    let total: usize = dims.iter().product();
    guard(total)?;
    if mode >= dims.len() {
        return Err(Error::DimensionMismatch(format!("mode {mode} out of range")));
    }
    let a = tensor.amplitudes();
    let rows = dims[mode];
    let cols = total / rows;
    // Stride of `mode` in row-major order, and the block size above it.
    let inner: usize = dims[mode + 1..].iter().product();
    let entry = |r: usize, c: usize| -> C64 {
        let hi = c / inner;
        let lo = c % inner;
        a[hi * rows * inner + r * inner + lo]
    };
    let scale = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let limit = tol * scale;
    for r1 in 0..rows {
        for r2 in r1 + 1..rows {
            for c1 in 0..cols {
                for c2 in c1 + 1..cols {
                    let m = entry(r1, c1) * entry(r2, c2) - entry(r1, c2) * entry(r2, c1);
                    if m.norm() > limit {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Product state iff every single-mode unfolding has rank one.
pub fn oracle_pure_separable(tensor: &CoefficientTensor, tol: f64) -> Result<bool> {
    for mode in 0..tensor.profile().modes() {
        if !unfolding_rank_one(tensor, mode, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `weight P(s1) + (1 - weight) P(s2)` for two distinct product states; the
/// result is separable by construction.
pub fn build_separable_rank2(s1: &PureState, s2: &PureState, weight: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidWeight(weight));
    }
    for s in [s1, s2] {
        if !oracle_pure_separable(s.tensor(), 1e-8)? {
            return Err(Error::NotProduct);
        }
    }
    let overlap: C64 = s1
        .amplitudes()
        .iter()
        .zip(s2.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    if overlap.norm() > 1.0 - 1e-12 {
        return Err(Error::IdenticalStates);
    }
    DensityMatrix::from_mixture(&[(weight, s1), (1.0 - weight, s2)])
}

/// One entry of the tripartite equation set: family `s` (1, 2 or 3) at the
/// index tuple `I = (i, j, k, p, q, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq5Entry {
    pub s: u8,
    pub index: [usize; 6],
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

/// Literal six-loop evaluation of the tripartite coefficients, superscript 1
/// on `E1` and 2 on `E2`:
///
/// - `s = 1` swaps the third index: `a_ijk a_pqm - a_ijm a_pqk`
/// - `s = 2` swaps the second: `a_ijk a_pqm - a_iqk a_pjm`
/// - `s = 3` swaps the first: `a_ijk a_pqm - a_pjk a_iqm`
pub fn eq5_transcription(e1: &PureState, e2: &PureState) -> Result<Vec<Eq5Entry>> {
    let dims = e1.profile().dims();
    if dims.len() != 3 {
        return Err(Error::WrongModeCount {
            expected: 3,
            found: dims.len(),
        });
    }
    if e2.profile() != e1.profile() {
        return Err(Error::DimensionMismatch("E1 and E2 profiles differ".into()));
    }
    guard(e1.profile().total_dim())?;
    let (nm, nn, nt) = (dims[0], dims[1], dims[2]);
    let a1 = e1.amplitudes();
    let a2 = e2.amplitudes();
    let at = |a: &[C64], i: usize, j: usize, k: usize| a[(i * nn + j) * nt + k];

    let mut out = Vec::with_capacity(3 * (nm * nn * nt).pow(2));
    for i in 0..nm {
        for j in 0..nn {
            for k in 0..nt {
                for p in 0..nm {
                    for q in 0..nn {
                        for m in 0..nt {
                            let swaps = [
                                ((i, j, m), (p, q, k)),
                                ((i, q, k), (p, j, m)),
                                ((p, j, k), (i, q, m)),
                            ];
                            for (s, ((x0, x1, x2), (y0, y1, y2))) in swaps.into_iter().enumerate() {
                                let alpha = at(a2, i, j, k) * at(a2, p, q, m)
                                    - at(a2, x0, x1, x2) * at(a2, y0, y1, y2);
                                let gamma = at(a1, i, j, k) * at(a1, p, q, m)
                                    - at(a1, x0, x1, x2) * at(a1, y0, y1, y2);
                                let beta = at(a2, i, j, k) * at(a1, p, q, m)
                                    + at(a1, i, j, k) * at(a2, p, q, m)
                                    - at(a2, x0, x1, x2) * at(a1, y0, y1, y2)
                                    - at(a1, x0, x1, x2) * at(a2, y0, y1, y2);
                                out.push(Eq5Entry {
                                    s: s as u8 + 1,
                                    index: [i, j, k, p, q, m],
                                    alpha,
                                    beta,
                                    gamma,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
