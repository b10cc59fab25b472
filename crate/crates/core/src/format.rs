//! JSON state files and reports. See `docs/FORMATS.md` for the schema.
//!
//! Amplitude maps list only nonzero entries; indices are 0-based unless the
//! caller asks for [`IndexBase::One`]. Numbers are written in shortest
//! round-trip decimal form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::state::{
    make_pure_state, CoefficientTensor, DensityMatrix, DimensionProfile, PureState, RankTwoState,
    ORTHOGONALITY_TOL,
};
use crate::C64;

/// Tolerance on the sum of the two weights in the eigen form.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    State {
        path: String,
        #[source]
        source: Error,
    },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn state_err(path: impl Into<String>) -> impl FnOnce(Error) -> FormatError {
    let path = path.into();
    move |source| FormatError::State { path, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexBase {
    #[default]
    Zero,
    /// 1-based indices, as written in the literature.
    One,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    pub index: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<AmplitudeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn parse(text: &str) -> Result<StateFile, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }

    /// Dense tensor, with every index checked against `dims`.
    pub fn to_tensor(&self, base: IndexBase) -> Result<CoefficientTensor, FormatError> {
        self.to_tensor_at("", base)
    }

    fn to_tensor_at(&self, prefix: &str, base: IndexBase) -> Result<CoefficientTensor, FormatError> {
        let profile = DimensionProfile::new(self.dims.clone()).map_err(state_err(format!("{prefix}dims")))?;
        let mut amp = vec![C64::new(0.0, 0.0); profile.total_dim()];
        let mut seen = vec![false; profile.total_dim()];
        for (n, entry) in self.amplitudes.iter().enumerate() {
            let path = format!("{prefix}amplitudes[{n}]");
            if entry.index.len() != profile.modes() {
                return Err(invalid(
                    format!("{path}.index"),
                    format!("has {} entries, expected {}", entry.index.len(), profile.modes()),
                ));
            }
            let mut idx = Vec::with_capacity(profile.modes());
            for (k, (&raw, &dim)) in entry.index.iter().zip(profile.dims()).enumerate() {
                let i = match base {
                    IndexBase::Zero => Some(raw),
                    IndexBase::One => raw.checked_sub(1),
                };
                match i {
                    Some(i) if i < dim => idx.push(i),
                    _ => {
                        let range = match base {
                            IndexBase::Zero => format!("0..{}", dim - 1),
                            IndexBase::One => format!("1..{dim}"),
                        };
                        return Err(invalid(
                            format!("{path}.index[{k}]"),
                            format!("value {raw} out of range {range} for mode {k}"),
                        ));
                    }
                }
            }
            if !entry.re.is_finite() || !entry.im.is_finite() {
                return Err(invalid(path, "non-finite amplitude"));
            }
            let lin = profile.linear_index(&idx);
            if std::mem::replace(&mut seen[lin], true) {
                return Err(invalid(path, format!("duplicate index {:?}", entry.index)));
            }
            amp[lin] = C64::new(entry.re, entry.im);
        }
        CoefficientTensor::new(profile, amp).map_err(state_err(format!("{prefix}amplitudes")))
    }

    /// Normalized state.
    pub fn to_pure_state(&self, base: IndexBase) -> Result<PureState, FormatError> {
        self.to_pure_state_at("", base)
    }

    fn to_pure_state_at(&self, prefix: &str, base: IndexBase) -> Result<PureState, FormatError> {
        let tensor = self.to_tensor_at(prefix, base)?;
        make_pure_state(tensor).map_err(state_err(format!("{prefix}amplitudes")))
    }

    /// Zero amplitudes are omitted; indices are written 0-based.
    pub fn from_state(state: &PureState, label: Option<String>) -> StateFile {
        let profile = state.profile();
        let amplitudes = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(lin, a)| AmplitudeEntry {
                index: profile.multi_index(lin),
                re: a.re,
                im: a.im,
            })
            .collect();
        StateFile {
            dims: profile.dims().to_vec(),
            amplitudes,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedState {
    pub weight: f64,
    pub state: StateFile,
}

/// Either `{ "eigen": [two weighted states] }` or
/// `{ "dims": [...], "dense": [[re, im], ...] }` (row-major, `D^2` entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedStateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<Vec<WeightedState>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A loaded mixed state before any eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum MixedInput {
    /// Two orthonormal states with weights in `(0, 1)`: used as given, with
    /// `p` the weight of the first entry.
    Eigen(RankTwoState),
    /// Everything else; the rank-two split happens downstream.
    Dense(DensityMatrix),
}

impl MixedInput {
    pub fn profile(&self) -> &DimensionProfile {
        match self {
            MixedInput::Eigen(r) => r.profile(),
            MixedInput::Dense(d) => d.profile(),
        }
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        match self {
            MixedInput::Eigen(r) => r.to_density_matrix(),
            MixedInput::Dense(d) => d.clone(),
        }
    }
}

impl MixedStateFile {
    pub fn parse(text: &str) -> Result<MixedStateFile, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mixed state file serializes")
    }

    pub fn from_weighted(terms: &[(f64, &PureState)], label: Option<String>) -> MixedStateFile {
        MixedStateFile {
            eigen: Some(
                terms
                    .iter()
                    .map(|(w, s)| WeightedState {
                        weight: *w,
                        state: StateFile::from_state(s, None),
                    })
                    .collect(),
            ),
            dims: None,
            dense: None,
            label,
        }
    }

    pub fn from_density(rho: &DensityMatrix, label: Option<String>) -> MixedStateFile {
        let m = rho.matrix();
        let d = m.nrows();
        let dense = (0..d * d).map(|n| {
            let z = m[(n / d, n % d)];
            [z.re, z.im]
        });
        MixedStateFile {
            eigen: None,
            dims: Some(rho.profile().dims().to_vec()),
            dense: Some(dense.collect()),
            label,
        }
    }

    pub fn load(&self, base: IndexBase) -> Result<MixedInput, FormatError> {
        match (&self.eigen, &self.dims, &self.dense) {
            (Some(terms), None, None) => load_eigen(terms, base),
            (None, Some(dims), Some(dense)) => load_dense(dims, dense),
            (None, _, None) | (None, None, _) => Err(invalid(
                "$",
                "expected either \"eigen\" or both \"dims\" and \"dense\"",
            )),
            _ => Err(invalid("$", "\"eigen\" cannot be combined with \"dims\"/\"dense\"")),
        }
    }
}

fn load_eigen(terms: &[WeightedState], base: IndexBase) -> Result<MixedInput, FormatError> {
    if terms.len() != 2 {
        return Err(invalid("eigen", format!("expected 2 entries, found {}", terms.len())));
    }
    let mut states = Vec::with_capacity(2);
    for (n, t) in terms.iter().enumerate() {
        if !t.weight.is_finite() || t.weight < 0.0 || t.weight > 1.0 {
            return Err(invalid(format!("eigen[{n}].weight"), format!("{} not in [0, 1]", t.weight)));
        }
        states.push(t.state.to_pure_state_at(&format!("eigen[{n}].state."), base)?);
    }
    let sum = terms[0].weight + terms[1].weight;
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(invalid("eigen", format!("weights sum to {sum}, expected 1")));
    }
    if states[0].profile() != states[1].profile() {
        return Err(invalid("eigen[1].state.dims", "differs from eigen[0].state.dims"));
    }
    let (w1, w2) = (terms[0].weight, 1.0 - terms[0].weight);
    let orthogonal = states[0].inner(&states[1]).norm() <= ORTHOGONALITY_TOL;
    if orthogonal && w1 > 0.0 && w2 > 0.0 {
        let mut it = states.into_iter();
        let (e1, e2) = (it.next().unwrap(), it.next().unwrap());
        return RankTwoState::new(w1, e1, e2).map(MixedInput::Eigen).map_err(state_err("eigen"));
    }
    DensityMatrix::from_mixture(&[(w1, &states[0]), (w2, &states[1])])
        .map(MixedInput::Dense)
        .map_err(state_err("eigen"))
}

fn load_dense(dims: &[usize], dense: &[[f64; 2]]) -> Result<MixedInput, FormatError> {
    let profile = DimensionProfile::new(dims.to_vec()).map_err(state_err("dims"))?;
    let d = profile.total_dim();
    if dense.len() != d * d {
        return Err(invalid(
            "dense",
            format!("expected {} entries for a {d}x{d} matrix, found {}", d * d, dense.len()),
        ));
    }
    if let Some(n) = dense.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(invalid(format!("dense[{n}]"), "non-finite entry"));
    }
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        let z = dense[i * d + j];
        C64::new(z[0], z[1])
    });
    DensityMatrix::new(profile, m).map(MixedInput::Dense).map_err(state_err("dense"))
}

/// A multi-index family as written in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    /// Modes in `T` (the side containing mode 0).
    pub bipartition: Vec<usize>,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<FamilyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub mu1: Option<[f64; 2]>,
    pub mu2: Option<[f64; 2]>,
    pub theta: Option<f64>,
    pub p_prime: f64,
    pub e1_prime: StateFile,
    pub e2_prime: StateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub i0: f64,
    /// `(T members, I_TS)` per bipartition class.
    pub i_ts: Vec<(Vec<usize>, f64)>,
    pub concurrence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceRecord {
    /// `sqrt(sum |gamma|^2)` over the family set.
    pub c1: f64,
    /// `sqrt(sum |alpha|^2)` over the family set.
    pub c2: f64,
    pub ratio_screen: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    /// `||rho v - lambda v||` for the two eigenvectors, when `rho` came in dense.
    pub eigen: Option<[f64; 2]>,
    pub spectrum_tail: Option<f64>,
    pub reconstruction: Option<f64>,
    pub coefficient_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub rel_tol: f64,
    pub rank_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheckRecord {
    pub dense_reconstruction: Option<f64>,
    pub oracle_e1_prime_product: Option<bool>,
    pub oracle_e2_prime_product: Option<bool>,
    pub concurrence_path_discrepancy: f64,
    pub eq5_max_discrepancy: Option<f64>,
    pub real_case: Option<RealCaseRecord>,
    pub screen_consistent: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealCaseRecord {
    pub delta1: f64,
    pub delta2: f64,
    pub separable: bool,
    pub agrees: bool,
}

/// Result of `qsep check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub timestamp: u64,
    pub dims: Vec<usize>,
    pub p: f64,
    pub q: f64,
    pub verdict: String,
    pub witness: Option<WitnessRecord>,
    pub decomposition: Option<DecompositionRecord>,
    pub concurrences: ConcurrenceRecord,
    pub invariants_e1: InvariantRecord,
    pub invariants_e2: InvariantRecord,
    pub residuals: ResidualRecord,
    pub tolerances: ToleranceRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_check: Option<SelfCheckRecord>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn parse(text: &str) -> Result<Report, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Result of `qsep concurrence`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceReport {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub timestamp: u64,
    pub dims: Vec<usize>,
    pub concurrence: f64,
    pub invariants: InvariantRecord,
    pub path_discrepancy: f64,
    pub separable: bool,
    pub tolerance: f64,
}

impl ConcurrenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn parse(text: &str) -> Result<ConcurrenceReport, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Aggregate of a `qsep sample` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub tool: String,
    pub version: String,
    pub timestamp: u64,
    pub mode: String,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub separable: usize,
    pub entangled: usize,
    pub errors: usize,
    /// `(agreeing, labelled)` when the mode has a ground truth.
    pub agreement: Option<(usize, usize)>,
}
