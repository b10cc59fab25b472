//! Full-separability decisions for rank-two mixed states
//! `rho = p |E1><E1| + (1-p) |E2><E2|` on `H_1 ⊗ ... ⊗ H_M` with arbitrary,
//! possibly unequal, mode dimensions.
//!
//! The pipeline:
//!
//! - [`state`]: dense tensors, density matrices, the rank-two eigensplit and
//!   local unitaries.
//! - [`invariants`]: `I_0`, the biquadratic invariants `I_TS` and the
//!   generalized concurrence, which vanishes exactly on product states.
//! - [`family`]: for every 2x2 minor, the quadratic `alpha λ^2 + beta λ + gamma`
//!   whose roots make `E1 + λ E2` a product vector, and their common-root
//!   analysis.
//! - [`criteria`]: the separability decision, with an explicit two-term
//!   product decomposition or a concrete entanglement witness.
//! - [`oracle`]: brute-force checks that share no code with the above.
//! - [`format`] and [`cli`]: state files, reports and the `qsep` command.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod family;
pub mod format;
pub mod invariants;
pub mod oracle;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use criteria::{
    concurrence_ratio_screen, corollary_threshold, decide, maximally_entangled, real_case_deltas,
    CorollaryOutcome, Decomposition, RealCaseDeltas, SeparabilityVerdict, Witness,
};
pub use error::{Error, Result};
pub use family::{
    analyze_common_roots, coefficient_triple, enumerate_families, CoefficientSet, CoefficientTriple,
    FamilyIndex, RootAnalysis, DEFAULT_REL_TOL,
};
pub use invariants::{
    compute_invariants, extract_product_factors, generalized_concurrence, pure_is_separable,
    Bipartition, InvariantSet,
};
pub use state::{
    apply_local_unitaries, make_pure_state, rank2_eigendecompose, CoefficientTensor, DensityMatrix,
    DimensionProfile, PureState, RankTwoState,
};
