//! The `qsep` command line.
//!
//! Exit codes: 0 success, 2 malformed input, 3 internal consistency failure,
//! 4 rank violation, 5 decomposition requested on an entangled state.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::criteria::{decide_with, maximally_entangled, real_case_deltas, screen_with, SeparabilityVerdict, Witness};
use crate::error::Error;
use crate::family::{coefficient_triple, CoefficientSet, FamilyIndex, DEFAULT_REL_TOL};
use crate::format::{
    ConcurrenceRecord, ConcurrenceReport, DecompositionRecord, FamilyRecord, FormatError, IndexBase,
    InvariantRecord, MixedInput, MixedStateFile, RealCaseRecord, Report, ResidualRecord, SampleSummary,
    SelfCheckRecord, StateFile, ToleranceRecord, WitnessRecord,
};
use crate::invariants::{
    compute_invariants, concurrence_paths, default_separability_tol, generalized_concurrence, Bipartition,
};
use crate::oracle::{eq5_transcription, oracle_pure_separable, ORACLE_MAX_DIM};
use crate::state::{random, rank2_eigendecompose, DensityMatrix, DimensionProfile, PureState, RankTwoState, DEFAULT_RANK_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_RANK: i32 = 4;
pub const EXIT_ENTANGLED: i32 = 5;

const TOOL: &str = "qsep";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Self-check thresholds.
const SELF_CHECK_RECONSTRUCTION_TOL: f64 = 1e-8;
const SELF_CHECK_PRODUCT_TOL: f64 = 1e-8;
const SELF_CHECK_EQ5_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "qsep", version, about = "Separability of rank-two multipartite mixed states")]
pub struct Cli {
    /// Read amplitude indices as 1-based.
    #[arg(long, global = true)]
    pub paper_indices: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMode {
    ProductMix,
    Corollary,
    Generic,
}

impl SampleMode {
    fn name(self) -> &'static str {
        match self {
            SampleMode::ProductMix => "product-mix",
            SampleMode::Corollary => "corollary",
            SampleMode::Generic => "generic",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized concurrence and invariants of a pure state.
    Concurrence {
        #[arg(long)]
        input: PathBuf,
        /// Separability threshold on the concurrence.
        #[arg(long, env = "QSEP_TOL")]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Separability verdict for a rank-two mixed state.
    Check {
        #[arg(long)]
        input: PathBuf,
        /// Relative tolerance of the decision.
        #[arg(long, env = "QSEP_TOL")]
        tol: Option<f64>,
        /// Eigenvalue cutoff relative to the largest eigenvalue.
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Run reconstruction and oracle cross-validation.
        #[arg(long)]
        self_check: bool,
        #[arg(long, value_enum, default_value = "machine")]
        format: OutputFormat,
    },
    /// Write the product decomposition of a separable state.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, env = "QSEP_TOL")]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Run the decision on seeded random ensembles.
    Sample {
        /// Comma-separated mode dimensions, e.g. `2,2,3`.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: SampleMode,
        /// Fixed weight of `E1` (corollary and generic modes).
        #[arg(long)]
        p: Option<f64>,
        /// Per-trial CSV records.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, env = "QSEP_TOL")]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::FormulaMismatch { .. } | Error::NumericalInconsistency(_) => EXIT_INTERNAL,
            Error::NotRankTwo { .. } | Error::RankOne { .. } => EXIT_RANK,
            _ => EXIT_MALFORMED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Failure {
        Failure::new(EXIT_MALFORMED, e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let base = if cli.paper_indices { IndexBase::One } else { IndexBase::Zero };
    match &cli.command {
        Command::Concurrence { input, tol, format } => cmd_concurrence(input, *tol, *format, base, out),
        Command::Check {
            input,
            tol,
            rank_tol,
            self_check,
            format,
        } => {
            let opts = CheckOptions {
                rel_tol: tol.unwrap_or(DEFAULT_REL_TOL),
                rank_tol: *rank_tol,
                self_check: *self_check,
            };
            cmd_check(input, &opts, *format, base, out)
        }
        Command::Decompose {
            input,
            output,
            tol,
            rank_tol,
        } => {
            let opts = CheckOptions {
                rel_tol: tol.unwrap_or(DEFAULT_REL_TOL),
                rank_tol: *rank_tol,
                self_check: false,
            };
            cmd_decompose(input, output, &opts, base, out)
        }
        Command::Sample {
            dims,
            trials,
            seed,
            mode,
            p,
            output,
            tol,
            format,
        } => {
            let spec = SampleSpec {
                dims: dims.clone(),
                trials: *trials,
                seed: *seed,
                mode: *mode,
                p: *p,
                rel_tol: tol.unwrap_or(DEFAULT_REL_TOL),
            };
            cmd_sample(&spec, output.as_deref(), *format, out)
        }
    }
}

fn read_input(path: &Path) -> Result<(String, String), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::new(EXIT_MALFORMED, format!("{}: not valid UTF-8", path.display())))?;
    Ok((text, digest))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

/// Shortest round-trip decimal, the same form the JSON output uses.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float serializes")
    } else {
        x.to_string()
    }
}

fn complex_text(z: [f64; 2]) -> String {
    let sign = if z[1].is_sign_negative() { "-" } else { "+" };
    format!("{}{sign}{}i", num(z[0]), num(z[1].abs()))
}

fn pair(z: crate::C64) -> [f64; 2] {
    [z.re, z.im]
}

fn family_record(f: &FamilyIndex, profile: &DimensionProfile) -> FamilyRecord {
    FamilyRecord {
        bipartition: f.bipartition.members(),
        u: profile.multi_index(f.u),
        v: profile.multi_index(f.v),
    }
}

fn invariant_record(state: &PureState) -> Result<InvariantRecord, Failure> {
    let inv = compute_invariants(state);
    Ok(InvariantRecord {
        i0: inv.i0,
        i_ts: inv.i_ts.iter().map(|(bp, v)| (bp.members(), *v)).collect(),
        concurrence: generalized_concurrence(state)?,
    })
}

fn bipartition_label(members: &[usize], modes: usize) -> String {
    Bipartition::from_members(members, modes)
        .map(|b| b.to_string())
        .unwrap_or_else(|_| format!("{members:?}"))
}

fn cmd_concurrence(
    input: &Path,
    tol: Option<f64>,
    format: OutputFormat,
    base: IndexBase,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (text, digest) = read_input(input)?;
    let state = StateFile::parse(&text)?.to_pure_state(base)?;
    let report = concurrence_report(&state, tol, digest)?;
    match format {
        OutputFormat::Machine => write_out(out, &report.to_json()),
        OutputFormat::Text => {
            let modes = report.dims.len();
            let mut lines = vec![
                format!("dims = {:?}", report.dims),
                format!("C = {}", num(report.concurrence)),
                format!("I_0 = {}", num(report.invariants.i0)),
            ];
            for (members, v) in &report.invariants.i_ts {
                lines.push(format!("I[{}] = {}", bipartition_label(members, modes), num(*v)));
            }
            lines.push(format!("path discrepancy = {}", num(report.path_discrepancy)));
            lines.push(format!("separable = {} (tol {})", report.separable, num(report.tolerance)));
            write_out(out, &lines.join("\n"))
        }
    }
}

/// Concurrence, invariants and the product-state verdict for `state`.
pub fn concurrence_report(state: &PureState, tol: Option<f64>, digest: String) -> Result<ConcurrenceReport, Failure> {
    let invariants = invariant_record(state)?;
    let tolerance = tol.unwrap_or_else(|| default_separability_tol(state));
    Ok(ConcurrenceReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        input_digest: digest,
        timestamp: timestamp(),
        dims: state.profile().dims().to_vec(),
        concurrence: invariants.concurrence,
        path_discrepancy: concurrence_paths(state).discrepancy(),
        separable: invariants.concurrence <= tolerance,
        invariants,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub rel_tol: f64,
    pub rank_tol: f64,
    pub self_check: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            rel_tol: DEFAULT_REL_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            self_check: false,
        }
    }
}

/// The rank-two split of a loaded input. Rank violations carry the spectrum
/// in the message.
pub fn resolve_rank_two(input: &MixedInput, rank_tol: f64) -> Result<RankTwoState, Failure> {
    match input {
        MixedInput::Eigen(r) => Ok(r.clone()),
        MixedInput::Dense(d) => Ok(rank2_eigendecompose(d, rank_tol)?),
    }
}

fn witness_record(w: &Witness, profile: &DimensionProfile) -> WitnessRecord {
    let mut rec = WitnessRecord {
        kind: w.name().into(),
        family: None,
        reference: None,
        residual: None,
        root: None,
        p_prime: None,
        c1: None,
        c2: None,
    };
    match *w {
        Witness::PhaseEquationViolated { family, residual } => {
            rec.family = Some(family_record(&family, profile));
            rec.residual = Some(residual);
        }
        Witness::ProportionalityViolated {
            reference,
            family,
            residual,
        } => {
            rec.reference = Some(family_record(&reference, profile));
            rec.family = Some(family_record(&family, profile));
            rec.residual = Some(residual);
        }
        Witness::DoubleRoot { reference, root } => {
            rec.reference = Some(family_record(&reference, profile));
            rec.root = Some(pair(root));
        }
        Witness::WeightOutOfRange { p_prime } => rec.p_prime = Some(pair(p_prime)),
        Witness::E2SeparableE1Not { family } => rec.family = Some(family_record(&family, profile)),
        Witness::ConcurrenceRatioViolated { c1, c2, .. } => {
            rec.c1 = Some(c1);
            rec.c2 = Some(c2);
        }
    }
    rec
}

fn frobenius_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix()).norm()
}

/// Full report for a loaded mixed state.
pub fn analyze(input: &MixedInput, digest: String, opts: &CheckOptions) -> Result<(Report, SeparabilityVerdict), Failure> {
    let rho = resolve_rank_two(input, opts.rank_tol)?;
    let profile = rho.profile().clone();
    let set = CoefficientSet::compute(rho.e1(), rho.e2());
    let verdict = decide_with(&rho, &set, opts.rel_tol)?;
    let (c1, c2) = set.concurrences();
    let screen = screen_with(&rho, &set, opts.rel_tol);

    let decomposition = verdict.decomposition().map(|d| DecompositionRecord {
        mu1: d.roots.map(|r| pair(r.mu1)),
        mu2: d.roots.map(|r| pair(r.mu2)),
        theta: d.roots.map(|r| r.theta),
        p_prime: d.p_prime,
        e1_prime: StateFile::from_state(&d.e1p, None),
        e2_prime: StateFile::from_state(&d.e2p, None),
    });

    let (eigen, spectrum_tail) = match input {
        MixedInput::Dense(d) => {
            let spectrum = d.spectrum();
            let tail = spectrum[2..].iter().map(|x| x.abs()).fold(0.0, f64::max);
            let trace = spectrum[0] + spectrum[1];
            (
                Some([
                    d.eigen_residual(rho.p() * trace, rho.e1()),
                    d.eigen_residual(rho.q() * trace, rho.e2()),
                ]),
                Some(tail),
            )
        }
        MixedInput::Eigen(_) => (None, None),
    };

    let self_check = if opts.self_check {
        Some(self_check(input, &rho, &verdict, screen.is_none(), opts.rel_tol)?)
    } else {
        None
    };

    let report = Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        input_digest: digest,
        timestamp: timestamp(),
        dims: profile.dims().to_vec(),
        p: rho.p(),
        q: rho.q(),
        verdict: if verdict.is_separable() { "separable" } else { "entangled" }.into(),
        witness: verdict.witness().map(|w| witness_record(w, &profile)),
        decomposition,
        concurrences: ConcurrenceRecord {
            c1,
            c2,
            ratio_screen: match &screen {
                None => "pass".into(),
                Some(_) => "violated".into(),
            },
        },
        invariants_e1: invariant_record(rho.e1())?,
        invariants_e2: invariant_record(rho.e2())?,
        residuals: ResidualRecord {
            eigen,
            spectrum_tail,
            reconstruction: verdict.decomposition().map(|d| d.reconstruction_residual),
            coefficient_scale: set.scale(),
        },
        tolerances: ToleranceRecord {
            rel_tol: opts.rel_tol,
            rank_tol: opts.rank_tol,
        },
        self_check,
    };
    Ok((report, verdict))
}

fn self_check(
    input: &MixedInput,
    rho: &RankTwoState,
    verdict: &SeparabilityVerdict,
    screen_passes: bool,
    rel_tol: f64,
) -> Result<SelfCheckRecord, Failure> {
    let profile = rho.profile();
    let small = profile.total_dim() <= ORACLE_MAX_DIM;
    let mut passed = true;

    let mut dense_reconstruction = None;
    let mut oracle_e1 = None;
    let mut oracle_e2 = None;
    if let (Some(d), true) = (verdict.decomposition(), small) {
        let mix = DensityMatrix::from_mixture(&[(d.p_prime, &d.e1p), (1.0 - d.p_prime, &d.e2p)])?;
        let gap = frobenius_gap(&mix, &input.to_density_matrix());
        passed &= gap <= SELF_CHECK_RECONSTRUCTION_TOL;
        dense_reconstruction = Some(gap);
        let a = oracle_pure_separable(d.e1p.tensor(), SELF_CHECK_PRODUCT_TOL)?;
        let b = oracle_pure_separable(d.e2p.tensor(), SELF_CHECK_PRODUCT_TOL)?;
        passed &= a && b;
        oracle_e1 = Some(a);
        oracle_e2 = Some(b);
    }

    let discrepancy = concurrence_paths(rho.e1())
        .discrepancy()
        .max(concurrence_paths(rho.e2()).discrepancy());
    passed &= discrepancy <= crate::invariants::FORMULA_MISMATCH_TOL;

    let eq5 = if profile.modes() == 3 && small {
        let worst = eq5_max_discrepancy(rho.e1(), rho.e2())?;
        passed &= worst <= SELF_CHECK_EQ5_TOL;
        Some(worst)
    } else {
        None
    };

    let real_case = match real_case_deltas(rho) {
        Ok(deltas) => {
            let separable = deltas.is_separable(rel_tol);
            let agrees = separable == verdict.is_separable();
            passed &= agrees;
            Some(RealCaseRecord {
                delta1: deltas.delta1,
                delta2: deltas.delta2,
                separable,
                agrees,
            })
        }
        Err(Error::NotRealCoefficients { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    // A separable verdict must survive the necessary concurrence condition.
    let screen_consistent = screen_passes || !verdict.is_separable();
    passed &= screen_consistent;

    Ok(SelfCheckRecord {
        dense_reconstruction,
        oracle_e1_prime_product: oracle_e1,
        oracle_e2_prime_product: oracle_e2,
        concurrence_path_discrepancy: discrepancy,
        eq5_max_discrepancy: eq5,
        real_case,
        screen_consistent,
        passed,
    })
}

/// Largest coefficient gap between the literal tripartite transcription and
/// the generic family triples, over every index tuple.
pub fn eq5_max_discrepancy(e1: &PureState, e2: &PureState) -> Result<f64, Failure> {
    let entries = eq5_transcription(e1, e2)?;
    let profile = e1.profile();
    let cuts = [
        Bipartition::from_members(&[0, 1], 3)?,
        Bipartition::from_members(&[0, 2], 3)?,
        Bipartition::from_members(&[0], 3)?,
    ];
    let mut worst: f64 = 0.0;
    for e in &entries {
        let [i, j, k, p, q, m] = e.index;
        let family = FamilyIndex {
            bipartition: cuts[e.s as usize - 1],
            u: profile.linear_index(&[i, j, k]),
            v: profile.linear_index(&[p, q, m]),
        };
        let t = coefficient_triple(e1, e2, family);
        worst = worst
            .max((t.alpha - e.alpha).norm())
            .max((t.beta - e.beta).norm())
            .max((t.gamma - e.gamma).norm());
    }
    Ok(worst)
}

fn load_mixed(path: &Path, base: IndexBase) -> Result<(MixedInput, String), Failure> {
    let (text, digest) = read_input(path)?;
    let input = MixedStateFile::parse(&text)?.load(base)?;
    Ok((input, digest))
}

fn cmd_check(
    input: &Path,
    opts: &CheckOptions,
    format: OutputFormat,
    base: IndexBase,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (mixed, digest) = load_mixed(input, base)?;
    let (report, _) = analyze(&mixed, digest, opts)?;
    match format {
        OutputFormat::Machine => write_out(out, &report.to_json())?,
        OutputFormat::Text => write_out(out, &report_text(&report))?,
    }
    match &report.self_check {
        Some(sc) if !sc.passed => Err(Failure::new(EXIT_INTERNAL, "self-check failed")),
        _ => Ok(()),
    }
}

fn report_text(r: &Report) -> String {
    let modes = r.dims.len();
    let family = |f: &FamilyRecord| {
        format!(
            "{} u={:?} v={:?}",
            bipartition_label(&f.bipartition, modes),
            f.u,
            f.v
        )
    };
    let mut lines = vec![
        format!("dims = {:?}", r.dims),
        format!("p = {}", num(r.p)),
        format!("verdict = {}", r.verdict),
    ];
    if let Some(w) = &r.witness {
        lines.push(format!("witness = {}", w.kind));
        if let Some(f) = &w.family {
            lines.push(format!("  family {}", family(f)));
        }
        if let Some(f) = &w.reference {
            lines.push(format!("  reference {}", family(f)));
        }
        if let Some(x) = w.residual {
            lines.push(format!("  residual {}", num(x)));
        }
    }
    if let Some(d) = &r.decomposition {
        if let (Some(a), Some(b), Some(t)) = (d.mu1, d.mu2, d.theta) {
            lines.push(format!("mu1 = {}", complex_text(a)));
            lines.push(format!("mu2 = {}", complex_text(b)));
            lines.push(format!("theta = {}", num(t)));
        }
        lines.push(format!("p' = {}", num(d.p_prime)));
        for (name, s) in [("E1'", &d.e1_prime), ("E2'", &d.e2_prime)] {
            let terms: Vec<String> = s
                .amplitudes
                .iter()
                .map(|a| format!("({}){:?}", complex_text([a.re, a.im]), a.index))
                .collect();
            lines.push(format!("{name} = {}", terms.join(" + ")));
        }
    }
    lines.push(format!("C1 = {}", num(r.concurrences.c1)));
    lines.push(format!("C2 = {}", num(r.concurrences.c2)));
    lines.push(format!("concurrence ratio screen = {}", r.concurrences.ratio_screen));
    if let Some(x) = r.residuals.reconstruction {
        lines.push(format!("reconstruction residual = {}", num(x)));
    }
    if let Some(sc) = &r.self_check {
        lines.push(format!("self-check = {}", if sc.passed { "passed" } else { "FAILED" }));
    }
    lines.join("\n")
}

fn cmd_decompose(
    input: &Path,
    output: &Path,
    opts: &CheckOptions,
    base: IndexBase,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (mixed, _) = load_mixed(input, base)?;
    let rho = resolve_rank_two(&mixed, opts.rank_tol)?;
    let set = CoefficientSet::compute(rho.e1(), rho.e2());
    let d = match decide_with(&rho, &set, opts.rel_tol)? {
        SeparabilityVerdict::Separable(d) => d,
        SeparabilityVerdict::Entangled(w) => {
            return Err(Failure::new(EXIT_ENTANGLED, format!("state is entangled ({})", w.name())))
        }
    };
    let file = MixedStateFile::from_weighted(&[(d.p_prime, &d.e1p), (1.0 - d.p_prime, &d.e2p)], None);
    std::fs::write(output, file.to_json() + "\n")
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", output.display())))?;
    write_out(
        out,
        &format!(
            "separable: p' = {}, reconstruction residual = {}",
            num(d.p_prime),
            num(d.reconstruction_residual)
        ),
    )
}

/// Parameters of a `sample` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: SampleMode,
    pub p: Option<f64>,
    pub rel_tol: f64,
}

/// One trial of a `sample` run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub p: f64,
    /// `separable`, `entangled` or `error`.
    pub verdict: String,
    /// Witness kind, or the error message.
    pub detail: String,
    pub ground_truth: Option<&'static str>,
    pub c1: f64,
    pub c2: f64,
    pub reconstruction: Option<f64>,
}

impl TrialRecord {
    pub fn agrees(&self) -> Option<bool> {
        self.ground_truth.map(|g| g == self.verdict)
    }
}

fn draw_p<R: Rng>(fixed: Option<f64>, lo: f64, hi: f64, rng: &mut R) -> f64 {
    fixed.unwrap_or_else(|| rng.gen_range(lo..hi))
}

/// Independent ChaCha stream per trial, so results do not depend on the
/// scheduling of the worker pool.
fn run_trial(spec: &SampleSpec, profile: &DimensionProfile, trial: usize) -> TrialRecord {
    let mut rng = random::rng(spec.seed);
    rng.set_stream(trial as u64);
    let (p, ground_truth, rho) = match spec.mode {
        SampleMode::ProductMix => {
            let w = rng.gen_range(0.05..0.95);
            let a = random::random_product_state_with(profile, &mut rng);
            let b = random::random_product_state_with(profile, &mut rng);
            let rho = DensityMatrix::from_mixture(&[(w, &a), (1.0 - w, &b)])
                .and_then(|d| rank2_eigendecompose(&d, DEFAULT_RANK_TOL));
            (w, Some("separable"), rho)
        }
        SampleMode::Corollary => {
            let p = draw_p(spec.p, 0.01, 0.49, &mut rng);
            let e2 = maximally_entangled(profile);
            let e1 = random::random_orthogonal_state_with(&e2, &mut rng);
            let truth = (p < 0.5).then_some("entangled");
            (p, truth, RankTwoState::new(p, e1, e2))
        }
        SampleMode::Generic => {
            let p = draw_p(spec.p, 0.05, 0.95, &mut rng);
            let e1 = random::random_pure_state_with(profile, &mut rng);
            let e2 = random::random_orthogonal_state_with(&e1, &mut rng);
            (p, None, RankTwoState::new(p, e1, e2))
        }
    };
    let mut rec = TrialRecord {
        trial,
        p,
        verdict: "error".into(),
        detail: String::new(),
        ground_truth,
        c1: f64::NAN,
        c2: f64::NAN,
        reconstruction: None,
    };
    let rho = match rho {
        Ok(r) => r,
        Err(e) => {
            rec.detail = e.to_string();
            return rec;
        }
    };
    let set = CoefficientSet::compute(rho.e1(), rho.e2());
    (rec.c1, rec.c2) = set.concurrences();
    match decide_with(&rho, &set, spec.rel_tol) {
        Ok(SeparabilityVerdict::Separable(d)) => {
            rec.verdict = "separable".into();
            rec.reconstruction = Some(d.reconstruction_residual);
        }
        Ok(SeparabilityVerdict::Entangled(w)) => {
            rec.verdict = "entangled".into();
            rec.detail = w.name().into();
        }
        Err(e) => rec.detail = e.to_string(),
    }
    rec
}

/// Runs every trial on the rayon pool; records come back in trial order.
pub fn sample(spec: &SampleSpec) -> Result<(SampleSummary, Vec<TrialRecord>), Failure> {
    let profile = DimensionProfile::new(spec.dims.clone())?;
    if let Some(p) = spec.p {
        if !(p > 0.0 && p < 1.0) {
            return Err(Failure::new(EXIT_MALFORMED, format!("--p {p} not in (0, 1)")));
        }
    }
    if spec.mode == SampleMode::ProductMix && spec.p.is_some() {
        return Err(Failure::new(EXIT_MALFORMED, "--p is not used by product-mix"));
    }
    let records: Vec<TrialRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, &profile, t))
        .collect();
    let count = |v: &str| records.iter().filter(|r| r.verdict == v).count();
    let labelled: Vec<bool> = records.iter().filter_map(TrialRecord::agrees).collect();
    let agreement = (spec.mode != SampleMode::Generic)
        .then(|| (labelled.iter().filter(|&&a| a).count(), labelled.len()));
    let summary = SampleSummary {
        tool: TOOL.into(),
        version: VERSION.into(),
        timestamp: timestamp(),
        mode: spec.mode.name().into(),
        dims: spec.dims.clone(),
        trials: spec.trials,
        seed: spec.seed,
        separable: count("separable"),
        entangled: count("entangled"),
        errors: count("error"),
        agreement,
    };
    Ok((summary, records))
}

/// CSV with one row per trial. Generic mode has no ground-truth columns.
pub fn write_records<W: Write>(sink: W, mode: SampleMode, records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let labelled = mode != SampleMode::Generic;
    let mut header = vec!["trial", "mode", "p", "verdict", "detail"];
    if labelled {
        header.extend(["ground_truth", "agrees"]);
    }
    header.extend(["c1", "c2", "reconstruction"]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.trial.to_string(),
            mode.name().to_string(),
            num(r.p),
            r.verdict.clone(),
            r.detail.clone(),
        ];
        if labelled {
            row.push(r.ground_truth.unwrap_or("").to_string());
            row.push(r.agrees().map(|a| a.to_string()).unwrap_or_default());
        }
        row.push(num(r.c1));
        row.push(num(r.c2));
        row.push(r.reconstruction.map(num).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sample(spec: &SampleSpec, output: Option<&Path>, format: OutputFormat, out: &mut dyn Write) -> Result<(), Failure> {
    let (summary, records) = sample(spec)?;
    if let Some(path) = output {
        let file = std::fs::File::create(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        write_records(file, spec.mode, &records).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    }
    match format {
        OutputFormat::Machine => write_out(
            out,
            &serde_json::to_string_pretty(&summary).expect("summary serializes"),
        )?,
        OutputFormat::Text => {
            let mut lines = vec![
                format!("mode = {}", summary.mode),
                format!("dims = {:?}", summary.dims),
                format!("trials = {}", summary.trials),
                format!("seed = {}", summary.seed),
                format!("separable = {}", summary.separable),
                format!("entangled = {}", summary.entangled),
                format!("errors = {}", summary.errors),
            ];
            if let Some((a, n)) = summary.agreement {
                lines.push(format!("agreement = {a}/{n}"));
            }
            write_out(out, &lines.join("\n"))?;
        }
    }
    if summary.errors > 0 {
        return Err(Failure::new(
            EXIT_INTERNAL,
            format!("{} of {} trials failed", summary.errors, summary.trials),
        ));
    }
    Ok(())
}
