//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use common::{ghz3, orthogonal_product_with, profile, state};
use qsep::criteria::{decide, maximally_entangled, real_case_deltas, SeparabilityVerdict};
use qsep::family::{family_count, CoefficientSet, DEFAULT_REL_TOL};
use qsep::invariants::{bipartition_count, concurrence_paths, default_separability_tol, Bipartition};
use qsep::oracle::{build_separable_rank2, eq5_transcription, oracle_pure_separable};
use qsep::state::random;
use qsep::{
    apply_local_unitaries, compute_invariants, enumerate_families, generalized_concurrence, pure_is_separable,
    rank2_eigendecompose, DimensionProfile, RankTwoState, C64,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const PURE_PROFILES: [&[usize]; 4] = [&[2, 2, 2], &[2, 2, 3], &[2, 3, 4], &[2, 2, 2, 2]];
const MIXED_PROFILES: [&[usize]; 6] = [&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2], &[2, 2, 3], &[2, 2, 2, 2]];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut disagreements = 0;
    let mut total = 0;
    for (n, dims) in PURE_PROFILES.iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(100 + n as u64);
        for k in 0..2000 {
            let s = if k < 1000 {
                random::random_product_state_with(&p, &mut rng)
            } else {
                random::random_pure_state_with(&p, &mut rng)
            };
            let engine = pure_is_separable(&s, default_separability_tol(&s));
            let oracle = oracle_pure_separable(s.tensor(), 1e-8).unwrap();
            let expected = k < 1000;
            if engine != oracle || engine != expected {
                disagreements += 1;
            }
            total += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        disagreements == 0 && secs < 60.0,
        format!("{disagreements}/{total} disagreements, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let c_ghz = generalized_concurrence(&ghz3()).unwrap();
    let zero_bell = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[0, 1, 1], 1.0)]);
    let c_zb = generalized_concurrence(&zero_bell).unwrap();
    let mut worst: f64 = 0.0;
    for (n, dims) in PURE_PROFILES.iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(200 + n as u64);
        for _ in 0..500 {
            let s = random::random_pure_state_with(&p, &mut rng);
            worst = worst.max(concurrence_paths(&s).discrepancy());
        }
    }
    let ghz_ok = (c_ghz - 3f64.sqrt()).abs() <= 1e-9;
    let zb_ok = (c_zb - 1.0).abs() <= 1e-9;
    let paths_ok = worst <= 1e-9;
    check(
        ghz_ok && zb_ok && paths_ok,
        format!(
            "GHZ C = {c_ghz} ({}), |0>⊗Bell C = {c_zb} vs 1 ({}), path gap {worst:e} ({})",
            verdict(ghz_ok),
            verdict(zb_ok),
            verdict(paths_ok)
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, dims) in PURE_PROFILES.iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(300 + n as u64);
        for _ in 0..200 {
            let s = random::random_pure_state_with(&p, &mut rng);
            let u = random::random_local_unitaries_with(&p, &mut rng);
            let t = apply_local_unitaries(&s, &u).unwrap();
            let (a, b) = (compute_invariants(&s), compute_invariants(&t));
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("max |ΔI_TS| = {worst:e}"))
}

fn criterion_4() -> Outcome {
    let e1 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[0, 1, 1], 1.0)]);
    let e2 = state(&[2, 2, 2], &[(&[0, 0, 0], 1.0), (&[0, 1, 1], -1.0)]);
    let rho = RankTwoState::new(0.5, e1, e2).unwrap();
    let SeparabilityVerdict::Separable(d) = decide(&rho, DEFAULT_REL_TOL).unwrap() else {
        return Err("verdict is Entangled".into());
    };
    let r = d.roots.ok_or("no roots reported")?;
    let roots_ok = ((r.mu1 - C64::new(1.0, 0.0)).norm() < 1e-12 && (r.mu2 + C64::new(1.0, 0.0)).norm() < 1e-12)
        || ((r.mu1 + C64::new(1.0, 0.0)).norm() < 1e-12 && (r.mu2 - C64::new(1.0, 0.0)).norm() < 1e-12);
    let theta_ok = r.theta.abs() < 1e-12;
    let p_ok = (d.p_prime - 0.5).abs() < 1e-12;
    let b000 = qsep::PureState::basis(profile(&[2, 2, 2]), &[0, 0, 0]);
    let b011 = qsep::PureState::basis(profile(&[2, 2, 2]), &[0, 1, 1]);
    let fid = |x: &qsep::PureState, y: &qsep::PureState| x.inner(y).norm();
    let vecs_ok = (fid(&d.e1p, &b000) > 1.0 - 1e-12 && fid(&d.e2p, &b011) > 1.0 - 1e-12)
        || (fid(&d.e1p, &b011) > 1.0 - 1e-12 && fid(&d.e2p, &b000) > 1.0 - 1e-12);
    let res_ok = d.reconstruction_residual <= 1e-10;
    check(
        roots_ok && theta_ok && p_ok && vecs_ok && res_ok,
        format!(
            "roots {}, {}; θ = {}; p' = {}; residual {:e}",
            r.mu1, r.mu2, r.theta, d.p_prime, d.reconstruction_residual
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut wrong = 0;
    let mut total = 0;
    for (n, dims) in MIXED_PROFILES.iter().chain(&[&[2usize, 3, 4][..]]).enumerate() {
        let p = profile(dims);
        let e2 = maximally_entangled(&p);
        let mut rng = random::rng(500 + n as u64);
        for _ in 0..200 {
            let e1 = random::random_orthogonal_state_with(&e2, &mut rng);
            let w = rng.gen_range(0.01..0.49);
            let rho = RankTwoState::new(w, e1, e2.clone()).unwrap();
            if !matches!(decide(&rho, DEFAULT_REL_TOL), Ok(SeparabilityVerdict::Entangled(_))) {
                wrong += 1;
            }
            total += 1;
        }
    }
    check(wrong == 0, format!("{}/{total} Entangled", total - wrong))
}

fn criterion_6() -> Outcome {
    let mut wrong = 0;
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for (n, dims) in MIXED_PROFILES.iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(600 + n as u64);
        for k in 0..300 {
            let factors = random::random_product_factors_with(&p, &mut rng);
            let a = qsep::make_pure_state(qsep::CoefficientTensor::outer(p.clone(), &factors).unwrap()).unwrap();
            let b = if k % 3 == 0 {
                orthogonal_product_with(&factors[0], &p, &mut rng).0
            } else {
                random::random_product_state_with(&p, &mut rng)
            };
            let w = rng.gen_range(0.05..0.95);
            let rho = build_separable_rank2(&a, &b, w).unwrap();
            total += 1;
            match rank2_eigendecompose(&rho, qsep::state::DEFAULT_RANK_TOL).and_then(|r| decide(&r, DEFAULT_REL_TOL)) {
                Ok(SeparabilityVerdict::Separable(d)) => worst = worst.max(d.reconstruction_residual),
                _ => wrong += 1,
            }
        }
    }
    check(
        wrong == 0 && worst <= 1e-8,
        format!("{}/{total} Separable, worst reconstruction {worst:e}", total - wrong),
    )
}

/// Real rank-two states: generic real eigenpairs, mixtures of real product
/// states, and equal mixtures of a product state with its conjugate.
fn real_rank_two<R: Rng>(p: &DimensionProfile, k: usize, rng: &mut R) -> RankTwoState {
    match k % 3 {
        0 => {
            let e1 = random::random_real_state_with(p, rng);
            let raw = random::random_real_state_with(p, rng);
            let c = e1.inner(&raw);
            let amp: Vec<C64> = raw.amplitudes().iter().zip(e1.amplitudes()).map(|(y, x)| y - c * x).collect();
            let e2 = qsep::PureState::from_amplitudes(p.clone(), amp).unwrap();
            RankTwoState::new(rng.gen_range(0.05..0.95), e1, e2).unwrap()
        }
        1 => {
            let a = random::random_real_product_state_with(p, rng);
            let b = random::random_real_product_state_with(p, rng);
            let rho = build_separable_rank2(&a, &b, rng.gen_range(0.05..0.95)).unwrap();
            rank2_eigendecompose(&rho, qsep::state::DEFAULT_RANK_TOL).unwrap()
        }
        _ => {
            let a = random::random_product_state_with(p, rng);
            let conj: Vec<C64> = a.amplitudes().iter().map(|z| z.conj()).collect();
            let b = qsep::PureState::from_amplitudes(p.clone(), conj).unwrap();
            let rho = build_separable_rank2(&a, &b, 0.5).unwrap();
            rank2_eigendecompose(&rho, qsep::state::DEFAULT_RANK_TOL).unwrap()
        }
    }
}

fn criterion_7() -> Outcome {
    let mut mismatches = 0;
    let mut total = 0;
    let mut separable = 0;
    for (n, dims) in [&[2usize, 2, 2][..], &[2, 2, 3], &[2, 2, 2, 2]].iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(700 + n as u64);
        for k in 0..500 {
            let rho = real_rank_two(&p, k, &mut rng);
            let general = decide(&rho, DEFAULT_REL_TOL).map(|v| v.is_separable());
            let real = real_case_deltas(&rho).map(|d| d.is_separable(DEFAULT_REL_TOL));
            total += 1;
            match (general, real) {
                (Ok(a), Ok(b)) if a == b => separable += a as usize,
                _ => mismatches += 1,
            }
        }
    }
    check(
        mismatches == 0,
        format!("{}/{total} identical verdicts ({separable} separable)", total - mismatches),
    )
}

fn criterion_8() -> Outcome {
    let cuts = [vec![0, 1], vec![0, 2], vec![0]];
    let mut worst: f64 = 0.0;
    for (n, dims) in [&[2usize, 2, 2][..], &[2, 2, 3], &[2, 3, 4]].iter().enumerate() {
        let p = profile(dims);
        let mut rng = random::rng(800 + n as u64);
        for _ in 0..34 {
            let e1 = random::random_pure_state_with(&p, &mut rng);
            let e2 = random::random_orthogonal_state_with(&e1, &mut rng);
            for e in eq5_transcription(&e1, &e2).unwrap() {
                let [i, j, k, a, b, c] = e.index;
                let family = qsep::FamilyIndex {
                    bipartition: Bipartition::from_members(&cuts[e.s as usize - 1], 3).unwrap(),
                    u: p.linear_index(&[i, j, k]),
                    v: p.linear_index(&[a, b, c]),
                };
                let t = qsep::coefficient_triple(&e1, &e2, family);
                worst = worst
                    .max((t.alpha - e.alpha).norm())
                    .max((t.beta - e.beta).norm())
                    .max((t.gamma - e.gamma).norm());
            }
        }
    }
    check(worst <= 1e-12, format!("102 eigenpairs, max coefficient gap {worst:e}"))
}

/// All profiles with every dimension >= 2 and total dimension <= `limit`.
fn profiles_up_to(limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![(vec![], 1usize)];
    while let Some((dims, total)) = stack.pop() {
        if dims.len() >= 2 {
            out.push(dims.clone());
        }
        for n in 2..=limit / total.max(1) {
            if total * n <= limit {
                let mut next = dims.clone();
                next.push(n);
                stack.push((next, total * n));
            }
        }
    }
    out
}

fn brute_force_family_count(dims: &[usize]) -> usize {
    let m = dims.len();
    let total: usize = dims.iter().product();
    let digits = |mut x: usize| -> Vec<usize> {
        let mut d = vec![0; m];
        for k in (0..m).rev() {
            d[k] = x % dims[k];
            x /= dims[k];
        }
        d
    };
    let mut seen = std::collections::BTreeSet::new();
    for mask in 1..(1u32 << m) - 1 {
        let canonical = if mask & 1 == 1 { mask } else { !mask & ((1 << m) - 1) };
        for u in 0..total {
            for v in 0..total {
                if u == v {
                    continue;
                }
                let (du, dv) = (digits(u), digits(v));
                let t_differs = (0..m).any(|k| mask >> k & 1 == 1 && du[k] != dv[k]);
                let s_differs = (0..m).any(|k| mask >> k & 1 == 0 && du[k] != dv[k]);
                if t_differs && s_differs {
                    seen.insert((canonical, u.min(v), u.max(v)));
                }
            }
        }
    }
    seen.len()
}

fn criterion_9() -> Outcome {
    for m in 2..=5 {
        let n = Bipartition::all(m).len();
        if n != (1 << (m - 1)) - 1 || bipartition_count(m) != n {
            return Err(format!("M = {m}: {n} classes"));
        }
    }
    let profiles = profiles_up_to(81);
    for dims in &profiles {
        let p = profile(dims);
        let expected = brute_force_family_count(dims);
        let enumerated = enumerate_families(&p).count();
        if enumerated != expected || family_count(&p) != expected {
            return Err(format!("{dims:?}: enumerated {enumerated}, brute force {expected}"));
        }
        if dims.iter().product::<usize>() <= 24 {
            let s = random::random_pure_state(&p, 9);
            if CoefficientSet::compute(&s, &s).triples.len() != expected {
                return Err(format!("{dims:?}: coefficient set size"));
            }
        }
    }
    check(true, format!("classes for M = 2..5, families for {} profiles", profiles.len()))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_qsep");
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env("SOURCE_DATE_EPOCH", "0")
            .env_remove("QSEP_TOL")
            .output()
            .expect("binary runs")
    };
    let mut failures = Vec::new();
    let expect = |failures: &mut Vec<String>, args: &[&str], code: i32| {
        let out = run(args);
        if out.status.code() != Some(code) {
            failures.push(format!("{args:?} exited {:?}, expected {code}", out.status.code()));
        }
        out
    };
    let ghz = format!("{data}/ghz.json");
    let half = format!("{data}/separable_half.json");
    let out = expect(&mut failures, &["concurrence", "--input", &ghz], 0);
    let text = String::from_utf8_lossy(&out.stdout);
    if !text.contains("C = 1.73205080") {
        failures.push("GHZ concurrence missing".into());
    }
    expect(&mut failures, &["concurrence", "--input", &format!("{data}/bad_index.json")], 2);
    expect(&mut failures, &["check", "--input", &format!("{data}/rank3_dense.json")], 4);
    expect(&mut failures, &["check", "--input", "/nonexistent/file.json"], 2);
    expect(&mut failures, &["check", "--bogus-flag"], 2);
    let dec = dir.path().join("decomposed.json");
    let dec_s = dec.to_str().unwrap();
    expect(&mut failures, &["decompose", "--input", &format!("{data}/ghz_mixture.json"), "--output", dec_s], 5);
    expect(&mut failures, &["decompose", "--input", &half, "--output", dec_s], 0);
    // Re-read the decomposition and compare its mixture with the input.
    let a = run(&["check", "--input", &half]);
    let b = run(&["check", "--input", dec_s]);
    let ra = qsep::format::Report::parse(&String::from_utf8_lossy(&a.stdout)).map_err(|e| e.to_string())?;
    let rb = qsep::format::Report::parse(&String::from_utf8_lossy(&b.stdout)).map_err(|e| e.to_string())?;
    if ra.verdict != "separable" || rb.verdict != "separable" {
        failures.push("decomposition round trip verdict".into());
    }
    let input = qsep::format::MixedStateFile::parse(&std::fs::read_to_string(&half).unwrap())
        .unwrap()
        .load(Default::default())
        .unwrap()
        .to_density_matrix();
    let back = qsep::format::MixedStateFile::parse(&std::fs::read_to_string(&dec).unwrap())
        .unwrap()
        .load(Default::default())
        .unwrap()
        .to_density_matrix();
    let gap = (input.matrix() - back.matrix()).norm();
    if gap > 1e-8 {
        failures.push(format!("decomposition reproduces input only to {gap:e}"));
    }
    // Report round trip and determinism.
    let again = run(&["check", "--input", &half]);
    if a.stdout != again.stdout {
        failures.push("check output not deterministic".into());
    }
    if qsep::format::Report::parse(&ra.to_json()).ok().as_ref() != Some(&ra) {
        failures.push("report round trip".into());
    }
    let s1 = run(&["sample", "--dims", "2,2,2", "--trials", "40", "--seed", "3", "--mode", "generic", "--format", "machine"]);
    let s2 = run(&["sample", "--dims", "2,2,2", "--trials", "40", "--seed", "3", "--mode", "generic", "--format", "machine"]);
    if s1.stdout != s2.stdout || s1.status.code() != Some(0) {
        failures.push("sample not deterministic".into());
    }
    let secs = start.elapsed().as_secs_f64();
    if failures.is_empty() {
        Ok(format!("exit codes, round trips and determinism, {secs:.2} s"))
    } else {
        Err(failures.join("; "))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pure-state separability agrees with the unfolding oracle", criterion_1),
        ("concurrence values and path agreement", criterion_2),
        ("local-unitary invariance of I_TS", criterion_3),
        ("worked half/half separable instance", criterion_4),
        ("maximally entangled threshold below 1/2", criterion_5),
        ("product mixtures are found separable", criterion_6),
        ("complex and real-case criteria agree", criterion_7),
        ("tripartite transcription matches family coefficients", criterion_8),
        ("bipartition and family counts", criterion_9),
        ("command-line contract", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{secs:.2} s]", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail} [{secs:.2} s]", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.2} s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
