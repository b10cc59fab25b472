//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets.

use std::path::PathBuf;

use qsep::cli::{analyze, CheckOptions};
use qsep::format::{ConcurrenceReport, IndexBase, MixedStateFile, Report, StateFile};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fuzz", "corpus", target].iter().collect();
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {}", dir.display());
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

#[test]
fn state_file_seeds() {
    let mut loaded = 0;
    for (_, text) in corpus("state_file") {
        let file = StateFile::parse(&text).unwrap();
        if let Ok(state) = file.to_pure_state(IndexBase::Zero) {
            loaded += 1;
            let back = StateFile::from_state(&state, None);
            assert_eq!(StateFile::parse(&back.to_json()).unwrap(), back);
        }
    }
    assert!(loaded >= 3);
}

#[test]
fn mixed_state_file_seeds() {
    let mut verdicts = Vec::new();
    for (path, text) in corpus("mixed_state_file") {
        let input = MixedStateFile::parse(&text).unwrap().load(IndexBase::Zero).unwrap();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        verdicts.push((name, analyze(&input, String::new(), &CheckOptions::default()).map(|(r, _)| r.verdict)));
    }
    for (name, v) in verdicts {
        match name.as_str() {
            "separable_half" => assert_eq!(v.unwrap(), "separable"),
            "ghz_mixture" => assert_eq!(v.unwrap(), "entangled"),
            "rank3_dense" => assert_eq!(v.unwrap_err().code, qsep::cli::EXIT_RANK),
            _ => {}
        }
    }
}

#[test]
fn report_seeds() {
    for (path, text) in corpus("report") {
        match Report::parse(&text) {
            Ok(r) => assert_eq!(Report::parse(&r.to_json()).unwrap(), r),
            Err(_) => {
                let r = ConcurrenceReport::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                assert_eq!(ConcurrenceReport::parse(&r.to_json()).unwrap(), r);
            }
        }
    }
}
