#![no_main]

use libfuzzer_sys::fuzz_target;
use qsep::cli::{analyze, CheckOptions};
use qsep::format::{IndexBase, MixedStateFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = MixedStateFile::parse(text) else { return };
    if let Ok(input) = file.load(IndexBase::Zero) {
        if input.profile().total_dim() <= 64 {
            let _ = analyze(&input, String::new(), &CheckOptions::default());
        }
    }
});
