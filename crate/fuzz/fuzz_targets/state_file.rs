#![no_main]

use libfuzzer_sys::fuzz_target;
use qsep::format::{IndexBase, StateFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = StateFile::parse(text) else { return };
    for base in [IndexBase::Zero, IndexBase::One] {
        if let Ok(state) = file.to_pure_state(base) {
            let back = StateFile::from_state(&state, None);
            let again = StateFile::parse(&back.to_json()).expect("own output parses");
            assert_eq!(again, back);
            let _ = qsep::generalized_concurrence(&state);
        }
    }
});
