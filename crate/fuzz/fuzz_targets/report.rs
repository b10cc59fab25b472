#![no_main]

use libfuzzer_sys::fuzz_target;
use qsep::format::{ConcurrenceReport, Report};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::parse(text) {
        let _ = Report::parse(&r.to_json()).expect("own output parses");
    }
    if let Ok(r) = ConcurrenceReport::parse(text) {
        let _ = ConcurrenceReport::parse(&r.to_json()).expect("own output parses");
    }
});
