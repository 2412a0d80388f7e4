#![no_main]

use bgda::io::{parse_summary, summary_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(summary) = parse_summary(text) {
        let json = summary_to_json(&summary).expect("parsed summary serializes");
        let _ = parse_summary(&json).expect("serialized summary parses");
    }
});
