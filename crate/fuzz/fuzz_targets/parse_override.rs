#![no_main]

use bgda::io::{load_config, parse_override};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_override(text);
    let _ = load_config("", &[text.to_string()]);
});
