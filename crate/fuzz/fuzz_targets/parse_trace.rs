#![no_main]

use bgda::experiment::summarize_trace;
use bgda::io::{parse_trace, trace_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = parse_trace(text) {
        let _ = summarize_trace(&trace);
        let written = trace_to_string(&trace).expect("parsed trace writes");
        let again = parse_trace(&written).expect("written trace parses");
        assert_eq!(trace_to_string(&again).unwrap(), written);
    }
});
