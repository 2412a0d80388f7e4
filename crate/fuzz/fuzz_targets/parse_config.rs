#![no_main]

use bgda::io::{emit_config, parse_config};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = emit_config(&cfg).expect("accepted config emits");
        assert_eq!(parse_config(&again).expect("emitted config parses"), cfg);
    }
});
