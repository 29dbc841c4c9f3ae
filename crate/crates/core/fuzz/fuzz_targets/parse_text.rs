#![no_main]

use libfuzzer_sys::fuzz_target;
use powerset_ptrace::io::{parse_text, to_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = parse_text(text) {
        // Anything accepted must survive a write/read cycle unchanged.
        let again = parse_text(&to_text(&state)).expect("reparse");
        assert_eq!(to_text(&again), to_text(&state));
    }
});
