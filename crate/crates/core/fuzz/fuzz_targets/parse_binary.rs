#![no_main]

use libfuzzer_sys::fuzz_target;
use powerset_ptrace::io::{parse_binary, to_binary};

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = parse_binary(data) {
        assert_eq!(to_binary(&state), data);
    }
});
