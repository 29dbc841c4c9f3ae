#![no_main]

use libfuzzer_sys::fuzz_target;
use powerset_ptrace::io::parse_positions;
use powerset_ptrace::TraceSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(positions) = parse_positions(text) {
        for n in [1usize, 6, 30] {
            if let Ok(spec) = TraceSpec::for_qubits(n, &positions) {
                assert_eq!(spec.trace_mask() & spec.kept_mask(), 0);
            }
        }
    }
});
