#![no_main]

use libfuzzer_sys::fuzz_target;
use powerset_ptrace::io::{check_normalization, parse_state_bytes};
use powerset_ptrace::kernels::trace_with;
use powerset_ptrace::{MethodId, Tolerances, TraceSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(state) = parse_state_bytes(data) else { return };
    let _ = check_normalization(&state, &Tolerances::default());
    let Some(n) = state.n_qubits() else { return };
    if (2..=8).contains(&n) {
        let spec = TraceSpec::for_qubits(n, &[1]).expect("valid spec");
        let method = match state {
            powerset_ptrace::State::Pure(_) => MethodId::PowerSetPure,
            powerset_ptrace::State::Mixed(_) => MethodId::PowerSetMixed,
        };
        let _ = trace_with(method, state.as_ref(), &spec);
    }
});
