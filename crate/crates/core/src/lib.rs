//! Partial traces of multi-qubit quantum states.
//!
//! The central algorithm computes any reduced density matrix over an arbitrary
//! subset of qubits by index arithmetic alone. For a kept-space element
//! `(l, m)` the kept indices are scattered into the full `N`-bit index space
//! (traced bits left at zero), and every submask `η` of the traced-bit mask is
//! added to the row and column simultaneously:
//!
//! ```text
//! ρ'[l, m] = Σ_η ρ[scatter(l) + η, scatter(m) + η]
//! ```
//!
//! No matrix products are formed. For pure states the same index set is used
//! on the amplitude vector directly, so the `2^N × 2^N` projector is never
//! materialized.
//!
//! # Qubit positions
//!
//! Positions are 1-based and counted from the right of a ket: position `i`
//! is bit `i - 1` of the basis-state index, so position 1 is the least
//! significant bit.
//!
//! ```text
//!   |q6 q5 q4 q3 q2 q1⟩
//!     ↑                ↑
//!   position 6      position 1  (bit 0, place value 2^0)
//! ```
//!
//! Tracing positions `{2, 4, 6}` of a six-qubit state therefore sums over
//! place values `{2, 8, 32}`.
//!
//! Besides the power-set kernels the crate carries the classical bipartite and
//! three-factor index formulas, a literal projector-sandwich kernel, an
//! `O(4^N)` brute-force oracle, entanglement measures built on the reductions,
//! state-file formats, and the pieces of the `ptrace` command-line tool.

pub mod bench;
pub mod eigen;
pub mod error;
pub mod index;
pub mod instrument;
pub mod io;
pub mod kernels;
pub mod measures;
pub mod random;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use index::{element_index_pairs, enumerate_eta, EtaEnumerator, IndexEmbedding};
pub use kernels::{
    bipartite_index_trace_a, bipartite_index_trace_b, brute_force_oracle,
    multipartite_step_trace_middle, naive_projector_trace_b, powerset_trace_mixed,
    powerset_trace_pure, sequential_workflow_trace, trace_with, KernelOptions, MethodId,
};
pub use measures::{block_entropy, hermitian_eigenvalues, purity, von_neumann_entropy, LogBase, Spectrum};
pub use state::{
    full_trace, validate_density, DensityMatrix, QubitLayout, ReducedDensityMatrix, State,
    StateRef, StateVector, Tolerances, TraceSpec, ValidationReport,
};

pub use num_complex::Complex64;
