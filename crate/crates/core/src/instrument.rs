//! Per-thread counter of dense matrix buffers created by this crate.
//!
//! Every [`DensityMatrix`](crate::DensityMatrix) constructor that owns a fresh
//! `dim × dim` buffer bumps the counter, which lets tests and the bench
//! harness count the intermediate matrices a trace pipeline creates.

use std::cell::Cell;

thread_local! {
    static MATRIX_ALLOCATIONS: Cell<u64> = const { Cell::new(0) };
    static MATRIX_BYTES: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn record_matrix_allocation(dim: usize) {
    let bytes = (dim * dim * std::mem::size_of::<num_complex::Complex64>()) as u64;
    MATRIX_ALLOCATIONS.with(|c| c.set(c.get() + 1));
    MATRIX_BYTES.with(|c| c.set(c.get() + bytes));
}

/// Matrices allocated on the current thread so far.
pub fn matrix_allocations() -> u64 {
    MATRIX_ALLOCATIONS.with(Cell::get)
}

/// Total bytes of matrix buffers allocated on the current thread so far.
pub fn matrix_bytes_allocated() -> u64 {
    MATRIX_BYTES.with(Cell::get)
}

/// Counts matrix allocations made on this thread since construction.
#[derive(Debug)]
pub struct AllocationScope {
    start: u64,
    start_bytes: u64,
}

impl AllocationScope {
    pub fn start() -> Self {
        Self { start: matrix_allocations(), start_bytes: matrix_bytes_allocated() }
    }

    pub fn allocations(&self) -> u64 {
        matrix_allocations() - self.start
    }

    pub fn bytes(&self) -> u64 {
        matrix_bytes_allocated() - self.start_bytes
    }
}

/// Runs `f` and returns its result with the number of matrices it allocated.
pub fn count_matrix_allocations<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let scope = AllocationScope::start();
    let out = f();
    (out, scope.allocations())
}
