//! State containers, the qubit index convention, and trace specifications.
//!
//! Position `i` (1-based) of an `N`-qubit layout is bit `i - 1` of a basis
//! index. Position 1 is the least significant bit, i.e. the rightmost symbol
//! of a ket. Every kernel, file format and CLI flag in the crate follows this
//! convention; reversing it leaves symmetric test states unchanged but moves
//! every element of a comb-pattern trace.
//!
//! Matrices are dense, row-major, `Complex64`, with element `(r, c)` at
//! offset `r * dim + c`.

use std::fmt;

use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::instrument::record_matrix_allocation;
use crate::kernels::MethodId;

/// Default upper bound on the number of qubits in a layout.
pub const DEFAULT_MAX_QUBITS: usize = 30;

/// Hard ceiling for configurable layouts; keeps `row * dim + col` inside `u64`.
pub const HARD_MAX_QUBITS: usize = 31;

/// Largest matrix for which [`validate_density`] computes a minimum eigenvalue.
pub const POSITIVITY_CHECK_MAX_DIM: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub norm: f64,
    pub hermiticity: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { norm: 1e-10, hermiticity: 1e-10, trace: 1e-10 }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self { norm: tol, hermiticity: tol, trace: tol }
    }
}

/// How qubit positions map onto bits of a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BitConvention {
    /// Position `i` is bit `i - 1`; position 1 is the rightmost ket symbol.
    #[default]
    PositionOneIsLsb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitLayout {
    n_qubits: usize,
    convention: BitConvention,
}

impl QubitLayout {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_max(n_qubits, DEFAULT_MAX_QUBITS)
    }

    /// A layout with a caller-chosen cap (never above [`HARD_MAX_QUBITS`]).
    pub fn with_max(n_qubits: usize, max: usize) -> Result<Self> {
        let max = max.min(HARD_MAX_QUBITS);
        if n_qubits == 0 {
            return Err(Error::NoQubits);
        }
        if n_qubits > max {
            return Err(Error::TooManyQubits { n: n_qubits, max });
        }
        Ok(Self { n_qubits, convention: BitConvention::PositionOneIsLsb })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn convention(&self) -> BitConvention {
        self.convention
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.n_qubits) - 1
    }

    /// Bit index of a 1-based position.
    pub fn bit_of(&self, position: usize) -> Result<u32> {
        if position == 0 || position > self.n_qubits {
            return Err(Error::PositionOutOfRange { position, n_qubits: self.n_qubits });
        }
        Ok((position - 1) as u32)
    }
}

fn log2_exact(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// A pure state: `2^N` amplitudes indexed by computational-basis label.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: QubitLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps an amplitude array whose length is a power of two (at least 2).
    ///
    /// Normalization is not enforced here; see [`StateVector::normalized`]
    /// and [`StateVector::norm_defect`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = log2_exact(amplitudes.len())?;
        let layout = QubitLayout::new(n)?;
        Ok(Self { layout, amplitudes })
    }

    /// Like [`StateVector::new`] but rejects states whose squared norm is
    /// off by more than `tol.norm`.
    pub fn normalized(amplitudes: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        let psi = Self::new(amplitudes)?;
        let defect = psi.norm_defect();
        if defect > tol.norm {
            return Err(Error::NotNormalized { defect });
        }
        Ok(psi)
    }

    pub fn layout(&self) -> QubitLayout {
        self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|Σ |ψ_i|² − 1|`.
    pub fn norm_defect(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    /// Tensor product `self ⊗ other`; `other` occupies the low positions.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector::new(amps)
    }

    /// The projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix {
        let dim = self.amplitudes.len();
        let mut rho = DensityMatrix::zeros(dim);
        for (r, row) in rho.entries.chunks_exact_mut(dim).enumerate() {
            let a = self.amplitudes[r];
            for (dst, b) in row.iter_mut().zip(&self.amplitudes) {
                *dst = a * b.conj();
            }
        }
        rho
    }
}

/// Dense row-major density matrix of arbitrary dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    normalized: bool,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        record_matrix_allocation(dim);
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim], normalized: false }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Wraps `dim²` row-major entries with no physical checks.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        record_matrix_allocation(dim);
        Ok(Self { dim, entries, normalized: false })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    /// Builds from real row vectors.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Wraps entries and checks Hermiticity and unit trace; the result is
    /// flagged as a normalized physical state.
    pub fn physical(dim: usize, entries: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        let mut m = Self::from_entries(dim, entries)?;
        let herm = m.hermiticity_defect();
        if herm > tol.hermiticity {
            return Err(Error::NotHermitian { defect: herm });
        }
        let defect = (m.trace() - Complex64::new(1.0, 0.0)).norm();
        if defect > tol.trace {
            return Err(Error::NotNormalized { defect });
        }
        m.normalized = true;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of qubits when `dim` is a power of two (≥ 2).
    pub fn n_qubits(&self) -> Option<usize> {
        log2_exact(self.dim).ok()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max_{r,c} |ρ(r,c) − conj(ρ(c,r))|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest elementwise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Tensor product `self ⊗ other`; `other` is the fast-varying factor.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut out = DensityMatrix::zeros(dim);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                for k in 0..db {
                    for l in 0..db {
                        out.entries[(i * db + k) * dim + j * db + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.entries {
            *z *= factor;
        }
    }
}

/// `Σ_r ρ(r, r)`.
pub fn full_trace(rho: &DensityMatrix) -> Complex64 {
    rho.trace()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    /// `|tr ρ − 1|`.
    pub trace_defect: f64,
    /// Present only when requested and `dim ≤ 4096`.
    pub min_eigenvalue: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self, tol: &Tolerances) -> bool {
        self.hermiticity_defect <= tol.hermiticity
            && self.trace_defect <= tol.trace
            && self.min_eigenvalue.is_none_or(|e| e >= -tol.trace)
    }
}

/// Report-only validation of a density matrix.
pub fn validate_density(rho: &DensityMatrix, check_positivity: bool) -> ValidationReport {
    let hermiticity_defect = rho.hermiticity_defect();
    let trace_defect = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    let min_eigenvalue = (check_positivity && rho.dim <= POSITIVITY_CHECK_MAX_DIM)
        .then(|| eigen::eigenvalues_unchecked(rho))
        .and_then(|vals| vals.into_iter().reduce(f64::min));
    ValidationReport { hermiticity_defect, trace_defect, min_eigenvalue }
}

/// Qubit positions to trace out, with the derived masks and place values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceSpec {
    layout: QubitLayout,
    traced: Vec<usize>,
    kept: Vec<usize>,
    place_values: Vec<u64>,
    trace_mask: u64,
    kept_mask: u64,
}

impl TraceSpec {
    /// Positions may come in any order; they are stored ascending.
    pub fn new(layout: QubitLayout, positions: &[usize]) -> Result<Self> {
        let n = layout.n_qubits();
        let mut trace_mask = 0u64;
        for &p in positions {
            let bit = layout.bit_of(p)?;
            if trace_mask & (1 << bit) != 0 {
                return Err(Error::DuplicatePosition(p));
            }
            trace_mask |= 1 << bit;
        }
        if positions.len() == n {
            return Err(Error::FullTraceNotASpec { n_qubits: n });
        }
        let kept_mask = layout.full_mask() & !trace_mask;
        let traced: Vec<usize> = (1..=n).filter(|p| trace_mask >> (p - 1) & 1 == 1).collect();
        let kept: Vec<usize> = (1..=n).filter(|p| kept_mask >> (p - 1) & 1 == 1).collect();
        let place_values = traced.iter().map(|p| 1u64 << (p - 1)).collect();
        Ok(Self { layout, traced, kept, place_values, trace_mask, kept_mask })
    }

    /// Shorthand for `TraceSpec::new(QubitLayout::new(n)?, positions)`.
    pub fn for_qubits(n_qubits: usize, positions: &[usize]) -> Result<Self> {
        Self::new(QubitLayout::new(n_qubits)?, positions)
    }

    pub fn layout(&self) -> QubitLayout {
        self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn traced_positions(&self) -> &[usize] {
        &self.traced
    }

    pub fn kept_positions(&self) -> &[usize] {
        &self.kept
    }

    /// `λ_k = 2^(i_k − 1)`, ascending.
    pub fn place_values(&self) -> &[u64] {
        &self.place_values
    }

    pub fn trace_mask(&self) -> u64 {
        self.trace_mask
    }

    pub fn kept_mask(&self) -> u64 {
        self.kept_mask
    }

    /// `M`.
    pub fn n_traced(&self) -> usize {
        self.traced.len()
    }

    pub fn n_kept(&self) -> usize {
        self.kept.len()
    }

    /// `2^(N − M)`.
    pub fn reduced_dim(&self) -> usize {
        1usize << self.n_kept()
    }

    /// Spec tracing the kept positions instead. Fails when nothing is traced.
    pub fn complement(&self) -> Result<TraceSpec> {
        TraceSpec::new(self.layout, &self.kept)
    }

    /// Traced positions form the block `1..=M` (M ≥ 1).
    pub fn is_contiguous_low(&self) -> bool {
        !self.traced.is_empty() && self.traced.iter().enumerate().all(|(i, &p)| p == i + 1)
    }

    /// Traced positions form the block `N−M+1..=N` (M ≥ 1).
    pub fn is_contiguous_high(&self) -> bool {
        let n = self.n_qubits();
        let m = self.traced.len();
        !self.traced.is_empty() && self.traced.iter().enumerate().all(|(i, &p)| p == n - m + 1 + i)
    }
}

impl fmt::Display for TraceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} trace {{", self.n_qubits())?;
        for (i, p) in self.traced.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Kernel output: the reduced matrix plus the method and spec that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub matrix: DensityMatrix,
    pub method: MethodId,
    pub spec: TraceSpec,
}

impl ReducedDensityMatrix {
    pub(crate) fn new(matrix: DensityMatrix, method: MethodId, spec: &TraceSpec) -> Self {
        debug_assert_eq!(matrix.dim(), spec.reduced_dim());
        Self { matrix, method, spec: spec.clone() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    pub fn into_matrix(self) -> DensityMatrix {
        self.matrix
    }
}

/// An owned pure or mixed state, as read from a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn as_ref(&self) -> StateRef<'_> {
        match self {
            State::Pure(psi) => StateRef::Pure(psi),
            State::Mixed(rho) => StateRef::Mixed(rho),
        }
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.as_ref().n_qubits()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl StateRef<'_> {
    pub fn n_qubits(&self) -> Option<usize> {
        match self {
            StateRef::Pure(psi) => Some(psi.n_qubits()),
            StateRef::Mixed(rho) => rho.n_qubits(),
        }
    }
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(psi: &'a StateVector) -> Self {
        StateRef::Pure(psi)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        StateRef::Mixed(rho)
    }
}
