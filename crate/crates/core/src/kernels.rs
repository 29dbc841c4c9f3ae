//! Partial-trace kernels.
//!
//! Four algorithms plus an independent oracle, all producing the same
//! reduced matrix on shared inputs:
//!
//! * [`naive_projector_trace_b`]: `Σ_j (I ⊗ ⟨j|) ρ (I ⊗ |j⟩)` with literal
//!   matrix products. Slow baseline.
//! * [`bipartite_index_trace_b`] / [`bipartite_index_trace_a`]: additions
//!   over the diagonal blocks of an `A ⊗ B` layout.
//! * [`multipartite_step_trace_middle`]: traces `B` out of `A ⊗ B ⊗ C`.
//! * [`powerset_trace_mixed`] / [`powerset_trace_pure`]: arbitrary qubit
//!   subsets in one pass by scatter plus submask offsets.
//! * [`brute_force_oracle`]: `O(4^N)` equality filter on the traced bits.
//!
//! [`sequential_workflow_trace`] chains the bipartite and three-factor
//! kernels the way a left-then-right-then-middle pipeline would, creating
//! intermediate matrices along the way.
//!
//! In the factor kernels the last factor is the fast-varying (least
//! significant) part of the row index, so on qubit layouts `B` in `A ⊗ B`
//! holds the low positions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{EtaEnumerator, IndexEmbedding};
use crate::state::{DensityMatrix, ReducedDensityMatrix, StateRef, StateVector, TraceSpec};

/// Default qubit cap for [`brute_force_oracle`].
pub const ORACLE_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    NaiveProjector,
    BipartiteIndex,
    MultipartiteStep,
    PowerSetMixed,
    PowerSetPure,
    BruteForceOracle,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::NaiveProjector,
        MethodId::BipartiteIndex,
        MethodId::MultipartiteStep,
        MethodId::PowerSetMixed,
        MethodId::PowerSetPure,
        MethodId::BruteForceOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::NaiveProjector => "naive",
            MethodId::BipartiteIndex => "bipartite",
            MethodId::MultipartiteStep => "multistep",
            MethodId::PowerSetMixed => "powerset-mixed",
            MethodId::PowerSetPure => "powerset-pure",
            MethodId::BruteForceOracle => "oracle",
        }
    }

    /// Whether the method consumes a state vector rather than a matrix.
    pub fn needs_pure(self) -> bool {
        self == MethodId::PowerSetPure
    }

    /// Whether the method can handle this spec at all.
    pub fn supports(self, spec: &TraceSpec) -> bool {
        match self {
            MethodId::NaiveProjector => spec.n_traced() == 0 || spec.is_contiguous_low(),
            MethodId::BipartiteIndex => {
                spec.n_traced() == 0 || spec.is_contiguous_low() || spec.is_contiguous_high()
            }
            MethodId::BruteForceOracle => spec.n_qubits() <= ORACLE_MAX_QUBITS,
            _ => true,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelOptions {
    /// Compute only `l ≥ m` and fill the rest by conjugation. Correct only
    /// for Hermitian input.
    pub hermitian_shortcut: bool,
    /// Compute output rows on the rayon pool. Each element is summed in the
    /// same order as the serial path, so results are bit-identical.
    pub parallel: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { hermitian_shortcut: true, parallel: false }
    }
}

fn check_factor_dims(rho: &DensityMatrix, dims: &[usize]) -> Result<()> {
    let expected = dims.iter().product::<usize>();
    if dims.contains(&0) || rho.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: rho.dim() });
    }
    Ok(())
}

fn check_layout(spec: &TraceSpec, n_qubits: Option<usize>) -> Result<()> {
    match n_qubits {
        Some(n) if n == spec.n_qubits() => Ok(()),
        Some(n) => Err(Error::LayoutMismatch { spec_qubits: spec.n_qubits(), state_qubits: n }),
        None => Err(Error::DimensionMismatch { expected: spec.layout().dim(), found: 0 }),
    }
}

/// Traces the fast-varying factor `B` by sandwiching with each basis vector
/// of `B` and forming the two matrix products explicitly.
///
/// The operators `I ⊗ |j⟩` are never stored; their elements are evaluated on
/// the fly inside the products, including all the zero terms.
pub fn naive_projector_trace_b(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    check_factor_dims(rho, &[dim_a, dim_b])?;
    let dim = rho.dim();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let embed = |j: usize| move |r: usize, k: usize| if r == k * dim_b + j { one } else { zero };

    let mut out = DensityMatrix::zeros(dim_a);
    let mut right = vec![zero; dim * dim_a];
    for j in 0..dim_b {
        let e = embed(j);
        // right = ρ · (I ⊗ |j⟩), dim × dim_a
        for r in 0..dim {
            let row = rho.row(r);
            for k in 0..dim_a {
                right[r * dim_a + k] = (0..dim).map(|s| row[s] * e(s, k)).sum();
            }
        }
        // out += (I ⊗ ⟨j|) · right, dim_a × dim_a
        let acc = out.entries_mut();
        for i in 0..dim_a {
            for k in 0..dim_a {
                let term: Complex64 = (0..dim).map(|r| e(r, i) * right[r * dim_a + k]).sum();
                acc[i * dim_a + k] += term;
            }
        }
    }
    Ok(out)
}

/// `ρ^A[k, l] = Σ_j ρ[k·d_B + j, l·d_B + j]`.
pub fn bipartite_index_trace_b(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    check_factor_dims(rho, &[dim_a, dim_b])?;
    let dim = rho.dim();
    let src = rho.entries();
    let mut out = DensityMatrix::zeros(dim_a);
    let dst = out.entries_mut();
    for k in 0..dim_a {
        for l in 0..dim_a {
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..dim_b {
                sum += src[(k * dim_b + j) * dim + l * dim_b + j];
            }
            dst[k * dim_a + l] = sum;
        }
    }
    Ok(out)
}

/// `ρ^B[k, l] = Σ_j ρ[j·d_B + k, j·d_B + l]`.
pub fn bipartite_index_trace_a(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    check_factor_dims(rho, &[dim_a, dim_b])?;
    let dim = rho.dim();
    let src = rho.entries();
    let mut out = DensityMatrix::zeros(dim_b);
    let dst = out.entries_mut();
    for j in 0..dim_a {
        for k in 0..dim_b {
            let row = &src[(j * dim_b + k) * dim + j * dim_b..][..dim_b];
            for (d, s) in dst[k * dim_b..(k + 1) * dim_b].iter_mut().zip(row) {
                *d += s;
            }
        }
    }
    Ok(out)
}

/// Traces the middle factor of `A ⊗ B ⊗ C`:
/// `ρ^AC[j·d_C + l, m·d_C + o] = Σ_k ρ[j·d_B·d_C + k·d_C + l, m·d_B·d_C + k·d_C + o]`.
pub fn multipartite_step_trace_middle(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    dim_c: usize,
) -> Result<DensityMatrix> {
    check_factor_dims(rho, &[dim_a, dim_b, dim_c])?;
    let dim = rho.dim();
    let src = rho.entries();
    let out_dim = dim_a * dim_c;
    let mut out = DensityMatrix::zeros(out_dim);
    let dst = out.entries_mut();
    let block = dim_b * dim_c;
    for j in 0..dim_a {
        for l in 0..dim_c {
            let out_row = j * dim_c + l;
            for m in 0..dim_a {
                for o in 0..dim_c {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..dim_b {
                        sum += src[(j * block + k * dim_c + l) * dim + m * block + k * dim_c + o];
                    }
                    dst[out_row * out_dim + m * dim_c + o] = sum;
                }
            }
        }
    }
    Ok(out)
}

/// Fills an output matrix row by row with `element(l, m)`, honouring the
/// Hermitian shortcut and the parallel flag.
fn fill_reduced<F>(dim: usize, opts: &KernelOptions, element: F) -> DensityMatrix
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let mut out = DensityMatrix::zeros(dim);
    let fill_row = |l: usize, row: &mut [Complex64]| {
        let upto = if opts.hermitian_shortcut { l + 1 } else { dim };
        for (m, dst) in row[..upto].iter_mut().enumerate() {
            *dst = element(l, m);
        }
    };
    let entries = out.entries_mut();
    if opts.parallel {
        entries.par_chunks_mut(dim).enumerate().for_each(|(l, row)| fill_row(l, row));
    } else {
        entries.chunks_mut(dim).enumerate().for_each(|(l, row)| fill_row(l, row));
    }
    if opts.hermitian_shortcut {
        for l in 0..dim {
            for m in l + 1..dim {
                entries[l * dim + m] = entries[m * dim + l].conj();
            }
        }
    }
    out
}

pub fn powerset_trace_mixed(rho: &DensityMatrix, spec: &TraceSpec) -> Result<ReducedDensityMatrix> {
    powerset_trace_mixed_with(rho, spec, &KernelOptions::default())
}

/// `ρ'[l, m] = Σ_η ρ[scatter(l) + η, scatter(m) + η]` over all submasks `η`
/// of the traced-bit mask. Additions only.
pub fn powerset_trace_mixed_with(
    rho: &DensityMatrix,
    spec: &TraceSpec,
    opts: &KernelOptions,
) -> Result<ReducedDensityMatrix> {
    check_layout(spec, rho.n_qubits())?;
    let dim = rho.dim();
    let src = rho.entries();
    let emb = IndexEmbedding::new(spec);
    let mask = spec.trace_mask();
    let out = fill_reduced(spec.reduced_dim(), opts, |l, m| {
        let row = emb.scatter_unchecked(l as u64) as usize;
        let col = emb.scatter_unchecked(m as u64) as usize;
        let mut sum = Complex64::new(0.0, 0.0);
        for eta in EtaEnumerator::new(mask) {
            let eta = eta as usize;
            sum += src[(row + eta) * dim + col + eta];
        }
        sum
    });
    Ok(ReducedDensityMatrix::new(out, MethodId::PowerSetMixed, spec))
}

pub fn powerset_trace_pure(psi: &StateVector, spec: &TraceSpec) -> Result<ReducedDensityMatrix> {
    powerset_trace_pure_with(psi, spec, &KernelOptions::default())
}

/// `ρ'[l, m] = Σ_η ψ[scatter(l) + η] · conj(ψ[scatter(m) + η])`, straight from
/// the amplitudes. The only allocation is the reduced output.
pub fn powerset_trace_pure_with(
    psi: &StateVector,
    spec: &TraceSpec,
    opts: &KernelOptions,
) -> Result<ReducedDensityMatrix> {
    check_layout(spec, Some(psi.n_qubits()))?;
    let amps = psi.amplitudes();
    let emb = IndexEmbedding::new(spec);
    let mask = spec.trace_mask();
    let out = fill_reduced(spec.reduced_dim(), opts, |l, m| {
        let row = emb.scatter_unchecked(l as u64) as usize;
        let col = emb.scatter_unchecked(m as u64) as usize;
        let mut sum = Complex64::new(0.0, 0.0);
        for eta in EtaEnumerator::new(mask) {
            let eta = eta as usize;
            sum += amps[row + eta] * amps[col + eta].conj();
        }
        sum
    });
    Ok(ReducedDensityMatrix::new(out, MethodId::PowerSetPure, spec))
}

pub fn brute_force_oracle(rho: &DensityMatrix, spec: &TraceSpec) -> Result<ReducedDensityMatrix> {
    brute_force_oracle_capped(rho, spec, ORACLE_MAX_QUBITS)
}

/// Scans every `(i, j)` and accumulates `ρ[i, j]` into
/// `ρ'[gather(i), gather(j)]` whenever `i` and `j` agree on the traced bits.
pub fn brute_force_oracle_capped(
    rho: &DensityMatrix,
    spec: &TraceSpec,
    max_qubits: usize,
) -> Result<ReducedDensityMatrix> {
    check_layout(spec, rho.n_qubits())?;
    let n = spec.n_qubits();
    if n > max_qubits {
        return Err(Error::CostGuardExceeded { n, max: max_qubits });
    }
    let dim = rho.dim();
    let trace_mask = spec.trace_mask() as usize;
    let kept: Vec<usize> = spec.kept_positions().iter().map(|p| p - 1).collect();
    // Bit-by-bit compaction, independent of the deposit/extract helpers.
    let compact = |idx: usize| {
        kept.iter().enumerate().fold(0usize, |acc, (j, &bit)| acc | ((idx >> bit) & 1) << j)
    };
    let reduced: Vec<usize> = (0..dim).map(compact).collect();
    let out_dim = spec.reduced_dim();
    let mut out = DensityMatrix::zeros(out_dim);
    let dst = out.entries_mut();
    for i in 0..dim {
        for j in 0..dim {
            if i & trace_mask == j & trace_mask {
                dst[reduced[i] * out_dim + reduced[j]] += rho.get(i, j);
            }
        }
    }
    Ok(ReducedDensityMatrix::new(out, MethodId::BruteForceOracle, spec))
}

/// Maximal runs of consecutive 0-based bits, ascending.
fn bit_runs(bits: &[usize]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &b in bits {
        match runs.last_mut() {
            Some((start, len)) if *start + *len == b => *len += 1,
            _ => runs.push((b, 1)),
        }
    }
    runs
}

/// Left-then-right-then-middle pipeline over the factor kernels.
///
/// The contiguous low block of traced positions goes through
/// [`bipartite_index_trace_b`], the contiguous high block through
/// [`bipartite_index_trace_a`], and every remaining run of traced positions
/// through [`multipartite_step_trace_middle`]. Each step materializes a new
/// matrix; pure inputs are expanded to `|ψ⟩⟨ψ|` first. Surviving qubits are
/// renumbered `1..` in their original order after each step.
pub fn sequential_workflow_trace<'a>(
    state: impl Into<StateRef<'a>>,
    spec: &TraceSpec,
) -> Result<ReducedDensityMatrix> {
    let state = state.into();
    check_layout(spec, state.n_qubits())?;
    let projector;
    let input: &DensityMatrix = match state {
        StateRef::Pure(psi) => {
            projector = psi.projector();
            &projector
        }
        StateRef::Mixed(rho) => rho,
    };

    let n = spec.n_qubits();
    let traced: Vec<usize> = spec.traced_positions().iter().map(|p| p - 1).collect();
    let low = traced.iter().enumerate().take_while(|&(i, &b)| b == i).count();
    let high = traced[low..].iter().rev().enumerate().take_while(|&(i, &b)| b == n - 1 - i).count();
    let interior: Vec<usize> = traced[low..traced.len() - high].iter().map(|b| b - low).collect();

    let mut current: Option<DensityMatrix> = None;
    let mut width = n;
    let pow2 = |k: usize| 1usize << k;

    if low > 0 {
        let rho = current.as_ref().unwrap_or(input);
        current = Some(bipartite_index_trace_b(rho, pow2(width - low), pow2(low))?);
        width -= low;
    }
    if high > 0 {
        let rho = current.as_ref().unwrap_or(input);
        current = Some(bipartite_index_trace_a(rho, pow2(high), pow2(width - high))?);
        width -= high;
    }
    // Highest run first so lower runs keep their bit offsets.
    for (start, len) in bit_runs(&interior).into_iter().rev() {
        let rho = current.as_ref().unwrap_or(input);
        let dim_a = pow2(width - start - len);
        current = Some(multipartite_step_trace_middle(rho, dim_a, pow2(len), pow2(start))?);
        width -= len;
    }

    let out = match current {
        Some(m) => m,
        None => DensityMatrix::from_entries(input.dim(), input.entries().to_vec())?,
    };
    Ok(ReducedDensityMatrix::new(out, MethodId::MultipartiteStep, spec))
}

/// Runs `method` on `state`.
///
/// Matrix-based methods accept a pure state by expanding its projector;
/// [`MethodId::PowerSetPure`] requires a pure state. The bipartite and naive
/// methods only handle specs their factor layout can express.
pub fn trace_with<'a>(
    method: MethodId,
    state: impl Into<StateRef<'a>>,
    spec: &TraceSpec,
) -> Result<ReducedDensityMatrix> {
    let state = state.into();
    check_layout(spec, state.n_qubits())?;
    if method == MethodId::MultipartiteStep {
        return sequential_workflow_trace(state, spec);
    }
    if method == MethodId::PowerSetPure {
        return match state {
            StateRef::Pure(psi) => powerset_trace_pure(psi, spec),
            StateRef::Mixed(_) => Err(Error::UnsupportedPartition {
                method: method.name(),
                positions: spec.traced_positions().to_vec(),
                reason: "needs a pure state",
            }),
        };
    }

    let projector;
    let rho: &DensityMatrix = match state {
        StateRef::Pure(psi) => {
            projector = psi.projector();
            &projector
        }
        StateRef::Mixed(rho) => rho,
    };
    let n = spec.n_qubits();
    let m = spec.n_traced();
    let unsupported = |reason| Error::UnsupportedPartition {
        method: method.name(),
        positions: spec.traced_positions().to_vec(),
        reason,
    };
    let factor_result = |matrix: DensityMatrix| Ok(ReducedDensityMatrix::new(matrix, method, spec));
    match method {
        MethodId::PowerSetMixed => powerset_trace_mixed(rho, spec),
        MethodId::BruteForceOracle => brute_force_oracle(rho, spec),
        MethodId::NaiveProjector => {
            if m > 0 && !spec.is_contiguous_low() {
                return Err(unsupported("traced positions must be 1..=M"));
            }
            factor_result(naive_projector_trace_b(rho, 1 << (n - m), 1 << m)?)
        }
        MethodId::BipartiteIndex => {
            if m == 0 || spec.is_contiguous_low() {
                factor_result(bipartite_index_trace_b(rho, 1 << (n - m), 1 << m)?)
            } else if spec.is_contiguous_high() {
                factor_result(bipartite_index_trace_a(rho, 1 << m, 1 << (n - m))?)
            } else {
                Err(unsupported("traced positions must be a low or high contiguous block"))
            }
        }
        MethodId::MultipartiteStep | MethodId::PowerSetPure => unreachable!(),
    }
}
