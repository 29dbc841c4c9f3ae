//! Bit-level index arithmetic for the power-set kernels.
//!
//! A reduced index `l` in `[0, 2^(N−M))` is scattered onto the kept bit
//! positions of an `N`-bit index (bit deposit), leaving the traced bits zero.
//! The offsets `η` are the submasks of the traced-bit mask, i.e. all subset
//! sums of the place values `λ_k`. Adding the same `η` to a scattered row and
//! column index enumerates exactly the full-matrix elements that contribute
//! to one reduced element.

use crate::error::{Error, Result};
use crate::state::TraceSpec;

/// Portable parallel bit deposit: the `j`-th low bit of `value` lands on the
/// `j`-th lowest set bit of `mask`.
#[inline]
pub fn deposit_bits_portable(value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    let mut bit = 1u64;
    while m != 0 {
        let lowest = m & m.wrapping_neg();
        if value & bit != 0 {
            out |= lowest;
        }
        m ^= lowest;
        bit <<= 1;
    }
    out
}

/// Portable parallel bit extract, the inverse of [`deposit_bits_portable`]
/// on values with no bits outside `mask`.
#[inline]
pub fn extract_bits_portable(value: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    let mut bit = 1u64;
    while m != 0 {
        let lowest = m & m.wrapping_neg();
        if value & lowest != 0 {
            out |= bit;
        }
        m ^= lowest;
        bit <<= 1;
    }
    out
}

#[cfg(target_arch = "x86_64")]
mod hw {
    use core::arch::x86_64::{_pdep_u64, _pext_u64};

    #[target_feature(enable = "bmi2")]
    pub(super) unsafe fn deposit(value: u64, mask: u64) -> u64 {
        _pdep_u64(value, mask)
    }

    #[target_feature(enable = "bmi2")]
    pub(super) unsafe fn extract(value: u64, mask: u64) -> u64 {
        _pext_u64(value, mask)
    }
}

/// Whether [`deposit_bits`] / [`extract_bits`] use the BMI2 instructions.
pub fn hardware_bit_ops_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::is_x86_feature_detected!("bmi2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// Hardware bit deposit when available, otherwise the portable loop.
#[inline]
pub fn deposit_bits(value: u64, mask: u64) -> u64 {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("bmi2") {
        // SAFETY: the bmi2 feature was detected at runtime.
        return unsafe { hw::deposit(value, mask) };
    }
    deposit_bits_portable(value, mask)
}

#[inline]
pub fn extract_bits(value: u64, mask: u64) -> u64 {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("bmi2") {
        // SAFETY: the bmi2 feature was detected at runtime.
        return unsafe { hw::extract(value, mask) };
    }
    extract_bits_portable(value, mask)
}

/// Map between reduced indices and full-space indices over the kept bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEmbedding {
    kept_mask: u64,
    n_qubits: usize,
    target_bits: Vec<u32>,
}

impl IndexEmbedding {
    pub fn new(spec: &TraceSpec) -> Self {
        Self::from_kept_mask(spec.kept_mask(), spec.n_qubits())
    }

    /// `kept_mask` bits at or above `n_qubits` are ignored.
    pub fn from_kept_mask(kept_mask: u64, n_qubits: usize) -> Self {
        let kept_mask = kept_mask & ((1u64 << n_qubits) - 1);
        let target_bits = (0..n_qubits as u32).filter(|b| kept_mask >> b & 1 == 1).collect();
        Self { kept_mask, n_qubits, target_bits }
    }

    pub fn kept_mask(&self) -> u64 {
        self.kept_mask
    }

    /// `N − M`.
    pub fn n_kept(&self) -> usize {
        self.target_bits.len()
    }

    /// Ascending 0-based bit positions receiving the reduced-index bits.
    pub fn target_bits(&self) -> &[u32] {
        &self.target_bits
    }

    pub fn reduced_len(&self) -> u64 {
        1u64 << self.n_kept()
    }

    pub fn full_len(&self) -> u64 {
        1u64 << self.n_qubits
    }

    /// `l ↦ l′`: reduced index to full index with traced bits zero.
    pub fn scatter(&self, l: u64) -> Result<u64> {
        if l >= self.reduced_len() {
            return Err(Error::IndexOutOfRange { index: l, bound: self.reduced_len() });
        }
        Ok(self.scatter_unchecked(l))
    }

    #[inline]
    pub fn scatter_unchecked(&self, l: u64) -> u64 {
        deposit_bits(l, self.kept_mask)
    }

    /// Compacts the kept bits of a full index, discarding traced bits.
    pub fn gather(&self, full_index: u64) -> Result<u64> {
        if full_index >= self.full_len() {
            return Err(Error::IndexOutOfRange { index: full_index, bound: self.full_len() });
        }
        Ok(self.gather_unchecked(full_index))
    }

    #[inline]
    pub fn gather_unchecked(&self, full_index: u64) -> u64 {
        extract_bits(full_index, self.kept_mask)
    }
}

/// All submasks of a mask, ascending, starting at 0.
///
/// The `k`-th value is the counter `k` deposited onto the mask, so the order
/// matches scattering `0..2^M` over the traced bits.
#[derive(Debug, Clone)]
pub struct EtaEnumerator {
    mask: u64,
    next: u64,
    remaining: u64,
}

impl EtaEnumerator {
    pub fn new(trace_mask: u64) -> Self {
        Self { mask: trace_mask, next: 0, remaining: 1u64 << trace_mask.count_ones() }
    }

    /// `2^M`.
    pub fn count(&self) -> u64 {
        1u64 << self.mask.count_ones()
    }
}

impl Iterator for EtaEnumerator {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.next;
        self.remaining -= 1;
        self.next = self.next.wrapping_sub(self.mask) & self.mask;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl ExactSizeIterator for EtaEnumerator {}

/// The `2^M` offsets `η` for a spec: subset sums of its place values.
pub fn enumerate_eta(spec: &TraceSpec) -> EtaEnumerator {
    EtaEnumerator::new(spec.trace_mask())
}

/// Full-matrix `(row, col)` pairs summed into reduced element `(l, m)`.
#[derive(Debug, Clone)]
pub struct ElementPairs {
    row: u64,
    col: u64,
    etas: EtaEnumerator,
}

impl Iterator for ElementPairs {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        self.etas.next().map(|eta| (self.row + eta, self.col + eta))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.etas.size_hint()
    }
}

impl ExactSizeIterator for ElementPairs {}

pub fn element_index_pairs(spec: &TraceSpec, l: u64, m: u64) -> Result<ElementPairs> {
    let emb = IndexEmbedding::new(spec);
    Ok(ElementPairs { row: emb.scatter(l)?, col: emb.scatter(m)?, etas: enumerate_eta(spec) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn spec(n: usize, traced: &[usize]) -> TraceSpec {
        TraceSpec::for_qubits(n, traced).unwrap()
    }

    #[test]
    fn scatter_examples() {
        let even = IndexEmbedding::new(&spec(6, &[2, 4, 6]));
        assert_eq!(even.target_bits(), &[0, 2, 4]);
        assert_eq!(even.scatter(2).unwrap(), 4);
        assert_eq!(even.scatter(1).unwrap(), 1);
        assert!(matches!(even.scatter(8), Err(Error::IndexOutOfRange { index: 8, bound: 8 })));

        let top = IndexEmbedding::new(&spec(4, &[1, 2, 3]));
        assert_eq!(top.scatter(0).unwrap(), 0);
        assert_eq!(top.scatter(1).unwrap(), 8);

        let all = IndexEmbedding::new(&spec(5, &[]));
        for l in 0..32 {
            assert_eq!(all.scatter(l).unwrap(), l);
            assert_eq!(all.gather(l).unwrap(), l);
        }
    }

    #[test]
    fn gather_examples() {
        let even = IndexEmbedding::new(&spec(6, &[2, 4, 6]));
        assert_eq!(even.gather(4).unwrap(), 2);
        assert_eq!(even.gather(0b101010).unwrap(), 0);
        assert!(even.gather(64).is_err());
    }

    #[test]
    fn eta_examples() {
        let got: BTreeSet<u64> = enumerate_eta(&spec(6, &[2, 4, 6])).collect();
        assert_eq!(got, BTreeSet::from([0, 2, 8, 32, 10, 34, 40, 42]));
        let got: Vec<u64> = enumerate_eta(&spec(4, &[1, 2, 3])).collect();
        assert_eq!(got, (0..8).collect::<Vec<_>>());
        let got: Vec<u64> = enumerate_eta(&spec(3, &[])).collect();
        assert_eq!(got, vec![0]);
    }

    #[test]
    fn eta_order_is_counter_scatter() {
        let mask = 0b1011_0010u64;
        let got: Vec<u64> = EtaEnumerator::new(mask).collect();
        let want: Vec<u64> = (0..16).map(|k| deposit_bits_portable(k, mask)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn element_pairs_examples() {
        let got: BTreeSet<(u64, u64)> = element_index_pairs(&spec(6, &[2, 4, 6]), 2, 1).unwrap().collect();
        let want = BTreeSet::from([
            (4, 1),
            (6, 3),
            (12, 9),
            (36, 33),
            (14, 11),
            (38, 35),
            (44, 41),
            (46, 43),
        ]);
        assert_eq!(got, want);

        let s = spec(4, &[1, 2, 3]);
        let diag: Vec<_> = element_index_pairs(&s, 0, 0).unwrap().collect();
        assert_eq!(diag, (0..8).map(|k| (k, k)).collect::<Vec<_>>());
        let off: Vec<_> = element_index_pairs(&s, 0, 1).unwrap().collect();
        assert_eq!(off, (0..8).map(|k| (k, k + 8)).collect::<Vec<_>>());
        let low: Vec<_> = element_index_pairs(&s, 1, 1).unwrap().collect();
        assert_eq!(low, (8..16).map(|k| (k, k)).collect::<Vec<_>>());
        assert!(element_index_pairs(&s, 2, 0).is_err());
    }

    #[test]
    fn hardware_matches_portable() {
        let mut x = 0x9E37_79B9_7F4A_7C15u64;
        for _ in 0..20_000 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let mask = x.rotate_left(23) & 0x3FFF_FFFF;
            let value = x >> 11;
            assert_eq!(deposit_bits(value, mask), deposit_bits_portable(value, mask));
            assert_eq!(extract_bits(value, mask), extract_bits_portable(value, mask));
        }
    }
}
