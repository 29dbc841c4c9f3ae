//! Seeded state and spec generators for tests, verification and benches.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::state::{DensityMatrix, StateVector, TraceSpec};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: normalized complex Gaussian vector.
pub fn random_pure(n_qubits: usize, rng: &mut impl Rng) -> StateVector {
    let dim = 1usize << n_qubits;
    let mut amps: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::new(amps).expect("power-of-two length")
}

/// `A·A† / tr(A·A†)` for a complex Gaussian `A`: Hermitian, PSD, unit trace.
pub fn random_mixed(n_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1usize << n_qubits;
    let a: Vec<Complex64> = (0..dim * dim).map(|_| gaussian(rng)).collect();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..=r {
            let z: Complex64 = (0..dim).map(|k| a[r * dim + k] * a[c * dim + k].conj()).sum();
            entries[r * dim + c] = z;
            entries[c * dim + r] = z.conj();
        }
        entries[r * dim + r].im = 0.0;
    }
    let trace: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
    for z in &mut entries {
        *z /= trace;
    }
    DensityMatrix::from_entries(dim, entries).expect("square buffer")
}

/// Random spec tracing between 1 and `N − 1` qubits (`N ≥ 2`).
pub fn random_spec(n_qubits: usize, rng: &mut impl Rng) -> Result<TraceSpec> {
    let m = rng.random_range(1..n_qubits);
    let positions: Vec<usize> = sample(rng, n_qubits, m).into_iter().map(|i| i + 1).collect();
    TraceSpec::for_qubits(n_qubits, &positions)
}
