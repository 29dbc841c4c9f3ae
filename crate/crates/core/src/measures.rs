//! Entanglement measures on reduced density matrices.

use crate::eigen::eigenvalues_unchecked;
use crate::error::{Error, Result};
use crate::kernels::powerset_trace_pure;
use crate::state::{DensityMatrix, StateVector, Tolerances, TraceSpec};

/// Dense eigensolver limit, `2^12`.
pub const EIGEN_MAX_DIM: usize = 1 << 12;

/// Eigenvalues below this are dropped from the entropy sum.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// Negative eigenvalues down to `-NEGATIVE_CLAMP` are treated as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
}

/// Real eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// `Σ |ρ(r,c)|²`, equal to `tr ρ²` for Hermitian input.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

pub fn hermitian_eigenvalues(rho: &DensityMatrix) -> Result<Spectrum> {
    hermitian_eigenvalues_with(rho, &Tolerances::default())
}

pub fn hermitian_eigenvalues_with(rho: &DensityMatrix, tol: &Tolerances) -> Result<Spectrum> {
    if rho.dim() > EIGEN_MAX_DIM {
        return Err(Error::TooLargeForEigensolver { dim: rho.dim(), max: EIGEN_MAX_DIM });
    }
    let defect = rho.hermiticity_defect();
    if defect > tol.hermiticity {
        return Err(Error::NotHermitian { defect });
    }
    Ok(Spectrum { eigenvalues: eigenvalues_unchecked(rho) })
}

/// `−Σ λ log λ` over eigenvalues above [`EIGEN_CUTOFF`].
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> Result<f64> {
    let spectrum = hermitian_eigenvalues(rho)?;
    if let Some(min) = spectrum.min() {
        if min < -NEGATIVE_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    let log = |x: f64| match base {
        LogBase::Two => x.log2(),
        LogBase::E => x.ln(),
    };
    let entropy = spectrum
        .eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > EIGEN_CUTOFF)
        .map(|l| -l * log(l))
        .sum::<f64>();
    Ok(entropy.max(0.0))
}

/// Base-2 entropy of the reduced state on `block_positions`.
///
/// `block_positions` must be a nonempty proper subset of the qubits.
pub fn block_entropy(psi: &StateVector, block_positions: &[usize]) -> Result<f64> {
    let n = psi.n_qubits();
    if block_positions.is_empty() {
        return Err(Error::Format("block must contain at least one qubit".into()));
    }
    // Validates the positions and rejects the full set.
    let block = TraceSpec::new(psi.layout(), block_positions)?;
    let complement = block.complement()?;
    debug_assert_eq!(complement.n_kept() + block.n_kept(), n);
    let reduced = powerset_trace_pure(psi, &complement)?;
    von_neumann_entropy(&reduced.matrix, LogBase::Two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell_bell() -> StateVector {
        let mut amps = vec![c(0.0); 16];
        amps[5] = c(0.5);
        amps[6] = c(-0.5);
        amps[9] = c(-0.5);
        amps[10] = c(0.5);
        StateVector::new(amps).unwrap()
    }

    #[test]
    fn purity_examples() {
        let half = DensityMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(purity(&half), 0.5);
        let v = StateVector::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        assert!((purity(&v.projector()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_examples() {
        let half = DensityMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(hermitian_eigenvalues(&half).unwrap().eigenvalues, vec![0.5, 0.5]);
        let plus = DensityMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let s = hermitian_eigenvalues(&plus).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!(s.eigenvalues[1].abs() < 1e-15);
        let skew = DensityMatrix::from_real_rows(&[[0.5, 1.0], [0.0, 0.5]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&skew), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            hermitian_eigenvalues(&DensityMatrix::zeros(EIGEN_MAX_DIM + 1)),
            Err(Error::TooLargeForEigensolver { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        let half = DensityMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert!((von_neumann_entropy(&half, LogBase::Two).unwrap() - 1.0).abs() < 1e-15);
        assert!((von_neumann_entropy(&half, LogBase::E).unwrap() - 2f64.ln()).abs() < 1e-15);
        let plus = DensityMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(von_neumann_entropy(&plus, LogBase::Two).unwrap().abs() < 1e-12);
        let bad = DensityMatrix::from_real_rows(&[[1.1, 0.0], [0.0, -0.1]]).unwrap();
        assert!(matches!(von_neumann_entropy(&bad, LogBase::Two), Err(Error::NegativeEigenvalue(_))));
        let tiny = DensityMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1e-11]]).unwrap();
        assert_eq!(von_neumann_entropy(&tiny, LogBase::Two).unwrap(), 0.0);
    }

    #[test]
    fn bell_bell_blocks() {
        let psi = bell_bell();
        assert!((block_entropy(&psi, &[4]).unwrap() - 1.0).abs() < 1e-10);
        assert!(block_entropy(&psi, &[3, 4]).unwrap().abs() < 1e-10);
        assert!((block_entropy(&psi, &[2, 4]).unwrap() - 2.0).abs() < 1e-10);
        assert!(block_entropy(&psi, &[]).is_err());
        assert!(block_entropy(&psi, &[1, 2, 3, 4]).is_err());
    }

    #[test]
    fn product_state_has_no_block_entropy() {
        let a = StateVector::new(vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let b = StateVector::new(vec![c(std::f64::consts::FRAC_1_SQRT_2); 2]).unwrap();
        let psi = a.kron(&b).unwrap().kron(&a).unwrap();
        for block in [&[1][..], &[2], &[3], &[1, 3], &[2, 3]] {
            assert!(block_entropy(&psi, block).unwrap().abs() < 1e-10);
        }
    }
}
