//! Dense Hermitian eigensolvers.
//!
//! Two independent routes:
//!
//! * [`jacobi_eigen`]: cyclic complex Jacobi rotations, eigenvalues and
//!   eigenvectors. Accurate and simple, `O(n³)` per sweep.
//! * [`tridiagonal_eigenvalues`]: Householder reduction to a real symmetric
//!   tridiagonal matrix followed by implicit QL. Eigenvalues only; used for
//!   larger matrices.

use num_complex::Complex64;

use crate::state::DensityMatrix;

/// Matrices up to this size go through Jacobi in [`eigenvalues_unchecked`].
pub const JACOBI_MAX_DIM: usize = 64;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Cyclic Jacobi on a Hermitian matrix. Only the Hermitian part of the input
/// is meaningful; no check is made here.
pub fn jacobi_eigen(rho: &DensityMatrix) -> EigenDecomposition {
    let n = rho.dim();
    let mut a = rho.entries().to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * scale).powi(2);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|r| v[r * n + k]).collect()).collect();
    EigenDecomposition { values, vectors }
}

/// Annihilates `a[p][q]` with the unitary `J = diag(1, ē) · R(θ)` on the
/// `(p, q)` plane, where `e` is the phase of `a[p][q]`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let g = apq.norm();
    if g < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / g;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    } else {
        0.0
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let pc = phase.conj();
    let (jpp, jpq, jqp, jqq) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0), pc * -s, pc * c);

    // A ← A J
    for r in 0..n {
        let x = a[r * n + p];
        let y = a[r * n + q];
        a[r * n + p] = x * jpp + y * jqp;
        a[r * n + q] = x * jpq + y * jqq;
    }
    // A ← J† A
    for col in 0..n {
        let x = a[p * n + col];
        let y = a[q * n + col];
        a[p * n + col] = jpp.conj() * x + jqp.conj() * y;
        a[q * n + col] = jpq.conj() * x + jqq.conj() * y;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
    // V ← V J
    for r in 0..n {
        let x = v[r * n + p];
        let y = v[r * n + q];
        v[r * n + p] = x * jpp + y * jqp;
        v[r * n + q] = x * jpq + y * jqq;
    }
}

/// Householder tridiagonalization plus implicit QL. Descending order.
pub fn tridiagonal_eigenvalues(rho: &DensityMatrix) -> Vec<f64> {
    let n = rho.dim();
    let (mut d, mut e) = tridiagonalize(rho);
    implicit_ql(&mut d, &mut e);
    d.sort_by(|a, b| b.total_cmp(a));
    debug_assert_eq!(d.len(), n);
    d
}

/// Reduces to Hermitian tridiagonal form; returns the real diagonal and the
/// moduli of the sub-diagonal (`e[k]` couples `k` and `k + 1`, last is 0).
fn tridiagonalize(rho: &DensityMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = rho.dim();
    let mut a = rho.entries().to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let xnorm = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        for (j, i) in (k + 1..n).enumerate() {
            v[j] = a[i * n + k];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v[..len] {
            *z /= vnorm;
        }
        // p = S v on the trailing block S = a[k+1.., k+1..]
        for (j, i) in (k + 1..n).enumerate() {
            p[j] = (0..len).map(|t| a[i * n + k + 1 + t] * v[t]).sum();
        }
        let kk: f64 = (0..len).map(|t| (v[t].conj() * p[t]).re).sum();
        for t in 0..len {
            p[t] -= v[t] * kk;
        }
        // S ← S − 2 v w† − 2 w v†, with w stored in p
        for r in 0..len {
            for s in 0..len {
                a[(k + 1 + r) * n + k + 1 + s] -= (v[r] * p[s].conj() + p[r] * v[s].conj()) * 2.0;
            }
        }
        for i in k + 1..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
    }
    let d = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e: Vec<f64> = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i].norm()).collect();
    e.push(0.0);
    (d, e)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix.
fn implicit_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Eigenvalues (descending) without a Hermiticity check; Jacobi for small
/// matrices, tridiagonal QL above [`JACOBI_MAX_DIM`].
pub fn eigenvalues_unchecked(rho: &DensityMatrix) -> Vec<f64> {
    if rho.dim() <= JACOBI_MAX_DIM {
        jacobi_eigen(rho).values
    } else {
        tridiagonal_eigenvalues(rho)
    }
}
