//! Seeded cross-method agreement check behind `ptrace verify`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::element_index_pairs;
use crate::kernels::{powerset_trace_mixed, powerset_trace_pure, trace_with, MethodId};
use crate::random::{random_mixed, random_pure, random_spec, rng};
use crate::state::{DensityMatrix, StateRef, TraceSpec};

/// Agreement threshold for every method pair.
pub const AGREEMENT_TOL: f64 = 1e-12;

/// Largest `N` accepted; mixed inputs cost `O(8^N)` to generate.
pub const VERIFY_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub n_qubits: usize,
    pub trials: usize,
    pub seed: u64,
    pub positions: Option<Vec<usize>>,
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Pure,
    Mixed,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Pure => "pure",
            InputKind::Mixed => "mixed",
        })
    }
}

/// The worst disagreement seen.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub trial: usize,
    pub state_seed: u64,
    pub kind: InputKind,
    pub spec: TraceSpec,
    pub method: MethodId,
    pub reference: MethodId,
    pub element: (usize, usize),
    pub difference: f64,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trial {} state seed {} ({}) spec {}: {} vs {} differ by {:e} at element ({}, {})",
            self.trial,
            self.state_seed,
            self.kind,
            self.spec,
            self.method,
            self.reference,
            self.difference,
            self.element.0,
            self.element.1
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub comparisons: usize,
    pub max_disagreement: f64,
    pub worst: Option<Disagreement>,
    /// Verbose per-trial lines.
    pub lines: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.max_disagreement <= AGREEMENT_TOL
    }
}

fn worst_element(a: &DensityMatrix, b: &DensityMatrix) -> ((usize, usize), f64) {
    let dim = a.dim();
    let mut best = ((0, 0), 0.0);
    for r in 0..dim {
        for c in 0..dim {
            let d = (a.get(r, c) - b.get(r, c)).norm();
            if d > best.1 || d.is_nan() {
                best = ((r, c), d);
            }
        }
    }
    best
}

fn index_set_line(spec: &TraceSpec) -> Option<String> {
    let dim = spec.reduced_dim() as u64;
    let (l, m) = if dim > 2 { (2, 1) } else { (dim - 1, 0) };
    let pairs = element_index_pairs(spec, l, m).ok()?;
    let terms: Vec<String> = pairs.map(|(r, c)| format!("ρ[{r},{c}]")).collect();
    Some(format!("  ρ'[{l},{m}] = {}", terms.join(" + ")))
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    let n = config.n_qubits;
    if !(2..=VERIFY_MAX_QUBITS).contains(&n) {
        return Err(Error::Format(format!(
            "verify needs 2..={VERIFY_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let fixed = config.positions.as_ref().map(|p| TraceSpec::for_qubits(n, p)).transpose()?;
    let mut spec_rng = rng(config.seed);
    let mut report = VerifyReport::default();

    for trial in 0..config.trials {
        let state_seed = config.seed.wrapping_mul(1_000_003).wrapping_add(trial as u64);
        let spec = match &fixed {
            Some(s) => s.clone(),
            None => random_spec(n, &mut spec_rng)?,
        };
        let psi = random_pure(n, &mut rng(state_seed));
        let rho = random_mixed(n, &mut rng(state_seed ^ 0x5EED));

        let pure_ref = powerset_trace_pure(&psi, &spec)?.matrix;
        let mixed_ref = powerset_trace_mixed(&rho, &spec)?.matrix;
        let mut trial_max = 0.0f64;
        for (kind, state, reference, ref_method) in [
            (InputKind::Pure, StateRef::Pure(&psi), &pure_ref, MethodId::PowerSetPure),
            (InputKind::Mixed, StateRef::Mixed(&rho), &mixed_ref, MethodId::PowerSetMixed),
        ] {
            for method in MethodId::ALL {
                if method == ref_method || !method.supports(&spec) {
                    continue;
                }
                if method.needs_pure() && kind == InputKind::Mixed {
                    continue;
                }
                let out = trace_with(method, state, &spec)?.matrix;
                let (element, difference) = worst_element(&out, reference);
                report.comparisons += 1;
                trial_max = trial_max.max(difference);
                if difference > report.max_disagreement || difference.is_nan() {
                    report.max_disagreement = difference;
                    report.worst = Some(Disagreement {
                        trial,
                        state_seed,
                        kind,
                        spec: spec.clone(),
                        method,
                        reference: ref_method,
                        element,
                        difference,
                    });
                }
            }
        }
        if config.verbose {
            let trace_gap = (mixed_ref.trace() - Complex64::new(1.0, 0.0)).norm();
            report.lines.push(format!(
                "trial {trial}: {spec} max diff {trial_max:.3e}, trace defect {trace_gap:.3e}"
            ));
            if let Some(line) = index_set_line(&spec) {
                report.lines.push(line);
            }
        }
    }
    Ok(report)
}
