//! Benchmark harness behind `ptrace bench`.
//!
//! State generation is timed separately from tracing. Pure-state runs of the
//! power-set kernel touch only the amplitude vector and the reduced output;
//! every other method needs the full density matrix, which counts as a
//! mixed-state bench and is refused above [`MIXED_BENCH_MAX_QUBITS`] unless
//! forced.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::instrument::AllocationScope;
use crate::kernels::{
    powerset_trace_mixed_with, powerset_trace_pure_with, trace_with, KernelOptions, MethodId,
};
use crate::random::{random_mixed, random_pure, rng};
use crate::state::{DensityMatrix, StateVector, TraceSpec};

pub const MIXED_BENCH_MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchState {
    Random,
    Ghz,
    W,
    Neel,
}

impl FromStr for BenchState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(BenchState::Random),
            "ghz" => Ok(BenchState::Ghz),
            "w" => Ok(BenchState::W),
            "neel" => Ok(BenchState::Neel),
            other => Err(Error::Format(format!("unknown state '{other}'"))),
        }
    }
}

/// Method selection as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// Power-set kernel matching the input kind.
    Auto,
    Powerset,
    Bipartite,
    Multistep,
    Naive,
    Oracle,
}

impl MethodChoice {
    pub const ALL: [MethodChoice; 6] = [
        MethodChoice::Auto,
        MethodChoice::Powerset,
        MethodChoice::Bipartite,
        MethodChoice::Multistep,
        MethodChoice::Naive,
        MethodChoice::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Powerset => "powerset",
            MethodChoice::Bipartite => "bipartite",
            MethodChoice::Multistep => "multistep",
            MethodChoice::Naive => "naive",
            MethodChoice::Oracle => "oracle",
        }
    }

    /// Concrete kernel for an input of the given kind.
    pub fn resolve(self, pure_input: bool) -> MethodId {
        match self {
            MethodChoice::Auto | MethodChoice::Powerset if pure_input => MethodId::PowerSetPure,
            MethodChoice::Auto | MethodChoice::Powerset => MethodId::PowerSetMixed,
            MethodChoice::Bipartite => MethodId::BipartiteIndex,
            MethodChoice::Multistep => MethodId::MultipartiteStep,
            MethodChoice::Naive => MethodId::NaiveProjector,
            MethodChoice::Oracle => MethodId::BruteForceOracle,
        }
    }

    fn is_powerset(self) -> bool {
        matches!(self, MethodChoice::Auto | MethodChoice::Powerset)
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodChoice::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown method '{s}'")))
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn ghz_state(n: usize) -> StateVector {
    let dim = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(h, 0.0);
    amps[dim - 1] = Complex64::new(h, 0.0);
    StateVector::new(amps).expect("power-of-two length")
}

pub fn w_state(n: usize) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
    let a = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        amps[1 << k] = Complex64::new(a, 0.0);
    }
    StateVector::new(amps).expect("power-of-two length")
}

/// Basis state with odd positions (1, 3, 5, …) up and even positions down.
pub fn neel_state(n: usize) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
    let index = (0..n).step_by(2).fold(0usize, |acc, b| acc | 1 << b);
    amps[index] = Complex64::new(1.0, 0.0);
    StateVector::new(amps).expect("power-of-two length")
}

pub fn generate_pure(kind: BenchState, n: usize, seed: u64) -> StateVector {
    match kind {
        BenchState::Random => random_pure(n, &mut rng(seed)),
        BenchState::Ghz => ghz_state(n),
        BenchState::W => w_state(n),
        BenchState::Neel => neel_state(n),
    }
}

/// `Σ |entries|`, rounded to 12 significant digits.
pub fn checksum(rho: &DensityMatrix) -> f64 {
    let sum: f64 = rho.entries().iter().map(|z| z.norm()).sum();
    round_significant(sum, 12)
}

fn round_significant(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_qubits: usize,
    pub positions: Vec<usize>,
    pub method: MethodChoice,
    pub reps: usize,
    pub state: BenchState,
    pub seed: u64,
    /// Materialize the density matrix even for the power-set kernel.
    pub mixed: bool,
    pub force: bool,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub method: MethodId,
    pub n: usize,
    pub m: usize,
    pub positions: Vec<usize>,
    pub rep: usize,
    pub generation_seconds: f64,
    pub seconds: f64,
    /// Input state plus every matrix buffer the kernel allocated.
    pub peak_memory_bytes: u64,
    pub checksum: f64,
}

impl BenchReport {
    pub const TSV_HEADER: &'static str =
        "method\tn\tm\tpositions\trep\tgen_seconds\tseconds\tpeak_bytes\tchecksum";

    pub fn to_tsv(&self) -> String {
        let positions: Vec<String> = self.positions.iter().map(usize::to_string).collect();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.11e}",
            self.method,
            self.n,
            self.m,
            positions.join(","),
            self.rep,
            self.generation_seconds,
            self.seconds,
            self.peak_memory_bytes,
            self.checksum
        )
    }

    pub fn to_json(&self) -> String {
        json!({
            "method": self.method.name(),
            "n": self.n,
            "m": self.m,
            "positions": self.positions,
            "rep": self.rep,
            "seconds": self.seconds,
            "generation_seconds": self.generation_seconds,
            "peak_memory_bytes": self.peak_memory_bytes,
            "checksum": self.checksum,
        })
        .to_string()
    }
}

/// Runs the configured bench and returns one report per rep.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchReport>> {
    if config.reps == 0 {
        return Err(Error::Format("--reps must be at least 1".into()));
    }
    let spec = TraceSpec::for_qubits(config.n_qubits, &config.positions)?;
    let n = config.n_qubits;
    let pure_run = config.method.is_powerset() && !config.mixed;
    if !pure_run && n > MIXED_BENCH_MAX_QUBITS && !config.force {
        return Err(Error::CostGuardExceeded { n, max: MIXED_BENCH_MAX_QUBITS });
    }
    let method = config.method.resolve(pure_run);
    if !method.supports(&spec) {
        return Err(Error::UnsupportedPartition {
            method: method.name(),
            positions: spec.traced_positions().to_vec(),
            reason: "partition not expressible for this method",
        });
    }
    let opts = KernelOptions { parallel: config.parallel, ..KernelOptions::default() };
    let entry_bytes = std::mem::size_of::<Complex64>() as u64;

    let started = Instant::now();
    let psi = generate_pure(config.state, n, config.seed);
    let rho = (!pure_run).then(|| match config.state {
        BenchState::Random => random_mixed(n, &mut rng(config.seed)),
        _ => psi.projector(),
    });
    let generation_seconds = started.elapsed().as_secs_f64();
    let input_bytes = match &rho {
        Some(r) => (r.dim() * r.dim()) as u64 * entry_bytes,
        None => psi.amplitudes().len() as u64 * entry_bytes,
    };

    let mut reports = Vec::with_capacity(config.reps);
    for rep in 0..config.reps {
        let scope = AllocationScope::start();
        let started = Instant::now();
        let out = match (&rho, method) {
            (None, _) => powerset_trace_pure_with(&psi, &spec, &opts)?,
            (Some(r), MethodId::PowerSetMixed) => powerset_trace_mixed_with(r, &spec, &opts)?,
            (Some(r), m) => trace_with(m, r, &spec)?,
        };
        let seconds = started.elapsed().as_secs_f64();
        reports.push(BenchReport {
            method,
            n,
            m: spec.n_traced(),
            positions: spec.traced_positions().to_vec(),
            rep,
            generation_seconds,
            seconds,
            peak_memory_bytes: input_bytes + scope.bytes(),
            checksum: checksum(&out.matrix),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, positions: Vec<usize>, method: MethodChoice, state: BenchState) -> BenchConfig {
        BenchConfig {
            n_qubits: n,
            positions,
            method,
            reps: 2,
            state,
            seed: 1,
            mixed: false,
            force: false,
            parallel: false,
        }
    }

    #[test]
    fn named_states() {
        let ghz = ghz_state(3);
        assert!(ghz.norm_defect() < 1e-15);
        assert_eq!(neel_state(4).amplitudes()[0b0101].re, 1.0);
        let w = w_state(3);
        assert!(w.norm_defect() < 1e-15);
        assert_eq!(w.amplitudes()[4], w.amplitudes()[1]);
    }

    #[test]
    fn neel_checksum_is_method_invariant() {
        let mut sums = Vec::new();
        for method in MethodChoice::ALL {
            let reports = run_bench(&config(4, vec![1, 2, 3], method, BenchState::Neel)).unwrap();
            assert_eq!(reports.len(), 2);
            assert_eq!(reports[0].checksum, reports[1].checksum);
            sums.push(reports[0].checksum);
        }
        assert!(sums.windows(2).all(|w| w[0] == w[1]), "{sums:?}");
    }

    #[test]
    fn guards() {
        let mut cfg = config(4, vec![1], MethodChoice::Auto, BenchState::Ghz);
        cfg.reps = 0;
        assert!(run_bench(&cfg).is_err());
        let cfg = config(15, vec![1], MethodChoice::Bipartite, BenchState::Ghz);
        assert!(matches!(run_bench(&cfg), Err(Error::CostGuardExceeded { n: 15, max: 14 })));
        let mut cfg = config(15, vec![1], MethodChoice::Powerset, BenchState::Ghz);
        cfg.mixed = true;
        assert!(matches!(run_bench(&cfg), Err(Error::CostGuardExceeded { .. })));
        let cfg = config(5, vec![2, 4], MethodChoice::Naive, BenchState::Ghz);
        assert!(matches!(run_bench(&cfg), Err(Error::UnsupportedPartition { .. })));
    }

    #[test]
    fn report_formats() {
        let r = &run_bench(&config(3, vec![1, 2], MethodChoice::Auto, BenchState::Ghz)).unwrap()[0];
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["method"], "powerset-pure");
        assert_eq!(v["n"], 3);
        assert_eq!(v["m"], 2);
        assert_eq!(v["positions"], json!([1, 2]));
        assert_eq!(v["checksum"], 1.0);
        assert!(v["seconds"].is_number());
        assert_eq!(r.to_tsv().split('\t').count(), BenchReport::TSV_HEADER.split('\t').count());
    }
}
