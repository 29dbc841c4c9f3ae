//! State files.
//!
//! Text form:
//!
//! ```text
//! QSTATE 1 PURE 2
//! # comment lines and blank lines are skipped
//! 0 0
//! 0.70710678118 0
//! -0.70710678118 0
//! 0 0
//! ```
//!
//! followed by `2^N` (`PURE`) or `4^N` row-major (`MIXED`) `<re> <im>` lines.
//!
//! Binary form: magic `QST1`, one kind byte (0 = pure, 1 = mixed), one byte
//! `N`, two zero bytes, then little-endian `f64` `(re, im)` pairs.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, State, StateVector, Tolerances, DEFAULT_MAX_QUBITS};

pub const MAGIC: &[u8; 4] = b"QST1";
pub const BINARY_HEADER_LEN: usize = 8;
const TEXT_TAG: &str = "QSTATE";
const TEXT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Mixed,
}

impl StateKind {
    /// Number of complex values in the payload for `n` qubits.
    fn payload_len(self, n: usize) -> usize {
        match self {
            StateKind::Pure => 1usize << n,
            StateKind::Mixed => 1usize << (2 * n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FileFormat {
    #[default]
    Text,
    Binary,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > DEFAULT_MAX_QUBITS {
        return Err(Error::Format(format!("qubit count {n} outside 1..={DEFAULT_MAX_QUBITS}")));
    }
    Ok(())
}

fn build_state(kind: StateKind, n: usize, values: Vec<Complex64>) -> Result<State> {
    match kind {
        StateKind::Pure => Ok(State::Pure(StateVector::new(values)?)),
        StateKind::Mixed => Ok(State::Mixed(DensityMatrix::from_entries(1 << n, values)?)),
    }
}

fn parse_float(token: &str, line_no: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line_no}: '{token}' is not a number")))
}

/// Parses the text form.
pub fn parse_text(input: &str) -> Result<State> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [tag, version, kind, n] = fields[..] else {
        return Err(Error::Format(format!("bad header '{header}'")));
    };
    if tag != TEXT_TAG || version != TEXT_VERSION {
        return Err(Error::Format(format!("bad header '{header}'")));
    }
    let kind = match kind {
        "PURE" => StateKind::Pure,
        "MIXED" => StateKind::Mixed,
        other => return Err(Error::Format(format!("unknown state kind '{other}'"))),
    };
    let n: usize = n.parse().map_err(|_| Error::Format(format!("bad qubit count '{n}'")))?;
    check_qubits(n)?;
    let expected = kind.payload_len(n);

    let mut values = Vec::new();
    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace();
        let (Some(re), Some(im), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Format(format!("line {line_no}: expected '<re> <im>'")));
        };
        let z = Complex64::new(parse_float(re, line_no)?, parse_float(im, line_no)?);
        if !z.is_finite() {
            return Err(Error::InvalidValue { index: values.len() });
        }
        if values.len() == expected {
            return Err(Error::TruncatedFile { expected, found: expected + 1 });
        }
        values.push(z);
    }
    if values.len() != expected {
        return Err(Error::TruncatedFile { expected, found: values.len() });
    }
    build_state(kind, n, values)
}

/// Parses the binary form.
pub fn parse_binary(bytes: &[u8]) -> Result<State> {
    if bytes.len() < BINARY_HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing QST1 header".into()));
    }
    let kind = match bytes[4] {
        0 => StateKind::Pure,
        1 => StateKind::Mixed,
        k => return Err(Error::Format(format!("unknown kind byte {k}"))),
    };
    let n = bytes[5] as usize;
    check_qubits(n)?;
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(Error::Format("reserved header bytes must be zero".into()));
    }
    let payload = &bytes[BINARY_HEADER_LEN..];
    let expected = kind.payload_len(n);
    let found = payload.len() / 16;
    if !payload.len().is_multiple_of(16) || found != expected {
        return Err(Error::TruncatedFile { expected, found });
    }
    let mut values = Vec::with_capacity(expected);
    for (index, chunk) in payload.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8-byte slice"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8-byte slice"));
        let z = Complex64::new(re, im);
        if !z.is_finite() {
            return Err(Error::InvalidValue { index });
        }
        values.push(z);
    }
    build_state(kind, n, values)
}

/// Binary if the input starts with the magic bytes, text otherwise.
pub fn parse_state_bytes(bytes: &[u8]) -> Result<State> {
    if bytes.starts_with(MAGIC) {
        return parse_binary(bytes);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("not UTF-8 text".into()))?;
    parse_text(text)
}

pub fn parse_state_file(path: impl AsRef<Path>) -> Result<State> {
    parse_state_bytes(&std::fs::read(path)?)
}

fn kind_and_values(state: &State) -> (StateKind, usize, &[Complex64]) {
    match state {
        State::Pure(psi) => (StateKind::Pure, psi.n_qubits(), psi.amplitudes()),
        State::Mixed(rho) => (
            StateKind::Mixed,
            rho.n_qubits().expect("state-file matrices have power-of-two dimension"),
            rho.entries(),
        ),
    }
}

/// Text form with 17 significant digits per component.
pub fn to_text(state: &State) -> String {
    let (kind, n, values) = kind_and_values(state);
    let kind = match kind {
        StateKind::Pure => "PURE",
        StateKind::Mixed => "MIXED",
    };
    let mut out = String::with_capacity(16 + values.len() * 50);
    let _ = writeln!(out, "{TEXT_TAG} {TEXT_VERSION} {kind} {n}");
    for z in values {
        let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
    }
    out
}

pub fn to_binary(state: &State) -> Vec<u8> {
    let (kind, n, values) = kind_and_values(state);
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 16 * values.len());
    out.extend_from_slice(MAGIC);
    out.push(match kind {
        StateKind::Pure => 0,
        StateKind::Mixed => 1,
    });
    out.push(n as u8);
    out.extend_from_slice(&[0, 0]);
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn serialize(state: &State, format: FileFormat) -> Vec<u8> {
    match format {
        FileFormat::Text => to_text(state).into_bytes(),
        FileFormat::Binary => to_binary(state),
    }
}

pub fn write_state_file(path: impl AsRef<Path>, state: &State, format: FileFormat) -> Result<()> {
    std::fs::write(path, serialize(state, format))?;
    Ok(())
}

/// Normalization defect of a loaded state: `|Σ|ψ|² − 1|` for pure states,
/// the larger of the trace and Hermiticity defects for matrices.
pub fn normalization_defect(state: &State) -> f64 {
    match state {
        State::Pure(psi) => psi.norm_defect(),
        State::Mixed(rho) => {
            let trace = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
            trace.max(rho.hermiticity_defect())
        }
    }
}

pub fn check_normalization(state: &State, tol: &Tolerances) -> Result<()> {
    let defect = normalization_defect(state);
    let limit = match state {
        State::Pure(_) => tol.norm,
        State::Mixed(_) => tol.trace.min(tol.hermiticity),
    };
    if defect > limit {
        return Err(Error::NotNormalized { defect });
    }
    Ok(())
}

/// Parses a comma-separated list of 1-based qubit positions, e.g. `2,4,6`.
/// Whitespace around entries is ignored; an empty string is an empty list.
pub fn parse_positions(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<usize>()
                .map_err(|_| Error::Format(format!("'{tok}' is not a qubit position")))
        })
        .collect()
}
