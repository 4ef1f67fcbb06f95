//! JSON files for states and channels.
//!
//! Matrices are lists of rows and each entry is a `[re, im]` pair.
//!
//! ```json
//! {"dA": 2, "dB": 2, "chi": [[[0.7071067811865476, 0], [0, 0]], [[0, 0], [0.7071067811865476, 0]]]}
//! {"dA": 2, "dB": 2, "rho": [[[0.5, 0], ...], ...]}
//! {"dim": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! `chi` is the `dA x dB` coefficient matrix of a pure state and `rho` a
//! `dA dB x dA dB` density matrix with index `i dB + j`. Exactly one of the
//! two must be present. Unknown keys and non-finite numbers are rejected.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};
use crate::quantum::{DensityMatrix, PureState, QuantumChannel};

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(rename = "dA")]
    d_a: usize,
    #[serde(rename = "dB")]
    d_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chi: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<RawMatrix>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    dim: usize,
    kraus: Vec<RawMatrix>,
}

/// Contents of a state file.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateSpec {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            StateSpec::Pure(s) => s.dims(),
            StateSpec::Mixed(rho) => rho.dims(),
        }
    }
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn to_matrix(raw: &RawMatrix, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix> {
    if raw.len() != rows || raw.iter().any(|r| r.len() != cols) {
        return Err(format_err(format!("{what} must be a {rows}x{cols} matrix")));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for row in raw {
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(format_err(format!("{what} has a non-finite entry")));
            }
            data.push(Complex::new(re, im));
        }
    }
    ComplexMatrix::new(rows, cols, data)
}

fn from_matrix(m: &ComplexMatrix) -> RawMatrix {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn parse_state(text: &str) -> Result<StateSpec> {
    let file: StateFile = serde_json::from_str(text)?;
    let (d_a, d_b) = (file.d_a, file.d_b);
    if d_a == 0 || d_b == 0 {
        return Err(format_err("dA and dB must be positive"));
    }
    match (&file.chi, &file.rho) {
        (Some(chi), None) => Ok(StateSpec::Pure(PureState::new(to_matrix(chi, d_a, d_b, "chi")?)?)),
        (None, Some(rho)) => {
            let n = d_a * d_b;
            Ok(StateSpec::Mixed(DensityMatrix::new(d_a, d_b, to_matrix(rho, n, n, "rho")?)?))
        }
        _ => Err(format_err("state file needs exactly one of `chi` and `rho`")),
    }
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(format_err("dim must be positive"));
    }
    if file.kraus.is_empty() {
        return Err(format_err("kraus must list at least one operator"));
    }
    let kraus = file
        .kraus
        .iter()
        .enumerate()
        .map(|(i, k)| to_matrix(k, file.dim, file.dim, &format!("kraus[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(kraus)
}

pub fn state_to_json(state: &StateSpec) -> String {
    let (d_a, d_b) = state.dims();
    let file = match state {
        StateSpec::Pure(s) => StateFile { d_a, d_b, chi: Some(from_matrix(s.chi())), rho: None },
        StateSpec::Mixed(rho) => StateFile { d_a, d_b, chi: None, rho: Some(from_matrix(rho.matrix())) },
    };
    serde_json::to_string_pretty(&file).expect("state serializes")
}

pub fn channel_to_json(ch: &QuantumChannel) -> String {
    let file = ChannelFile { dim: ch.dim_in(), kraus: ch.kraus().iter().map(from_matrix).collect() };
    serde_json::to_string_pretty(&file).expect("channel serializes")
}

/// Reads a file, naming it in any error.
pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_state(path: &Path) -> Result<StateSpec> {
    with_path(path, parse_state(&read_text(path)?))
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    with_path(path, parse_channel(&read_text(path)?))
}

pub fn write_state(path: &Path, state: &StateSpec) -> Result<()> {
    Ok(fs::write(path, state_to_json(state) + "\n")?)
}

pub fn write_channel(path: &Path, ch: &QuantumChannel) -> Result<()> {
    Ok(fs::write(path, channel_to_json(ch) + "\n")?)
}
