use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },

    #[error("zero magnetization magnitude at cell ({i}, {j}, {k}){}", step_suffix(*.step))]
    Degenerate {
        i: usize,
        j: usize,
        k: usize,
        step: Option<u64>,
    },

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e} in demag convolution")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("allocation of {0} elements failed")]
    Allocation(usize),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn step_suffix(step: Option<u64>) -> String {
    match step {
        Some(s) => format!(" during step {s}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Degenerate { .. } | Error::ImaginaryResidue { .. })
    }
}
