//! Floating point precision selection.

use std::fmt;
use std::str::FromStr;

use rustfft::num_traits::Float;
use rustfft::FftNum;

/// Scalar type of the lattices. Implemented for `f32` and `f64`.
pub trait Real: FftNum + Float + Default + fmt::Display {
    /// Allowed imaginary residue of the demag convolution, relative to max |M|.
    const RESIDUE_TOL: f64;
    const PRECISION: Precision;

    fn from_double(v: f64) -> Self;
    fn to_double(self) -> f64;
}

impl Real for f64 {
    const RESIDUE_TOL: f64 = 1e-9;
    const PRECISION: Precision = Precision::F64;

    #[inline]
    fn from_double(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_double(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const RESIDUE_TOL: f64 = 1e-4;
    const PRECISION: Precision = Precision::F32;

    #[inline]
    fn from_double(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_double(self) -> f64 {
        self as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" | "single" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            other => Err(format!("unknown precision `{other}` (expected f32 or f64)")),
        }
    }
}
