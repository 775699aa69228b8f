//! Additive smoothing of a sparse estimate and scaled-deviation diagnostics.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};

/// Smoothing exponent `u`. `Infinite` means no smoothing at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingParam {
    Finite(f64),
    Infinite,
}

impl SmoothingParam {
    pub fn finite(u: f64) -> Result<Self> {
        if u.is_finite() && u > 0.0 {
            Ok(Self::Finite(u))
        } else {
            Err(Error::ParameterOutOfRange(format!(
                "smoothing parameter must be positive, got {u}"
            )))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// Weight `n^-u` added to every entry; zero when `u` is infinite.
    pub fn weight(&self, n: usize) -> f64 {
        match *self {
            Self::Finite(u) => (n as f64).powf(-u),
            Self::Infinite => 0.0,
        }
    }
}

impl fmt::Display for SmoothingParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(u) => write!(f, "{u}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SmoothingParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Self::Infinite),
            other => {
                let u: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid smoothing parameter {s:?}")))?;
                if u.is_infinite() && u > 0.0 {
                    return Ok(Self::Infinite);
                }
                Self::finite(u)
            }
        }
    }
}

impl Serialize for SmoothingParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `P_tilde_ij = (P_hat_ij + n^-u) / (1 + d n^-u)`.
///
/// `n` is the length of the chain that produced `p_hat`. With
/// [`SmoothingParam::Infinite`] the input is returned unchanged.
pub fn smooth(p_hat: &TransitionMatrix, n: usize, u: SmoothingParam) -> TransitionMatrix {
    if u.is_infinite() {
        return p_hat.clone();
    }
    let d = p_hat.dim();
    let s = u.weight(n.max(1));
    let omega = 1.0 + s * d as f64;
    let entries = p_hat.entries().iter().map(|p| (p + s) / omega).collect();
    TransitionMatrix::from_parts_unchecked(d, entries)
}

/// `sqrt(n) (estimate - truth)`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledDeviation {
    d: usize,
    n: usize,
    values: Vec<f64>,
}

impl ScaledDeviation {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl fmt::Display for ScaledDeviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.values.chunks(self.d) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:9.6}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn scaled_deviation(
    estimate: &TransitionMatrix,
    truth: &TransitionMatrix,
    n: usize,
) -> Result<ScaledDeviation> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            found: estimate.dim(),
        });
    }
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
    }
    let root = (n as f64).sqrt();
    let values = estimate
        .entries()
        .iter()
        .zip(truth.entries())
        .map(|(e, t)| root * (e - t))
        .collect();
    Ok(ScaledDeviation {
        d: truth.dim(),
        n,
        values,
    })
}
