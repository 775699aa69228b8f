//! Transition matrices, state sequences and chain simulation.
//!
//! States are 0-based inside the library. Conversion to and from the
//! 1-based labels used in files happens at the `StateSequence` boundary.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::SeedSpec;

/// Tolerance on row sums accepted from callers.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Default convergence tolerance for [`steady_state`].
pub const DEFAULT_STEADY_TOL: f64 = 1e-10;

/// Default cap on the effective exponent reached by repeated squaring.
pub const DEFAULT_MAX_POWER: u64 = 1 << 40;

/// A `d x d` row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates `rows` and renormalizes each row by its sum.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.as_ref().len() != d) {
            return Err(Error::NonSquare {
                rows: d,
                cols: rows.iter().map(|r| r.as_ref().len()).collect(),
            });
        }
        let mut entries = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if p < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSumViolation { row: i, sum });
            }
            entries.extend(row.iter().map(|p| p / sum));
        }
        Ok(Self { d, entries })
    }

    /// Validates a flat row-major slice of length `d * d`.
    pub fn from_row_major(d: usize, values: &[f64]) -> Result<Self> {
        if d == 0 || values.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: values.len(),
            });
        }
        let rows: Vec<&[f64]> = values.chunks(d).collect();
        Self::from_rows(&rows)
    }

    /// Wraps entries that are row-stochastic by construction.
    pub(crate) fn from_parts_unchecked(d: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), d * d);
        Self { d, entries }
    }

    pub fn identity(d: usize) -> Self {
        assert!(d >= 1, "identity matrix needs at least one state");
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1.0;
        }
        Self { d, entries }
    }

    /// Number of states.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Entry at 0-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.d)
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `self * other`. Products of stochastic matrices are stochastic.
    pub fn multiply(&self, other: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(Self::from_parts_unchecked(
            self.d,
            mat_mul(self.d, &self.entries, &other.entries),
        ))
    }

    /// `P^m` by binary exponentiation. `m = 0` gives the identity.
    pub fn pow(&self, mut m: u64) -> TransitionMatrix {
        let d = self.d;
        let mut result = Self::identity(d).entries;
        let mut base = self.entries.clone();
        while m > 0 {
            if m & 1 == 1 {
                result = mat_mul(d, &result, &base);
            }
            m >>= 1;
            if m > 0 {
                base = mat_mul(d, &base, &base);
            }
        }
        Self::from_parts_unchecked(d, result)
    }

    /// Largest over columns of `max_i P_ij - min_i P_ij`; zero iff all rows coincide.
    pub fn row_divergence(&self) -> f64 {
        column_spread(self.d, &self.entries)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.d)
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

/// Checks a square array and returns it as a [`TransitionMatrix`].
pub fn validate_matrix<R: AsRef<[f64]>>(raw: &[R]) -> Result<TransitionMatrix> {
    TransitionMatrix::from_rows(raw)
}

fn mat_mul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn column_spread(d: usize, m: &[f64]) -> f64 {
    (0..d)
        .map(|j| {
            let (lo, hi) = (0..d).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                let v = m[i * d + j];
                (lo.min(v), hi.max(v))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Probability vector over `d` states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / sum).collect(),
        })
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            probs: vec![1.0 / d as f64; d],
        }
    }

    /// All mass on 0-based `state`.
    pub fn point_mass(d: usize, state: usize) -> Result<Self> {
        if state >= d {
            return Err(Error::StateOutOfRange {
                state: state + 1,
                d,
            });
        }
        let mut probs = vec![0.0; d];
        probs[state] = 1.0;
        Ok(Self { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// One step of the chain: `V_{k+1} = P' V_k`.
    pub fn step(&self, p: &TransitionMatrix) -> Result<Distribution> {
        let d = p.dim();
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        let mut next = vec![0.0; d];
        for (i, &vi) in self.probs.iter().enumerate() {
            for (j, slot) in next.iter_mut().enumerate() {
                *slot += vi * p.get(i, j);
            }
        }
        Ok(Self { probs: next })
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Observed states `X_1..X_n` over `d` states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    d: usize,
    states: Vec<usize>,
}

impl StateSequence {
    /// Builds a sequence from 0-based states.
    pub fn new(d: usize, states: Vec<usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::ParameterOutOfRange("d must be at least 1".into()));
        }
        if states.is_empty() {
            return Err(Error::SequenceTooShort { len: 0, min: 1 });
        }
        if let Some(&s) = states.iter().find(|&&s| s >= d) {
            return Err(Error::StateOutOfRange { state: s + 1, d });
        }
        Ok(Self { d, states })
    }

    /// Builds a sequence from 1-based labels as they appear in files.
    pub fn from_one_based(d: usize, labels: &[usize]) -> Result<Self> {
        if let Some(&s) = labels.iter().find(|&&s| s == 0 || s > d) {
            return Err(Error::StateOutOfRange { state: s, d });
        }
        Self::new(d, labels.iter().map(|s| s - 1).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// 0-based states.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.states.iter().map(|s| s + 1).collect()
    }
}

/// Inverse-CDF sampler over the rows of a transition matrix.
///
/// Cumulative sums run left to right in index order and the last entry of
/// every row is pinned to 1.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    d: usize,
    initial_cdf: Vec<f64>,
    row_cdfs: Vec<f64>,
}

impl ChainSampler {
    pub fn new(p: &TransitionMatrix, initial: &Distribution) -> Result<Self> {
        let d = p.dim();
        if initial.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: initial.dim(),
            });
        }
        let row_cdfs = p.rows().flat_map(cumulative).collect();
        Ok(Self {
            d,
            initial_cdf: cumulative(initial.probs()),
            row_cdfs,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Fills `out` with `n` states drawn from `rng`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, out: &mut Vec<usize>) {
        out.clear();
        if n == 0 {
            return;
        }
        out.reserve(n);
        let mut state = pick(&self.initial_cdf, rng.random::<f64>());
        out.push(state);
        for _ in 1..n {
            let row = &self.row_cdfs[state * self.d..(state + 1) * self.d];
            state = pick(row, rng.random::<f64>());
            out.push(state);
        }
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

#[inline]
fn pick(cdf: &[f64], u: f64) -> usize {
    // u < 1 and the last entry is exactly 1, so a match always exists.
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Simulates `n` steps of the chain with transition matrix `p`.
pub fn generate_chain(
    p: &TransitionMatrix,
    initial: &Distribution,
    n: usize,
    seed: SeedSpec,
) -> Result<StateSequence> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("chain length must be at least 1".into()));
    }
    let sampler = ChainSampler::new(p, initial)?;
    let mut states = Vec::new();
    sampler.sample_into(&mut seed.rng(), n, &mut states);
    Ok(StateSequence { d: p.dim(), states })
}

/// Limiting distribution as the common row of `lim P^m`.
///
/// Squares `P` repeatedly until all rows agree to within `tol` (largest
/// column spread) and returns their average. Fails with
/// [`Error::NoLimit`] once the effective exponent would exceed `max_power`.
pub fn steady_state(p: &TransitionMatrix, tol: f64, max_power: u64) -> Result<Distribution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("tol must be positive, got {tol}")));
    }
    if max_power < 1 {
        return Err(Error::ParameterOutOfRange("max_power must be at least 1".into()));
    }
    let d = p.dim();
    let mut power = p.entries.clone();
    let mut exponent: u64 = 1;
    loop {
        let divergence = column_spread(d, &power);
        if divergence < tol {
            let mut probs = vec![0.0; d];
            for row in power.chunks(d) {
                for (acc, v) in probs.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|v| *v /= total);
            return Ok(Distribution { probs });
        }
        match exponent.checked_mul(2) {
            Some(next) if next <= max_power => {
                power = mat_mul(d, &power, &power);
                exponent = next;
            }
            _ => return Err(Error::NoLimit { exponent, divergence }),
        }
    }
}

/// `m`-th power of `[[(1+a)/2, (1-a)/2], [(1-a)/2, (1+a)/2]]` in closed form.
pub fn two_state_power(a: f64, m: u32) -> Result<TransitionMatrix> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::ParameterOutOfRange(format!("a must lie in [0, 1), got {a}")));
    }
    if m == 0 {
        return Err(Error::ParameterOutOfRange("power must be at least 1".into()));
    }
    let am = a.powi(m as i32);
    let stay = (1.0 + am) / 2.0;
    let flip = (1.0 - am) / 2.0;
    Ok(TransitionMatrix::from_parts_unchecked(
        2,
        vec![stay, flip, flip, stay],
    ))
}
