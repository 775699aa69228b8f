//! Maximum-likelihood estimation of a transition matrix from one chain.

use serde::Serialize;

use crate::chain::{Distribution, StateSequence, TransitionMatrix};
use crate::error::{Error, Result};

/// Visit and transition counts of an observed chain.
///
/// `visits[i]` counts state `i` among `X_1..X_{n-1}`; the final state is
/// excluded because no transition out of it is observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionCounts {
    d: usize,
    visits: Vec<u64>,
    transitions: Vec<u64>,
}

impl TransitionCounts {
    /// Counts transitions in raw 0-based states. Callers guarantee every
    /// state is `< d`.
    pub(crate) fn from_states(d: usize, states: &[usize]) -> Self {
        let mut visits = vec![0u64; d];
        let mut transitions = vec![0u64; d * d];
        for w in states.windows(2) {
            visits[w[0]] += 1;
            transitions[w[0] * d + w[1]] += 1;
        }
        Self {
            d,
            visits,
            transitions,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    /// Count of observed `i -> j` steps, 0-based.
    pub fn transition(&self, i: usize, j: usize) -> u64 {
        self.transitions[i * self.d + j]
    }

    pub fn transitions_from(&self, i: usize) -> &[u64] {
        &self.transitions[i * self.d..(i + 1) * self.d]
    }

    /// Total number of observed transitions, `n - 1`.
    pub fn total(&self) -> u64 {
        self.visits.iter().sum()
    }

    /// Row-wise `n_ij / n_i`, with an identity row wherever `n_i = 0`.
    pub fn estimate(&self) -> TransitionMatrix {
        let d = self.d;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            let row = &mut entries[i * d..(i + 1) * d];
            match self.visits[i] {
                0 => row[i] = 1.0,
                ni => {
                    let ni = ni as f64;
                    for (slot, &nij) in row.iter_mut().zip(self.transitions_from(i)) {
                        *slot = nij as f64 / ni;
                    }
                }
            }
        }
        TransitionMatrix::from_parts_unchecked(d, entries)
    }
}

pub fn count_transitions(seq: &StateSequence) -> Result<TransitionCounts> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort {
            len: seq.len(),
            min: 2,
        });
    }
    Ok(TransitionCounts::from_states(seq.dim(), seq.states()))
}

/// Maximum-likelihood estimate `P_hat` of the transition matrix.
///
/// States never left during the chain (`n_i = 0`, including a state seen
/// only in the final position) get an identity row.
pub fn mle_estimate(seq: &StateSequence) -> Result<TransitionMatrix> {
    Ok(count_transitions(seq)?.estimate())
}

/// `vec(P)`: the rows of `P` laid end to end.
///
/// The 1-based entry `(i, j)` sits at 1-based position `j + (i - 1) d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorizedMatrix {
    d: usize,
    values: Vec<f64>,
}

impl VectorizedMatrix {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let d = (values.len() as f64).sqrt().round() as usize;
        if d == 0 || d * d != values.len() {
            return Err(Error::LengthNotSquare(values.len()));
        }
        Ok(Self { d, values })
    }

    /// 0-based position of 0-based entry `(i, j)`.
    pub fn position(d: usize, i: usize, j: usize) -> usize {
        j + i * d
    }

    /// 0-based entry `(i, j)` of position `k`.
    pub fn cell(d: usize, k: usize) -> (usize, usize) {
        (k / d, k % d)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[Self::position(self.d, i, j)]
    }
}

pub fn vectorize(p: &TransitionMatrix) -> VectorizedMatrix {
    VectorizedMatrix {
        d: p.dim(),
        values: p.entries().to_vec(),
    }
}

pub fn devectorize(v: &VectorizedMatrix) -> Result<TransitionMatrix> {
    TransitionMatrix::from_row_major(v.d, &v.values)
}

/// Limiting covariance `Sigma_P` of the vectorized estimator.
///
/// Rows and columns are indexed by vector position. Entry
/// `((i,j), (k,l))` is `delta_ik P_ij (delta_jl - P_il)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticCovariance {
    d: usize,
    entries: Vec<f64>,
}

impl AsymptoticCovariance {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Side length `d^2`.
    pub fn size(&self) -> usize {
        self.d * self.d
    }

    /// Entry at 0-based vector positions `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size() + col]
    }

    /// Entry for 0-based cells `(i, j)` and `(k, l)`.
    pub fn cell(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.d;
        self.get(
            VectorizedMatrix::position(d, i, j),
            VectorizedMatrix::position(d, k, l),
        )
    }

    /// Row-major `d^2 x d^2` entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Divides block `i` by the long-run frequency `pi_i` of state `i`.
    ///
    /// Row `i` of the estimator is built from about `n pi_i` transitions,
    /// so this is the limiting covariance of `sqrt(n) (P_hat_v - P_v)` for
    /// a chain of length `n` whose stationary distribution is `pi`. Blocks
    /// of states with `pi_i = 0` are left as zero.
    pub fn per_visit_scaled(&self, pi: &Distribution) -> Result<AsymptoticCovariance> {
        if pi.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: pi.dim(),
            });
        }
        let d = self.d;
        let size = self.size();
        let mut entries = self.entries.clone();
        for (row, chunk) in entries.chunks_mut(size).enumerate() {
            let weight = pi.probs()[row / d];
            for v in chunk.iter_mut() {
                *v = if weight > 0.0 { *v / weight } else { 0.0 };
            }
        }
        Ok(Self { d, entries })
    }
}

pub fn asymptotic_covariance(p: &TransitionMatrix) -> AsymptoticCovariance {
    let d = p.dim();
    let size = d * d;
    let mut entries = vec![0.0; size * size];
    for i in 0..d {
        for j in 0..d {
            let row = VectorizedMatrix::position(d, i, j);
            let pij = p.get(i, j);
            for l in 0..d {
                let col = VectorizedMatrix::position(d, i, l);
                let delta = if j == l { 1.0 } else { 0.0 };
                entries[row * size + col] = pij * (delta - p.get(i, l));
            }
        }
    }
    AsymptoticCovariance { d, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(d: usize, labels: &[usize]) -> StateSequence {
        StateSequence::from_one_based(d, labels).unwrap()
    }

    #[test]
    fn counts_first_table_sample() {
        let c = count_transitions(&seq(4, &[3, 4, 2, 4, 3, 4, 3, 4, 4, 1])).unwrap();
        assert_eq!(c.visits(), &[0, 1, 3, 5]);
        assert_eq!(c.transitions_from(3), &[1, 1, 2, 1]);
        assert_eq!(c.total(), 9);
    }

    #[test]
    fn counts_single_state() {
        let c = count_transitions(&seq(1, &[1, 1, 1])).unwrap();
        assert_eq!(c.visits(), &[2]);
        assert_eq!(c.transition(0, 0), 2);
    }

    #[test]
    fn counts_one_transition() {
        let c = count_transitions(&seq(3, &[1, 2])).unwrap();
        assert_eq!(c.visits(), &[1, 0, 0]);
        for i in 0..3 {
            for j in 0..3 {
                let expected = u64::from((i, j) == (0, 1));
                assert_eq!(c.transition(i, j), expected);
            }
        }
    }

    #[test]
    fn short_sequence_rejected() {
        assert!(matches!(
            count_transitions(&seq(2, &[1])),
            Err(Error::SequenceTooShort { len: 1, min: 2 })
        ));
        assert!(mle_estimate(&seq(2, &[2])).is_err());
    }

    #[test]
    fn estimate_first_table_sample() {
        let p = mle_estimate(&seq(4, &[3, 4, 2, 4, 3, 4, 3, 4, 4, 1])).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.2, 0.2, 0.4, 0.2],
        ];
        for (row, exp) in p.rows().zip(expected.iter()) {
            assert_eq!(row, exp);
        }
    }

    #[test]
    fn alternating_chain() {
        let p = mle_estimate(&seq(2, &[1, 2, 1, 2, 1])).unwrap();
        assert_eq!(p.entries(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn unvisited_states_get_identity_rows() {
        let p = mle_estimate(&seq(3, &[2, 2, 2, 2])).unwrap();
        assert!(p.is_identity());
        // state 3 only appears last
        let p = mle_estimate(&seq(3, &[1, 1, 3])).unwrap();
        assert_eq!(p.row(2), &[0.0, 0.0, 1.0]);
        assert_eq!(p.row(0), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn vectorize_layout() {
        let p = TransitionMatrix::from_rows(&[[0.1, 0.9], [0.7, 0.3]]).unwrap();
        assert_eq!(vectorize(&p).values(), &[0.1, 0.9, 0.7, 0.3]);
        let eq8 = TransitionMatrix::from_rows(&[
            [0.25, 0.25, 0.25, 0.25],
            [0.10, 0.20, 0.20, 0.50],
            [0.05, 0.10, 0.10, 0.75],
            [0.10, 0.20, 0.30, 0.40],
        ])
        .unwrap();
        // 1-based position 12 = 4 + (3 - 1) * 4
        assert_eq!(vectorize(&eq8).values()[12 - 1], 0.75);
        assert_eq!(devectorize(&vectorize(&eq8)).unwrap(), eq8);
    }

    #[test]
    fn devectorize_checks_length() {
        assert!(matches!(
            VectorizedMatrix::from_values(vec![0.5; 5]),
            Err(Error::LengthNotSquare(5))
        ));
        assert!(VectorizedMatrix::from_values(vec![]).is_err());
        let bad = VectorizedMatrix::from_values(vec![0.5, 0.6, 0.5, 0.5]).unwrap();
        assert!(devectorize(&bad).is_err());
    }

    #[test]
    fn covariance_hand_values() {
        let eq8 = TransitionMatrix::from_rows(&[
            [0.25, 0.25, 0.25, 0.25],
            [0.10, 0.20, 0.20, 0.50],
            [0.05, 0.10, 0.10, 0.75],
            [0.10, 0.20, 0.30, 0.40],
        ])
        .unwrap();
        let s = asymptotic_covariance(&eq8);
        assert_eq!(s.size(), 16);
        assert!((s.cell(0, 0, 0, 0) - 0.1875).abs() < 1e-15);
        assert!((s.cell(0, 0, 0, 1) + 0.0625).abs() < 1e-15);
        for j in 0..4 {
            for l in 0..4 {
                assert_eq!(s.cell(0, j, 1, l), 0.0);
            }
        }
    }

    #[test]
    fn per_visit_scaling_divides_blocks() {
        let p = TransitionMatrix::from_rows(&[[0.5, 0.5], [0.2, 0.8]]).unwrap();
        let s = asymptotic_covariance(&p);
        let pi = Distribution::new(vec![0.25, 0.75]).unwrap();
        let scaled = s.per_visit_scaled(&pi).unwrap();
        assert!((scaled.cell(0, 0, 0, 0) - 0.25 / 0.25).abs() < 1e-15);
        assert!((scaled.cell(1, 1, 1, 1) - 0.16 / 0.75).abs() < 1e-15);
        assert!(s.per_visit_scaled(&Distribution::uniform(3)).is_err());
    }
}
