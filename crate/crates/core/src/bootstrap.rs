//! Parametric bootstrap for Markov chains.
//!
//! Each resample is a fresh chain of length `n` drawn from a generator
//! matrix (the MLE or its smoothed version). Its MLE is one bootstrap
//! replicate. Resample `k` (1-based) always uses stream `seed.child(k)`,
//! so the batch is identical however the work is scheduled.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{ChainSampler, Distribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::mle::{TransitionCounts, VectorizedMatrix};
use crate::random::SeedSpec;

/// Slack when comparing empirical CDF levels against `alpha`, so that
/// `k / B` equal to `alpha` in exact arithmetic is not lost to rounding.
const LEVEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    /// Number of resamples `B`.
    pub resamples: usize,
    /// Length `n` of each resampled chain.
    pub length: usize,
    pub generator: TransitionMatrix,
    pub initial: Distribution,
    pub seed: SeedSpec,
}

impl BootstrapConfig {
    /// Uniform initial distribution, as in the standard resampling scheme.
    pub fn new(generator: TransitionMatrix, length: usize, resamples: usize, seed: SeedSpec) -> Result<Self> {
        let initial = Distribution::uniform(generator.dim());
        let cfg = Self {
            resamples,
            length,
            generator,
            initial,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_initial(mut self, initial: Distribution) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resamples < 2 {
            return Err(Error::TooFewResamples(self.resamples));
        }
        if self.length < 2 {
            return Err(Error::SequenceTooShort {
                len: self.length,
                min: 2,
            });
        }
        if self.initial.dim() != self.generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.generator.dim(),
                found: self.initial.dim(),
            });
        }
        Ok(())
    }
}

/// Runs `f` on the transition counts of every resample, in resample order.
pub(crate) fn map_resamples<T, F>(cfg: &BootstrapConfig, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&TransitionCounts) -> T + Sync,
{
    cfg.validate()?;
    let sampler = ChainSampler::new(&cfg.generator, &cfg.initial)?;
    let d = sampler.dim();
    let one = |k: usize, buf: &mut Vec<usize>| {
        let mut rng = cfg.seed.child(k as u64).rng();
        sampler.sample_into(&mut rng, cfg.length, buf);
        f(&TransitionCounts::from_states(d, buf))
    };
    let out = if parallel {
        (1..=cfg.resamples)
            .into_par_iter()
            .map_init(Vec::new, |buf, k| one(k, buf))
            .collect()
    } else {
        let mut buf = Vec::with_capacity(cfg.length);
        (1..=cfg.resamples).map(|k| one(k, &mut buf)).collect()
    };
    Ok(out)
}

/// Replicates plus their mean vector and `1/(B-1)` covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapBatch {
    d: usize,
    estimates: Vec<VectorizedMatrix>,
    mean: Vec<f64>,
    covariance: Vec<f64>,
}

impl BootstrapBatch {
    fn from_estimates(d: usize, estimates: Vec<VectorizedMatrix>) -> Self {
        let size = d * d;
        let b = estimates.len() as f64;
        let mut mean = vec![0.0; size];
        for est in &estimates {
            for (m, v) in mean.iter_mut().zip(est.values()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= b);

        let mut covariance = vec![0.0; size * size];
        let mut centered = vec![0.0; size];
        for est in &estimates {
            for ((c, v), m) in centered.iter_mut().zip(est.values()).zip(&mean) {
                *c = v - m;
            }
            for r in 0..size {
                let cr = centered[r];
                if cr == 0.0 {
                    continue;
                }
                // upper triangle only, mirrored below
                for c in r..size {
                    covariance[r * size + c] += cr * centered[c];
                }
            }
        }
        let divisor = b - 1.0;
        for r in 0..size {
            for c in r..size {
                let v = covariance[r * size + c] / divisor;
                covariance[r * size + c] = v;
                covariance[c * size + r] = v;
            }
        }
        Self {
            d,
            estimates,
            mean,
            covariance,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn resamples(&self) -> usize {
        self.estimates.len()
    }

    pub fn estimates(&self) -> &[VectorizedMatrix] {
        &self.estimates
    }

    /// Mean of the vectorized replicates.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Mean replicate reshaped to a matrix.
    pub fn mean_matrix(&self) -> TransitionMatrix {
        TransitionMatrix::from_parts_unchecked(self.d, self.mean.clone())
    }

    /// Row-major `d^2 x d^2` covariance of the vectorized replicates.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn covariance_at(&self, row: usize, col: usize) -> f64 {
        self.covariance[row * self.d * self.d + col]
    }

    /// The `B` replicate values of 0-based cell `(i, j)`.
    pub fn cell_values(&self, i: usize, j: usize) -> Vec<f64> {
        let k = VectorizedMatrix::position(self.d, i, j);
        self.estimates.iter().map(|e| e.values()[k]).collect()
    }

    pub fn cell_cdf(&self, i: usize, j: usize) -> EmpiricalCdf {
        EmpiricalCdf::from_sorted_unchecked(sorted(self.cell_values(i, j)))
    }

    /// One row per replicate, one column per vector position.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.d * self.d)
            .map(|k| {
                let (i, j) = VectorizedMatrix::cell(self.d, k);
                format!("p{}_{}", i + 1, j + 1)
            })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for est in &self.estimates {
            let cells: Vec<String> = est.values().iter().map(|v| format!("{v:.6}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, alpha: f64) -> Result<BootstrapSummary> {
        let cis = element_cis(self, alpha)?;
        let size = self.d * self.d;
        Ok(BootstrapSummary {
            d: self.d,
            resamples: self.resamples(),
            alpha,
            mean: self.mean.chunks(self.d).map(<[f64]>::to_vec).collect(),
            covariance: self.covariance.chunks(size).map(<[f64]>::to_vec).collect(),
            intervals: cis,
        })
    }
}

/// JSON-serializable digest of a batch.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapSummary {
    pub d: usize,
    #[serde(rename = "B")]
    pub resamples: usize,
    pub alpha: f64,
    pub mean: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    pub intervals: Vec<Vec<ConfidenceInterval>>,
}

/// Draws `B` chains from the generator and collects their MLEs.
pub fn run_bootstrap(cfg: &BootstrapConfig) -> Result<BootstrapBatch> {
    let d = cfg.generator.dim();
    let estimates = map_resamples(cfg, true, |counts| {
        VectorizedMatrix::from_values(counts.estimate().entries().to_vec())
            .expect("d x d estimate")
    })?;
    Ok(BootstrapBatch::from_estimates(d, estimates))
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

/// Right-continuous step function `F(x) = #{values <= x} / B`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    fn from_sorted_unchecked(sorted: Vec<f64>) -> Self {
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of sample values `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.sorted.len() as f64
    }

    /// Distinct sample values with the CDF level reached at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let b = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (idx, &v) in self.sorted.iter().enumerate() {
            let level = (idx + 1) as f64 / b;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = level,
                _ => out.push((v, level)),
            }
        }
        out
    }

    /// `value,probability` pairs, one per distinct value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,probability\n");
        for (v, p) in self.steps() {
            let _ = writeln!(out, "{v:.6},{p:.6}");
        }
        out
    }
}

pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse("sample contains NaN".into()));
    }
    Ok(EmpiricalCdf::from_sorted_unchecked(sorted(values.to_vec())))
}

/// Closed interval `[lower, upper]` with per-tail level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Percentile interval from a bootstrap sample.
///
/// `lower` is the largest sample value with `F(x) <= alpha` (the sample
/// minimum when none qualifies) and `upper` the smallest with
/// `F(x) >= 1 - alpha`. Both are always order statistics of `values`.
pub fn percentile_ci(values: &[f64], alpha: f64) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let cdf = empirical_cdf(values)?;
    Ok(cdf.percentile_interval(alpha))
}

impl EmpiricalCdf {
    fn percentile_interval(&self, alpha: f64) -> ConfidenceInterval {
        let steps = self.steps();
        let lower = steps
            .iter()
            .rev()
            .find(|(_, level)| *level <= alpha + LEVEL_EPS)
            .map_or(self.sorted[0], |s| s.0);
        let upper = steps
            .iter()
            .find(|(_, level)| *level >= 1.0 - alpha - LEVEL_EPS)
            .map_or(self.sorted[self.sorted.len() - 1], |s| s.0);
        ConfidenceInterval { lower, upper, alpha }
    }
}

/// Percentile interval for every cell, as a `d x d` grid.
pub fn element_cis(batch: &BootstrapBatch, alpha: f64) -> Result<Vec<Vec<ConfidenceInterval>>> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = batch.dim();
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| batch.cell_cdf(i, j).percentile_interval(alpha))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct transcription of the percentile definitions: count every
    /// sample value against every candidate, no sorting.
    fn brute_force_ci(values: &[f64], alpha_num: usize, alpha_den: usize) -> (f64, f64) {
        let b = values.len();
        // F(x) <= a/m  <=>  m * count <= a * B, all in integers
        let count = |x: f64| values.iter().filter(|&&v| v <= x).count();
        let lower = values
            .iter()
            .copied()
            .filter(|&x| alpha_den * count(x) <= alpha_num * b)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
            .unwrap_or_else(|| values.iter().copied().fold(f64::INFINITY, f64::min));
        let upper = values
            .iter()
            .copied()
            .filter(|&x| alpha_den * count(x) >= (alpha_den - alpha_num) * b)
            .fold(f64::INFINITY, f64::min);
        (lower, upper)
    }

    #[test]
    fn ecdf_definition() {
        let f = empirical_cdf(&[1.0, 2.0, 3.0]).unwrap();
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval(10.0), 1.0);
        let f = empirical_cdf(&[1.0, 1.0, 2.0]).unwrap();
        assert!((f.eval(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.steps().len(), 2);
        assert!(matches!(empirical_cdf(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn ecdf_csv_export() {
        let f = empirical_cdf(&[0.5, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(
            f.to_csv(),
            "value,probability\n0.250000,0.250000\n0.500000,0.750000\n1.000000,1.000000\n"
        );
    }

    #[test]
    fn tenths_interval() {
        let values: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let (lo, hi) = brute_force_ci(&values, 1, 10);
        assert_eq!((lo, hi), (0.1, 0.9));
        let ci = percentile_ci(&values, 0.1).unwrap();
        assert_eq!((ci.lower, ci.upper), (lo, hi));
    }

    #[test]
    fn quarter_interval_matches_oracle() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let (lo, hi) = brute_force_ci(&values, 1, 4);
        // frozen from the oracle above
        assert_eq!((lo, hi), (1.0, 3.0));
        let ci = percentile_ci(&values, 0.25).unwrap();
        assert_eq!((ci.lower, ci.upper), (1.0, 3.0));
    }

    #[test]
    fn constant_sample_gives_point() {
        let ci = percentile_ci(&[0.3; 50], 0.05).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.3, 0.3));
        assert_eq!(ci.width(), 0.0);
    }

    #[test]
    fn lower_falls_back_to_minimum() {
        // smallest value already carries 60% of the mass
        let ci = percentile_ci(&[0.0, 0.0, 0.0, 1.0, 2.0], 0.1).unwrap();
        assert_eq!(ci.lower, 0.0);
        assert_eq!(ci.upper, 2.0);
    }

    #[test]
    fn alpha_must_be_a_tail() {
        for a in [0.0, 0.5, 0.7, -0.1, f64::NAN] {
            assert!(matches!(percentile_ci(&[1.0, 2.0], a), Err(Error::AlphaOutOfRange(_))));
        }
        assert!(matches!(percentile_ci(&[], 0.1), Err(Error::EmptySample)));
    }

    #[test]
    fn agrees_with_oracle_on_many_samples() {
        use rand::Rng;
        let mut rng = SeedSpec::new(11, 0).rng();
        for trial in 0..300 {
            let b = rng.random_range(2..60);
            // coarse grid to force ties
            let values: Vec<f64> = (0..b).map(|_| rng.random_range(0..8) as f64 / 8.0).collect();
            for (num, den) in [(1, 20), (1, 10), (1, 4), (1, 3), (2, 5)] {
                let (lo, hi) = brute_force_ci(&values, num, den);
                let ci = percentile_ci(&values, num as f64 / den as f64).unwrap();
                assert_eq!((ci.lower, ci.upper), (lo, hi), "trial {trial} alpha {num}/{den} {values:?}");
            }
        }
    }

    #[test]
    fn config_validation() {
        let p = TransitionMatrix::identity(2);
        assert!(matches!(
            BootstrapConfig::new(p.clone(), 10, 1, SeedSpec::default()),
            Err(Error::TooFewResamples(1))
        ));
        assert!(BootstrapConfig::new(p.clone(), 1, 10, SeedSpec::default()).is_err());
        let cfg = BootstrapConfig::new(p, 10, 10, SeedSpec::default()).unwrap();
        assert!(cfg.with_initial(Distribution::uniform(3)).is_err());
    }

    #[test]
    fn identity_generator_has_no_spread() {
        let cfg = BootstrapConfig::new(TransitionMatrix::identity(2), 7, 10, SeedSpec::new(5, 0)).unwrap();
        let batch = run_bootstrap(&cfg).unwrap();
        assert_eq!(batch.resamples(), 10);
        for est in batch.estimates() {
            assert_eq!(est.values(), &[1.0, 0.0, 0.0, 1.0]);
        }
        assert!(batch.covariance().iter().all(|&c| c == 0.0));
        for row in element_cis(&batch, 0.05).unwrap() {
            for ci in row {
                assert_eq!(ci.lower, ci.upper);
            }
        }
    }

    #[test]
    fn moments_follow_definitions() {
        let p = TransitionMatrix::from_rows(&[[0.3, 0.7], [0.6, 0.4]]).unwrap();
        let cfg = BootstrapConfig::new(p, 15, 40, SeedSpec::new(8, 1)).unwrap();
        let batch = run_bootstrap(&cfg).unwrap();
        let b = batch.resamples() as f64;
        for k in 0..4 {
            let vals: Vec<f64> = batch.estimates().iter().map(|e| e.values()[k]).collect();
            let m = vals.iter().sum::<f64>() / b;
            assert!((batch.mean()[k] - m).abs() < 1e-14);
            for l in 0..4 {
                let other: Vec<f64> = batch.estimates().iter().map(|e| e.values()[l]).collect();
                let ml = other.iter().sum::<f64>() / b;
                let c = vals
                    .iter()
                    .zip(&other)
                    .map(|(x, y)| (x - m) * (y - ml))
                    .sum::<f64>()
                    / (b - 1.0);
                assert!((batch.covariance_at(k, l) - c).abs() < 1e-14);
                assert_eq!(batch.covariance_at(k, l), batch.covariance_at(l, k));
            }
        }
    }
}
