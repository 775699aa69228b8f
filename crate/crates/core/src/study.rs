//! Monte Carlo coverage study of bootstrap percentile intervals.
//!
//! For each chain length and replication one chain is drawn from the true
//! matrix. Every smoothing arm (including the unsmoothed `u = inf` arm)
//! bootstraps from its own generator built from that same chain and with
//! the same resample streams, so arms differ only through the estimator.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::{map_resamples, percentile_ci, BootstrapConfig, ConfidenceInterval};
use crate::chain::{generate_chain, Distribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::mle::mle_estimate;
use crate::random::SeedSpec;
use crate::smoothing::{smooth, SmoothingParam};

/// Bootstrap size and replication count for a study run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `B = 1000`, `R = 300`. Coverage standard error is at most about 0.029.
    Desk,
    /// `B = 5000`, `R = 1000`.
    Full,
}

impl Preset {
    pub fn resamples(self) -> usize {
        match self {
            Preset::Desk => 1000,
            Preset::Full => 5000,
        }
    }

    pub fn replications(self) -> usize {
        match self {
            Preset::Desk => 300,
            Preset::Full => 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub truth_name: String,
    pub truth: TransitionMatrix,
    pub n_grid: Vec<usize>,
    pub u_grid: Vec<SmoothingParam>,
    /// Resamples per bootstrap, `B`.
    pub resamples: usize,
    /// Replications per `(n, u)` arm, `R`.
    pub replications: usize,
    /// Two-sided nominal level, e.g. 0.9.
    pub nominal: f64,
    /// Tracked cells, 1-based.
    pub cells: Vec<(usize, usize)>,
    pub seed: SeedSpec,
}

impl StudyConfig {
    /// The published grid: `n` in {25, 50, 100}, `u` in {0.5, 1, 2, inf},
    /// 90% intervals for cells (1,1) and (1,2).
    pub fn table5(truth_name: &str, truth: TransitionMatrix, preset: Preset, seed: SeedSpec) -> Self {
        Self {
            truth_name: truth_name.to_string(),
            truth,
            n_grid: vec![25, 50, 100],
            u_grid: vec![
                SmoothingParam::Finite(0.5),
                SmoothingParam::Finite(1.0),
                SmoothingParam::Finite(2.0),
                SmoothingParam::Infinite,
            ],
            resamples: preset.resamples(),
            replications: preset.replications(),
            nominal: 0.9,
            cells: vec![(1, 1), (1, 2)],
            seed,
        }
    }

    /// Per-tail level of the percentile interval.
    pub fn alpha(&self) -> f64 {
        (1.0 - self.nominal) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::ParameterOutOfRange(msg.to_string()));
        if self.n_grid.is_empty() || self.u_grid.is_empty() || self.cells.is_empty() {
            return bad("n grid, u grid and cell list must be non-empty");
        }
        if self.n_grid.iter().any(|&n| n < 2) {
            return bad("chain lengths must be at least 2");
        }
        if self.replications < 1 {
            return bad("at least one replication is required");
        }
        if self.resamples < 2 {
            return Err(Error::TooFewResamples(self.resamples));
        }
        if !(self.nominal > 0.0 && self.nominal < 1.0) {
            return bad("nominal level must lie in (0, 1)");
        }
        let d = self.truth.dim();
        if let Some(&(i, j)) = self.cells.iter().find(|&&(i, j)| i == 0 || j == 0 || i > d || j > d) {
            return Err(Error::StateOutOfRange { state: i.max(j), d });
        }
        Ok(())
    }
}

/// Coverage of one `(n, u, cell)` arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub n: usize,
    pub u: SmoothingParam,
    pub cell: (usize, usize),
    pub true_value: f64,
    pub covered: usize,
    pub replications: usize,
    pub coverage: f64,
    pub mean_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub truth_name: String,
    pub nominal: f64,
    pub resamples: usize,
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn find(&self, n: usize, u: SmoothingParam, cell: (usize, usize)) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.n == n && r.u == u && r.cell == cell)
    }

    pub const CSV_HEADER: &'static str = "truth,n,u,cell_i,cell_j,coverage,mean_width,R";

    /// CSV rows without the header line.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{}",
                self.truth_name, r.n, r.u, r.cell.0, r.cell.1, r.coverage, r.mean_width, r.replications
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }

    /// Percent coverage per `(n, u)` row with one column per tracked cell.
    pub fn render_table(&self) -> String {
        let mut cells: Vec<(usize, usize)> = Vec::new();
        let mut arms: Vec<(usize, SmoothingParam)> = Vec::new();
        for r in &self.rows {
            if !cells.contains(&r.cell) {
                cells.push(r.cell);
            }
            if !arms.contains(&(r.n, r.u)) {
                arms.push((r.n, r.u));
            }
        }
        let mut out = format!(
            "{}  (nominal {:.0}%, B = {})\n",
            self.truth_name,
            self.nominal * 100.0,
            self.resamples
        );
        let _ = write!(out, "{:>6} {:>6}", "n", "u");
        for (i, j) in &cells {
            let _ = write!(out, " {:>8}", format!("P{i}{j}"));
        }
        out.push('\n');
        for (n, u) in arms {
            let _ = write!(out, "{n:>6} {:>6}", u.to_string());
            for &cell in &cells {
                match self.find(n, u, cell) {
                    Some(r) => {
                        let _ = write!(out, " {:>8.1}", r.coverage * 100.0);
                    }
                    None => out.push_str("        -"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Fraction of intervals containing `true_value` (closed endpoints).
pub fn coverage(intervals: &[ConfidenceInterval], true_value: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::EmptyList);
    }
    let hits = intervals.iter().filter(|ci| ci.contains(true_value)).count();
    Ok(hits as f64 / intervals.len() as f64)
}

/// Per-replication outcome: for each `(u, cell)` in order, the interval.
type ReplicationOutcome = Vec<ConfidenceInterval>;

fn run_replication(
    cfg: &StudyConfig,
    n: usize,
    rep_seed: SeedSpec,
    alpha: f64,
) -> Result<ReplicationOutcome> {
    let d = cfg.truth.dim();
    let chain = generate_chain(&cfg.truth, &Distribution::uniform(d), n, rep_seed.child(0))?;
    let p_hat = mle_estimate(&chain)?;
    let boot_seed = rep_seed.child(1);
    let mut out = Vec::with_capacity(cfg.u_grid.len() * cfg.cells.len());
    for &u in &cfg.u_grid {
        let generator = smooth(&p_hat, n, u);
        let boot = BootstrapConfig::new(generator, n, cfg.resamples, boot_seed)?;
        let cells = &cfg.cells;
        let per_resample = map_resamples(&boot, false, |counts| {
            let est = counts.estimate();
            cells.iter().map(|&(i, j)| est.get(i - 1, j - 1)).collect::<Vec<f64>>()
        })?;
        for c in 0..cells.len() {
            let values: Vec<f64> = per_resample.iter().map(|v| v[c]).collect();
            out.push(percentile_ci(&values, alpha)?);
        }
    }
    Ok(out)
}

/// Runs every `(n, u)` arm and tallies coverage of the tracked cells.
pub fn run_study(cfg: &StudyConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let alpha = cfg.alpha();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        // keyed by length, so a sub-grid reproduces the full grid's arms
        let n_seed = cfg.seed.child(n as u64);
        let outcomes: Vec<ReplicationOutcome> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(cfg, n, n_seed.child(r as u64), alpha))
            .collect::<Result<_>>()?;
        for (u_idx, &u) in cfg.u_grid.iter().enumerate() {
            for (c_idx, &cell) in cfg.cells.iter().enumerate() {
                let slot = u_idx * cfg.cells.len() + c_idx;
                let intervals: Vec<ConfidenceInterval> = outcomes.iter().map(|o| o[slot]).collect();
                let true_value = cfg.truth.get(cell.0 - 1, cell.1 - 1);
                let cov = coverage(&intervals, true_value)?;
                let covered = intervals.iter().filter(|ci| ci.contains(true_value)).count();
                let mean_width =
                    intervals.iter().map(ConfidenceInterval::width).sum::<f64>() / intervals.len() as f64;
                rows.push(CoverageRow {
                    n,
                    u,
                    cell,
                    true_value,
                    covered,
                    replications: intervals.len(),
                    coverage: cov,
                    mean_width,
                });
            }
        }
    }
    Ok(CoverageReport {
        truth_name: cfg.truth_name.clone(),
        nominal: cfg.nominal,
        resamples: cfg.resamples,
        rows,
    })
}

/// `P_I`: 0.4 on the diagonal, 0.3 elsewhere.
pub fn p_one() -> TransitionMatrix {
    TransitionMatrix::from_rows(&[[0.4, 0.3, 0.3], [0.3, 0.4, 0.3], [0.3, 0.3, 0.4]]).expect("valid")
}

/// `P_II`: 0.1 on the diagonal, 0.45 elsewhere.
pub fn p_two() -> TransitionMatrix {
    TransitionMatrix::from_rows(&[[0.1, 0.45, 0.45], [0.45, 0.1, 0.45], [0.45, 0.45, 0.1]])
        .expect("valid")
}

/// The 4-state matrix used for the sparsity and rate examples.
pub fn eq8() -> TransitionMatrix {
    TransitionMatrix::from_rows(&[
        [0.25, 0.25, 0.25, 0.25],
        [0.10, 0.20, 0.20, 0.50],
        [0.05, 0.10, 0.10, 0.75],
        [0.10, 0.20, 0.30, 0.40],
    ])
    .expect("valid")
}

/// Named built-in matrices: `P_I`, `P_II`, `eq8`.
pub fn builtin_matrices() -> Vec<(&'static str, TransitionMatrix)> {
    vec![("P_I", p_one()), ("P_II", p_two()), ("eq8", eq8())]
}

/// Looks up a built-in by name, accepting a few spellings.
pub fn builtin_matrix(name: &str) -> Option<TransitionMatrix> {
    match name.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
        "pi" | "p1" => Some(p_one()),
        "pii" | "p2" => Some(p_two()),
        "eq8" => Some(eq8()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(lower: f64, upper: f64) -> ConfidenceInterval {
        ConfidenceInterval {
            lower,
            upper,
            alpha: 0.05,
        }
    }

    #[test]
    fn coverage_counts() {
        assert_eq!(coverage(&[ci(0.0, 1.0); 3], 0.4).unwrap(), 1.0);
        assert_eq!(coverage(&[ci(0.0, 0.3), ci(0.5, 0.9)], 0.4).unwrap(), 0.0);
        let mut v = vec![ci(0.3, 0.5); 9];
        v.push(ci(0.6, 0.7));
        assert!((coverage(&v, 0.4).unwrap() - 0.9).abs() < 1e-15);
        // closed endpoints
        assert_eq!(coverage(&[ci(0.4, 0.4)], 0.4).unwrap(), 1.0);
        assert!(matches!(coverage(&[], 0.4), Err(Error::EmptyList)));
    }

    #[test]
    fn builtins() {
        let names: Vec<&str> = builtin_matrices().iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["P_I", "P_II", "eq8"]);
        for row in p_one().rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let p2 = p_two();
        for i in 0..3 {
            assert_eq!(p2.get(i, i), 2.0 / 20.0);
        }
        assert_eq!(eq8().get(2, 3), 0.75);
        assert_eq!(builtin_matrix("pII"), Some(p_two()));
        assert_eq!(builtin_matrix("P_I"), Some(p_one()));
        assert!(builtin_matrix("nope").is_none());
    }

    #[test]
    fn config_validation() {
        let mut cfg = StudyConfig::table5("P_I", p_one(), Preset::Desk, SeedSpec::default());
        assert!(cfg.validate().is_ok());
        assert!((cfg.alpha() - 0.05).abs() < 1e-15);
        cfg.cells.push((4, 1));
        assert!(cfg.validate().is_err());
        let mut cfg = StudyConfig::table5("P_I", p_one(), Preset::Desk, SeedSpec::default());
        cfg.u_grid.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = StudyConfig::table5("P_I", p_one(), Preset::Desk, SeedSpec::default());
        cfg.nominal = 1.0;
        assert!(cfg.validate().is_err());
        cfg.nominal = 0.9;
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn identity_truth_always_covered() {
        let cfg = StudyConfig {
            truth_name: "identity".into(),
            truth: TransitionMatrix::identity(3),
            n_grid: vec![10],
            u_grid: vec![SmoothingParam::Infinite],
            resamples: 20,
            replications: 5,
            nominal: 0.9,
            cells: vec![(1, 1)],
            seed: SeedSpec::new(1, 0),
        };
        let report = run_study(&cfg).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.coverage, 1.0);
        assert_eq!(row.mean_width, 0.0);
        assert_eq!(row.replications, 5);
    }

    #[test]
    fn table_layout() {
        let cfg = StudyConfig {
            resamples: 20,
            replications: 4,
            n_grid: vec![10],
            ..StudyConfig::table5("P_I", p_one(), Preset::Desk, SeedSpec::new(2, 0))
        };
        let report = run_study(&cfg).unwrap();
        assert_eq!(report.rows.len(), 8);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with(CoverageReport::CSV_HEADER));
        let table = report.render_table();
        assert_eq!(table.lines().count(), 2 + 4);
        assert!(table.contains("P11"));
        assert!(table.contains("inf"));
    }
}
