//! Command-line driver.
//!
//! Exit codes: 0 on success, 2 for input or validation errors, 3 when a
//! steady state does not exist.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bootstrap::{run_bootstrap, BootstrapConfig, BootstrapSummary};
use crate::chain::{generate_chain, steady_state, Distribution, DEFAULT_MAX_POWER, DEFAULT_STEADY_TOL};
use crate::error::{Error, Result};
use crate::io;
use crate::mle::mle_estimate;
use crate::random::{with_workers, SeedSpec};
use crate::smoothing::{smooth, SmoothingParam};
use crate::study::{run_study, CoverageReport};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "markov-smooth", version, about = "Markov chain estimation, smoothing and bootstrap intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a chain from a transition matrix.
    Generate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, env = "MARKOV_SMOOTH_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// `uniform`, `point:K` (1-based state) or comma-separated probabilities.
        #[arg(long, default_value = "uniform")]
        initial: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-likelihood (or smoothed, with --u) estimate from a sequence.
    Estimate {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        d: usize,
        /// Smoothing exponent; `inf` disables smoothing.
        #[arg(long)]
        u: Option<SmoothingParam>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bootstrap resampling from a generator matrix.
    Bootstrap {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "B")]
        resamples: usize,
        /// Per-tail level of the percentile intervals.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, env = "MARKOV_SMOOTH_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// `json` for the summary, `csv` for the raw replicates.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Export the empirical CDF of one 1-based cell, e.g. `3,1`.
        #[arg(long, value_name = "I,J")]
        ecdf: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coverage study driven by a JSON config.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "B")]
        resamples: Option<usize>,
        #[arg(long = "R")]
        replications: Option<usize>,
        #[arg(long)]
        nominal: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Coverage CSV destination. The rendered table goes to stdout when
        /// this is set and to stderr otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steady-state distribution by repeated squaring.
    Steady {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STEADY_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_POWER)]
        max_power: u64,
    },
}

#[derive(Serialize)]
struct BootstrapJson<'a> {
    n: usize,
    seed: SeedSpec,
    #[serde(flatten)]
    summary: &'a BootstrapSummary,
}

fn parse_initial(spec: &str, d: usize) -> Result<Distribution> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("uniform") {
        return Ok(Distribution::uniform(d));
    }
    if let Some(k) = spec.strip_prefix("point:") {
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad initial state {k:?}")))?;
        if k == 0 {
            return Err(Error::StateOutOfRange { state: 0, d });
        }
        return Distribution::point_mass(d, k - 1);
    }
    let probs = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad probability {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if probs.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: probs.len(),
        });
    }
    Distribution::new(probs)
}

fn parse_cell(spec: &str, d: usize) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [i, j] = parts.as_slice() else {
        return Err(Error::Parse(format!("expected I,J but got {spec:?}")));
    };
    let parse = |t: &str| -> Result<usize> {
        let v: usize = t.parse().map_err(|_| Error::Parse(format!("bad cell index {t:?}")))?;
        if v == 0 || v > d {
            return Err(Error::StateOutOfRange { state: v, d });
        }
        Ok(v - 1)
    };
    Ok((parse(i)?, parse(j)?))
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::File {
            path: path.clone(),
            source,
        }),
        None => {
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Executes one command, writing primary output to `stdout` (or `--out`)
/// and auxiliary output to `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Generate {
            matrix,
            n,
            seed,
            stream,
            initial,
            out,
        } => {
            let p = io::read_matrix(&matrix)?;
            let init = parse_initial(&initial, p.dim())?;
            let seq = generate_chain(&p, &init, n, SeedSpec::new(seed, stream))?;
            emit(&out, &io::sequence_to_csv(&seq), stdout)
        }
        Command::Estimate {
            sequence,
            d,
            u,
            format,
            out,
        } => {
            let seq = io::read_sequence(&sequence, d)?;
            let mut p = mle_estimate(&seq)?;
            if let Some(u) = u {
                p = smooth(&p, seq.len(), u);
            }
            let text = match format {
                Format::Csv => io::matrix_to_csv(&p),
                Format::Json => io::matrix_to_json(&p) + "\n",
            };
            emit(&out, &text, stdout)
        }
        Command::Bootstrap {
            matrix,
            n,
            resamples,
            alpha,
            seed,
            stream,
            workers,
            format,
            ecdf,
            out,
        } => {
            let p = io::read_matrix(&matrix)?;
            let d = p.dim();
            let cell = ecdf.as_deref().map(|c| parse_cell(c, d)).transpose()?;
            if !(alpha > 0.0 && alpha < 0.5) {
                return Err(Error::AlphaOutOfRange(alpha));
            }
            let seed = SeedSpec::new(seed, stream);
            let cfg = BootstrapConfig::new(p, n, resamples, seed)?;
            let batch = with_workers(workers, || run_bootstrap(&cfg))?;
            let text = if let Some((i, j)) = cell {
                batch.cell_cdf(i, j).to_csv()
            } else {
                match format {
                    Format::Csv => batch.to_csv(),
                    Format::Json => {
                        let summary = batch.summary(alpha)?;
                        let json = BootstrapJson {
                            n,
                            seed,
                            summary: &summary,
                        };
                        serde_json::to_string_pretty(&json).expect("plain data serializes") + "\n"
                    }
                }
            };
            emit(&out, &text, stdout)
        }
        Command::Study {
            config,
            resamples,
            replications,
            nominal,
            seed,
            workers,
            out,
        } => {
            let mut configs = io::read_study_configs(&config)?;
            for (idx, cfg) in configs.iter_mut().enumerate() {
                if let Some(b) = resamples {
                    cfg.resamples = b;
                }
                if let Some(r) = replications {
                    cfg.replications = r;
                }
                if let Some(level) = nominal {
                    cfg.nominal = level;
                }
                if let Some(s) = seed {
                    cfg.seed = SeedSpec::new(s, 0).child(idx as u64);
                }
                cfg.validate()?;
            }
            let reports = with_workers(workers, || {
                configs.iter().map(run_study).collect::<Result<Vec<CoverageReport>>>()
            })?;
            let mut csv = format!("{}\n", CoverageReport::CSV_HEADER);
            let mut table = String::new();
            for report in &reports {
                csv.push_str(&report.csv_rows());
                table.push_str(&report.render_table());
                table.push('\n');
            }
            emit(&out, &csv, stdout)?;
            let sink: &mut dyn Write = if out.is_some() { stdout } else { stderr };
            sink.write_all(table.as_bytes())?;
            Ok(())
        }
        Command::Steady {
            matrix,
            tol,
            max_power,
        } => {
            let p = io::read_matrix(&matrix)?;
            let pi = steady_state(&p, tol, max_power)?;
            let cells: Vec<String> = pi.probs().iter().map(|v| format!("{v:.6}")).collect();
            writeln!(stdout, "{}", cells.join(","))?;
            Ok(())
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoLimit { .. } => EXIT_NO_LIMIT,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let label = if code == EXIT_NO_LIMIT { "NoLimit" } else { "error" };
            let _ = writeln!(stderr, "{label}: {e}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_specs() {
        assert_eq!(parse_initial("uniform", 2).unwrap(), Distribution::uniform(2));
        assert_eq!(parse_initial("point:3", 3).unwrap().probs(), &[0.0, 0.0, 1.0]);
        assert_eq!(parse_initial("0.2, 0.8", 2).unwrap().probs(), &[0.2, 0.8]);
        assert!(parse_initial("point:0", 3).is_err());
        assert!(parse_initial("point:4", 3).is_err());
        assert!(parse_initial("0.5,0.5", 3).is_err());
    }

    #[test]
    fn cell_specs() {
        assert_eq!(parse_cell("3,1", 4).unwrap(), (2, 0));
        assert!(parse_cell("5,1", 4).is_err());
        assert!(parse_cell("1", 4).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NoLimit { exponent: 1, divergence: 1.0 }), 3);
        assert_eq!(exit_code(&Error::EmptySample), 2);
    }
}
