//! Estimation of finite-state Markov chains from a single observed path.
//!
//! * [`chain`]: transition matrices, simulation, steady states.
//! * [`mle`]: maximum-likelihood estimate, `vec(P)` and its limiting covariance.
//! * [`smoothing`]: additive smoothing of sparse estimates and rate diagnostics.
//! * [`bootstrap`]: parametric resampling and percentile intervals.
//! * [`study`]: Monte Carlo coverage of the bootstrap intervals.
//! * [`io`] and [`cli`]: file formats and the `markov-smooth` command.
//!
//! ```
//! use markov_smooth::prelude::*;
//!
//! let seq = StateSequence::from_one_based(4, &[3, 4, 2, 4, 3, 4, 3, 4, 4, 1]).unwrap();
//! let p_hat = mle_estimate(&seq).unwrap();
//! assert_eq!(p_hat.row(3), &[0.2, 0.2, 0.4, 0.2]);
//!
//! let p_tilde = smooth(&p_hat, seq.len(), SmoothingParam::Finite(0.5));
//! assert!(p_tilde.entries().iter().all(|&p| p > 0.0));
//! ```

pub mod bootstrap;
pub mod chain;
pub mod cli;
pub mod error;
pub mod io;
pub mod mle;
pub mod random;
pub mod smoothing;
pub mod study;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bootstrap::{
        element_cis, empirical_cdf, percentile_ci, run_bootstrap, BootstrapBatch, BootstrapConfig,
        ConfidenceInterval, EmpiricalCdf,
    };
    pub use crate::chain::{
        generate_chain, steady_state, two_state_power, validate_matrix, Distribution, StateSequence,
        TransitionMatrix, DEFAULT_MAX_POWER, DEFAULT_STEADY_TOL,
    };
    pub use crate::mle::{
        asymptotic_covariance, count_transitions, devectorize, mle_estimate, vectorize,
        AsymptoticCovariance, TransitionCounts, VectorizedMatrix,
    };
    pub use crate::random::{with_workers, SeedSpec};
    pub use crate::smoothing::{scaled_deviation, smooth, ScaledDeviation, SmoothingParam};
    pub use crate::study::{
        builtin_matrices, builtin_matrix, coverage, run_study, CoverageReport, CoverageRow, Preset,
        StudyConfig,
    };
    pub use crate::{Error, Result};
}
