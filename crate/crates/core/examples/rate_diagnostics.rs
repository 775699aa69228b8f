//! Scaled deviations `sqrt(n) (P - P_true)` of the raw and smoothed
//! estimates as the chain grows.
//!
//! ```text
//! cargo run --release --example rate_diagnostics
//! ```

use markov_smooth::prelude::*;

fn main() -> Result<()> {
    let truth = builtin_matrix("eq8").expect("built-in");
    let init = Distribution::uniform(truth.dim());
    println!("{:>7}  {:>10}  {:>10}  {:>10}", "n", "raw", "u = 0.5", "u = 1");
    for (k, n) in [50usize, 100, 500, 1000, 10_000, 100_000].into_iter().enumerate() {
        let seq = generate_chain(&truth, &init, n, SeedSpec::new(2718, k as u64))?;
        let p_hat = mle_estimate(&seq)?;
        let dev = |p: &TransitionMatrix| scaled_deviation(p, &truth, n).map(|s| s.max_abs());
        println!(
            "{n:>7}  {:>10.4}  {:>10.4}  {:>10.4}",
            dev(&p_hat)?,
            dev(&smooth(&p_hat, n, SmoothingParam::Finite(0.5)))?,
            dev(&smooth(&p_hat, n, SmoothingParam::Finite(1.0)))?,
        );
    }
    Ok(())
}
