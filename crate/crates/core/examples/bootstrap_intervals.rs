//! Bootstrap percentile intervals for every transition probability,
//! from the raw estimate and from its smoothed version.
//!
//! ```text
//! cargo run --release --example bootstrap_intervals -- 2000
//! ```

use markov_smooth::prelude::*;

fn report(label: &str, generator: TransitionMatrix, n: usize, b: usize) -> Result<()> {
    let batch = run_bootstrap(&BootstrapConfig::new(generator, n, b, SeedSpec::new(42, 0))?)?;
    let cis = element_cis(&batch, 0.05)?;
    println!("{label}: bootstrap mean\n{}", batch.mean_matrix());
    println!("{label}: 90% percentile intervals");
    for (i, row) in cis.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|ci| format!("[{:.3}, {:.3}]", ci.lower, ci.upper)).collect();
        println!("  row {}: {}", i + 1, cells.join(" "));
    }
    let cdf = batch.cell_cdf(2, 0);
    println!("{label}: empirical CDF of P31 has {} distinct steps\n", cdf.steps().len());
    Ok(())
}

fn main() -> Result<()> {
    let b: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let n = 100;
    let seq = StateSequence::from_one_based(4, &[3, 4, 2, 4, 3, 4, 3, 4, 4, 1])?;
    let p_hat = mle_estimate(&seq)?;
    report("raw", p_hat.clone(), n, b)?;
    report("smoothed", smooth(&p_hat, n, SmoothingParam::Finite(0.5)), n, b)?;
    Ok(())
}
