//! Maximum-likelihood estimate from a short observed sequence, with its
//! vectorized form and limiting covariance.
//!
//! ```text
//! cargo run --example estimate_mle
//! ```

use markov_smooth::prelude::*;

fn main() -> Result<()> {
    let seq = StateSequence::from_one_based(4, &[3, 4, 2, 4, 3, 4, 3, 4, 4, 1])?;
    let counts = count_transitions(&seq)?;
    println!("visits (excluding the last state): {:?}", counts.visits());
    let p_hat = counts.estimate();
    println!("estimate:\n{p_hat}");

    let v = vectorize(&p_hat);
    println!("vectorized, position = j + (i - 1) d:");
    for (k, value) in v.values().iter().enumerate() {
        let (i, j) = VectorizedMatrix::cell(4, k);
        println!("  {:>2}  P{}{} = {value:.4}", k + 1, i + 1, j + 1);
    }

    let sigma = asymptotic_covariance(&p_hat);
    println!("limiting covariance block for row 4:");
    for a in 12..16 {
        let row: Vec<String> = (12..16).map(|b| format!("{:>8.4}", sigma.get(a, b))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
