//! Smoothing a sparse estimate at several exponents.
//!
//! ```text
//! cargo run --example smooth_sparse -- 100
//! ```

use markov_smooth::prelude::*;

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let p_hat = markov_smooth::io::parse_matrix(include_str!("../data/sec7_phat.csv"))?;
    println!("raw estimate (n = {n}):\n{p_hat}");
    for u in ["0.5", "1", "2", "inf"] {
        let u: SmoothingParam = u.parse()?;
        let p = smooth(&p_hat, n, u);
        let smallest = p.entries().iter().copied().fold(f64::INFINITY, f64::min);
        println!("u = {u}: weight {:.3e}, smallest entry {smallest:.6}", u.weight(n));
        if u == SmoothingParam::Finite(0.5) {
            println!("{p}");
        }
    }
    Ok(())
}
