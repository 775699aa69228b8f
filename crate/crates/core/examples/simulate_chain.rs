//! Simulate a chain, compare visit frequencies with the steady state.
//!
//! ```text
//! cargo run --example simulate_chain -- 20000 7
//! ```

use markov_smooth::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let p = builtin_matrix("eq8").expect("built-in");
    println!("transition matrix:\n{p}");
    let seq = generate_chain(&p, &Distribution::uniform(p.dim()), n, SeedSpec::new(seed, 0))?;
    let head: Vec<String> = seq.to_one_based().iter().take(20).map(|s| s.to_string()).collect();
    println!("first states: {}", head.join(","));

    let pi = steady_state(&p, DEFAULT_STEADY_TOL, DEFAULT_MAX_POWER)?;
    let mut freq = vec![0usize; p.dim()];
    for &s in seq.states() {
        freq[s] += 1;
    }
    println!("state  visit share  steady state");
    for (i, (&f, &q)) in freq.iter().zip(pi.probs()).enumerate() {
        println!("{:>5}  {:>11.4}  {:>12.4}", i + 1, f as f64 / n as f64, q);
    }

    let mut v = Distribution::point_mass(p.dim(), 0)?;
    for k in 1..=5 {
        println!("step {k}: distribution {:?}", v.probs());
        v = v.step(&p)?;
    }
    Ok(())
}
