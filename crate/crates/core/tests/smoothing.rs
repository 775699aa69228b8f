use std::path::Path;

use markov_smooth::io::read_matrix;
use markov_smooth::prelude::*;
use proptest::prelude::*;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// The worked example does not state its chain length. Solving
/// `s / (1 + 4 s) = 0.071429` (cell (3,1), where the raw estimate is 0)
/// gives `s = 0.1 = n^-0.5`, so `n = 100`.
#[test]
fn chain_length_of_worked_example() {
    let printed = 0.071429f64;
    let s = printed / (1.0 - 4.0 * printed);
    let n = s.powi(-2);
    assert!((n - 100.0).abs() < 0.01, "n = {n}");
}

#[test]
fn worked_example_reproduces() {
    let p_hat = read_matrix(data("sec7_phat.csv")).unwrap();
    let p_tilde = smooth(&p_hat, 100, SmoothingParam::Finite(0.5));
    let printed = [
        [0.150794, 0.230159, 0.230159, 0.388889],
        [0.173469, 0.173469, 0.326531, 0.326531],
        [0.071429, 0.097884, 0.203704, 0.626984],
        [0.158892, 0.202624, 0.275510, 0.362974],
    ];
    for (row, exp) in p_tilde.rows().zip(printed.iter()) {
        for (a, b) in row.iter().zip(exp) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
    assert_eq!(read_matrix(data("sec7_ptilde.csv")).unwrap().entries().len(), 16);
    let bundled = read_matrix(data("sec7_ptilde.csv")).unwrap();
    for (a, b) in bundled.entries().iter().zip(p_tilde.entries()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn infinite_smoothing_limit() {
    let p_hat = read_matrix(data("sec7_phat.csv")).unwrap();
    let mut prev = f64::INFINITY;
    for u in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let p = smooth(&p_hat, 100, SmoothingParam::Finite(u));
        let diff = p
            .entries()
            .iter()
            .zip(p_hat.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < prev);
        prev = diff;
    }
    assert!(prev < 1e-30);
    assert_eq!(smooth(&p_hat, 100, SmoothingParam::Infinite), p_hat);
}

/// `max |P_tilde - P_hat| <= C n^-u` with one constant over the whole grid.
#[test]
fn smoothing_shift_decays_at_rate_n_to_minus_u() {
    let p = builtin_matrix("eq8").unwrap();
    let init = Distribution::uniform(4);
    for u in [0.5, 1.0, 2.0] {
        let mut scaled = Vec::new();
        for n in [50usize, 100, 500, 1000, 10_000, 100_000] {
            let seq = generate_chain(&p, &init, n, SeedSpec::new(8, n as u64)).unwrap();
            let p_hat = mle_estimate(&seq).unwrap();
            let p_tilde = smooth(&p_hat, n, SmoothingParam::Finite(u));
            let diff = p_tilde
                .entries()
                .iter()
                .zip(p_hat.entries())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            scaled.push(diff * (n as f64).powf(u));
        }
        let c = scaled.iter().copied().fold(0.0, f64::max);
        // |P_hat (1/omega - 1) + s/omega| <= (d + 1) s for any P_hat
        assert!(c <= 5.0, "u = {u}: {scaled:?}");
        assert!(scaled.iter().all(|&v| v > 0.0));
    }
}

/// Scaled deviations of the smoothed estimate stay bounded along the grid
/// for `u = 0.5`.
#[test]
fn smoothed_deviation_stays_bounded() {
    let p = builtin_matrix("eq8").unwrap();
    let init = Distribution::uniform(4);
    let mut running = 0.0f64;
    for (k, &n) in [50usize, 100, 500, 1000, 10_000].iter().enumerate() {
        let seq = generate_chain(&p, &init, n, SeedSpec::new(2718, k as u64)).unwrap();
        let p_tilde = smooth(&mle_estimate(&seq).unwrap(), n, SmoothingParam::Finite(0.5));
        let m = scaled_deviation(&p_tilde, &p, n).unwrap().max_abs();
        if k > 0 {
            assert!(m <= 2.0 * running, "n = {n}: {m} vs running max {running}");
        }
        assert!(m <= 4.0);
        running = running.max(m);
    }
}

proptest! {
    #[test]
    fn smoothed_matrix_is_positive_and_stochastic(
        rows in (1usize..=5).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(0u32..4, d), d)),
        n in 1usize..10_000,
        u in 0.1f64..6.0,
    ) {
        let d = rows.len();
        let rows: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let s: u32 = r.iter().sum();
                if s == 0 {
                    (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
                } else {
                    r.iter().map(|&v| v as f64 / s as f64).collect()
                }
            })
            .collect();
        let p_hat = validate_matrix(&rows).unwrap();
        let p = smooth(&p_hat, n, SmoothingParam::Finite(u));
        for row in p.rows() {
            prop_assert!(row.iter().all(|&v| v > 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
