//! Coverage of bootstrap percentile intervals, raw versus smoothed.
//!
//! ```text
//! cargo run --release --example coverage_study            # desk preset, P_I and P_II
//! cargo run --release --example coverage_study -- full    # B = 5000, R = 1000
//! cargo run --release --example coverage_study -- desk P_II 25
//! ```

use std::time::Instant;

use markov_smooth::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = match args.next().as_deref() {
        Some("full") => Preset::Full,
        _ => Preset::Desk,
    };
    let only = args.next();
    let n_only: Option<usize> = args.next().and_then(|s| s.parse().ok());

    for (name, truth) in builtin_matrices().into_iter().filter(|(n, _)| *n != "eq8") {
        if only.as_deref().is_some_and(|o| o != name) {
            continue;
        }
        let mut cfg = StudyConfig::table5(name, truth, preset, SeedSpec::new(20240501, 0));
        if let Some(n) = n_only {
            cfg.n_grid = vec![n];
        }
        let start = Instant::now();
        let report = run_study(&cfg)?;
        println!("{}", report.render_table());
        println!("mean interval width for P11:");
        for row in report.rows.iter().filter(|r| r.cell == (1, 1)) {
            println!("  n = {:>3}  u = {:>4}  width = {:.4}", row.n, row.u.to_string(), row.mean_width);
        }
        println!("({:.1?})\n", start.elapsed());
    }
    Ok(())
}
