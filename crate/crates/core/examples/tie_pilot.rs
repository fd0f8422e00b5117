//! Pilot run behind the committed tie-ordering thresholds. Uses a master seed
//! disjoint from the verification seeds.
//!
//!     cargo run --release -p gemmax --example tie_pilot

use std::time::Instant;

use gemmax::ties::{fraction_at_least, simulate_tie_paths};
use gemmax::GemParams;

const PILOT_SEED: u64 = 0x7131_E5EE_D000_0001;
const REPS: u64 = 10_000;

fn main() -> gemmax::Result<()> {
    for (alpha, theta) in [(0.0, 1.0), (0.5, 1.0)] {
        let t = Instant::now();
        let paths = simulate_tie_paths(GemParams::new(alpha, theta)?, 10_000, REPS, PILOT_SEED)?;
        println!("alpha={alpha} theta={theta} ({:.1?})", t.elapsed());
        for n in [100, 10_000] {
            for level in [2, 3, 4] {
                let f = fraction_at_least(&paths, n, level);
                let se = (f * (1.0 - f) / REPS as f64).sqrt();
                println!("  n={n:>6} P[max L >= {level}] = {f:.4} (se {se:.4})");
            }
        }
    }
    Ok(())
}
