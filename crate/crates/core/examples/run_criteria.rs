//! Runs the listed criteria (default: all) and prints one block per criterion.
//!
//!     cargo run --release -p gemmax --example run_criteria -- 1 5 8

use gemmax::acceptance::{run_criterion, FULL_SUITE};

fn main() {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids = if ids.is_empty() { FULL_SUITE.to_vec() } else { ids };
    for id in ids {
        println!("{}", run_criterion(id, 1, 0));
    }
}
