//! Runs the randomized matrix-inequality checks and prints the table.
//!
//! cargo run --example lemma_suite -- [trials] [seed]

use obpursuit::certificates::{run_lemma_suite, LemmaSuiteConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let suite = run_lemma_suite(LemmaSuiteConfig { trials, seed });
    print!("{}", suite.table());
    let failing: Vec<_> = suite.checks.iter().filter(|c| !c.passed()).collect();
    println!(
        "{} of {} checks hold on every trial",
        suite.checks.len() - failing.len(),
        suite.checks.len()
    );
}
