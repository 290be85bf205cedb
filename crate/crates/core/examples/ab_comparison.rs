//! Paired conventional/oblique comparison on identical noisy instances.
//!
//! cargo run --release --example ab_comparison -- [key=value ...]

use obpursuit::experiments::{ab_comparison, ExperimentConfig, ExperimentKind};

fn main() -> obpursuit::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::AbCompare);
    cfg.n = 64;
    cfg.m_over_n = vec![0.25, 0.5, 0.75];
    cfg.s_over_m = vec![0.1, 0.2];
    cfg.repetitions = 20;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg
            .split_once('=')
            .ok_or_else(|| obpursuit::Error::Config(format!("expected key=value, got '{arg}'")))?;
        cfg.set(k, v).map_err(obpursuit::Error::Config)?;
    }
    let ab = ab_comparison(&cfg)?;
    println!(
        "{:>5} {:>5} {:<7} {:>11} {:>11} {:>11} {:>11}",
        "m/n", "s/m", "alg", "plain ok", "oblique ok", "plain err", "oblique err"
    );
    for r in &ab.rows {
        println!(
            "{:>5} {:>5} {:<7} {:>8}/{:<2} {:>8}/{:<2} {:>11.3e} {:>11.3e}",
            r.m_over_n,
            r.s_over_m,
            r.algorithm.as_str(),
            r.conventional_successes,
            r.trials,
            r.oblique_successes,
            r.trials,
            r.conventional_mean_error,
            r.oblique_mean_error
        );
    }
    Ok(())
}
