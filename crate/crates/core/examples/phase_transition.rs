//! Phase transition of support recovery for conventional and oblique
//! pursuits on synthetic biorthogonal frames.
//!
//! Usage: `cargo run --release --example phase_transition [key=value ...]`
//! with any experiment config key, for example `n=128 repetitions=10`.

use obpursuit::experiments::{phase_transition, ExperimentConfig, ExperimentKind};
use obpursuit::pursuits::Algorithm;

fn main() -> obpursuit::Result<()> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::PhaseTransition);
    cfg.n = 64;
    cfg.repetitions = 10;
    cfg.algorithms = vec![Algorithm::Thres, Algorithm::Iht, Algorithm::Sp];
    for arg in std::env::args().skip(1) {
        let (k, v) = arg
            .split_once('=')
            .ok_or_else(|| obpursuit::Error::Config(format!("expected key=value, got '{arg}'")))?;
        cfg.set(k, v).map_err(obpursuit::Error::Config)?;
    }
    let start = std::time::Instant::now();
    let grid = phase_transition(&cfg)?;
    println!(
        "n = {}, {} repetitions per cell, {:.1} s",
        cfg.n,
        cfg.repetitions,
        start.elapsed().as_secs_f64()
    );
    for &alg in &cfg.algorithms {
        println!(
            "{:>7}: cells with >= 50% success  conventional {:3}  oblique {:3}",
            alg.as_str(),
            grid.success_area(alg, false),
            grid.success_area(alg, true)
        );
    }
    for &alg in &cfg.algorithms {
        println!("\nsuccess rate of ob{alg} (rows s/m, columns m/n)");
        print!("{}", grid.plot_matrix(alg, true));
    }
    Ok(())
}
