//! Median restricted biorthogonality and isometry constants against the
//! number of measurements.
//!
//! cargo run --release --example rbop_trend

use obpursuit::experiments::{rbop_trend, ExperimentConfig, ExperimentKind};

fn main() -> obpursuit::Result<()> {
    let cfg = ExperimentConfig::defaults(ExperimentKind::RbopTrend);
    let trend = rbop_trend(&cfg)?;
    println!(
        "{} frame, n = {}, s = {}, {} draws per m",
        trend.frame, cfg.n, cfg.sparsity, cfg.repetitions
    );
    print!("{}", trend.to_csv());
    let iso = trend.isotropy;
    println!(
        "exact expectations: ||E A~*A - I|| = {:.2e}, ||E A*A - I|| = {:.4}",
        iso.dual_deviation, iso.plain_deviation
    );
    Ok(())
}
