//! Frame families, sampling densities and the two isotropy expectations.
//!
//! cargo run --example frame_families

use obpursuit::frames::{
    build_density, frame_operator_stats, isotropy_expectations, preconditioned_matrix,
    sample_sensing_pair, DensitySpec, FrameFamily,
};
use obpursuit::linalg::deviation_from_identity;

fn main() -> obpursuit::Result<()> {
    let families = [
        FrameFamily::partial_dft(16)?,
        FrameFamily::continuous_fourier(16)?,
        FrameFamily::synthetic_biorthogonal(16, 2.0, 1)?,
    ];
    println!(
        "{:<24} {:>6} {:>8} {:>8} {:>10} {:>10}",
        "frame", "grid", "kappa", "theta_d", "dual dev", "plain dev"
    );
    for family in &families {
        let stats = frame_operator_stats(family)?;
        let density = build_density(
            DensitySpec::VariablePower { alpha: 1.0 },
            family.grid_size(),
        )?;
        let e = isotropy_expectations(family, &density)?;
        println!(
            "{:<24} {:>6} {:>8.4} {:>8.4} {:>10.2e} {:>10.4}",
            family.tag(),
            family.grid_size(),
            stats.kappa,
            stats.theta_d,
            deviation_from_identity(&e.dual),
            deviation_from_identity(&e.plain),
        );
    }

    let family = &families[2];
    let density = build_density(DensitySpec::Uniform, family.grid_size())?;
    let pair = sample_sensing_pair(family, &density, 8, 42)?;
    let pre = preconditioned_matrix(&pair)?;
    println!(
        "\n8 rows drawn at {:?}; A is {}x{}, preconditioned matrix is {}x{}",
        pair.indices(),
        pair.a.rows(),
        pair.a.cols(),
        pre.rows(),
        pre.cols()
    );
    Ok(())
}
