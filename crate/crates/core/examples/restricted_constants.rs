//! Exact restricted constants of a small sensing pair and the convergence
//! constants they imply.
//!
//! cargo run --example restricted_constants

use obpursuit::certificates::{
    constants_report, convergence_constants, ConstantInputs, EnumerationMode,
};
use obpursuit::frames::{build_density, sample_sensing_pair, DensitySpec, FrameFamily};
use obpursuit::pursuits::Algorithm;

fn main() -> obpursuit::Result<()> {
    let family = FrameFamily::synthetic_biorthogonal(16, 1.5, 7)?;
    let density = build_density(DensitySpec::Uniform, family.grid_size())?;
    let pair = sample_sensing_pair(&family, &density, 14, 11)?;
    let mode = EnumerationMode::default();
    for s in 1..=3 {
        let r = constants_report(&pair.a, &pair.a_dual, s, mode, false)?;
        println!(
            "s = {s}: delta_s(A) = {:.4}, delta_s(A~) = {:.4}, theta_s = {:.4} ({} subsets)",
            r.delta_psi.value, r.delta_psi_dual.value, r.theta.value, r.theta.evaluated
        );
    }
    println!();
    for alg in [
        Algorithm::Cosamp,
        Algorithm::Sp,
        Algorithm::Iht,
        Algorithm::Htp,
    ] {
        let inputs = ConstantInputs::enumerate(&pair.a, &pair.a_dual, alg, 1, mode)?;
        match convergence_constants(alg, inputs) {
            Ok(c) => println!(
                "{:<7} theta_{}s = {:.4} (threshold {}), rho = {:.4}, tau = {:.4}",
                alg.as_str(),
                c.k,
                c.theta,
                c.threshold,
                c.rho,
                c.tau
            ),
            Err(e) => println!("{:<7} {e}", alg.as_str()),
        }
    }
    Ok(())
}
