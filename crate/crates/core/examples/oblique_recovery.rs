//! Conventional against oblique pursuits on one synthetic frame instance.
//!
//! cargo run --example oblique_recovery -- [seed]

use obpursuit::experiments::{draw_trial, ExperimentConfig, ExperimentKind};
use obpursuit::pursuits::{run_pursuit, Algorithm, PursuitConfig};

fn main() -> obpursuit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::PhaseTransition);
    cfg.n = 128;
    cfg.seed = seed;
    let (m, s) = (64, 6);
    let trial = draw_trial(&cfg, m, s, 0, 0)?;
    println!(
        "n = {}, m = {m}, s = {s}, true support {:?}, noise norm {:.3e}",
        cfg.n,
        trial.x.support().as_slice(),
        trial.noise_norm
    );
    println!(
        "{:<8} {:>8} {:>6} {:>12} {:>8}  termination",
        "alg", "variant", "iters", "rel error", "support"
    );
    for alg in Algorithm::ALL {
        for oblique in [false, true] {
            let mut pc = PursuitConfig::new(alg, s);
            pc.oblique = oblique;
            let r = run_pursuit(&trial.psi, &trial.psi_dual, &trial.y, &pc)?;
            println!(
                "{:<8} {:>8} {:>6} {:>12.3e} {:>8}  {:?}",
                alg.as_str(),
                if oblique { "oblique" } else { "plain" },
                r.iterations,
                r.estimate.distance(&trial.x) / trial.x.norm(),
                if r.support() == trial.x.support() {
                    "exact"
                } else {
                    "wrong"
                },
                r.termination
            );
        }
    }
    Ok(())
}
