//! Writes a sensing pair and a dictionary to disk and reads them back.
//!
//! cargo run --example save_load_pair -- [directory]

use obpursuit::dictionaries::{make_dictionary, DictionarySpec};
use obpursuit::frames::{build_density, sample_sensing_pair, DensitySpec, FrameFamily};
use obpursuit::io::{load_dictionary, load_sensing_pair, save_dictionary, save_sensing_pair};

fn main() -> obpursuit::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("obpursuit-example"));
    let family = FrameFamily::partial_dft(32)?;
    let density = build_density(
        DensitySpec::VariablePower { alpha: 1.0 },
        family.grid_size(),
    )?;
    let pair = sample_sensing_pair(&family, &density, 12, 5)?;
    save_sensing_pair(&dir.join("pair"), &pair)?;
    let back = load_sensing_pair(&dir.join("pair"))?;
    println!(
        "pair saved to {} and reloaded: indices equal = {}",
        dir.join("pair").display(),
        back.indices() == pair.indices()
    );

    let dict = make_dictionary(DictionarySpec::BlockDiagonal {
        n: 32,
        block: 8,
        kappa: 2.0,
        seed: 1,
    })?;
    save_dictionary(&dir.join("dictionary"), &dict)?;
    let back = load_dictionary(&dir.join("dictionary"))?;
    let gap = (back.d.as_matrix() - dict.d.as_matrix()).norm();
    println!("dictionary reloaded with Frobenius gap {gap:.1e}");

    let (psi, psi_dual) = pair.compose(&dict)?;
    println!(
        "composed Psi is {}x{} ({:?})",
        psi.rows(),
        psi.cols(),
        psi_dual.field()
    );
    Ok(())
}
