//! Square and overcomplete dictionaries and their restricted isometry deviation.
//!
//! cargo run --example dictionaries

use obpursuit::dictionaries::{dictionary_one_norm, make_dictionary, DictionarySpec};

fn main() -> obpursuit::Result<()> {
    let specs = [
        DictionarySpec::Identity { n: 16 },
        DictionarySpec::Orthonormal { n: 16, seed: 1 },
        DictionarySpec::Invertible {
            n: 16,
            kappa: 1.99,
            seed: 2,
        },
        DictionarySpec::Invertible {
            n: 16,
            kappa: 2.0,
            seed: 2,
        },
        DictionarySpec::BlockDiagonal {
            n: 16,
            block: 4,
            kappa: 3.0,
            seed: 3,
        },
        DictionarySpec::RipOvercomplete {
            d: 12,
            n: 16,
            s: 2,
            threshold: 0.8,
            seed: 4,
        },
    ];
    println!(
        "{:<18} {:>8} {:>12} {:>10}",
        "structure", "atoms", "delta_n(D)", "||D||_1"
    );
    for spec in specs {
        let dict = make_dictionary(spec)?;
        // the Gram matrix of an overcomplete dictionary is singular
        let one_norm =
            dictionary_one_norm(&dict.d).map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<18} {:>8} {:>12.6} {:>10}",
            dict.spec.structure(),
            dict.atoms(),
            dict.isometry_deviation()?,
            one_norm
        );
    }
    Ok(())
}
