//! Sparsifying dictionaries and their biorthogonal duals.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certificates::{restricted_isometry_constant, EnumerationMode};
use crate::error::{Error, Result};
use crate::frames::{linspace, random_orthogonal};
use crate::linalg::{deviation_from_identity, CMatrix, DenseMatrix};

/// Parameters that determine a dictionary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DictionarySpec {
    /// The identity basis.
    Identity { n: usize },
    /// A random orthonormal basis.
    Orthonormal { n: usize, seed: u64 },
    /// Square `U Σ V^*` with condition number `kappa`, optimally scaled.
    Invertible { n: usize, kappa: f64, seed: u64 },
    /// Block-diagonal with independent `block x block` invertible blocks,
    /// each with condition number `kappa`.
    BlockDiagonal {
        n: usize,
        block: usize,
        kappa: f64,
        seed: u64,
    },
    /// Unit-norm Gaussian columns in `d` dimensions, redrawn until the
    /// enumerated `δ_s(D)` is below `threshold`. Paired with itself.
    RipOvercomplete {
        d: usize,
        n: usize,
        s: usize,
        threshold: f64,
        seed: u64,
    },
}

impl DictionarySpec {
    pub fn structure(&self) -> &'static str {
        match self {
            DictionarySpec::Identity { .. } | DictionarySpec::Orthonormal { .. } => "orthonormal",
            DictionarySpec::Invertible { .. } => "invertible",
            DictionarySpec::BlockDiagonal { .. } => "block-diagonal",
            DictionarySpec::RipOvercomplete { .. } => "rip-overcomplete",
        }
    }
}

/// Draws allowed when rejection sampling an overcomplete dictionary.
pub const MAX_REJECTION_DRAWS: usize = 1000;

/// Dictionary `D` and the matrix `D̃` used on the dual side.
#[derive(Clone, Debug)]
pub struct DictionaryPair {
    pub d: DenseMatrix,
    pub d_dual: DenseMatrix,
    pub spec: DictionarySpec,
}

impl DictionaryPair {
    pub fn identity(n: usize) -> Result<Self> {
        make_dictionary(DictionarySpec::Identity { n })
    }

    pub fn atoms(&self) -> usize {
        self.d.cols()
    }

    /// `δ_n(D) = ‖D^* D - I‖`.
    pub fn isometry_deviation(&self) -> Result<f64> {
        Ok(deviation_from_identity(&self.d.adjoint_mul(&self.d)?))
    }

    /// Rebuilds the dictionary from its spec after deserialising a sidecar.
    pub fn from_spec(spec: DictionarySpec) -> Result<Self> {
        make_dictionary(spec)
    }
}

fn conditioned_block(size: usize, kappa: f64, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let theta = (kappa * kappa - 1.0) / (kappa * kappa + 1.0);
    let sigma = linspace((1.0 - theta).sqrt(), (1.0 + theta).sqrt(), size);
    let mut u = random_orthogonal(size, rng);
    let v = random_orthogonal(size, rng);
    for (j, s) in sigma.iter().enumerate() {
        u.column_mut(j).scale_mut(*s);
    }
    u * v.transpose()
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::InvalidDictionary(format!(
            "condition number must be at least 1, got {kappa}"
        )));
    }
    Ok(())
}

/// Builds a dictionary and its dual.
///
/// Square kinds place the singular values linearly between `√(1-θ)` and
/// `√(1+θ)` with `θ = (κ²-1)/(κ²+1)`, so that `D^*D` has extreme eigenvalues
/// `1 ± θ` and `‖D^*D - I‖ = θ`.
pub fn make_dictionary(spec: DictionarySpec) -> Result<DictionaryPair> {
    let d = match &spec {
        DictionarySpec::Identity { n } => {
            if *n == 0 {
                return Err(Error::InvalidDictionary("n must be at least 1".into()));
            }
            DMatrix::identity(*n, *n)
        }
        DictionarySpec::Orthonormal { n, seed } => {
            if *n == 0 {
                return Err(Error::InvalidDictionary("n must be at least 1".into()));
            }
            random_orthogonal(*n, &mut ChaCha20Rng::seed_from_u64(*seed))
        }
        DictionarySpec::Invertible { n, kappa, seed } => {
            check_kappa(*kappa)?;
            if *n == 0 {
                return Err(Error::InvalidDictionary("n must be at least 1".into()));
            }
            conditioned_block(*n, *kappa, &mut ChaCha20Rng::seed_from_u64(*seed))
        }
        DictionarySpec::BlockDiagonal {
            n,
            block,
            kappa,
            seed,
        } => {
            check_kappa(*kappa)?;
            if *block == 0 || *n == 0 || n % block != 0 {
                return Err(Error::InvalidDictionary(format!(
                    "block size {block} must divide n = {n}"
                )));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let mut d = DMatrix::zeros(*n, *n);
            for start in (0..*n).step_by(*block) {
                let b = conditioned_block(*block, *kappa, &mut rng);
                d.view_mut((start, start), (*block, *block)).copy_from(&b);
            }
            d
        }
        DictionarySpec::RipOvercomplete {
            d,
            n,
            s,
            threshold,
            seed,
        } => {
            if *d == 0 || n <= d || *s == 0 || s > d {
                return Err(Error::InvalidDictionary(format!(
                    "overcomplete dictionary needs 1 <= s <= d < n, got d = {d}, n = {n}, s = {s}"
                )));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let mut accepted = None;
            for _ in 0..MAX_REJECTION_DRAWS {
                let mut g = DMatrix::<f64>::from_fn(*d, *n, |_, _| StandardNormal.sample(&mut rng));
                for mut col in g.column_iter_mut() {
                    let norm = col.norm();
                    col /= norm;
                }
                let cand = DenseMatrix::from_real(&g)?;
                let report = restricted_isometry_constant(&cand, *s, EnumerationMode::default())?;
                if report.value < *threshold {
                    accepted = Some(g);
                    break;
                }
            }
            accepted.ok_or_else(|| {
                Error::InvalidDictionary(format!(
                    "no draw reached δ_{s}(D) < {threshold} in {MAX_REJECTION_DRAWS} attempts"
                ))
            })?
        }
    };
    let d = DenseMatrix::from_real(&d)?;
    let d_dual = match spec {
        DictionarySpec::RipOvercomplete { .. } => d.clone(),
        DictionarySpec::Identity { .. } | DictionarySpec::Orthonormal { .. } => d.clone(),
        _ => dictionary_dual(&d)?,
    };
    Ok(DictionaryPair { d, d_dual, spec })
}

fn gram_inverse(d: &DenseMatrix) -> Result<CMatrix> {
    let gram = d.adjoint_mul(d)?;
    let eig = gram.clone().symmetric_eigen();
    let hi = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(hi > 0.0) || !(lo > 1e-12 * hi) {
        return Err(Error::RankDeficient {
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    gram.cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })
}

/// `D̃ = D (D^*D)^{-1}`, so that `D̃^* D = I`.
pub fn dictionary_dual(d: &DenseMatrix) -> Result<DenseMatrix> {
    let inv = gram_inverse(d)?;
    let dual = d.as_matrix() * inv;
    // (D^*D)^{-1} of a real D is real up to rounding in the imaginary parts
    if d.field() == crate::linalg::Field::Real {
        return DenseMatrix::from_real(&dual.map(|z| z.re));
    }
    DenseMatrix::new(dual)
}

/// Induced `ℓ1 -> ℓ1` norm of `(D^*D)^{-1}`: the largest absolute column sum.
pub fn dictionary_one_norm(d: &DenseMatrix) -> Result<f64> {
    let inv = gram_inverse(d)?;
    Ok(inv
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_vector, singular_values};

    fn kappa_of(d: &DenseMatrix) -> f64 {
        let sv = singular_values(d.as_matrix());
        sv[0] / sv[sv.len() - 1]
    }

    #[test]
    fn orthonormal_kind_is_isometric() {
        let p = make_dictionary(DictionarySpec::Orthonormal { n: 10, seed: 3 }).unwrap();
        assert!(p.isometry_deviation().unwrap() <= 1e-10);
        assert!((dictionary_one_norm(&p.d).unwrap() - 1.0).abs() < 1e-10);
        let dual = dictionary_dual(&p.d).unwrap();
        assert!((dual.as_matrix() - p.d.as_matrix()).norm() < 1e-10);
    }

    #[test]
    fn condition_targets_map_to_delta() {
        let p = make_dictionary(DictionarySpec::Invertible {
            n: 16,
            kappa: 2.0,
            seed: 1,
        })
        .unwrap();
        assert!((p.isometry_deviation().unwrap() - 0.6).abs() < 1e-12);
        assert!((kappa_of(&p.d) - 2.0).abs() < 0.02);
        let p = make_dictionary(DictionarySpec::Invertible {
            n: 16,
            kappa: 1.99,
            seed: 1,
        })
        .unwrap();
        assert!((p.isometry_deviation().unwrap() - 0.60).abs() < 0.005);
    }

    #[test]
    fn optimal_scaling_is_symmetric() {
        let p = make_dictionary(DictionarySpec::Invertible {
            n: 12,
            kappa: 3.0,
            seed: 7,
        })
        .unwrap();
        let eig = p.d.adjoint_mul(&p.d).unwrap().symmetric_eigen().eigenvalues;
        let hi = eig.iter().copied().fold(f64::MIN, f64::max);
        let lo = eig.iter().copied().fold(f64::MAX, f64::min);
        assert!((hi + lo - 2.0).abs() < 1e-9);
    }

    #[test]
    fn block_diagonal_pattern_survives_dual() {
        let p = make_dictionary(DictionarySpec::BlockDiagonal {
            n: 12,
            block: 4,
            kappa: 1.99,
            seed: 2,
        })
        .unwrap();
        for (mat, name) in [(&p.d, "D"), (&p.d_dual, "dual")] {
            for i in 0..12 {
                for j in 0..12 {
                    if i / 4 != j / 4 {
                        assert_eq!(mat.as_matrix()[(i, j)].norm(), 0.0, "{name} ({i},{j})");
                    }
                }
            }
        }
        let cross = p.d_dual.adjoint_mul(&p.d).unwrap();
        assert!(deviation_from_identity(&cross) <= 1e-9);
        assert!((kappa_of(&p.d) - 1.99).abs() < 0.0199);
        assert!(make_dictionary(DictionarySpec::BlockDiagonal {
            n: 10,
            block: 4,
            kappa: 2.0,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn diagonal_one_norm() {
        let d = CMatrix::from_diagonal(&real_vector(&[2.0, 0.5]));
        let d = DenseMatrix::new(d).unwrap();
        assert!((dictionary_one_norm(&d).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn one_norm_matches_column_sum_oracle() {
        let p = make_dictionary(DictionarySpec::Invertible {
            n: 8,
            kappa: 1.99,
            seed: 4,
        })
        .unwrap();
        let g = p.d.real_part().transpose() * p.d.real_part();
        let inv = g.try_inverse().unwrap();
        let oracle = (0..8)
            .map(|j| (0..8).map(|i| inv[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        assert!((dictionary_one_norm(&p.d).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn random_invertible_dual_is_biorthogonal() {
        let g = DMatrix::from_fn(6, 6, |i, j| {
            ((i * 5 + j * 3) % 7) as f64 + (i == j) as u8 as f64 * 4.0
        });
        let d = DenseMatrix::from_real(&g).unwrap();
        let dual = dictionary_dual(&d).unwrap();
        assert!(deviation_from_identity(&dual.adjoint_mul(&d).unwrap()) <= 1e-9);
    }

    #[test]
    fn rank_deficient_dictionary_is_rejected() {
        let d = DenseMatrix::from_real(&DMatrix::from_element(3, 2, 1.0)).unwrap();
        assert!(matches!(
            dictionary_dual(&d),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn overcomplete_dictionary_meets_threshold() {
        let p = make_dictionary(DictionarySpec::RipOvercomplete {
            d: 8,
            n: 12,
            s: 2,
            threshold: 0.8,
            seed: 9,
        })
        .unwrap();
        assert_eq!(p.d, p.d_dual);
        let delta = restricted_isometry_constant(&p.d, 2, EnumerationMode::default()).unwrap();
        assert!(delta.value < 0.8);
        for j in 0..12 {
            assert!((p.d.column_norm(j) - 1.0).abs() < 1e-12);
        }
    }
}
