//! Frame families, sampling densities and random frame matrices.
//!
//! A frame on a finite grid `Ω` of size `N` is stored through its synthesis
//! matrix `F` (`d x N`, column `ω` is `φ_ω`). The grid carries the uniform
//! probability measure, so the frame operator is `S = F F^* / N` and a tight
//! frame in this normalisation has `S = I`. A dual frame `F̃` satisfies
//! `F̃ F^* / N = I`.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dictionaries::DictionaryPair;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DenseMatrix, C64};

/// Grid oversampling used for the "continuous" Fourier frame.
pub const CONTINUOUS_GRID_FACTOR: usize = 8;

/// How a sampling density was requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensitySpec {
    Uniform,
    /// Weight proportional to `(1 + dist)^(-alpha)`, where `dist` is the
    /// wrapped integer distance of a grid point from the zero frequency.
    VariablePower {
        alpha: f64,
    },
    Custom {
        weights: Vec<f64>,
    },
}

/// Radon-Nikodym derivative `dν/dμ` on a finite grid, normalised to mean one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingDensity {
    spec: DensitySpec,
    weights: Vec<f64>,
    nu_min: f64,
    nu_max: f64,
}

impl SamplingDensity {
    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    pub fn grid_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, omega: usize) -> f64 {
        self.weights[omega]
    }

    pub fn nu_min(&self) -> f64 {
        self.nu_min
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_max
    }

    /// Probability of drawing grid point `omega`.
    pub fn probability(&self, omega: usize) -> f64 {
        self.weights[omega] / self.weights.len() as f64
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.nu_min > 0.0
    }
}

/// Builds a density on a grid of `grid` points.
pub fn build_density(spec: DensitySpec, grid: usize) -> Result<SamplingDensity> {
    if grid == 0 {
        return Err(Error::InvalidDensity("grid size must be at least 1".into()));
    }
    let raw: Vec<f64> = match &spec {
        DensitySpec::Uniform => vec![1.0; grid],
        DensitySpec::VariablePower { alpha } => {
            if !(alpha.is_finite() && *alpha >= 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "power exponent must be finite and nonnegative, got {alpha}"
                )));
            }
            (0..grid)
                .map(|i| {
                    let dist = i.min(grid - i) as f64;
                    (1.0 + dist).powf(-alpha)
                })
                .collect()
        }
        DensitySpec::Custom { weights } => {
            if weights.len() != grid {
                return Err(Error::InvalidDensity(format!(
                    "{} custom weights for a grid of {grid} points",
                    weights.len()
                )));
            }
            if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(Error::InvalidDensity(format!(
                    "custom weights must be positive, got {w}"
                )));
            }
            weights.clone()
        }
    };
    let mean = raw.iter().sum::<f64>() / grid as f64;
    let weights: Vec<f64> = raw.iter().map(|w| w / mean).collect();
    let nu_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let nu_max = weights.iter().copied().fold(0.0, f64::max);
    Ok(SamplingDensity {
        spec,
        weights,
        nu_min,
        nu_max,
    })
}

/// Parameters that fully determine a frame family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrameSpec {
    /// `φ_ω = [1, e^{-j2πω}, ..., e^{-j2π(d-1)ω}]` for `ω = i / grid`.
    /// `grid = d` is the partial DFT; a finer grid realises the continuous
    /// Fourier frame.
    PartialDft { d: usize, grid: usize },
    /// Fourier columns premultiplied by `Λ^* = diag(conj(λ))`.
    /// The mask is stored as `[re, im]` pairs.
    MaskedFourier { mask: Vec<[f64; 2]>, grid: usize },
    /// `F = √d U Σ V^*` with random real orthogonal `U`, `V` and `Σ`
    /// increasing linearly so that the frame operator has condition number `kappa`.
    SyntheticBiorthogonal { d: usize, kappa: f64, seed: u64 },
}

/// A frame family realised on a finite grid.
#[derive(Clone, Debug)]
pub struct FrameFamily {
    spec: FrameSpec,
    synthesis: CMatrix,
    factors: Option<SyntheticFactors>,
}

/// `U`, the diagonal of `Σ`, and `V` of a synthetic biorthogonal frame.
#[derive(Clone, Debug)]
pub struct SyntheticFactors {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn fourier_column(d: usize, omega: f64) -> impl Iterator<Item = C64> {
    (0..d).map(move |l| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * omega * l as f64))
}

/// Random real orthogonal matrix from the QR factorisation of a Gaussian
/// matrix, with signs fixed so that the distribution is Haar.
pub(crate) fn random_orthogonal(d: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Values spaced linearly from `lo` to `hi` inclusive.
pub(crate) fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![((lo * lo + hi * hi) / 2.0).sqrt()];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

impl FrameFamily {
    pub fn new(spec: FrameSpec) -> Result<Self> {
        match &spec {
            FrameSpec::PartialDft { d, grid } => {
                if *d == 0 || grid < d {
                    return Err(Error::DegenerateFrame(format!(
                        "Fourier frame needs 1 <= d <= grid, got d = {d}, grid = {grid}"
                    )));
                }
                let synthesis = CMatrix::from_fn(*d, *grid, |l, w| {
                    C64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * (w as f64 / *grid as f64) * l as f64,
                    )
                });
                Ok(Self {
                    spec,
                    synthesis,
                    factors: None,
                })
            }
            FrameSpec::MaskedFourier { mask, grid } => {
                let d = mask.len();
                if d == 0 || *grid < d {
                    return Err(Error::DegenerateFrame(format!(
                        "masked Fourier frame needs 1 <= d <= grid, got d = {d}, grid = {grid}"
                    )));
                }
                let lambda: Vec<C64> = mask.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                if lambda.iter().any(|z| z.norm_sqr() == 0.0) {
                    return Err(Error::DegenerateFrame("mask has a zero entry".into()));
                }
                let mut synthesis = CMatrix::zeros(d, *grid);
                for w in 0..*grid {
                    for (l, e) in fourier_column(d, w as f64 / *grid as f64).enumerate() {
                        synthesis[(l, w)] = lambda[l].conj() * e;
                    }
                }
                Ok(Self {
                    spec,
                    synthesis,
                    factors: None,
                })
            }
            FrameSpec::SyntheticBiorthogonal { d, kappa, seed } => {
                if *d == 0 || !(kappa.is_finite() && *kappa >= 1.0) {
                    return Err(Error::DegenerateFrame(format!(
                        "synthetic frame needs d >= 1 and kappa >= 1, got d = {d}, kappa = {kappa}"
                    )));
                }
                let mut rng = ChaCha20Rng::seed_from_u64(*seed);
                let u = random_orthogonal(*d, &mut rng);
                let v = random_orthogonal(*d, &mut rng);
                let theta = (kappa - 1.0) / (kappa + 1.0);
                let sigma = linspace((1.0 - theta).sqrt(), (1.0 + theta).sqrt(), *d);
                let scale = (*d as f64).sqrt();
                let mut us = u.clone();
                for (j, s) in sigma.iter().enumerate() {
                    us.column_mut(j).scale_mut(s * scale);
                }
                let f = us * v.transpose();
                Ok(Self {
                    spec,
                    synthesis: f.map(|x| C64::new(x, 0.0)),
                    factors: Some(SyntheticFactors { u, sigma, v }),
                })
            }
        }
    }

    pub fn partial_dft(d: usize) -> Result<Self> {
        Self::new(FrameSpec::PartialDft { d, grid: d })
    }

    /// Fourier frame on the default oversampled grid of `8 d` frequencies.
    pub fn continuous_fourier(d: usize) -> Result<Self> {
        Self::new(FrameSpec::PartialDft {
            d,
            grid: CONTINUOUS_GRID_FACTOR * d,
        })
    }

    pub fn masked_fourier(mask: &[C64], grid: usize) -> Result<Self> {
        Self::new(FrameSpec::MaskedFourier {
            mask: mask.iter().map(|z| [z.re, z.im]).collect(),
            grid,
        })
    }

    pub fn synthetic_biorthogonal(d: usize, kappa: f64, seed: u64) -> Result<Self> {
        Self::new(FrameSpec::SyntheticBiorthogonal { d, kappa, seed })
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn tag(&self) -> &'static str {
        match self.spec {
            FrameSpec::PartialDft { .. } => "partial-dft",
            FrameSpec::MaskedFourier { .. } => "masked-fourier",
            FrameSpec::SyntheticBiorthogonal { .. } => "synthetic-biorthogonal",
        }
    }

    pub fn dim(&self) -> usize {
        self.synthesis.nrows()
    }

    pub fn grid_size(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn synthesis(&self) -> &CMatrix {
        &self.synthesis
    }

    pub fn synthetic_factors(&self) -> Option<&SyntheticFactors> {
        self.factors.as_ref()
    }

    /// `S = F F^* / N`.
    pub fn frame_operator(&self) -> CMatrix {
        let n = self.grid_size() as f64;
        (&self.synthesis * self.synthesis.adjoint()).map(|z| z / n)
    }

    /// `sup_ω ‖φ_ω‖₂`.
    pub fn sup_column_norm(&self) -> f64 {
        self.synthesis
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Synthesis matrices of a frame and its canonical dual.
#[derive(Clone, Debug)]
pub struct FramePair {
    pub synthesis: CMatrix,
    pub dual: CMatrix,
}

fn frame_operator_eigenvalues(family: &FrameFamily) -> Result<(f64, f64)> {
    let eig = family.frame_operator().symmetric_eigen();
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(hi > 0.0) || !(lo > 1e-12 * hi) {
        return Err(Error::DegenerateFrame(format!(
            "frame operator is singular (eigenvalues in [{lo:.3e}, {hi:.3e}])"
        )));
    }
    Ok((lo, hi))
}

/// Canonical dual `F̃ = S^{-1} F`, so that `F̃ F^* / N = I`.
///
/// For a synthetic frame `F = √d U Σ V^*` this is `√d U Σ^{-1} V^*`, formed
/// directly from the factors.
pub fn dual_frame(family: &FrameFamily) -> Result<FramePair> {
    if let Some(f) = &family.factors {
        let scale = (family.dim() as f64).sqrt();
        let mut us = f.u.clone();
        for (j, s) in f.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(scale / s);
        }
        return Ok(FramePair {
            synthesis: family.synthesis.clone(),
            dual: (us * f.v.transpose()).map(|x| C64::new(x, 0.0)),
        });
    }
    cholesky_dual(family)
}

fn cholesky_dual(family: &FrameFamily) -> Result<FramePair> {
    frame_operator_eigenvalues(family)?;
    let chol = family
        .frame_operator()
        .cholesky()
        .ok_or_else(|| Error::DegenerateFrame("frame operator is not positive definite".into()))?;
    Ok(FramePair {
        synthesis: family.synthesis.clone(),
        dual: chol.solve(&family.synthesis),
    })
}

/// Spectral summary of a frame operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub kappa: f64,
    /// `θ_d(S) = (κ - 1)/(κ + 1)`, the deviation from identity after optimal scaling.
    pub theta_d: f64,
    /// Factor `c = 2 / (λ_max + λ_min)` that places the spectrum of `c S`
    /// symmetrically around one.
    pub optimal_scale: f64,
}

pub fn frame_operator_stats(family: &FrameFamily) -> Result<FrameStats> {
    let (lo, hi) = frame_operator_eigenvalues(family)?;
    let kappa = hi / lo;
    Ok(FrameStats {
        lambda_max: hi,
        lambda_min: lo,
        kappa,
        theta_d: (kappa - 1.0) / (kappa + 1.0),
        optimal_scale: 2.0 / (hi + lo),
    })
}

/// Provenance recorded with every sensing pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingProvenance {
    pub frame: FrameSpec,
    pub density: DensitySpec,
    pub seed: u64,
    pub indices: Vec<usize>,
}

/// Random frame matrix `A` together with its dual-weighted partner `Ã`.
///
/// Row `k` of `A` is `conj(φ_{ω_k})^T / √m`; row `k` of `Ã` is
/// `conj(φ̃_{ω_k})^T / (√m w(ω_k))` with `w = dν/dμ`.
#[derive(Clone, Debug)]
pub struct SensingPair {
    pub a: DenseMatrix,
    pub a_dual: DenseMatrix,
    pub provenance: SensingProvenance,
    weights: Vec<f64>,
}

impl SensingPair {
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn indices(&self) -> &[usize] {
        &self.provenance.indices
    }

    /// Density values `w(ω_k)` at the drawn indices.
    pub fn drawn_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Ψ = A D` and `Ψ̃ = Ã D̃`.
    pub fn compose(&self, dictionary: &DictionaryPair) -> Result<(DenseMatrix, DenseMatrix)> {
        Ok((
            self.a.matmul(&dictionary.d)?,
            self.a_dual.matmul(&dictionary.d_dual)?,
        ))
    }

    /// Rebuilds the pair from its provenance.
    pub fn from_provenance(provenance: &SensingProvenance) -> Result<Self> {
        let family = FrameFamily::new(provenance.frame.clone())?;
        let density = build_density(provenance.density.clone(), family.grid_size())?;
        assemble(
            &family,
            &density,
            provenance.indices.clone(),
            provenance.seed,
        )
    }
}

/// Draws `m` grid indices i.i.d. from `density` and assembles `(A, Ã)`.
pub fn sample_sensing_pair(
    family: &FrameFamily,
    density: &SamplingDensity,
    m: usize,
    seed: u64,
) -> Result<SensingPair> {
    if m == 0 {
        return Err(Error::InvalidDensity(
            "at least one measurement is required".into(),
        ));
    }
    check_density(family, density)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dist =
        WeightedIndex::new(density.weights()).map_err(|e| Error::InvalidDensity(e.to_string()))?;
    let indices: Vec<usize> = (0..m).map(|_| dist.sample(&mut rng)).collect();
    assemble(family, density, indices, seed)
}

fn check_density(family: &FrameFamily, density: &SamplingDensity) -> Result<()> {
    if density.grid_size() != family.grid_size() {
        return Err(Error::InvalidDensity(format!(
            "density on {} points but the frame grid has {}",
            density.grid_size(),
            family.grid_size()
        )));
    }
    if !density.is_strictly_positive() {
        return Err(Error::InvalidDensity(
            "dual sensing matrix needs a strictly positive density".into(),
        ));
    }
    Ok(())
}

fn assemble(
    family: &FrameFamily,
    density: &SamplingDensity,
    indices: Vec<usize>,
    seed: u64,
) -> Result<SensingPair> {
    check_density(family, density)?;
    if let Some(&bad) = indices.iter().find(|&&w| w >= family.grid_size()) {
        return Err(Error::IndexOutOfBounds {
            index: bad,
            len: family.grid_size(),
        });
    }
    let pair = dual_frame(family)?;
    let m = indices.len();
    let d = family.dim();
    let root_m = (m as f64).sqrt();
    let weights: Vec<f64> = indices.iter().map(|&w| density.weight(w)).collect();
    let a = CMatrix::from_fn(m, d, |k, l| pair.synthesis[(l, indices[k])].conj() / root_m);
    let a_dual = CMatrix::from_fn(m, d, |k, l| {
        pair.dual[(l, indices[k])].conj() / (root_m * weights[k])
    });
    Ok(SensingPair {
        a: DenseMatrix::new(a)?,
        a_dual: DenseMatrix::new(a_dual)?,
        provenance: SensingProvenance {
            frame: family.spec().clone(),
            density: density.spec().clone(),
            seed,
            indices,
        },
        weights,
    })
}

/// Preconditioned matrix `Â`, row `k` equal to `w(ω_k)^{-1/2} conj(φ_{ω_k})^T / √m`.
pub fn preconditioned_matrix(pair: &SensingPair) -> Result<DenseMatrix> {
    if pair.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidDensity(
            "preconditioning needs a strictly positive density".into(),
        ));
    }
    let mut hat = pair.a.as_matrix().clone();
    for (k, w) in pair.weights.iter().enumerate() {
        hat.row_mut(k).scale_mut(w.powf(-0.5));
    }
    DenseMatrix::new(hat)
}

/// Exact single-draw expectations, computed by summing over the grid.
#[derive(Clone, Debug)]
pub struct IsotropyExpectations {
    /// `E Ã^* A` (per unit `m`).
    pub dual: CMatrix,
    /// `E A^* A`.
    pub plain: CMatrix,
    /// `E Â^* Â`.
    pub preconditioned: CMatrix,
}

/// Evaluates the expectations of the cross-Gram matrices for one draw
/// (`m = 1`) exactly, without sampling. Scaling with `m` cancels.
pub fn isotropy_expectations(
    family: &FrameFamily,
    density: &SamplingDensity,
) -> Result<IsotropyExpectations> {
    check_density(family, density)?;
    let pair = dual_frame(family)?;
    let d = family.dim();
    let mut dual = CMatrix::zeros(d, d);
    let mut plain = CMatrix::zeros(d, d);
    let mut pre = CMatrix::zeros(d, d);
    for w in 0..family.grid_size() {
        let p = density.probability(w);
        let nu = density.weight(w);
        let phi = pair.synthesis.column(w);
        let phi_dual = pair.dual.column(w);
        // a row conj(φ)^T contributes φ φ^*; a dual row adds the 1/w factor
        let outer = &phi * phi.adjoint();
        dual += (&phi_dual * phi.adjoint()).map(|z| z * (p / nu));
        plain += outer.map(|z| z * p);
        pre += outer.map(|z| z * (p / nu));
    }
    Ok(IsotropyExpectations {
        dual,
        plain,
        preconditioned: pre,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{deviation_from_identity, spectral_norm};

    #[test]
    fn uniform_density_is_flat() {
        let d = build_density(DensitySpec::Uniform, 17).unwrap();
        assert_eq!(d.nu_min(), 1.0);
        assert_eq!(d.nu_max(), 1.0);
    }

    #[test]
    fn custom_density_normalises() {
        let d = build_density(
            DensitySpec::Custom {
                weights: vec![2.0, 2.0, 1.0, 1.0],
            },
            4,
        )
        .unwrap();
        let expect = [4.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
        for (w, e) in d.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!((d.nu_min() - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.nu_max() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn custom_density_rejects_nonpositive() {
        let spec = DensitySpec::Custom {
            weights: vec![1.0, 0.0],
        };
        assert!(matches!(
            build_density(spec, 2),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn variable_power_matches_direct_formula() {
        let dens = build_density(DensitySpec::VariablePower { alpha: 1.0 }, 64).unwrap();
        // direct evaluation: weights 1/(1+|k|) for signed frequencies k in [-32, 31]
        let raw: Vec<f64> = (-32i64..32).map(|k| 1.0 / (1.0 + k.abs() as f64)).collect();
        let mean = raw.iter().sum::<f64>() / 64.0;
        let max = 1.0 / mean;
        let min = (1.0 / 33.0) / mean;
        assert!((dens.nu_max() - max).abs() < 1e-12);
        assert!((dens.nu_min() - min).abs() < 1e-12);
        assert!((dens.nu_max() / dens.nu_min() - 33.0).abs() < 1e-9);
        assert!(dens.nu_min() <= 1.0 && dens.nu_max() >= 1.0);
    }

    #[test]
    fn fourier_frames_are_tight_and_self_dual() {
        for family in [
            FrameFamily::partial_dft(8).unwrap(),
            FrameFamily::continuous_fourier(8).unwrap(),
        ] {
            let s = family.frame_operator();
            assert!(deviation_from_identity(&s) < 1e-10);
            let pair = dual_frame(&family).unwrap();
            assert!((&pair.dual - &pair.synthesis).norm() < 1e-10);
            assert!(frame_operator_stats(&family).unwrap().theta_d <= 1e-10);
        }
    }

    #[test]
    fn masked_fourier_dual_is_biorthogonal() {
        let mask = [
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.5),
            C64::new(2.0, 0.0),
            C64::new(0.0, -1.5),
        ];
        let family = FrameFamily::masked_fourier(&mask, 16).unwrap();
        let s = family.frame_operator();
        for (l, lam) in mask.iter().enumerate() {
            assert!((s[(l, l)].re - lam.norm_sqr()).abs() < 1e-10);
        }
        let pair = dual_frame(&family).unwrap();
        let cross = (&pair.dual * pair.synthesis.adjoint()).map(|z| z / 16.0);
        assert!(deviation_from_identity(&cross) < 1e-9);
        assert!(FrameFamily::masked_fourier(&[C64::new(0.0, 0.0)], 2).is_err());
    }

    #[test]
    fn synthetic_dual_matches_inverse_sigma() {
        let family = FrameFamily::synthetic_biorthogonal(12, 2.0, 5).unwrap();
        let f = family.synthetic_factors().unwrap();
        let ut = &f.u.transpose() * &f.u;
        assert!((ut - DMatrix::<f64>::identity(12, 12)).norm() < 1e-10);
        assert!((f.sigma[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((f.sigma[11] - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let mut us = f.u.clone();
        for (j, s) in f.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(12f64.sqrt() / s);
        }
        let expected = (us * f.v.transpose()).map(|x| C64::new(x, 0.0));
        let pair = dual_frame(&family).unwrap();
        assert!((pair.dual - expected).norm() < 1e-10);
        let stats = frame_operator_stats(&family).unwrap();
        assert!((stats.kappa - 2.0).abs() < 1e-10);
        assert!((stats.theta_d - 1.0 / 3.0).abs() < 1e-10);
        assert!((stats.optimal_scale - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_tight_pair_is_self_dual_rowwise() {
        let family = FrameFamily::partial_dft(16).unwrap();
        let dens = build_density(DensitySpec::Uniform, 16).unwrap();
        let pair = sample_sensing_pair(&family, &dens, 6, 3).unwrap();
        assert_eq!(pair.indices().len(), 6);
        assert!((pair.a.as_matrix() - pair.a_dual.as_matrix()).norm() < 1e-10);
        assert_eq!(preconditioned_matrix(&pair).unwrap(), pair.a);
    }

    #[test]
    fn sampling_is_deterministic() {
        let family = FrameFamily::synthetic_biorthogonal(10, 2.0, 1).unwrap();
        let dens = build_density(DensitySpec::VariablePower { alpha: 1.0 }, 10).unwrap();
        let p1 = sample_sensing_pair(&family, &dens, 7, 42).unwrap();
        let p2 = sample_sensing_pair(&family, &dens, 7, 42).unwrap();
        assert_eq!(p1.a, p2.a);
        assert_eq!(p1.a_dual, p2.a_dual);
        assert_eq!(p1.provenance, p2.provenance);
        let p3 = SensingPair::from_provenance(&p1.provenance).unwrap();
        assert_eq!(p1.a_dual, p3.a_dual);
    }

    #[test]
    fn preconditioned_rows_rescale_by_weight() {
        let family = FrameFamily::partial_dft(8).unwrap();
        let dens = build_density(DensitySpec::VariablePower { alpha: 1.0 }, 8).unwrap();
        let pair = sample_sensing_pair(&family, &dens, 5, 9).unwrap();
        let hat = preconditioned_matrix(&pair).unwrap();
        for k in 0..5 {
            let ratio = hat.as_matrix().row(k).norm() / pair.a.as_matrix().row(k).norm();
            assert!((ratio - pair.drawn_weights()[k].powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_expectations_show_dual_isotropy() {
        let family = FrameFamily::synthetic_biorthogonal(8, 2.0, 11).unwrap();
        let dens = build_density(DensitySpec::VariablePower { alpha: 1.0 }, 8).unwrap();
        let e = isotropy_expectations(&family, &dens).unwrap();
        assert!(deviation_from_identity(&e.dual) < 1e-9);
        assert!(deviation_from_identity(&e.preconditioned) > 1e-3);
        let s = family.frame_operator();
        assert!((&e.preconditioned - &s).norm() < 1e-9);
        assert!(spectral_norm(&e.plain) > 0.0);
    }

    #[test]
    fn monte_carlo_mean_of_dual_gram_approaches_identity() {
        let d = 8;
        let trials = 10_000;
        let family = FrameFamily::partial_dft(d).unwrap();
        let dens = build_density(DensitySpec::VariablePower { alpha: 1.0 }, d).unwrap();
        let mut dual_mean = CMatrix::zeros(d, d);
        let mut pre_mean = CMatrix::zeros(d, d);
        for t in 0..trials {
            let pair = sample_sensing_pair(&family, &dens, 1, t as u64).unwrap();
            dual_mean += pair.a_dual.adjoint_mul(&pair.a).unwrap();
            let hat = preconditioned_matrix(&pair).unwrap();
            pre_mean += hat.adjoint_mul(&hat).unwrap();
        }
        let scale = 1.0 / trials as f64;
        let tol = 5.0 * d as f64 / (trials as f64).sqrt();
        assert!(deviation_from_identity(&dual_mean.map(|z| z * scale)) <= tol);
        assert!(deviation_from_identity(&pre_mean.map(|z| z * scale)) <= tol);
    }

    #[test]
    fn synthetic_dual_matches_cholesky_solve() {
        let family = FrameFamily::synthetic_biorthogonal(12, 2.0, 4).unwrap();
        let fast = dual_frame(&family).unwrap().dual;
        let slow = cholesky_dual(&family).unwrap().dual;
        assert!((fast - slow).norm() < 1e-10);
    }
}
