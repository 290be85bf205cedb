use serde::{Deserialize, Serialize};

use super::enumerate::{
    restricted_biorthogonality_constant, restricted_isometry_constant, EnumerationMode,
};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseSignal};
use crate::pursuits::Algorithm;

/// `(k, c)` such that `θ_{ks} < c` gives linear convergence, or `None` for
/// the non-iterative algorithms.
pub fn table_threshold(algorithm: Algorithm) -> Option<(usize, f64)> {
    match algorithm {
        Algorithm::Cosamp => Some((4, 0.384)),
        Algorithm::Sp => Some((3, 0.325)),
        Algorithm::Iht => Some((3, 0.5)),
        Algorithm::Htp => Some((3, 0.577)),
        Algorithm::Thres | Algorithm::Mp => None,
    }
}

/// Restricted constants entering the convergence constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    /// `θ_{ks}(Ψ̃^*Ψ)` for the algorithm's `k`.
    pub theta: f64,
    /// `δ_s(Ψ)`.
    pub delta_psi_s: f64,
    /// `δ_{2s}(Ψ̃)`.
    pub delta_dual_2s: f64,
    /// `δ_{4s}(Ψ̃)`.
    pub delta_dual_4s: f64,
}

impl ConstantInputs {
    /// Noise-free inputs with all restricted isometry constants zero.
    pub fn from_theta(theta: f64) -> Self {
        Self {
            theta,
            delta_psi_s: 0.0,
            delta_dual_2s: 0.0,
            delta_dual_4s: 0.0,
        }
    }

    /// Enumerates the inputs for `algorithm` at sparsity `s`. Orders above
    /// `n` are capped at `n`, since no larger support exists.
    pub fn enumerate(
        psi: &DenseMatrix,
        psi_dual: &DenseMatrix,
        algorithm: Algorithm,
        s: usize,
        mode: EnumerationMode,
    ) -> Result<Self> {
        let (k, _) = table_threshold(algorithm).ok_or_else(|| {
            Error::ConstantsUndefined(format!("{} has no convergence constants", algorithm))
        })?;
        let n = psi.cols();
        let cap = |order: usize| order.min(n);
        Ok(Self {
            theta: restricted_biorthogonality_constant(psi, psi_dual, cap(k * s), mode)?.value,
            delta_psi_s: restricted_isometry_constant(psi, cap(s), mode)?.value,
            delta_dual_2s: restricted_isometry_constant(psi_dual, cap(2 * s), mode)?.value,
            delta_dual_4s: restricted_isometry_constant(psi_dual, cap(4 * s), mode)?.value,
        })
    }
}

/// `ρ, τ` of the error recursion and `ρ̄, τ̄` of the missed-energy bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConstants {
    pub algorithm: Algorithm,
    pub k: usize,
    pub threshold: f64,
    pub theta: f64,
    pub rho: f64,
    pub tau: f64,
    /// Absent for IHT, which has no least-squares step.
    pub rho_bar: Option<f64>,
    pub tau_bar: Option<f64>,
    /// `θ_{ks} < c`; implies `ρ < 1`.
    pub satisfied: bool,
}

/// Closed-form constants of the error recursion
/// `‖x_{t+1} - x*‖ ≤ ρ ‖x_t - x*‖ + τ ‖z‖` and of the missed-energy bound
/// `‖x_{t+1} - x*‖ ≤ ρ̄ ‖Π⊥_{J_{t+1}} x*‖ + τ̄ ‖z‖`.
pub fn convergence_constants(
    algorithm: Algorithm,
    inputs: ConstantInputs,
) -> Result<ConvergenceConstants> {
    let (k, threshold) = table_threshold(algorithm).ok_or_else(|| {
        Error::ConstantsUndefined(format!("{} has no convergence constants", algorithm))
    })?;
    let t = inputs.theta;
    if !(0.0..1.0).contains(&t) {
        return Err(Error::ConstantsUndefined(format!(
            "restricted biorthogonality constant {t} is outside [0, 1)"
        )));
    }
    for (name, v) in [
        ("delta_s(psi)", inputs.delta_psi_s),
        ("delta_2s(dual)", inputs.delta_dual_2s),
        ("delta_4s(dual)", inputs.delta_dual_4s),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::ConstantsUndefined(format!(
                "{name} = {v} must be nonnegative"
            )));
        }
    }
    let t2 = t * t;
    let d_s = inputs.delta_psi_s;
    let d2 = inputs.delta_dual_2s;
    let d4 = inputs.delta_dual_4s;
    let (rho, tau, rho_bar, tau_bar) = match algorithm {
        Algorithm::Cosamp => {
            let q = 1.0 + 3.0 * t2;
            let rho = (4.0 * t2 * q / (1.0 - t2)).sqrt();
            let tau = ((2.0 * q / (1.0 - t2)).sqrt() + q.sqrt() / (1.0 - t) + 3f64.sqrt())
                * (1.0 + d4).sqrt();
            let rho_bar = (q / (1.0 - t2)).sqrt();
            let tau_bar = (q.sqrt() / (1.0 - t) + 3f64.sqrt()) * (1.0 + d4).sqrt();
            (rho, tau, Some(rho_bar), Some(tau_bar))
        }
        Algorithm::Sp => {
            let big = f64::max(1.0 / (1.0 - t).powi(2), 2.0 / (1.0 + 2.0 * t + 2.0 * t2));
            let rho = t * (1.0 + t).sqrt() / (1.0 - t).sqrt() * big;
            let tau = (1.0 + d2).sqrt() / (1.0 - t)
                + (1.0 + d2).sqrt() / ((1.0 - t) * (1.0 - t2).sqrt())
                + 2.0 * (1.0 + d_s).sqrt() * (1.0 + d2) * (1.0 + t).sqrt()
                    / ((1.0 - t).sqrt() * (1.0 - t))
                    * big;
            let rho_bar = 1.0 / (1.0 - t2).sqrt();
            let tau_bar = (1.0 + d4).sqrt() / (1.0 - t);
            (rho, tau, Some(rho_bar), Some(tau_bar))
        }
        Algorithm::Htp => {
            let rho = (2.0 * t2 / (1.0 - t2)).sqrt();
            let tau = ((2.0 / (1.0 - t2)).sqrt() + 1.0 / (1.0 - t)) * (1.0 + d2).sqrt();
            let rho_bar = 1.0 / (1.0 - t2).sqrt();
            let tau_bar = (1.0 + d4).sqrt() / (1.0 - t);
            (rho, tau, Some(rho_bar), Some(tau_bar))
        }
        Algorithm::Iht => (2.0 * t, 2.0 * (1.0 + d2).sqrt(), None, None),
        Algorithm::Thres | Algorithm::Mp => unreachable!("filtered by table_threshold"),
    };
    Ok(ConvergenceConstants {
        algorithm,
        k,
        threshold,
        theta: t,
        rho,
        tau,
        rho_bar,
        tau_bar,
        satisfied: t < threshold,
    })
}

/// Dyadic magnitude band `B_j = {i : 2^{-(j+1)} ‖x‖² < |x_i|² ≤ 2^{-j} ‖x‖²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBand {
    pub index: u32,
    pub members: Vec<usize>,
}

/// Nonempty component bands of `x`, in increasing band index.
pub fn component_bands(x: &SparseSignal) -> Vec<ComponentBand> {
    let energy: f64 = x.values().iter().map(|v| v.norm_sqr()).sum();
    let mut bands: Vec<ComponentBand> = Vec::new();
    for (i, v) in x.support().iter().zip(x.values()) {
        let a = v.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let mut j = 0u32;
        let mut upper = energy;
        while a <= upper / 2.0 {
            upper /= 2.0;
            j += 1;
        }
        match bands.binary_search_by_key(&j, |b| b.index) {
            Ok(pos) => bands[pos].members.push(i),
            Err(pos) => bands.insert(
                pos,
                ComponentBand {
                    index: j,
                    members: vec![i],
                },
            ),
        }
    }
    bands
}

/// Inputs of the iteration-count bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    pub rho: f64,
    pub tau: f64,
    pub rho_bar: f64,
    pub tau_bar: f64,
    /// Margin `η` with `ρ + η < 1`.
    pub eta: f64,
    /// Extra iterations `L` spent shrinking the noise term.
    pub extra: u32,
}

impl BoundParameters {
    pub fn from_constants(c: &ConvergenceConstants, eta: f64, extra: u32) -> Result<Self> {
        match (c.rho_bar, c.tau_bar) {
            (Some(rho_bar), Some(tau_bar)) => Ok(Self {
                rho: c.rho,
                tau: c.tau,
                rho_bar,
                tau_bar,
                eta,
                extra,
            }),
            _ => Err(Error::BoundUndefined(format!(
                "{} has no missed-energy constants",
                c.algorithm
            ))),
        }
    }
}

/// Profile and iteration threshold for a signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationBound {
    pub bands: Vec<ComponentBand>,
    pub profile: usize,
    pub sparsity: usize,
    /// Right-hand side `L + p ln(1 + 2[ρ̄ + (τ/τ̄)(1-ρ-η)] √(s/p)) / ln(1/(1-η))`.
    pub threshold: f64,
    /// Smallest integer strictly above `threshold`.
    pub iterations: u64,
}

pub fn iteration_bound(x: &SparseSignal, params: BoundParameters) -> Result<IterationBound> {
    let BoundParameters {
        rho,
        tau,
        rho_bar,
        tau_bar,
        eta,
        extra,
    } = params;
    if !(eta > 0.0 && eta < 1.0) || !(rho >= 0.0) || !(rho + eta < 1.0) {
        return Err(Error::BoundUndefined(format!(
            "need 0 < eta < 1 and rho + eta < 1, got rho = {rho}, eta = {eta}"
        )));
    }
    if !(tau >= 0.0 && rho_bar >= 0.0 && tau_bar > 0.0) {
        return Err(Error::BoundUndefined(
            "tau and rho_bar must be nonnegative and tau_bar positive".into(),
        ));
    }
    let bands = component_bands(x);
    let profile = bands.len();
    let s = x.nonzero_count();
    if s == 0 {
        return Err(Error::BoundUndefined("the signal is zero".into()));
    }
    let p = profile as f64;
    let inner = 1.0 + 2.0 * (rho_bar + tau / tau_bar * (1.0 - rho - eta)) * (s as f64 / p).sqrt();
    let threshold = extra as f64 + p * inner.ln() / (1.0 / (1.0 - eta)).ln();
    Ok(IterationBound {
        bands,
        profile,
        sparsity: s,
        threshold,
        iterations: threshold.floor() as u64 + 1,
    })
}

/// Which bound-constant theorem to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    /// RIP of `Ψ = A D`: `K₀`.
    Rip,
    /// Biorthogonal dual with nonredundant `D`: `K₁`, `K₂`.
    Biorthogonal,
    /// Overcomplete `D` with the RIP, `Ψ̃ = Ã D`: `K₁`, `K₂`.
    Overcomplete,
}

/// Quantities entering the bound constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub nu_min: f64,
    pub nu_max: f64,
    /// `δ_s(D)` for the RIP and overcomplete cases, `δ_n(D)` for the biorthogonal case.
    pub delta_dictionary: f64,
    /// `θ_d(ΦΦ^*)`.
    pub theta_d: f64,
    /// Incoherence `K ≥ sup_ω max_j |⟨φ_ω, d_j⟩|`.
    pub incoherence: f64,
    /// `‖(D^*D)^{-1}‖_{1→1}`; only used in the biorthogonal case.
    pub one_norm: f64,
    /// `sup_ω ‖φ_ω‖₂`.
    pub sup_frame_norm: f64,
    /// `max_j ‖d_j‖₂`.
    pub max_atom_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub case: BoundCase,
    pub k0: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

pub fn bound_constants_k(case: BoundCase, inputs: BoundInputs) -> Result<BoundConstants> {
    let BoundInputs {
        nu_min,
        nu_max,
        delta_dictionary: delta,
        theta_d,
        incoherence,
        one_norm,
        sup_frame_norm,
        max_atom_norm,
    } = inputs;
    if !(nu_min > 0.0 && nu_min <= nu_max && nu_max.is_finite()) {
        return Err(Error::BoundUndefined(format!(
            "need 0 < nu_min <= nu_max, got {nu_min}, {nu_max}"
        )));
    }
    for (name, v) in [("delta", delta), ("theta_d", theta_d)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::BoundUndefined(format!(
                "{name} = {v} is outside [0, 1)"
            )));
        }
    }
    for (name, v) in [
        ("K", incoherence),
        ("one-norm", one_norm),
        ("sup frame norm", sup_frame_norm),
        ("max atom norm", max_atom_norm),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::BoundUndefined(format!(
                "{name} = {v} must be nonnegative"
            )));
        }
    }
    let frame_ratio = theta_d / (1.0 - theta_d);
    let spread = f64::max(1.0 - 1.0 / nu_max, 1.0 / nu_min - 1.0);
    let weight = f64::max(nu_max, 1.0 / nu_min);
    let leakage = incoherence + sup_frame_norm * frame_ratio * max_atom_norm;
    let out = match case {
        BoundCase::Rip => BoundConstants {
            case,
            k0: Some(
                f64::max(1.0 - nu_min, nu_max - 1.0) + nu_max * (delta + theta_d + delta * theta_d),
            ),
            k1: None,
            k2: None,
        },
        BoundCase::Biorthogonal => {
            let d_ratio = delta / (1.0 - delta);
            BoundConstants {
                case,
                k0: None,
                k1: Some(
                    spread
                        + weight
                            * (1.0
                                + d_ratio
                                + frame_ratio
                                + delta * theta_d / ((1.0 - delta) * (1.0 - theta_d))),
                ),
                k2: Some(one_norm / (nu_min * nu_min) * leakage),
            }
        }
        BoundCase::Overcomplete => BoundConstants {
            case,
            k0: None,
            k1: Some(spread + weight * (1.0 + delta + frame_ratio + delta * frame_ratio)),
            k2: Some(leakage / nu_min),
        },
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_vector, SupportSet};

    #[test]
    fn iht_constants() {
        let c = convergence_constants(
            Algorithm::Iht,
            ConstantInputs {
                theta: 0.2,
                delta_psi_s: 0.0,
                delta_dual_2s: 0.1,
                delta_dual_4s: 0.0,
            },
        )
        .unwrap();
        assert!((c.rho - 0.4).abs() < 1e-15);
        assert!((c.tau - 2.0 * 1.1f64.sqrt()).abs() < 1e-15);
        assert!(c.rho_bar.is_none());
        assert!(c.satisfied);
    }

    #[test]
    fn htp_boundary() {
        let c = convergence_constants(Algorithm::Htp, ConstantInputs::from_theta(0.577)).unwrap();
        let expect = (2.0 * 0.577f64.powi(2) / (1.0 - 0.577f64.powi(2))).sqrt();
        assert!((c.rho - expect).abs() < 1e-15);
        assert!((c.rho - 1.0).abs() < 2e-3);
    }

    #[test]
    fn thresholds_put_rho_at_one() {
        for alg in [
            Algorithm::Cosamp,
            Algorithm::Sp,
            Algorithm::Iht,
            Algorithm::Htp,
        ] {
            let (_, c) = table_threshold(alg).unwrap();
            let at = convergence_constants(alg, ConstantInputs::from_theta(c)).unwrap();
            assert!((at.rho - 1.0).abs() < 3e-3, "{alg}: rho = {}", at.rho);
            let below = convergence_constants(alg, ConstantInputs::from_theta(c - 1e-3)).unwrap();
            assert!(below.rho < 1.0 && below.satisfied, "{alg}");
        }
    }

    #[test]
    fn perfect_biorthogonality_gives_zero_rate() {
        for alg in [
            Algorithm::Cosamp,
            Algorithm::Sp,
            Algorithm::Iht,
            Algorithm::Htp,
        ] {
            let c = convergence_constants(alg, ConstantInputs::from_theta(0.0)).unwrap();
            assert_eq!(c.rho, 0.0);
        }
    }

    #[test]
    fn constants_reject_bad_inputs() {
        assert!(matches!(
            convergence_constants(Algorithm::Sp, ConstantInputs::from_theta(1.0)),
            Err(Error::ConstantsUndefined(_))
        ));
        assert!(convergence_constants(Algorithm::Mp, ConstantInputs::from_theta(0.1)).is_err());
    }

    fn signal(vals: &[f64]) -> SparseSignal {
        SparseSignal::restrict(&real_vector(vals), &SupportSet::full(vals.len())).unwrap()
    }

    #[test]
    fn flat_signal_has_profile_one() {
        let x = signal(&[1.0, -1.0, 1.0, 1.0]);
        let bands = component_bands(&x);
        assert_eq!(bands.len(), 1);
        assert_eq!(bands[0].index, 2);
    }

    #[test]
    fn halving_magnitudes_split_bands() {
        let x = signal(&[1.0, 0.5, 0.25]);
        let energy = 1.0 + 0.25 + 0.0625;
        // hand enumeration of 2^{-(j+1)} E < |x_i|^2 <= 2^{-j} E
        let member = |a: f64| {
            (0..10).find(|&j| {
                let lo = energy / 2f64.powi(j + 1);
                let hi = energy / 2f64.powi(j);
                lo < a && a <= hi
            })
        };
        let expect: Vec<u32> = [1.0, 0.25, 0.0625]
            .iter()
            .map(|&a| member(a).unwrap() as u32)
            .collect();
        let bands = component_bands(&x);
        assert_eq!(bands.len(), 3);
        assert_eq!(bands.iter().map(|b| b.index).collect::<Vec<_>>(), expect);
    }

    #[test]
    fn profile_never_exceeds_sparsity_and_bound_is_finite() {
        let x = signal(&[5.0, 0.0, -0.001, 2.0, 0.3]);
        let b = iteration_bound(
            &x,
            BoundParameters {
                rho: 0.5,
                tau: 3.0,
                rho_bar: 1.2,
                tau_bar: 2.0,
                eta: 0.1,
                extra: 2,
            },
        )
        .unwrap();
        assert!(b.profile <= b.sparsity);
        assert_eq!(b.sparsity, 4);
        assert!(b.threshold > 2.0 && (b.iterations as f64) > b.threshold);
        let bad = BoundParameters {
            rho: 0.95,
            tau: 1.0,
            rho_bar: 1.0,
            tau_bar: 1.0,
            eta: 0.1,
            extra: 0,
        };
        assert!(matches!(
            iteration_bound(&x, bad),
            Err(Error::BoundUndefined(_))
        ));
    }

    fn inputs(nu_min: f64, nu_max: f64, delta: f64, theta_d: f64) -> BoundInputs {
        BoundInputs {
            nu_min,
            nu_max,
            delta_dictionary: delta,
            theta_d,
            incoherence: 1.0,
            one_norm: 1.0,
            sup_frame_norm: 1.0,
            max_atom_norm: 1.0,
        }
    }

    #[test]
    fn ideal_case_has_zero_k0() {
        let k = bound_constants_k(BoundCase::Rip, inputs(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(k.k0, Some(0.0));
    }

    #[test]
    fn patch_dictionary_simplification() {
        let mut i = inputs(0.5, 3.0, 0.6, 0.0);
        i.one_norm = 2.13;
        i.incoherence = 1.7;
        let k = bound_constants_k(BoundCase::Biorthogonal, i).unwrap();
        let k1 = f64::max(1.0 - 1.0 / 3.0, 2.0 - 1.0) + 2.5 * f64::max(3.0, 2.0);
        assert!((k.k1.unwrap() - k1).abs() < 1e-12);
        assert!((k.k2.unwrap() - 2.13 * 1.7 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn condition_two_frame_feeds_k0() {
        let k = bound_constants_k(BoundCase::Rip, inputs(0.8, 1.4, 0.0, 1.0 / 3.0)).unwrap();
        let expect = f64::max(0.2, 0.4) + 1.4 / 3.0;
        assert!((k.k0.unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn overcomplete_constants() {
        let k = bound_constants_k(BoundCase::Overcomplete, inputs(0.5, 2.0, 0.2, 0.5)).unwrap();
        let expect_k1 = f64::max(0.5, 1.0) + 2.0 * (1.0 + 0.2 + 1.0 + 0.2);
        assert!((k.k1.unwrap() - expect_k1).abs() < 1e-12);
        assert!((k.k2.unwrap() - (1.0 + 1.0) / 0.5).abs() < 1e-12);
        assert!(bound_constants_k(BoundCase::Rip, inputs(0.0, 1.0, 0.0, 0.0)).is_err());
    }
}
