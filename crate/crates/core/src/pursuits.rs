//! Oblique greedy pursuits.
//!
//! Every algorithm takes a sensing matrix `Ψ` and a dual `Ψ̃`, matches the
//! residual against the columns of `Ψ̃` and refits coefficients by the oblique
//! least squares `Ψ̃_J^*(y - Ψ x) = 0`. Passing `Ψ̃ = Ψ` gives the conventional
//! algorithm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::SensingPair;
use crate::linalg::{
    check_pair, hard_threshold, weighted_ls_solve, CVector, DenseMatrix, SparseSignal, SupportSet,
    C64, DEFAULT_SINGULARITY_FLOOR,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Thres,
    Mp,
    Cosamp,
    Sp,
    Iht,
    Htp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Thres,
        Algorithm::Mp,
        Algorithm::Cosamp,
        Algorithm::Sp,
        Algorithm::Iht,
        Algorithm::Htp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Thres => "thres",
            Algorithm::Mp => "mp",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Sp => "sp",
            Algorithm::Iht => "iht",
            Algorithm::Htp => "htp",
        }
    }

    /// Whether the algorithm loops until a stopping rule fires.
    pub fn is_iterative(self) -> bool {
        !matches!(self, Algorithm::Thres | Algorithm::Mp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// Accepts the short tags, optionally prefixed with `ob`, in any case.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let tag = lower.strip_prefix("ob").unwrap_or(&lower);
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == tag)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm '{s}'; expected one of thres, mp, cosamp, sp, iht, htp"
                ))
            })
    }
}

pub const DEFAULT_ITERATION_MULTIPLIER: usize = 3;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Residuals below this fraction of `‖y‖` count as an exact fit.
pub const EXACT_FIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PursuitConfig {
    pub algorithm: Algorithm,
    pub sparsity: usize,
    /// When false the dual is replaced by the sensing matrix itself.
    pub oblique: bool,
    /// Defaults to `3 (s + 1)`.
    pub max_iterations: Option<usize>,
    /// Stop when the residual norm changes by less than `tolerance ‖y‖`.
    pub tolerance: f64,
    pub singularity_floor: f64,
    /// Keep every iterate `x_t` in the result.
    pub record_iterates: bool,
}

impl PursuitConfig {
    pub fn new(algorithm: Algorithm, sparsity: usize) -> Self {
        Self {
            algorithm,
            sparsity,
            oblique: true,
            max_iterations: None,
            tolerance: DEFAULT_TOLERANCE,
            singularity_floor: DEFAULT_SINGULARITY_FLOOR,
            record_iterates: false,
        }
    }

    pub fn conventional(mut self) -> Self {
        self.oblique = false;
        self
    }

    pub fn with_max_iterations(mut self, t: usize) -> Self {
        self.max_iterations = Some(t);
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn iteration_limit(&self) -> usize {
        self.max_iterations
            .unwrap_or(DEFAULT_ITERATION_MULTIPLIER * (self.sparsity + 1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::Config("sparsity must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("max iterations must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config("tolerance must be nonnegative".into()));
        }
        if !(self.singularity_floor >= 0.0) {
            return Err(Error::Config(
                "singularity floor must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxIter,
    ResidualStall,
    ExactFit,
    RankFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub algorithm: Algorithm,
    pub oblique: bool,
    pub estimate: SparseSignal,
    pub iterations: usize,
    /// `‖y - Ψ x_t‖` for `t = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// Support of `x_t` for `t = 0..=iterations`.
    pub support_history: Vec<SupportSet>,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterates: Option<Vec<SparseSignal>>,
}

impl RecoveryResult {
    /// Selected support `Ĵ`.
    pub fn support(&self) -> &SupportSet {
        self.estimate.support()
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history starts with ‖y‖")
    }
}

/// Shared state for one run.
struct Problem<'a> {
    psi: &'a DenseMatrix,
    dual: &'a DenseMatrix,
    y: &'a CVector,
    y_norm: f64,
    config: &'a PursuitConfig,
    residuals: Vec<f64>,
    supports: Vec<SupportSet>,
    iterates: Option<Vec<SparseSignal>>,
}

impl<'a> Problem<'a> {
    fn new(
        psi: &'a DenseMatrix,
        dual: &'a DenseMatrix,
        y: &'a CVector,
        config: &'a PursuitConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_pair(psi, dual)?;
        if y.len() != psi.rows() {
            return Err(Error::ShapeMismatch(format!(
                "measurement length {} against {} rows",
                y.len(),
                psi.rows()
            )));
        }
        let n = psi.cols();
        if config.sparsity > n {
            return Err(Error::InvalidSparsity {
                s: config.sparsity,
                n,
            });
        }
        let zero = SparseSignal::zeros(n);
        Ok(Self {
            psi,
            dual,
            y,
            y_norm: y.norm(),
            config,
            residuals: vec![y.norm()],
            supports: vec![SupportSet::empty()],
            iterates: config.record_iterates.then(|| vec![zero]),
        })
    }

    fn n(&self) -> usize {
        self.psi.cols()
    }

    fn s(&self) -> usize {
        self.config.sparsity
    }

    fn residual(&self, x: &SparseSignal) -> CVector {
        let mut r = self.y.clone();
        let m = self.psi.as_matrix();
        for (k, v) in x.support().iter().zip(x.values()) {
            r.axpy(-*v, &m.column(k), C64::new(1.0, 0.0));
        }
        r
    }

    /// `Ψ̃^*(y - Ψ x)`.
    fn proxy(&self, x: &SparseSignal) -> CVector {
        self.dual
            .adjoint_mul_vec(&self.residual(x))
            .expect("shapes checked at construction")
    }

    fn least_squares(&self, support: &SupportSet) -> Result<SparseSignal> {
        weighted_ls_solve(
            self.psi,
            self.dual,
            self.y,
            support,
            self.config.singularity_floor,
        )
    }

    fn push(&mut self, x: &SparseSignal) -> f64 {
        let r = self.residual(x).norm();
        self.residuals.push(r);
        self.supports.push(x.support().clone());
        if let Some(it) = self.iterates.as_mut() {
            it.push(x.clone());
        }
        r
    }

    fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("nonempty")
    }

    fn exact_fit(&self, r: f64) -> bool {
        r <= EXACT_FIT_TOLERANCE * self.y_norm
    }

    fn finish(self, estimate: SparseSignal, termination: Termination) -> RecoveryResult {
        RecoveryResult {
            algorithm: self.config.algorithm,
            oblique: self.config.oblique,
            estimate,
            iterations: self.residuals.len() - 1,
            residual_history: self.residuals,
            support_history: self.supports,
            termination,
            iterates: self.iterates,
        }
    }

    /// Runs `step` from `x_0 = 0` under the shared stopping rule.
    fn iterate<F>(mut self, mut step: F) -> RecoveryResult
    where
        F: FnMut(&Self, &SparseSignal) -> Result<SparseSignal>,
    {
        let mut x = SparseSignal::zeros(self.n());
        if self.y_norm == 0.0 {
            return self.finish(x, Termination::ExactFit);
        }
        let mut previous = self.y_norm;
        for _ in 0..self.config.iteration_limit() {
            let next = match step(&self, &x) {
                Ok(next) => next,
                Err(_) => return self.finish(x, Termination::RankFailure),
            };
            let r = self.push(&next);
            x = next;
            if self.exact_fit(r) {
                return self.finish(x, Termination::ExactFit);
            }
            if (r - previous).abs() < self.config.tolerance * self.y_norm {
                return self.finish(x, Termination::ResidualStall);
            }
            previous = r;
        }
        self.finish(x, Termination::MaxIter)
    }
}

fn support_of_largest(v: &CVector, k: usize) -> SupportSet {
    hard_threshold(v, k.min(v.len()))
        .expect("1 <= k <= len")
        .support()
        .clone()
}

/// Oblique thresholding: `Ĵ` holds the `s` largest entries of `Ψ̃^* y`,
/// followed by an oblique least-squares refit on `Ĵ`.
///
/// When the refit is singular the thresholded proxy itself is returned and
/// the termination reason is [`Termination::RankFailure`].
pub fn oblique_thresholding(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let mut p = Problem::new(psi, psi_dual, y, config)?;
    let proxy = p.proxy(&SparseSignal::zeros(p.n()));
    let thresholded = hard_threshold(&proxy, p.s())?;
    let (x, reason) = match p.least_squares(thresholded.support()) {
        Ok(x) => (x, None),
        Err(Error::RankDeficient { .. }) => (thresholded, Some(Termination::RankFailure)),
        Err(e) => return Err(e),
    };
    let r = p.push(&x);
    let reason = reason.unwrap_or(if p.exact_fit(r) {
        Termination::ExactFit
    } else {
        Termination::MaxIter
    });
    Ok(p.finish(x, reason))
}

/// Oblique matching pursuit: exactly `s` greedy selections, each followed by
/// an oblique least-squares refit. An index is never selected twice.
pub fn oblique_mp(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let mut p = Problem::new(psi, psi_dual, y, config)?;
    if p.s() > psi.rows() {
        return Err(Error::InvalidSparsity {
            s: p.s(),
            n: psi.rows(),
        });
    }
    let mut x = SparseSignal::zeros(p.n());
    let mut support = SupportSet::empty();
    while support.len() < p.s() {
        let proxy = p.proxy(&x);
        let pick = (0..p.n())
            .filter(|k| !support.contains(*k))
            .fold(None::<(usize, f64)>, |best, k| {
                let v = proxy[k].norm_sqr();
                match best {
                    Some((_, b)) if b >= v => best,
                    _ => Some((k, v)),
                }
            })
            .expect("s <= n leaves a candidate")
            .0;
        let mut candidate = support.clone();
        candidate.insert(pick);
        match p.least_squares(&candidate) {
            Ok(next) => {
                support = candidate;
                x = next;
                p.push(&x);
            }
            Err(Error::RankDeficient { .. }) => return Ok(p.finish(x, Termination::RankFailure)),
            Err(e) => return Err(e),
        }
    }
    let reason = if p.exact_fit(p.final_residual()) {
        Termination::ExactFit
    } else {
        Termination::MaxIter
    };
    Ok(p.finish(x, reason))
}

/// Oblique CoSaMP: merge the `2s` largest proxy entries with the current
/// support, refit, keep the `s` largest coefficients.
pub fn oblique_cosamp(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let p = Problem::new(psi, psi_dual, y, config)?;
    if 4 * p.s() > psi.rows() {
        log::warn!(
            "cosamp with s = {} on {} measurements: the merged support can exceed the row count",
            p.s(),
            psi.rows()
        );
    }
    Ok(p.iterate(|p, x| {
        let merged = x
            .support()
            .union(&support_of_largest(&p.proxy(x), 2 * p.s()));
        let refit = p.least_squares(&merged)?;
        hard_threshold(&refit.to_dense(), p.s())
    }))
}

/// Oblique subspace pursuit: augment by the `s` largest proxy entries, refit,
/// prune to `s`, refit again.
pub fn oblique_sp(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let p = Problem::new(psi, psi_dual, y, config)?;
    if 3 * p.s() > psi.rows() {
        log::warn!(
            "sp with s = {} on {} measurements: the augmented support can exceed the row count",
            p.s(),
            psi.rows()
        );
    }
    Ok(p.iterate(|p, x| {
        let merged = x.support().union(&support_of_largest(&p.proxy(x), p.s()));
        let refit = p.least_squares(&merged)?;
        let pruned = support_of_largest(&refit.to_dense(), p.s());
        p.least_squares(&pruned)
    }))
}

/// Oblique IHT with unit step: `x_{t+1} = H_s(x_t + Ψ̃^*(y - Ψ x_t))`.
pub fn oblique_iht(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let p = Problem::new(psi, psi_dual, y, config)?;
    Ok(p.iterate(|p, x| hard_threshold(&(x.to_dense() + p.proxy(x)), p.s())))
}

/// Oblique HTP: support from the IHT update, coefficients from an oblique
/// least-squares refit on it.
pub fn oblique_htp(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let p = Problem::new(psi, psi_dual, y, config)?;
    Ok(p.iterate(|p, x| {
        let support = support_of_largest(&(x.to_dense() + p.proxy(x)), p.s());
        p.least_squares(&support)
    }))
}

/// Dispatches on `config.algorithm`. With `config.oblique == false` the dual
/// is ignored and `Ψ` is used on both sides.
pub fn run_pursuit(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    let dual = if config.oblique { psi_dual } else { psi };
    match config.algorithm {
        Algorithm::Thres => oblique_thresholding(psi, dual, y, config),
        Algorithm::Mp => oblique_mp(psi, dual, y, config),
        Algorithm::Cosamp => oblique_cosamp(psi, dual, y, config),
        Algorithm::Sp => oblique_sp(psi, dual, y, config),
        Algorithm::Iht => oblique_iht(psi, dual, y, config),
        Algorithm::Htp => oblique_htp(psi, dual, y, config),
    }
}

/// [`run_pursuit`] on `(A, Ã)` of a sensing pair, i.e. with the identity
/// dictionary.
pub fn run_on_sensing_pair(
    pair: &SensingPair,
    y: &CVector,
    config: &PursuitConfig,
) -> Result<RecoveryResult> {
    run_pursuit(&pair.a, &pair.a_dual, y, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_vector;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let scale = 1.0 / (rows as f64).sqrt();
        let m = DMatrix::from_fn(rows, cols, |_, _| {
            scale * rng.sample::<f64, _>(StandardNormal)
        });
        DenseMatrix::from_real(&m).unwrap()
    }

    fn sparse(n: usize, entries: &[(usize, f64)]) -> SparseSignal {
        let mut x = vec![0.0; n];
        for &(k, v) in entries {
            x[k] = v;
        }
        let v = real_vector(&x);
        let support = SupportSet::from_unsorted(entries.iter().map(|e| e.0), n).unwrap();
        SparseSignal::restrict(&v, &support).unwrap()
    }

    #[test]
    fn parse_tags() {
        assert_eq!("ObSP".parse::<Algorithm>().unwrap(), Algorithm::Sp);
        assert_eq!("iht".parse::<Algorithm>().unwrap(), Algorithm::Iht);
        assert!("omp2".parse::<Algorithm>().unwrap_err().is_config());
    }

    #[test]
    fn thresholding_on_identity() {
        let i = DenseMatrix::identity(4).unwrap();
        let y = real_vector(&[0.0, 3.0, 0.0, -1.0]);
        let r = oblique_thresholding(&i, &i, &y, &PursuitConfig::new(Algorithm::Thres, 1)).unwrap();
        assert_eq!(r.support().as_slice(), &[1]);
        assert_eq!(r.estimate.get(1).re, 3.0);
        assert_eq!(r.residual_history.len(), r.iterations + 1);
    }

    #[test]
    fn all_algorithms_recover_on_gaussian() {
        let psi = gaussian(40, 80, 1);
        let x = sparse(80, &[(3, 1.0), (17, -2.0), (50, 1.5), (71, 0.8)]);
        let y = psi.mul_vec(&x.to_dense()).unwrap();
        for alg in [
            Algorithm::Mp,
            Algorithm::Cosamp,
            Algorithm::Sp,
            Algorithm::Htp,
        ] {
            let r = run_pursuit(&psi, &psi, &y, &PursuitConfig::new(alg, 4)).unwrap();
            assert_eq!(r.support(), x.support(), "{alg}");
            assert!(r.estimate.distance(&x) < 1e-9, "{alg}");
            assert_eq!(r.residual_history.len(), r.iterations + 1);
            assert_eq!(r.support_history.len(), r.iterations + 1);
        }
    }

    #[test]
    fn mp_never_repeats() {
        let psi = gaussian(20, 30, 2);
        let y = psi
            .mul_vec(&sparse(30, &[(1, 1.0), (2, 1.0), (9, -1.0)]).to_dense())
            .unwrap();
        let r = oblique_mp(&psi, &psi, &y, &PursuitConfig::new(Algorithm::Mp, 6)).unwrap();
        assert_eq!(r.iterations, 6);
        for (t, s) in r.support_history.iter().enumerate() {
            assert_eq!(s.len(), t);
        }
    }

    #[test]
    fn iht_with_exact_inverse_dual_converges_in_one_step() {
        let psi = gaussian(6, 6, 3);
        let inv = psi.as_matrix().clone().try_inverse().unwrap();
        let dual = DenseMatrix::new(inv.adjoint()).unwrap();
        let x = sparse(6, &[(0, 1.0), (4, -3.0)]);
        let y = psi.mul_vec(&x.to_dense()).unwrap();
        let r = oblique_iht(&psi, &dual, &y, &PursuitConfig::new(Algorithm::Iht, 2)).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.termination, Termination::ExactFit);
        assert!(r.estimate.distance(&x) < 1e-12);
    }

    #[test]
    fn zero_measurement_is_exact_fit() {
        let psi = gaussian(5, 8, 4);
        let y = CVector::zeros(5);
        for alg in Algorithm::ALL {
            let r = run_pursuit(&psi, &psi, &y, &PursuitConfig::new(alg, 2)).unwrap();
            assert_eq!(r.estimate.nonzero_count(), 0, "{alg}");
        }
    }

    #[test]
    fn rank_failure_is_reported() {
        // two identical columns make every support containing both singular
        let mut m = DMatrix::<f64>::identity(3, 4);
        m[(0, 3)] = 1.0;
        let psi = DenseMatrix::from_real(&m).unwrap();
        let y = real_vector(&[1.0, 0.0, 0.0]);
        let r =
            oblique_thresholding(&psi, &psi, &y, &PursuitConfig::new(Algorithm::Thres, 2)).unwrap();
        assert_eq!(r.termination, Termination::RankFailure);
        assert_eq!(r.support().as_slice(), &[0, 3]);
    }

    #[test]
    fn config_errors() {
        let psi = gaussian(5, 8, 5);
        let y = CVector::zeros(5);
        let bad = PursuitConfig::new(Algorithm::Sp, 0);
        assert!(run_pursuit(&psi, &psi, &y, &bad).unwrap_err().is_config());
        let too_many = PursuitConfig::new(Algorithm::Sp, 9);
        assert!(run_pursuit(&psi, &psi, &y, &too_many)
            .unwrap_err()
            .is_config());
    }
}
