use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_pair, CMatrix, DenseMatrix, SupportSet};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// How the maximum over `s`-subsets is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EnumerationMode {
    /// Every subset, refusing when there are more than `budget` of them.
    Exact { budget: u64 },
    /// The maximum over `samples` uniformly drawn subsets: a lower bound.
    Sampled { samples: u64, seed: u64 },
}

impl Default for EnumerationMode {
    fn default() -> Self {
        EnumerationMode::Exact {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// A restricted constant together with a subset attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedConstant {
    pub s: usize,
    pub value: f64,
    pub subset: SupportSet,
    /// False when the value is a sampled lower bound.
    pub exact: bool,
    pub evaluated: u64,
}

/// `C(n, k)` without overflow for the sizes that matter here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Spectral norm of `G[J, J] - I`.
fn subset_deviation(gram: &Gram, idx: &[usize]) -> f64 {
    match gram {
        Gram::Real(g) => {
            if idx.len() == 1 {
                return (g[(idx[0], idx[0])] - 1.0).abs();
            }
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
                g[(idx[a], idx[b])] - if a == b { 1.0 } else { 0.0 }
            });
            sub.singular_values().max()
        }
        Gram::Complex(g) => {
            if idx.len() == 1 {
                return (g[(idx[0], idx[0])] - 1.0).norm();
            }
            let sub = CMatrix::from_fn(idx.len(), idx.len(), |a, b| {
                g[(idx[a], idx[b])] - if a == b { 1.0 } else { 0.0 }
            });
            sub.singular_values().max()
        }
    }
}

enum Gram {
    Real(DMatrix<f64>),
    Complex(CMatrix),
}

impl Gram {
    fn new(g: &CMatrix) -> Self {
        if g.iter().all(|z| z.im == 0.0) {
            Gram::Real(g.map(|z| z.re))
        } else {
            Gram::Complex(g.clone())
        }
    }

    fn n(&self) -> usize {
        match self {
            Gram::Real(g) => g.nrows(),
            Gram::Complex(g) => g.nrows(),
        }
    }
}

#[derive(Clone)]
struct Best {
    value: f64,
    subset: Vec<usize>,
}

impl Best {
    fn better(a: Best, b: Best) -> Best {
        // larger value wins; ties go to the lexicographically smaller subset
        match a.value.total_cmp(&b.value) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if a.subset <= b.subset {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// Advances `c` to the next combination of the same size with entries below
/// `n`, in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - (k - i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn enumerate_exact(gram: &Gram, s: usize) -> Best {
    let n = gram.n();
    (0..=n - s)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (first + 1..first + s).collect();
            let mut idx = Vec::with_capacity(s);
            let mut best: Option<Best> = None;
            loop {
                idx.clear();
                idx.push(first);
                idx.extend_from_slice(&rest);
                let value = subset_deviation(gram, &idx);
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(Best {
                        value,
                        subset: idx.clone(),
                    });
                }
                if rest.is_empty() || !next_combination(&mut rest, n) {
                    break;
                }
            }
            best.expect("at least one subset per leading index")
        })
        .reduce_with(Best::better)
        .expect("nonempty combination space")
}

/// Largest `‖G[J,J] - I‖` over `|J| = s`, for a square `G`.
pub fn max_restricted_deviation(
    gram: &CMatrix,
    s: usize,
    mode: EnumerationMode,
) -> Result<RestrictedConstant> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "restricted constants need a square matrix, got {}x{}",
            n,
            gram.ncols()
        )));
    }
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let g = Gram::new(gram);
    match mode {
        EnumerationMode::Exact { budget } => {
            let required = binomial(n, s);
            if required > budget as u128 {
                return Err(Error::EnumerationBudget { required, budget });
            }
            let best = enumerate_exact(&g, s);
            Ok(RestrictedConstant {
                s,
                value: best.value,
                subset: SupportSet::new(best.subset, n)?,
                exact: true,
                evaluated: required as u64,
            })
        }
        EnumerationMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::Config(
                    "sampled mode needs at least one sample".into(),
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut best: Option<Best> = None;
            for _ in 0..samples {
                let mut idx = sample(&mut rng, n, s).into_vec();
                idx.sort_unstable();
                let cand = Best {
                    value: subset_deviation(&g, &idx),
                    subset: idx,
                };
                best = Some(match best {
                    None => cand,
                    Some(b) => Best::better(b, cand),
                });
            }
            let best = best.expect("samples > 0");
            Ok(RestrictedConstant {
                s,
                value: best.value,
                subset: SupportSet::new(best.subset, n)?,
                exact: false,
                evaluated: samples,
            })
        }
    }
}

/// `δ_s(Ψ) = max_{|J|=s} ‖Ψ_J^*Ψ_J - I‖`.
pub fn restricted_isometry_constant(
    psi: &DenseMatrix,
    s: usize,
    mode: EnumerationMode,
) -> Result<RestrictedConstant> {
    max_restricted_deviation(&psi.adjoint_mul(psi)?, s, mode)
}

/// `θ_s(Ψ̃^*Ψ) = max_{|J|=s} ‖Ψ̃_J^*Ψ_J - I‖`.
///
/// This is the bilinear supremum of `|⟨y, (Ψ̃^*Ψ - I) x⟩|` over unit `x`, `y`
/// sharing an `s`-element support, written as a spectral norm per support.
pub fn restricted_biorthogonality_constant(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    s: usize,
    mode: EnumerationMode,
) -> Result<RestrictedConstant> {
    check_pair(psi, psi_dual)?;
    max_restricted_deviation(&psi_dual.adjoint_mul(psi)?, s, mode)
}

/// `δ_s(Ψ)`, `δ_s(Ψ̃)` and `θ_s(Ψ̃^*Ψ)` for one sparsity level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub s: usize,
    pub delta_psi: RestrictedConstant,
    pub delta_psi_dual: RestrictedConstant,
    pub theta: RestrictedConstant,
    pub enumeration_count: u64,
    /// Only filled in when timing was requested, so reports stay reproducible.
    pub wall_clock_ms: Option<f64>,
}

pub fn constants_report(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    s: usize,
    mode: EnumerationMode,
    timed: bool,
) -> Result<ConstantsReport> {
    check_pair(psi, psi_dual)?;
    let start = Instant::now();
    let delta_psi = restricted_isometry_constant(psi, s, mode)?;
    let delta_psi_dual = restricted_isometry_constant(psi_dual, s, mode)?;
    let theta = restricted_biorthogonality_constant(psi, psi_dual, s, mode)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(ConstantsReport {
        s,
        enumeration_count: delta_psi.evaluated + delta_psi_dual.evaluated + theta.evaluated,
        delta_psi,
        delta_psi_dual,
        theta,
        wall_clock_ms: timed.then_some(elapsed),
    })
}
