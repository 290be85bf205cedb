use serde::{Deserialize, Serialize};

use super::constants::table_threshold;
use super::enumerate::{restricted_biorthogonality_constant, EnumerationMode, RestrictedConstant};
use crate::error::{Error, Result};
use crate::linalg::{check_pair, spectral_norm, DenseMatrix, SparseSignal, SupportSet};
use crate::pursuits::Algorithm;

/// Cross Babel function value and the column/subset attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossBabel {
    pub s: usize,
    /// `μ̃₁(s) = max_k max_{|J|=s, k∉J} Σ_{j∈J} |ψ̃_j^* ψ_k|`.
    pub mu1: f64,
    /// `μ̃₁(s) / min_j |ψ̃_j^* ψ_j|`.
    pub ratio: f64,
    pub min_diagonal: f64,
    pub column: usize,
    pub subset: SupportSet,
}

/// Cross Babel function of a matrix pair.
///
/// For each column `k` the inner maximum is attained by the `s` largest
/// off-diagonal magnitudes `|ψ̃_j^* ψ_k|`, `j ≠ k` (ties to the lowest index).
pub fn cross_babel(psi: &DenseMatrix, psi_dual: &DenseMatrix, s: usize) -> Result<CrossBabel> {
    check_pair(psi, psi_dual)?;
    let n = psi.cols();
    if s == 0 || s >= n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let gram = psi_dual.adjoint_mul(psi)?;
    let min_diagonal = (0..n)
        .map(|j| gram[(j, j)].norm())
        .fold(f64::INFINITY, f64::min);
    if !(min_diagonal > 0.0) {
        return Err(Error::DegeneratePair(
            "some column has zero inner product with its dual column".into(),
        ));
    }
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for k in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        others.sort_by(|&a, &b| gram[(b, k)].norm().total_cmp(&gram[(a, k)].norm()));
        let mut chosen = others[..s].to_vec();
        let total: f64 = chosen.iter().map(|&j| gram[(j, k)].norm()).sum();
        chosen.sort_unstable();
        if best.as_ref().is_none_or(|(v, _, _)| total > *v) {
            best = Some((total, k, chosen));
        }
    }
    let (mu1, column, subset) = best.expect("n > s >= 1");
    Ok(CrossBabel {
        s,
        mu1,
        ratio: mu1 / min_diagonal,
        min_diagonal,
        column,
        subset: SupportSet::new(subset, n)?,
    })
}

/// `min_{∅≠J⊆supp x} ‖Π_J x‖_∞ / ‖Π_J x‖₂`.
///
/// For a fixed largest entry `a_i` of `J`, adding every smaller entry only
/// lowers the ratio, so with magnitudes sorted `a_1 ≥ ... ≥ a_s` the minimum
/// is `min_i a_i / sqrt(a_i² + ... + a_s²)`.
pub fn dynamic_range(x: &SparseSignal) -> Result<f64> {
    let mut mags: Vec<f64> = x
        .values()
        .iter()
        .map(|v| v.norm())
        .filter(|m| *m > 0.0)
        .collect();
    if mags.is_empty() {
        return Err(Error::InvalidSparsity { s: 0, n: x.len() });
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut tail = 0.0;
    let mut best = f64::INFINITY;
    for a in mags.iter().rev() {
        tail += a * a;
        best = best.min(a / tail.sqrt());
    }
    Ok(best)
}

/// One sufficient condition `lhs > rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `lhs - rhs`; positive when satisfied.
    pub slack: f64,
}

impl ConditionCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            satisfied: lhs > rhs,
            slack: lhs - rhs,
        }
    }
}

/// Linear-convergence requirement `θ_{ks} < c` for one iterative algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Sparsity order actually enumerated, `min(k s, n)`.
    pub order: usize,
    pub threshold: f64,
    pub theta: Option<f64>,
    pub satisfied: Option<bool>,
    /// Why `theta` is missing, when it is.
    pub note: Option<String>,
}

/// Exact evaluation of the support-recovery conditions for a given signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientConditions {
    pub s: usize,
    pub theta_s_plus_1: RestrictedConstant,
    pub max_dual_column_norm: f64,
    pub psi_support_norm: f64,
    pub dual_support_norm: f64,
    pub dynamic_range: f64,
    pub noise_norm: f64,
    /// `min|x_j| > 2 θ_{s+1} ‖x‖₂ + 2 max‖ψ̃_j‖ ‖z‖₂`.
    pub thres: ConditionCheck,
    /// `min|x_j| (dynamic range - 2 θ_{s+1}) > ‖Ψ_J‖‖Ψ̃_J‖/(1 - θ_{s+1}) · 2 max‖ψ̃_j‖ ‖z‖₂`.
    pub mp: ConditionCheck,
    pub linear_convergence: Vec<TableCheck>,
}

/// Evaluates the thresholding and matching-pursuit recovery conditions and
/// the linear-convergence table for the true signal `x_star`.
pub fn check_sufficient_conditions(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    x_star: &SparseSignal,
    noise_norm: f64,
    mode: EnumerationMode,
) -> Result<SufficientConditions> {
    check_pair(psi, psi_dual)?;
    let n = psi.cols();
    if x_star.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "signal of length {} against {n} columns",
            x_star.len()
        )));
    }
    let support = x_star.nonzero_support();
    let s = support.len();
    if s == 0 {
        return Err(Error::InvalidSparsity { s, n });
    }
    let theta = restricted_biorthogonality_constant(psi, psi_dual, (s + 1).min(n), mode)?;
    let t = theta.value;
    let max_dual_column_norm = psi_dual.max_column_norm();
    let psi_support_norm = spectral_norm(&psi.select_columns(support.as_slice()));
    let dual_support_norm = spectral_norm(&psi_dual.select_columns(support.as_slice()));
    let min_mag = x_star
        .values()
        .iter()
        .map(|v| v.norm())
        .filter(|m| *m > 0.0)
        .fold(f64::INFINITY, f64::min);
    let range = dynamic_range(x_star)?;
    let noise_term = 2.0 * max_dual_column_norm * noise_norm;

    let thres = ConditionCheck::new(min_mag, 2.0 * t * x_star.norm() + noise_term);
    let mp_rhs = if t < 1.0 {
        psi_support_norm * dual_support_norm / (1.0 - t) * noise_term
    } else {
        f64::INFINITY
    };
    let mp = ConditionCheck::new(min_mag * (range - 2.0 * t), mp_rhs);

    let mut linear_convergence = Vec::new();
    for algorithm in [
        Algorithm::Cosamp,
        Algorithm::Sp,
        Algorithm::Iht,
        Algorithm::Htp,
    ] {
        let (k, threshold) = table_threshold(algorithm).expect("iterative algorithm");
        let order = (k * s).min(n);
        let entry = match restricted_biorthogonality_constant(psi, psi_dual, order, mode) {
            Ok(c) => TableCheck {
                algorithm,
                k,
                order,
                threshold,
                theta: Some(c.value),
                satisfied: Some(c.value < threshold),
                note: (!c.exact).then(|| "sampled lower bound".to_string()),
            },
            Err(Error::EnumerationBudget { required, budget }) => TableCheck {
                algorithm,
                k,
                order,
                threshold,
                theta: None,
                satisfied: None,
                note: Some(format!("{required} subsets exceed the budget of {budget}")),
            },
            Err(e) => return Err(e),
        };
        linear_convergence.push(entry);
    }

    Ok(SufficientConditions {
        s,
        theta_s_plus_1: theta,
        max_dual_column_norm,
        psi_support_norm,
        dual_support_norm,
        dynamic_range: range,
        noise_norm,
        thres,
        mp,
        linear_convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_vector, CMatrix, C64};
    use nalgebra::DMatrix;

    fn flat(n: usize, support: &[usize]) -> SparseSignal {
        SparseSignal::new(
            n,
            SupportSet::new(support.to_vec(), n).unwrap(),
            vec![C64::new(1.0, 0.0); support.len()],
        )
        .unwrap()
    }

    #[test]
    fn orthonormal_pair_has_zero_babel() {
        let psi = DenseMatrix::identity(6).unwrap();
        let cb = cross_babel(&psi, &psi, 3).unwrap();
        assert_eq!(cb.mu1, 0.0);
        assert_eq!(cb.ratio, 0.0);
    }

    #[test]
    fn equiangular_babel_is_s_times_c() {
        // Gram matrix with unit diagonal and constant off-diagonal c
        let n = 5;
        let c = 0.2;
        let g = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { c });
        let psi = DenseMatrix::from_real(&g.cholesky().unwrap().l().transpose()).unwrap();
        let cb = cross_babel(&psi, &psi, 3).unwrap();
        assert!((cb.mu1 - 3.0 * c).abs() < 1e-12);
    }

    #[test]
    fn babel_rejects_degenerate_pair() {
        let psi = DenseMatrix::identity(3).unwrap();
        let mut d = CMatrix::identity(3, 3);
        d[(1, 1)] = C64::new(0.0, 0.0);
        d[(0, 1)] = C64::new(1.0, 0.0);
        let dual = DenseMatrix::new(d).unwrap();
        assert!(matches!(
            cross_babel(&psi, &dual, 1),
            Err(Error::DegeneratePair(_))
        ));
    }

    #[test]
    fn dynamic_range_of_flat_signal() {
        let x = flat(8, &[1, 3, 4, 6]);
        assert!((dynamic_range(&x).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dynamic_range_matches_subset_enumeration() {
        let vals = [3.0, -0.5, 1.2, 0.7, -2.0];
        let n = vals.len();
        let x = SparseSignal::restrict(&real_vector(&vals), &SupportSet::full(n)).unwrap();
        let mut oracle = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let sel: Vec<f64> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| vals[i])
                .collect();
            let inf = sel.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let two = sel.iter().map(|v| v * v).sum::<f64>().sqrt();
            oracle = oracle.min(inf / two);
        }
        assert!((dynamic_range(&x).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_noiseless_conditions_hold() {
        let psi = DenseMatrix::identity(6).unwrap();
        for support in [vec![0], vec![1, 4], vec![0, 2, 5]] {
            let x = flat(6, &support);
            let r = check_sufficient_conditions(&psi, &psi, &x, 0.0, EnumerationMode::default())
                .unwrap();
            assert!(r.thres.satisfied && r.mp.satisfied);
            assert!(r
                .linear_convergence
                .iter()
                .all(|t| t.satisfied == Some(true)));
        }
    }

    #[test]
    fn conditions_flag_large_theta() {
        // columns 0..4 orthonormal except a 0.4 coupling between 4 and 5
        let n = 6;
        let mut g = DMatrix::<f64>::identity(n, n);
        g[(4, 5)] = 0.4;
        g[(5, 4)] = 0.4;
        let psi = DenseMatrix::from_real(&g.cholesky().unwrap().l().transpose()).unwrap();
        let x = flat(n, &[0, 1, 2, 3]);
        let r =
            check_sufficient_conditions(&psi, &psi, &x, 0.0, EnumerationMode::default()).unwrap();
        assert!((r.theta_s_plus_1.value - 0.4).abs() < 1e-12);
        assert!((r.dynamic_range - 0.5).abs() < 1e-15);
        assert!(!r.thres.satisfied);
        assert!(!r.mp.satisfied);
    }
}
