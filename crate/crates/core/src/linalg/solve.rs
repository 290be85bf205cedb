use nalgebra::{Dyn, FullPivLU};

use super::matrix::{CMatrix, CVector, DenseMatrix, C64};
use super::support::{SparseSignal, SupportSet};
use crate::error::{Error, Result};

/// Relative singularity floor used when no explicit value is given.
pub const DEFAULT_SINGULARITY_FLOOR: f64 = 1e-12;

/// LU factorisation of a square restricted cross-Gram block with a cheap
/// condition estimate taken from the pivots.
pub(crate) struct RestrictedLu {
    lu: FullPivLU<C64, Dyn, Dyn>,
}

impl RestrictedLu {
    pub(crate) fn factor(block: CMatrix, floor: f64) -> Result<Self> {
        let k = block.nrows();
        let lu = block.full_piv_lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..k {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if k > 0 && (hi == 0.0 || !(lo > floor * hi)) {
            let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            return Err(Error::RankDeficient { condition });
        }
        Ok(Self { lu })
    }

    pub(crate) fn solve(&self, rhs: &CVector) -> CVector {
        if rhs.is_empty() {
            return rhs.clone();
        }
        self.lu
            .solve(rhs)
            .expect("factorisation was checked to be nonsingular")
    }
}

/// Oblique least squares on a support.
///
/// Returns the signal supported on `J` whose residual `y - Ψ x` is
/// orthogonal to the columns of the dual matrix on `J`, i.e. the solution of
/// `Ψ̃_J^* Ψ_J x_J = Ψ̃_J^* y`. With `Ψ̃ = Ψ` this is ordinary least squares.
pub fn weighted_ls_solve(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    y: &CVector,
    support: &SupportSet,
    floor: f64,
) -> Result<SparseSignal> {
    check_pair(psi, psi_dual)?;
    if y.len() != psi.rows() {
        return Err(Error::ShapeMismatch(format!(
            "measurement length {} against {} rows",
            y.len(),
            psi.rows()
        )));
    }
    let n = psi.cols();
    if let Some(&last) = support.as_slice().last() {
        if last >= n {
            return Err(Error::IndexOutOfBounds {
                index: last,
                len: n,
            });
        }
    }
    if support.len() > psi.rows() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let idx = support.as_slice();
    let pj = psi.select_columns(idx);
    let dj = psi_dual.select_columns(idx);
    let block = dj.adjoint() * &pj;
    let b = dj.ad_mul(y);
    let z = RestrictedLu::factor(block, floor)?.solve(&b);
    SparseSignal::new(n, support.clone(), z.iter().copied().collect())
}

pub(crate) fn check_pair(psi: &DenseMatrix, psi_dual: &DenseMatrix) -> Result<()> {
    if psi.rows() != psi_dual.rows() || psi.cols() != psi_dual.cols() {
        return Err(Error::ShapeMismatch(format!(
            "sensing matrix is {}x{} but its dual is {}x{}",
            psi.rows(),
            psi.cols(),
            psi_dual.rows(),
            psi_dual.cols()
        )));
    }
    Ok(())
}

/// Oblique projection `E = I - Ψ_J (Ψ̃_J^* Ψ_J)^{-1} Ψ̃_J^*`.
///
/// `E` annihilates the range of `Ψ_J` and its range is the orthogonal
/// complement of the range of `Ψ̃_J`.
pub struct ObliqueProjector {
    basis: CMatrix,
    dual: CMatrix,
    lu: Option<RestrictedLu>,
}

impl ObliqueProjector {
    pub fn new(psi: &DenseMatrix, psi_dual: &DenseMatrix, support: &SupportSet) -> Result<Self> {
        Self::with_floor(psi, psi_dual, support, DEFAULT_SINGULARITY_FLOOR)
    }

    pub fn with_floor(
        psi: &DenseMatrix,
        psi_dual: &DenseMatrix,
        support: &SupportSet,
        floor: f64,
    ) -> Result<Self> {
        check_pair(psi, psi_dual)?;
        if let Some(&last) = support.as_slice().last() {
            if last >= psi.cols() {
                return Err(Error::IndexOutOfBounds {
                    index: last,
                    len: psi.cols(),
                });
            }
        }
        if support.len() > psi.rows() {
            return Err(Error::RankDeficient {
                condition: f64::INFINITY,
            });
        }
        let idx = support.as_slice();
        let basis = psi.select_columns(idx);
        let dual = psi_dual.select_columns(idx);
        let lu = if idx.is_empty() {
            None
        } else {
            Some(RestrictedLu::factor(dual.adjoint() * &basis, floor)?)
        };
        Ok(Self { basis, dual, lu })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `(I - E) v = Ψ_J (Ψ̃_J^* Ψ_J)^{-1} Ψ̃_J^* v`.
    pub fn apply_complement(&self, v: &CVector) -> CVector {
        match &self.lu {
            None => CVector::zeros(v.len()),
            Some(lu) => &self.basis * lu.solve(&self.dual.ad_mul(v)),
        }
    }

    /// `E v`.
    pub fn apply(&self, v: &CVector) -> CVector {
        v - self.apply_complement(v)
    }

    /// Applies `E` to every column of `m`.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = m.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let v = m.column(j).into_owned();
            col.copy_from(&self.apply(&v));
        }
        out
    }

    /// Explicit `m x m` matrix of `E`.
    pub fn matrix(&self) -> CMatrix {
        self.apply_matrix(&CMatrix::identity(self.dim(), self.dim()))
    }
}
