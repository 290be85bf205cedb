use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Scalar field the entries of a [`DenseMatrix`] live in.
///
/// Storage is always complex; a `Real` tag records that every imaginary part
/// is exactly zero, which lets a few kernels take a real fast path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::Parse(format!("unknown field tag `{other}`"))),
        }
    }
}

/// Dense complex matrix with at least one row and one column and finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    data: CMatrix,
    field: Field,
}

impl DenseMatrix {
    /// Wraps a complex matrix, detecting whether it is purely real.
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "empty shape {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let field = if data.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        };
        Ok(Self { data, field })
    }

    pub fn from_real(data: &DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|v| C64::new(v, 0.0)))
    }

    /// Builds a matrix from column-major complex entries.
    pub fn from_column_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(CMatrix::from_vec(rows, cols, entries))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(CMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_inner(self) -> CMatrix {
        self.data
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix {
            data: self.data.adjoint(),
            field: self.field,
        }
    }

    /// Columns indexed by `indices`, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> CMatrix {
        self.data.select_columns(indices)
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.data.column(j).norm()
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.column_norm(j))
            .fold(0.0, f64::max)
    }

    /// Real parts as an `f64` matrix; only meaningful when the field is real.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    /// `self * other` for compatible shapes.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        if self.field == Field::Real && other.field == Field::Real {
            let prod = self.real_part() * other.real_part();
            return DenseMatrix::from_real(&prod);
        }
        DenseMatrix::new(&self.data * &other.data)
    }

    /// Cross-Gram matrix `self^* other`. Both operands must have the same row count.
    pub fn adjoint_mul(&self, other: &DenseMatrix) -> Result<CMatrix> {
        if self.rows() != other.rows() {
            return Err(Error::ShapeMismatch(format!(
                "adjoint product of {}x{} with {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        if self.field == Field::Real && other.field == Field::Real {
            let prod = self.real_part().transpose() * other.real_part();
            return Ok(prod.map(|v| C64::new(v, 0.0)));
        }
        Ok(self.data.adjoint() * &other.data)
    }

    pub fn mul_vec(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.cols() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols()
            )));
        }
        Ok(&self.data * x)
    }

    /// `self^* v`.
    pub fn adjoint_mul_vec(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.rows() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows()
            )));
        }
        Ok(self.data.ad_mul(v))
    }

    /// Scales every entry by a real factor.
    pub fn scaled(&self, factor: f64) -> Result<DenseMatrix> {
        DenseMatrix::new(self.data.map(|z| z * factor))
    }
}

impl TryFrom<CMatrix> for DenseMatrix {
    type Error = Error;

    fn try_from(value: CMatrix) -> Result<Self> {
        DenseMatrix::new(value)
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Spectral norm via a dense SVD.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Spectral norm of `m - I` for square `m`.
pub fn deviation_from_identity(m: &CMatrix) -> f64 {
    let n = m.nrows();
    spectral_norm(&(m - CMatrix::identity(n, n)))
}

pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(DenseMatrix::new(CMatrix::zeros(0, 3)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(DenseMatrix::new(m).is_err());
    }

    #[test]
    fn detects_field() {
        let real = DenseMatrix::from_real(&DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(real.field(), Field::Real);
        let mut c = CMatrix::zeros(1, 1);
        c[(0, 0)] = C64::new(0.0, 1.0);
        assert_eq!(DenseMatrix::new(c).unwrap().field(), Field::Complex);
    }

    #[test]
    fn real_fast_path_matches_complex_product() {
        let a = DMatrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * 0.3 - j as f64);
        let b = DMatrix::from_fn(4, 2, |i, j| (i * j) as f64 - 0.5);
        let ar = DenseMatrix::from_real(&a).unwrap();
        let br = DenseMatrix::from_real(&b).unwrap();
        let fast = ar.adjoint_mul(&br).unwrap();
        let slow = ar.as_matrix().adjoint() * br.as_matrix();
        assert!((fast - slow).norm() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = CMatrix::from_diagonal(&real_vector(&[3.0, -5.0, 1.0]));
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-12);
        assert_eq!(singular_values(&d).len(), 3);
    }
}
