//! Dense complex linear algebra, sparse signals and restricted solves.

mod matrix;
mod solve;
mod support;

pub use matrix::{
    deviation_from_identity, real_vector, singular_values, spectral_norm, CMatrix, CVector,
    DenseMatrix, Field, C64,
};
pub use solve::{weighted_ls_solve, ObliqueProjector, DEFAULT_SINGULARITY_FLOOR};
pub use support::{coordinate_project, hard_threshold, SparseSignal, SupportSet};

pub(crate) use solve::check_pair;
