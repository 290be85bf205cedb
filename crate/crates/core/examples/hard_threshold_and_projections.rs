//! Hard thresholding, oblique least squares and the oblique projector.
//!
//! cargo run --example hard_threshold_and_projections

use nalgebra::DMatrix;
use obpursuit::linalg::{
    hard_threshold, real_vector, weighted_ls_solve, DenseMatrix, ObliqueProjector, SupportSet,
    DEFAULT_SINGULARITY_FLOOR,
};

fn main() -> obpursuit::Result<()> {
    let x = real_vector(&[0.3, -2.0, 0.1, 1.5, -0.7]);
    let h = hard_threshold(&x, 2)?;
    println!("H_2 keeps {:?}", h.support().as_slice());

    // a 3x4 pair whose columns are not orthogonal to each other
    let psi = DenseMatrix::from_real(&DMatrix::from_row_slice(
        3,
        4,
        &[1.0, 0.4, 0.0, 0.2, 0.0, 1.0, 0.3, 0.0, 0.2, 0.0, 1.0, 1.0],
    ))?;
    let dual = DenseMatrix::from_real(&DMatrix::from_row_slice(
        3,
        4,
        &[1.1, 0.2, 0.0, 0.0, 0.1, 0.9, 0.2, 0.1, 0.0, 0.1, 1.0, 0.8],
    ))?;
    let j = SupportSet::new(vec![0, 2], 4)?;
    let y = real_vector(&[1.0, 0.5, -0.25]);

    let fit = weighted_ls_solve(&psi, &dual, &y, &j, DEFAULT_SINGULARITY_FLOOR)?;
    println!("oblique LS on {:?}: {:?}", j.as_slice(), fit.values());

    let e = ObliqueProjector::new(&psi, &dual, &j)?;
    let ey = e.apply(&y);
    let eey = e.apply(&ey);
    println!("||E y - E E y|| = {:.2e}", (ey - eey).norm());
    println!(
        "||E y + (I - E) y - y|| = {:.2e}",
        (e.apply(&y) + e.apply_complement(&y) - &y).norm()
    );
    Ok(())
}
