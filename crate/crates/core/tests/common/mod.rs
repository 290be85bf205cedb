//! Independent reference implementations and instance generators shared by
//! the integration tests. The pursuits here work on real `f64` matrices with
//! SVD-based least squares and share no code with the library.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub const EXACT_FIT: f64 = 1e-12;
pub const STALL: f64 = 1e-8;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Indices of the `k` largest magnitudes, ascending.
pub fn top_k(v: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// `argmin_{supp x ⊆ J} ‖y - A x‖` via the SVD of `A_J`.
pub fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(support);
    let coef = sub.svd(true, true).solve(y, 1e-14).expect("svd solve");
    let mut x = DVector::zeros(a.ncols());
    for (k, &j) in support.iter().enumerate() {
        x[j] = coef[k];
    }
    x
}

pub fn restrict(x: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for &j in support {
        out[j] = x[j];
    }
    out
}

/// Iterates `x_0 = 0, x_1, ...` of one reference run.
pub struct Reference {
    pub iterates: Vec<DVector<f64>>,
}

fn iterate<F>(a: &DMatrix<f64>, y: &DVector<f64>, s: usize, mut step: F) -> Reference
where
    F: FnMut(&DVector<f64>, &[usize]) -> (DVector<f64>, Vec<usize>),
{
    let n = a.ncols();
    let ny = y.norm();
    let mut iterates = vec![DVector::zeros(n)];
    let mut x = DVector::zeros(n);
    let mut support: Vec<usize> = Vec::new();
    let mut prev = ny;
    for _ in 0..3 * (s + 1) {
        let (next, next_support) = step(&x, &support);
        let r = (y - a * &next).norm();
        iterates.push(next.clone());
        x = next;
        support = next_support;
        if r <= EXACT_FIT * ny || (r - prev).abs() < STALL * ny {
            break;
        }
        prev = r;
    }
    Reference { iterates }
}

pub fn thresholding(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    let j = top_k(&(a.transpose() * y), s);
    Reference {
        iterates: vec![DVector::zeros(a.ncols()), lstsq(a, y, &j)],
    }
}

pub fn omp(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    let mut support: Vec<usize> = Vec::new();
    let mut x = DVector::zeros(a.ncols());
    let mut iterates = vec![x.clone()];
    for _ in 0..s {
        let mut c = a.transpose() * (y - a * &x);
        for &j in &support {
            c[j] = 0.0;
        }
        let pick = c.iamax();
        support = union(&support, &[pick]);
        x = lstsq(a, y, &support);
        iterates.push(x.clone());
    }
    Reference { iterates }
}

pub fn cosamp(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    iterate(a, y, s, |x, supp| {
        let t = union(supp, &top_k(&(a.transpose() * (y - a * x)), 2 * s));
        let b = lstsq(a, y, &t);
        let keep = top_k(&b, s);
        (restrict(&b, &keep), keep)
    })
}

pub fn subspace_pursuit(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    iterate(a, y, s, |x, supp| {
        let t = union(supp, &top_k(&(a.transpose() * (y - a * x)), s));
        let keep = top_k(&lstsq(a, y, &t), s);
        (lstsq(a, y, &keep), keep)
    })
}

pub fn iht(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    iterate(a, y, s, |x, _| {
        let g = x + a.transpose() * (y - a * x);
        let keep = top_k(&g, s);
        (restrict(&g, &keep), keep)
    })
}

pub fn htp(a: &DMatrix<f64>, y: &DVector<f64>, s: usize) -> Reference {
    iterate(a, y, s, |x, _| {
        let keep = top_k(&(x + a.transpose() * (y - a * x)), s);
        (lstsq(a, y, &keep), keep)
    })
}

/// Random `s`-sparse vector with entries of magnitude in `[1, 2)` and random sign.
pub fn sparse_signal(rng: &mut ChaCha20Rng, n: usize, s: usize) -> (Vec<usize>, DVector<f64>) {
    let mut support = rand::seq::index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    let mut x = DVector::zeros(n);
    for &j in &support {
        let mag = 1.0 + rng.random::<f64>();
        x[j] = if rng.random::<bool>() { mag } else { -mag };
    }
    (support, x)
}
