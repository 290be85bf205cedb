//! Randomized numerical checks of the matrix facts behind the recovery
//! guarantees.
//!
//! Several of the facts, as usually stated, do not hold for every matrix.
//! Each such fact is checked in its literal form, which is expected to
//! report violations, and in a corrected form that does hold.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::enumerate::{restricted_biorthogonality_constant, EnumerationMode};
use crate::error::{Error, Result};
use crate::linalg::{
    check_pair, singular_values, spectral_norm, CMatrix, CVector, DenseMatrix, ObliqueProjector,
    SupportSet, C64,
};

/// Whether a check follows the claim as stated or a repaired version of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimForm {
    Literal,
    Corrected,
}

/// Outcome of one randomized check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lemma: String,
    pub claim: String,
    pub form: ClaimForm,
    pub trials: usize,
    /// Trials whose random instance did not meet the hypotheses.
    pub skipped: usize,
    pub violations: usize,
    /// Largest amount by which the claimed relation failed, before tolerance.
    /// Negative when every trial held with room to spare.
    pub worst_excess: f64,
    pub tolerance: f64,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Parameters of the randomized suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuite {
    pub config: LemmaSuiteConfig,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuite {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(LemmaCheck::passed)
    }

    pub fn check(&self, lemma: &str, form: ClaimForm) -> Option<&LemmaCheck> {
        self.checks
            .iter()
            .find(|c| c.lemma == lemma && c.form == form)
    }

    /// Plain-text table, one row per check.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:<9} {:>6} {:>7} {:>10} {:>12} {:>9}  {}\n",
            "lemma", "form", "trials", "skipped", "violations", "worst", "tol", "claim"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<12} {:<9} {:>6} {:>7} {:>10} {:>12.3e} {:>9.1e}  {} [{}]\n",
                c.lemma,
                match c.form {
                    ClaimForm::Literal => "literal",
                    ClaimForm::Corrected => "corrected",
                },
                c.trials,
                c.skipped,
                c.violations,
                c.worst_excess,
                c.tolerance,
                c.claim,
                if c.passed() { "PASS" } else { "FAIL" },
            ));
        }
        out
    }
}

struct Tally {
    trials: usize,
    skipped: usize,
    violations: usize,
    worst: f64,
    tolerance: f64,
}

impl Tally {
    fn new(tolerance: f64) -> Self {
        Self {
            trials: 0,
            skipped: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
        }
    }

    /// Records `excess`, the amount by which the claim fails (≤ 0 when it holds).
    fn record(&mut self, excess: f64) {
        self.trials += 1;
        self.worst = self.worst.max(excess);
        if !(excess <= self.tolerance) {
            self.violations += 1;
        }
    }

    fn skip(&mut self) {
        self.trials += 1;
        self.skipped += 1;
    }

    fn finish(self, lemma: &str, form: ClaimForm, claim: &str) -> LemmaCheck {
        LemmaCheck {
            lemma: lemma.into(),
            claim: claim.into(),
            form,
            trials: self.trials,
            skipped: self.skipped,
            violations: self.violations,
            worst_excess: if self.worst.is_finite() {
                self.worst
            } else {
                0.0
            },
            tolerance: self.tolerance,
        }
    }
}

fn gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * (scale / std::f64::consts::SQRT_2)
    })
}

#[cfg(test)]
fn real_gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let v: f64 = rng.sample(StandardNormal);
        C64::new(v * scale, 0.0)
    })
}

fn random_subset(rng: &mut ChaCha20Rng, n: usize, k: usize) -> SupportSet {
    SupportSet::from_unsorted(sample(rng, n, k).into_vec(), n).expect("indices below n")
}

fn dense(m: CMatrix) -> DenseMatrix {
    DenseMatrix::new(m).expect("finite random matrix")
}

/// A pair whose dual is a perturbation of the primal, so that the restricted
/// cross-Gram blocks are generically well conditioned.
fn perturbed_pair(
    rng: &mut ChaCha20Rng,
    m: usize,
    n: usize,
    noise: f64,
) -> (DenseMatrix, DenseMatrix) {
    let scale = 1.0 / (m as f64).sqrt();
    let psi = gaussian(rng, m, n, scale);
    let dual = &psi + gaussian(rng, m, n, noise * scale);
    (dense(psi), dense(dual))
}

fn hermitian_pd(rng: &mut ChaCha20Rng, n: usize) -> CMatrix {
    let b = gaussian(rng, n, n, 1.0);
    b.adjoint() * &b + CMatrix::identity(n, n) * C64::new(1e-3, 0.0)
}

/// Schur complement of the trailing `q x q` block.
fn schur_complement(m: &CMatrix, q: usize) -> Option<CMatrix> {
    let n = m.nrows();
    let k = n - q;
    let m11 = m.view((0, 0), (k, k));
    let m12 = m.view((0, k), (k, q));
    let m21 = m.view((k, 0), (q, k));
    let m22 = m.view((k, k), (q, q)).into_owned();
    let x = m22.full_piv_lu().solve(&m21.into_owned())?;
    Some(m11 - m12 * x)
}

fn random_unit(rng: &mut ChaCha20Rng, n: usize) -> CVector {
    let v = gaussian(rng, n, 1, 1.0).column(0).into_owned();
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

fn pick_size(rng: &mut ChaCha20Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn check_idempotence(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut idem = Tally::new(0.0);
    for _ in 0..trials {
        let m = pick_size(rng, 3, 8);
        let n = pick_size(rng, m, 2 * m);
        let (psi, dual) = perturbed_pair(rng, m, n, 0.5);
        let size = pick_size(rng, 1, m - 1);
        let j = random_subset(rng, n, size);
        match ObliqueProjector::new(&psi, &dual, &j) {
            Ok(p) => {
                let e = p.matrix();
                let scale = spectral_norm(&e).max(1.0);
                idem.record(spectral_norm(&(&e * &e - &e)) - 1e-10 * scale);
            }
            Err(_) => idem.skip(),
        }
    }
    idem.finish(
        "idempotence",
        ClaimForm::Literal,
        "||E^2 - E|| <= 1e-10 max(1, ||E||)",
    )
}

fn check_ipsen(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut tally = Tally::new(0.0);
    for _ in 0..trials {
        let m = pick_size(rng, 3, 8);
        let n = pick_size(rng, m, 2 * m);
        let (psi, dual) = perturbed_pair(rng, m, n, 0.5);
        let size = pick_size(rng, 1, m - 1);
        let j = random_subset(rng, n, size);
        match ObliqueProjector::new(&psi, &dual, &j) {
            Ok(p) => {
                let e = p.matrix();
                let ne = spectral_norm(&e);
                let nc = spectral_norm(&(CMatrix::identity(m, m) - &e));
                tally.record((ne - nc).abs() - 1e-8 * ne);
            }
            Err(_) => tally.skip(),
        }
    }
    tally.finish(
        "ipsen",
        ClaimForm::Literal,
        "||E|| = ||I - E|| for idempotent E not 0 or I",
    )
}

fn check_compl(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut tally = Tally::new(0.0);
    for _ in 0..trials {
        let m = pick_size(rng, 3, 8);
        let k = pick_size(rng, 1, m - 1);
        let mm = gaussian(rng, m, k, 1.0);
        let mt = &mm + gaussian(rng, m, k, 0.5);
        let cross = singular_values(&(mt.adjoint() * &mm));
        if cross[k - 1] <= 1e-8 * cross[0] {
            tally.skip();
            continue;
        }
        // QR of [M̃, I]: the trailing m - k columns of Q span range(M̃)^⊥
        let mut padded = CMatrix::zeros(m, k + m);
        padded.columns_mut(0, k).copy_from(&mt);
        padded.columns_mut(k, m).copy_from(&CMatrix::identity(m, m));
        let q = padded.qr().q();
        let perp = q.columns(k, m - k).into_owned();
        let mut joined = CMatrix::zeros(m, m);
        joined.columns_mut(0, k).copy_from(&mm);
        joined.columns_mut(k, m - k).copy_from(&perp);
        let sv = singular_values(&joined);
        // intersection is trivial iff [M, basis of range(M̃)^⊥] is nonsingular
        tally.record(1e-10 * sv[0] - sv[m - 1]);
    }
    tally.finish(
        "compl",
        ClaimForm::Literal,
        "range(M) and range(M~)^perp intersect trivially when M~*M has full rank",
    )
}

fn pertub_gap(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let sv = singular_values(m);
    let rhs = f64::max(1.0 - sv[n - 1], sv[0] - 1.0);
    spectral_norm(&(m - CMatrix::identity(n, n))) - rhs
}

fn check_pertub_literal(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut tally = Tally::new(1e-10);
    for _ in 0..trials {
        let n = pick_size(rng, 2, 6);
        let m = gaussian(rng, n, n, 1.0);
        tally.record(pertub_gap(&m).abs());
    }
    tally.finish(
        "pertub",
        ClaimForm::Literal,
        "||M - I|| = max(1 - s_min(M), s_max(M) - 1) for square M",
    )
}

fn check_pertub_corrected(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut tally = Tally::new(1e-10);
    for t in 0..trials {
        let n = pick_size(rng, 2, 6);
        let excess = if t % 2 == 0 {
            // general M: only the lower bound survives
            -pertub_gap(&gaussian(rng, n, n, 1.0))
        } else {
            let h = hermitian_pd(rng, n);
            let scale = spectral_norm(&h);
            pertub_gap(&(h / C64::new(scale / 2.0, 0.0))).abs()
        };
        tally.record(excess);
    }
    tally.finish(
        "pertub",
        ClaimForm::Corrected,
        "||M - I|| >= max(1 - s_min, s_max - 1), with equality for Hermitian PSD M",
    )
}

fn schur_instance(rng: &mut ChaCha20Rng, hermitian: bool) -> Option<(Vec<f64>, Vec<f64>, usize)> {
    let n = pick_size(rng, 3, 7);
    let q = pick_size(rng, 1, n - 1);
    let m = if hermitian {
        hermitian_pd(rng, n)
    } else {
        gaussian(rng, n, n, 1.0)
    };
    let sv = singular_values(&m);
    if sv[n - 1] <= 1e-10 * sv[0] {
        return None;
    }
    let s = schur_complement(&m, q)?;
    Some((sv, singular_values(&s), q))
}

fn check_sinh(rng: &mut ChaCha20Rng, trials: usize) -> [LemmaCheck; 3] {
    let mut first = Tally::new(1e-9);
    let mut interlace = Tally::new(1e-9);
    let mut hermitian = Tally::new(1e-9);
    for _ in 0..trials {
        match schur_instance(rng, false) {
            Some((sm, ss, q)) => {
                first.record(ss[0] - sm[0]);
                let worst = (0..ss.len())
                    .map(|j| sm[j + q] - ss[j])
                    .fold(f64::NEG_INFINITY, f64::max);
                interlace.record(worst);
            }
            None => {
                first.skip();
                interlace.skip();
            }
        }
        match schur_instance(rng, true) {
            Some((sm, ss, _)) => {
                let worst = (0..ss.len())
                    .map(|j| ss[j] - sm[j])
                    .fold(f64::NEG_INFINITY, f64::max);
                hermitian.record(worst);
            }
            None => hermitian.skip(),
        }
    }
    [
        first.finish(
            "sinh",
            ClaimForm::Literal,
            "s_1(M) >= s_1(M/M22) for nonsingular M",
        ),
        interlace.finish(
            "sinh-interlace",
            ClaimForm::Literal,
            "s_j(M/M22) >= s_(j+q)(M) for nonsingular M",
        ),
        hermitian.finish(
            "sinh",
            ClaimForm::Corrected,
            "s_j(M) >= s_j(M/M22) for Hermitian positive definite M",
        ),
    ]
}

/// `(lhs, rhs)` of `‖M̃_J2^* E M_J2 - I‖ <= ‖M̃^*M - I‖`.
fn biorwoblp_sides(mm: &DenseMatrix, mt: &DenseMatrix, j1: &SupportSet) -> Option<(f64, f64)> {
    let k = mm.cols();
    let j2 = j1.complement(k);
    let p = ObliqueProjector::new(mm, mt, j1).ok()?;
    let g = mt.adjoint_mul(mm).expect("same shape");
    let projected = mt.select_columns(j2.as_slice()).adjoint()
        * p.apply_matrix(&mm.select_columns(j2.as_slice()));
    let lhs = spectral_norm(&(projected - CMatrix::identity(j2.len(), j2.len())));
    let rhs = spectral_norm(&(g - CMatrix::identity(k, k)));
    Some((lhs, rhs))
}

fn check_biorwoblp(rng: &mut ChaCha20Rng, trials: usize) -> [LemmaCheck; 2] {
    let mut literal = Tally::new(1e-9);
    let mut bounded = Tally::new(1e-9);
    for _ in 0..trials {
        let m = pick_size(rng, 3, 8);
        let k = pick_size(rng, 2, m);
        let (mm, mt) = perturbed_pair(rng, m, k, 0.5);
        let size = pick_size(rng, 1, k - 1);
        let j1 = random_subset(rng, k, size);
        match biorwoblp_sides(&mm, &mt, &j1) {
            Some((lhs, rhs)) => literal.record(lhs - rhs),
            None => literal.skip(),
        }

        // M with orthonormal columns and M̃ = M (I + Δ)^*, so M̃^*M = I + Δ
        // with a non-Hermitian Δ of norm below one
        let q = gaussian(rng, m, k, 1.0).qr().q();
        let delta = gaussian(rng, k, k, 1.0);
        let radius = rng.random_range(0.05..0.95) / spectral_norm(&delta);
        let g = CMatrix::identity(k, k) + delta * C64::new(radius, 0.0);
        let mt = &q * g.adjoint();
        let size = pick_size(rng, 1, k - 1);
        let j1 = random_subset(rng, k, size);
        match biorwoblp_sides(&dense(q), &dense(mt), &j1) {
            Some((lhs, rhs)) => bounded.record(lhs - rhs),
            None => bounded.skip(),
        }
    }
    [
        literal.finish(
            "biorwoblp",
            ClaimForm::Literal,
            "||M~_J2* E M_J2 - I|| <= ||M~*M - I|| when M~*M has full rank",
        ),
        bounded.finish(
            "biorwoblp",
            ClaimForm::Corrected,
            "||M~_J2* E M_J2 - I|| <= ||M~*M - I|| when ||M~*M - I|| < 1",
        ),
    ]
}

fn check_ipdev(rng: &mut ChaCha20Rng, trials: usize) -> LemmaCheck {
    let mut tally = Tally::new(1e-9);
    for _ in 0..trials {
        let m = pick_size(rng, 3, 8);
        let n = pick_size(rng, 2, 10);
        let r = pick_size(rng, 1, n);
        let psi = gaussian(rng, m, n, 1.0);
        let dual = gaussian(rng, m, n, 1.0);
        let q = gaussian(rng, n, r, 1.0).qr().q();
        let p = &q * q.adjoint();
        let x = random_unit(rng, n) * C64::new(rng.random_range(0.5..2.0), 0.0);
        let y = random_unit(rng, n) * C64::new(rng.random_range(0.5..2.0), 0.0);
        let px = &p * &x;
        let py = &p * &y;
        let lhs = ((&dual * &px).dotc(&(&psi * &py)).norm() - px.dotc(&py).norm()).abs();
        let dev = spectral_norm(&(&p * dual.adjoint() * &psi * &p - &p));
        let rhs = dev * x.norm() * y.norm();
        tally.record(lhs - rhs - 1e-12 * rhs.max(1.0));
    }
    tally.finish(
        "ipdev",
        ClaimForm::Literal,
        "||<Psi~Px, PsiPy>| - |<Px, Py>|| <= ||P Psi~*Psi P - P|| ||x|| ||y||",
    )
}

/// Which sparsity order the projected pair is measured at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreservationOrder {
    /// `θ_s` of the projected pair against `θ_s` of the original.
    Same,
    /// `θ_{s-|Ĵ|}` of the projected pair against `θ_s` of the original, the
    /// form that follows from the Schur complement bound.
    Reduced,
}

/// Result of checking restricted biorthogonality under oblique projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionPreservation {
    pub s: usize,
    pub order: PreservationOrder,
    /// `θ_s(Ψ̃^*Ψ)`.
    pub theta: f64,
    pub trials: usize,
    /// Trials where `E` could not be built.
    pub skipped: usize,
    pub violations: usize,
    /// Smallest `θ_s(Ψ̃^*Ψ) - θ(projected)` over the evaluated trials.
    pub worst_slack: f64,
    /// `Ĵ` of the trial attaining `worst_slack`.
    pub worst_removed: Option<SupportSet>,
}

impl ProjectionPreservation {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `θ` of the pair `(E Ψ_{[n]∖Ĵ}, Ψ̃_{[n]∖Ĵ})` at the given order, where
/// `E = I - Ψ_Ĵ (Ψ̃_Ĵ^* Ψ_Ĵ)^{-1} Ψ̃_Ĵ^*`.
pub fn projected_theta(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    removed: &SupportSet,
    order: usize,
    mode: EnumerationMode,
) -> Result<f64> {
    let n = psi.cols();
    let keep = removed.complement(n);
    let projector = ObliqueProjector::new(psi, psi_dual, removed)?;
    let projected = dense(projector.apply_matrix(&psi.select_columns(keep.as_slice())));
    let dual = dense(psi_dual.select_columns(keep.as_slice()));
    Ok(restricted_biorthogonality_constant(&projected, &dual, order, mode)?.value)
}

/// Draws `trials` random sets `Ĵ` with `|Ĵ| < s` and checks that the
/// restricted biorthogonality constant of the projected pair does not exceed
/// `θ_s(Ψ̃^*Ψ) + 1e-9`.
pub fn verify_projection_preservation(
    psi: &DenseMatrix,
    psi_dual: &DenseMatrix,
    s: usize,
    trials: usize,
    seed: u64,
    order: PreservationOrder,
) -> Result<ProjectionPreservation> {
    check_pair(psi, psi_dual)?;
    let n = psi.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let mode = EnumerationMode::default();
    let theta = restricted_biorthogonality_constant(psi, psi_dual, s, mode)?.value;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = ProjectionPreservation {
        s,
        order,
        theta,
        trials,
        skipped: 0,
        violations: 0,
        worst_slack: f64::INFINITY,
        worst_removed: None,
    };
    for _ in 0..trials {
        let size = rng.random_range(0..s);
        let removed = random_subset(&mut rng, n, size);
        let k = match order {
            PreservationOrder::Same => s,
            PreservationOrder::Reduced => s - size,
        };
        match projected_theta(psi, psi_dual, &removed, k, mode) {
            Ok(value) => {
                let slack = theta - value;
                if slack < -1e-9 {
                    out.violations += 1;
                }
                if slack < out.worst_slack {
                    out.worst_slack = slack;
                    out.worst_removed = Some(removed);
                }
            }
            Err(Error::RankDeficient { .. }) => out.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Ten random rows of the 20-point DFT (unit-norm columns) with a dual
/// perturbed by complex Gaussian noise of relative size 0.3, redrawn until
/// `θ_s < 1` so that the hypothesis holds.
fn rbop_pair(
    rng: &mut ChaCha20Rng,
    m: usize,
    n: usize,
    s: usize,
) -> Option<(DenseMatrix, DenseMatrix)> {
    let scale = 1.0 / (m as f64).sqrt();
    for _ in 0..RBOP_REDRAWS {
        let rows = sample(rng, n, m).into_vec();
        let psi = CMatrix::from_fn(m, n, |r, c| {
            let phase = std::f64::consts::TAU * ((rows[r] * c) % n) as f64 / n as f64;
            C64::from_polar(scale, phase)
        });
        let dual = &psi + gaussian(rng, m, n, 0.3 * scale);
        let (psi, dual) = (dense(psi), dense(dual));
        let theta = restricted_biorthogonality_constant(&psi, &dual, s, EnumerationMode::default())
            .ok()?
            .value;
        if theta < 1.0 {
            return Some((psi, dual));
        }
    }
    None
}

const RBOP_REDRAWS: usize = 50;

fn check_rbpwoblp(rng: &mut ChaCha20Rng, trials: usize) -> [LemmaCheck; 2] {
    let (m, n, s) = (10, 20, 3);
    let mut literal = Tally::new(1e-9);
    let mut reduced = Tally::new(1e-9);
    for _ in 0..trials {
        let Some((psi, dual)) = rbop_pair(rng, m, n, s) else {
            literal.skip();
            reduced.skip();
            continue;
        };
        let seed: u64 = rng.random();
        let run = |order| verify_projection_preservation(&psi, &dual, s, 1, seed, order);
        for (tally, order) in [
            (&mut literal, PreservationOrder::Same),
            (&mut reduced, PreservationOrder::Reduced),
        ] {
            match run(order) {
                Ok(r) if r.theta < 1.0 && r.skipped == 0 => tally.record(-r.worst_slack),
                _ => tally.skip(),
            }
        }
    }
    [
        literal.finish(
            "rbpwoblp",
            ClaimForm::Literal,
            "theta_s of the projected pair <= theta_s (10x20 pairs, s = 3)",
        ),
        reduced.finish(
            "rbpwoblp",
            ClaimForm::Corrected,
            "theta_(s-|J|) of the projected pair <= theta_s (10x20 pairs, s = 3)",
        ),
    ]
}

/// Runs every check with `config.trials` random instances each. Every check
/// draws from its own stream of the seeded generator.
pub fn run_lemma_suite(config: LemmaSuiteConfig) -> LemmaSuite {
    let stream = |k: u64| {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(k);
        rng
    };
    let t = config.trials;
    let mut checks = vec![
        check_idempotence(&mut stream(1), t),
        check_ipsen(&mut stream(2), t),
        check_compl(&mut stream(3), t),
        check_pertub_literal(&mut stream(4), t),
        check_pertub_corrected(&mut stream(5), t),
    ];
    checks.extend(check_sinh(&mut stream(6), t));
    checks.extend(check_biorwoblp(&mut stream(7), t));
    checks.extend(check_rbpwoblp(&mut stream(8), t));
    checks.push(check_ipdev(&mut stream(9), t));
    LemmaSuite { config, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn real_square(n: usize, rows: &[f64]) -> CMatrix {
        DMatrix::from_row_slice(n, n, rows).map(|v| C64::new(v, 0.0))
    }

    #[test]
    fn pertub_counterexample() {
        // ||-I - I|| = 2 while every singular value of -I is 1
        let m = real_square(2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!((pertub_gap(&m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sinh_counterexample() {
        let eps = 1e-2;
        let m = real_square(2, &[1.0, 1.0, 1.0, eps]);
        let s = schur_complement(&m, 1).unwrap();
        assert!((s[(0, 0)].re - (1.0 - 1.0 / eps)).abs() < 1e-9);
        assert!(s[(0, 0)].norm() > singular_values(&m)[0]);
    }

    #[test]
    fn empty_removal_is_equality() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (psi, dual) = perturbed_pair(&mut rng, 6, 9, 0.3);
        let theta = restricted_biorthogonality_constant(&psi, &dual, 2, EnumerationMode::default())
            .unwrap()
            .value;
        let v = projected_theta(
            &psi,
            &dual,
            &SupportSet::empty(),
            2,
            EnumerationMode::default(),
        )
        .unwrap();
        assert!((v - theta).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_projection_preserves_rip() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let psi = dense(real_gaussian(&mut rng, 8, 12, 1.0 / 8f64.sqrt()));
        let r =
            verify_projection_preservation(&psi, &psi, 3, 40, 1, PreservationOrder::Same).unwrap();
        assert!(r.passed(), "worst slack {}", r.worst_slack);
    }

    #[test]
    fn reduced_order_preservation_holds() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (psi, dual) = perturbed_pair(&mut rng, 10, 16, 0.3);
        let r = verify_projection_preservation(&psi, &dual, 3, 30, 2, PreservationOrder::Reduced)
            .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = LemmaSuiteConfig {
            trials: 5,
            seed: 11,
        };
        let a = run_lemma_suite(cfg);
        let b = run_lemma_suite(cfg);
        assert_eq!(a, b);
        assert_eq!(a.checks.len(), 13);
        for name in ["idempotence", "ipsen", "compl", "sinh-interlace", "ipdev"] {
            assert!(
                a.check(name, ClaimForm::Literal).unwrap().passed(),
                "{name}"
            );
        }
        for name in ["pertub", "sinh", "biorwoblp", "rbpwoblp"] {
            assert!(
                a.check(name, ClaimForm::Corrected).unwrap().passed(),
                "{name}"
            );
        }
    }
}
