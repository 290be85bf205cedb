//! Seeded Monte-Carlo harnesses: phase transitions of support recovery,
//! paired conventional/oblique comparisons and restricted-constant trends.
//!
//! Trial `t` of grid cell `c` draws from the ChaCha20 stream
//! `(c << 32) | t` of the master seed, so results do not depend on the
//! order in which trials run.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    restricted_biorthogonality_constant, restricted_isometry_constant, EnumerationMode,
};
use crate::dictionaries::{make_dictionary, DictionarySpec};
use crate::error::{Error, Result};
use crate::frames::{
    build_density, isotropy_expectations, sample_sensing_pair, DensitySpec, FrameFamily,
};
use crate::io::{parse_key_values, ConfigEntry};
use crate::linalg::{
    deviation_from_identity, spectral_norm, CVector, DenseMatrix, Field, SparseSignal, SupportSet,
    C64,
};
use crate::pursuits::{run_pursuit, Algorithm, PursuitConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseTransition,
    AbCompare,
    RbopTrend,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phase-transition" => Ok(Self::PhaseTransition),
            "ab-compare" => Ok(Self::AbCompare),
            "rbop-trend" => Ok(Self::RbopTrend),
            other => Err(Error::Config(format!(
                "unknown experiment '{other}'; expected phase-transition, ab-compare or rbop-trend"
            ))),
        }
    }
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PhaseTransition => "phase-transition",
            Self::AbCompare => "ab-compare",
            Self::RbopTrend => "rbop-trend",
        }
    }
}

/// Frame family drawn in every trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameChoice {
    /// A fresh synthetic biorthogonal frame per trial.
    Synthetic,
    /// The `n`-point DFT.
    PartialDft,
}

/// Square dictionary applied after the frame matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DictionaryChoice {
    Identity,
    Orthonormal,
    Invertible { kappa: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Signal length, which is also the frame dimension.
    pub n: usize,
    pub m_over_n: Vec<f64>,
    pub s_over_m: Vec<f64>,
    pub repetitions: usize,
    /// `None` for noiseless measurements.
    pub snr_db: Option<f64>,
    pub frame: FrameChoice,
    pub kappa: f64,
    pub density: DensitySpec,
    pub dictionary: DictionaryChoice,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Record wall-clock times. Off by default so outputs are reproducible.
    pub timing: bool,
    /// Sparsity of the restricted-constant trend.
    pub sparsity: usize,
    /// Row counts of the restricted-constant trend.
    pub m_values: Vec<usize>,
}

fn ratio_grid(lo: usize, hi: usize, step: f64) -> Vec<f64> {
    (lo..=hi)
        .map(|k| (k as f64 * step * 1e6).round() / 1e6)
        .collect()
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let trend = kind == ExperimentKind::RbopTrend;
        Self {
            kind,
            n: if trend { 64 } else { 256 },
            m_over_n: ratio_grid(1, 9, 0.1),
            s_over_m: ratio_grid(1, 10, 0.05),
            repetitions: if trend { 20 } else { 50 },
            snr_db: Some(30.0),
            frame: FrameChoice::Synthetic,
            kappa: 2.0,
            density: DensitySpec::Uniform,
            dictionary: DictionaryChoice::Identity,
            algorithms: Algorithm::ALL.to_vec(),
            seed: 0,
            output: None,
            timing: false,
            sparsity: 2,
            m_values: vec![16, 32, 64],
        }
    }

    /// Parses a config file. The `experiment` key (or `kind`, when given)
    /// selects the defaults that the remaining keys override.
    pub fn from_text(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let entries = parse_key_values(text)?;
        let from_file = entries.iter().find(|e| e.key == "experiment");
        let kind = match (kind, from_file) {
            (Some(k), _) => k,
            (None, Some(e)) => e.value.parse().map_err(|err: Error| Error::ConfigLine {
                line: e.line,
                message: err.to_string(),
            })?,
            (None, None) => ExperimentKind::PhaseTransition,
        };
        let mut cfg = Self::defaults(kind);
        for ConfigEntry { line, key, value } in &entries {
            if key == "experiment" {
                continue;
            }
            cfg.set(key, value).map_err(|message| Error::ConfigLine {
                line: *line,
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.trim()
                .parse()
                .map_err(|_| format!("{key}: cannot parse '{}'", v.trim()))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String> {
            v.split(',').map(|p| num(key, p)).collect()
        }
        let v = value.trim();
        match key {
            "n" => self.n = num(key, v)?,
            "m_over_n" => self.m_over_n = list(key, v)?,
            "s_over_m" => self.s_over_m = list(key, v)?,
            "repetitions" => self.repetitions = num(key, v)?,
            "snr_db" => {
                self.snr_db = match v {
                    "none" | "inf" | "noiseless" => None,
                    _ => Some(num(key, v)?),
                }
            }
            "frame" => {
                self.frame = match v {
                    "synthetic" | "synthetic-biorthogonal" => FrameChoice::Synthetic,
                    "partial-dft" => FrameChoice::PartialDft,
                    _ => return Err(format!("frame: unknown family '{v}'")),
                }
            }
            "kappa" => self.kappa = num(key, v)?,
            "density" => self.density = parse_density(v)?,
            "dictionary" => self.dictionary = parse_dictionary(v)?,
            "algorithms" => {
                self.algorithms = v
                    .split(',')
                    .map(|a| a.parse::<Algorithm>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "seed" => self.seed = num(key, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "timing" => self.timing = num(key, v)?,
            "sparsity" => self.sparsity = num(key, v)?,
            "m_values" => self.m_values = list(key, v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.kind != ExperimentKind::RbopTrend {
            for (name, grid) in [("m_over_n", &self.m_over_n), ("s_over_m", &self.s_over_m)] {
                if grid.is_empty() {
                    return bad(format!("{name} grid is empty"));
                }
                if let Some(r) = grid.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
                    return bad(format!("{name} value {r} is outside (0, 1]"));
                }
            }
            if self.algorithms.is_empty() {
                return bad("no algorithms selected".into());
            }
        } else {
            if self.m_values.is_empty() || self.m_values.contains(&0) {
                return bad("m_values must be nonempty and positive".into());
            }
            if self.sparsity == 0 || self.sparsity > self.n {
                return bad(format!(
                    "sparsity {} invalid for n = {}",
                    self.sparsity, self.n
                ));
            }
        }
        if !(self.kappa.is_finite() && self.kappa >= 1.0) {
            return bad(format!("kappa must be at least 1, got {}", self.kappa));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return bad("snr_db must be finite or 'none'".into());
            }
        }
        Ok(())
    }

    /// Effective configuration as `key = value` lines.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.kind.as_str());
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "m_over_n = {}", join(&self.m_over_n));
        let _ = writeln!(s, "s_over_m = {}", join(&self.s_over_m));
        let _ = writeln!(s, "repetitions = {}", self.repetitions);
        let _ = writeln!(
            s,
            "snr_db = {}",
            self.snr_db.map_or("none".to_string(), |v| v.to_string())
        );
        let _ = writeln!(
            s,
            "frame = {}",
            match self.frame {
                FrameChoice::Synthetic => "synthetic",
                FrameChoice::PartialDft => "partial-dft",
            }
        );
        let _ = writeln!(s, "kappa = {}", self.kappa);
        let _ = writeln!(s, "density = {}", density_text(&self.density));
        let _ = writeln!(s, "dictionary = {}", dictionary_text(self.dictionary));
        let algs: Vec<&str> = self.algorithms.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(s, "algorithms = {}", algs.join(","));
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", p.display());
        }
        let _ = writeln!(s, "timing = {}", self.timing);
        let _ = writeln!(s, "sparsity = {}", self.sparsity);
        let ms: Vec<String> = self.m_values.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "m_values = {}", ms.join(","));
        s
    }
}

fn parse_density(v: &str) -> std::result::Result<DensitySpec, String> {
    let (kind, arg) = match v.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (v, None),
    };
    match (kind, arg) {
        ("uniform", None) => Ok(DensitySpec::Uniform),
        ("variable-power", a) => {
            let alpha = a.map_or(Ok(1.0), |a| {
                a.parse()
                    .map_err(|_| format!("density: bad exponent '{a}'"))
            })?;
            Ok(DensitySpec::VariablePower { alpha })
        }
        ("custom", Some(a)) => {
            let weights = a
                .split(';')
                .map(|w| {
                    w.trim()
                        .parse()
                        .map_err(|_| format!("density: bad weight '{w}'"))
                })
                .collect::<std::result::Result<_, _>>()?;
            Ok(DensitySpec::Custom { weights })
        }
        _ => Err(format!(
            "density: expected uniform, variable-power[:alpha] or custom:w1;w2;..., got '{v}'"
        )),
    }
}

fn density_text(d: &DensitySpec) -> String {
    match d {
        DensitySpec::Uniform => "uniform".into(),
        DensitySpec::VariablePower { alpha } => format!("variable-power:{alpha}"),
        DensitySpec::Custom { weights } => {
            let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
            format!("custom:{}", w.join(";"))
        }
    }
}

fn parse_dictionary(v: &str) -> std::result::Result<DictionaryChoice, String> {
    match v.split_once(':') {
        None if v == "identity" => Ok(DictionaryChoice::Identity),
        None if v == "orthonormal" => Ok(DictionaryChoice::Orthonormal),
        Some(("invertible", k)) => Ok(DictionaryChoice::Invertible {
            kappa: k
                .trim()
                .parse()
                .map_err(|_| format!("dictionary: bad condition number '{k}'"))?,
        }),
        _ => Err(format!(
            "dictionary: expected identity, orthonormal or invertible:kappa, got '{v}'"
        )),
    }
}

fn dictionary_text(d: DictionaryChoice) -> String {
    match d {
        DictionaryChoice::Identity => "identity".into(),
        DictionaryChoice::Orthonormal => "orthonormal".into(),
        DictionaryChoice::Invertible { kappa } => format!("invertible:{kappa}"),
    }
}

/// One generated instance: matrices, signal and measurements.
#[derive(Clone, Debug)]
pub struct Trial {
    pub psi: DenseMatrix,
    pub psi_dual: DenseMatrix,
    pub x: SparseSignal,
    pub y: CVector,
    pub noise_norm: f64,
}

impl Trial {
    /// Hash of every input a pursuit sees.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for m in [&self.psi, &self.psi_dual] {
            for z in m.as_matrix().iter() {
                z.re.to_bits().hash(&mut h);
                z.im.to_bits().hash(&mut h);
            }
        }
        for z in self.y.iter().chain(self.x.values()) {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        self.x.support().as_slice().hash(&mut h);
        h.finish()
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `z` with i.i.d. Gaussian entries scaled so that `‖clean‖² / ‖z‖²` equals
/// the requested SNR exactly. Real when `field` is real.
pub fn noise_at_snr(clean: &CVector, snr_db: f64, field: Field, rng: &mut ChaCha20Rng) -> CVector {
    let g = CVector::from_fn(clean.len(), |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => rng.sample(StandardNormal),
        };
        C64::new(re, im)
    });
    let gn = g.norm();
    if gn == 0.0 {
        return g;
    }
    let target = clean.norm() / 10f64.powf(snr_db / 20.0);
    g * C64::new(target / gn, 0.0)
}

/// Draws the instance of trial `t` in cell `cell` with `m` measurements and
/// sparsity `s`: frame, sensing rows, dictionary, a `±1` signal on a uniform
/// random support and noise at the configured SNR.
pub fn draw_trial(cfg: &ExperimentConfig, m: usize, s: usize, cell: u64, t: u64) -> Result<Trial> {
    let n = cfg.n;
    let mut rng = trial_rng(cfg.seed, (cell << 32) | t);
    let family = match cfg.frame {
        FrameChoice::Synthetic => {
            FrameFamily::synthetic_biorthogonal(n, cfg.kappa, rng.next_u64())?
        }
        FrameChoice::PartialDft => FrameFamily::partial_dft(n)?,
    };
    let density = build_density(cfg.density.clone(), family.grid_size())?;
    let pair = sample_sensing_pair(&family, &density, m, rng.next_u64())?;
    let (psi, psi_dual) = match cfg.dictionary {
        DictionaryChoice::Identity => (pair.a, pair.a_dual),
        DictionaryChoice::Orthonormal => {
            pair.compose(&make_dictionary(DictionarySpec::Orthonormal {
                n,
                seed: rng.next_u64(),
            })?)?
        }
        DictionaryChoice::Invertible { kappa } => {
            pair.compose(&make_dictionary(DictionarySpec::Invertible {
                n,
                kappa,
                seed: rng.next_u64(),
            })?)?
        }
    };
    let mut idx = sample(&mut rng, n, s).into_vec();
    idx.sort_unstable();
    let values = (0..s)
        .map(|_| C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let x = SparseSignal::new(n, SupportSet::new(idx, n)?, values)?;
    let clean = psi.mul_vec(&x.to_dense())?;
    let (y, noise_norm) = match cfg.snr_db {
        Some(snr) => {
            let z = noise_at_snr(&clean, snr, psi.field(), &mut rng);
            let norm = z.norm();
            (clean + z, norm)
        }
        None => (clean, 0.0),
    };
    Ok(Trial {
        psi,
        psi_dual,
        x,
        y,
        noise_norm,
    })
}

/// A grid cell that could not be run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub m_over_n: f64,
    pub s_over_m: f64,
    pub reason: String,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    id: u64,
    m_over_n: f64,
    s_over_m: f64,
    m: usize,
    s: usize,
}

fn plan_cells(cfg: &ExperimentConfig) -> (Vec<Cell>, Vec<SkippedCell>) {
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for (i, &mn) in cfg.m_over_n.iter().enumerate() {
        for (j, &sm) in cfg.s_over_m.iter().enumerate() {
            let m = (mn * cfg.n as f64).round() as usize;
            let s = (sm * m as f64).round() as usize;
            let reason = if m == 0 {
                Some("no measurements".to_string())
            } else if s == 0 {
                Some(format!("sparsity rounds to zero at m = {m}"))
            } else if m > cfg.n || s > m {
                Some(format!("infeasible sizes m = {m}, s = {s}"))
            } else {
                None
            };
            match reason {
                Some(reason) => skipped.push(SkippedCell {
                    m_over_n: mn,
                    s_over_m: sm,
                    reason,
                }),
                None => cells.push(Cell {
                    id: (i * cfg.s_over_m.len() + j) as u64,
                    m_over_n: mn,
                    s_over_m: sm,
                    m,
                    s,
                }),
            }
        }
    }
    (cells, skipped)
}

#[derive(Clone, Debug)]
struct Outcome {
    success: bool,
    iterations: usize,
    runtime_ms: f64,
    rel_error: f64,
    fingerprint: u64,
}

fn run_variants(cfg: &ExperimentConfig, trial: &Trial, s: usize) -> Result<Vec<Outcome>> {
    let truth = trial.x.support();
    let x_norm = trial.x.norm();
    let mut out = Vec::with_capacity(2 * cfg.algorithms.len());
    for &algorithm in &cfg.algorithms {
        for oblique in [false, true] {
            let fingerprint = trial.fingerprint();
            let mut pc = PursuitConfig::new(algorithm, s);
            pc.oblique = oblique;
            let start = Instant::now();
            let r = run_pursuit(&trial.psi, &trial.psi_dual, &trial.y, &pc)?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            out.push(Outcome {
                success: r.support() == truth,
                iterations: r.iterations,
                runtime_ms,
                rel_error: r.estimate.distance(&trial.x) / x_norm,
                fingerprint,
            });
        }
    }
    Ok(out)
}

/// Outcomes of every trial, grouped by cell in grid order.
fn run_cells(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<Vec<Vec<Outcome>>>> {
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.repetitions as u64).map(move |t| (c, t)))
        .collect();
    let results: Vec<Result<Vec<Outcome>>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let cell = cells[c];
            let trial = draw_trial(cfg, cell.m, cell.s, cell.id, t)?;
            run_variants(cfg, &trial, cell.s)
        })
        .collect();
    let mut grouped: Vec<Vec<Vec<Outcome>>> = vec![Vec::new(); cells.len()];
    for ((c, _), r) in jobs.iter().zip(results) {
        grouped[*c].push(r?);
    }
    Ok(grouped)
}

/// Aggregate of one algorithm variant on one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub m_over_n: f64,
    pub s_over_m: f64,
    pub m: usize,
    pub s: usize,
    pub algorithm: Algorithm,
    pub oblique: bool,
    pub successes: usize,
    pub trials: usize,
    pub mean_iterations: f64,
    pub mean_runtime_ms: Option<f64>,
    pub mean_relative_error: f64,
}

impl GridRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub config: ExperimentConfig,
    pub rows: Vec<GridRow>,
    pub skipped: Vec<SkippedCell>,
}

pub const GRID_CSV_HEADER: &str =
    "m_over_n,s_over_m,alg,oblique,successes,trials,mean_iters,mean_runtime_ms";

impl ExperimentGrid {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{GRID_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.m_over_n,
                r.s_over_m,
                r.algorithm,
                r.oblique,
                r.successes,
                r.trials,
                r.mean_iterations,
                r.mean_runtime_ms
                    .map_or("NA".to_string(), |v| format!("{v:.3}")),
            );
        }
        s
    }

    pub fn rows_for(&self, algorithm: Algorithm, oblique: bool) -> impl Iterator<Item = &GridRow> {
        self.rows
            .iter()
            .filter(move |r| r.algorithm == algorithm && r.oblique == oblique)
    }

    /// Number of cells where the variant succeeds in at least half the trials.
    pub fn success_area(&self, algorithm: Algorithm, oblique: bool) -> usize {
        self.rows_for(algorithm, oblique)
            .filter(|r| 2 * r.successes >= r.trials)
            .count()
    }

    /// Success-rate matrix of one variant with a row per `s/m` value and a
    /// column per `m/n` value, as CSV. Skipped cells are written as `NA`.
    pub fn plot_matrix(&self, algorithm: Algorithm, oblique: bool) -> String {
        let cfg = &self.config;
        let mut s = String::from("s_over_m");
        for mn in &cfg.m_over_n {
            let _ = write!(s, ",{mn}");
        }
        s.push('\n');
        for &sm in &cfg.s_over_m {
            let _ = write!(s, "{sm}");
            for &mn in &cfg.m_over_n {
                let cell = self
                    .rows_for(algorithm, oblique)
                    .find(|r| r.m_over_n == mn && r.s_over_m == sm);
                match cell {
                    Some(r) => {
                        let _ = write!(s, ",{}", r.success_rate());
                    }
                    None => s.push_str(",NA"),
                }
            }
            s.push('\n');
        }
        s
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Support-recovery phase transition over the `(m/n, s/m)` grid. Every
/// selected algorithm runs in its conventional and oblique form on the same
/// instances; success means the selected support equals the true one.
pub fn phase_transition(cfg: &ExperimentConfig) -> Result<ExperimentGrid> {
    cfg.validate()?;
    let (cells, skipped) = plan_cells(cfg);
    let grouped = run_cells(cfg, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&grouped) {
        for (v, &algorithm) in cfg.algorithms.iter().enumerate() {
            for (o, oblique) in [false, true].into_iter().enumerate() {
                let k = 2 * v + o;
                let outs: Vec<&Outcome> = trials.iter().map(|t| &t[k]).collect();
                rows.push(GridRow {
                    m_over_n: cell.m_over_n,
                    s_over_m: cell.s_over_m,
                    m: cell.m,
                    s: cell.s,
                    algorithm,
                    oblique,
                    successes: outs.iter().filter(|o| o.success).count(),
                    trials: outs.len(),
                    mean_iterations: mean(outs.iter().map(|o| o.iterations as f64)),
                    mean_runtime_ms: cfg.timing.then(|| mean(outs.iter().map(|o| o.runtime_ms))),
                    mean_relative_error: mean(outs.iter().map(|o| o.rel_error)),
                });
            }
        }
    }
    Ok(ExperimentGrid {
        config: cfg.clone(),
        rows,
        skipped,
    })
}

/// Paired conventional/oblique result of one algorithm on one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbRow {
    pub m_over_n: f64,
    pub s_over_m: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub conventional_successes: usize,
    pub oblique_successes: usize,
    pub conventional_mean_error: f64,
    pub oblique_mean_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbComparison {
    pub config: ExperimentConfig,
    pub rows: Vec<AbRow>,
    pub skipped: Vec<SkippedCell>,
}

pub const AB_CSV_HEADER: &str = "m_over_n,s_over_m,alg,trials,conventional_successes,\
oblique_successes,conventional_mean_rel_error,oblique_mean_rel_error";

impl AbComparison {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{AB_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.m_over_n,
                r.s_over_m,
                r.algorithm,
                r.trials,
                r.conventional_successes,
                r.oblique_successes,
                r.conventional_mean_error,
                r.oblique_mean_error
            );
        }
        s
    }
}

/// Runs each algorithm conventionally and obliquely on identical
/// `(matrix, signal, noise)` triples and reports paired success counts and
/// mean relative `ℓ₂` errors.
pub fn ab_comparison(cfg: &ExperimentConfig) -> Result<AbComparison> {
    cfg.validate()?;
    let (cells, skipped) = plan_cells(cfg);
    let grouped = run_cells(cfg, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&grouped) {
        for (v, &algorithm) in cfg.algorithms.iter().enumerate() {
            let pairs: Vec<(&Outcome, &Outcome)> =
                trials.iter().map(|t| (&t[2 * v], &t[2 * v + 1])).collect();
            if let Some((c, o)) = pairs.iter().find(|(c, o)| c.fingerprint != o.fingerprint) {
                return Err(Error::Config(format!(
                    "paired runs saw different inputs ({:016x} vs {:016x})",
                    c.fingerprint, o.fingerprint
                )));
            }
            rows.push(AbRow {
                m_over_n: cell.m_over_n,
                s_over_m: cell.s_over_m,
                algorithm,
                trials: pairs.len(),
                conventional_successes: pairs.iter().filter(|p| p.0.success).count(),
                oblique_successes: pairs.iter().filter(|p| p.1.success).count(),
                conventional_mean_error: mean(pairs.iter().map(|p| p.0.rel_error)),
                oblique_mean_error: mean(pairs.iter().map(|p| p.1.rel_error)),
            });
        }
    }
    Ok(AbComparison {
        config: cfg.clone(),
        rows,
        skipped,
    })
}

/// Medians of restricted constants over repeated row draws for one `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub m: usize,
    pub s: usize,
    pub draws: usize,
    pub median_theta: f64,
    pub median_delta_psi: f64,
    pub median_delta_psi_dual: f64,
}

/// Exact expectations of the cross-Gram matrices of one draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    /// `‖E Ã^*A - I‖`.
    pub dual_deviation: f64,
    /// `‖E A^*A - I‖`.
    pub plain_deviation: f64,
    /// `‖E Â^*Â - S‖` with `S` the frame operator.
    pub preconditioned_deviation: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbopTrend {
    pub config: ExperimentConfig,
    pub frame: String,
    pub rows: Vec<TrendRow>,
    pub isotropy: IsotropyReport,
}

pub const TREND_CSV_HEADER: &str = "m,s,draws,median_theta,median_delta_psi,median_delta_psi_dual";

impl RbopTrend {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{TREND_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.m, r.s, r.draws, r.median_theta, r.median_delta_psi, r.median_delta_psi_dual
            );
        }
        s
    }

    /// True when the median `θ_s` never increases with `m`.
    pub fn theta_nonincreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].median_theta <= w[0].median_theta)
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    }
}

/// Medians of `θ_s(Ã^*A)`, `δ_s(A)` and `δ_s(Ã)` over `repetitions` row
/// draws for each `m` in `m_values`, on one frame fixed by the master seed,
/// together with the exact isotropy deviations of that frame and density.
pub fn rbop_trend(cfg: &ExperimentConfig) -> Result<RbopTrend> {
    cfg.validate()?;
    let n = cfg.n;
    let s = cfg.sparsity;
    let family = match cfg.frame {
        FrameChoice::Synthetic => {
            FrameFamily::synthetic_biorthogonal(n, cfg.kappa, trial_rng(cfg.seed, 0).next_u64())?
        }
        FrameChoice::PartialDft => FrameFamily::partial_dft(n)?,
    };
    let density = build_density(cfg.density.clone(), family.grid_size())?;
    let mode = EnumerationMode::default();
    let mut rows = Vec::new();
    for (i, &m) in cfg.m_values.iter().enumerate() {
        let draws: Vec<Result<(f64, f64, f64)>> = (0..cfg.repetitions as u64)
            .into_par_iter()
            .map(|t| {
                let seed = trial_rng(cfg.seed, (((i as u64) + 1) << 32) | t).next_u64();
                let pair = sample_sensing_pair(&family, &density, m, seed)?;
                Ok((
                    restricted_biorthogonality_constant(&pair.a, &pair.a_dual, s, mode)?.value,
                    restricted_isometry_constant(&pair.a, s, mode)?.value,
                    restricted_isometry_constant(&pair.a_dual, s, mode)?.value,
                ))
            })
            .collect();
        let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
        let mut theta: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let mut dpsi: Vec<f64> = draws.iter().map(|d| d.1).collect();
        let mut ddual: Vec<f64> = draws.iter().map(|d| d.2).collect();
        rows.push(TrendRow {
            m,
            s,
            draws: draws.len(),
            median_theta: median(&mut theta),
            median_delta_psi: median(&mut dpsi),
            median_delta_psi_dual: median(&mut ddual),
        });
    }
    let e = isotropy_expectations(&family, &density)?;
    let isotropy = IsotropyReport {
        dual_deviation: deviation_from_identity(&e.dual),
        plain_deviation: deviation_from_identity(&e.plain),
        preconditioned_deviation: spectral_norm(&(&e.preconditioned - family.frame_operator())),
        nu_min: density.nu_min(),
        nu_max: density.nu_max(),
    };
    Ok(RbopTrend {
        config: cfg.clone(),
        frame: family.tag().to_string(),
        rows,
        isotropy,
    })
}
