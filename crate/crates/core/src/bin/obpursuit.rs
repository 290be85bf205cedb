use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use obpursuit::certificates::{
    constants_report, run_lemma_suite, EnumerationMode, LemmaSuiteConfig,
};
use obpursuit::experiments::{
    ab_comparison, phase_transition, rbop_trend, ExperimentConfig, ExperimentKind,
};
use obpursuit::frames::{
    build_density, frame_operator_stats, sample_sensing_pair, FrameFamily, FrameStats,
};
use obpursuit::io::{
    load_sensing_pair, read_matrix, read_recovery_input, save_sensing_pair, sidecar_path,
    write_json, RECOVERY_FILES,
};
use obpursuit::linalg::DenseMatrix;
use obpursuit::pursuits::{run_pursuit, Algorithm, PursuitConfig};
use obpursuit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "obpursuit",
    version,
    about = "Oblique greedy pursuits and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a sparse vector from psi.csv, y.csv and optionally psi_dual.csv.
    Recover(RecoverArgs),
    /// Support-recovery phase transition over the (m/n, s/m) grid.
    PhaseTransition(ExperimentArgs),
    /// Paired conventional/oblique comparison on identical instances.
    AbCompare(ExperimentArgs),
    /// Median restricted constants against the number of measurements.
    RbopTrend(ExperimentArgs),
    /// Exact (or sampled) restricted isometry and biorthogonality constants.
    Constants(ConstantsArgs),
    /// Randomized checks of the supporting matrix inequalities.
    Verify(VerifyArgs),
    /// Frame-operator and density statistics; optionally saves a sensing pair.
    FrameStats(FrameArgs),
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    alg: Algorithm,
    /// Use the dual matrix (ignored when psi_dual.csv is absent).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    oblique: bool,
    #[arg(long)]
    sparsity: usize,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Directory holding the input files.
    #[arg(long)]
    input: PathBuf,
    /// JSON result path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path; the JSON report goes next to it with `.json` appended.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override any config key, e.g. `--set n=128`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Record wall-clock times (makes output machine dependent).
    #[arg(long)]
    timing: bool,
    /// Also write one success-rate matrix per algorithm variant.
    #[arg(long)]
    emit_plot_data: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Directory with psi.csv [+ psi_dual.csv] or a saved sensing pair.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sparsity: usize,
    /// Maximum over this many random subsets instead of full enumeration.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FrameArgs {
    /// synthetic, partial-dft or continuous-fourier.
    #[arg(long, default_value = "synthetic")]
    frame: String,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// uniform, variable-power[:alpha] or custom:w1;w2;...
    #[arg(long, default_value = "uniform")]
    density: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Save a sensing pair with this many rows (requires --save).
    #[arg(long, requires = "save")]
    m: Option<usize>,
    #[arg(long, requires = "m")]
    save: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    // per-trial pursuit warnings would flood the experiment output
    let level = match cli.command {
        Command::Recover(_) => "warn",
        _ => "error",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

fn emit<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    match output {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Recover(a) => recover(a),
        Command::PhaseTransition(a) => experiment(ExperimentKind::PhaseTransition, a),
        Command::AbCompare(a) => experiment(ExperimentKind::AbCompare, a),
        Command::RbopTrend(a) => experiment(ExperimentKind::RbopTrend, a),
        Command::Constants(a) => constants(a),
        Command::Verify(a) => {
            let suite = run_lemma_suite(LemmaSuiteConfig {
                trials: a.trials,
                seed: a.seed,
            });
            print!("{}", suite.table());
            Ok(())
        }
        Command::FrameStats(a) => frame_stats(a),
    }
}

fn recover(a: RecoverArgs) -> Result<()> {
    let input = read_recovery_input(&a.input)?;
    let mut cfg = PursuitConfig::new(a.alg, a.sparsity);
    cfg.oblique = a.oblique && input.psi_dual.is_some();
    cfg.max_iterations = a.max_iter;
    if let Some(tol) = a.tol {
        cfg.tolerance = tol;
    }
    let dual = input.psi_dual.as_ref().unwrap_or(&input.psi);
    let result = run_pursuit(&input.psi, dual, &input.y, &cfg)?;
    emit(a.output.as_deref(), &result)
}

fn experiment(kind: ExperimentKind, a: ExperimentArgs) -> Result<()> {
    let text = match &a.config {
        Some(p) => fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::from_text(&text, Some(kind))?;
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{o}'")))?;
        cfg.set(k.trim(), v).map_err(Error::Config)?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &a.output {
        cfg.output = Some(out.clone());
    }
    cfg.timing |= a.timing;
    cfg.validate()?;

    let (csv, json, plots) = match kind {
        ExperimentKind::PhaseTransition => {
            let grid = phase_transition(&cfg)?;
            let plots: Vec<(String, String)> = cfg
                .algorithms
                .iter()
                .flat_map(|&alg| [false, true].map(|ob| (alg, ob)))
                .map(|(alg, ob)| {
                    let tag = format!("{}{}", if ob { "ob" } else { "" }, alg.as_str());
                    (tag, grid.plot_matrix(alg, ob))
                })
                .collect();
            (grid.to_csv(), serde_json::to_string_pretty(&grid)?, plots)
        }
        ExperimentKind::AbCompare => {
            let ab = ab_comparison(&cfg)?;
            (ab.to_csv(), serde_json::to_string_pretty(&ab)?, Vec::new())
        }
        ExperimentKind::RbopTrend => {
            let trend = rbop_trend(&cfg)?;
            (
                trend.to_csv(),
                serde_json::to_string_pretty(&trend)?,
                Vec::new(),
            )
        }
    };
    match &cfg.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, &csv)?;
            fs::write(sidecar_path(path), json + "\n")?;
            if a.emit_plot_data {
                let stem = path.with_extension("");
                for (tag, matrix) in plots {
                    let mut p = stem.clone().into_os_string();
                    p.push(format!("_{tag}.csv"));
                    fs::write(PathBuf::from(p), matrix)?;
                }
            }
        }
        None => {
            print!("{csv}");
            if a.emit_plot_data {
                for (tag, matrix) in plots {
                    println!("\n# {tag}");
                    print!("{matrix}");
                }
            }
        }
    }
    Ok(())
}

fn load_pair(dir: &Path) -> Result<(DenseMatrix, DenseMatrix)> {
    let psi = dir.join(RECOVERY_FILES[0]);
    if psi.exists() {
        let psi = read_matrix(&psi)?;
        let dual = dir.join(RECOVERY_FILES[1]);
        let dual = if dual.exists() {
            read_matrix(&dual)?
        } else {
            psi.clone()
        };
        Ok((psi, dual))
    } else {
        let pair = load_sensing_pair(dir)?;
        Ok((pair.a, pair.a_dual))
    }
}

fn constants(a: ConstantsArgs) -> Result<()> {
    let (psi, dual) = load_pair(&a.input)?;
    let mode = match (a.samples, a.budget) {
        (Some(samples), _) => EnumerationMode::Sampled {
            samples,
            seed: a.seed,
        },
        (None, Some(budget)) => EnumerationMode::Exact { budget },
        (None, None) => EnumerationMode::default(),
    };
    let report = constants_report(&psi, &dual, a.sparsity, mode, a.timing)?;
    emit(a.output.as_deref(), &report)
}

#[derive(Serialize)]
struct FrameReport {
    frame: String,
    n: usize,
    grid: usize,
    #[serde(flatten)]
    stats: FrameStats,
    nu_min: f64,
    nu_max: f64,
}

fn frame_stats(a: FrameArgs) -> Result<()> {
    let family = match a.frame.as_str() {
        "synthetic" => FrameFamily::synthetic_biorthogonal(a.n, a.kappa, a.seed)?,
        "partial-dft" => FrameFamily::partial_dft(a.n)?,
        "continuous-fourier" => FrameFamily::continuous_fourier(a.n)?,
        other => return Err(Error::Config(format!("unknown frame '{other}'"))),
    };
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::RbopTrend);
    cfg.set("density", &a.density).map_err(Error::Config)?;
    let density = build_density(cfg.density, family.grid_size())?;
    let report = FrameReport {
        frame: family.tag().to_string(),
        n: family.dim(),
        grid: family.grid_size(),
        stats: frame_operator_stats(&family)?,
        nu_min: density.nu_min(),
        nu_max: density.nu_max(),
    };
    if let (Some(m), Some(dir)) = (a.m, &a.save) {
        save_sensing_pair(dir, &sample_sensing_pair(&family, &density, m, a.seed)?)?;
    }
    emit(a.output.as_deref(), &report)
}
