//! Command-line surface: `check`, `scan`, `simulate`, `reconstruct`.
//!
//! Every command is deterministic given its full flag set (including the
//! seed); Monte Carlo and scan workers are parallel but their output is
//! assembled by index, so `--threads` changes speed, never bytes.
//!
//! Exit codes: 0 success, 1 numerical or assertion failure, 2 invalid
//! input, 3 I/O failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::fiducial::{
    condition_number, equidistant_fiducial, lambda_profile, linspace, principal_fiducial,
    scan_grid, AlphaParam,
};
use crate::inversion::{counts_to_prob_matrix, linear_invert, InversionOperator};
use crate::io::{
    load_counts, load_fiducial, save_counts, save_fiducial, save_grid, save_report, ConfigEcho,
    FidelityBlock, ReportFile,
};
use crate::linalg::hermitian_eigenvalues;
use crate::mle::{DetectorModel, MleOptions};
use crate::povm::{build_povm, completeness_residual, s_max, Fiducial};
use crate::simulator::{
    fidelity, monte_carlo_fidelity, reconstruct_density, simulate_counts, MonteCarloConfig,
    TestState,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Completeness residual threshold for `check` to pass.
pub const CHECK_RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "multisym",
    version,
    about = "Qudit state tomography with POVMs built from multiply symmetric states",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the POVM for a fiducial and verify completeness.
    Check(CheckArgs),
    /// Scan the condition number of the inversion over the α plane.
    Scan(ScanArgs),
    /// Run a simulated counting experiment with Monte Carlo error bars.
    Simulate(SimulateArgs),
    /// Reconstruct a density matrix from a counts file.
    Reconstruct(ReconstructArgs),
}

#[derive(Args)]
struct FiducialSource {
    /// Fiducial parameter as `MAG,PHASE`; the phase accepts radians or an
    /// `Xpi` suffix (e.g. `0.4,1.7pi`).
    #[arg(long, value_name = "MAG,PHASE")]
    alpha: Option<String>,
    /// JSON fiducial file (overrides --alpha).
    #[arg(long, value_name = "FILE", conflicts_with = "alpha")]
    fiducial: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Hilbert-space dimension D.
    #[arg(long)]
    dim: usize,
    #[command(flatten)]
    source: FiducialSource,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    dim: usize,
    /// Smallest |α| in the grid.
    #[arg(long, default_value_t = 0.0)]
    mag_min: f64,
    /// Largest |α| in the grid (inclusive).
    #[arg(long, default_value_t = 1.0)]
    mag_max: f64,
    /// Number of |α| samples.
    #[arg(long, default_value_t = 101)]
    mag_steps: usize,
    /// Number of phase samples over [0, 2π), endpoint excluded.
    #[arg(long, default_value_t = 160)]
    phase_steps: usize,
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DetectorArgs {
    /// Uniform detector efficiency η applied to every outcome.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Uniform mean dark counts d added to every outcome.
    #[arg(long, default_value_t = 0.0)]
    dark: f64,
}

#[derive(Args)]
struct MleArgs {
    #[arg(long, default_value_t = 5000)]
    mle_max_iters: usize,
    /// Projected-gradient convergence tolerance, relative to total counts.
    #[arg(long, default_value_t = 1e-9)]
    mle_tolerance: f64,
    #[arg(long, default_value_t = 0.5)]
    mle_step_shrink: f64,
    #[arg(long, default_value_t = 1.0)]
    mle_initial_step: f64,
}

impl MleArgs {
    fn to_options(&self) -> MleOptions {
        MleOptions {
            max_iters: self.mle_max_iters,
            gradient_tolerance: self.mle_tolerance,
            step_shrink: self.mle_step_shrink,
            initial_step: self.mle_initial_step,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dim: usize,
    #[command(flatten)]
    source: FiducialSource,
    /// Named test state (psi1, psi2, psi3; dimensions 6 and 15).
    #[arg(long)]
    state: Option<String>,
    /// JSON amplitude file for a custom target state.
    #[arg(long, value_name = "FILE", conflicts_with = "state")]
    state_file: Option<PathBuf>,
    /// Measurement rounds.
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    /// Experimental runs per round (default: 10000·D).
    #[arg(long)]
    shots: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report output path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the simulated counts table as CSV.
    #[arg(long, value_name = "FILE")]
    save_counts: Option<PathBuf>,
    /// Include the per-trial fidelity list in the report.
    #[arg(long)]
    emit_trials: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    mle: MleArgs,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Counts CSV produced by `simulate --save-counts` or external data.
    #[arg(long, value_name = "FILE")]
    counts: PathBuf,
    #[command(flatten)]
    source: FiducialSource,
    /// Named state to score fidelity against.
    #[arg(long)]
    target: Option<String>,
    /// JSON amplitude file for the fidelity target.
    #[arg(long, value_name = "FILE", conflicts_with = "target")]
    target_file: Option<PathBuf>,
    /// Skip the MLE refinement and report the hermitized linear estimate.
    #[arg(long)]
    raw: bool,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    mle: MleArgs,
}

/// Parses a phase given in radians or in `Xpi` notation.
fn parse_phase(text: &str) -> Result<f64> {
    let trimmed = text.trim();
    if let Some(multiple) = trimmed.strip_suffix("pi") {
        let factor: f64 = if multiple.is_empty() {
            1.0
        } else {
            multiple
                .parse()
                .map_err(|_| Error::Config(format!("invalid phase `{trimmed}`")))?
        };
        return Ok(factor * std::f64::consts::PI);
    }
    trimmed
        .parse()
        .map_err(|_| Error::Config(format!("invalid phase `{trimmed}`")))
}

/// Parses `MAG,PHASE` into an [`AlphaParam`].
fn parse_alpha(text: &str) -> Result<AlphaParam> {
    let (mag, phase) = text
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("expected MAG,PHASE, got `{text}`")))?;
    let magnitude: f64 = mag
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid magnitude `{mag}`")))?;
    AlphaParam::new(magnitude, parse_phase(phase)?)
}

/// How an `--alpha` value is turned into a fiducial.
enum AlphaMode {
    /// Reject α whose λ profile goes negative.
    Strict,
    /// Use normalized principal-branch amplitudes everywhere.
    Principal,
}

fn resolve_fiducial(
    source: &FiducialSource,
    dim: usize,
    mode: AlphaMode,
) -> Result<(Fiducial, String)> {
    if let Some(path) = &source.fiducial {
        let f = load_fiducial(path)?;
        if f.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "fiducial file has dimension {}, --dim is {dim}",
                f.dim()
            )));
        }
        return Ok((f, format!("file:{}", path.display())));
    }
    let text = source
        .alpha
        .as_ref()
        .ok_or_else(|| Error::Config("one of --alpha or --fiducial is required".into()))?;
    let alpha = parse_alpha(text)?;
    let f = match mode {
        AlphaMode::Strict => equidistant_fiducial(&alpha, dim)?,
        AlphaMode::Principal => principal_fiducial(&alpha, dim)?,
    };
    Ok((f, format!("alpha:{}", text.trim())))
}

fn resolve_state(
    name: &Option<String>,
    file: &Option<PathBuf>,
    dim: usize,
) -> Result<Option<(TestState, String)>> {
    if let Some(path) = file {
        let amplitudes = load_fiducial(path)?;
        if amplitudes.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state file has dimension {}, --dim is {dim}",
                amplitudes.dim()
            )));
        }
        let label = format!("file:{}", path.display());
        let state = TestState::from_amplitudes(label.clone(), amplitudes.amplitudes().clone())?;
        return Ok(Some((state, label)));
    }
    match name {
        Some(n) => {
            let state = TestState::named(n, dim)?;
            Ok(Some((state, n.clone())))
        }
        None => Ok(None),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Parse { .. }
        | Error::FormatVersion { .. }
        | Error::DuplicateCell { .. }
        | Error::Config(_)
        | Error::UnknownTestState { .. }
        | Error::DimensionTooSmall(_)
        | Error::DimensionMismatch(_)
        | Error::IndexOutOfRange(_)
        | Error::UnnormalizedFiducial { .. }
        | Error::InvalidAlphaRegion { .. }
        | Error::Empty(_)
        | Error::ZeroCounts
        | Error::NonUnitTrace { .. } => EXIT_INVALID_INPUT,
        Error::ZeroMatrix
        | Error::SvdFailure
        | Error::EigenFailure
        | Error::SingularLambdaRatio { .. }
        | Error::NonpositiveExpectedCount { .. }
        | Error::InvalidProbabilities(_)
        | Error::NonFinite(_) => EXIT_NUMERICAL,
    }
}

fn in_thread_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let (fiducial, source) = resolve_fiducial(&args.source, args.dim, AlphaMode::Strict)?;
    let effects = build_povm(&fiducial)?;
    let residual = completeness_residual(&effects)?;
    let cond = condition_number(fiducial.amplitudes(), args.dim)?;
    println!("fiducial:              {source}");
    println!("dimension:             {}", args.dim);
    println!("effects:               {}", effects.len());
    println!("completeness residual: {residual:.3e}");
    if cond.is_finite() {
        println!("condition number:      {cond:.4}");
    } else {
        println!("condition number:      inf (rank-deficient)");
    }
    if residual < CHECK_RESIDUAL_LIMIT {
        println!("check: PASS");
        Ok(EXIT_OK)
    } else {
        println!("check: FAIL (residual ≥ {CHECK_RESIDUAL_LIMIT:.0e})");
        Ok(EXIT_NUMERICAL)
    }
}

fn cmd_scan(args: &ScanArgs) -> Result<()> {
    if args.mag_steps == 0 || args.phase_steps == 0 {
        return Err(Error::Config("scan axes need at least one sample".into()));
    }
    if args.mag_min < 0.0 || args.mag_max < args.mag_min {
        return Err(Error::Config("magnitude range must satisfy 0 ≤ min ≤ max".into()));
    }
    let magnitudes = linspace(args.mag_min, args.mag_max, args.mag_steps);
    // Phase endpoint excluded: 2π is the same fiducial as 0.
    let phase_step = 2.0 * std::f64::consts::PI / args.phase_steps as f64;
    let phases: Vec<f64> = (0..args.phase_steps).map(|k| k as f64 * phase_step).collect();
    let grid = in_thread_pool(args.threads, || scan_grid(args.dim, &magnitudes, &phases))??;
    save_grid(&grid, &args.out)?;
    let finite: Vec<f64> = grid.values.iter().copied().filter(|v| v.is_finite()).collect();
    let low = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let high = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "scan: D={} grid {}×{} → {} ({} finite cells, log10 range [{:.3}, {:.3}])",
        args.dim,
        args.mag_steps,
        args.phase_steps,
        args.out.display(),
        finite.len(),
        low,
        high
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn config_echo(
    dim: usize,
    fiducial_source: String,
    state: Option<String>,
    rounds: Option<u64>,
    shots: Option<u64>,
    trials: Option<u64>,
    seed: Option<u64>,
    raw: bool,
    detector: &DetectorArgs,
    mle: &MleOptions,
) -> ConfigEcho {
    ConfigEcho {
        dim,
        s_max: s_max(dim),
        fiducial_source,
        state,
        rounds,
        shots_per_round: shots,
        mc_trials: trials,
        seed,
        raw,
        detector_efficiency: detector.eta,
        detector_dark: detector.dark,
        mle_max_iters: mle.max_iters as u64,
        mle_gradient_tolerance: mle.gradient_tolerance,
        mle_step_shrink: mle.step_shrink,
        mle_initial_step: mle.initial_step,
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let (fiducial, fiducial_label) =
        resolve_fiducial(&args.source, args.dim, AlphaMode::Principal)?;
    let (target, state_label) = resolve_state(&args.state, &args.state_file, args.dim)?
        .ok_or_else(|| Error::Config("one of --state or --state-file is required".into()))?;
    let shots = args.shots.unwrap_or(10_000 * args.dim as u64);
    if args.rounds == 0 || shots == 0 || args.trials == 0 {
        return Err(Error::Config("rounds, shots and trials must be positive".into()));
    }
    let mle_opts = args.mle.to_options();

    let effects = build_povm(&fiducial)?;
    let det = DetectorModel::uniform(effects.len(), args.detector.eta, args.detector.dark)?;
    let op = InversionOperator::build(&fiducial)?;

    let (counts, report_rho, mc) = in_thread_pool(args.threads, || -> Result<_> {
        let counts = simulate_counts(&target.density(), &effects, args.rounds, shots, args.seed)?;
        let (report_rho, _) =
            reconstruct_density(counts.averaged(), &op, &effects, &det, &mle_opts)?;
        let mc_config = MonteCarloConfig {
            trials: args.trials,
            seed: args.seed,
            mle: mle_opts.clone(),
            skip_mle: false,
        };
        let mc = monte_carlo_fidelity(&counts, &target, &op, &effects, &det, &mc_config)?;
        Ok((counts, report_rho, mc))
    })??;

    if let Some(path) = &args.save_counts {
        save_counts(&counts, path)?;
    }

    let min_eigenvalue = *hermitian_eigenvalues(&report_rho)?
        .first()
        .expect("non-empty spectrum");
    let mut warnings = Vec::new();
    let failed = mc.converged.iter().filter(|c| !**c).count();
    if failed > 0 {
        warnings.push(format!("{failed} of {} trials did not converge", mc.trials));
    }

    let mut report = ReportFile {
        kind: "simulate".into(),
        config: config_echo(
            args.dim,
            fiducial_label,
            Some(state_label),
            Some(args.rounds as u64),
            Some(shots),
            Some(args.trials as u64),
            Some(args.seed),
            false,
            &args.detector,
            &mle_opts,
        ),
        condition_number: op.cond(),
        density_re: Vec::new(),
        density_im: Vec::new(),
        min_eigenvalue,
        fidelity: Some(FidelityBlock {
            target: target.name().to_string(),
            mean: mc.mean,
            sigma: mc.sigma,
            interval: mc.interval,
            trial1: mc.fidelities[0],
        }),
        trial_fidelities: if args.emit_trials { mc.fidelities.clone() } else { Vec::new() },
        trial_converged: if args.emit_trials { mc.converged.clone() } else { Vec::new() },
        warnings,
    };
    report.set_density_matrix(&report_rho);
    save_report(&report, &args.out)?;
    println!(
        "simulate: D={} state={} trials={} fidelity {:.6} ± {:.6} (5σ) → {}",
        args.dim,
        target.name(),
        mc.trials,
        mc.mean,
        5.0 * mc.sigma,
        args.out.display()
    );
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let counts = load_counts(&args.counts)?;
    let dim = counts.dim();
    let (fiducial, fiducial_label) = resolve_fiducial(&args.source, dim, AlphaMode::Principal)?;
    let target = resolve_state(&args.target, &args.target_file, dim)?;
    let mle_opts = args.mle.to_options();

    let effects = build_povm(&fiducial)?;
    let det = DetectorModel::uniform(effects.len(), args.detector.eta, args.detector.dark)?;
    let op = InversionOperator::build(&fiducial)?;
    let probs = counts_to_prob_matrix(&counts)?;

    let mut warnings = Vec::new();
    let rho = if args.raw {
        let raw = linear_invert(&probs, &op)?.hermitian_part()?;
        let min_eig = *hermitian_eigenvalues(&raw)?.first().expect("spectrum");
        if min_eig < -1e-10 {
            warnings.push(format!(
                "raw linear estimate is not PSD: min eigenvalue {min_eig:.3e}"
            ));
        }
        raw
    } else {
        let (rho, converged) =
            reconstruct_density(counts.averaged(), &op, &effects, &det, &mle_opts)?;
        if !converged {
            warnings.push("MLE did not meet the gradient tolerance".into());
        }
        rho
    };

    let min_eigenvalue = *hermitian_eigenvalues(&rho)?.first().expect("spectrum");
    let fidelity_block = match &target {
        Some((state, label)) => {
            // The MLE output is already unit trace; only the raw linear
            // estimate needs normalizing before the overlap is taken.
            let scored = if args.raw {
                rho.scale(crate::C64::new(1.0 / rho.trace()?.re, 0.0))
            } else {
                rho.clone()
            };
            let f = fidelity(&scored, state.amplitudes())?;
            Some(FidelityBlock {
                target: label.clone(),
                mean: f,
                sigma: 0.0,
                interval: (f, f),
                trial1: f,
            })
        }
        None => None,
    };

    let mut report = ReportFile {
        kind: "reconstruct".into(),
        config: config_echo(
            dim,
            fiducial_label,
            target.as_ref().map(|(_, label)| label.clone()),
            Some(counts.rounds().len() as u64),
            None,
            None,
            None,
            args.raw,
            &args.detector,
            &mle_opts,
        ),
        condition_number: op.cond(),
        density_re: Vec::new(),
        density_im: Vec::new(),
        min_eigenvalue,
        fidelity: fidelity_block,
        trial_fidelities: Vec::new(),
        trial_converged: Vec::new(),
        warnings,
    };
    report.set_density_matrix(&rho);
    save_report(&report, &args.out)?;
    match &report.fidelity {
        Some(f) => println!(
            "reconstruct: D={dim} fidelity {:.6} vs {} (min eig {:.3e}) → {}",
            f.mean,
            f.target,
            min_eigenvalue,
            args.out.display()
        ),
        None => println!(
            "reconstruct: D={dim} min eig {:.3e} → {}",
            min_eigenvalue,
            args.out.display()
        ),
    }
    Ok(())
}

/// Entry point used by the binary: parses `std::env::args`.
pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Parses and executes an argument list; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version through this path.
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Scan(args) => cmd_scan(args).map(|()| EXIT_OK),
        Command::Simulate(args) => cmd_simulate(args).map(|()| EXIT_OK),
        Command::Reconstruct(args) => cmd_reconstruct(args).map(|()| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// Writes a fiducial JSON for a given α; shared by examples and tests.
pub fn write_fiducial_for_alpha(
    alpha_text: &str,
    dim: usize,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let alpha = parse_alpha(alpha_text)?;
    let profile = lambda_profile(&alpha, dim)?;
    let fiducial = if profile.valid {
        equidistant_fiducial(&alpha, dim)?
    } else {
        principal_fiducial(&alpha, dim)?
    };
    save_fiducial(&fiducial, path)
}
