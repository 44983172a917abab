//! Photon-counting experiment simulation and Monte Carlo error analysis.
//!
//! The simulated protocol mirrors the laboratory sequence: prepare a test
//! state, measure every POVM outcome for a fixed number of runs per round,
//! repeat over rounds, average the counts, and propagate statistical
//! uncertainty by resampling the averaged counts with Poisson noise. Each
//! Monte Carlo trial reruns the full reconstruction (linear inversion,
//! then maximum likelihood) and scores the fidelity against the target
//! state; the result is reported as mean ± 5σ, for which the probability
//! of a new experiment falling outside the interval is ~10⁻⁶ under
//! normal-distributed fidelities.
//!
//! Per-outcome counts are sampled as independent Poisson variables with
//! mean shots·p_sj, matching the Poisson likelihood used in the
//! refinement step. Trial 1 always uses the averaged counts unperturbed;
//! trials 2..N add fresh Poisson noise. All randomness is drawn from
//! per-unit ChaCha streams derived from (master seed, unit index), so
//! results are independent of worker-thread count.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::inversion::{linear_invert, InversionOperator, ProbMatrix};
use crate::linalg::{psd_project, ComplexMatrix, ComplexVector, OperatorStack, C64};
use crate::mle::{mle_estimate, DetectorModel, MleOptions};
use crate::povm::{s_max, Effect};
use crate::{Error, Result};

/// RNG stream domains; combined with a unit index into a ChaCha stream id
/// so no two purposes ever share a stream for the same master seed.
const STREAM_DOMAIN_ROUNDS: u64 = 1;
const STREAM_DOMAIN_TRIALS: u64 = 2;
const STREAM_DOMAIN_SEARCH: u64 = 3;

pub(crate) fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}

pub(crate) fn search_rng(seed: u64, index: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_DOMAIN_SEARCH, index)
}

/// A pure target state for simulated experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct TestState {
    name: String,
    dim: usize,
    amplitudes: ComplexVector,
}

impl TestState {
    /// One of the named benchmark states. `psi1` is the uniform
    /// superposition, `psi2` a basis state (|0⟩ in D=6, |7⟩ in D=15) and
    /// `psi3` a superposition with several distinct phases. Only
    /// dimensions 6 and 15 carry named states.
    pub fn named(name: &str, dim: usize) -> Result<Self> {
        let unknown = || Error::UnknownTestState {
            name: name.into(),
            dim,
        };
        let amplitudes = match (name, dim) {
            ("psi1", 6) | ("psi1", 15) => uniform_amplitudes(dim),
            ("psi2", 6) => basis_amplitudes(6, 0),
            ("psi2", 15) => basis_amplitudes(15, 7),
            ("psi3", 6) => {
                let s = 1.0 / 6f64.sqrt();
                let p8 = Complex::from_polar(s, -std::f64::consts::PI / 8.0);
                let p4 = Complex::from_polar(s, -std::f64::consts::PI / 4.0);
                let one = C64::new(s, 0.0);
                ComplexVector::from_vec(vec![one, p8, one, p8, p4, p8])
            }
            ("psi3", 15) => {
                let s = 1.0 / 15f64.sqrt();
                let phase = |denom: f64| Complex::from_polar(s, -std::f64::consts::PI / denom);
                let one = C64::new(s, 0.0);
                let p10 = phase(10.0);
                let p9 = phase(9.0);
                let p8 = phase(8.0);
                let p7 = phase(7.0);
                let p6 = phase(6.0);
                ComplexVector::from_vec(vec![
                    one, p10, p9, p10, p7, one, p8, p6, one, p10, p7, p8, p10, p6, one,
                ])
            }
            _ => return Err(unknown()),
        };
        Ok(Self {
            name: name.to_string(),
            dim,
            amplitudes,
        })
    }

    /// A custom target from explicit amplitudes (must be unit norm).
    pub fn from_amplitudes(name: impl Into<String>, amplitudes: ComplexVector) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if !amplitudes.all_finite() {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > 1e-9 {
            return Err(Error::UnnormalizedFiducial { deviation });
        }
        Ok(Self {
            name: name.into(),
            dim,
            amplitudes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Density matrix |Ψ⟩⟨Ψ|.
    pub fn density(&self) -> ComplexMatrix {
        self.amplitudes.outer(&self.amplitudes)
    }
}

fn uniform_amplitudes(dim: usize) -> ComplexVector {
    let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    ComplexVector::from_vec(vec![a; dim])
}

fn basis_amplitudes(dim: usize, k: usize) -> ComplexVector {
    ComplexVector::basis(dim, k)
}

/// Convenience wrapper for [`TestState::named`].
pub fn test_state(name: &str, dim: usize) -> Result<TestState> {
    TestState::named(name, dim)
}

/// Raw per-outcome counts, per measurement round, plus their average.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    dim: usize,
    s_max: usize,
    // Each round is a flattened s_max×D matrix of counts, (s, j) at s*dim+j.
    rounds: Vec<Vec<u64>>,
    averaged: Vec<f64>,
}

impl CountsTable {
    /// Builds a table from per-round count matrices; the average is the
    /// entrywise arithmetic mean.
    pub fn from_rounds(dim: usize, s_max_count: usize, rounds: Vec<Vec<u64>>) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::Empty("counts rounds".into()));
        }
        let cells = dim * s_max_count;
        for (r, round) in rounds.iter().enumerate() {
            if round.len() != cells {
                return Err(Error::DimensionMismatch(format!(
                    "round {r} has {} cells, expected {cells}",
                    round.len()
                )));
            }
        }
        let mut averaged = vec![0.0; cells];
        for round in &rounds {
            for (a, n) in averaged.iter_mut().zip(round) {
                *a += *n as f64;
            }
        }
        let denom = rounds.len() as f64;
        for a in &mut averaged {
            *a /= denom;
        }
        Ok(Self {
            dim,
            s_max: s_max_count,
            rounds,
            averaged,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn rounds(&self) -> &[Vec<u64>] {
        &self.rounds
    }

    pub fn averaged(&self) -> &[f64] {
        &self.averaged
    }

    pub fn total_averaged(&self) -> f64 {
        self.averaged.iter().sum()
    }
}

/// Entrywise arithmetic mean of per-round count matrices.
pub fn average_counts(dim: usize, s_max_count: usize, rounds: Vec<Vec<u64>>) -> Result<CountsTable> {
    CountsTable::from_rounds(dim, s_max_count, rounds)
}

/// Outcome probabilities p_sj = tr(ρ Π_sj) for a density matrix.
///
/// Evaluated through the vectorized operator stack; values in
/// [−1e−12, 0) from rounding are clipped to zero.
pub fn forward_probs(rho: &ComplexMatrix, effects: &[Effect]) -> Result<ProbMatrix> {
    if effects.is_empty() {
        return Err(Error::Empty("effect list".into()));
    }
    let dim = effects[0].matrix.rows();
    let trace = rho.trace()?.re;
    if (trace - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitTrace { trace });
    }
    let stack = OperatorStack::new(&effects.iter().map(|e| &e.matrix).collect::<Vec<_>>())?;
    let raw = stack.expectations(rho)?;
    let smax = s_max(dim);
    let mut entries = vec![0.0; smax * dim];
    for (e, p) in effects.iter().zip(raw) {
        if p < -1e-12 {
            return Err(Error::InvalidProbabilities(format!(
                "negative probability {p:.3e} at (s = {}, j = {}); state is not PSD",
                e.s, e.j
            )));
        }
        entries[e.s * dim + e.j] = p.max(0.0);
    }
    ProbMatrix::new(dim, smax, entries)
}

/// Draws one round of counts: n_sj ~ Poisson(shots · p_sj), independently
/// per outcome.
pub fn sample_round_counts(
    probs: &ProbMatrix,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(probs.entries().len());
    for &p in probs.entries() {
        out.push(sample_poisson(shots as f64 * p, rng));
    }
    Ok(out)
}

fn sample_poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Simulates the full counting stage: `rounds` rounds of `shots` runs each.
pub fn simulate_counts(
    rho: &ComplexMatrix,
    effects: &[Effect],
    rounds: usize,
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    if rounds == 0 {
        return Err(Error::Config("at least one round is required".into()));
    }
    let probs = forward_probs(rho, effects)?;
    let dim = probs.dim();
    let mut all = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let mut rng = stream_rng(seed, STREAM_DOMAIN_ROUNDS, r as u64);
        all.push(sample_round_counts(&probs, shots, &mut rng)?);
    }
    CountsTable::from_rounds(dim, probs.s_max(), all)
}

/// Fidelity ⟨Ψ|ρ|Ψ⟩ of a density matrix against a pure target, clipped
/// to [0, 1].
pub fn fidelity(rho: &ComplexMatrix, psi: &ComplexVector) -> Result<f64> {
    if rho.rows() != psi.len() || rho.cols() != psi.len() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}×{} state with length-{} vector",
            rho.rows(),
            rho.cols(),
            psi.len()
        )));
    }
    let rho_psi = rho.matvec(psi)?;
    let value = psi.inner(&rho_psi)?.re;
    Ok(value.clamp(0.0, 1.0))
}

/// Result of one Monte Carlo error-propagation run.
#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub trials: usize,
    /// Fidelity of every trial, in trial order; entry 0 is the noiseless
    /// reconstruction from the averaged counts.
    pub fidelities: Vec<f64>,
    /// Per-trial MLE convergence flags, same order.
    pub converged: Vec<bool>,
    pub mean: f64,
    pub sigma: f64,
    /// (mean − 5σ, mean + 5σ).
    pub interval: (f64, f64),
}

/// Settings for [`monte_carlo_fidelity`].
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    pub mle: MleOptions,
    /// Skip the MLE refinement and score the PSD-projected linear
    /// estimate instead. Intended for diagnostics only.
    pub skip_mle: bool,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            mle: MleOptions::default(),
            skip_mle: false,
        }
    }
}

/// One reconstruction: counts → probabilities → linear inversion → MLE.
///
/// Returns the estimated density matrix and the MLE convergence flag.
/// The MLE is warm-started from the PSD projection of the hermitized
/// linear estimate, rescaled to the total count sum.
pub fn reconstruct_density(
    counts: &[f64],
    op: &InversionOperator,
    effects: &[Effect],
    det: &DetectorModel,
    opts: &MleOptions,
) -> Result<(ComplexMatrix, bool)> {
    let init = linear_estimate_init(counts, op)?;
    let result = mle_estimate(counts, effects, det, &init, opts)?;
    Ok((result.rho, result.converged))
}

/// PSD-projected, hermitized linear-inversion estimate scaled to the
/// ensemble size Σn — the standard warm start for the MLE.
pub fn linear_estimate_init(counts: &[f64], op: &InversionOperator) -> Result<ComplexMatrix> {
    let probs = ProbMatrix::from_weights(op.dim(), op.s_max(), counts)?;
    let rho_lin = linear_invert(&probs, op)?;
    let projected = psd_project(&rho_lin.hermitian_part()?)?;
    let total: f64 = counts.iter().sum();
    let tr = projected.trace()?.re;
    if tr <= f64::EPSILON * total {
        // Degenerate projection; fall back to a flat state at full scale.
        return Ok(ComplexMatrix::maximally_mixed(op.dim())
            .scale(C64::new(total, 0.0)));
    }
    Ok(projected.scale(C64::new(total / tr, 0.0)))
}

/// Monte Carlo error estimation on an averaged counts table.
///
/// Trial 1 reconstructs from the averaged counts n̄ unperturbed; trials
/// 2..N draw n_sj ~ Poisson(n̄_sj) independently. Every trial runs the
/// full pipeline and scores F = ⟨Ψ|ρ|Ψ⟩. Trials run in parallel with
/// per-trial RNG streams, so the report is identical for any thread count.
pub fn monte_carlo_fidelity(
    counts: &CountsTable,
    target: &TestState,
    op: &InversionOperator,
    effects: &[Effect],
    det: &DetectorModel,
    config: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    if config.trials == 0 {
        return Err(Error::Config("at least one Monte Carlo trial is required".into()));
    }
    if target.dim() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target dimension {} does not match operator dimension {}",
            target.dim(),
            op.dim()
        )));
    }
    let averaged = counts.averaged().to_vec();
    let psi = target.amplitudes();

    let run_trial = |mu: usize| -> Result<(f64, bool)> {
        let trial_counts: Vec<f64> = if mu == 0 {
            averaged.clone()
        } else {
            let mut rng = stream_rng(config.seed, STREAM_DOMAIN_TRIALS, mu as u64);
            averaged
                .iter()
                .map(|n| sample_poisson(*n, &mut rng) as f64)
                .collect()
        };
        let (rho, converged) = if config.skip_mle {
            let probs = ProbMatrix::from_weights(op.dim(), op.s_max(), &trial_counts)?;
            let rho_lin = linear_invert(&probs, op)?;
            let projected = psd_project(&rho_lin.hermitian_part()?)?;
            let tr = projected.trace()?.re;
            (projected.scale(C64::new(1.0 / tr, 0.0)), true)
        } else {
            reconstruct_density(&trial_counts, op, effects, det, &config.mle)?
        };
        Ok((fidelity(&rho, psi)?, converged))
    };

    let results: Vec<Result<(f64, bool)>> =
        (0..config.trials).into_par_iter().map(run_trial).collect();

    let mut fidelities = Vec::with_capacity(config.trials);
    let mut converged = Vec::with_capacity(config.trials);
    for r in results {
        // A failed trial (e.g. an all-zero Poisson draw) is recorded as
        // non-converged with fidelity 0 rather than aborting the batch.
        match r {
            Ok((f, c)) => {
                fidelities.push(f);
                converged.push(c);
            }
            Err(_) => {
                fidelities.push(0.0);
                converged.push(false);
            }
        }
    }

    let mean = fidelities.iter().sum::<f64>() / fidelities.len() as f64;
    let sigma = if fidelities.len() < 2 {
        0.0
    } else {
        let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>()
            / (fidelities.len() - 1) as f64;
        var.sqrt()
    };
    Ok(MonteCarloReport {
        trials: config.trials,
        fidelities,
        converged,
        mean,
        sigma,
        interval: (mean - 5.0 * sigma, mean + 5.0 * sigma),
    })
}

/// Random density matrix with simplex-uniform eigenvalues and Haar-like
/// eigenvectors; handy for round-trip tests and benchmarks.
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    // Eigenvalues: normalized exponentials (flat Dirichlet).
    let mut eigs: Vec<f64> = (0..dim)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = eigs.iter().sum();
    for e in &mut eigs {
        *e /= total;
    }
    // Eigenvectors: orthonormal basis of a random Hermitian matrix.
    let gauss = random_hermitian(dim, rng);
    let eig = nalgebra::linalg::SymmetricEigen::new(gauss.to_nalgebra());
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for (k, lambda) in eigs.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                let add = C64::new(*lambda, 0.0) * col[i] * col[j].conj();
                rho.set(i, j, rho.get(i, j) + add);
            }
        }
    }
    rho
}

fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    g.hermitian_part().expect("square")
}
