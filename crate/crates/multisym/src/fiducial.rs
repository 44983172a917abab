//! The equidistant fiducial family and condition-number-driven design.
//!
//! A single complex parameter α = |α|e^{iθ} defines the candidate fiducial
//!
//! |α₀(α)⟩ = Σ_k √(λ_k(α)/D)|k⟩,
//! λ_k(α) = 1 − |α|·sin((kπ + (D−1)θ)/D) / sin((kπ − θ)/D),
//!
//! and Σ_k λ_k = D identically. Where every λ_k ≥ 0 this is a normalized
//! real-amplitude state; elsewhere the principal branch of the square root
//! yields imaginary components and an unnormalized vector. The inversion
//! stability at a fiducial is the condition number of 𝒢, which is
//! invariant under scaling of the amplitude vector, so condition-number
//! scans remain meaningful over the whole α plane while the strict
//! tomography pipeline only accepts the valid region.
//!
//! The ratio in λ_k has removable 0/0 points at θ ∈ {0, π} (for the k
//! aligned with the singular arc), where the analytic limit
//! −(D−1)·cos θ of the ratio is used; evaluating the formula literally
//! there would produce NaN.

use rand::Rng;
use rayon::prelude::*;

use crate::inversion::big_g_from_amplitudes;
use crate::linalg::{self, ComplexVector, C64};
use crate::povm::Fiducial;
use crate::simulator::search_rng;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Tolerance below which a λ_k is treated as zero rather than negative.
pub const LAMBDA_NEG_TOL: f64 = 1e-9;

/// The single complex parameter of the equidistant family, stored as
/// magnitude and phase with the phase reduced to [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam {
    magnitude: f64,
    phase: f64,
}

impl AlphaParam {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !magnitude.is_finite() || !phase.is_finite() {
            return Err(Error::NonFinite("alpha parameter".into()));
        }
        if magnitude < 0.0 {
            return Err(Error::Config(format!(
                "alpha magnitude must be ≥ 0, got {magnitude}"
            )));
        }
        Ok(Self {
            magnitude,
            phase: phase.rem_euclid(TWO_PI),
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Phase in [0, 2π).
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn to_complex(&self) -> C64 {
        C64::from_polar(self.magnitude, self.phase)
    }
}

/// The λ_k(α) profile for one (α, D) pair.
#[derive(Debug, Clone)]
pub struct LambdaProfile {
    pub dim: usize,
    pub lambdas: Vec<f64>,
    /// True when every λ_k ≥ −[`LAMBDA_NEG_TOL`], i.e. the strict
    /// real-amplitude fiducial exists.
    pub valid: bool,
}

/// Evaluates λ_k(α) for k = 0..D−1.
pub fn lambda_profile(alpha: &AlphaParam, dim: usize) -> Result<LambdaProfile> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let theta = alpha.phase();
    let modulus = alpha.magnitude();
    let d = dim as f64;
    let mut lambdas = Vec::with_capacity(dim);
    for k in 0..dim {
        let kf = k as f64;
        let denom = ((kf * std::f64::consts::PI - theta) / d).sin();
        let numer = ((kf * std::f64::consts::PI + (d - 1.0) * theta) / d).sin();
        let ratio = if denom.abs() < 1e-13 {
            // 0/0 only occurs for θ on the arcs θ ≡ 0 or π; the ratio of
            // derivatives gives the analytic limit −(D−1)·cos θ.
            if numer.abs() > 1e-6 {
                return Err(Error::SingularLambdaRatio {
                    index: k,
                    numerator: numer,
                });
            }
            -(d - 1.0) * theta.cos()
        } else {
            numer / denom
        };
        lambdas.push(1.0 - modulus * ratio);
    }
    let valid = lambdas.iter().all(|l| *l >= -LAMBDA_NEG_TOL);
    Ok(LambdaProfile {
        dim,
        lambdas,
        valid,
    })
}

/// Strict equidistant fiducial: a_k = √(λ_k/D), requiring every
/// λ_k ≥ 0. Errors with [`Error::InvalidAlphaRegion`] otherwise.
pub fn equidistant_fiducial(alpha: &AlphaParam, dim: usize) -> Result<Fiducial> {
    let profile = lambda_profile(alpha, dim)?;
    if !profile.valid {
        let (index, lambda) = profile
            .lambdas
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, l)| (i, *l))
            .unwrap();
        return Err(Error::InvalidAlphaRegion { index, lambda });
    }
    let d = dim as f64;
    let amps: Vec<C64> = profile
        .lambdas
        .iter()
        .map(|l| C64::new((l.max(0.0) / d).sqrt(), 0.0))
        .collect();
    Fiducial::new(ComplexVector::from_vec(amps))
}

/// Principal-branch amplitudes √(λ_k/D) over the whole α plane: purely
/// imaginary where λ_k < 0, with no normalization guarantee. This is the
/// vector condition-number scans are evaluated on.
pub fn complex_amplitudes(alpha: &AlphaParam, dim: usize) -> Result<ComplexVector> {
    let profile = lambda_profile(alpha, dim)?;
    let d = dim as f64;
    let amps: Vec<C64> = profile
        .lambdas
        .iter()
        .map(|l| {
            let scaled = l / d;
            if scaled >= 0.0 {
                C64::new(scaled.sqrt(), 0.0)
            } else {
                C64::new(0.0, (-scaled).sqrt())
            }
        })
        .collect();
    Ok(ComplexVector::from_vec(amps))
}

/// Normalized principal-branch fiducial: [`complex_amplitudes`] rescaled
/// to unit norm. Coincides with [`equidistant_fiducial`] on the valid
/// region (where the amplitudes are already normalized) and extends the
/// family to α values whose λ profile dips negative; the condition number
/// of 𝒢 is unchanged by the rescaling.
pub fn principal_fiducial(alpha: &AlphaParam, dim: usize) -> Result<Fiducial> {
    let amps = complex_amplitudes(alpha, dim)?;
    let norm = amps.norm();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::NonFinite("principal-branch amplitudes".into()));
    }
    Fiducial::new(amps.scale(C64::new(1.0 / norm, 0.0)))
}

/// Condition number of 𝒢 built from an amplitude vector (normalized or
/// not; the unitary factors of the full inversion map cannot change it).
pub fn condition_number(amplitudes: &ComplexVector, dim: usize) -> Result<f64> {
    if amplitudes.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} amplitudes for dimension {dim}",
            amplitudes.len()
        )));
    }
    linalg::cond(&big_g_from_amplitudes(amplitudes))
}

/// A grid of log₁₀ condition numbers over the α plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub dim: usize,
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
    /// Row-major over (magnitude index, phase index); +∞ marks
    /// rank-deficient or failed cells.
    pub values: Vec<f64>,
    /// λ-validity flag per cell, same layout.
    pub validity: Vec<bool>,
}

impl ScanGrid {
    pub fn value(&self, mag_idx: usize, phase_idx: usize) -> f64 {
        self.values[mag_idx * self.phases.len() + phase_idx]
    }

    pub fn is_valid(&self, mag_idx: usize, phase_idx: usize) -> bool {
        self.validity[mag_idx * self.phases.len() + phase_idx]
    }
}

/// Scans log₁₀ C(𝒢(α)) over a magnitude × phase grid using
/// principal-branch amplitudes. Cells are computed in parallel; per-cell
/// failures are recorded as +∞ rather than aborting the scan.
pub fn scan_grid(dim: usize, magnitudes: &[f64], phases: &[f64]) -> Result<ScanGrid> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if magnitudes.is_empty() || phases.is_empty() {
        return Err(Error::Empty("scan axes".into()));
    }
    let cells: Vec<(usize, usize)> = (0..magnitudes.len())
        .flat_map(|i| (0..phases.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(f64, bool)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let cell = (|| -> Result<(f64, bool)> {
                let alpha = AlphaParam::new(magnitudes[i], phases[j])?;
                let profile = lambda_profile(&alpha, dim)?;
                let amps = complex_amplitudes(&alpha, dim)?;
                let cond = condition_number(&amps, dim)?;
                Ok((cond.log10(), profile.valid))
            })();
            cell.unwrap_or((f64::INFINITY, false))
        })
        .collect();
    let values = results.iter().map(|(v, _)| *v).collect();
    let validity = results.iter().map(|(_, ok)| *ok).collect();
    Ok(ScanGrid {
        dim,
        magnitudes: magnitudes.to_vec(),
        phases: phases.to_vec(),
        values,
        validity,
    })
}

/// Evenly spaced samples over [start, end] (inclusive); a single sample
/// collapses to `start`.
pub fn linspace(start: f64, end: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 {
        return vec![start];
    }
    let step = (end - start) / (samples - 1) as f64;
    (0..samples).map(|i| start + step * i as f64).collect()
}

/// Draws random real-amplitude fiducials and returns the one of smallest
/// condition number together with that value. Sampling: squared standard
/// normals normalized to the probability simplex, a_k = √p_k. Each sample
/// uses its own RNG stream derived from (seed, index), so the result does
/// not depend on how the loop is parallelized.
pub fn random_fiducial_search(dim: usize, n_samples: usize, seed: u64) -> Result<(Fiducial, f64)> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if n_samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    let best = (0..n_samples)
        .into_par_iter()
        .map(|idx| {
            let mut rng = search_rng(seed, idx as u64);
            let mut weights: Vec<f64> = (0..dim)
                .map(|_| {
                    // Squared standard normal via Box-Muller.
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let v: f64 = rng.random::<f64>();
                    let g = (-2.0 * u.ln()).sqrt() * (TWO_PI * v).cos();
                    g * g
                })
                .collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let amps =
                ComplexVector::from_vec(weights.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect());
            let cond = condition_number(&amps, dim).unwrap_or(f64::INFINITY);
            (cond, idx, amps)
        })
        .reduce_with(|a, b| {
            // Total order: smaller condition number wins, ties break on
            // the lower sample index so the reduction is deterministic.
            if (b.0, b.1) < (a.0, a.1) {
                b
            } else {
                a
            }
        })
        .expect("n_samples >= 1");
    let fiducial = Fiducial::new(best.2)?;
    Ok((fiducial, best.0))
}
