//! The multiply symmetric state family and its informationally complete POVM.
//!
//! Three unitaries act on a fiducial state |α₀⟩ = Σ_k a_k|k⟩:
//!
//! - the shift X|k⟩ = |k⊕1⟩,
//! - the clock Z|k⟩ = e^{2πik/D}|k⟩,
//! - the phase transform V = diag(1,…,1,−i,…,−i) with κ = ⌊D/2⌋ leading ones.
//!
//! The two-subscript family |α_sj⟩ = V^⌊s/D⌋ X^s Z^j |α₀⟩ with
//! s < s_max and j < D yields the POVM Π_sj = |α_sj⟩⟨α_sj|/K_s, which sums
//! to the identity for any normalized fiducial. s_max is D for odd D and
//! 3D/2 for even D, so the POVM has D² and 3D²/2 outcomes respectively.

use num_complex::Complex;

use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::{Error, Result};

/// Input tolerance on |‖a‖² − 1| for fiducial amplitudes. Renormalization
/// is never silent: inputs outside the tolerance are rejected.
pub const FIDUCIAL_NORM_TOL: f64 = 1e-9;

/// The fiducial state |α₀⟩ generating the measurement family.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiducial {
    dim: usize,
    amplitudes: ComplexVector,
}

impl Fiducial {
    /// Wraps an amplitude vector, requiring Σ_k |a_k|² = 1 within
    /// [`FIDUCIAL_NORM_TOL`].
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if !amplitudes.all_finite() {
            return Err(Error::NonFinite("fiducial amplitudes".into()));
        }
        let deviation = (amplitudes.norm().powi(2) - 1.0).abs();
        if deviation > FIDUCIAL_NORM_TOL {
            return Err(Error::UnnormalizedFiducial { deviation });
        }
        Ok(Self { dim, amplitudes })
    }

    /// Uniform fiducial (1/√D, …, 1/√D). Valid but rank-deficient for
    /// tomography: Z only imprints phases a flat profile cannot reveal.
    pub fn uniform(dim: usize) -> Result<Self> {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::new(ComplexVector::from_vec(vec![a; dim]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes.get(k)
    }
}

/// The three generator matrices for one dimension.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub dim: usize,
    /// Shift operator X.
    pub x: ComplexMatrix,
    /// Clock operator Z.
    pub z: ComplexMatrix,
    /// Phase transform V.
    pub v: ComplexMatrix,
    /// κ = ⌊D/2⌋, the number of +1 entries on the diagonal of V.
    pub kappa: usize,
}

/// Number of +1 diagonal entries of V.
pub fn kappa(dim: usize) -> usize {
    dim / 2
}

/// Builds X, Z and V for dimension `dim`.
pub fn generators(dim: usize) -> Result<GeneratorSet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let mut x = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        x.set((k + 1) % dim, k, C64::ONE);
    }
    let z = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / dim as f64)
        } else {
            C64::ZERO
        }
    });
    let kap = kappa(dim);
    let v = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            C64::ZERO
        } else if i < kap {
            C64::ONE
        } else {
            C64::new(0.0, -1.0)
        }
    });
    Ok(GeneratorSet {
        dim,
        x,
        z,
        v,
        kappa: kap,
    })
}

/// Number of s values: D for odd dimensions, 3D/2 for even ones.
pub fn s_max(dim: usize) -> usize {
    if dim % 2 == 1 {
        dim
    } else {
        3 * dim / 2
    }
}

/// POVM weight K_s.
///
/// Odd dimensions use K_s = D throughout. Even dimensions use 2D on the
/// ranges 0 ≤ s < κ and D ≤ s < D+κ, and D on κ ≤ s < D.
pub fn k_weight(dim: usize, s: usize) -> Result<usize> {
    let smax = s_max(dim);
    if s >= smax {
        return Err(Error::IndexOutOfRange(format!(
            "s = {s} with s_max = {smax} for D = {dim}"
        )));
    }
    if dim % 2 == 1 {
        return Ok(dim);
    }
    let kap = kappa(dim);
    if s < kap || s >= dim {
        Ok(2 * dim)
    } else {
        Ok(dim)
    }
}

/// Diagonal entry v_k^{(s)} = ⟨k|V^⌊s/D⌋|k⟩. Since s < 3D/2 the exponent
/// ⌊s/D⌋ is 0 or 1.
#[inline]
pub(crate) fn v_phase(dim: usize, s: usize, k: usize) -> C64 {
    if s < dim || k < kappa(dim) {
        C64::ONE
    } else {
        C64::new(0.0, -1.0)
    }
}

/// The multiply symmetric state |α_sj⟩ = V^⌊s/D⌋ X^s Z^j |α₀⟩.
///
/// Computed componentwise from
/// |α_sj⟩ = Σ_k a_k · v_{k⊕s}^{(s)} · e^{2πijk/D} |k⊕s⟩.
pub fn ms_state(fiducial: &Fiducial, s: usize, j: usize) -> Result<ComplexVector> {
    let dim = fiducial.dim();
    if s >= s_max(dim) {
        return Err(Error::IndexOutOfRange(format!(
            "s = {s} with s_max = {} for D = {dim}",
            s_max(dim)
        )));
    }
    if j >= dim {
        return Err(Error::IndexOutOfRange(format!("j = {j} for D = {dim}")));
    }
    let mut out = ComplexVector::zeros(dim);
    for k in 0..dim {
        let target = (k + s) % dim;
        let zphase = Complex::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * ((j * k) % dim) as f64 / dim as f64,
        );
        out.set(target, fiducial.amplitude(k) * v_phase(dim, s, target) * zphase);
    }
    Ok(out)
}

/// Shape of the POVM for one dimension: s_max and the weight of each s.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSpec {
    pub dim: usize,
    pub s_max: usize,
    pub weights: Vec<usize>,
}

impl PovmSpec {
    pub fn for_dim(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let smax = s_max(dim);
        let weights = (0..smax).map(|s| k_weight(dim, s)).collect::<Result<_>>()?;
        Ok(Self {
            dim,
            s_max: smax,
            weights,
        })
    }

    /// Total number of effects: D·s_max.
    pub fn outcome_count(&self) -> usize {
        self.dim * self.s_max
    }
}

/// One POVM element Π_sj = |α_sj⟩⟨α_sj| / K_s.
#[derive(Debug, Clone)]
pub struct Effect {
    pub s: usize,
    pub j: usize,
    pub matrix: ComplexMatrix,
}

/// Builds the full POVM for a fiducial, ordered with s outer and j inner.
pub fn build_povm(fiducial: &Fiducial) -> Result<Vec<Effect>> {
    let deviation = (fiducial.amplitudes().norm().powi(2) - 1.0).abs();
    if deviation > FIDUCIAL_NORM_TOL {
        return Err(Error::UnnormalizedFiducial { deviation });
    }
    let dim = fiducial.dim();
    let spec = PovmSpec::for_dim(dim)?;
    let mut effects = Vec::with_capacity(spec.outcome_count());
    for s in 0..spec.s_max {
        let weight = C64::new(1.0 / spec.weights[s] as f64, 0.0);
        for j in 0..dim {
            let state = ms_state(fiducial, s, j)?;
            let matrix = state.outer(&state).scale(weight);
            effects.push(Effect { s, j, matrix });
        }
    }
    Ok(effects)
}

/// Max-abs entry of (Σ_sj Π_sj − I); zero means an exact POVM.
pub fn completeness_residual(effects: &[Effect]) -> Result<f64> {
    if effects.is_empty() {
        return Err(Error::Empty("effect list".into()));
    }
    let dim = effects[0].matrix.rows();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in effects {
        if e.matrix.rows() != dim || e.matrix.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "effect (s = {}, j = {}) is {}×{}, expected {dim}×{dim}",
                e.s,
                e.j,
                e.matrix.rows(),
                e.matrix.cols()
            )));
        }
        sum = sum.add(&e.matrix)?;
    }
    Ok(sum.sub(&ComplexMatrix::identity(dim))?.max_abs())
}
