//! Explicit linear reconstruction of ρ from measured probabilities.
//!
//! The probability matrix P (s rows, j columns) is right-Fourier
//! transformed, after which column k of P·F couples only to the k-th
//! diagonal of ρ through the block 𝒢_k built from ancillary ξ vectors:
//!
//! ξ_sk = (X^{s−k}|α₀⟩) ∘ (X^s|α₀⟩)* ∘ (X^{−k}v⃗_s) ∘ v⃗_s*,
//!
//! with ∘ the entrywise product and v⃗_s the diagonal of V^⌊s/D⌋. Stacking
//! the blocks into 𝒢 = Σ_m |m⟩⟨m|⊗𝒢_m, the full inversion is the fixed
//! linear map
//!
//! vec(ρ) = S_swap · 𝓧 · 𝒢⁺ · (F ⊗ I_{s_max}) · vec(P),
//!
//! where 𝒢⁺ is the Moore–Penrose pseudoinverse, 𝓧 = Σ_m X^m⊗|m⟩⟨m|
//! re-aligns the diagonals, and S_swap reorders tensor factors. The map is
//! precomputed once per fiducial ([`InversionOperator`]) because Monte
//! Carlo analysis applies it thousands of times.
//!
//! The output of [`linear_invert`] is Hermitian up to numerical noise on
//! exact data but is *not* guaranteed positive semidefinite on noisy
//! counts; positivity is restored downstream by maximum likelihood.

use crate::linalg::{
    self, fourier, pinv, swap_matrix, unvec, vec_mat, ComplexMatrix, ComplexVector, C64,
};
use crate::povm::{k_weight, s_max, v_phase, Fiducial};
use crate::simulator::CountsTable;
use crate::{Error, Result};

/// Normalized outcome probabilities, shaped s_max × D.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    dim: usize,
    s_max: usize,
    // Row-major: entry (s, j) at s*dim + j.
    entries: Vec<f64>,
}

impl ProbMatrix {
    /// Validates shape, nonnegativity and normalization (Σ = 1 within 1e−9).
    pub fn new(dim: usize, s_max_count: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * s_max_count {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for shape {s_max_count}×{dim}",
                entries.len()
            )));
        }
        let mut total = 0.0;
        for (i, p) in entries.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidProbabilities(format!(
                    "entry {i} is {p}; probabilities must be finite and ≥ 0"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            dim,
            s_max: s_max_count,
            entries,
        })
    }

    /// Normalizes a raw nonnegative weight table (e.g. counts) into
    /// probabilities.
    pub fn from_weights(dim: usize, s_max_count: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != dim * s_max_count {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for shape {s_max_count}×{dim}",
                weights.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroCounts);
        }
        let entries = weights.iter().map(|w| w / total).collect();
        Self::new(dim, s_max_count, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn get(&self, s: usize, j: usize) -> f64 {
        self.entries[s * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.s_max, self.dim, |s, j| C64::new(self.get(s, j), 0.0))
    }
}

/// Converts a counts table into a probability matrix,
/// p_sj = n̄_sj / Σ n̄.
pub fn counts_to_prob_matrix(counts: &CountsTable) -> Result<ProbMatrix> {
    ProbMatrix::from_weights(counts.dim(), counts.s_max(), counts.averaged())
}

#[inline]
fn wrap(value: i64, dim: usize) -> usize {
    value.rem_euclid(dim as i64) as usize
}

fn xi_from_amplitudes(amps: &ComplexVector, s: usize, k: usize) -> ComplexVector {
    let dim = amps.len();
    let mut out = ComplexVector::zeros(dim);
    for q in 0..dim as i64 {
        let a1 = amps.get(wrap(q - s as i64 + k as i64, dim));
        let a2 = amps.get(wrap(q - s as i64, dim));
        let v1 = v_phase(dim, s, wrap(q + k as i64, dim));
        let v2 = v_phase(dim, s, q as usize);
        out.set(q as usize, a1 * a2.conj() * v1 * v2.conj());
    }
    out
}

/// Ancillary vector ξ_sk with entries
/// a_{q⊖s⊕k} · a*_{q⊖s} · v^{(s)}_{q⊕k} · v^{(s)*}_q.
///
/// Operator powers are taken mod D throughout, so s ≥ D (even-dimension
/// rows) shifts exactly like s mod D while still selecting the V branch.
pub fn xi_vector(fiducial: &Fiducial, s: usize, k: usize) -> Result<ComplexVector> {
    let dim = fiducial.dim();
    if s >= s_max(dim) {
        return Err(Error::IndexOutOfRange(format!(
            "s = {s} with s_max = {} for D = {dim}",
            s_max(dim)
        )));
    }
    if k >= dim {
        return Err(Error::IndexOutOfRange(format!("k = {k} for D = {dim}")));
    }
    Ok(xi_from_amplitudes(fiducial.amplitudes(), s, k))
}

fn block_g_from_amplitudes(amps: &ComplexVector, m: usize) -> ComplexMatrix {
    let dim = amps.len();
    let smax = s_max(dim);
    let sqrt_d = (dim as f64).sqrt();
    ComplexMatrix::from_fn(smax, dim, |s, q| {
        let xi = xi_from_amplitudes(amps, s, m);
        let weight = sqrt_d / k_weight(dim, s).expect("s < s_max") as f64;
        xi.get(q).conj() * weight
    })
}

/// 𝒢 assembled from raw amplitudes; used by condition-number scans where
/// the principal-branch amplitude vector need not be normalized.
pub fn big_g_from_amplitudes(amps: &ComplexVector) -> ComplexMatrix {
    let dim = amps.len();
    let smax = s_max(dim);
    let sqrt_d = (dim as f64).sqrt();
    let mut g = ComplexMatrix::zeros(dim * smax, dim * dim);
    for m in 0..dim {
        for s in 0..smax {
            let weight = sqrt_d / k_weight(dim, s).expect("s < s_max") as f64;
            let xi = xi_from_amplitudes(amps, s, m);
            for q in 0..dim {
                g.set(m * smax + s, m * dim + q, xi.get(q).conj() * weight);
            }
        }
    }
    g
}

/// The block-diagonal matrix 𝒢 = Σ_m |m⟩⟨m|⊗𝒢_m of shape
/// (D·s_max) × D², with 𝒢_m[s][q] = (√D/K_s)·conj(ξ_sm[q]).
pub fn big_g(fiducial: &Fiducial) -> ComplexMatrix {
    big_g_from_amplitudes(fiducial.amplitudes())
}

/// 𝓧 = Σ_m X^m ⊗ |m⟩⟨m|: maps |j⟩⊗|m⟩ to |j⊕m⟩⊗|m⟩.
fn diagonal_alignment(dim: usize) -> ComplexMatrix {
    let d2 = dim * dim;
    let mut x = ComplexMatrix::zeros(d2, d2);
    for j in 0..dim {
        for m in 0..dim {
            x.set(((j + m) % dim) * dim + m, j * dim + m, C64::ONE);
        }
    }
    x
}

/// The precomputed linear-inversion map for one fiducial.
#[derive(Debug, Clone)]
pub struct InversionOperator {
    fiducial: Fiducial,
    g: ComplexMatrix,
    g_pinv: ComplexMatrix,
    recon_map: ComplexMatrix,
    cond: f64,
}

impl InversionOperator {
    /// Builds 𝒢, its pseudoinverse and the full reconstruction map with
    /// the default pseudoinverse cutoff.
    pub fn build(fiducial: &Fiducial) -> Result<Self> {
        Self::build_with_tolerance(fiducial, None)
    }

    /// Same as [`build`](Self::build) with an explicit relative cutoff for
    /// singular values of 𝒢, useful near rank-deficient fiducials.
    pub fn build_with_tolerance(fiducial: &Fiducial, pinv_tol: Option<f64>) -> Result<Self> {
        let dim = fiducial.dim();
        let smax = s_max(dim);
        let g = big_g(fiducial);
        let g_pinv = pinv(&g, pinv_tol)?;
        let cond = linalg::cond(&g)?;
        let f_kron_i = fourier(dim)?.kron(&ComplexMatrix::identity(smax));
        let recon_map = swap_matrix(dim)?
            .matmul(&diagonal_alignment(dim))?
            .matmul(&g_pinv)?
            .matmul(&f_kron_i)?;
        Ok(Self {
            fiducial: fiducial.clone(),
            g,
            g_pinv,
            recon_map,
            cond,
        })
    }

    pub fn fiducial(&self) -> &Fiducial {
        &self.fiducial
    }

    pub fn dim(&self) -> usize {
        self.fiducial.dim()
    }

    pub fn s_max(&self) -> usize {
        s_max(self.dim())
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn g_pinv(&self) -> &ComplexMatrix {
        &self.g_pinv
    }

    /// The full map S_swap·𝓧·𝒢⁺·(F⊗I) from vec(P) to vec(ρ).
    pub fn recon_map(&self) -> &ComplexMatrix {
        &self.recon_map
    }

    /// Condition number of 𝒢 (infinite for rank-deficient fiducials).
    pub fn cond(&self) -> f64 {
        self.cond
    }
}

/// Applies the precomputed inversion map: unvec(recon_map · vec(P)).
///
/// The result is not normalized or positivity-corrected in any way.
pub fn linear_invert(probs: &ProbMatrix, op: &InversionOperator) -> Result<ComplexMatrix> {
    let dim = op.dim();
    if probs.dim() != dim || probs.s_max() != op.s_max() {
        return Err(Error::DimensionMismatch(format!(
            "probability matrix {}×{} does not match operator {}×{}",
            probs.s_max(),
            probs.dim(),
            op.s_max(),
            dim
        )));
    }
    let p_vec = vec_mat(&probs.to_complex())?;
    let rho_vec = op.recon_map().matvec(&p_vec)?;
    unvec(&rho_vec, dim, dim)
}

/// Reconstruction through the per-diagonal blocks: each diagonal of ρ is
/// recovered as 𝒢_m⁺ applied to column m of P·F, independently of the
/// monolithic pipeline. Kept as a cross-check of [`linear_invert`].
pub fn linear_invert_blockwise(probs: &ProbMatrix, fiducial: &Fiducial) -> Result<ComplexMatrix> {
    let dim = fiducial.dim();
    if probs.dim() != dim || probs.s_max() != s_max(dim) {
        return Err(Error::DimensionMismatch(format!(
            "probability matrix {}×{} does not match fiducial dimension {dim}",
            probs.s_max(),
            probs.dim(),
        )));
    }
    let p_tilde = probs.to_complex().matmul(&fourier(dim)?)?;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for m in 0..dim {
        let block = block_g_from_amplitudes(fiducial.amplitudes(), m);
        let block_pinv = pinv(&block, None)?;
        let column = ComplexVector::from_vec((0..s_max(dim)).map(|s| p_tilde.get(s, m)).collect());
        let diag = block_pinv.matvec(&column)?;
        for q in 0..dim {
            rho.set((q + m) % dim, q, diag.get(q));
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{build_povm, Effect};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_fiducial(dim: usize, seed: u64) -> Fiducial {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut amps: Vec<C64> = (0..dim).map(|_| C64::new(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Fiducial::new(ComplexVector::from_vec(amps)).unwrap()
    }

    fn random_density(dim: usize, seed: u64) -> ComplexMatrix {
        // Wishart-style mixed state G·G†/tr.
        let mut state = seed.wrapping_mul(0x2545F4914F6CDD1D) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(next(), next()));
        let w = g.matmul(&g.adjoint()).unwrap();
        let tr = w.trace().unwrap().re;
        w.scale(c(1.0 / tr, 0.0))
    }

    /// Brute-force probabilities p_sj = tr(ρ Π_sj) via explicit traces.
    fn exact_probs(rho: &ComplexMatrix, effects: &[Effect], dim: usize) -> ProbMatrix {
        let smax = s_max(dim);
        let mut entries = vec![0.0; smax * dim];
        for e in effects {
            let p = e.matrix.matmul(rho).unwrap().trace().unwrap().re;
            entries[e.s * dim + e.j] = p.max(0.0);
        }
        let total: f64 = entries.iter().sum();
        for p in &mut entries {
            *p /= total;
        }
        ProbMatrix::new(dim, smax, entries).unwrap()
    }

    #[test]
    fn xi_zero_indices_is_abs_squared() {
        let f = random_fiducial(4, 3);
        let xi = xi_vector(&f, 0, 0).unwrap();
        for q in 0..4 {
            assert!((xi.get(q) - c(f.amplitude(q).norm_sqr(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn xi_expansion_d3() {
        // s=1, k=1 for a real fiducial: entry q is a_q · a_{q⊖1}.
        let amps = [0.6f64, 0.48, 0.64];
        let f = Fiducial::new(ComplexVector::from_vec(
            amps.iter().map(|&a| c(a, 0.0)).collect(),
        ))
        .unwrap();
        let xi = xi_vector(&f, 1, 1).unwrap();
        for q in 0..3usize {
            let expected = amps[q] * amps[(q + 2) % 3];
            assert!((xi.get(q) - c(expected, 0.0)).norm() < 1e-14, "q={q}");
        }
    }

    #[test]
    fn xi_odd_dimension_v_factors_trivial() {
        // For odd D every s < D, so both v factors are all-ones and ξ
        // reduces to the two shifted amplitude factors.
        let f = random_fiducial(5, 17);
        for s in 0..5usize {
            for k in 0..5usize {
                let xi = xi_vector(&f, s, k).unwrap();
                for q in 0..5i64 {
                    let expected = f.amplitude(wrap(q - s as i64 + k as i64, 5))
                        * f.amplitude(wrap(q - s as i64, 5)).conj();
                    assert!((xi.get(q as usize) - expected).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn big_g_shapes() {
        let f3 = random_fiducial(3, 1);
        assert_eq!(big_g(&f3).rows(), 9);
        assert_eq!(big_g(&f3).cols(), 9);
        let f6 = random_fiducial(6, 1);
        let g6 = big_g(&f6);
        assert_eq!(g6.rows(), 54);
        assert_eq!(g6.cols(), 36);
    }

    #[test]
    fn big_g_block_diagonal() {
        let f = random_fiducial(4, 9);
        let g = big_g(&f);
        let smax = s_max(4);
        for m in 0..4 {
            for s in 0..smax {
                for q in 0..16 {
                    let in_block = q / 4 == m;
                    let entry = g.get(m * smax + s, q);
                    if !in_block {
                        assert_eq!(entry, C64::ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn big_g_generic_full_rank() {
        let f = random_fiducial(5, 23);
        let sv = linalg::singular_values(&big_g(&f)).unwrap();
        assert_eq!(sv.len(), 25);
        let cutoff = linalg::default_svd_cutoff(25, 25, sv[0]);
        assert!(sv.iter().all(|s| *s > cutoff), "generic 𝒢 has rank D²");
    }

    #[test]
    fn fourier_transformed_probs_match_xi_route() {
        // Columns of P·F must equal 𝒢_k|ρ⃗_k⟩ componentwise; this pins the
        // direction of every index shift in the ξ definition.
        for dim in [2usize, 3, 4, 6] {
            let f = random_fiducial(dim, 40 + dim as u64);
            let rho = random_density(dim, 50 + dim as u64);
            let effects = build_povm(&f).unwrap();
            let probs = exact_probs(&rho, &effects, dim);
            let p_tilde = probs.to_complex().matmul(&fourier(dim).unwrap()).unwrap();
            for k in 0..dim {
                let gk = block_g_from_amplitudes(f.amplitudes(), k);
                let rho_diag = ComplexVector::from_vec(
                    (0..dim).map(|q| rho.get((q + k) % dim, q)).collect(),
                );
                let expected = gk.matvec(&rho_diag).unwrap();
                for s in 0..s_max(dim) {
                    assert!(
                        (p_tilde.get(s, k) - expected.get(s)).norm() < 1e-12,
                        "D={dim} k={k} s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_pure_state() {
        let f = random_fiducial(5, 77);
        let effects = build_povm(&f).unwrap();
        let op = InversionOperator::build(&f).unwrap();
        assert!(op.cond().is_finite());
        let rho = ComplexMatrix::pure_state_density(5, 0);
        let probs = exact_probs(&rho, &effects, 5);
        let recovered = linear_invert(&probs, &op).unwrap();
        assert!(recovered.max_abs_diff(&rho) < 1e-8);
    }

    #[test]
    fn round_trip_maximally_mixed() {
        let f = random_fiducial(6, 91);
        let effects = build_povm(&f).unwrap();
        let op = InversionOperator::build(&f).unwrap();
        let rho = ComplexMatrix::maximally_mixed(6);
        // Analytic probabilities: p_sj = 1/(K_s·D).
        for e in &effects {
            let p = e.matrix.matmul(&rho).unwrap().trace().unwrap().re;
            let expected = 1.0 / (k_weight(6, e.s).unwrap() as f64 * 6.0);
            assert!((p - expected).abs() < 1e-14);
        }
        let probs = exact_probs(&rho, &effects, 6);
        let recovered = linear_invert(&probs, &op).unwrap();
        assert!(recovered.max_abs_diff(&rho) < 1e-8);
    }

    #[test]
    fn round_trip_random_mixed_states() {
        for dim in [3usize, 4, 6, 7] {
            let f = random_fiducial(dim, 7 + dim as u64);
            let op = InversionOperator::build(&f).unwrap();
            if op.cond() > 100.0 {
                // Random fiducials are almost always well conditioned; if
                // not, pick the next seed rather than weaken the tolerance.
                continue;
            }
            let effects = build_povm(&f).unwrap();
            for seed in 0..3u64 {
                let rho = random_density(dim, 1000 * dim as u64 + seed);
                let probs = exact_probs(&rho, &effects, dim);
                let recovered = linear_invert(&probs, &op).unwrap();
                assert!(
                    recovered.max_abs_diff(&rho) < 1e-8,
                    "D={dim} seed={seed} err={:.3e}",
                    recovered.max_abs_diff(&rho)
                );
            }
        }
    }

    #[test]
    fn blockwise_matches_monolithic() {
        for dim in [3usize, 6] {
            let f = random_fiducial(dim, 60 + dim as u64);
            let op = InversionOperator::build(&f).unwrap();
            let effects = build_povm(&f).unwrap();
            let rho = random_density(dim, 61 + dim as u64);
            let probs = exact_probs(&rho, &effects, dim);
            let mono = linear_invert(&probs, &op).unwrap();
            let block = linear_invert_blockwise(&probs, &f).unwrap();
            assert!(mono.max_abs_diff(&block) < 1e-10, "D={dim}");
        }
    }

    #[test]
    fn output_hermitian_on_exact_data() {
        let f = random_fiducial(6, 13);
        let op = InversionOperator::build(&f).unwrap();
        let effects = build_povm(&f).unwrap();
        let rho = random_density(6, 14);
        let probs = exact_probs(&rho, &effects, 6);
        let recovered = linear_invert(&probs, &op).unwrap();
        assert!(recovered.hermiticity_defect() < 1e-9);
    }

    #[test]
    fn recon_map_is_deterministic() {
        let f = random_fiducial(4, 5);
        let a = InversionOperator::build(&f).unwrap();
        let b = InversionOperator::build(&f).unwrap();
        assert_eq!(a.recon_map(), b.recon_map());
    }

    #[test]
    fn prob_matrix_validation() {
        assert!(ProbMatrix::new(2, 3, vec![0.5; 6]).is_err());
        let ok = ProbMatrix::new(2, 3, vec![1.0 / 6.0; 6]).unwrap();
        assert_eq!(ok.dim(), 2);
        assert!(ProbMatrix::new(2, 3, vec![-0.1, 0.3, 0.2, 0.2, 0.2, 0.2]).is_err());
        assert!(matches!(
            ProbMatrix::from_weights(2, 3, &[0.0; 6]),
            Err(Error::ZeroCounts)
        ));
        // Single nonzero count cell.
        let p = ProbMatrix::from_weights(2, 3, &[7.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.get(0, 0), 1.0);
        assert_eq!(p.get(1, 1), 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let f5 = random_fiducial(5, 2);
        let op5 = InversionOperator::build(&f5).unwrap();
        let p6 = ProbMatrix::new(6, 9, vec![1.0 / 54.0; 54]).unwrap();
        assert!(linear_invert(&p6, &op5).is_err());
    }
}
