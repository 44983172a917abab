//! Quantum state tomography of D-dimensional systems with POVMs built from
//! multiply symmetric states.
//!
//! The measurement family is the orbit of a fiducial state |α₀⟩ under powers
//! of three unitaries: the cyclic shift X, the clock Z, and a phase
//! transform V. The resulting sub-normalized projectors Π_sj form an
//! informationally complete POVM in every dimension, with D² outcomes for odd
//! D and 3D²/2 for even D. The crate covers the full pipeline:
//!
//! - [`povm`] — generator matrices, the |α_sj⟩ state family, POVM assembly
//!   and completeness checks;
//! - [`inversion`] — the explicit linear reconstruction that maps a measured
//!   probability matrix back to vec(ρ) through a precomputed pseudoinverse
//!   operator;
//! - [`fiducial`] — the single-complex-parameter equidistant fiducial family,
//!   condition-number evaluation and scans over the α plane, random fiducial
//!   search;
//! - [`mle`] — Poisson maximum-likelihood refinement over the PSD cone,
//!   turning a (possibly unphysical) linear estimate into a density matrix;
//! - [`simulator`] — photon-counting experiment simulation: forward
//!   probabilities, Poisson count sampling over rounds, and Monte Carlo
//!   error estimation with mean ± 5σ reporting;
//! - [`io`] — versioned, bit-stable file formats for counts, fiducials,
//!   scan grids and reports;
//! - [`linalg`] — the dense complex matrix utilities everything else is
//!   built on (vectorization, Kronecker products, SVD pseudoinverse, PSD
//!   projection).
//!
//! # Quick start
//!
//! ```
//! use multisym::fiducial::{AlphaParam, equidistant_fiducial};
//! use multisym::povm::{build_povm, completeness_residual};
//! use multisym::inversion::{InversionOperator, linear_invert};
//! use multisym::simulator::forward_probs;
//! use multisym::linalg::ComplexMatrix;
//!
//! // A well-conditioned fiducial for D = 5.
//! let alpha = AlphaParam::new(0.3, 0.2 * std::f64::consts::PI)?;
//! let fid = equidistant_fiducial(&alpha, 5)?;
//! let effects = build_povm(&fid)?;
//! assert_eq!(effects.len(), 25);
//! assert!(completeness_residual(&effects)? < 1e-12);
//!
//! // Noiseless round trip: probabilities of a pure state invert back to it.
//! let rho = ComplexMatrix::pure_state_density(5, 0);
//! let op = InversionOperator::build(&fid)?;
//! let probs = forward_probs(&rho, &effects)?;
//! let recovered = linear_invert(&probs, &op)?;
//! assert!(recovered.max_abs_diff(&rho) < 1e-10);
//! # Ok::<(), multisym::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability end to end; the
//! `multisym` binary exposes the same pipeline as `check`, `scan`,
//! `simulate` and `reconstruct` subcommands.

pub mod cli;
pub mod fiducial;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod mle;
pub mod povm;
pub mod simulator;

mod error;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
