//! Numerical toolkit for bound and resonant (autoionizing) states of one- and
//! two-particle 1D quantum systems, built around the complex scaling method in
//! its complex-basis form.
//!
//! The working representation is a biorthonormal harmonic-oscillator basis with
//! complex frequency Ω. Rotating Ω into the lower half-plane is equivalent to
//! complex-scaling the Hamiltonian, so bound states, resonances and rotated
//! continua all appear as eigenvalues of one complex symmetric matrix. On top
//! of the spectral machinery the crate computes Schmidt spectra and the full
//! entropy family (complex and real linear entropies, von Neumann, Rényi) for
//! two-particle states, applied to a quasi-1D Gaussian quantum dot with an
//! effective erfcx electron-electron interaction.
//!
//! Module map:
//!
//! - [`numerics`] — Hermite evaluation, scaled complementary error function,
//!   Gauss quadrature rules, complex Newton iteration.
//! - [`basis`] — the complex-Ω oscillator basis and its c-product geometry.
//! - [`hamiltonian`] — one- and two-particle matrix assembly for the Gaussian
//!   quantum dot.
//! - [`solver`] — dense non-Hermitian eigensolver, biorthonormal
//!   normalization, trace-stationarity optimization of Ω, state
//!   classification and Ω-trajectories.
//! - [`entanglement`] — Schmidt spectra, occupancies and entropies of
//!   two-particle states.
//! - [`model`] — Gaussian-dot workflows: ionization thresholds, β-scans,
//!   resonance phenomenology.
//! - [`oracle`] — independent finite-difference cross-checks on real-space
//!   grids.

pub mod basis;
pub mod entanglement;
mod error;
pub mod hamiltonian;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod solver;

pub use basis::BasisSpec;
pub use entanglement::{CoefficientMatrix, EntropyReport, SchmidtSpectrum};
pub use error::{Error, Result};
pub use hamiltonian::{ModelParams, OperatorMatrix, Particles, Sector};
pub use model::{OmegaPolicy, ScanRow};
pub use numerics::QuadratureRule;
pub use solver::{Classification, EigenPair, OmegaOptimum};

/// Complex number type used throughout.
pub type Complex = num_complex::Complex64;
