use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Hermite recurrence left the representable range.
    #[error("Hermite value overflowed at degree {degree}; use a log-scaled evaluation")]
    HermiteOverflow { degree: usize },

    /// erfcx argument outside the supported right half-plane sector.
    #[error("erfcx: Re(z) = {re} < 0 is outside the supported sector")]
    ErfcxDomain { re: f64 },

    /// Quadrature node refinement failed to converge.
    #[error("Gauss quadrature node {node} of the {order}-point rule did not converge")]
    QuadratureNode { order: usize, node: usize },

    /// Newton iteration stalled; carries the last iterate and residual.
    #[error("Newton iteration did not converge: last z = {last}, |f(z)| = {residual:.3e}")]
    NewtonNonConvergence { last: Complex64, residual: f64 },

    /// The dense eigensolver backend failed.
    #[error("eigendecomposition failed: {0}")]
    EigenBackend(String),

    /// c-norm of an eigenvector collapsed; suspected exceptional point.
    #[error("suspected exceptional point: |<chi|psi>| = {c_norm:.3e} for state {index}")]
    ExceptionalPoint { index: usize, c_norm: f64 },

    /// Trace-stationarity search failed; carries the scan table that was tried.
    #[error("no stationary Omega found; coarse scan residuals: {scan_summary}")]
    NoStationaryOmega { scan_summary: String },

    /// Bisection bracket does not change sign.
    #[error("no sign change in bracket [{lo}, {hi}]: g(lo) = {g_lo:.6e}, g(hi) = {g_hi:.6e}")]
    NoBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// Grid eigenvalue is still sensitive to the box size.
    #[error("grid box too small: eigenvalue moved by {sensitivity:.3e} when x_max doubled")]
    GridBoundary { sensitivity: f64 },

    /// Iterative grid eigensolver did not converge.
    #[error("Lanczos iteration did not converge: residual {residual:.3e} after {iterations} steps")]
    LanczosNonConvergence { iterations: usize, residual: f64 },

    /// Grid wavefunction lost normalization.
    #[error("grid wavefunction normalization drifted by {drift:.3e}")]
    NormalizationDrift { drift: f64 },

    /// No state matching the request was found in the spectrum.
    #[error("state selection failed: {0}")]
    StateSelection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
