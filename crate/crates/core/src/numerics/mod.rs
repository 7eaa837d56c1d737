//! Special functions and root-finding primitives used by every other module.
//!
//! Everything here is a pure function of its inputs; rules are immutable after
//! construction, so concurrent use needs no synchronization.

mod erfcx;
mod hermite;
mod newton;
mod quadrature;

pub use erfcx::erfcx;
pub use hermite::{hermite_eval, hermite_functions};
pub use newton::complex_newton;
pub use quadrature::{gauss_hermite_rule, gauss_legendre_rule, LegendreRule, QuadratureRule};

pub(crate) const SQRT_PI: f64 = 1.772453850905516027298167_f64;
