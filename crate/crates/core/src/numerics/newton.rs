use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;

/// Newton iteration for a root of an analytic map f, with the derivative
/// estimated by a central difference along the real direction
/// (step h = 1e-6 max(1, |z|); for analytic f this equals the complex
/// derivative).
///
/// Returns the first iterate with |f(z)| < tol; non-convergence carries the
/// last iterate and its residual as a diagnostic.
pub fn complex_newton<F>(f: F, z0: Complex64, tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("complex_newton: tol = {tol} must be > 0")));
    }
    let mut z = z0;
    let mut fz = f(z);
    for _ in 0..MAX_ITERATIONS {
        if fz.norm() < tol {
            return Ok(z);
        }
        let h = 1e-6 * z.norm().max(1.0);
        let df = (f(z + h) - f(z - h)) / (2.0 * h);
        if !df.is_finite() || df.norm() < 1e-300 {
            break;
        }
        let step = fz / df;
        z -= step;
        fz = f(z);
        if !fz.is_finite() || !z.is_finite() {
            break;
        }
    }
    if fz.is_finite() && fz.norm() < tol {
        return Ok(z);
    }
    Err(Error::NewtonNonConvergence { last: z, residual: fz.norm() })
}
