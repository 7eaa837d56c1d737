use std::sync::OnceLock;

use num_complex::Complex64;

use super::SQRT_PI;
use crate::error::{Error, Result};

/// Number of terms in the rational (Weideman) approximation.
const RATIONAL_TERMS: usize = 48;
/// Real part beyond which the Laplace continued fraction is both faster and
/// more accurate than the rational approximation.
const CF_CUTOFF: f64 = 4.0;

/// Scaled complementary error function erfcx(z) = e^{z^2} (1 - erf(z)) for
/// Re(z) >= 0.
///
/// Uses a rational approximation of the Faddeeva function for |z| <= 4 and the
/// Laplace continued fraction beyond, giving about 1e-13 relative accuracy on
/// the real axis. The left half-plane is rejected: the function grows doubly
/// exponentially there and this branch is never needed for the interaction
/// kernels built on top of it.
pub fn erfcx(z: Complex64) -> Result<Complex64> {
    if z.re < 0.0 {
        return Err(Error::ErfcxDomain { re: z.re });
    }
    // Near the imaginary axis the continued fraction cannot resolve the
    // exponentially small real part e^{Im(z)²·(-1)}, so it only takes over
    // once that part is below double precision anyway (|z| >= 6) or the real
    // part is large enough for the fraction to be exponentially accurate.
    if z.re >= CF_CUTOFF || z.norm_sqr() >= 36.0 {
        Ok(erfcx_continued_fraction(z))
    } else {
        Ok(erfcx_rational(z))
    }
}

/// Laplace continued fraction
/// sqrt(pi) erfcx(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
/// evaluated by the modified Lentz algorithm. Converges quickly for |z| >~ 3.
fn erfcx_continued_fraction(z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z;
    if f.norm_sqr() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::default();
    for k in 1..200 {
        let a = Complex64::new(k as f64 / 2.0, 0.0);
        d = z + a * d;
        if d.norm_sqr() == 0.0 {
            d = tiny;
        }
        c = z + a / c;
        if c.norm_sqr() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (SQRT_PI * f).inv()
}

/// Weideman-style rational approximation of the Faddeeva function w, evaluated
/// as erfcx(z) = w(iz). Valid on the closed right half-plane.
fn erfcx_rational(z: Complex64) -> Complex64 {
    let (l, coeffs) = rational_coefficients();
    // w(iz): the Moebius variable (L + i(iz))/(L - i(iz)) collapses to real
    // shifts of z.
    let denom = l + z;
    let zz = (l - z) / denom;
    let mut p = Complex64::default();
    for &a in coeffs.iter().rev() {
        p = p * zz + a;
    }
    (2.0 * p / denom + 1.0 / SQRT_PI) / denom
}

/// Chebyshev-like coefficients of the rational expansion, computed once by a
/// direct cosine transform of e^{-t^2} (L^2 + t^2) sampled on t = L tan(θ/2).
fn rational_coefficients() -> (f64, &'static [f64]) {
    static COEFFS: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    let (l, v) = COEFFS.get_or_init(|| {
        let n = RATIONAL_TERMS;
        let m = 2 * n;
        let l = ((n as f64) / std::f64::consts::SQRT_2).sqrt();
        let sample = |k: usize| -> f64 {
            let theta = (k as f64) * std::f64::consts::PI / (m as f64);
            let t = l * (theta / 2.0).tan();
            (-t * t).exp() * (l * l + t * t)
        };
        let mut coeffs = Vec::with_capacity(n);
        for j in 1..=n {
            let mut acc = sample(0);
            for k in 1..m {
                let theta = (k as f64) * std::f64::consts::PI / (m as f64);
                acc += 2.0 * sample(k) * ((j as f64) * theta).cos();
            }
            // k = ±m term vanishes: the sample decays as e^{-t^2}.
            coeffs.push(acc / (2.0 * m as f64));
        }
        (l, coeffs)
    });
    (*l, v.as_slice())
}
