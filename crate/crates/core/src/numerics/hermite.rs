use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physicists' Hermite polynomial H_n(z) by the three-term recurrence
/// H_{n+1} = 2z H_n - 2n H_{n-1}.
///
/// Exact for polynomial degree n. Overflow of an intermediate value is
/// reported rather than silently returning infinities, so a caller can switch
/// to a log-scaled evaluation.
pub fn hermite_eval(n: usize, z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("hermite_eval: z = {z} not finite")));
    }
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * (k as f64) * prev;
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::HermiteOverflow { degree: k + 1 });
        }
        prev = cur;
        cur = next;
    }
    if !cur.re.is_finite() || !cur.im.is_finite() {
        return Err(Error::HermiteOverflow { degree: n });
    }
    Ok(cur)
}

/// Normalized Hermite functions h_j(t) = (2^j j! sqrt(pi))^{-1/2} H_j(t) e^{-t^2/2}
/// for all j < count, evaluated at complex t.
///
/// The Gaussian factor is folded into the recurrence seed, so no intermediate
/// overflows for the argument ranges produced by quadrature nodes. Values
/// whose Gaussian envelope underflows come out as exact zeros, which is
/// harmless in integrals.
pub fn hermite_functions(count: usize, t: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); count];
    if count == 0 {
        return out;
    }
    let gauss = (-0.5 * t * t).exp();
    let mut prev = Complex64::new(std::f64::consts::PI.powf(-0.25), 0.0) * gauss;
    out[0] = prev;
    if count == 1 {
        return out;
    }
    let mut cur = t * prev * std::f64::consts::SQRT_2;
    out[1] = cur;
    for j in 1..count - 1 {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * t * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out[j + 1] = cur;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_is_one() {
        for z in [c(0.0, 0.0), c(2.5, -1.0), c(-7.0, 3.0)] {
            assert_eq!(hermite_eval(0, z).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn degree_one_is_twice_z() {
        let z = c(0.5, 0.0);
        assert_eq!(hermite_eval(1, z).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn degree_five_matches_explicit_polynomial() {
        // 32 z^5 - 160 z^3 + 120 z at z = 0.3
        let v = hermite_eval(5, c(0.3, 0.0)).unwrap();
        assert!((v.re - 31.75776).abs() < 1e-10, "got {v}");
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn overflow_is_reported() {
        let err = hermite_eval(400, c(40.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::HermiteOverflow { .. }));
    }

    #[test]
    fn normalized_functions_match_raw_recurrence() {
        let t = c(1.3, 0.4);
        let vals = hermite_functions(6, t);
        let gauss = (-0.5 * t * t).exp();
        for (j, v) in vals.iter().enumerate() {
            let mut norm = std::f64::consts::PI.sqrt();
            for k in 0..j {
                norm *= 2.0 * (k as f64 + 1.0);
            }
            let expected = hermite_eval(j, t).unwrap() * gauss / norm.sqrt();
            assert!((v - expected).norm() < 1e-12 * expected.norm().max(1.0));
        }
    }
}
