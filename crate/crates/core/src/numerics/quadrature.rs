use crate::error::{Error, Result};

/// Maximum supported Gauss-Hermite order.
const MAX_ORDER: usize = 512;
/// Node refinement tolerance.
const NODE_TOL: f64 = 1e-14;

/// Gauss-Hermite rule for the weight e^{-u^2} on the real line.
///
/// `weights` are the standard weights; they decay like e^{-u^2} and for very
/// large orders the extreme ones underflow to subnormals. `scaled_weights`
/// store w_i e^{u_i^2}, which stay O(1) at every order and are what the
/// c-product machinery consumes: integrals of the form
/// `sum_i scaled_weights[i] * f(nodes[i])` approximate `∫ f(u) du` whenever f
/// itself carries a Gaussian envelope.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub order: usize,
    /// Strictly increasing abscissas, symmetric about 0.
    pub nodes: Vec<f64>,
    /// Weights for ∫ g(u) e^{-u^2} du ≈ Σ w_i g(u_i).
    pub weights: Vec<f64>,
    /// w_i e^{u_i^2}; finite and positive at every supported order.
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    /// ∫ g(u) e^{-u^2} du with the plain weights.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * g(u)).sum()
    }
}

/// Orthonormal Hermite polynomial of degree `n` and its predecessor at `x`.
fn orthonormal_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0_f64;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    for j in 0..n {
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Nodes and weights of the n-point Gauss-Hermite rule.
///
/// Nodes are found working down from the largest root: an asymptotic edge
/// guess seeds a sign-change bracket march, bisection shrinks the bracket into
/// the Newton basin, and Newton polishes to full precision. Plain
/// extrapolated guesses alone start skipping roots near n ≈ 200, which is why
/// the bracket safeguard exists. Only the non-negative half is solved and the
/// rest mirrored, so the rule is symmetric to the last bit.
pub fn gauss_hermite_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "gauss_hermite_rule: order {n} outside 1..={MAX_ORDER}"
        )));
    }
    let half = n.div_ceil(2);
    let mut pos = vec![0.0_f64; half];
    let poly = |x: f64| orthonormal_pair(n, x).0;

    // outermost root from the Airy-edge estimate, Newton-polished
    let edge = (2.0 * n as f64 + 1.0).sqrt();
    let mut z = edge - 1.85575 * edge.powf(-1.0 / 3.0);
    let mut converged = false;
    for _ in 0..100 {
        let (p, p_prev) = orthonormal_pair(n, z);
        let step = p / ((2.0 * n as f64).sqrt() * p_prev);
        z -= step;
        if step.abs() <= NODE_TOL * z.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::QuadratureNode { order: n, node: 0 });
    }
    pos[0] = z;

    let interior = if n % 2 == 1 { half - 1 } else { half };
    let mut gap = 1.14 * (n as f64).powf(0.426) / pos[0];
    for i in 1..interior {
        // march down in quarter-gap steps until the polynomial changes sign
        let start = pos[i - 1] - 1e-3 * gap;
        let mut hi = start;
        let mut p_hi = poly(hi);
        let step = 0.25 * gap;
        let mut lo = hi;
        let mut bracketed = false;
        for _ in 0..400 {
            lo = (hi - step).max(0.0);
            let p_lo = poly(lo);
            if p_lo == 0.0 || p_lo.signum() != p_hi.signum() {
                bracketed = true;
                break;
            }
            if lo == 0.0 {
                break;
            }
            hi = lo;
            p_hi = p_lo;
        }
        if !bracketed {
            return Err(Error::QuadratureNode { order: n, node: i });
        }
        // bisect into the Newton basin
        let mut a = lo;
        let mut b = hi;
        let mut p_a = poly(a);
        for _ in 0..30 {
            let mid = 0.5 * (a + b);
            let p_mid = poly(mid);
            if p_mid == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if p_mid.signum() == p_a.signum() {
                a = mid;
                p_a = p_mid;
            } else {
                b = mid;
            }
        }
        z = 0.5 * (a + b);
        converged = false;
        for _ in 0..100 {
            let (p, p_prev) = orthonormal_pair(n, z);
            let step = p / ((2.0 * n as f64).sqrt() * p_prev);
            z -= step;
            if step.abs() <= NODE_TOL * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || z >= pos[i - 1] || z < 0.0 {
            return Err(Error::QuadratureNode { order: n, node: i });
        }
        gap = pos[i - 1] - z;
        pos[i] = z;
    }

    // middle root of an odd rule is exactly zero
    if n % 2 == 1 {
        pos[half - 1] = 0.0;
    }

    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let mut scaled = vec![0.0_f64; n];
    for i in 0..half {
        let x = pos[i];
        let (_, p_prev) = orthonormal_pair(n, x);
        let h_prev = p_prev * (-0.5 * x * x).exp(); // Hermite function, O(1)
        let w_scaled = 1.0 / (n as f64 * h_prev * h_prev);
        let w = w_scaled * (-x * x).exp();
        let hi = n - 1 - i;
        nodes[hi] = x;
        nodes[i] = -x;
        weights[hi] = w;
        weights[i] = w;
        scaled[hi] = w_scaled;
        scaled[i] = w_scaled;
    }

    Ok(QuadratureRule { order: n, nodes, weights, scaled_weights: scaled })
}

/// Gauss-Legendre rule on an interval [a, b].
#[derive(Debug, Clone)]
pub struct LegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LegendreRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// n-point Gauss-Legendre rule mapped to [a, b], by Newton refinement of
/// Chebyshev initial guesses.
pub fn gauss_legendre_rule(n: usize, a: f64, b: f64) -> Result<LegendreRule> {
    if n == 0 || n > 2048 {
        return Err(Error::InvalidInput(format!("gauss_legendre_rule: order {n}")));
    }
    if !(a < b) {
        return Err(Error::InvalidInput(format!("gauss_legendre_rule: empty interval [{a}, {b}]")));
    }
    let half = n.div_ceil(2);
    let mid = 0.5 * (a + b);
    let span = 0.5 * (b - a);
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0_f64;
        let mut converged = false;
        for _ in 0..100 {
            let mut p0 = 1.0_f64;
            let mut p1 = 0.0_f64;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - (j as f64) * p2) / (j as f64 + 1.0);
            }
            pp = (n as f64) * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNode { order: n, node: i });
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        nodes[i] = mid - span * z;
        nodes[n - 1 - i] = mid + span * z;
        weights[i] = span * w;
        weights[n - 1 - i] = span * w;
    }
    if n % 2 == 1 {
        nodes[half - 1] = mid;
    }
    Ok(LegendreRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SQRT_PI;

    #[test]
    fn one_point_rule() {
        let r = gauss_hermite_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn two_point_rule_closed_form() {
        let r = gauss_hermite_rule(2).unwrap();
        let x = 1.0 / std::f64::consts::SQRT_2;
        assert!((r.nodes[0] + x).abs() < 1e-14);
        assert!((r.nodes[1] - x).abs() < 1e-14);
        assert!((r.weights[0] - SQRT_PI / 2.0).abs() < 1e-14);
        assert!((r.weights[1] - SQRT_PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_fourth_moment() {
        // ∫ u^4 e^{-u^2} du = (3/4) sqrt(pi)
        let r = gauss_hermite_rule(64).unwrap();
        let m4 = r.integrate_weighted(|u| u.powi(4));
        let exact = 0.75 * SQRT_PI;
        assert!((m4 - exact).abs() < 1e-12 * exact, "m4 = {m4}");
    }

    #[test]
    fn invariants_small_orders() {
        for n in [4usize, 16, 64] {
            let r = gauss_hermite_rule(n).unwrap();
            // strictly increasing, symmetric nodes
            for i in 1..n {
                assert!(r.nodes[i] > r.nodes[i - 1]);
            }
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
            }
            // positive weights summing to sqrt(pi)
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - SQRT_PI).abs() < 1e-12 * SQRT_PI, "n = {n}: sum = {sum}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.scaled_weights.iter().all(|&w| w > 0.0 && w.is_finite()));
            // exactness on monomials up to degree 2n - 1
            for k in (0..2 * n).step_by(2) {
                let got = r.integrate_weighted(|u| u.powi(k as i32));
                let mut exact = SQRT_PI;
                let mut j = k as f64 - 1.0;
                while j > 0.0 {
                    exact *= j / 2.0;
                    j -= 2.0;
                }
                assert!(
                    (got - exact).abs() < 1e-10 * exact.max(1.0),
                    "n = {n}, k = {k}: {got} vs {exact}"
                );
            }
            for k in (1..2 * n).step_by(2) {
                let got = r.integrate_weighted(|u| u.powi(k as i32));
                // zero by parity, up to roundoff against the absolute scale
                let scale = r.integrate_weighted(|u| u.abs().powi(k as i32));
                assert!(got.abs() < 1e-13 * scale.max(1.0), "odd moment k = {k} gave {got}");
            }
        }
    }

    #[test]
    fn largest_supported_order_is_usable() {
        let r = gauss_hermite_rule(512).unwrap();
        assert_eq!(r.nodes.len(), 512);
        for i in 1..512 {
            assert!(r.nodes[i] > r.nodes[i - 1]);
        }
        let sum: f64 = r.weights.iter().sum();
        assert!((sum - SQRT_PI).abs() < 1e-12 * SQRT_PI);
        assert!(r.scaled_weights.iter().all(|&w| w > 0.0 && w.is_finite()));
        let m2 = r.integrate_weighted(|u| u * u);
        assert!((m2 - 0.5 * SQRT_PI).abs() < 1e-11);
    }

    #[test]
    fn order_out_of_range() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(513).is_err());
    }

    #[test]
    fn legendre_polynomial_exactness() {
        let r = gauss_legendre_rule(8, -1.0, 3.0).unwrap();
        // ∫_{-1}^{3} x^5 dx = (3^6 - 1)/6
        let got = r.integrate(|x| x.powi(5));
        let exact = (3.0_f64.powi(6) - 1.0) / 6.0;
        assert!((got - exact).abs() < 1e-11 * exact.abs());
    }

    #[test]
    fn legendre_smooth_integrand() {
        let r = gauss_legendre_rule(96, 0.0, 8.0).unwrap();
        let got = r.integrate(|x| (-x * x).exp());
        assert!((got - SQRT_PI / 2.0).abs() < 1e-14);
    }
}
