//! Biorthonormal harmonic-oscillator basis with complex frequency Ω.
//!
//! The right functions are
//! ψ_j(x) = (√Ω / (√π 2^j j!))^{1/2} H_j(√Ω x) e^{-Ω x²/2},
//! analytic continuations of the ordinary oscillator eigenfunctions; their
//! left partners are the complex conjugates χ_j = ψ_j*, so the ordinary scalar
//! product ⟨χ_j|ψ_k⟩ collapses to the bilinear c-product (ψ_j, ψ_k) = δ_jk
//! with no conjugation. Instead of keeping a real scale and a rotation angle
//! as separate knobs, the complex Ω carries both: arg(Ω) < 0 plays the role of
//! a positive complex-scaling angle θ = -arg(Ω)/2.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gauss_hermite_rule, hermite_functions, QuadratureRule};

/// Complex oscillator frequency plus truncation; the single source of truth
/// for the basis geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    omega: Complex64,
    m_size: usize,
    quad_order: usize,
}

impl BasisSpec {
    /// Validates Re(Ω) > 0 (square integrability), m_size >= 1 and
    /// quad_order >= 2 m_size.
    pub fn new(omega: Complex64, m_size: usize, quad_order: usize) -> Result<Self> {
        if !(omega.re > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidInput(format!(
                "BasisSpec: Re(omega) must be positive, got omega = {omega}"
            )));
        }
        if m_size == 0 {
            return Err(Error::InvalidInput("BasisSpec: m_size must be >= 1".into()));
        }
        if quad_order < 2 * m_size {
            return Err(Error::InvalidInput(format!(
                "BasisSpec: quad_order {quad_order} < 2 m_size = {}",
                2 * m_size
            )));
        }
        Ok(Self { omega, m_size, quad_order })
    }

    /// Spec with the default quadrature order max(64, 2 M + 16).
    pub fn with_default_quadrature(omega: Complex64, m_size: usize) -> Result<Self> {
        Self::new(omega, m_size, default_quad_order(m_size))
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Effective complex-scaling angle θ carried by this basis. Positive θ
    /// (arg Ω < 0) uncovers decaying resonances.
    pub fn rotation_angle(&self) -> f64 {
        -0.5 * self.omega.arg()
    }

    /// Angle of the rotated-continuum ray measured from a threshold: −2θ.
    pub fn continuum_ray_angle(&self) -> f64 {
        self.omega.arg()
    }

    /// Same basis with the conjugate frequency (the left-partner family).
    pub fn conjugate(&self) -> Self {
        Self { omega: self.omega.conj(), ..*self }
    }

    /// Same basis with a different truncation.
    pub fn with_m_size(&self, m_size: usize) -> Result<Self> {
        Self::new(self.omega, m_size, self.quad_order.max(default_quad_order(m_size)))
    }

    /// Same basis with a different quadrature order.
    pub fn with_quad_order(&self, quad_order: usize) -> Result<Self> {
        Self::new(self.omega, self.m_size, quad_order)
    }

    /// Gauss-Hermite rule of this spec's order.
    pub fn rule(&self) -> Result<QuadratureRule> {
        gauss_hermite_rule(self.quad_order)
    }
}

pub fn default_quad_order(m_size: usize) -> usize {
    (2 * m_size + 16).max(64)
}

/// One basis function; mostly a convenience handle over (`j`, spec).
#[derive(Debug, Clone, Copy)]
pub struct BasisFunction<'a> {
    pub index: usize,
    pub spec: &'a BasisSpec,
}

impl BasisFunction<'_> {
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        eval_right(self.index, self.spec, x)
    }
}

/// Value of the right basis function ψ_j at real x.
pub fn eval_right(j: usize, spec: &BasisSpec, x: f64) -> Result<Complex64> {
    if j >= spec.m_size {
        return Err(Error::InvalidInput(format!(
            "basis index {j} out of range for m_size {}",
            spec.m_size
        )));
    }
    Ok(eval_all_right(j + 1, spec, x)[j])
}

/// Value of the left partner χ_j = ψ_j* at real x.
pub fn eval_left(j: usize, spec: &BasisSpec, x: f64) -> Result<Complex64> {
    eval_right(j, spec, x).map(|v| v.conj())
}

/// All right functions ψ_0..ψ_{count-1} at x; the workhorse for assembly.
///
/// Evaluated through the normalized Hermite-function recurrence with the
/// Gaussian folded in, so no intermediate overflow at quadrature-node ranges.
pub(crate) fn eval_all_right(count: usize, spec: &BasisSpec, x: f64) -> Vec<Complex64> {
    let sqrt_omega = spec.omega.sqrt();
    let t = sqrt_omega * x;
    let prefactor = spec.omega.powf(0.25);
    let mut vals = hermite_functions(count, t);
    for v in &mut vals {
        *v *= prefactor;
    }
    vals
}

/// Bilinear c-product (f, g) = ∫ f(x) g(x) dx, no conjugation, by
/// Gauss-Hermite quadrature in the substituted variable u = √(Re Ω) x.
///
/// Assumes the product decays at least as fast as the Gaussian envelope of
/// the basis; that holds for any pair of truncated basis expansions.
pub fn c_product<F, G>(f: F, g: G, rule: &QuadratureRule, spec: &BasisSpec) -> Complex64
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let s = spec.omega.re.sqrt();
    let mut acc = Complex64::default();
    for (&u, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let x = u / s;
        acc += w * f(x) * g(x);
    }
    acc / s
}

/// c-product with an internal order-doubling consistency estimate.
///
/// Returns the doubled-order value together with the shift between the two
/// orders, so callers can decide whether the rule was sufficient.
pub fn c_product_checked<F, G>(f: F, g: G, spec: &BasisSpec) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let rule = spec.rule()?;
    let fine = gauss_hermite_rule((2 * spec.quad_order).min(512))?;
    let coarse = c_product(&f, &g, &rule, spec);
    let refined = c_product(&f, &g, &fine, spec);
    Ok((refined, (refined - coarse).norm()))
}

/// Gram matrix (ψ_n, ψ_k) for n, k < M.
pub fn gram_matrix(spec: &BasisSpec) -> Result<Vec<Complex64>> {
    let m = spec.m_size;
    let rule = spec.rule()?;
    let s = spec.omega.re.sqrt();
    // values[j][i] = ψ_j(x_i)
    let mut values = vec![vec![Complex64::default(); rule.order]; m];
    for (i, &u) in rule.nodes.iter().enumerate() {
        let col = eval_all_right(m, spec, u / s);
        for j in 0..m {
            values[j][i] = col[j];
        }
    }
    let mut gram = vec![Complex64::default(); m * m];
    for n in 0..m {
        for k in n..m {
            let mut acc = Complex64::default();
            for i in 0..rule.order {
                acc += rule.scaled_weights[i] * values[n][i] * values[k][i];
            }
            acc /= s;
            gram[n * m + k] = acc;
            gram[k * m + n] = acc;
        }
    }
    Ok(gram)
}

/// Maximum deviation of the c-product Gram matrix from the identity,
/// max_{n,k < M} |(ψ_n, ψ_k) − δ_nk|.
///
/// Configurations where a diagonal c-norm collapses (exceptional geometry)
/// are rejected with a diagnostic instead of returning a misleading number.
pub fn check_biorthonormality(spec: &BasisSpec) -> Result<f64> {
    let m = spec.m_size;
    let gram = gram_matrix(spec)?;
    for k in 0..m {
        let diag = gram[k * m + k];
        if diag.norm() < 1e-10 {
            return Err(Error::ExceptionalPoint { index: k, c_norm: diag.norm() });
        }
    }
    let mut worst = 0.0_f64;
    for n in 0..m {
        for k in 0..m {
            let target = if n == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[n * m + k] - target).norm());
        }
    }
    Ok(worst)
}
