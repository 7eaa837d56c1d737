//! Schmidt spectrum and entropy family of the two-particle state.
//!
//! The reduced density matrix of Ψ = Σ C_nm φ_n(x₁) φ_m(x₂) built with the
//! left eigenvector (c-product pairing) is C·Cᵀ/𝒩 in the c-orthonormal basis,
//! with 𝒩 = Σ C_nm². Its eigenvalues μ_i = k_i² give two occupancy families:
//! complex λ_i = μ_i/Σμ and real λ̃_i = |μ_i|/Σ|μ|, built with the associated
//! state instead. The Schmidt coefficients k_i themselves are never extracted;
//! every entropy is a function of μ_i, which sidesteps square-root branch
//! choices. The customary reading of the complex branch — real part as the
//! physical value, imaginary part as its uncertainty — is reporting metadata,
//! not something enforced here.

use num_complex::Complex64;

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{pair_basis, Sector};
use crate::solver::{self, EigenPair};

/// Keep μ_i with |μ_i| above this fraction of |μ_0| in the Schmidt count.
const SCHMIDT_CUTOFF: f64 = 1e-12;
/// Occupancies below this are skipped in the von Neumann sum.
const VON_NEUMANN_FLOOR: f64 = 1e-15;

/// Full M×M coefficient matrix of a two-particle state.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub m_size: usize,
    /// Row-major C with Ψ = Σ C_nm φ_n(x₁) φ_m(x₂).
    pub c: Vec<Complex64>,
    /// c-norm 𝒩 = Σ C_nm².
    pub c_norm: Complex64,
    pub sector: Sector,
}

impl CoefficientMatrix {
    #[inline]
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.c[n * self.m_size + m]
    }

    /// Builds a product state C = v vᵀ (always symmetric-sector).
    pub fn product_state(v: &[Complex64]) -> Self {
        let m = v.len();
        let mut c = vec![Complex64::default(); m * m];
        for n in 0..m {
            for k in 0..m {
                c[n * m + k] = v[n] * v[k];
            }
        }
        let c_norm = c.iter().map(|x| x * x).sum();
        Self { m_size: m, c, c_norm, sector: Sector::Symmetric }
    }

    /// C·Cᵀ as a dense row-major matrix.
    pub fn rdm_unnormalized(&self) -> Vec<Complex64> {
        let m = self.m_size;
        let mut out = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in i..m {
                let mut acc = Complex64::default();
                for k in 0..m {
                    acc += self.get(i, k) * self.get(j, k);
                }
                out[i * m + j] = acc;
                out[j * m + i] = acc;
            }
        }
        out
    }

    /// Ψ(x₁, x₂) by direct basis summation.
    pub fn evaluate(&self, spec: &BasisSpec, x1: f64, x2: f64) -> Result<Complex64> {
        let m = self.m_size;
        if spec.m_size() < m {
            return Err(Error::InvalidInput("coefficient matrix larger than basis".into()));
        }
        let a = crate::basis::eval_all_right(m, spec, x1);
        let b = crate::basis::eval_all_right(m, spec, x2);
        let mut acc = Complex64::default();
        for n in 0..m {
            for k in 0..m {
                acc += self.get(n, k) * a[n] * b[k];
            }
        }
        Ok(acc)
    }
}

/// Unfolds a symmetry-adapted coefficient vector into the full M×M matrix C.
///
/// Off-diagonal pair states contribute coefficient/√2 to both (n,m) and (m,n);
/// the antisymmetric sector gets the sign flip. A collapsed c-norm
/// |𝒩| < 1e-10 is rejected as an exceptional state.
pub fn coefficient_matrix(
    ground: &EigenPair,
    spec: &BasisSpec,
    sector: Sector,
) -> Result<CoefficientMatrix> {
    let m = spec.m_size();
    let pairs = pair_basis(m, sector);
    if pairs.len() != ground.right.len() {
        return Err(Error::InvalidInput(format!(
            "coefficient_matrix: vector length {} does not match sector dimension {}",
            ground.right.len(),
            pairs.len()
        )));
    }
    let mut c = vec![Complex64::default(); m * m];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for (&(n, mm), &coeff) in pairs.iter().zip(&ground.right) {
        if n == mm {
            c[n * m + mm] = coeff;
        } else {
            let sign = match sector {
                Sector::Symmetric => 1.0,
                Sector::Antisymmetric => -1.0,
            };
            c[n * m + mm] = coeff * inv_sqrt2;
            c[mm * m + n] = coeff * inv_sqrt2 * sign;
        }
    }
    let c_norm: Complex64 = c.iter().map(|x| x * x).sum();
    if c_norm.norm() < 1e-10 {
        return Err(Error::ExceptionalPoint { index: 0, c_norm: c_norm.norm() });
    }
    Ok(CoefficientMatrix { m_size: m, c, c_norm, sector })
}

/// Eigenvalues μ_i of C·Cᵀ with both occupancy families.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    /// μ_i sorted by descending |μ_i|.
    pub mu: Vec<Complex64>,
    /// Complex occupancies λ_i = μ_i / Σ μ_j.
    pub lambda_c: Vec<Complex64>,
    /// Real occupancies λ̃_i = |μ_i| / Σ |μ_j|.
    pub lambda_r: Vec<f64>,
    /// Number of |μ_i| above the relative cutoff.
    pub schmidt_number: usize,
    /// Set when C·Cᵀ looked near-defective; entropies are still reported.
    pub suspected_exceptional: bool,
}

/// Diagonalizes C·Cᵀ and derives the occupancies. |k_i|² is computed as
/// |μ_i|, using k_i² = μ_i from the c-product Schmidt decomposition.
pub fn schmidt_spectrum(coefficients: &CoefficientMatrix) -> Result<SchmidtSpectrum> {
    let m = coefficients.m_size;
    let rdm = coefficients.rdm_unnormalized();
    let pairs = solver::eig_dense(m, &rdm)?;
    let suspected = pairs.iter().any(|p| p.flags.suspected_exceptional);
    let mut mu: Vec<Complex64> = pairs.into_iter().map(|p| p.epsilon).collect();
    mu.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite"));

    let total: Complex64 = mu.iter().sum();
    let total_abs: f64 = mu.iter().map(|v| v.norm()).sum();
    if total.norm() < 1e-14 || total_abs < 1e-14 {
        return Err(Error::ExceptionalPoint { index: 0, c_norm: total.norm() });
    }
    let lambda_c: Vec<Complex64> = mu.iter().map(|&v| v / total).collect();
    let lambda_r: Vec<f64> = mu.iter().map(|v| v.norm() / total_abs).collect();
    let top = mu[0].norm();
    let schmidt_number = mu.iter().filter(|v| v.norm() > SCHMIDT_CUTOFF * top).count();
    Ok(SchmidtSpectrum {
        mu,
        lambda_c,
        lambda_r,
        schmidt_number,
        suspected_exceptional: suspected,
    })
}

/// Complex linear entropy L = 1 − Σ λ_i² = 1 − Σμ_i²/(Σμ_i)².
pub fn linear_entropy_c(spectrum: &SchmidtSpectrum) -> Complex64 {
    let purity: Complex64 = spectrum.lambda_c.iter().map(|l| l * l).sum();
    1.0 - purity
}

/// Real linear entropy L̃ = 1 − Σ λ̃_i².
pub fn linear_entropy_r(spectrum: &SchmidtSpectrum) -> f64 {
    let purity: f64 = spectrum.lambda_r.iter().map(|l| l * l).sum();
    1.0 - purity
}

/// Rényi entropy S^(q) = ln(Σ λ̃^q)/(1−q) on the real occupancy branch.
pub fn renyi_entropy(spectrum: &SchmidtSpectrum, q: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidInput("renyi_entropy: q must be >= 2".into()));
    }
    let sum: f64 = spectrum.lambda_r.iter().map(|l| l.powi(q as i32)).sum();
    Ok(sum.ln() / (1.0 - q as f64))
}

/// Von Neumann entropy S = −Σ λ̃ ln λ̃; occupancies below 1e-15 are skipped.
pub fn von_neumann(spectrum: &SchmidtSpectrum) -> f64 {
    -spectrum
        .lambda_r
        .iter()
        .filter(|&&l| l > VON_NEUMANN_FLOOR)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// The entropy family of one state.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub linear_c: Complex64,
    pub linear_r: f64,
    pub von_neumann: f64,
    /// S^(q) for q = 2, 3, 4.
    pub renyi: Vec<(u32, f64)>,
    pub schmidt_number: usize,
}

/// Convenience bundle of all entropies of a spectrum.
pub fn entropy_report(spectrum: &SchmidtSpectrum) -> EntropyReport {
    EntropyReport {
        linear_c: linear_entropy_c(spectrum),
        linear_r: linear_entropy_r(spectrum),
        von_neumann: von_neumann(spectrum),
        renyi: [2u32, 3, 4]
            .iter()
            .map(|&q| (q, renyi_entropy(spectrum, q).expect("q >= 2")))
            .collect(),
        schmidt_number: spectrum.schmidt_number,
    }
}

/// First k natural orbitals: eigenvectors of C·Cᵀ, c-normalized, ordered by
/// descending |μ|. Returned as coefficient vectors over the one-particle
/// basis; a collapsing c-norm flags an exceptional point.
pub fn natural_orbitals(coefficients: &CoefficientMatrix, k: usize) -> Result<Vec<Vec<Complex64>>> {
    let m = coefficients.m_size;
    if k > m {
        return Err(Error::InvalidInput(format!("natural_orbitals: k = {k} > M = {m}")));
    }
    let rdm = coefficients.rdm_unnormalized();
    let mut pairs = solver::eig_dense(m, &rdm)?;
    pairs.sort_by(|a, b| b.epsilon.norm().partial_cmp(&a.epsilon.norm()).expect("finite"));
    let mut out = Vec::with_capacity(k);
    for (i, pair) in pairs.into_iter().take(k).enumerate() {
        if pair.flags.suspected_exceptional {
            return Err(Error::ExceptionalPoint { index: i, c_norm: 0.0 });
        }
        // eig_dense already c-normalizes symmetric-matrix eigenvectors
        out.push(pair.right);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::solver::c_overlap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_c(values: &[Complex64]) -> CoefficientMatrix {
        let m = values.len();
        let mut cm = vec![Complex64::default(); m * m];
        for (i, &v) in values.iter().enumerate() {
            cm[i * m + i] = v;
        }
        let c_norm = cm.iter().map(|x| x * x).sum();
        CoefficientMatrix { m_size: m, c: cm, c_norm, sector: Sector::Symmetric }
    }

    #[test]
    fn product_state_single_occupancy() {
        let mut e0 = vec![Complex64::default(); 4];
        e0[0] = c(1.0, 0.0);
        let cm = CoefficientMatrix::product_state(&e0);
        let s = schmidt_spectrum(&cm).unwrap();
        assert_eq!(s.schmidt_number, 1);
        assert!((s.lambda_r[0] - 1.0).abs() < 1e-14);
        assert_eq!(linear_entropy_r(&s), 0.0);
        assert_eq!(linear_entropy_c(&s).norm(), 0.0);
        assert_eq!(von_neumann(&s), 0.0);
        assert_eq!(renyi_entropy(&s, 2).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_coefficients_square_to_mu() {
        let cm = diag_c(&[c(0.8, 0.0), c(0.6, 0.0)]);
        let s = schmidt_spectrum(&cm).unwrap();
        assert!((s.mu[0] - c(0.64, 0.0)).norm() < 1e-14);
        assert!((s.mu[1] - c(0.36, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn two_equal_occupancies_give_half() {
        let cm = diag_c(&[c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0)]);
        let s = schmidt_spectrum(&cm).unwrap();
        assert!((linear_entropy_r(&s) - 0.5).abs() < 1e-14);
        let lc = linear_entropy_c(&s);
        assert!((lc - c(0.5, 0.0)).norm() < 1e-14);
        // uniform spectrum over 2 terms: S = S^(q) = ln 2
        assert!((von_neumann(&s) - 2.0_f64.ln()).abs() < 1e-14);
        assert!((renyi_entropy(&s, 3).unwrap() - 2.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn renyi_two_matches_linear_identity() {
        let cm = diag_c(&[c(0.9, 0.05), c(0.4, -0.1), c(0.15, 0.02)]);
        let s = schmidt_spectrum(&cm).unwrap();
        let l_r = linear_entropy_r(&s);
        let s2 = renyi_entropy(&s, 2).unwrap();
        assert!((s2 + (1.0 - l_r).ln()).abs() < 1e-12);
    }

    #[test]
    fn trace_identities_random_symmetric() {
        // Σμ = Tr(CCᵀ) and Σμ² = Tr((CCᵀ)²) tie the spectrum to C
        let m = 6;
        let mut cmat = vec![Complex64::default(); m * m];
        let mut seed = 0x2545f4914f6cdd1d_u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..m {
            for j in i..m {
                let v = c(next(), 0.3 * next());
                cmat[i * m + j] = v;
                cmat[j * m + i] = v;
            }
        }
        let c_norm = cmat.iter().map(|x| x * x).sum();
        let cm = CoefficientMatrix { m_size: m, c: cmat, c_norm, sector: Sector::Symmetric };
        let rdm = cm.rdm_unnormalized();
        let trace: Complex64 = (0..m).map(|i| rdm[i * m + i]).sum();
        let mut trace_sq = Complex64::default();
        for i in 0..m {
            for j in 0..m {
                trace_sq += rdm[i * m + j] * rdm[j * m + i];
            }
        }
        let s = schmidt_spectrum(&cm).unwrap();
        let mu_sum: Complex64 = s.mu.iter().sum();
        let mu_sq: Complex64 = s.mu.iter().map(|v| v * v).sum();
        assert!((mu_sum - trace).norm() < 1e-12 * trace.norm().max(1.0));
        assert!((mu_sq - trace_sq).norm() < 1e-11 * trace_sq.norm().max(1.0));
        // and 𝒩 = Σ C² = Tr(CCᵀ) for symmetric C
        assert!((cm.c_norm - trace).norm() < 1e-12 * trace.norm().max(1.0));
    }

    #[test]
    fn natural_orbitals_product_state() {
        let mut e0 = vec![Complex64::default(); 5];
        e0[0] = c(1.0, 0.0);
        let cm = CoefficientMatrix::product_state(&e0);
        let orbs = natural_orbitals(&cm, 2).unwrap();
        assert!((orbs[0][0].norm() - 1.0).abs() < 1e-12);
        for v in &orbs[0][1..] {
            assert!(v.norm() < 1e-10);
        }
        // c-orthogonality of distinct orbitals
        assert!(c_overlap(&orbs[0], &orbs[1]).norm() < 1e-8);
    }

    #[test]
    fn unfold_rejects_collapsed_norm() {
        let spec = BasisSpec::with_default_quadrature(c(1.0, 0.0), 3).unwrap();
        let pairs = pair_basis(3, Sector::Symmetric);
        let ground = EigenPair {
            epsilon: Complex64::default(),
            right: vec![Complex64::default(); pairs.len()],
            left: vec![Complex64::default(); pairs.len()],
            norm_ratio: f64::NAN,
            label: crate::solver::Classification::Unconverged,
            flags: Default::default(),
        };
        assert!(matches!(
            coefficient_matrix(&ground, &spec, Sector::Symmetric),
            Err(Error::ExceptionalPoint { .. })
        ));
    }

    #[test]
    fn symmetric_unfold_is_symmetric() {
        let spec = BasisSpec::with_default_quadrature(c(1.0, 0.0), 4).unwrap();
        let pairs = pair_basis(4, Sector::Symmetric);
        let mut v = vec![Complex64::default(); pairs.len()];
        for (i, val) in v.iter_mut().enumerate() {
            *val = c(0.3 + i as f64 * 0.1, 0.05 * i as f64);
        }
        // c-normalize the vector first
        let norm: Complex64 = v.iter().map(|x| x * x).sum();
        let root = norm.sqrt();
        for val in v.iter_mut() {
            *val /= root;
        }
        let ground = EigenPair {
            epsilon: Complex64::default(),
            right: v,
            left: Vec::new(),
            norm_ratio: 1.0,
            label: crate::solver::Classification::Bound,
            flags: Default::default(),
        };
        let cm = coefficient_matrix(&ground, &spec, Sector::Symmetric).unwrap();
        for n in 0..4 {
            for m in 0..4 {
                assert!((cm.get(n, m) - cm.get(m, n)).norm() < 1e-14);
            }
        }
        assert!((cm.c_norm - 1.0).norm() < 1e-12, "unfolding preserves the c-norm");
    }

    #[test]
    fn antisymmetric_unfold_is_antisymmetric() {
        let spec = BasisSpec::with_default_quadrature(c(1.0, 0.0), 4).unwrap();
        let pairs = pair_basis(4, Sector::Antisymmetric);
        let mut v = vec![Complex64::default(); pairs.len()];
        for (i, val) in v.iter_mut().enumerate() {
            *val = c(0.4 - 0.07 * i as f64, 0.02 * i as f64);
        }
        let norm: Complex64 = v.iter().map(|x| x * x).sum();
        let root = norm.sqrt();
        for val in v.iter_mut() {
            *val /= root;
        }
        let ground = EigenPair {
            epsilon: Complex64::default(),
            right: v,
            left: Vec::new(),
            norm_ratio: 1.0,
            label: crate::solver::Classification::Bound,
            flags: Default::default(),
        };
        let cm = coefficient_matrix(&ground, &spec, Sector::Antisymmetric).unwrap();
        for n in 0..4 {
            assert!(cm.get(n, n).norm() < 1e-15);
            for m in 0..4 {
                assert!((cm.get(n, m) + cm.get(m, n)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn reconstruction_matches_direct_sector_summation() {
        // Ψ from the unfolded M×M matrix equals the direct sum over the
        // symmetry-adapted pair states on a 20×20 grid
        let spec = BasisSpec::with_default_quadrature(Complex64::from_polar(0.9, -0.2), 5).unwrap();
        let pairs = pair_basis(5, Sector::Symmetric);
        let mut v: Vec<Complex64> =
            (0..pairs.len()).map(|i| c(0.21 + 0.05 * i as f64, -0.03 * i as f64)).collect();
        let norm: Complex64 = v.iter().map(|x| x * x).sum();
        let root = norm.sqrt();
        for x in v.iter_mut() {
            *x /= root;
        }
        let ground = EigenPair {
            epsilon: Complex64::default(),
            right: v.clone(),
            left: Vec::new(),
            norm_ratio: 1.0,
            label: crate::solver::Classification::Bound,
            flags: Default::default(),
        };
        let cm = coefficient_matrix(&ground, &spec, Sector::Symmetric).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut worst = 0.0_f64;
        for a in 0..20 {
            for b in 0..20 {
                let x1 = -3.0 + 6.0 * a as f64 / 19.0;
                let x2 = -3.0 + 6.0 * b as f64 / 19.0;
                let from_matrix = cm.evaluate(&spec, x1, x2).unwrap();
                let f1 = crate::basis::eval_all_right(5, &spec, x1);
                let f2 = crate::basis::eval_all_right(5, &spec, x2);
                let mut direct = Complex64::default();
                for (&(n, m), &coeff) in pairs.iter().zip(&v) {
                    let phi = if n == m {
                        f1[n] * f2[n]
                    } else {
                        inv_sqrt2 * (f1[n] * f2[m] + f1[m] * f2[n])
                    };
                    direct += coeff * phi;
                }
                worst = worst.max((from_matrix - direct).norm());
            }
        }
        assert!(worst < 1e-10, "reconstruction deviation {worst:.3e}");
    }

    #[test]
    fn basis_rotation_leaves_spectrum_invariant() {
        // an orthogonal rotation of the one-particle basis is a similarity of
        // C ↦ Q C Qᵀ, so {μ_i} must not move
        let m = 4;
        let mut cmat = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = c(0.2 + 0.1 * (i + j) as f64, 0.05 * (i as f64 - j as f64));
                cmat[i * m + j] = v;
                cmat[j * m + i] = v;
            }
        }
        let c_norm: Complex64 = cmat.iter().map(|x| x * x).sum();
        let cm = CoefficientMatrix { m_size: m, c: cmat.clone(), c_norm, sector: Sector::Symmetric };
        // Givens rotation in the (0, 2) plane by 0.7, then (1, 3) by -0.3
        let mut q = vec![0.0_f64; m * m];
        for i in 0..m {
            q[i * m + i] = 1.0;
        }
        let apply = |q: &mut Vec<f64>, a: usize, b: usize, angle: f64| {
            let (s, co) = angle.sin_cos();
            for j in 0..m {
                let qa = q[a * m + j];
                let qb = q[b * m + j];
                q[a * m + j] = co * qa - s * qb;
                q[b * m + j] = s * qa + co * qb;
            }
        };
        apply(&mut q, 0, 2, 0.7);
        apply(&mut q, 1, 3, -0.3);
        let mut rotated = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::default();
                for a in 0..m {
                    for b in 0..m {
                        acc += q[i * m + a] * cmat[a * m + b] * q[j * m + b];
                    }
                }
                rotated[i * m + j] = acc;
            }
        }
        let c_norm2: Complex64 = rotated.iter().map(|x| x * x).sum();
        let cm2 = CoefficientMatrix { m_size: m, c: rotated, c_norm: c_norm2, sector: Sector::Symmetric };
        let s1 = schmidt_spectrum(&cm).unwrap();
        let s2 = schmidt_spectrum(&cm2).unwrap();
        for (a, b) in s1.mu.iter().zip(&s2.mu) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }
}
