//! Non-Hermitian eigenproblem machinery: dense eigendecomposition with
//! biorthonormal normalization, trace-stationarity selection of the basis
//! frequency, classification of eigenvalues into bound / resonance / rotated
//! continuum, and Ω-trajectory tracking.
//!
//! All Hamiltonians assembled in this crate are complex symmetric, so left
//! eigenvectors are complex conjugates of right ones and the biorthonormal
//! normalization ⟨χ|ψ⟩ = 1 reduces to the bilinear c-normalization Σ c_k² = 1.
//! A vanishing c-norm signals a suspected exceptional point and the pair is
//! flagged instead of normalized.

use num_complex::Complex64;

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    assemble_one_particle, assemble_two_particle, two_particle_trace, ModelParams, OperatorMatrix,
    Particles,
};
use crate::numerics::complex_newton;

/// Label attached to every eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Bound,
    Resonance,
    RotatedContinuum,
    Unconverged,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Bound => "bound",
            Classification::Resonance => "resonance",
            Classification::RotatedContinuum => "rotated_continuum",
            Classification::Unconverged => "unconverged",
        }
    }
}

/// Uncertainty flags carried alongside the classification label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StateFlags {
    /// |Σ c_k²| collapsed before normalization.
    pub suspected_exceptional: bool,
    /// Resonance label not yet confirmed by an Ω-perturbation stability check.
    pub stability_unverified: bool,
}

/// Eigenvalue ε = E − iΓ/2 with biorthonormally paired coefficient vectors.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub epsilon: Complex64,
    /// Right coefficient vector c, c-normalized: Σ c_k² = 1.
    pub right: Vec<Complex64>,
    /// Left coefficient vector d with Σ d_k* c_k = 1.
    pub left: Vec<Complex64>,
    /// ⟨ψ|ψ⟩ of the normalized vector; ≥ 1, with equality in the Hermitian limit.
    pub norm_ratio: f64,
    pub label: Classification,
    pub flags: StateFlags,
}

impl EigenPair {
    /// Decay width Γ = −2 Im ε, floored at zero: tiny or upper-half-plane
    /// imaginary parts are truncation noise on (quasi-)bound states.
    pub fn gamma(&self) -> f64 {
        let g = -2.0 * self.epsilon.im;
        if g < 2e-10 {
            0.0
        } else {
            g
        }
    }
}

/// Bilinear overlap Σ a_k b_k (the coefficient-space c-product).
pub fn c_overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// c-norm threshold below which a pair is treated as a suspected exceptional
/// point.
const EXCEPTIONAL_C_NORM: f64 = 1e-10;

/// Dense bridge to the eigendecomposition backend.
pub(crate) mod dense {
    use super::*;
    use faer::linalg::solvers::Solve;
    use faer::{Mat, Side};

    fn to_mat(n: usize, data: &[Complex64]) -> Mat<Complex64> {
        Mat::from_fn(n, n, |i, j| data[i * n + j])
    }

    /// Eigenvalues and right eigenvectors (columns) of a general complex
    /// matrix.
    pub fn eigen_pairs(
        n: usize,
        data: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
        if n == 1 {
            return Ok((vec![data[0]], vec![vec![Complex64::new(1.0, 0.0)]]));
        }
        let eig = to_mat(n, data)
            .eigen()
            .map_err(|e| Error::EigenBackend(format!("{e:?}")))?;
        let values: Vec<Complex64> = (0..n).map(|k| eig.S()[k]).collect();
        let vectors: Vec<Vec<Complex64>> =
            (0..n).map(|k| (0..n).map(|i| eig.U()[(i, k)]).collect()).collect();
        Ok((values, vectors))
    }

    /// Eigenvalues only; cheaper for large grid matrices.
    pub fn eigenvalues_only(n: usize, data: &[Complex64]) -> Result<Vec<Complex64>> {
        if n == 1 {
            return Ok(vec![data[0]]);
        }
        to_mat(n, data)
            .eigenvalues()
            .map_err(|e| Error::EigenBackend(format!("{e:?}")))
    }

    /// Full eigendecomposition of a real symmetric matrix.
    pub fn selfadjoint_eigen_real(n: usize, data: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mat = Mat::from_fn(n, n, |i, j| data[i * n + j]);
        let eig = mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::EigenBackend(format!("{e:?}")))?;
        let values: Vec<f64> = (0..n).map(|k| eig.S()[k]).collect();
        let vectors: Vec<Vec<f64>> =
            (0..n).map(|k| (0..n).map(|i| eig.U()[(i, k)]).collect()).collect();
        Ok((values, vectors))
    }

    /// Eigenvalues of a real symmetric matrix.
    pub fn selfadjoint_eigenvalues_real(n: usize, data: &[f64]) -> Result<Vec<f64>> {
        let mat = Mat::from_fn(n, n, |i, j| data[i * n + j]);
        mat.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::EigenBackend(format!("{e:?}")))
    }

    /// Singular values and left singular vectors of a real matrix.
    pub fn svd_real(rows: usize, cols: usize, data: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mat = Mat::from_fn(rows, cols, |i, j| data[i * cols + j]);
        let svd = mat.svd().map_err(|e| Error::EigenBackend(format!("{e:?}")))?;
        let k = rows.min(cols);
        let values: Vec<f64> = (0..k).map(|i| svd.S()[i]).collect();
        let left: Vec<Vec<f64>> =
            (0..k).map(|c| (0..rows).map(|r| svd.U()[(r, c)]).collect()).collect();
        Ok((values, left))
    }

    /// Rows of the inverse of the matrix whose columns are `columns`.
    pub fn inverse_rows(n: usize, columns: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let v = Mat::from_fn(n, n, |i, j| columns[j][i]);
        let lu = v.partial_piv_lu();
        let inv = lu.solve(Mat::<Complex64>::identity(n, n));
        Ok((0..n).map(|r| (0..n).map(|c| inv[(r, c)]).collect()).collect())
    }
}

/// Whether a stored matrix is complex symmetric within roundoff.
fn is_complex_symmetric(n: usize, data: &[Complex64]) -> bool {
    let scale = data.iter().map(|e| e.norm()).fold(0.0_f64, f64::max).max(1e-300);
    for i in 0..n {
        for j in i + 1..n {
            if (data[i * n + j] - data[j * n + i]).norm() > 1e-12 * scale {
                return false;
            }
        }
    }
    true
}

/// Flip the overall sign so the largest-modulus component has positive real
/// part (positive imaginary part on ties); fixes the ± left by c-normalization.
fn canonicalize_sign(c: &mut [Complex64]) -> bool {
    let mut imax = 0;
    let mut best = -1.0;
    for (i, v) in c.iter().enumerate() {
        let m = v.norm_sqr();
        if m > best + 1e-30 {
            best = m;
            imax = i;
        }
    }
    let lead = c[imax];
    if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
        for v in c.iter_mut() {
            *v = -*v;
        }
        return true;
    }
    false
}

/// All eigenpairs of a dense complex matrix, biorthonormalized.
///
/// For complex symmetric input the left vectors are conjugates of the right
/// ones; otherwise they come from the inverse of the right eigenvector matrix.
/// Pairs whose c-norm |Σ c_k²| falls below 1e-10 before normalization are
/// labeled unconverged and flagged as suspected exceptional points. The
/// returned list is sorted by ascending Re ε.
pub fn eig_general(matrix: &OperatorMatrix) -> Result<Vec<EigenPair>> {
    eig_dense(matrix.dim, &matrix.entries)
}

/// `eig_general` on raw storage; shared with the grid oracle.
pub fn eig_dense(n: usize, data: &[Complex64]) -> Result<Vec<EigenPair>> {
    if n == 0 {
        return Err(Error::InvalidInput("eig_dense: empty matrix".into()));
    }
    if data.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidInput("eig_dense: non-finite entries".into()));
    }
    let (values, mut vectors) = dense::eigen_pairs(n, data)?;
    let symmetric = is_complex_symmetric(n, data);

    let mut pairs = Vec::with_capacity(n);
    if symmetric {
        for (k, value) in values.iter().enumerate() {
            let c = &mut vectors[k];
            // backend vectors are unit 2-norm, so the raw c-norm doubles as
            // the exceptional-point detector
            let sigma = c_overlap(c, c);
            if sigma.norm() < EXCEPTIONAL_C_NORM {
                let left: Vec<Complex64> = c.iter().map(|v| v.conj()).collect();
                pairs.push(EigenPair {
                    epsilon: *value,
                    right: c.clone(),
                    left,
                    norm_ratio: f64::NAN,
                    label: Classification::Unconverged,
                    flags: StateFlags { suspected_exceptional: true, stability_unverified: false },
                });
                continue;
            }
            let root = sigma.sqrt();
            for v in c.iter_mut() {
                *v /= root;
            }
            canonicalize_sign(c);
            let left: Vec<Complex64> = c.iter().map(|v| v.conj()).collect();
            let norm_ratio: f64 = c.iter().map(|v| v.norm_sqr()).sum();
            pairs.push(EigenPair {
                epsilon: *value,
                right: c.clone(),
                left,
                norm_ratio,
                label: Classification::Unconverged,
                flags: StateFlags::default(),
            });
        }
    } else {
        let inv_rows = dense::inverse_rows(n, &vectors)?;
        for (k, value) in values.iter().enumerate() {
            let mut c = vectors[k].clone();
            let mut d: Vec<Complex64> = inv_rows[k].iter().map(|v| v.conj()).collect();
            let pairing: Complex64 = c.iter().zip(&d).map(|(ci, di)| di.conj() * ci).sum();
            if !pairing.is_finite() || (pairing - 1.0).norm() > 1e-6 {
                pairs.push(EigenPair {
                    epsilon: *value,
                    right: c,
                    left: d,
                    norm_ratio: f64::NAN,
                    label: Classification::Unconverged,
                    flags: StateFlags { suspected_exceptional: true, stability_unverified: false },
                });
                continue;
            }
            // balance the two norms without touching the pairing
            let nc: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let nd: f64 = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let gamma = (nd / nc).sqrt();
            for v in c.iter_mut() {
                *v *= gamma;
            }
            for v in d.iter_mut() {
                *v /= gamma;
            }
            if canonicalize_sign(&mut c) {
                for v in d.iter_mut() {
                    *v = -*v;
                }
            }
            pairs.push(EigenPair {
                epsilon: *value,
                right: c,
                left: d,
                norm_ratio: nc * nd,
                label: Classification::Unconverged,
                flags: StateFlags::default(),
            });
        }
    }
    pairs.sort_by(|a, b| {
        (a.epsilon.re, a.epsilon.im)
            .partial_cmp(&(b.epsilon.re, b.epsilon.im))
            .expect("finite eigenvalues")
    });
    Ok(pairs)
}

/// max_n ‖H c_n − ε_n c_n‖₂ / ‖H‖_F over converged pairs.
pub fn eigen_residual(matrix: &OperatorMatrix, pairs: &[EigenPair]) -> f64 {
    let n = matrix.dim;
    let h_norm = matrix.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let mut worst = 0.0_f64;
    for pair in pairs {
        if pair.flags.suspected_exceptional {
            continue;
        }
        let scale = pair.right.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut res = 0.0_f64;
        for i in 0..n {
            let mut acc = -pair.epsilon * pair.right[i];
            for j in 0..n {
                acc += matrix.get(i, j) * pair.right[j];
            }
            res += acc.norm_sqr();
        }
        worst = worst.max(res.sqrt() / (h_norm * scale));
    }
    worst
}

/// max_{n≠k} |Σ d_k* c_n| over converged pairs.
pub fn biorthonormality_deviation(pairs: &[EigenPair]) -> f64 {
    let mut worst = 0.0_f64;
    for (k, pk) in pairs.iter().enumerate() {
        if pk.flags.suspected_exceptional {
            continue;
        }
        for (n, pn) in pairs.iter().enumerate() {
            if n == k || pn.flags.suspected_exceptional {
                continue;
            }
            let overlap: Complex64 = pk.left.iter().zip(&pn.right).map(|(d, c)| d.conj() * c).sum();
            worst = worst.max(overlap.norm());
        }
    }
    worst
}

/// Tolerances used by the geometric classification.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyConfig {
    /// Bound-state tolerance on Im ε.
    pub bound_im_tol: f64,
    /// Angular half-width of the rotated-continuum ray.
    pub angular_tol: f64,
    /// States this close to a threshold count as continuum edges (relative to
    /// the spectral scale).
    pub threshold_radius: f64,
    /// Rigorous lower bound of the operator spectrum, when one is known.
    /// Strongly rotated truncated bases produce spurious eigenvalues far below
    /// it; anything under the floor is unconverged by definition.
    pub spectral_floor: Option<f64>,
    /// Truncation noise band on Im ε: a barely-autoionizing state whose true
    /// width is below the numerical resolution can surface slightly in the
    /// upper half-plane and must still count as a resonance candidate.
    pub resonance_im_noise: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            bound_im_tol: 1e-6,
            angular_tol: 0.1,
            threshold_radius: 1e-9,
            spectral_floor: None,
            resonance_im_noise: 1e-3,
        }
    }
}

/// Geometric classification of eigenvalues against the continuum rays.
///
/// Bound: |Im ε| below bound_im_tol and Re ε below every threshold. Rotated
/// continuum: within the angular tolerance of a ray that starts at a threshold
/// and points along −2θ (= arg Ω). Isolated lower-half eigenvalues become
/// resonance candidates with `stability_unverified` set; the Ω-perturbation
/// confirmation lives at the workflow level, see [`crate::model`]. Everything
/// else is unconverged. Only ε enters, so the labels are invariant under any
/// rescaling of the coefficient vectors.
pub fn classify_states(
    mut pairs: Vec<EigenPair>,
    spec: &BasisSpec,
    thresholds: &[f64],
    cfg: &ClassifyConfig,
) -> Vec<EigenPair> {
    let ray = spec.continuum_ray_angle();
    let min_threshold = thresholds.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = pairs.iter().map(|p| p.epsilon.norm()).fold(0.0_f64, f64::max).max(1.0);
    for pair in &mut pairs {
        if pair.flags.suspected_exceptional {
            pair.label = Classification::Unconverged;
            continue;
        }
        let e = pair.epsilon;
        if let Some(floor) = cfg.spectral_floor {
            if e.re < floor {
                pair.label = Classification::Unconverged;
                continue;
            }
        }
        if e.im.abs() < cfg.bound_im_tol && e.re < min_threshold {
            pair.label = Classification::Bound;
            pair.flags.stability_unverified = false;
            continue;
        }
        let mut on_ray = false;
        for &thr in thresholds {
            let d = e - thr;
            if d.norm() < cfg.threshold_radius * scale {
                on_ray = true;
                break;
            }
            let mut diff = d.arg() - ray;
            while diff > std::f64::consts::PI {
                diff -= 2.0 * std::f64::consts::PI;
            }
            while diff < -std::f64::consts::PI {
                diff += 2.0 * std::f64::consts::PI;
            }
            if diff.abs() <= cfg.angular_tol {
                on_ray = true;
                break;
            }
        }
        if on_ray {
            pair.label = Classification::RotatedContinuum;
            pair.flags.stability_unverified = false;
        } else if e.im <= cfg.resonance_im_noise * e.norm().max(1.0) {
            pair.label = Classification::Resonance;
            pair.flags.stability_unverified = true;
        } else {
            pair.label = Classification::Unconverged;
        }
    }
    pairs
}

/// Result of the trace-stationarity search.
#[derive(Debug, Clone, Copy)]
pub struct OmegaOptimum {
    pub omega_opt: Complex64,
    /// |∂Tr/∂Ω| at the optimum.
    pub residual: f64,
    pub trace_value: Complex64,
}

/// Residual acceptance: residual < 1e-8 max(1, |Tr|).
const TRACE_RESIDUAL_REL: f64 = 1e-8;

/// Finds a stationary point of Ω ↦ Tr H_Ω for an arbitrary trace map.
///
/// The derivative is central-differenced and driven to zero with
/// `complex_newton`. Stationary points of a trace that is real on the real
/// axis come in conjugate pairs; the representative with Im Ω <= 0 (the branch
/// that uncovers decaying resonances) is returned. If Newton fails from the
/// seed, a coarse scan over |Ω| ∈ [0.2, 5], |arg Ω| ∈ [0, 0.7] picks a new
/// start before giving up.
pub fn optimize_omega_trace<F>(trace: F, omega_seed: Complex64) -> Result<OmegaOptimum>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let guarded = |omega: Complex64| -> Complex64 {
        if omega.re <= 1e-3 || !omega.is_finite() || omega.norm() > 1e3 {
            return nan;
        }
        trace(omega).unwrap_or(nan)
    };
    let derivative = |omega: Complex64| -> Complex64 {
        let h = 1e-6 * omega.norm().max(1.0);
        (guarded(omega + h) - guarded(omega - h)) / (2.0 * h)
    };

    let trace_scale = guarded(omega_seed).norm().max(1.0);
    let tol = 0.3 * TRACE_RESIDUAL_REL * trace_scale;

    let accept = |omega: Complex64| -> Option<OmegaOptimum> {
        if !omega.is_finite() || omega.re <= 1e-3 {
            return None;
        }
        // conjugate-pair canonicalization: keep the resonance-exposing branch
        let omega = if omega.im > 0.0 { omega.conj() } else { omega };
        let value = trace(omega).ok()?;
        let residual = derivative(omega).norm();
        if residual < TRACE_RESIDUAL_REL * value.norm().max(1.0) {
            Some(OmegaOptimum { omega_opt: omega, residual, trace_value: value })
        } else {
            None
        }
    };

    if let Ok(root) = complex_newton(&derivative, omega_seed, tol) {
        if let Some(opt) = accept(root) {
            return Ok(opt);
        }
    }

    // fallback: coarse polar scan followed by local Newton refinement
    let mut best: Option<(f64, Complex64)> = None;
    for i in 0..13 {
        let radius = 0.2 * (5.0_f64 / 0.2).powf(i as f64 / 12.0);
        for j in 0..8 {
            let angle = -0.7 * (j as f64) / 7.0;
            let omega = Complex64::from_polar(radius, angle);
            let g = derivative(omega).norm();
            if g.is_finite() && best.map_or(true, |(gb, _)| g < gb) {
                best = Some((g, omega));
            }
        }
    }
    let summary = match best {
        Some((g, w)) => format!("best |dTr/dOmega| = {g:.3e} at Omega = {w}"),
        None => "no finite derivative anywhere on the scan grid".to_string(),
    };
    if let Some((_, start)) = best {
        if let Ok(root) = complex_newton(&derivative, start, tol) {
            if let Some(opt) = accept(root) {
                return Ok(opt);
            }
        }
        if let Some(opt) = accept(start) {
            return Ok(opt);
        }
    }
    Err(Error::NoStationaryOmega { scan_summary: summary })
}

/// Trace-stationarity optimization for the Gaussian-dot Hamiltonian.
///
/// The trace is evaluated from diagonal entries only — the basis frequency is
/// fixed before any diagonalization — for the one- or two-particle matrix
/// selected by `particles`.
pub fn optimize_omega(
    params: &ModelParams,
    m_size: usize,
    omega_seed: Complex64,
    particles: Particles,
) -> Result<OmegaOptimum> {
    let trace = |omega: Complex64| -> Result<Complex64> {
        let spec = BasisSpec::with_default_quadrature(omega, m_size)?;
        match particles {
            Particles::One => Ok(assemble_one_particle(&spec, params)?.trace()),
            Particles::Two(sector) => {
                let mut p = *params;
                p.sector = sector;
                two_particle_trace(&spec, &p)
            }
        }
    };
    optimize_omega_trace(trace, omega_seed)
}

/// How the tracked state is chosen at the first point of a trajectory.
#[derive(Debug, Clone, Copy)]
pub enum StateSelector {
    /// Lowest Re ε.
    Ground,
    /// Index in the Re-sorted spectrum.
    Index(usize),
    /// Closest eigenvalue to a target energy.
    NearEnergy(Complex64),
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub omega: Complex64,
    pub epsilon: Complex64,
}

/// Slowest point of a trajectory: min |dε/dΩ| and where it happens.
#[derive(Debug, Clone, Copy)]
pub struct Stagnation {
    pub omega: Complex64,
    pub epsilon: Complex64,
    pub speed: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub stagnation: Option<Stagnation>,
}

/// Eigenvalue trajectory of a tracked state along an Ω path, for an arbitrary
/// assembly map. States are followed by maximal |c-product overlap| between
/// consecutive eigenvector sets; if the second-best overlap comes within 10%
/// of the best, the trajectory forks and both branches are returned.
pub fn alpha_trajectory_with<A>(
    assemble: A,
    omega_path: &[Complex64],
    select: StateSelector,
) -> Result<Vec<Trajectory>>
where
    A: Fn(Complex64) -> Result<OperatorMatrix>,
{
    if omega_path.is_empty() {
        return Err(Error::InvalidInput("alpha_trajectory: empty path".into()));
    }
    const MAX_BRANCHES: usize = 4;

    struct Branch {
        vector: Vec<Complex64>,
        points: Vec<TrajectoryPoint>,
    }

    let solve = |omega: Complex64| -> Result<Vec<EigenPair>> {
        let matrix = assemble(omega)?;
        eig_general(&matrix)
    };

    let first = solve(omega_path[0])?;
    let converged: Vec<&EigenPair> =
        first.iter().filter(|p| !p.flags.suspected_exceptional).collect();
    if converged.is_empty() {
        return Err(Error::StateSelection("no converged states at the first path point".into()));
    }
    let start = match select {
        StateSelector::Ground => converged[0],
        StateSelector::Index(k) => converged.get(k).copied().ok_or_else(|| {
            Error::StateSelection(format!("index {k} out of range ({} states)", converged.len()))
        })?,
        StateSelector::NearEnergy(target) => converged
            .iter()
            .min_by(|a, b| {
                (a.epsilon - target)
                    .norm()
                    .partial_cmp(&(b.epsilon - target).norm())
                    .expect("finite")
            })
            .copied()
            .expect("nonempty"),
    };
    let mut branches = vec![Branch {
        vector: start.right.clone(),
        points: vec![TrajectoryPoint { omega: omega_path[0], epsilon: start.epsilon }],
    }];

    for &omega in &omega_path[1..] {
        let pairs = solve(omega)?;
        let mut next_branches = Vec::new();
        for branch in branches {
            let mut scored: Vec<(f64, &EigenPair)> = pairs
                .iter()
                .filter(|p| !p.flags.suspected_exceptional)
                .map(|p| (c_overlap(&branch.vector, &p.right).norm(), p))
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite overlaps"));
            if scored.is_empty() {
                next_branches.push(branch);
                continue;
            }
            let fork = scored.len() > 1
                && scored[1].0 >= 0.9 * scored[0].0
                && next_branches.len() + 2 <= MAX_BRANCHES;
            let take = if fork { 2 } else { 1 };
            for &(_, pair) in scored.iter().take(take) {
                let mut points = branch.points.clone();
                points.push(TrajectoryPoint { omega, epsilon: pair.epsilon });
                next_branches.push(Branch { vector: pair.right.clone(), points });
            }
        }
        branches = next_branches;
    }

    Ok(branches
        .into_iter()
        .map(|b| {
            let stagnation = b
                .points
                .windows(2)
                .filter(|w| (w[1].omega - w[0].omega).norm() > 0.0)
                .map(|w| {
                    let speed =
                        (w[1].epsilon - w[0].epsilon).norm() / (w[1].omega - w[0].omega).norm();
                    Stagnation {
                        omega: 0.5 * (w[0].omega + w[1].omega),
                        epsilon: 0.5 * (w[0].epsilon + w[1].epsilon),
                        speed,
                    }
                })
                .min_by(|a, b| a.speed.partial_cmp(&b.speed).expect("finite"));
            Trajectory { points: b.points, stagnation }
        })
        .collect())
}

/// Ω-trajectory of the Gaussian-dot problem.
pub fn alpha_trajectory(
    params: &ModelParams,
    m_size: usize,
    omega_path: &[Complex64],
    select: StateSelector,
    particles: Particles,
) -> Result<Vec<Trajectory>> {
    alpha_trajectory_with(
        |omega| {
            let spec = BasisSpec::with_default_quadrature(omega, m_size)?;
            match particles {
                Particles::One => assemble_one_particle(&spec, params),
                Particles::Two(sector) => {
                    let mut p = *params;
                    p.sector = sector;
                    assemble_two_particle(&spec, &p)
                }
            }
        },
        omega_path,
        select,
    )
}

/// Per-M ground-state quantities with Cauchy differences.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub m_size: usize,
    pub epsilon0: Complex64,
    pub linear_c: Complex64,
    pub linear_r: f64,
    pub omega_used: Complex64,
    /// |ε(M) − ε(M_prev)|.
    pub cauchy_epsilon: Option<f64>,
    pub cauchy_linear_r: Option<f64>,
}

/// Runs a full ground-state pipeline at each truncation in `m_list` under the
/// default Ω policy.
pub fn convergence_study(params: &ModelParams, m_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let point = crate::model::solve_point(params, m, crate::model::OmegaPolicy::WellScale)?;
        let prev = rows.last();
        rows.push(ConvergenceRow {
            m_size: m,
            epsilon0: point.ground.epsilon,
            linear_c: point.entropy.linear_c,
            linear_r: point.entropy.linear_r,
            omega_used: point.omega_two,
            cauchy_epsilon: prev.map(|p| (point.ground.epsilon - p.epsilon0).norm()),
            cauchy_linear_r: prev.map(|p| (point.entropy.linear_r - p.linear_r).abs()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{kinetic_matrix, x_squared_matrix, Sector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matrix_from(n: usize, entries: &[Complex64]) -> OperatorMatrix {
        let spec = BasisSpec::with_default_quadrature(c(1.0, 0.0), n.max(1)).unwrap();
        OperatorMatrix { dim: n, entries: entries.to_vec(), basis: spec, particles: Particles::One }
    }

    #[test]
    fn diagonal_matrix_eigenpairs() {
        let m = matrix_from(2, &[c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.5)]);
        let pairs = eig_general(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].epsilon - c(-1.0, 0.5)).norm() < 1e-14);
        assert!((pairs[1].epsilon - c(2.0, 1.0)).norm() < 1e-14);
        for p in &pairs {
            let big = p.right.iter().filter(|v| v.norm() > 0.5).count();
            assert_eq!(big, 1, "unit coordinate vector expected");
            assert!((p.norm_ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_matrix_real_spectrum_unit_ratio() {
        // Hermitian but not symmetric: exercises the general (inverse) path
        let m = matrix_from(2, &[c(1.0, 0.0), c(0.0, 0.7), c(0.0, -0.7), c(2.0, 0.0)]);
        let pairs = eig_general(&m).unwrap();
        for p in &pairs {
            assert!(p.epsilon.im.abs() < 1e-12);
            assert!((p.norm_ratio - 1.0).abs() < 1e-10, "ratio {}", p.norm_ratio);
        }
        assert!(biorthonormality_deviation(&pairs) < 1e-12);
    }

    #[test]
    fn symmetric_off_diagonal_closed_form() {
        let s = c(0.3, 0.8);
        let m = matrix_from(2, &[c(0.0, 0.0), s, s, c(0.0, 0.0)]);
        let pairs = eig_general(&m).unwrap();
        for p in &pairs {
            assert!((p.epsilon - s).norm() < 1e-13 || (p.epsilon + s).norm() < 1e-13);
            // vectors (1, ±1)/√2 after c-normalization
            let ratio = p.right[1] / p.right[0];
            assert!((ratio.norm() - 1.0).abs() < 1e-12);
            let sum_sq = c_overlap(&p.right, &p.right);
            assert!((sum_sq - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn left_vectors_pair_biorthonormally() {
        // complex symmetric with nontrivial structure
        let spec = BasisSpec::with_default_quadrature(Complex64::from_polar(1.0, -0.3), 6).unwrap();
        let t = kinetic_matrix(&spec);
        let x2 = x_squared_matrix(&spec);
        let mut h = t.clone();
        for (a, b) in h.entries.iter_mut().zip(&x2.entries) {
            *a += 0.7 * b;
        }
        let pairs = eig_general(&h).unwrap();
        assert!(biorthonormality_deviation(&pairs) < 1e-9);
        assert!(eigen_residual(&h, &pairs) < 1e-10);
        for p in &pairs {
            assert!(p.norm_ratio >= 1.0 - 1e-9, "norm ratio {}", p.norm_ratio);
            let diag: Complex64 = p.left.iter().zip(&p.right).map(|(d, cc)| d.conj() * cc).sum();
            assert!((diag - 1.0).norm() < 1e-12);
        }
        // genuinely non-Hermitian: at least one ratio strictly above 1
        let strict = pairs.iter().map(|p| p.norm_ratio).fold(0.0_f64, f64::max);
        assert!(strict > 1.0 + 1e-6, "complex rotation must show r > 1, got {strict}");
    }

    #[test]
    fn free_particle_classifies_as_rotated_continuum() {
        let spec =
            BasisSpec::with_default_quadrature(Complex64::from_polar(1.0, -0.5), 12).unwrap();
        let t = kinetic_matrix(&spec);
        let pairs = eig_general(&t).unwrap();
        let classified = classify_states(pairs, &spec, &[0.0], &ClassifyConfig::default());
        for p in &classified {
            assert_eq!(p.label, Classification::RotatedContinuum, "ε = {}", p.epsilon);
        }
    }

    #[test]
    fn hermitian_bound_spectrum_classifies_bound() {
        let spec = BasisSpec::with_default_quadrature(c(1.0, 0.0), 8).unwrap();
        let t = kinetic_matrix(&spec);
        let x2 = x_squared_matrix(&spec);
        let mut h = t.clone();
        for (a, b) in h.entries.iter_mut().zip(&x2.entries) {
            *a += 0.5 * b;
        }
        let pairs = eig_general(&h).unwrap();
        let classified = classify_states(pairs, &spec, &[1e6], &ClassifyConfig::default());
        assert!(classified.iter().all(|p| p.label == Classification::Bound));
    }

    #[test]
    fn trace_stationarity_exact_oscillator_target() {
        // H = T + Ω_true² x²/2 in basis Ω: Tr = M²(Ω/4 + Ω_true²/(4Ω)),
        // stationary exactly at Ω_true for every M
        let omega_true = 1.4;
        for m in [1usize, 2, 5, 9] {
            let trace = |omega: Complex64| -> Result<Complex64> {
                let spec = BasisSpec::with_default_quadrature(omega, m)?;
                let t = kinetic_matrix(&spec);
                let x2 = x_squared_matrix(&spec);
                Ok(t.trace() + 0.5 * omega_true * omega_true * x2.trace())
            };
            let opt = optimize_omega_trace(trace, c(0.8, -0.1)).unwrap();
            assert!(
                (opt.omega_opt - c(omega_true, 0.0)).norm() < 1e-6,
                "M = {m}: Omega_opt = {}",
                opt.omega_opt
            );
            assert!(opt.residual < 1e-8 * opt.trace_value.norm().max(1.0));
        }
    }

    #[test]
    fn free_particle_has_no_stationary_point() {
        // Tr = Ω M²/4: derivative never vanishes
        let trace = |omega: Complex64| -> Result<Complex64> { Ok(omega * 4.0) };
        let err = optimize_omega_trace(trace, c(1.0, -0.2)).unwrap_err();
        assert!(matches!(err, Error::NoStationaryOmega { .. }));
    }

    #[test]
    fn qd_omega_optimization_converges() {
        let params = ModelParams::new(5.0, 3.0, 0.3, Sector::Symmetric, true).unwrap();
        let opt = optimize_omega(&params, 8, c(1.0, 0.0), Particles::One).unwrap();
        assert!(opt.residual < 1e-8 * opt.trace_value.norm().max(1.0));
        assert!(opt.omega_opt.re > 0.0);
        assert!(opt.omega_opt.im <= 0.0, "canonical branch has Im <= 0");
    }

    #[test]
    fn bound_state_trajectory_is_flat() {
        let params = ModelParams::new(5.0, 2.0, 0.2, Sector::Symmetric, false).unwrap();
        let path: Vec<Complex64> =
            (0..6).map(|k| Complex64::from_polar(1.0, -0.05 * k as f64)).collect();
        let trajectories =
            alpha_trajectory(&params, 24, &path, StateSelector::Ground, Particles::One).unwrap();
        assert_eq!(trajectories.len(), 1);
        let points = &trajectories[0].points;
        let first = points[0].epsilon;
        let spread = points.iter().map(|p| (p.epsilon - first).norm()).fold(0.0_f64, f64::max);
        assert!(spread < 1e-7, "bound-state spread {spread:.3e}");
    }

    #[test]
    fn oscillator_in_own_basis_constant_along_path() {
        // fixed H = HO(1) expanded in basis Ω over a path: truncation error at
        // M = 30 is negligible, so ε₀ stays put
        let path: Vec<Complex64> = (0..5).map(|k| c(0.85 + 0.1 * k as f64, 0.0)).collect();
        let assemble = |omega: Complex64| -> Result<OperatorMatrix> {
            let spec = BasisSpec::with_default_quadrature(omega, 30)?;
            let t = kinetic_matrix(&spec);
            let x2 = x_squared_matrix(&spec);
            let mut h = t.clone();
            for (a, b) in h.entries.iter_mut().zip(&x2.entries) {
                *a += 0.5 * b;
            }
            Ok(h)
        };
        let trajectories = alpha_trajectory_with(assemble, &path, StateSelector::Ground).unwrap();
        let points = &trajectories[0].points;
        for p in points {
            assert!((p.epsilon - c(0.5, 0.0)).norm() < 1e-9, "ε = {}", p.epsilon);
        }
    }

    #[test]
    fn classification_is_phase_invariant() {
        let spec =
            BasisSpec::with_default_quadrature(Complex64::from_polar(1.0, -0.4), 10).unwrap();
        let params = ModelParams::new(5.0, 2.0, 0.2, Sector::Symmetric, false).unwrap();
        let h = assemble_one_particle(&spec, &params).unwrap();
        let pairs = eig_general(&h).unwrap();
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated: Vec<EigenPair> = pairs
            .iter()
            .map(|p| {
                let mut q = p.clone();
                for v in q.right.iter_mut() {
                    *v *= phase;
                }
                q
            })
            .collect();
        let cfg = ClassifyConfig::default();
        let a = classify_states(pairs, &spec, &[0.0], &cfg);
        let b = classify_states(rotated, &spec, &[0.0], &cfg);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.label, y.label);
        }
    }
}
