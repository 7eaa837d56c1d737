//! Shared fixtures for the criterion benchmarks.

use num_complex::Complex64;
use qdot_core::basis::BasisSpec;
use qdot_core::hamiltonian::{assemble_two_particle, ModelParams, OperatorMatrix, Sector};

pub fn bound_params() -> ModelParams {
    ModelParams::new(2.0, 3.0, 0.2, Sector::Symmetric, true).unwrap()
}

pub fn resonant_params() -> ModelParams {
    ModelParams::new(2.0, 1.0, 0.2, Sector::Symmetric, true).unwrap()
}

pub fn basis(m_size: usize) -> BasisSpec {
    BasisSpec::with_default_quadrature(Complex64::new(0.8, 0.0), m_size).unwrap()
}

pub fn rotated_basis(m_size: usize) -> BasisSpec {
    BasisSpec::with_default_quadrature(Complex64::from_polar(1.0, -0.4), m_size).unwrap()
}

pub fn two_particle_matrix(m_size: usize) -> OperatorMatrix {
    assemble_two_particle(&rotated_basis(m_size), &resonant_params()).unwrap()
}
