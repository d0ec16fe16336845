//! Real spherical harmonics on S²: analysis, synthesis, tangential
//! derivatives and the spectral solver for `Δu + 2u = f`.

pub mod basis;
mod field;
mod solver;

pub use basis::{coeff_count, lm_index, Jet, Jet1, Jet2, SolidHarmonics};
pub use field::{
    analyze, inner_product, sphere_gradient, sphere_hessian, synthesize, FieldEvaluator, HarmonicCoeffs,
    SphericalField, SurfaceJet,
};
pub use solver::{
    apply_christoffel_operator, christoffel_eigenvalue, christoffel_residual, default_tolerance,
    invert_christoffel_operator, linear_component, orthogonality_defect, project_out_linear, solve_christoffel,
};
