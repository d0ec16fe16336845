use std::f64::consts::PI;

use super::field::{synthesize, with_parts, HarmonicCoeffs, SphericalField};
use crate::error::{Error, Result};
use crate::sphere::{dot, Vec3};

/// Eigenvalue of `Δ + 2` on degree-`l` harmonics of S².
#[inline]
pub fn christoffel_eigenvalue(l: usize) -> f64 {
    2.0 - (l * (l + 1)) as f64
}

/// `(∫ x_i f(x) dx)_i` by grid quadrature.
pub fn orthogonality_defect(f: &SphericalField) -> Vec3 {
    let g = f.grid();
    let mut d = [0.0; 3];
    for ((p, w), v) in g.nodes().iter().zip(g.weights()).zip(f.values()) {
        let c = p.coords();
        for i in 0..3 {
            d[i] += w * v * c[i];
        }
    }
    d
}

/// Vector `v` with `⟨v, x⟩` the degree-1 part of `f`.
pub fn linear_component(f: &SphericalField) -> Vec3 {
    let d = orthogonality_defect(f);
    let k = 3.0 / (4.0 * PI);
    [k * d[0], k * d[1], k * d[2]]
}

/// Removes the degree-1 part; attached coefficients are updated to match.
pub fn project_out_linear(f: &SphericalField) -> SphericalField {
    let v = linear_component(f);
    let values = f
        .grid()
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(p, val)| val - dot(&v, p.coords()))
        .collect();
    let coeffs = f.coeffs().map(|c| {
        let mut c = c.clone();
        if c.l_max() >= 1 {
            for m in -1..=1 {
                c.set(1, m, 0.0);
            }
        }
        c
    });
    with_parts(f.grid().clone(), values, coeffs)
}

/// Default orthogonality tolerance `1e-8 · max |f|`.
pub fn default_tolerance(f: &SphericalField) -> f64 {
    1e-8 * f.max_abs()
}

/// Coefficients of `(Δ + 2) u`.
pub fn apply_christoffel_operator(u: &HarmonicCoeffs) -> HarmonicCoeffs {
    u.map_degrees(christoffel_eigenvalue)
}

/// Spectral inverse of `Δ + 2` with the degree-1 part of the result set to zero.
pub fn invert_christoffel_operator(f: &HarmonicCoeffs) -> HarmonicCoeffs {
    f.map_degrees(|l| if l == 1 { 0.0 } else { 1.0 / christoffel_eigenvalue(l) })
}

/// Solves `Δu + 2u = f` on S².
///
/// The right-hand side must be analyzed and orthogonal to the linear
/// functions within `tol` (Euclidean norm of the defect vector).
pub fn solve_christoffel(f: &SphericalField, tol: f64) -> Result<SphericalField> {
    let coeffs = f.coeffs().ok_or(Error::NotAnalyzed)?;
    let defect = orthogonality_defect(f);
    if dot(&defect, &defect).sqrt() > tol {
        return Err(Error::OrthogonalityViolation { defect, tol });
    }
    Ok(synthesize(&invert_christoffel_operator(coeffs), f.grid()))
}

/// `max |Δu + 2u − f|` over the grid nodes.
pub fn christoffel_residual(u: &SphericalField, f: &SphericalField) -> Result<f64> {
    let uc = u.coeffs().ok_or(Error::NotAnalyzed)?;
    let lu = synthesize(&apply_christoffel_operator(uc), u.grid());
    if lu.values().len() != f.values().len() {
        return Err(Error::GridMismatch("solution and data grids differ".into()));
    }
    Ok(lu
        .values()
        .iter()
        .zip(f.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}
