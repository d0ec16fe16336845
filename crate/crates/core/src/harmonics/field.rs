use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{coeff_count, lm_index, sym_form, Jet1, Jet2, SolidHarmonics};
use crate::error::{Error, Result};
use crate::sphere::{tangent_basis, SphereGrid, SpherePoint, Vec3};

/// Real, fully normalized spherical-harmonic coefficients `c_{l,m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    l_max: usize,
    c: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        Self { l_max, c: vec![0.0; coeff_count(l_max)] }
    }

    pub fn from_vec(l_max: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != coeff_count(l_max) {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients given, band limit {l_max} needs {}",
                c.len(),
                coeff_count(l_max)
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { l_max, c })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        self.c[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        assert!(l <= self.l_max && m.unsigned_abs() as usize <= l, "({l}, {m}) out of range");
        self.c[lm_index(l, m)] = v;
    }

    /// Coefficients of degree `l` as a slice ordered `m = -l..=l`.
    pub fn degree(&self, l: usize) -> &[f64] {
        &self.c[l * l..(l + 1) * (l + 1)]
    }

    /// `Σ c²`, equal to `∫ f²` for the synthesized field.
    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }

    /// Copy with band limit `l_max`, zero-padded or truncated.
    pub fn with_band_limit(&self, l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        let n = coeff_count(l_max.min(self.l_max));
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Highest degree holding a coefficient above `rel_tol · max |c|`.
    pub fn effective_band_limit(&self, rel_tol: f64) -> usize {
        let cmax = self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let thr = rel_tol * cmax;
        (0..=self.l_max)
            .rev()
            .find(|&l| self.degree(l).iter().any(|v| v.abs() > thr))
            .unwrap_or(0)
    }

    /// Applies `c_{l,m} ← g(l) c_{l,m}`.
    pub fn map_degrees(&self, g: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.l_max {
            let s = g(l);
            for v in &mut out.c[l * l..(l + 1) * (l + 1)] {
                *v *= s;
            }
        }
        out
    }

    /// Vector `v` with `Σ_m c_{1,m} Y_{1,m}(x) = ⟨v, x⟩`.
    pub fn linear_part(&self) -> Vec3 {
        let k = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        [k * self.get(1, 1), k * self.get(1, -1), k * self.get(1, 0)]
    }

    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        let l_max = self.l_max.max(other.l_max);
        let mut out = self.with_band_limit(l_max);
        for (i, v) in other.c.iter().enumerate() {
            out.c[i] += alpha * v;
        }
        out
    }
}

/// Real function on S², sampled on a grid, with optional coefficients.
#[derive(Debug, Clone)]
pub struct SphericalField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
    coeffs: Option<HarmonicCoeffs>,
}

impl SphericalField {
    pub fn from_values(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, coeffs: None })
    }

    /// Samples `g` at every node.
    pub fn from_fn(grid: Arc<SphereGrid>, g: impl Fn(&SpherePoint) -> f64 + Sync) -> Self {
        let values = grid.nodes().par_iter().map(&g).collect();
        Self { grid, values, coeffs: None }
    }

    /// Synthesizes `coeffs` on `grid` and keeps the coefficients.
    pub fn from_coeffs(grid: Arc<SphereGrid>, coeffs: HarmonicCoeffs) -> Self {
        synthesize(&coeffs, &grid)
    }

    /// Returns the field with coefficients up to `l_max` attached.
    pub fn analyzed(mut self, l_max: usize) -> Result<Self> {
        self.coeffs = Some(analyze(&self, l_max)?);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> Option<&HarmonicCoeffs> {
        self.coeffs.as_ref()
    }

    pub fn l_max(&self) -> Option<usize> {
        self.coeffs.as_ref().map(|c| c.l_max())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Minimum value and the node where it occurs (first on ties).
    pub fn min_with_node(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |acc, (i, &v)| if v < acc.0 { (v, i) } else { acc })
    }

    /// Fails with `NotPositive` unless every sample is strictly positive.
    pub fn ensure_positive(&self) -> Result<()> {
        let (min, node) = self.min_with_node();
        if !(min > 0.0) {
            return Err(Error::NotPositive { min, node });
        }
        Ok(())
    }

    /// Largest deviation between samples and the synthesized coefficients.
    pub fn consistency_error(&self) -> Option<f64> {
        let c = self.coeffs.as_ref()?;
        let s = synthesize(c, &self.grid);
        Some(
            self.values
                .iter()
                .zip(s.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        )
    }
}

/// Forward transform by quadrature against `Y_{l,m}`.
///
/// Ring partial sums are computed in parallel and added in ring order, so
/// the result does not depend on the worker count.
pub fn analyze(field: &SphericalField, l_max: usize) -> Result<HarmonicCoeffs> {
    let grid = &field.grid;
    if grid.resolution() < l_max + 1 {
        return Err(Error::BandLimitExceeded { l_max, needed: l_max + 1, got: grid.resolution() });
    }
    let basis = SolidHarmonics::new(l_max);
    let k = coeff_count(l_max);
    let n_az = grid.azimuth_count();
    let rings: Vec<Vec<f64>> = (0..grid.resolution())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; k];
            let mut y = vec![0.0; k];
            for j in 0..n_az {
                let idx = grid.index(i, j);
                let wf = grid.weights()[idx] * field.values[idx];
                basis.eval_unit(grid.nodes()[idx].coords(), &mut y);
                for (a, v) in acc.iter_mut().zip(&y) {
                    *a += wf * v;
                }
            }
            acc
        })
        .collect();
    let mut c = vec![0.0; k];
    for r in &rings {
        for (a, v) in c.iter_mut().zip(r) {
            *a += v;
        }
    }
    Ok(HarmonicCoeffs { l_max, c })
}

/// Pointwise `Σ c_{l,m} Y_{l,m}` on every node; the result keeps `coeffs`.
pub fn synthesize(coeffs: &HarmonicCoeffs, grid: &Arc<SphereGrid>) -> SphericalField {
    let ev = FieldEvaluator::new(coeffs);
    let values = grid.nodes().par_iter().map(|p| ev.value(p)).collect();
    SphericalField { grid: grid.clone(), values, coeffs: Some(coeffs.clone()) }
}

/// Second-order spherical jet at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub value: f64,
    /// Tangential gradient as an ambient vector.
    pub grad: Vec3,
    /// Ambient symmetric matrix whose restriction to the tangent plane is
    /// the covariant Hessian, packed as in [`super::basis::Jet2`].
    pub hess: [f64; 6],
}

impl SurfaceJet {
    /// `Hess f(a, b)` for tangent vectors `a`, `b`.
    pub fn hess_form(&self, a: &Vec3, b: &Vec3) -> f64 {
        sym_form(&self.hess, a, b)
    }

    /// Covariant Hessian in the frame `(e1, e2)`.
    pub fn hess_in_frame(&self, e1: &Vec3, e2: &Vec3) -> [[f64; 2]; 2] {
        let h12 = self.hess_form(e1, e2);
        [[self.hess_form(e1, e1), h12], [h12, self.hess_form(e2, e2)]]
    }
}

/// Evaluates a band-limited field and its spherical derivatives at
/// arbitrary points. Coefficients are pre-scaled by the basis normalization.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    basis: SolidHarmonics,
    scaled: Vec<f64>,
}

impl FieldEvaluator {
    pub fn new(coeffs: &HarmonicCoeffs) -> Self {
        let basis = SolidHarmonics::new(coeffs.l_max());
        let scaled = coeffs.map_degrees(|l| basis.norm(l)).c;
        Self { basis, scaled }
    }

    /// Drops degrees above the effective band limit at `rel_tol`.
    pub fn trimmed(coeffs: &HarmonicCoeffs, rel_tol: f64) -> Self {
        Self::new(&coeffs.with_band_limit(coeffs.effective_band_limit(rel_tol)))
    }

    pub fn l_max(&self) -> usize {
        self.basis.l_max()
    }

    pub fn value(&self, p: &SpherePoint) -> f64 {
        let c = p.coords();
        let mut total = 0.0;
        self.basis.for_each_degree(c[0], c[1], c[2], 1.0, |l, s| {
            let cl = &self.scaled[l * l..(l + 1) * (l + 1)];
            total += cl.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
        });
        total
    }

    /// Value and tangential gradient.
    pub fn gradient(&self, p: &SpherePoint) -> (f64, Vec3) {
        let c = p.coords();
        let x = Jet1 { v: c[0], g: [1.0, 0.0, 0.0] };
        let y = Jet1 { v: c[1], g: [0.0, 1.0, 0.0] };
        let z = Jet1 { v: c[2], g: [0.0, 0.0, 1.0] };
        let r2 = x * x + y * y + z * z;
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        self.basis.for_each_degree(x, y, z, r2, |l, s| {
            let cl = &self.scaled[l * l..(l + 1) * (l + 1)];
            let mut acc = Jet1::default();
            for (a, b) in cl.iter().zip(s) {
                acc = acc + *b * *a;
            }
            // ∇_S = ∇P − l P x for P homogeneous of degree l
            let lf = l as f64;
            value += acc.v;
            for i in 0..3 {
                grad[i] += acc.g[i] - lf * acc.v * c[i];
            }
        });
        (value, grad)
    }

    /// Second-order jet with the covariant Hessian.
    pub fn jet(&self, p: &SpherePoint) -> SurfaceJet {
        let c = p.coords();
        let x = Jet2 { v: c[0], g: [1.0, 0.0, 0.0], h: [0.0; 6] };
        let y = Jet2 { v: c[1], g: [0.0, 1.0, 0.0], h: [0.0; 6] };
        let z = Jet2 { v: c[2], g: [0.0, 0.0, 1.0], h: [0.0; 6] };
        let r2 = x * x + y * y + z * z;
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        let mut hess = [0.0; 6];
        self.basis.for_each_degree(x, y, z, r2, |l, s| {
            let cl = &self.scaled[l * l..(l + 1) * (l + 1)];
            let mut acc = Jet2::default();
            for (a, b) in cl.iter().zip(s) {
                acc = acc + *b * *a;
            }
            // Hess_S(a, b) = D²P(a, b) − l P ⟨a, b⟩ on tangent vectors
            let lf = l as f64;
            value += acc.v;
            for i in 0..3 {
                grad[i] += acc.g[i] - lf * acc.v * c[i];
            }
            for (k, h) in hess.iter_mut().enumerate() {
                *h += acc.h[k];
            }
            let d = lf * acc.v;
            hess[0] -= d;
            hess[3] -= d;
            hess[5] -= d;
        });
        SurfaceJet { value, grad, hess }
    }
}

/// Value and tangential gradient of the synthesized field at `x`.
pub fn sphere_gradient(coeffs: &HarmonicCoeffs, x: &SpherePoint) -> (f64, Vec3) {
    FieldEvaluator::new(coeffs).gradient(x)
}

/// Covariant Hessian at `x` in the frame of [`tangent_basis`].
pub fn sphere_hessian(coeffs: &HarmonicCoeffs, x: &SpherePoint) -> [[f64; 2]; 2] {
    let j = FieldEvaluator::new(coeffs).jet(x);
    let (e1, e2) = tangent_basis(x);
    j.hess_in_frame(e1.dir(), e2.dir())
}

/// `Σ_nodes w f g` on a shared grid.
pub fn inner_product(f: &SphericalField, g: &SphericalField) -> Result<f64> {
    if !Arc::ptr_eq(&f.grid, &g.grid) && *f.grid != *g.grid {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    Ok(f
        .values
        .iter()
        .zip(&g.values)
        .zip(f.grid.weights())
        .map(|((a, b), w)| a * b * w)
        .sum())
}

pub(crate) fn with_parts(grid: Arc<SphereGrid>, values: Vec<f64>, coeffs: Option<HarmonicCoeffs>) -> SphericalField {
    SphericalField { grid, values, coeffs }
}
