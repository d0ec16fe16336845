//! Geometry of the unit sphere S² ⊂ R³: points, tangent frames, geodesic
//! distance and the Gauss–Legendre × uniform-azimuth quadrature grid.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{sphere_gradient, SphericalField};
use crate::quadrature::gauss_legendre;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &Vec3, y: &Vec3) -> Vec3 {
    [alpha * x[0] + y[0], alpha * x[1] + y[1], alpha * x[2] + y[2]]
}

#[inline]
pub fn scale(alpha: f64, x: &Vec3) -> Vec3 {
    [alpha * x[0], alpha * x[1], alpha * x[2]]
}

/// A unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Vec3) -> Result<Self> {
        let r = norm(&v);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("cannot normalize {v:?}")));
        }
        Ok(Self(scale(1.0 / r, &v)))
    }

    /// Point with polar angle `theta` from +z and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let st = theta.sin();
        Self([st * phi.cos(), st * phi.sin(), theta.cos()])
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    pub fn theta(&self) -> f64 {
        self.0[2].clamp(-1.0, 1.0).acos()
    }

    pub fn phi(&self) -> f64 {
        let p = self.0[1].atan2(self.0[0]);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn antipode(&self) -> Self {
        Self(scale(-1.0, &self.0))
    }
}

/// A unit tangent vector at a point of the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentDirection {
    base: SpherePoint,
    dir: Vec3,
}

impl TangentDirection {
    /// Projects `v` onto the tangent plane at `base` and normalizes.
    pub fn new(base: SpherePoint, v: Vec3) -> Result<Self> {
        let t = axpy(-dot(&v, base.coords()), base.coords(), &v);
        let r = norm(&t);
        if !(r > 1e-14) {
            return Err(Error::InvalidParameter(format!(
                "{v:?} has no tangential component at {:?}",
                base.coords()
            )));
        }
        Ok(Self { base, dir: scale(1.0 / r, &t) })
    }

    /// `cos(angle) e1 + sin(angle) e2` in the frame of [`tangent_basis`].
    pub fn at_angle(base: SpherePoint, angle: f64) -> Self {
        let (e1, e2) = tangent_basis(&base);
        let d = axpy(angle.cos(), e1.dir(), &scale(angle.sin(), e2.dir()));
        Self { base, dir: d }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn dir(&self) -> &Vec3 {
        &self.dir
    }
}

/// Great-circle distance `arccos ⟨x, z⟩`.
///
/// Evaluated as `2 atan2(|x − z|, |x + z|)`, which equals the clamped
/// arccos but keeps full relative accuracy near 0 and π.
pub fn geodesic_dist(x: &SpherePoint, z: &SpherePoint) -> f64 {
    let (a, b) = (x.coords(), z.coords());
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    (2.0 * norm(&d).atan2(norm(&s))).clamp(0.0, PI)
}

/// Orthonormal tangent frame at `x`: Gram–Schmidt of the coordinate axis
/// least aligned with `x` (lowest index on ties), completed by `x × e1`.
pub fn tangent_basis(x: &SpherePoint) -> (TangentDirection, TangentDirection) {
    let c = x.coords();
    let mut k = 0;
    for i in 1..3 {
        if c[i].abs() < c[k].abs() {
            k = i;
        }
    }
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let t = axpy(-c[k], c, &axis);
    let e1 = scale(1.0 / norm(&t), &t);
    let e2 = cross(c, &e1);
    (
        TangentDirection { base: *x, dir: e1 },
        TangentDirection { base: *x, dir: e2 },
    )
}

/// Gauss–Legendre in `cos θ` × uniform azimuth quadrature on S².
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    l: usize,
    polar_nodes: Vec<f64>,
    thetas: Vec<f64>,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
}

pub const MIN_GRID_RESOLUTION: usize = 4;

/// Builds the grid with `l` polar rings and `2l` azimuth samples per ring.
pub fn make_grid(l: usize) -> Result<Arc<SphereGrid>> {
    if l < MIN_GRID_RESOLUTION {
        return Err(Error::ResolutionTooLow { got: l, min: MIN_GRID_RESOLUTION });
    }
    let (x, w) = gauss_legendre(l);
    let n_az = 2 * l;
    let dphi = 2.0 * PI / n_az as f64;
    // rings ordered by increasing θ, i.e. decreasing cos θ
    let polar_nodes: Vec<f64> = x.iter().rev().copied().collect();
    let polar_weights: Vec<f64> = w.iter().rev().copied().collect();
    let thetas: Vec<f64> = polar_nodes.iter().map(|c| c.acos()).collect();
    let mut nodes = Vec::with_capacity(l * n_az);
    let mut weights = Vec::with_capacity(l * n_az);
    for (i, &ct) in polar_nodes.iter().enumerate() {
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_az {
            let phi = j as f64 * dphi;
            nodes.push(SpherePoint([st * phi.cos(), st * phi.sin(), ct]));
            weights.push(polar_weights[i] * dphi);
        }
    }
    Ok(Arc::new(SphereGrid { l, polar_nodes, thetas, nodes, weights }))
}

impl SphereGrid {
    pub fn resolution(&self) -> usize {
        self.l
    }

    pub fn azimuth_count(&self) -> usize {
        2 * self.l
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Gauss–Legendre nodes in `cos θ`, one per ring, decreasing.
    pub fn polar_nodes(&self) -> &[f64] {
        &self.polar_nodes
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.azimuth_count() as f64
    }

    /// Node index of ring `i`, azimuth sample `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.azimuth_count() + j
    }

    /// Nominal polar spacing `π / L`.
    pub fn spacing(&self) -> f64 {
        PI / self.l as f64
    }

    /// Quadrature of sampled values, summed in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// `f_ξ(z)` for the degree −1 homogeneous extension `f(y/|y|)/|y|`:
/// `⟨∇_S f(z), ξ⟩ − f(z)⟨ξ, z⟩`. `xi` is any ambient vector.
pub fn ambient_directional_derivative_minus1(
    f: &SphericalField,
    z: &SpherePoint,
    xi: &Vec3,
) -> Result<f64> {
    let coeffs = f.coeffs().ok_or(Error::NotAnalyzed)?;
    let (value, grad) = sphere_gradient(coeffs, z);
    Ok(dot(&grad, xi) - value * dot(xi, z.coords()))
}
