//! Analytic convex bodies, the forward map `u ↦ Δu + 2u`, reconstruction of
//! the surface `{Du(x)}` and mesh export.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{radii_matrix, sym2_max_eig, sym2_min_eig};
use crate::error::{Error, Result};
use crate::harmonics::{christoffel_eigenvalue, synthesize, FieldEvaluator, HarmonicCoeffs, SphericalField};
use crate::sphere::{axpy, cross, dot, norm, scale, tangent_basis, SphereGrid, SpherePoint, Vec3};
use std::sync::Arc;

/// Test bodies given by closed-form support functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticBody {
    Sphere { r: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `base + eps Y_l^m`; convex only for small `eps`.
    HarmonicBump { l: usize, m: i64, eps: f64, base: f64 },
}

impl AnalyticBody {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AnalyticBody::Sphere { r } => r > 0.0 && r.is_finite(),
            AnalyticBody::Ellipsoid { a, b, c } => [a, b, c].iter().all(|v| *v > 0.0 && v.is_finite()),
            AnalyticBody::HarmonicBump { l, m, eps, base } => m.unsigned_abs() as usize <= l && eps.is_finite() && base.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid body {self:?}")))
        }
    }

    /// Support function at a unit vector.
    pub fn support(&self, x: &SpherePoint) -> f64 {
        let p = x.coords();
        match *self {
            AnalyticBody::Sphere { r } => r,
            AnalyticBody::Ellipsoid { a, b, c } => {
                ((a * p[0]).powi(2) + (b * p[1]).powi(2) + (c * p[2]).powi(2)).sqrt()
            }
            AnalyticBody::HarmonicBump { l, m, eps, base } => {
                let c = self.bump_coeffs(l, m, eps, base);
                FieldEvaluator::new(&c).value(x)
            }
        }
    }

    fn bump_coeffs(&self, l: usize, m: i64, eps: f64, base: f64) -> HarmonicCoeffs {
        let mut c = HarmonicCoeffs::zeros(l);
        c.set(0, 0, base * (4.0 * PI).sqrt());
        let prev = c.get(l, m);
        c.set(l, m, prev + eps);
        c
    }
}

/// Samples the support function of `body` on `grid`. The harmonic family
/// comes back with its exact coefficients attached.
pub fn support_function(body: &AnalyticBody, grid: &Arc<SphereGrid>) -> Result<SphericalField> {
    body.validate()?;
    if let AnalyticBody::HarmonicBump { l, m, eps, base } = *body {
        let c = body.bump_coeffs(l, m, eps, base);
        if grid.resolution() < l + 1 {
            return Err(Error::BandLimitExceeded { l_max: l, needed: l + 1, got: grid.resolution() });
        }
        return Ok(synthesize(&c, grid));
    }
    Ok(SphericalField::from_fn(grid.clone(), |x| body.support(x)))
}

/// `f = Δu + 2u`, computed on coefficients.
pub fn forward_f(u: &SphericalField) -> Result<SphericalField> {
    let c = u.coeffs().ok_or(Error::NotAnalyzed)?;
    Ok(synthesize(&c.map_degrees(christoffel_eigenvalue), u.grid()))
}

/// Principal radii `r1 ≤ r2`: eigenvalues of `Hess u + u I` at `x`.
pub fn principal_radii(u: &SphericalField, x: &SpherePoint) -> Result<(f64, f64)> {
    let ev = FieldEvaluator::new(u.coeffs().ok_or(Error::NotAnalyzed)?);
    let m = radii_matrix(&ev, x);
    Ok((sym2_min_eig(&m).0, sym2_max_eig(&m)))
}

/// Ellipsoid with semi-axes `a, b, c`: `Hess u + u I` at `x` in the frame
/// of [`tangent_basis`], from the ambient Hessian of `√(xᵀ A x)`.
pub fn ellipsoid_radii_matrix(axes: [f64; 3], x: &SpherePoint) -> [[f64; 2]; 2] {
    let p = x.coords();
    let a2 = axes.map(|v| v * v);
    let ax = [a2[0] * p[0], a2[1] * p[1], a2[2] * p[2]];
    let u = dot(&ax, p).sqrt();
    let (e1, e2) = tangent_basis(x);
    let e = [*e1.dir(), *e2.dir()];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let quad: f64 = (0..3).map(|k| a2[k] * e[i][k] * e[j][k]).sum();
            m[i][j] = quad / u - dot(&ax, &e[i]) * dot(&ax, &e[j]) / (u * u * u);
        }
    }
    m
}

/// Analytic principal radii of the ellipsoid at normal `x`, ascending.
pub fn ellipsoid_radii(axes: [f64; 3], x: &SpherePoint) -> (f64, f64) {
    let m = ellipsoid_radii_matrix(axes, x);
    (sym2_min_eig(&m).0, sym2_max_eig(&m))
}

/// Boundary point of the ellipsoid with outward normal `x`.
pub fn ellipsoid_point(axes: [f64; 3], x: &SpherePoint) -> Vec3 {
    let p = x.coords();
    let ax = [0, 1, 2].map(|k| axes[k] * axes[k] * p[k]);
    let u = dot(&ax, p).sqrt();
    scale(1.0 / u, &ax)
}

/// Triangulated surface with one vertex per grid node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Outward unit normal at each vertex, the sphere node it came from.
    pub normals: Vec<Vec3>,
}

impl SurfaceMesh {
    pub fn translated(&self, v: &Vec3) -> Self {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p = axpy(1.0, v, p);
        }
        out
    }

    /// Wavefront OBJ: `v` lines, then `vn` lines, then 1-based `f` lines.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for n in &self.normals {
            writeln!(w, "vn {} {} {}", n[0], n[1], n[2])?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}

/// Vertices `Du(x) = ∇u(x) + u(x) x` over the grid, faces from the
/// latitude-longitude structure with each polar cap closed by a fan.
pub fn embed(u: &SphericalField) -> Result<SurfaceMesh> {
    let ev = FieldEvaluator::new(u.coeffs().ok_or(Error::NotAnalyzed)?);
    let grid = u.grid();
    let vertices: Vec<Vec3> = grid
        .nodes()
        .par_iter()
        .map(|x| {
            let (v, g) = ev.gradient(x);
            axpy(v, x.coords(), &g)
        })
        .collect();
    let normals: Vec<Vec3> = grid.nodes().iter().map(|x| *x.coords()).collect();
    let faces = grid_faces(grid, &vertices);
    Ok(SurfaceMesh { vertices, faces, normals })
}

fn oriented(t: [usize; 3], nodes: &[SpherePoint]) -> [usize; 3] {
    let [a, b, c] = t.map(|i| *nodes[i].coords());
    let n = cross(&axpy(-1.0, &a, &b), &axpy(-1.0, &a, &c));
    let centre = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
    if dot(&n, &centre) >= 0.0 {
        t
    } else {
        [t[0], t[2], t[1]]
    }
}

fn grid_faces(grid: &SphereGrid, vertices: &[Vec3]) -> Vec<[usize; 3]> {
    let nodes = grid.nodes();
    let (rings, n_az) = (grid.resolution(), grid.azimuth_count());
    let dist = |i: usize, j: usize| norm(&axpy(-1.0, &vertices[i], &vertices[j]));
    let mut faces = Vec::with_capacity(2 * rings * n_az);
    for i in 0..rings - 1 {
        for j in 0..n_az {
            let jn = (j + 1) % n_az;
            let (a, b) = (grid.index(i, j), grid.index(i, jn));
            let (c, d) = (grid.index(i + 1, j), grid.index(i + 1, jn));
            // split along the shorter diagonal
            let tris = if dist(a, d) <= dist(b, c) { [[a, b, d], [a, d, c]] } else { [[a, b, c], [b, d, c]] };
            for t in tris {
                faces.push(oriented(t, nodes));
            }
        }
    }
    for i in [0, rings - 1] {
        let apex = grid.index(i, 0);
        for j in 1..n_az - 1 {
            faces.push(oriented([apex, grid.index(i, j), grid.index(i, j + 1)], nodes));
        }
    }
    faces
}

/// Translation taking the degree-1 part of `u` to that of `reference`.
pub fn degree1_alignment(u: &HarmonicCoeffs, reference: &HarmonicCoeffs) -> Vec3 {
    let a = u.linear_part();
    let b = reference.linear_part();
    axpy(-1.0, &a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::solve_christoffel;
    use crate::sphere::make_grid;

    const AXES: [f64; 3] = [1.0, 1.2, 0.8];

    fn ellipsoid(l: usize, l_max: usize, axes: [f64; 3]) -> SphericalField {
        let body = AnalyticBody::Ellipsoid { a: axes[0], b: axes[1], c: axes[2] };
        support_function(&body, &make_grid(l).unwrap()).unwrap().analyzed(l_max).unwrap()
    }

    #[test]
    fn support_examples() {
        let g = make_grid(8).unwrap();
        let s = support_function(&AnalyticBody::Sphere { r: 1.0 }, &g).unwrap();
        assert!(s.values().iter().all(|v| *v == 1.0));
        let e = ellipsoid(8, 4, [1.0; 3]);
        assert!(e.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let body = AnalyticBody::Ellipsoid { a: 1.0, b: 1.2, c: 0.8 };
        assert_eq!(body.support(&SpherePoint::new([0.0, 1.0, 0.0]).unwrap()), 1.2);
        assert!(AnalyticBody::Sphere { r: -1.0 }.validate().is_err());
    }

    #[test]
    fn forward_map_examples() {
        let g = make_grid(10).unwrap();
        let u = support_function(&AnalyticBody::HarmonicBump { l: 2, m: 0, eps: 0.3, base: 1.0 }, &g).unwrap();
        let f = forward_f(&u).unwrap();
        let c = f.coeffs().unwrap();
        assert!((c.get(2, 0) + 1.2).abs() < 1e-15);
        assert!((c.get(0, 0) - 2.0 * (4.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_trace_and_axis_radii() {
        let u = ellipsoid(48, 32, AXES);
        let f = forward_f(&u).unwrap();
        for (x, fv) in u.grid().nodes().iter().zip(f.values()).step_by(37) {
            let (r1, r2) = principal_radii(&u, x).unwrap();
            assert!((r1 + r2 - fv).abs() < 1e-8);
            let (a1, a2) = ellipsoid_radii(AXES, x);
            assert!((a1 + a2 - fv).abs() < 1e-8, "{} {}", a1 + a2, fv);
        }
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[k] = s;
                let x = SpherePoint::new(p).unwrap();
                let (r1, r2) = principal_radii(&u, &x).unwrap();
                let mut want: Vec<f64> = (0..3).filter(|j| *j != k).map(|j| AXES[j] * AXES[j] / AXES[k]).collect();
                want.sort_by(f64::total_cmp);
                assert!((r1 - want[0]).abs() < 1e-6 && (r2 - want[1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ellipsoid_round_trip() {
        let u = ellipsoid(48, 32, AXES);
        let f = forward_f(&u).unwrap();
        let back = solve_christoffel(&f, 1e-8).unwrap();
        let mesh = embed(&back).unwrap();
        let shift = degree1_alignment(back.coeffs().unwrap(), u.coeffs().unwrap());
        let mesh = mesh.translated(&shift);
        let mut worst = 0.0f64;
        for (v, x) in mesh.vertices.iter().zip(u.grid().nodes()) {
            let p = ellipsoid_point(AXES, x);
            worst = worst.max(norm(&axpy(-1.0, &p, v)));
            let implicit: f64 = (0..3).map(|k| (v[k] / AXES[k]).powi(2)).sum();
            assert!((implicit - 1.0).abs() < 1e-6);
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn translation_is_degree_one() {
        let v = [0.1, -0.2, 0.3];
        let g = make_grid(8).unwrap();
        let u = SphericalField::from_fn(g, |x| 1.0 + dot(&v, x.coords())).analyzed(4).unwrap();
        let mesh = embed(&u).unwrap();
        for (p, x) in mesh.vertices.iter().zip(u.grid().nodes()) {
            let want = axpy(1.0, &v, x.coords());
            assert!(norm(&axpy(-1.0, &want, p)) < 1e-13);
        }
    }

    #[test]
    fn mesh_is_closed_and_oriented() {
        let u = ellipsoid(12, 8, AXES);
        let mesh = embed(&u).unwrap();
        assert_eq!(mesh.vertices.len(), u.grid().len());
        // every edge is shared by exactly two faces with opposite directions
        let mut edges = std::collections::HashMap::new();
        for f in &mesh.faces {
            for k in 0..3 {
                *edges.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &edges {
            assert_eq!(n, 1);
            assert_eq!(edges.get(&(b, a)), Some(&1));
        }
        // enclosed volume is positive with outward orientation
        let vol: f64 = mesh
            .faces
            .iter()
            .map(|f| dot(&mesh.vertices[f[0]], &cross(&mesh.vertices[f[1]], &mesh.vertices[f[2]])) / 6.0)
            .sum();
        let exact = 4.0 / 3.0 * PI * AXES.iter().product::<f64>();
        assert!(vol > 0.0 && (vol - exact).abs() < 0.05 * exact);
        let mut buf = Vec::new();
        mesh.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), mesh.vertices.len());
        assert_eq!(text.lines().filter(|l| l.starts_with("vn ")).count(), mesh.vertices.len());
        assert!(text.lines().filter(|l| l.starts_with("f ")).all(|l| {
            l.split_whitespace().skip(1).all(|t| (1..=mesh.vertices.len()).contains(&t.parse::<usize>().unwrap()))
        }));
    }
}
