//! The two kernel criteria as sphere integrals around a base point `x`.
//!
//! Both integrands are quadratic in the tangent direction `ξ`, so one pass
//! over the quadrature nodes yields a symmetric 2×2 matrix `M(x)` in the
//! frame of [`tangent_basis`]; the criterion value is `ξᵀ M ξ`.
//!
//! The integral is taken in geodesic polar coordinates centred at `x`,
//! `z = cos θ x + sin θ (cos ψ e1 + sin ψ e2)`, after subtracting the part of
//! the integrand that is odd under `ψ → ψ + π` and dominates near `θ = 0`.
//! What remains is analytic in `θ`, so nested Fejér rules in `θ` and the
//! trapezoid rule in `ψ` converge spectrally and the difference between the
//! nested levels is a usable error estimate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{FieldEvaluator, SphericalField};
use crate::kernels::KernelTable;
use crate::quadrature::fejer2;
use crate::sphere::{dot, tangent_basis, SpherePoint, TangentDirection, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Cr1,
    Cr2,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Cr1 => "cr1",
            Criterion::Cr2 => "cr2",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cr1" => Ok(Criterion::Cr1),
            "cr2" => Ok(Criterion::Cr2),
            _ => Err(Error::InvalidParameter(format!("unknown criterion `{s}`"))),
        }
    }
}

/// A criterion evaluated at one witness `(x, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionValue {
    pub x: SpherePoint,
    pub xi: TangentDirection,
    pub value: f64,
    pub criterion: Criterion,
}

/// Nested one-dimensional rule: fine nodes and weights plus the weights of
/// the embedded coarse rule, which lives on the odd-indexed fine nodes.
#[derive(Debug, Clone, PartialEq)]
struct NestedRule {
    nodes: Vec<f64>,
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

impl NestedRule {
    fn fejer_on(a: f64, b: f64, n_fine: usize) -> Self {
        let (x, w) = fejer2(n_fine);
        let (_, wc) = fejer2((n_fine - 1) / 2);
        let h = 0.5 * (b - a);
        let nodes = x.iter().map(|t| a + h * (t + 1.0)).collect();
        let fine = w.iter().map(|v| v * h).collect();
        let mut coarse = vec![0.0; n_fine];
        for (i, v) in wc.iter().enumerate() {
            coarse[2 * i + 1] = v * h;
        }
        Self { nodes, fine, coarse }
    }
}

/// Polar product rule used by the criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarRule {
    cap_radius: f64,
    cap: NestedRule,
    exterior: NestedRule,
    n_psi: usize,
}

/// Sizes of a [`PolarRule`], echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarRuleMeta {
    pub band_limit: usize,
    pub cap_radius: f64,
    pub cap_nodes: usize,
    pub exterior_nodes: usize,
    pub azimuth_nodes: usize,
}

impl PolarRule {
    /// Rule resolving fields of degree `band_limit`; `cap_radius` is the
    /// radius of the inner geodesic cap whose contribution is reported apart.
    pub fn new(band_limit: usize, cap_radius: f64) -> Result<Self> {
        if !(cap_radius > 0.0 && cap_radius < PI) {
            return Err(Error::InvalidParameter(format!("cap radius {cap_radius} outside (0, π)")));
        }
        let l = band_limit as f64;
        // coarse levels must already resolve the integrand
        let need_theta = (1.5 * l + 12.0).ceil() as usize;
        let mut n_ext = 15;
        while (n_ext - 1) / 2 < need_theta {
            n_ext = 2 * n_ext + 1;
        }
        let cap_need = ((l * cap_radius / PI) * 1.5 + 8.0).ceil() as usize;
        let mut n_cap = 15;
        while (n_cap - 1) / 2 < cap_need {
            n_cap = 2 * n_cap + 1;
        }
        let n_psi = 2 * (4 * (band_limit + 6)).div_ceil(4);
        Ok(Self {
            cap_radius,
            cap: NestedRule::fejer_on(0.0, cap_radius, n_cap),
            exterior: NestedRule::fejer_on(cap_radius, PI, n_ext),
            n_psi,
        })
    }

    pub fn meta(&self, band_limit: usize) -> PolarRuleMeta {
        PolarRuleMeta {
            band_limit,
            cap_radius: self.cap_radius,
            cap_nodes: self.cap.nodes.len(),
            exterior_nodes: self.exterior.nodes.len(),
            azimuth_nodes: self.n_psi,
        }
    }

    pub fn cap_radius(&self) -> f64 {
        self.cap_radius
    }
}

/// Criterion matrix at one base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionMatrix {
    pub criterion: Criterion,
    pub x: SpherePoint,
    pub e1: Vec3,
    pub e2: Vec3,
    /// `M` in the frame `(e1, e2)`.
    pub m: [[f64; 2]; 2],
    /// Spectral-norm bound on `M_fine − M_coarse`.
    pub err: f64,
    /// Contribution of the cap `dist(x, z) < δ`, as a matrix.
    pub cap: [[f64; 2]; 2],
}

impl CriterionMatrix {
    /// `ξᵀ M ξ` for `ξ = cos(a) e1 + sin(a) e2`.
    pub fn value_at_angle(&self, a: f64) -> f64 {
        let (s, c) = a.sin_cos();
        self.m[0][0] * c * c + 2.0 * self.m[0][1] * s * c + self.m[1][1] * s * s
    }

    /// `ξᵀ M ξ` for a tangent direction at `x`.
    pub fn value(&self, xi: &Vec3) -> f64 {
        let (a, b) = (dot(xi, &self.e1), dot(xi, &self.e2));
        self.m[0][0] * a * a + 2.0 * self.m[0][1] * a * b + self.m[1][1] * b * b
    }

    /// Smallest value over all unit `ξ` and the angle attaining it.
    pub fn min_eig(&self) -> (f64, f64) {
        let (l, a) = sym2_min_eig(&self.m);
        (l, a)
    }

    pub fn cap_norm(&self) -> f64 {
        sym2_norm(&self.cap)
    }
}

/// Smaller eigenvalue of a symmetric 2×2 matrix and the angle of its
/// eigenvector.
pub fn sym2_min_eig(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    // eigenvector angle of the smaller eigenvalue
    let ang = 0.5 * (2.0 * b).atan2(a - d) + 0.5 * PI;
    (mean - r, ang)
}

/// Larger eigenvalue of a symmetric 2×2 matrix.
pub fn sym2_max_eig(m: &[[f64; 2]; 2]) -> f64 {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

fn sym2_norm(m: &[[f64; 2]; 2]) -> f64 {
    let (lo, _) = sym2_min_eig(m);
    lo.abs().max(sym2_max_eig(m).abs())
}

/// Reusable evaluator of the criteria for one field.
#[derive(Debug, Clone)]
pub struct CriterionEvaluator {
    ev: FieldEvaluator,
    table: KernelTable,
    rule: PolarRule,
    band_limit: usize,
}

/// Coefficients below this fraction of the largest one are ignored when
/// sizing quadrature rules.
pub const TRIM_TOLERANCE: f64 = 1e-15;

impl CriterionEvaluator {
    /// Uses the default cap radius `2π / L` of the field's grid.
    pub fn new(f: &SphericalField, table: KernelTable) -> Result<Self> {
        let delta = 2.0 * f.grid().spacing();
        Self::with_cap(f, table, delta)
    }

    pub fn with_cap(f: &SphericalField, table: KernelTable, cap_radius: f64) -> Result<Self> {
        if table.params().n != 2 {
            return Err(Error::InvalidDimension(table.params().n));
        }
        let coeffs = f.coeffs().ok_or(Error::NotAnalyzed)?;
        f.ensure_positive()?;
        let band_limit = coeffs.effective_band_limit(TRIM_TOLERANCE);
        let ev = FieldEvaluator::new(&coeffs.with_band_limit(band_limit));
        let rule = PolarRule::new(band_limit, cap_radius)?;
        Ok(Self { ev, table, rule, band_limit })
    }

    pub fn rule_meta(&self) -> PolarRuleMeta {
        self.rule.meta(self.band_limit)
    }

    pub fn field(&self) -> &FieldEvaluator {
        &self.ev
    }

    /// Criterion matrix at `x`.
    pub fn matrix(&self, criterion: Criterion, x: &SpherePoint) -> CriterionMatrix {
        let (t1, t2) = tangent_basis(x);
        let (e1, e2) = (*t1.dir(), *t2.dir());
        let xc = *x.coords();
        let (fx, gx) = self.ev.gradient(x);
        let g0 = [dot(&gx, &e1), dot(&gx, &e2)];
        let n_psi = self.rule.n_psi;
        let trig: Vec<(f64, f64)> = (0..n_psi).map(|k| (2.0 * PI * k as f64 / n_psi as f64).sin_cos()).collect();
        let w_psi = 2.0 * PI / n_psi as f64;

        let mut fine = [[0.0; 2]; 2];
        let mut coarse = [[0.0; 2]; 2];
        let mut cap = [[0.0; 2]; 2];
        for (part, rule) in [(0, &self.rule.cap), (1, &self.rule.exterior)] {
            for (i, &theta) in rule.nodes.iter().enumerate() {
                let (st, ct) = theta.sin_cos();
                let (ka, kb) = match criterion {
                    Criterion::Cr2 => self.table.hat_parts_theta(theta),
                    Criterion::Cr1 => (self.table.omega_theta(theta), 0.0),
                };
                let mut ring_fine = [0.0; 3];
                let mut ring_coarse = [0.0; 3];
                for (k, &(sp, cp)) in trig.iter().enumerate() {
                    let d = [cp * e1[0] + sp * e2[0], cp * e1[1] + sp * e2[1], cp * e1[2] + sp * e2[2]];
                    let z = SpherePoint::new([ct * xc[0] + st * d[0], ct * xc[1] + st * d[1], ct * xc[2] + st * d[2]])
                        .expect("unit combination");
                    let t = [st * cp, st * sp];
                    let contrib = match criterion {
                        Criterion::Cr2 => {
                            let g = self.ev.value(&z) - fx - st * (cp * g0[0] + sp * g0[1]);
                            [g * (ka + kb * t[0] * t[0]), g * kb * t[0] * t[1], g * (ka + kb * t[1] * t[1])]
                        }
                        Criterion::Cr1 => {
                            let (fz, gz) = self.ev.gradient(&z);
                            let zc = z.coords();
                            let df = [dot(&gz, &e1) - fz * dot(zc, &e1), dot(&gz, &e2) - fz * dot(zc, &e2)];
                            let h = [df[0] - g0[0], df[1] - g0[1]];
                            [ka * t[0] * h[0], 0.5 * ka * (t[0] * h[1] + t[1] * h[0]), ka * t[1] * h[1]]
                        }
                    };
                    for j in 0..3 {
                        ring_fine[j] += contrib[j];
                        if k % 2 == 0 {
                            ring_coarse[j] += contrib[j];
                        }
                    }
                }
                let wf = rule.fine[i] * st * w_psi;
                let wc = rule.coarse[i] * st * 2.0 * w_psi;
                for (j, (r, c)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
                    fine[*r][*c] += wf * ring_fine[j];
                    coarse[*r][*c] += wc * ring_coarse[j];
                    if part == 0 {
                        cap[*r][*c] += wf * ring_fine[j];
                    }
                }
            }
        }
        fine[1][0] = fine[0][1];
        coarse[1][0] = coarse[0][1];
        cap[1][0] = cap[0][1];
        if criterion == Criterion::Cr2 {
            fine[0][0] += 0.5 * fx;
            fine[1][1] += 0.5 * fx;
            coarse[0][0] += 0.5 * fx;
            coarse[1][1] += 0.5 * fx;
        }
        let diff = [
            [fine[0][0] - coarse[0][0], fine[0][1] - coarse[0][1]],
            [fine[1][0] - coarse[1][0], fine[1][1] - coarse[1][1]],
        ];
        let scale = sym2_norm(&fine).max(fx.abs());
        let err = sym2_norm(&diff) + 64.0 * f64::EPSILON * scale;
        CriterionMatrix { criterion, x: *x, e1, e2, m: fine, err, cap }
    }

    pub fn value(&self, criterion: Criterion, x: &SpherePoint, xi: &TangentDirection) -> Result<f64> {
        check_witness(x, xi)?;
        Ok(self.matrix(criterion, x).value(xi.dir()))
    }
}

fn check_witness(x: &SpherePoint, xi: &TangentDirection) -> Result<()> {
    if dot(xi.base().coords(), x.coords()) < 1.0 - 1e-12 {
        return Err(Error::InvalidParameter("ξ is not based at x".into()));
    }
    Ok(())
}

/// `∫ ω(x, z) ⟨ξ, z⟩ ⟨Df(z), ξ⟩ dz` with `Df` the ambient gradient of the
/// degree −1 extension of `f`.
pub fn criterion_cr1(f: &SphericalField, x: &SpherePoint, xi: &TangentDirection, table: &KernelTable) -> Result<f64> {
    CriterionEvaluator::new(f, *table)?.value(Criterion::Cr1, x, xi)
}

/// `∫ ω̂(x, z, ξ) (f(z) − f(x)) dz + f(x)/2`.
pub fn criterion_cr2(f: &SphericalField, x: &SpherePoint, xi: &TangentDirection, table: &KernelTable) -> Result<f64> {
    CriterionEvaluator::new(f, *table)?.value(Criterion::Cr2, x, xi)
}
