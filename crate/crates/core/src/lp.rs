//! The L_p Christoffel problem `Δu + 2u = f u^{p−1}` on S².
//!
//! For `p > 2` the solver runs damped Picard iterations and switches to
//! Newton on harmonic coefficients once Picard stalls or drifts. For `p = 2`
//! the problem is the eigenproblem `(Δ + 2)u = λ f u`, solved by Newton on
//! the system augmented with a normalization row.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::{
    christoffel_eigenvalue, coeff_count, synthesize, FieldEvaluator, HarmonicCoeffs, SolidHarmonics, SphericalField,
};
use crate::sphere::{make_grid, SphereGrid};

/// Solver settings beyond tolerance and iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Picard damping.
    pub tau: f64,
    /// Picard is abandoned when the residual fails to shrink by
    /// `stagnation_ratio` over this many iterations.
    pub stagnation_window: usize,
    pub stagnation_ratio: f64,
}

impl LpConfig {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, tau: 0.5, stagnation_window: 10, stagnation_ratio: 0.01 }
    }
}

/// Which iteration produced the final iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpMethod {
    Picard,
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpDiagnostics {
    pub picard_iterations: usize,
    pub newton_iterations: usize,
    pub method: LpMethod,
    /// Norm of the degree-1 coefficients of `f u^{p−1}` (`λ f u` for p = 2).
    pub degree1_defect: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// Residual after each iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub u: SphericalField,
    pub p: f64,
    pub lambda: Option<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: LpDiagnostics,
}

/// Serializable view of an [`LpSolution`] without the field values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSummary {
    pub p: f64,
    pub lambda: Option<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: LpDiagnostics,
}

impl LpSolution {
    pub fn summary(&self) -> LpSummary {
        LpSummary {
            p: self.p,
            lambda: self.lambda,
            residual_inf: self.residual_inf,
            iterations: self.iterations,
            converged: self.converged,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Dense synthesis operator of one grid and band limit, with the weights
/// and the `Δ + 2` spectrum.
struct Discretization {
    grid: Arc<SphereGrid>,
    l_max: usize,
    /// `Y_{l,m}` at every node, nodes × coefficients.
    b: DMatrix<f64>,
    bt: DMatrix<f64>,
    w: DVector<f64>,
    eig: DVector<f64>,
}

impl Discretization {
    fn new(grid: Arc<SphereGrid>, l_max: usize) -> Result<Self> {
        if grid.resolution() < l_max + 1 {
            return Err(Error::BandLimitExceeded { l_max, needed: l_max + 1, got: grid.resolution() });
        }
        let k = coeff_count(l_max);
        let basis = SolidHarmonics::new(l_max);
        let rows: Vec<Vec<f64>> = grid
            .nodes()
            .par_iter()
            .map(|p| {
                let mut y = vec![0.0; k];
                basis.eval_unit(p.coords(), &mut y);
                y
            })
            .collect();
        let b = DMatrix::from_fn(grid.len(), k, |i, j| rows[i][j]);
        let w = DVector::from_column_slice(grid.weights());
        let mut eig = DVector::zeros(k);
        for l in 0..=l_max {
            for v in eig.rows_mut(l * l, 2 * l + 1).iter_mut() {
                *v = christoffel_eigenvalue(l);
            }
        }
        let bt = b.transpose();
        Ok(Self { grid, l_max, b, bt, w, eig })
    }

    fn values(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.b * c
    }

    fn analyze(&self, v: &DVector<f64>) -> DVector<f64> {
        self.b.tr_mul(&v.component_mul(&self.w))
    }

    /// `Bᵀ diag(w g) B`.
    fn weighted_gram(&self, g: &DVector<f64>) -> DMatrix<f64> {
        let wg = g.component_mul(&self.w);
        // the product operator goes through the blocked GEMM kernel, tr_mul does not
        let mut scaled = self.bt.clone();
        for (mut col, s) in scaled.column_iter_mut().zip(wg.iter()) {
            col *= *s;
        }
        &scaled * &self.b
    }

    fn field(&self, c: &DVector<f64>) -> SphericalField {
        let coeffs = HarmonicCoeffs::from_vec(self.l_max, c.as_slice().to_vec()).expect("coefficient count");
        SphericalField::from_coeffs(self.grid.clone(), coeffs)
    }
}

fn degree1_norm(c: &DVector<f64>) -> f64 {
    if c.len() < 4 {
        return 0.0;
    }
    c.rows(1, 3).norm()
}

fn min_max(v: &DVector<f64>) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

fn check_input(f: &SphericalField, cfg: &LpConfig) -> Result<()> {
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::InvalidParameter(format!("tol = {}, max_iter = {}", cfg.tol, cfg.max_iter)));
    }
    f.coeffs().ok_or(Error::NotAnalyzed)?;
    f.ensure_positive()
}

struct LpState<'a> {
    d: &'a Discretization,
    fv: &'a DVector<f64>,
    p: f64,
}

impl LpState<'_> {
    /// Sup norm of the nodal residual, plus the analyzed right-hand side.
    fn residual(&self, c: &DVector<f64>, uv: &DVector<f64>) -> (f64, DVector<f64>) {
        let rhs = self.fv.zip_map(uv, |f, u| f * u.powf(self.p - 1.0));
        let lu = self.d.values(&self.d.eig.component_mul(c));
        let r = (lu - &rhs).amax();
        (r, self.d.analyze(&rhs))
    }

    fn newton_step(&self, c: &DVector<f64>, uv: &DVector<f64>, rhs_c: &DVector<f64>) -> Option<DVector<f64>> {
        let g = self.fv.zip_map(uv, |f, u| (self.p - 1.0) * f * u.powf(self.p - 2.0));
        let mut j = -self.d.weighted_gram(&g);
        for (i, e) in self.d.eig.iter().enumerate() {
            j[(i, i)] += e;
        }
        let r = self.d.eig.component_mul(c) - rhs_c;
        j.lu().solve(&(-r))
    }
}

/// Solves `Δu + 2u = f u^{p−1}` for `p > 2` at the band limit of `f`.
pub fn solve_lp(f: &SphericalField, p: f64, tol: f64, max_iter: usize) -> Result<LpSolution> {
    solve_lp_with(f, p, &LpConfig::new(tol, max_iter))
}

pub fn solve_lp_with(f: &SphericalField, p: f64, cfg: &LpConfig) -> Result<LpSolution> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("solve_lp needs p > 2, got {p}")));
    }
    check_input(f, cfg)?;
    let l_max = f.l_max().expect("analyzed");
    let d = Discretization::new(f.grid().clone(), l_max)?;
    let fv = DVector::from_column_slice(f.values());
    let st = LpState { d: &d, fv: &fv, p };

    let mean = f.grid().integrate(f.values()) / (4.0 * std::f64::consts::PI);
    let u0 = (2.0 / mean).powf(1.0 / (p - 2.0));
    let mut c = DVector::zeros(coeff_count(l_max));
    c[0] = u0 * (4.0 * std::f64::consts::PI).sqrt();

    let mut history = Vec::new();
    let mut picard = 0;
    let mut newton = 0;
    let mut method = LpMethod::Picard;
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut polished = false;
    let mut uv = d.values(&c);
    let (mut res, mut rhs_c) = st.residual(&c, &uv);

    for it in 0..cfg.max_iter {
        if best.as_ref().is_none_or(|(r, _)| res < *r) {
            best = Some((res, c.clone()));
        }
        if res <= cfg.tol {
            if method == LpMethod::Picard || polished {
                break;
            }
            polished = true;
        }
        if method == LpMethod::Picard {
            let n = history.len();
            let w = cfg.stagnation_window;
            let stalled = n >= w && history[n - 1] > (1.0 - cfg.stagnation_ratio) * history[n - w];
            let drifting = n >= 2 && res > 2.0 * best.as_ref().map_or(res, |b| b.0);
            if stalled || drifting {
                method = LpMethod::Newton;
                // restart from the best Picard iterate
                let b = best.as_ref().expect("best iterate").1.clone();
                c = b;
                uv = d.values(&c);
                (res, rhs_c) = st.residual(&c, &uv);
            }
        }
        let next = match method {
            LpMethod::Picard => {
                picard += 1;
                let mut g = rhs_c.clone();
                for (i, e) in d.eig.iter().enumerate() {
                    g[i] = if *e == 0.0 { 0.0 } else { g[i] / e };
                }
                c.scale(1.0 - cfg.tau) + g.scale(cfg.tau)
            }
            LpMethod::Newton => {
                newton += 1;
                let step = st.newton_step(&c, &uv, &rhs_c).ok_or_else(|| {
                    Error::InvalidParameter("singular Newton system in the L_p solver".into())
                })?;
                let mut t = 1.0;
                let mut trial = &c + &step;
                // halve the step until the iterate stays positive
                while min_max(&d.values(&trial)).0 <= 0.0 && t > 1e-3 {
                    t *= 0.5;
                    trial = &c + step.scale(t);
                }
                trial
            }
        };
        c = next;
        uv = d.values(&c);
        let umin = min_max(&uv).0;
        if umin <= 0.0 {
            return Err(Error::PositivityLost { iteration: it + 1, min: umin });
        }
        let prev = res;
        (res, rhs_c) = st.residual(&c, &uv);
        history.push(res);
        // truncation floor reached
        if method == LpMethod::Newton && newton >= 3 && res > 0.9 * prev {
            break;
        }
    }
    if best.as_ref().is_none_or(|(r, _)| res < *r) {
        best = Some((res, c.clone()));
    }
    let (res, c) = best.expect("at least one iterate");
    let uv = d.values(&c);
    let (_, rhs_c) = st.residual(&c, &uv);
    let (min_u, max_u) = min_max(&uv);
    let sol = LpSolution {
        u: d.field(&c),
        p,
        lambda: None,
        residual_inf: res,
        iterations: picard + newton,
        converged: res <= cfg.tol,
        diagnostics: LpDiagnostics {
            picard_iterations: picard,
            newton_iterations: newton,
            method,
            degree1_defect: degree1_norm(&rhs_c),
            min_u,
            max_u,
            history,
        },
    };
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NonConvergence { iterations: sol.iterations, residual: res, best: Box::new(sol) })
    }
}

/// Solves `(Δ + 2)u = λ f u` for `λ > 0` and `u > 0` with `max u = 1`.
pub fn solve_lp_eigen(f: &SphericalField, tol: f64, max_iter: usize) -> Result<LpSolution> {
    check_input(f, &LpConfig::new(tol, max_iter))?;
    let mean = f.grid().integrate(f.values()) / (4.0 * std::f64::consts::PI);
    let l_max = f.l_max().expect("analyzed");
    let mut c0 = DVector::zeros(coeff_count(l_max));
    c0[0] = (4.0 * std::f64::consts::PI).sqrt();
    eigen_newton(f, c0, 2.0 / mean, tol, max_iter)
}

fn eigen_newton(f: &SphericalField, c0: DVector<f64>, lambda0: f64, tol: f64, max_iter: usize) -> Result<LpSolution> {
    let l_max = f.l_max().expect("analyzed");
    let d = Discretization::new(f.grid().clone(), l_max)?;
    let fv = DVector::from_column_slice(f.values());
    let m = d.weighted_gram(&fv);
    let k = c0.len();
    let mut c = c0;
    let mut lambda = lambda0;
    let mut history = Vec::new();
    let residual = |c: &DVector<f64>, lambda: f64| -> f64 {
        let uv = d.values(c);
        let lu = d.values(&d.eig.component_mul(c));
        (lu - uv.component_mul(&fv).scale(lambda)).amax()
    };
    let mut res = residual(&c, lambda);
    let mut iters = 0;
    // one extra step once converged, for an accurate λ
    let mut polished = false;
    while iters < max_iter {
        if res <= tol {
            if polished {
                break;
            }
            polished = true;
        }
        iters += 1;
        let (c_old, lambda_old) = (c.clone(), lambda);
        let uv = d.values(&c);
        let pin = uv.iamax_full().0;
        let mut j = DMatrix::zeros(k + 1, k + 1);
        j.view_mut((0, 0), (k, k)).copy_from(&(-m.scale(lambda)));
        for (i, e) in d.eig.iter().enumerate() {
            j[(i, i)] += e;
        }
        let mc = &m * &c;
        j.view_mut((0, k), (k, 1)).copy_from(&(-&mc));
        j.view_mut((k, 0), (1, k)).copy_from(&d.b.row(pin));
        let mut r = DVector::zeros(k + 1);
        r.rows_mut(0, k).copy_from(&(d.eig.component_mul(&c) - mc.scale(lambda)));
        r[k] = uv[pin] - 1.0;
        let step = j
            .lu()
            .solve(&(-r))
            .ok_or_else(|| Error::InvalidParameter("singular Newton system in the eigen solver".into()))?;
        c += step.rows(0, k);
        lambda += step[k];
        let umin = min_max(&d.values(&c)).0;
        if umin <= 0.0 {
            return Err(Error::PositivityLost { iteration: iters, min: umin });
        }
        let prev = res;
        res = residual(&c, lambda);
        if prev <= tol && res > prev {
            (c, lambda) = (c_old, lambda_old);
            break;
        }
        history.push(res);
        // truncation floor reached
        if iters >= 3 && res > 0.9 * prev {
            break;
        }
    }
    // normalize so that the largest nodal value is 1
    let uv = d.values(&c);
    let (_, umax) = min_max(&uv);
    c.scale_mut(1.0 / umax);
    let res = residual(&c, lambda);
    let uv = d.values(&c);
    let (min_u, max_u) = min_max(&uv);
    let rhs_c = d.analyze(&uv.component_mul(&fv).scale(lambda));
    let sol = LpSolution {
        u: d.field(&c),
        p: 2.0,
        lambda: Some(lambda),
        residual_inf: res,
        iterations: iters,
        converged: res <= tol,
        diagnostics: LpDiagnostics {
            picard_iterations: 0,
            newton_iterations: iters,
            method: LpMethod::Newton,
            degree1_defect: degree1_norm(&rhs_c),
            min_u,
            max_u,
            history,
        },
    };
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("eigen solver reached λ = {lambda}")));
    }
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NonConvergence { iterations: iters, residual: res, best: Box::new(sol) })
    }
}

/// Runs the eigen solver from `starts` random initial guesses and returns
/// every outcome, so that the spread of `λ` can be inspected.
pub fn solve_lp_eigen_multistart(
    f: &SphericalField,
    tol: f64,
    max_iter: usize,
    starts: usize,
    seed: u64,
) -> Result<Vec<Result<LpSolution>>> {
    check_input(f, &LpConfig::new(tol, max_iter))?;
    let l_max = f.l_max().expect("analyzed");
    let mean = f.grid().integrate(f.values()) / (4.0 * std::f64::consts::PI);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(starts);
    for _ in 0..starts {
        let mut c0 = DVector::zeros(coeff_count(l_max));
        c0[0] = (4.0 * std::f64::consts::PI).sqrt();
        for v in c0.iter_mut().skip(1).take(8) {
            *v = rng.random_range(-0.05..0.05);
        }
        let lambda0 = 2.0 / mean * rng.random_range(0.8..1.2);
        out.push(eigen_newton(f, c0, lambda0, tol, max_iter));
    }
    Ok(out)
}

/// Nodal residual of a solution on another grid, such as a refined one.
pub fn residual_on_grid(sol: &LpSolution, f: &SphericalField, grid: &Arc<SphereGrid>) -> Result<f64> {
    let uc = sol.u.coeffs().ok_or(Error::NotAnalyzed)?;
    let fc = f.coeffs().ok_or(Error::NotAnalyzed)?;
    let uv = synthesize(uc, grid);
    let lu = synthesize(&uc.map_degrees(christoffel_eigenvalue), grid);
    let fv = synthesize(fc, grid);
    let lam = sol.lambda.unwrap_or(1.0);
    let r = uv
        .values()
        .iter()
        .zip(lu.values())
        .zip(fv.values())
        .map(|((u, l), f)| (l - lam * f * u.powf(sol.p - 1.0)).abs())
        .fold(0.0, f64::max);
    Ok(r)
}

/// Residual on the grid of twice the resolution.
pub fn refined_residual(sol: &LpSolution, f: &SphericalField) -> Result<f64> {
    residual_on_grid(sol, f, &make_grid(2 * f.grid().resolution())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientBound {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Absolute slack allowed for round-off in [`check_lemma41`].
pub const LEMMA41_ROUNDOFF: f64 = 1e-10;

fn max_gradient(ev: &FieldEvaluator, f: &SphericalField) -> Vec<(f64, f64)> {
    f.grid()
        .nodes()
        .par_iter()
        .map(|x| {
            let (v, g) = ev.gradient(x);
            (v, crate::sphere::norm(&g))
        })
        .collect()
}

/// Gradient estimate `max |∇u|/u ≤ 2 max |∇f| / min f`.
pub fn check_lemma41(sol: &LpSolution, f: &SphericalField) -> Result<GradientBound> {
    let uev = FieldEvaluator::new(sol.u.coeffs().ok_or(Error::NotAnalyzed)?);
    let fev = FieldEvaluator::new(f.coeffs().ok_or(Error::NotAnalyzed)?);
    let lhs = max_gradient(&uev, &sol.u).iter().map(|(v, g)| g / v).fold(0.0, f64::max);
    let fg = max_gradient(&fev, f);
    let gmax = fg.iter().map(|p| p.1).fold(0.0, f64::max);
    let fmin = fg.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let rhs = 2.0 * gmax / fmin;
    Ok(GradientBound { holds: lhs <= rhs + LEMMA41_ROUNDOFF, lhs, rhs, slack: rhs - lhs })
}

/// Quantitative condition for a convex L_p solution:
/// `(1 + 2(p−1) max f/min f) · exp(2π max|∇f|/min f)^{p−1} · max|∇f| ≤ γ min f`.
pub fn check_t41_cond(f: &SphericalField, p: f64, gamma1: f64) -> Result<GradientBound> {
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} < 2")));
    }
    let fev = FieldEvaluator::new(f.coeffs().ok_or(Error::NotAnalyzed)?);
    let fg = max_gradient(&fev, f);
    let gmax = fg.iter().map(|q| q.1).fold(0.0, f64::max);
    let fmin = fg.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
    let fmax = fg.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max);
    let lhs = t41_lhs(fmin, fmax, gmax, p);
    let rhs = gamma1 * fmin;
    Ok(GradientBound { holds: lhs <= rhs, lhs, rhs, slack: rhs - lhs })
}

/// Left side of the condition in [`check_t41_cond`] from its three inputs.
pub fn t41_lhs(fmin: f64, fmax: f64, grad_max: f64, p: f64) -> f64 {
    (1.0 + 2.0 * (p - 1.0) * fmax / fmin) * (2.0 * std::f64::consts::PI * grad_max / fmin * (p - 1.0)).exp() * grad_max
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn field(l: usize, l_max: usize, terms: &[(usize, i64, f64)], base: f64) -> SphericalField {
        let mut c = HarmonicCoeffs::zeros(l_max);
        c.set(0, 0, base * (4.0 * PI).sqrt());
        for &(dl, m, v) in terms {
            c.set(dl, m, v);
        }
        SphericalField::from_coeffs(make_grid(l).unwrap(), c)
    }

    #[test]
    fn constants() {
        for (fc, want) in [(2.0, 1.0), (8.0, 0.5)] {
            let s = solve_lp(&field(12, 8, &[], fc), 4.0, 1e-10, 100).unwrap();
            assert!(s.u.values().iter().all(|u| (u - want).abs() < 1e-12));
            assert_eq!(s.iterations, 0);
        }
    }

    #[test]
    fn perturbed_field_converges_with_newton() {
        let f = field(24, 16, &[(2, 0, 0.1)], 2.0);
        let s = solve_lp(&f, 4.0, 1e-10, 100).unwrap();
        assert!(s.residual_inf <= 1e-10);
        assert!(refined_residual(&s, &f).unwrap() < 1e-9);
        assert!(s.diagnostics.degree1_defect < 1e-9);
        assert!(check_lemma41(&s, &f).unwrap().holds);
    }

    #[test]
    fn asymmetric_field_gets_a_degree1_part() {
        let f = field(24, 16, &[(2, 1, 0.1), (3, -2, 0.08), (1, 0, 0.1)], 2.0);
        let s = solve_lp(&f, 3.0, 1e-10, 100).unwrap();
        assert!(s.residual_inf <= 1e-10 && s.diagnostics.degree1_defect < 1e-9);
    }

    #[test]
    fn rejects_bad_p() {
        let f = field(12, 8, &[], 2.0);
        assert!(solve_lp(&f, 2.0, 1e-8, 10).is_err());
        assert!(solve_lp(&f, 1.5, 1e-8, 10).is_err());
    }

    #[test]
    fn eigen_constants_and_dense_oracle() {
        let s = solve_lp_eigen(&field(12, 8, &[], 3.0), 1e-10, 50).unwrap();
        assert!((s.lambda.unwrap() - 2.0 / 3.0).abs() < 1e-12);

        let f = field(16, 10, &[(2, 0, 0.05), (3, 1, 0.03)], 1.0);
        let s = solve_lp_eigen(&f, 1e-9, 50).unwrap();
        // dense oracle: the single positive generalized eigenvalue of A c = λ M c
        let d = Discretization::new(f.grid().clone(), 10).unwrap();
        let m = d.weighted_gram(&DVector::from_column_slice(f.values()));
        let chol = m.cholesky().unwrap();
        let linv = chol.l().try_inverse().unwrap();
        let a = DMatrix::from_diagonal(&d.eig);
        let sym = &linv * a * linv.transpose();
        let ev = sym.symmetric_eigenvalues();
        let pos: Vec<f64> = ev.iter().copied().filter(|v| *v > 1e-9).collect();
        assert_eq!(pos.len(), 1);
        assert!((pos[0] - s.lambda.unwrap()).abs() < 1e-10, "{} {}", pos[0], s.lambda.unwrap());
        assert!((s.diagnostics.max_u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn multistart_agrees() {
        let f = field(32, 24, &[(2, 0, 0.2), (4, 3, 0.1)], 1.5);
        let sols = solve_lp_eigen_multistart(&f, 1e-8, 50, 5, 0).unwrap();
        let l0 = sols[0].as_ref().unwrap().lambda.unwrap();
        for s in &sols {
            let s = s.as_ref().unwrap();
            assert!((s.lambda.unwrap() - l0).abs() < 1e-12, "{} {l0} {} {:?}", s.lambda.unwrap(), s.residual_inf, s.diagnostics.history);
        }
    }

    #[test]
    fn t41_lhs_monotone_in_gradient() {
        let mut prev = 0.0;
        for k in 0..20 {
            let v = t41_lhs(1.0, 2.0, 0.01 * k as f64, 4.0);
            assert!(v >= prev);
            prev = v;
        }
        let f = field(12, 4, &[], 2.0);
        let c = check_t41_cond(&f, 4.0, 0.0765).unwrap();
        assert!(c.holds && c.lhs == 0.0);
    }
}
