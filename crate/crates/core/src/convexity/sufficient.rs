//! Classical sufficient conditions for convexity of the solution.

use rayon::prelude::*;
use serde::Serialize;

use super::criteria::{sym2_max_eig, sym2_min_eig, TRIM_TOLERANCE};
use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize, FieldEvaluator, SphericalField};
use crate::sphere::{dot, make_grid, tangent_basis, SpherePoint, TangentDirection};

/// Outcome of a one-sided test `lhs ≤ rhs` (or a sign test with `rhs = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub witness: Option<SpherePoint>,
}

fn evaluator(f: &SphericalField) -> Result<FieldEvaluator> {
    Ok(FieldEvaluator::trimmed(f.coeffs().ok_or(Error::NotAnalyzed)?, TRIM_TOLERANCE))
}

/// Hölder condition `[f]_α ≤ γ min f`, with the seminorm estimated over
/// pairs of grid nodes at least one grid spacing apart (a lower bound).
pub fn check_t32(f: &SphericalField, alpha: f64, gamma: f64) -> Result<ConditionCheck> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    let grid = f.grid();
    let nodes = grid.nodes();
    let vals = f.values();
    let cos_min = grid.spacing().cos();
    let per_node: Vec<(f64, usize)> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let xi = nodes[i].coords();
            let mut best = (0.0f64, i);
            for j in (i + 1)..nodes.len() {
                let s = dot(xi, nodes[j].coords());
                if s > cos_min {
                    continue;
                }
                let d = s.clamp(-1.0, 1.0).acos();
                let q = (vals[i] - vals[j]).abs() / d.powf(alpha);
                if q > best.0 {
                    best = (q, i);
                }
            }
            best
        })
        .collect();
    let mut seminorm = 0.0;
    let mut at = None;
    for (q, i) in per_node {
        if q > seminorm {
            seminorm = q;
            at = Some(nodes[i]);
        }
    }
    let rhs = gamma * f.min_with_node().0;
    Ok(ConditionCheck { holds: seminorm <= rhs, lhs: seminorm, rhs, witness: at })
}

/// Largest value of `∂_ξ F(x + tξ) − ∂_ξ F(x − tξ)` found by
/// [`check_t33`], with its witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T33Check {
    pub holds: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub witness: TangentDirection,
    pub t: f64,
}

/// `⟨DF(y), ξ⟩` for the degree −1 extension `F` of `f`, via homogeneity.
fn ext_derivative(ev: &FieldEvaluator, y: &[f64; 3], xi: &[f64; 3]) -> f64 {
    let r2 = dot(y, y);
    let p = SpherePoint::new(*y).expect("off-origin point");
    let (v, g) = ev.gradient(&p);
    (dot(&g, xi) - v * dot(p.coords(), xi)) / r2
}

/// Symmetry-monotonicity condition `∂_ξ F(x + tξ) ≤ ∂_ξ F(x − tξ)`, sampled
/// at every grid node over `n_xi` directions in a half circle. The `n_t`
/// values of `t` are log-spaced in `[1e−3, 1e3]`.
pub fn check_t33(f: &SphericalField, n_t: usize, n_xi: usize) -> Result<T33Check> {
    if n_t < 2 || n_xi < 1 {
        return Err(Error::InvalidParameter(format!("n_t = {n_t}, n_xi = {n_xi}")));
    }
    f.ensure_positive()?;
    let ev = evaluator(f)?;
    let ts: Vec<f64> = (0..n_t)
        .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n_t - 1) as f64))
        .collect();
    let tolerance = 1e-12 * f.max_abs();
    let per_node: Vec<(f64, usize, f64, usize)> = f
        .grid()
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let (e1, e2) = tangent_basis(x);
            let c = x.coords();
            let mut best = (f64::NEG_INFINITY, i, 0.0, 0);
            for k in 0..n_xi {
                let a = std::f64::consts::PI * k as f64 / n_xi as f64;
                let xi = [0, 1, 2].map(|d| a.cos() * e1.dir()[d] + a.sin() * e2.dir()[d]);
                for &t in &ts {
                    let plus = [0, 1, 2].map(|d| c[d] + t * xi[d]);
                    let minus = [0, 1, 2].map(|d| c[d] - t * xi[d]);
                    let e = ext_derivative(&ev, &plus, &xi) - ext_derivative(&ev, &minus, &xi);
                    if e > best.0 {
                        best = (e, i, t, k);
                    }
                }
            }
            best
        })
        .collect();
    let mut worst = per_node[0];
    for r in &per_node[1..] {
        if r.0 > worst.0 {
            worst = *r;
        }
    }
    let x = f.grid().nodes()[worst.1];
    let a = std::f64::consts::PI * worst.3 as f64 / n_xi as f64;
    Ok(T33Check {
        holds: worst.0 <= tolerance,
        worst: worst.0,
        tolerance,
        witness: TangentDirection::at_angle(x, a),
        t: worst.2,
    })
}

/// Pogorelov's condition `f − f_ss > 0`: the minimum over nodes of
/// `f(x) − λ_max(Hess f(x))`, i.e. the worst tangent direction exactly.
pub fn check_pogorelov(f: &SphericalField) -> Result<ConditionCheck> {
    let ev = evaluator(f)?;
    let vals: Vec<f64> = f
        .grid()
        .nodes()
        .par_iter()
        .map(|x| {
            let j = ev.jet(x);
            let (e1, e2) = tangent_basis(x);
            j.value - sym2_max_eig(&j.hess_in_frame(e1.dir(), e2.dir()))
        })
        .collect();
    let (min, node) = argmin(&vals);
    Ok(ConditionCheck { holds: min > 0.0, lhs: min, rhs: 0.0, witness: Some(f.grid().nodes()[node]) })
}

/// Tolerance of the Guan–Ma test.
pub const GUAN_MA_TOL: f64 = 1e-8;

/// Result of [`check_guan_ma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuanMaCheck {
    pub holds: bool,
    pub min_eig: f64,
    pub witness: SpherePoint,
    /// Same minimum computed from the jets of `f` by the chain rule.
    pub chain_rule_min_eig: f64,
    pub reanalysis_l_max: usize,
    /// Largest top-quarter coefficient of `1/f` relative to its mean.
    pub truncation_tail: f64,
}

/// Relative size of the top-degree coefficients at which re-analysis stops.
pub const REANALYSIS_TAIL: f64 = 1e-13;

/// `Hess(1/f) + (1/f) I ≥ 0`, with `1/f` re-analyzed starting at twice the
/// band limit of `f`, doubling until its coefficient tail is negligible.
pub fn check_guan_ma(f: &SphericalField) -> Result<GuanMaCheck> {
    f.ensure_positive()?;
    let coeffs = f.coeffs().ok_or(Error::NotAnalyzed)?;
    let cap = (4 * coeffs.l_max()).max(64);
    let mut l2 = (2 * coeffs.l_max()).max(4);
    let (rc, tail) = loop {
        let fine = make_grid(l2 + 1)?;
        let fv = synthesize(coeffs, &fine);
        let recip = SphericalField::from_values(fine.clone(), fv.values().iter().map(|v| 1.0 / v).collect())?;
        let rc = analyze(&recip, l2)?;
        let mean = rc.get(0, 0).abs();
        let top = (l2 - l2 / 4..=l2).flat_map(|l| rc.degree(l).iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = top / mean;
        if tail < REANALYSIS_TAIL || l2 >= cap {
            break (rc, tail);
        }
        l2 = (2 * l2).min(cap);
    };
    let rev = FieldEvaluator::new(&rc);
    let fev = FieldEvaluator::new(coeffs);
    let pairs: Vec<(f64, f64)> = f
        .grid()
        .nodes()
        .par_iter()
        .map(|x| {
            let (e1, e2) = tangent_basis(x);
            let (e1, e2) = (e1.dir(), e2.dir());
            let j = rev.jet(x);
            let mut h = j.hess_in_frame(e1, e2);
            h[0][0] += j.value;
            h[1][1] += j.value;
            let direct = sym2_min_eig(&h).0;

            let jf = fev.jet(x);
            let hf = jf.hess_in_frame(e1, e2);
            let g = [dot(&jf.grad, e1), dot(&jf.grad, e2)];
            let v = jf.value;
            let mut c = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    c[a][b] = -hf[a][b] / (v * v) + 2.0 * g[a] * g[b] / (v * v * v);
                }
                c[a][a] += 1.0 / v;
            }
            (direct, sym2_min_eig(&c).0)
        })
        .collect();
    let direct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let chain: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (min_eig, node) = argmin(&direct);
    Ok(GuanMaCheck {
        holds: min_eig >= -GUAN_MA_TOL,
        min_eig,
        witness: f.grid().nodes()[node],
        chain_rule_min_eig: argmin(&chain).0,
        reanalysis_l_max: l2,
        truncation_tail: tail,
    })
}

fn argmin(v: &[f64]) -> (f64, usize) {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[k] {
            k = i;
        }
    }
    (v[k], k)
}
