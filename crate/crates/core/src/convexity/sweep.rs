//! Witness sweeps over grid nodes and tangent directions, and the direct
//! Hessian test on a support function.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::criteria::{sym2_min_eig, Criterion, CriterionEvaluator, CriterionMatrix, CriterionValue, PolarRuleMeta};
use crate::error::{Error, Result};
use crate::harmonics::{FieldEvaluator, SphericalField};
use crate::kernels::KernelTable;
use crate::sphere::{tangent_basis, SpherePoint, TangentDirection};

/// Margins within this many error estimates of zero are inconclusive.
pub const BAND_FACTOR: f64 = 10.0;

/// Number of sub-steps per direction step used around the sampled arg-min.
pub const REFINE_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Banding rule applied to a margin and its error estimate.
    pub fn from_band(lower: f64, upper: f64) -> Self {
        if lower > 0.0 {
            Verdict::Holds
        } else if upper < 0.0 {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Result of one criterion sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub verdict: Verdict,
    /// Minimum over the sampled directions, refined around the arg-min.
    pub min_margin: f64,
    pub witness: CriterionValue,
    /// Minimum over all unit directions (smallest eigenvalue of the
    /// criterion's quadratic form), which the verdict is based on.
    pub exact_min: f64,
    pub exact_witness: CriterionValue,
    /// Quadrature error estimate at the exact witness.
    pub error_estimate: f64,
    /// Largest error estimate over all nodes.
    pub max_error_estimate: f64,
    /// Contribution of the inner cap at the exact witness (matrix norm).
    pub cap_contribution: f64,
    pub rule: PolarRuleMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub resolution: usize,
    pub nodes: usize,
    pub l_max: usize,
    pub n_dirs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub criteria: BTreeMap<Criterion, CriterionSummary>,
    pub grid_meta: GridMeta,
}

impl ConvexityReport {
    pub fn get(&self, c: Criterion) -> Option<&CriterionSummary> {
        self.criteria.get(&c)
    }

    pub fn verdict(&self, c: Criterion) -> Option<Verdict> {
        self.get(c).map(|s| s.verdict)
    }

    pub fn min_margin(&self, c: Criterion) -> Option<f64> {
        self.get(c).map(|s| s.min_margin)
    }

    /// Adds the summaries of `other`, which must come from the same grid.
    pub fn merge(mut self, other: ConvexityReport) -> Self {
        self.criteria.extend(other.criteria);
        self
    }

    /// Fails dominates inconclusive, which dominates holds.
    pub fn overall(&self) -> Verdict {
        let vs: Vec<Verdict> = self.criteria.values().map(|s| s.verdict).collect();
        if vs.contains(&Verdict::Fails) {
            Verdict::Fails
        } else if vs.contains(&Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        }
    }
}

struct NodeResult {
    m: CriterionMatrix,
    sampled_min: f64,
    sampled_k: usize,
    exact: f64,
    exact_angle: f64,
}

fn angle_span(c: Criterion) -> f64 {
    match c {
        Criterion::Cr1 => 2.0 * PI,
        Criterion::Cr2 => PI,
    }
}

fn value_at(m: &CriterionMatrix, angle: f64) -> CriterionValue {
    CriterionValue {
        x: m.x,
        xi: TangentDirection::at_angle(m.x, angle),
        value: m.value_at_angle(angle),
        criterion: m.criterion,
    }
}

/// Evaluates `criterion` at every grid node and `n_dirs` tangent directions.
pub fn sweep(f: &SphericalField, criterion: Criterion, n_dirs: usize, table: &KernelTable) -> Result<ConvexityReport> {
    let ev = CriterionEvaluator::new(f, *table)?;
    sweep_with(&ev, f, criterion, n_dirs)
}

/// [`sweep`] with a prepared evaluator.
pub fn sweep_with(ev: &CriterionEvaluator, f: &SphericalField, criterion: Criterion, n_dirs: usize) -> Result<ConvexityReport> {
    if n_dirs < 2 {
        return Err(Error::InvalidParameter(format!("n_dirs = {n_dirs} < 2")));
    }
    let grid = f.grid();
    let step = angle_span(criterion) / n_dirs as f64;
    let results: Vec<NodeResult> = grid
        .nodes()
        .par_iter()
        .map(|x| {
            let m = ev.matrix(criterion, x);
            let (mut sampled_min, mut sampled_k) = (f64::INFINITY, 0);
            for k in 0..n_dirs {
                let v = m.value_at_angle(k as f64 * step);
                if v < sampled_min {
                    sampled_min = v;
                    sampled_k = k;
                }
            }
            let (exact, exact_angle) = m.min_eig();
            NodeResult { m, sampled_min, sampled_k, exact, exact_angle }
        })
        .collect();

    // strict comparisons keep the lowest node index on ties
    let mut best_s = 0;
    let mut best_e = 0;
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut max_err = 0.0f64;
    for (i, r) in results.iter().enumerate() {
        if r.sampled_min < results[best_s].sampled_min {
            best_s = i;
        }
        if r.exact < results[best_e].exact {
            best_e = i;
        }
        lower = lower.min(r.exact - BAND_FACTOR * r.m.err);
        upper = upper.min(r.exact + BAND_FACTOR * r.m.err);
        max_err = max_err.max(r.m.err);
    }

    let rs = &results[best_s];
    let centre = rs.sampled_k as f64 * step;
    let mut witness = value_at(&rs.m, centre);
    let sub = step / REFINE_FACTOR as f64;
    for j in 1..=REFINE_FACTOR {
        for a in [centre - j as f64 * sub, centre + j as f64 * sub] {
            let a = a.rem_euclid(angle_span(criterion));
            let v = value_at(&rs.m, a);
            if v.value < witness.value {
                witness = v;
            }
        }
    }

    let re = &results[best_e];
    let mut exact_witness = value_at(&re.m, re.exact_angle);
    exact_witness.value = re.exact;
    let summary = CriterionSummary {
        criterion,
        verdict: Verdict::from_band(lower, upper),
        min_margin: witness.value,
        witness,
        exact_min: re.exact,
        exact_witness,
        error_estimate: re.m.err,
        max_error_estimate: max_err,
        cap_contribution: re.m.cap_norm(),
        rule: ev.rule_meta(),
    };
    let mut criteria = BTreeMap::new();
    criteria.insert(criterion, summary);
    Ok(ConvexityReport {
        criteria,
        grid_meta: GridMeta {
            resolution: grid.resolution(),
            nodes: grid.len(),
            l_max: f.l_max().unwrap_or(0),
            n_dirs,
        },
    })
}

/// Minimum of the smaller eigenvalue of `U = Hess u + u I` over grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianMin {
    pub min_eig: f64,
    pub witness: SpherePoint,
    pub node: usize,
}

/// `U(x)` in the frame of [`tangent_basis`].
pub fn radii_matrix(ev: &FieldEvaluator, x: &SpherePoint) -> [[f64; 2]; 2] {
    let j = ev.jet(x);
    let (e1, e2) = tangent_basis(x);
    let mut h = j.hess_in_frame(e1.dir(), e2.dir());
    h[0][0] += j.value;
    h[1][1] += j.value;
    h
}

/// Direct convexity test on the support function `u`.
pub fn hessian_min(u: &SphericalField) -> Result<HessianMin> {
    let coeffs = u.coeffs().ok_or(Error::NotAnalyzed)?;
    let ev = FieldEvaluator::new(coeffs);
    let vals: Vec<f64> = u
        .grid()
        .nodes()
        .par_iter()
        .map(|x| sym2_min_eig(&radii_matrix(&ev, x)).0)
        .collect();
    let mut node = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[node] {
            node = i;
        }
    }
    Ok(HessianMin { min_eig: vals[node], witness: u.grid().nodes()[node], node })
}
