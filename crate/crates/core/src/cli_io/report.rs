//! The JSON report written by every command.

use std::collections::BTreeMap;

use serde::Serialize;

use super::config::RunConfig;
use super::source::FieldSource;
use crate::convexity::{ConditionCheck, ConvexityReport, Criterion, GuanMaCheck, HessianMin, T33Check, Verdict};
use crate::kernels::{GammaMonteCarlo, GammaValue};
use crate::lp::{GradientBound, LpSummary};
use crate::sphere::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSection {
    pub source: FieldSource,
    pub min_value: f64,
    pub max_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalitySection {
    /// `∫ x_i f(x) dx` before any projection.
    pub defect: Vec3,
    pub defect_norm: f64,
    pub tol: f64,
    pub projected: bool,
    /// `v` with `⟨v, x⟩` the removed degree-1 part.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_linear_part: Option<Vec3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_magnitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSection {
    /// `max |Δu + 2u − f|` over the grid.
    pub residual_inf: f64,
    pub min_u: f64,
    pub max_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomWitnesses {
    pub criterion: Criterion,
    pub count: usize,
    /// Smallest criterion value over all directions at the sampled points.
    pub min_value: f64,
    pub max_error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T32Section {
    pub alpha: f64,
    pub gamma: f64,
    /// The seminorm is a grid estimate, so it bounds the true one from below.
    pub seminorm_is_grid_estimate: bool,
    #[serde(flatten)]
    pub check: ConditionCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientSection {
    pub t32: T32Section,
    pub t33: T33Check,
    pub pogorelov: ConditionCheck,
    pub guan_ma: GuanMaCheck,
    pub t41: GradientBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSection {
    #[serde(flatten)]
    pub summary: LpSummary,
    pub refined_residual: f64,
    pub lemma41: GradientBound,
    pub t41cond: GradientBound,
    pub gamma1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_min: Option<HessianMin>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSection {
    pub dimensions: Vec<usize>,
    pub s_values: usize,
    pub max_radial_vs_closed: f64,
    pub max_closed_vs_firey: f64,
    /// `max |ω(s)(1 − s) + 1|` for n = 2.
    pub max_n2_identity_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSection {
    pub quadrature: GammaValue,
    pub monte_carlo: GammaMonteCarlo,
    pub relative_difference: f64,
    /// `|quadrature − Monte Carlo|` in Monte-Carlo standard errors.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructSection {
    pub vertices: usize,
    pub faces: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    /// `max |r1 + r2 − f|` over the grid.
    pub trace_identity_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obj: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSection {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthogonality: Option<OrthogonalitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_min: Option<HessianMin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity: Option<ConvexityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub random_witnesses: Vec<RandomWitnesses>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient: Option<SufficientSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSection>,
    /// Wall-clock seconds per phase; the only non-deterministic block.
    pub timings: BTreeMap<String, f64>,
}

impl ReportDocument {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            command: config.command.name().to_string(),
            config: config.clone(),
            input: None,
            orthogonality: None,
            solver: None,
            hessian_min: None,
            convexity: None,
            random_witnesses: Vec::new(),
            sufficient: None,
            lp: None,
            kernels: None,
            gamma: None,
            reconstruct: None,
            verdict: None,
            exit_code: 0,
            error: None,
            timings: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timings block emptied, for reproducibility checks.
    pub fn to_json_without_timings(&self) -> String {
        let mut r = self.clone();
        r.timings.clear();
        r.to_json()
    }

    /// JSON paths holding `null`, which is how non-finite floats serialize.
    pub fn non_finite_entries(&self) -> Vec<String> {
        fn walk(v: &serde_json::Value, path: String, out: &mut Vec<String>) {
            match v {
                serde_json::Value::Null => out.push(path),
                serde_json::Value::Array(a) => {
                    for (i, x) in a.iter().enumerate() {
                        walk(x, format!("{path}[{i}]"), out);
                    }
                }
                serde_json::Value::Object(o) => {
                    for (k, x) in o {
                        walk(x, format!("{path}.{k}"), out);
                    }
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        let v = serde_json::to_value(self).expect("report serializes");
        walk(&v, String::new(), &mut out);
        // optional paths in the config echo are legitimately absent
        out.retain(|p| !p.starts_with(".config.") && !p.ends_with(".lambda") && !p.ends_with(".witness"));
        out
    }
}
