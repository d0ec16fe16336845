//! Convexity of the solution: the two kernel criteria, witness sweeps, the
//! direct Hessian test and the classical sufficient conditions.

mod criteria;
mod sufficient;
mod sweep;

pub use criteria::{
    criterion_cr1, criterion_cr2, sym2_max_eig, sym2_min_eig, Criterion, CriterionEvaluator, CriterionMatrix,
    CriterionValue, PolarRule, PolarRuleMeta, TRIM_TOLERANCE,
};
pub use sufficient::{
    check_guan_ma, check_pogorelov, check_t32, check_t33, ConditionCheck, GuanMaCheck, T33Check, GUAN_MA_TOL,
    REANALYSIS_TAIL,
};
pub use sweep::{
    hessian_min, radii_matrix, sweep, sweep_with, ConvexityReport, CriterionSummary, GridMeta, HessianMin, Verdict,
    BAND_FACTOR, REFINE_FACTOR,
};

#[cfg(test)]
mod tests;
