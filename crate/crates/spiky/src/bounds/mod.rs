//! Analytic side: the parameter planner for the exponential lower bound,
//! greedy cap coverings with the covering-based upper bound, and
//! gauge-sum functionals (illumination parameter / vertex index style).

mod cover;
mod plan;
mod sums;

pub use cover::{greedy_cap_cover, illuminate_with_cover, CapCover, CoverCheckOpts, CoverIlluminationReport, COVER_SCHEMA};
pub use plan::{
    feasibility_scan, illumination_upper_bound, illumination_upper_bound_ln, plan_parameters,
    plan_parameters_relaxed, DerivedChecks, FeasibilityFlags, Plan, ScanTable, PLAN_SCHEMA,
    SCAN_SCHEMA,
};
pub use sums::{
    containment_sum, illumination_parameter_sum, simplex_directions, ContainmentSumReport,
    IlluminationSumReport,
};
