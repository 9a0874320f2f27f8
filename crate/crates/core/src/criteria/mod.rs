//! Checkers for the hypercyclicity criteria: ℓ^p series, necessary-condition
//! witnesses, the (a)–(d) characterisation on `c₀`, the explicit frequently
//! hypercyclic vector, the lower-density obstruction and distributional
//! scans. Every verdict is a [`ConditionReport`].

mod conditions;
mod fhc;
mod obstruction;
mod report;
mod scan;
mod series;

pub use conditions::{
    recheck_d_witness, verify_bilateral_conditions, verify_bilateral_conditions_with, verify_unilateral_conditions,
    verify_unilateral_conditions_with, FamilyLiteral, FhcFamily, MLiteral, Target, DEFAULT_BUDGET, LOG_TOLERANCE,
};
pub use fhc::{build_fhc_vector, check_fhc_coefficients, default_dense_family, recheck_visit_witness, thin_family, verify_fhc_visits};
pub use obstruction::lower_density_obstruction;
pub(crate) use report::MAX_WITNESSES;
pub use report::{overall, ConditionReport, Verdict, Witness};
pub use scan::{distributional_unbounded_scan, UNBOUNDED_UPPER};
pub use series::{lp_series_test, necessary_condition_witness, prefix_sum, recheck_necessary_witness, CONVERGENCE_INCREMENT, DIVERGENCE_SUM};
