//! Restricted constants, recovery conditions, convergence constants and
//! numerical checks of the supporting matrix inequalities.

mod conditions;
mod constants;
mod enumerate;
mod lemmas;

pub use conditions::{
    check_sufficient_conditions, cross_babel, dynamic_range, ConditionCheck, CrossBabel,
    SufficientConditions, TableCheck,
};
pub use constants::{
    bound_constants_k, component_bands, convergence_constants, iteration_bound, table_threshold,
    BoundCase, BoundConstants, BoundInputs, BoundParameters, ComponentBand, ConstantInputs,
    ConvergenceConstants, IterationBound,
};
pub use enumerate::{
    binomial, constants_report, max_restricted_deviation, restricted_biorthogonality_constant,
    restricted_isometry_constant, ConstantsReport, EnumerationMode, RestrictedConstant,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use lemmas::{
    projected_theta, run_lemma_suite, verify_projection_preservation, ClaimForm, LemmaCheck,
    LemmaSuite, LemmaSuiteConfig, PreservationOrder, ProjectionPreservation,
};
