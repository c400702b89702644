//! The tomography engine.
//!
//! χ and λ are related by a pure index permutation, `λ_{ab;cd} = χ_{ca;db}`, so
//! any χ element can be read off from a single λ element, which in turn is a
//! short linear combination of measurable transition amplitudes.

mod beta;
mod chi;
mod full;
mod plan;
mod qudit;

pub use beta::{beta_entry, BetaPermutation};
pub use chi::{chi_from_lambda, lambda_from_chi, lambda_oracle, ChiBasis, ChiMatrix, LambdaMatrix};
pub use full::{full_sqpt, FullTomography, Strategy};
pub use plan::{
    plan_element, plan_lambda_element, reconstruct_element, ChiElementEstimate, MeasurementPlan,
    PlanTerm,
};
pub use qudit::{ghz_profile, GhzProfile, QuditIndexMap};
