//! Sensor selection for steady-state Kalman filtering.
//!
//! Given a discrete-time linear system and a catalog of candidate sensors,
//! this crate computes the steady-state a-priori error covariance of the
//! Kalman filter for any sensor subset (handling singular noise covariances
//! and undetectable selections), optimizes subsets under budget constraints
//! with a greedy heuristic and an exhaustive oracle, generates the adversarial
//! instance families on which greedy selection degrades arbitrarily, and ships
//! executable checks for the structural lemmas those families rely on.

pub mod error;
pub mod instances;
mod linalg;
pub mod riccati;
pub mod selection;
pub mod verify;

pub use error::{Error, Result};
pub use instances::{
    build_example1_instance, build_theorem1_instance, build_theorem2_instance, incidence_matrix,
    parse_instance, serialize_instance, theorem3_limit_ratio, theorem3_sigmas, x3c_oracle,
    HardnessInstance, Provenance, Theorem3Sigmas, X3CInstance,
};
pub use riccati::{
    dare_residual, is_detectable, posterior_from_prior, scalar_sigma11, select_rows, solve_dare,
    solve_dare_information_form, Selection, SensorCatalog, SteadyState, SystemModel,
};
pub use selection::{exhaustive_select, greedy_select, ratio, RatioReport, SelectionResult};
pub use verify::{
    build_transform, check_lemma1, lemma2_curve, theorem3_ratio, Lemma1Report, SuiteReport,
    Theorem3Report, TransformReport,
};
