//! Exact solvers for two-stage robust selection problems under two-stage
//! budgeted uncertainty, where the adversary splits one budget across an
//! attack on the first-stage purchase and an attack on the completion.

pub mod bench;
pub mod cont_decomp;
pub mod disc_exact;
pub mod model;
pub mod num;
pub mod onestage;
pub mod oracle;
pub mod report;
pub mod variant_budget;
pub mod verify;

pub use model::{
    nominal_solve, read_instance, validate, write_instance, CostProfile, Instance, ItemSet, ModelError, NominalProblem,
    UncertaintyKind, Violation,
};
pub use num::Rational;
pub use report::{Method, Provenance, SolveError, SolveReport};
