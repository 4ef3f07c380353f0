//! Linear program container and the capacity-expansion formulation.

mod formulation;
mod instance;

pub use formulation::{build, ghg_budget, BuildInputs, GhgBudget, ServedDemand};
pub use instance::{Column, LpInstance, Relation, Row, RowTag, Symbol, VarKey};
