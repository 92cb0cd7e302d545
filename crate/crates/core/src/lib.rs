//! Product-formula simulation and Trotter error analysis for Pauli-sum
//! Hamiltonians: exact and Trotterized evolution, empirical error ensembles,
//! analytic average- and worst-case bounds, and minimal Trotter number search.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod exact;
pub mod formulas;
pub mod haar;
pub mod hamiltonian;
pub mod linalg;
pub mod otoc;
pub mod pauli;
pub mod rng;
pub mod search;
pub mod state;

/// Largest qubit count for which dense operators are materialized.
pub const DENSE_CAP: usize = 12;

pub use error::{Error, Result};
pub use formulas::{EvolutionPlan, StageList};
pub use hamiltonian::{HamiltonianInstance, Model, ModelParams, NormProfile, TermGroup};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use state::StateVector;
