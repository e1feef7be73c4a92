//! Potts-model annealing toolkit.
//!
//! * [`model`] / [`quadratic`] / [`encode`] — Potts instances and their
//!   one-hot / half-hot quadratic encodings with exact energy bookkeeping.
//! * [`meanfield`] — order-parameter sweeps of the fully connected
//!   ferromagnet under a transverse field, transition-order classification,
//!   and the infinite-Q self-consistency solver.
//! * [`replica`] — replica-symmetric saddle-point solver for the fully
//!   connected glass under the half-hot constraint, with the classical
//!   SK system as an independent cross-check.
//! * [`anneal`] / [`iterate`] / [`qubo`] — simulated annealing, feasibility
//!   repair, the iterative half-hot driver, and QUBO export for external
//!   Ising-type solvers.

pub mod anneal;
pub mod encode;
pub mod error;
pub mod format;
pub mod iterate;
pub mod meanfield;
pub mod model;
pub mod quadratic;
pub mod quadrature;
pub mod qubo;
pub mod replica;

pub use error::{Error, Result};
pub use model::PottsModel;
pub use quadratic::{ComponentAssignment, ConstraintMode, Domain, QuadraticModel, Var};
