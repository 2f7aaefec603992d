//! Desk-scale simulator of nested adiabatic quantum search over structured
//! constraint problems.
//!
//! The numeric core is generic over the real scalar ([`num::Real`], `f32`
//! or `f64`); the aliases below fix the precision for everyday use.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod csp;
pub mod error;
pub mod evolve;
pub mod hilbert;
pub mod nested;
pub mod num;
pub mod schedule;

pub use error::{Error, Result};

pub type StateVector64 = hilbert::StateVector<f64>;
pub type Hamiltonian64 = hilbert::StructuredHamiltonian<f64>;
pub type UnitaryProgram64 = hilbert::UnitaryProgram<f64>;
pub type GapProfile64 = hilbert::GapProfile<f64>;
pub type Schedule64 = schedule::Schedule<f64>;
pub type EvolutionResult64 = evolve::EvolutionResult<f64>;
pub type ErrorBudget64 = evolve::ErrorBudget<f64>;
pub type StagePlan64 = nested::StagePlan<f64>;
pub type NestedRunReport64 = nested::NestedRunReport<f64>;

pub type StateVector32 = hilbert::StateVector<f32>;
pub type Hamiltonian32 = hilbert::StructuredHamiltonian<f32>;
pub type GapProfile32 = hilbert::GapProfile<f32>;
pub type Schedule32 = schedule::Schedule<f32>;
pub type EvolutionResult32 = evolve::EvolutionResult<f32>;
pub type NestedRunReport32 = nested::NestedRunReport<f32>;
