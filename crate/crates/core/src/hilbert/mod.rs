//! States, projector Hamiltonians and spectral diagnostics.

pub mod dense;
mod gap;
mod hamiltonian;
mod state;
mod subspace;

pub use dense::{operator_norm, to_dense, CMatrix, DENSE_CAP};
pub(crate) use gap::brent_min;
pub use gap::{
    gap_profile, gap_profile_sector, grover_gap, grover_profile, min_gap_dense, uniform_grid, GapProfile,
    GapRoute, DEFAULT_GRID_POINTS, DEGENERACY_TOL,
};
pub use hamiltonian::{Placement, ProgramStep, StructuredHamiltonian, UnitaryProgram};
pub use state::{StateVector, MATRIX_FREE_CAP};
pub use subspace::{decompose, InvariantSubspace, SECTOR_CAP};

/// `d^n` equal-amplitude superposition.
pub fn uniform_state<R: crate::num::Real>(d: usize, n: usize) -> crate::error::Result<StateVector<R>> {
    StateVector::uniform(d, n)
}
