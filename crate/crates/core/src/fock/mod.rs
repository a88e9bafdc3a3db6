//! Truncated bosonic Fock spaces and sparse assembly of the lattice
//! Hamiltonians.

mod basis;
mod hamiltonian;
mod operator;

pub use basis::{build_basis, Sector, TruncatedBasis, DEFAULT_DIM_GUARD};
pub use hamiltonian::{
    assemble_bose_hubbard, assemble_decomposition, assemble_free, assemble_kinetic,
    interaction_operator, number_operator, site_operator, Decomposition, SiteOperatorKind,
};
pub use operator::{CsrBlock, SparseOperator};
