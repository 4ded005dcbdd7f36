//! Exact states, parent Hamiltonians and linear-algebra checks of the loop
//! tensor network at small sizes.

pub mod boundary;
pub mod entropy;
pub mod hamiltonian;
pub mod network;
pub mod observables;
pub mod state;
pub mod strings;
pub mod tensor;

pub use boundary::{dual_matching, matching_gram, matching_vector, overlap_with_matching};
pub use state::{gauge_comparison, psi_class, psi_obc, psi_obc_contract, psi_torus, psi_torus_contract, string_movability, GaugeComparison, StateVector, StringSpec};
pub use tensor::{symmetry_selftest, tensor_entries, SymmetryReport, TensorParams, Variant, C64};
pub use hamiltonian::{assemble_h, build_local_terms, kernel, kernel_dimension, BoundaryCondition, Hamiltonian, LocalTerms, KERNEL_TOL};
pub use entropy::{schmidt_rank, schmidt_rank_exact, Region, SCHMIDT_TOL};
pub use observables::{observables, GramBasis, Observables};
pub use strings::{string_subspace_rank, torus_ground_space, winding_overlap_check, TorusGroundSpace, WindingOverlapReport};
