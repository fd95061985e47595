//! Brute-force exact evolution used to validate the closed forms.

pub mod dense;
pub mod evolve;
pub mod hamiltonian;

pub use dense::{bloch_vector, concurrence, partial_trace, DenseState};
pub use evolve::{
    bath_product_basis_state, bath_product_state, evolve_reduced, evolve_with, irrep_evolve,
    irrep_mixture, product_state, OracleRun, Propagator,
};
pub use hamiltonian::{build_hamiltonian, HamiltonianKind, HamiltonianSpec, DEFAULT_N_CAP};
