//! State vectors, density matrices, unitaries and the fidelity/entropy
//! measures defined on them.

mod density;
mod measures;
mod unitary;
mod vector;

pub use density::DensityMatrix;
pub use measures::{
    half_chain_entropy, half_chain_keep, hilbert_schmidt_overlap, overlap_fidelity,
    partial_trace, uhlmann_fidelity, von_neumann_entropy,
};
pub use unitary::{unitarity_defect, UnitaryMatrix};
pub use vector::{random_pure_state, StateVector};
