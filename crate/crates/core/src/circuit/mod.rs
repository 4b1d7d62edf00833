//! Gate-level circuits: construction, exact execution, amplitude loading,
//! lowering to the native basis and the SWAP test.

mod gate;
mod lower;
mod mottonen;
pub(crate) mod sim;
mod swap_test;

pub use gate::{Gate, GateKind, QuantumCircuit};
pub use lower::lower_to_basis;
pub use mottonen::mottonen_prepare;
pub use sim::execute_statevector;
pub use swap_test::{ancilla_expectation, build_swap_test, sample_shots, ShotResult};
