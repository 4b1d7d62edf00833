//! Reconstruction of unknown pure quantum states from SWAP-test fidelity
//! alone, with the supporting statevector simulator, Kraus noise engine and
//! a content-addressed snapshot store.
//!
//! The state and circuit layers are generic over the scalar type (see
//! [`Real`]); the aliases below fix the common instantiations.

pub mod circuit;
pub mod error;
pub mod estimators;
pub mod noise;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod store;

pub use error::{Error, Result};
pub use rng::Rng;
pub use scalar::Real;

pub type StateVector64 = state::StateVector<f64>;
pub type StateVector32 = state::StateVector<f32>;
pub type DensityMatrix64 = state::DensityMatrix<f64>;
pub type DensityMatrix32 = state::DensityMatrix<f32>;
pub type UnitaryMatrix64 = state::UnitaryMatrix<f64>;
pub type UnitaryMatrix32 = state::UnitaryMatrix<f32>;
pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
