//! Fermion-pair creation in a graphene sheet by an atom sliding above it at
//! constant velocity.
//!
//! Everything is expressed in natural units (`ħ = c = 1`) with the overall
//! coupling constants set to one.

pub mod error;
pub mod gamma;
pub mod kinematics;
pub mod matrix_element;
pub mod quadrature;
pub mod scaled;
pub mod distributions;
pub mod sampler;

pub use error::{Error, Result};
pub use scaled::Scaled;
