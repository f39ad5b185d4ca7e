//! Homogenization and dimension reduction of thin periodic poroelastic layers.
//!
//! The crate solves the periodic cell problems of a fluid-filled elastic
//! layer, assembles the effective Biot-plate coefficients, time-steps the
//! coupled macroscopic Darcy/plate system and the resolved microscopic
//! fluid-structure system, and compares the two as the period shrinks.

pub mod cell;
pub mod effective;
pub mod error;
pub mod fem;
pub mod forcing;
pub mod geometry;
pub mod macro_plate;
pub mod material;
pub mod micro;
pub mod pipeline;
pub mod par;

pub use error::{Error, Result};
pub use material::ElasticityTensor;
pub use par::Exec;
