//! Conforming virtual elements of arbitrary regularity for polyharmonic
//! problems on polygonal meshes.

pub mod cli;
pub mod error;
pub mod mesh;
pub mod polycalc;
pub mod projectors;
pub mod quadrature;
pub mod solver;
pub mod space;

pub use error::{Result, VemError};
