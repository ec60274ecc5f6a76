//! Quasi-periodic SL(2,R) cocycles over circle rotations: invariants,
//! continued-fraction renormalization, cone monitors, complex rotation
//! numbers, and reducibility constructions.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod families;
pub mod renormalization;
pub mod continued_fractions;
pub mod error;
pub mod cocycle;
pub mod complex_rotation;
pub mod cone_monitors;
pub mod invariants;
pub mod reducibility;
pub mod sl2_geometry;
pub mod spectral;

pub use error::{Error, Result};
