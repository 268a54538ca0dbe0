//! Polyhedral cones, their face lattices and intrinsic volumes, conic and
//! biconic localizations, and Monte Carlo checks of kinematic formulas.

pub mod borel;
pub mod cone;
pub mod error;
pub mod faces;
pub mod io;
pub mod kinematics;
pub mod measures;
pub mod numerics;
pub mod zoo;

pub use error::{Error, Result};
