//! Horocycle flows, Patterson–Sullivan measures and horocyclic averages on
//! geometrically finite Fuchsian groups, with the `horolab` experiment runner.

pub mod averages;
pub mod checks;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod group;
pub mod io;
pub mod kv;
pub mod observable;
pub mod patterson;

pub use error::{Error, Result};
