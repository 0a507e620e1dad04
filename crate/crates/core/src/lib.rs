//! Numerical playground for translation semigroups indexed by a complex
//! sector: sector geometry, revised lower densities, admissible weights,
//! weighted L^p grid functions, and the frequent-hypercyclicity criterion
//! experiments, plus a batch CLI.

pub mod cli;
pub mod density;
pub mod error;
pub mod fhc;
pub mod lp_space;
mod quad;
pub mod rng;
pub mod sector_geometry;
pub mod weights;

pub use error::{Error, Result};
pub use sector_geometry::{Sector, SectorPoint};
