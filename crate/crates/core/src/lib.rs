//! Subwavelength band structures of a square lattice of circular air bubbles
//! in a fluid, computed with the multipole expansion of quasi-periodic layer
//! potentials.

pub mod capacity;
pub mod error;
mod expint;
pub mod lattice;
pub mod spectra;
pub mod specfun;

pub use error::{CapacityError, LatticeError, OperatorError, SpecFunError, SpectraError};
pub use lattice::{BlochVector, LatticeOptions, LatticeSumTable};
pub mod operator;
pub mod oracle;
