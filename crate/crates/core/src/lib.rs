//! Exact finite-temperature thermodynamics and full counting statistics of the
//! periodic XY / transverse-field Ising chain, with a dense exact
//! diagonalization oracle for small chains.

pub mod error;
pub mod logscale;
pub mod model;
pub mod parity_algebra;
pub mod partition;
pub mod fcs;
pub mod oracle;
pub mod check;

pub use error::{Error, Result};
pub use logscale::LogScaledReal;
pub use model::{ChainParams, Thermal};
