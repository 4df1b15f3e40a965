//! Critical points of the unbiasedness potential and the certificates around them.
//!
//! * [`linalg`]: small dense complex matrices.
//! * [`potential`]: the potential, its gradient, residuals and Hessians.
//! * [`solver`]: damped Newton on the gauge slice, multi-start and family probing.
//! * [`verify`]: projector-system and representation certificates.
//! * [`symplectic`]: moment maps, the cotangent embedding and form pullbacks.
//! * [`birkhoff`]: exact lattice certificates for the Birkhoff polytope.

pub mod birkhoff;
pub mod error;
pub mod linalg;
pub mod potential;
pub mod rng;
pub mod solver;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SpectrumReport, C64};
pub use potential::{GaugeSlicePoint, WeightMatrix};
