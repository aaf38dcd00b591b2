//! Multi-scale corrector expansion and remainder solver for steady
//! compressible Navier–Stokes flow in the channel (0, L) × (0, 2) near a
//! supersonic shear profile μ(x₂).
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`domain`]: physical constants, the base profile, grids, boundary data.
//! 2. [`euler`]: the two linear hyperbolic Euler corrector systems.
//! 3. [`prandtl`]: the weak boundary-layer correctors and their cutoff errors.
//! 4. [`assembly`]: the approximate solution and its forcing residuals.
//! 5. [`linear`]: one solve of the linearized transport + Lamé system.
//! 6. [`nonlinear`]: the outer Picard iteration and the final norm table.

pub mod assembly;
pub mod domain;
pub mod error;
pub mod euler;
pub mod field;
pub mod jet;
pub mod linear;
pub mod nonlinear;
pub mod prandtl;
pub mod smooth;

pub use error::{Error, Result};
