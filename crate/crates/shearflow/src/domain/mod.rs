//! Physical constants, the base shear profile, grids and boundary traces.

mod boundary;
mod flow;
mod grid;
mod params;

pub use boundary::{sine_c2_norm, sine_series, BoundaryData, PERTURBATION_MODES};
pub use flow::{validate_supersonic, BaseFlow, Profile, Spline, SupersonicReport};
pub use grid::{build_grid, BoundaryTag, Grading, Grid};
pub(crate) use grid::{locate, trapezoid_weights};
pub use params::{sound_speed, PhysicalParams};
