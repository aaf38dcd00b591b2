use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("subsonic point at x2 = {x2}: mu^2 - c^2 = {margin}")]
    SubsonicPoint { x2: f64, margin: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("field shapes do not match the grid: {0}")]
    GridMismatch(String),

    #[error("corner compatibility violated at {corner}: mismatch {mismatch:.3e} > tolerance {tol:.3e}")]
    CompatibilityViolation { corner: String, mismatch: f64, tol: f64 },

    #[error("CFL number {cfl} exceeds the stability bound 1")]
    CflViolation { cfl: f64 },

    #[error("characteristics from opposite corners cross at x1 = {x1}")]
    CharacteristicsCross { x1: f64 },

    #[error("layer initial profile does not match the wall data: mismatch {mismatch:.3e}")]
    CornerMismatch { mismatch: f64 },

    #[error("streamlines cross at x1 = {x1}")]
    StreamlineCrossing { x1: f64 },

    #[error("elliptic solver hit its iteration cap ({iterations}) with residual {residual:.3e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("fixed point did not converge in {iterations} iterations (last increment {last:.3e})")]
    NoConvergence { iterations: usize, last: f64, history: Vec<f64> },

    #[error("density left the admissible range: {detail}")]
    DensityFloor { detail: String },
}
