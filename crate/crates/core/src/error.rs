use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {0}, expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("points per axis must be a power of two >= 16, got {0}")]
    InvalidResolution(usize),
    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("expected {expected} components, got {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("dilation by 2^{m} moves frequency {freq} outside the resolved range")]
    FrequencyOverflow { m: i32, freq: i64 },
    #[error("contraction by 2^{m} needs frequencies divisible by {divisor}, found {freq}")]
    FrequencyNotDivisible { m: i32, divisor: i64, freq: i64 },
    #[error("field has nonzero mean {mean:e}")]
    NonzeroMean { mean: f64 },
    #[error("field has content beyond the dealiasing radius")]
    NotBandLimited,
    #[error("CFL condition violated: dt*|v|_inf*M/3 = {number:.4} > 1")]
    Cfl { number: f64 },
    #[error("velocity is not divergence-free (relative divergence {residual:e})")]
    NotSolenoidal { residual: f64 },
    #[error("coefficient must be bounded below by a positive constant, min sample {min:e}")]
    CoefficientNotPositive { min: f64 },
    #[error("Richardson iteration did not converge in {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("density floor violated: min(sigma + 1) = {min:e} < {floor:e}")]
    DensityFloor { min: f64, floor: f64 },
    #[error("time {t} lies beyond the last sample {last}")]
    HorizonBeyondSamples { t: f64, last: f64 },
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index conditions violated: {0}")]
    IndexCondition(String),
    #[error("incompatible initial data: {0}")]
    IncompatibleData(String),
    #[error("linearization map did not contract within {} outer iterations", distances.len())]
    NonContraction { distances: Vec<f64> },
}
