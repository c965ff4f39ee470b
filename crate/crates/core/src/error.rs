use thiserror::Error;

use crate::fa3r::Fa3rTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion norm {norm} is not 1")]
    NonUnitQuaternion { norm: f64 },
    #[error("matrix is not a rotation (orthonormality residual {residual:e}, det {det})")]
    NotARotation { residual: f64, det: f64 },

    #[error("point set is empty")]
    EmptySet,
    #[error("reference and body lists differ in length ({reference} vs {body})")]
    LengthMismatch { reference: usize, body: usize },
    #[error("weight list has {weights} entries for {points} points")]
    WeightCount { weights: usize, points: usize },
    #[error("weight {index} is {value}; weights must be positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("non-finite coordinate in point pair {index}")]
    NonFinitePoint { index: usize },
    #[error("{n} point pairs; at least 3 are needed for a well-posed rotation")]
    TooFewPoints { n: usize },

    #[error("cross-product iteration did not converge in {} steps (residual {:e})", .0.iterations_used, .0.final_residual())]
    NotConverged(Box<Fa3rTrace>),
    #[error("covariance is numerically zero; rotation is undetermined")]
    DegenerateInput,
    #[error("iterated triple is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("quaternion numerator vanished")]
    ZeroNorm,

    #[error("Jacobi SVD did not converge in {sweeps} sweeps")]
    SvdNotConverged { sweeps: usize },
    #[error("largest eigenvalue {lambda} is repeated (gap {gap:e}); the optimal rotation is not unique")]
    DegenerateEigenvalue { lambda: f64, gap: f64 },

    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("fixed-point iteration did not converge in {iterations} steps")]
    FixedNotConverged { iterations: usize },
    #[error("integer overflow in fixed-point kernel at scale 2^{scale_bits}")]
    Overflow { scale_bits: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("SNR denominator is zero (body centroid equals the true translation)")]
    ZeroDenominator,
}
