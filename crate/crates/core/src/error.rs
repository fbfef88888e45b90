use thiserror::Error;

use crate::metric::PointId;

/// Errors produced by the clustering engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point {0} has a non-finite coordinate")]
    NonFiniteCoordinate(PointId),
    #[error("power must be a finite real >= 1, got {0}")]
    InvalidPower(f64),
    #[error("distance offset must be a finite nonnegative real, got {0}")]
    InvalidOffset(f64),
    #[error("{0} must be nonempty")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} is already present")]
    DuplicatePoint(PointId),
    #[error("point {0} is not present")]
    UnknownPoint(PointId),
    #[error("layer index {index} out of range 1..={layers}")]
    LayerOutOfRange { index: usize, layers: usize },
    #[error("center {0} is not a point of the weighted instance")]
    NotInInstance(PointId),
    #[error("point {0} has no assigned center")]
    Unassigned(PointId),
    #[error("instance too large for exhaustive search: {points} points, k = {k}")]
    InstanceTooLarge { points: usize, k: usize },
}

pub type Result<T> = std::result::Result<T, ClusterError>;
