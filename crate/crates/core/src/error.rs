use thiserror::Error;

/// Failures raised by the geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric is not positive-definite or is ill-conditioned (ratio {ratio:e})")]
    IllConditioned { ratio: f64 },

    #[error("degenerate plane: Gram determinant {gram:e} below threshold {threshold:e}")]
    DegeneratePlane { gram: f64, threshold: f64 },

    #[error("dilatation must be strictly positive, got {value}")]
    InvalidDilatation { value: f64 },

    #[error("bundle tangents are attached to different base points")]
    MismatchedBase,

    #[error("map is not an immersion here (smallest stretch {min_stretch:e})")]
    NotAnImmersion { min_stretch: f64 },

    #[error("image point has radius {found}, expected sphere radius {expected}")]
    ImageNotOnSphere { found: f64, expected: f64 },

    #[error("target manifold model carries no Euclidean embedding")]
    MissingEmbedding,

    #[error("sample is degenerate: h(A, A) = {value:e}")]
    DegenerateSample { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
