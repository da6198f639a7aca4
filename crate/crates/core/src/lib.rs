//! Numerical geometry of tangent bundles with generalized Cheeger-Gromoll
//! metrics, and verification of when bundle differentials are conformal.
//!
//! The layers build on each other:
//!
//! * [`diff`], [`manifold`]: charted Riemannian manifolds and the
//!   differentiation engine (finite differences plus exact hyper-dual
//!   derivatives).
//! * [`bundle`]: points and tangent vectors of `TM`, the connection map and
//!   the `(p, q, α)` metrics.
//! * [`immersion`]: maps between models, conformality, second fundamental
//!   forms, bundle differentials.
//! * [`bilinear`]: the algebraic condition on symmetric bilinear forms.
//! * [`charts`]: built-in spheres, the Veronese map and friends.
//! * [`scenario`]: named verification scenarios producing JSON reports.

pub mod bilinear;
pub mod bundle;
pub mod charts;
pub mod diff;
pub mod error;
pub mod immersion;
pub mod manifold;
pub mod sampling;
pub mod scenario;

pub use bundle::{BundlePoint, BundleTangent, CGParams, LocalParams};
pub use diff::{DiffConfig, VectorMap};
pub use error::{GeometryError, Result};
pub use immersion::{SmoothMap, Sphere};
pub use manifold::{Christoffel, ManifoldModel, ScalarField};

/// Maximum of non-negative residuals; any NaN makes the result NaN.
pub(crate) fn max_or_nan<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, v| if acc.is_nan() || v.is_nan() { f64::NAN } else { acc.max(v) })
}
