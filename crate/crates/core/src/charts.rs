//! Built-in charts and maps: Euclidean space, round spheres in stereographic
//! coordinates, the degree-two harmonic (Veronese) map `Σ²(1) → Σ⁴(1/√3)`,
//! the chart of its image, and the totally geodesic equator inclusion.
//!
//! Stereographic coordinates on `Σᵈ(ρ) ⊂ ℝᵈ⁺¹` project from the north pole
//! `(0, …, 0, ρ)`:
//!
//! ```text
//! x(t) = ρ (2t, |t|² − 1) / (1 + |t|²),   g = 4ρ² / (1 + |t|²)² · δ.
//! ```
//!
//! The chart origin is the south pole and `|t| < 1` is the lower hemisphere.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_dual::DualNum;

use crate::diff::VectorMap;
use crate::error::{GeometryError, Result};
use crate::immersion::SmoothMap;
use crate::manifold::{Christoffel, ManifoldModel};

/// Radius of the sphere containing the Veronese image.
pub fn veronese_radius() -> f64 {
    1.0 / 3f64.sqrt()
}

pub fn euclidean(dim: usize) -> ManifoldModel {
    ManifoldModel::new(format!("euclidean-{dim}"), dim, move |_| DMatrix::identity(dim, dim))
        .with_christoffel(move |_| Christoffel::zeros(dim))
        .with_embedding(VectorMap::identity(dim))
}

/// Inverse stereographic projection `ℝᵈ → Σᵈ(ρ)`.
pub fn stereo_inverse<D>(t: &[D], rho: f64) -> Vec<D>
where
    D: DualNum<Primitive = f64> + Copy,
{
    let s = t.iter().fold(D::zero(), |acc, &ti| acc + ti * ti);
    let den = s + 1.0;
    let mut out: Vec<D> = t.iter().map(|&ti| ti * (2.0 * rho) / den).collect();
    out.push((s - 1.0) * rho / den);
    out
}

/// Stereographic projection `Σᵈ(ρ) → ℝᵈ` from the north pole.
pub fn stereo_projection<D>(x: &[D], rho: f64) -> Vec<D>
where
    D: DualNum<Primitive = f64> + Copy,
{
    let d = x.len() - 1;
    let den = -x[d] + rho;
    x[..d].iter().map(|&xi| xi / den).collect()
}

/// `Σᵈ(ρ)` in stereographic coordinates, with exact metric, Christoffel
/// symbols and embedding into `ℝᵈ⁺¹`.
pub fn stereo_chart(dim: usize, rho: f64) -> ManifoldModel {
    ManifoldModel::new(format!("sphere-{dim}(rho={rho})"), dim, move |t| {
        let f = 2.0 * rho / (1.0 + t.norm_squared());
        DMatrix::identity(dim, dim) * (f * f)
    })
    .with_christoffel(move |t| {
        // g = e^{2u} δ with u = log(2ρ / (1 + |t|²))
        let du = t * (-2.0 / (1.0 + t.norm_squared()));
        let mut gamma = Christoffel::zeros(dim);
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let mut val = 0.0;
                    if i == k {
                        val += du[j];
                    }
                    if j == k {
                        val += du[i];
                    }
                    if i == j {
                        val -= du[k];
                    }
                    gamma.set(k, i, j, val);
                }
            }
        }
        gamma
    })
    .with_embedding(VectorMap::from_dual(dim, dim + 1, move |t| stereo_inverse(t, rho)))
}

/// Lower hemisphere of `Σ²(1)`: the stereographic chart restricted to `|t| < 1`.
pub fn lower_hemisphere() -> ManifoldModel {
    stereo_chart(2, 1.0).with_domain(|t| t.len() == 2 && t.norm() < 1.0)
}

/// The five harmonic quadratics of the Veronese map on `ℝ³`.
pub fn veronese_polynomials<D>(x: &[D]) -> Vec<D>
where
    D: DualNum<Primitive = f64> + Copy,
{
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    vec![
        x2 * x3,
        x1 * x3,
        x1 * x2,
        (x1 * x1 - x2 * x2) * 0.5,
        (x1 * x1 + x2 * x2 - x3 * x3 * 2.0) * (3f64.sqrt() / 6.0),
    ]
}

/// The Veronese map on a point of the unit sphere `Σ²(1) ⊂ ℝ³`.
pub fn veronese(x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != 3 {
        return Err(GeometryError::DimensionMismatch { expected: 3, found: x.len() });
    }
    if (x.norm() - 1.0).abs() > 1e-9 {
        return Err(GeometryError::OutsideDomain {
            point: x.iter().copied().collect(),
        });
    }
    Ok(DVector::from_vec(veronese_polynomials(x.as_slice())))
}

/// Composite `t ↦ u(x(t)) ∈ ℝ⁵` from lower-hemisphere coordinates.
pub fn veronese_ambient() -> VectorMap {
    VectorMap::from_dual(2, 5, |t| veronese_polynomials(&stereo_inverse(t, 1.0)))
}

/// The image surface `φ(Σ²₋(1))` with the metric induced from `ℝ⁵`, in the
/// lower-hemisphere coordinates of its preimage.
pub fn veronese_image_chart() -> ManifoldModel {
    ManifoldModel::induced("veronese-image", veronese_ambient()).with_domain(|t| t.len() == 2 && t.norm() < 1.0)
}

/// Target chart `Σ⁴(1/√3)`. The Veronese image never reaches the north pole
/// (its last coordinate is at most `√3/6 < 1/√3`), so one stereographic chart
/// covers it.
pub fn veronese_target() -> ManifoldModel {
    stereo_chart(4, veronese_radius())
}

/// The Veronese map in charts: lower hemisphere of `Σ²(1)` → `Σ⁴(1/√3)`.
pub fn veronese_map() -> SmoothMap {
    let rho = veronese_radius();
    let map = VectorMap::from_dual(2, 4, move |t| {
        stereo_projection(&veronese_polynomials(&stereo_inverse(t, 1.0)), rho)
    });
    SmoothMap::new(Arc::new(lower_hemisphere()), Arc::new(veronese_target()), map)
        .expect("chart dimensions agree")
}

/// The totally geodesic inclusion `Σ²(ρ) ⊂ Σ⁴(ρ)`, `t ↦ (t₁, t₂, 0, 0)`.
pub fn equator_inclusion(rho: f64) -> SmoothMap {
    great_sphere_inclusion(2, 4, rho, rho)
}

/// `Σᵈ(ρ) → Σⁿ(ρ′)`, `t ↦ (t, 0)` in stereographic charts. Its image is a
/// great sphere, so it is totally geodesic, and it is a homothety with
/// dilatation `(ρ′/ρ)²`.
pub fn great_sphere_inclusion(dim: usize, target_dim: usize, rho: f64, target_rho: f64) -> SmoothMap {
    assert!(dim <= target_dim, "cannot include a sphere into a smaller one");
    let l = DMatrix::from_fn(target_dim, dim, |i, j| if i == j { 1.0 } else { 0.0 });
    SmoothMap::new(
        Arc::new(stereo_chart(dim, rho)),
        Arc::new(stereo_chart(target_dim, target_rho)),
        VectorMap::linear(l),
    )
    .expect("chart dimensions agree")
}
