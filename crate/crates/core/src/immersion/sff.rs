//! Second fundamental form of an image `φ(M)` through the Euclidean embedding
//! of the target chart.
//!
//! `Π̄` is the form relative to the flat ambient space. When the target is a
//! round sphere `Σᵈ(ρ)` centred at the origin, the form `Π` relative to the
//! sphere is `Π̄(u, v) + (⟨u, v⟩/ρ²) x′` with `x′` the ambient position, and
//!
//! ```text
//! ⟨Π(a), Π(b)⟩ = ⟨Π̄(a), Π̄(b)⟩ − (1/ρ²) ⟨a₁, a₂⟩⟨b₁, b₂⟩.
//! ```

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SmoothMap;
use crate::bilinear::{best_fit_c, e1_residual, BilinearGram};
use crate::diff::DiffConfig;
use crate::error::{GeometryError, Result};
use crate::manifold::{metric_inverse, orthonormal_frame, unit};

/// A round sphere centred at the ambient origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sphere {
    pub radius: f64,
    /// Allowed deviation of `|x′|` from the radius.
    pub tolerance: f64,
}

impl Sphere {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Self { radius, tolerance: 1e-8 })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn check(&self, position: &DVector<f64>) -> Result<()> {
        let found = position.norm();
        if (found - self.radius).abs() > self.tolerance * self.radius.max(1.0) {
            return Err(GeometryError::ImageNotOnSphere {
                found,
                expected: self.radius,
            });
        }
        Ok(())
    }
}

/// First-order data of the composite `F = E ∘ φ` into ambient space.
struct ImageFrame {
    y: DVector<f64>,
    position: DVector<f64>,
    jphi: DMatrix<f64>,
    jembed: DMatrix<f64>,
    jf: DMatrix<f64>,
    induced: DMatrix<f64>,
    induced_inv: DMatrix<f64>,
}

impl ImageFrame {
    fn new(phi: &SmoothMap, x: &DVector<f64>, cfg: &DiffConfig) -> Result<Self> {
        let embed = phi.target().embedding().ok_or(GeometryError::MissingEmbedding)?;
        let y = phi.value(x)?;
        let jphi = phi.jacobian(x, cfg)?;
        let jembed = embed.jacobian(&y, cfg);
        let jf = &jembed * &jphi;
        let induced = jf.transpose() * &jf;
        let induced_inv = metric_inverse(&induced).map_err(|e| match e {
            GeometryError::IllConditioned { ratio } => GeometryError::NotAnImmersion { min_stretch: ratio },
            other => other,
        })?;
        Ok(Self {
            position: embed.value(&y),
            y,
            jphi,
            jembed,
            jf,
            induced,
            induced_inv,
        })
    }

    /// `D²F(u, v)` by the chain rule.
    fn second(&self, phi: &SmoothMap, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
        let embed = phi.target().embedding().ok_or(GeometryError::MissingEmbedding)?;
        let outer = embed.second_derivative(&self.y, &(&self.jphi * u), &(&self.jphi * v), cfg);
        Ok(outer + &self.jembed * phi.second(x, u, v, cfg)?)
    }

    /// Component of an ambient vector normal to the image tangent plane.
    fn normal_part(&self, w: &DVector<f64>) -> DVector<f64> {
        let coeffs = &self.induced_inv * (self.jf.transpose() * w);
        w - &self.jf * coeffs
    }

    fn sff(&self, phi: &SmoothMap, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
        Ok(self.normal_part(&self.second(phi, x, u, v, cfg)?))
    }
}

/// `Π̄(u, v)` at `x`: the normal part of `D²(E ∘ φ)(u, v)`.
pub fn ambient_sff(phi: &SmoothMap, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    ImageFrame::new(phi, x, cfg)?.sff(phi, x, u, v, cfg)
}

/// `Π̄(eᵢ, eₖ)` on the coordinate basis together with the induced metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SffTable {
    pub dim: usize,
    pub induced_metric: DMatrix<f64>,
    /// Ambient position `x′` of the image point.
    pub position: DVector<f64>,
    values: Vec<DVector<f64>>,
}

impl SffTable {
    pub fn value(&self, i: usize, k: usize) -> &DVector<f64> {
        &self.values[i * self.dim + k]
    }

    /// `⟨Π̄(eᵢ, eₖ), Π̄(eⱼ, eₗ)⟩`.
    pub fn inner(&self, (i, k): (usize, usize), (j, l): (usize, usize)) -> f64 {
        self.value(i, k).dot(self.value(j, l))
    }
}

pub fn sff_table(phi: &SmoothMap, x: &DVector<f64>, cfg: &DiffConfig) -> Result<SffTable> {
    let frame = ImageFrame::new(phi, x, cfg)?;
    let m = phi.source().dim();
    let mut values = vec![DVector::zeros(frame.position.len()); m * m];
    for i in 0..m {
        for k in i..m {
            let val = frame.sff(phi, x, &unit(m, i), &unit(m, k), cfg)?;
            values[k * m + i] = val.clone();
            values[i * m + k] = val;
        }
    }
    Ok(SffTable {
        dim: m,
        induced_metric: frame.induced,
        position: frame.position,
        values,
    })
}

fn sphere_table(phi: &SmoothMap, sphere: &Sphere, x: &DVector<f64>, cfg: &DiffConfig) -> Result<SffTable> {
    let table = sff_table(phi, x, cfg)?;
    sphere.check(&table.position)?;
    Ok(table)
}

/// `⟨Π(eᵢ, eₖ), Π(eⱼ, eₗ)⟩` for the image inside the sphere.
pub fn sphere_sff_inner(
    phi: &SmoothMap,
    sphere: &Sphere,
    x: &DVector<f64>,
    (i, k): (usize, usize),
    (j, l): (usize, usize),
    cfg: &DiffConfig,
) -> Result<f64> {
    let table = sphere_table(phi, sphere, x, cfg)?;
    let g = &table.induced_metric;
    Ok(table.inner((i, k), (j, l)) - g[(i, k)] * g[(j, l)] / (sphere.radius * sphere.radius))
}

/// `Π(u, v)` for the image inside the sphere, as an ambient vector.
pub fn sphere_sff_vector(
    phi: &SmoothMap,
    sphere: &Sphere,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    let frame = ImageFrame::new(phi, x, cfg)?;
    sphere.check(&frame.position)?;
    let uv = (&frame.jf * u).dot(&(&frame.jf * v));
    Ok(frame.sff(phi, x, u, v, cfg)? + &frame.position * (uv / (sphere.radius * sphere.radius)))
}

/// Inner products of `Π` on an orthonormal basis of the image tangent plane.
struct SphereSffGram {
    dim: usize,
    values: Vec<DVector<f64>>,
    inv_r2: f64,
}

impl BilinearGram for SphereSffGram {
    fn dim_v(&self) -> usize {
        self.dim
    }

    fn gram(&self, a: usize, c: usize, b: usize, d: usize) -> f64 {
        let metric = if a == c && b == d { self.inv_r2 } else { 0.0 };
        self.values[a * self.dim + c].dot(&self.values[b * self.dim + d]) - metric
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimality {
    pub c: f64,
    /// Max deviation of `⟨Π(u,w), Π(v,w)⟩ = C⟨u,v⟩⟨w,w⟩` at the fitted `C`.
    pub residual: f64,
}

/// Best-fit optimality coefficient of the image inside the sphere at `x`.
pub fn optimality_coefficient(phi: &SmoothMap, sphere: &Sphere, x: &DVector<f64>, cfg: &DiffConfig) -> Result<Optimality> {
    let table = sphere_table(phi, sphere, x, cfg)?;
    let m = table.dim;
    let q = orthonormal_frame(&table.induced_metric)?;
    let mut values = Vec::with_capacity(m * m);
    for a in 0..m {
        for c in 0..m {
            let mut w = DVector::zeros(table.position.len());
            for i in 0..m {
                for k in 0..m {
                    w += table.value(i, k) * (q[(i, a)] * q[(k, c)]);
                }
            }
            values.push(w);
        }
    }
    let gram = SphereSffGram {
        dim: m,
        values,
        inv_r2: 1.0 / (sphere.radius * sphere.radius),
    };
    let c = best_fit_c(&gram);
    Ok(Optimality {
        c,
        residual: e1_residual(&gram, c),
    })
}

/// Mean curvature vector `tr Π` of the image inside the sphere (no `1/m`).
pub fn mean_curvature(phi: &SmoothMap, sphere: &Sphere, x: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let table = sphere_table(phi, sphere, x, cfg)?;
    let m = table.dim;
    let ginv = metric_inverse(&table.induced_metric)?;
    let mut h = &table.position * (m as f64 / (sphere.radius * sphere.radius));
    for i in 0..m {
        for k in 0..m {
            h += table.value(i, k) * ginv[(i, k)];
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::charts::{equator_inclusion, euclidean, stereo_chart, veronese_map, veronese_radius};
    use crate::diff::VectorMap;
    use num_dual::DualNum;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn veronese_sphere() -> Sphere {
        Sphere::new(veronese_radius()).unwrap()
    }

    #[test]
    fn plane_in_space_is_flat() {
        let l = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0, -1.0]);
        let phi = SmoothMap::new(Arc::new(euclidean(2)), Arc::new(euclidean(3)), VectorMap::linear(l)).unwrap();
        let cfg = DiffConfig::default();
        let s = ambient_sff(&phi, &v(&[0.5, 1.0]), &v(&[1.0, 0.0]), &v(&[0.3, 2.0]), &cfg).unwrap();
        assert_eq!(s.amax(), 0.0);
    }

    #[test]
    fn round_sphere_in_space() {
        let rho = 2.0;
        let s = Arc::new(stereo_chart(2, rho));
        let phi = SmoothMap::identity(s);
        let cfg = DiffConfig::default();
        let t = v(&[0.3, -0.8]);
        let x = v(&[1.0, 0.5]);
        let frame = ImageFrame::new(&phi, &t, &cfg).unwrap();
        let len2 = (&frame.jf * &x).norm_squared();
        let expected = &frame.position * (-len2 / (rho * rho));
        let got = ambient_sff(&phi, &t, &x, &x, &cfg).unwrap();
        assert!((got - expected).amax() < 1e-13);
    }

    #[test]
    fn missing_embedding() {
        let bare = Arc::new(crate::manifold::ManifoldModel::new("bare", 2, |_| DMatrix::identity(2, 2)));
        let phi = SmoothMap::identity(bare);
        assert_eq!(
            ambient_sff(&phi, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &DiffConfig::default()),
            Err(GeometryError::MissingEmbedding)
        );
    }

    #[test]
    fn veronese_table_at_origin() {
        let cfg = DiffConfig::default();
        let table = sff_table(&veronese_map(), &v(&[0.0, 0.0]), &cfg).unwrap();
        let r3 = 3f64.sqrt();
        let expected_11 = v(&[0.0, 0.0, 0.0, 4.0, 4.0 * r3]);
        let expected_22 = v(&[0.0, 0.0, 0.0, -4.0, 4.0 * r3]);
        let expected_12 = v(&[0.0, 0.0, 4.0, 0.0, 0.0]);
        assert!((table.value(0, 0) - expected_11).amax() < 1e-12);
        assert!((table.value(1, 1) - expected_22).amax() < 1e-12);
        assert!((table.value(0, 1) - expected_12).amax() < 1e-12);
        assert!((table.inner((0, 0), (0, 0)) - 64.0).abs() < 1e-11);
    }

    #[test]
    fn veronese_sphere_inner_products_at_origin() {
        let cfg = DiffConfig::default();
        let phi = veronese_map();
        let s = veronese_sphere();
        let o = v(&[0.0, 0.0]);
        assert!((sphere_sff_inner(&phi, &s, &o, (0, 0), (0, 0), &cfg).unwrap() - 16.0).abs() < 1e-11);
        assert!(sphere_sff_inner(&phi, &s, &o, (0, 0), (1, 0), &cfg).unwrap().abs() < 1e-11);
    }

    #[test]
    fn veronese_is_optimal_and_minimal() {
        let cfg = DiffConfig::default();
        let phi = veronese_map();
        let s = veronese_sphere();
        for t in [v(&[0.0, 0.0]), v(&[0.5, 0.0]), v(&[-0.3, 0.7])] {
            let opt = optimality_coefficient(&phi, &s, &t, &cfg).unwrap();
            assert!((opt.c - 1.0).abs() < 1e-10, "{opt:?}");
            assert!(opt.residual < 1e-10, "{opt:?}");
            assert!(mean_curvature(&phi, &s, &t, &cfg).unwrap().amax() < 1e-10);
        }
    }

    #[test]
    fn equator_is_totally_geodesic() {
        let cfg = DiffConfig::default();
        let phi = equator_inclusion(0.8);
        let s = Sphere::new(0.8).unwrap();
        let t = v(&[0.4, 0.2]);
        let opt = optimality_coefficient(&phi, &s, &t, &cfg).unwrap();
        assert!(opt.c.abs() < 1e-12 && opt.residual < 1e-12);
        assert!(mean_curvature(&phi, &s, &t, &cfg).unwrap().amax() < 1e-12);
        let pi = sphere_sff_vector(&phi, &s, &t, &v(&[1.0, 0.0]), &v(&[0.2, 1.0]), &cfg).unwrap();
        assert!(pi.amax() < 1e-12);
    }

    #[test]
    fn wrong_radius_is_rejected() {
        let cfg = DiffConfig::default();
        let err = optimality_coefficient(&veronese_map(), &Sphere::new(1.0).unwrap(), &v(&[0.0, 0.0]), &cfg);
        assert!(matches!(err, Err(GeometryError::ImageNotOnSphere { .. })));
    }

    #[test]
    fn small_circle_mean_curvature() {
        // circle of angular radius θ about the south pole: |H| = |cot θ|
        let theta: f64 = 0.7;
        let r = (theta / 2.0).tan();
        let circle = VectorMap::from_dual(1, 2, move |s| vec![s[0].cos() * r, s[0].sin() * r]);
        let phi = SmoothMap::new(Arc::new(euclidean(1)), Arc::new(stereo_chart(2, 1.0)), circle).unwrap();
        let h = mean_curvature(&phi, &Sphere::new(1.0).unwrap(), &v(&[0.3]), &DiffConfig::default()).unwrap();
        assert!((h.norm() - 1.0 / theta.tan()).abs() < 1e-12);
    }
}
