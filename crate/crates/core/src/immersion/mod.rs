//! Maps between charted manifolds and what can be measured about them:
//! conformality of the map and of its bundle differential, second
//! fundamental forms of the image, and the case analysis for pairs of
//! `(p, q, α)` metrics.

mod bundle_map;
mod cases;
mod sff;

pub use bundle_map::{
    bundle_conformality, bundle_differential, bundle_pushforward_matrix, horizontal_image_defect,
    k_transfer_residual, BundleConformalityReport, BundleSample, BundleSampling, KTransfer,
};
pub use cases::{classify_case, closed_form_dilatation, gauss_relation_check, CaseTag, Incompatibility};
pub use sff::{
    ambient_sff, mean_curvature, optimality_coefficient, sff_table, sphere_sff_inner, sphere_sff_vector,
    Optimality, SffTable, Sphere,
};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::diff::{DiffConfig, VectorMap};
use crate::error::{GeometryError, Result};
use crate::manifold::{metric_at, orthonormal_frame, ManifoldModel};

/// A smooth map `φ: M → M′` given in charts.
#[derive(Debug, Clone)]
pub struct SmoothMap {
    source: Arc<ManifoldModel>,
    target: Arc<ManifoldModel>,
    map: VectorMap,
}

impl SmoothMap {
    pub fn new(source: Arc<ManifoldModel>, target: Arc<ManifoldModel>, map: VectorMap) -> Result<Self> {
        if map.in_dim() != source.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: source.dim(),
                found: map.in_dim(),
            });
        }
        if map.out_dim() != target.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: target.dim(),
                found: map.out_dim(),
            });
        }
        Ok(Self { source, target, map })
    }

    /// The identity of a model.
    pub fn identity(model: Arc<ManifoldModel>) -> Self {
        let map = VectorMap::identity(model.dim());
        Self {
            source: Arc::clone(&model),
            target: model,
            map,
        }
    }

    pub fn source(&self) -> &ManifoldModel {
        &self.source
    }

    pub fn target(&self) -> &ManifoldModel {
        &self.target
    }

    pub fn source_arc(&self) -> Arc<ManifoldModel> {
        Arc::clone(&self.source)
    }

    pub fn target_arc(&self) -> Arc<ManifoldModel> {
        Arc::clone(&self.target)
    }

    pub fn map(&self) -> &VectorMap {
        &self.map
    }

    /// Same map with its derivative oracles dropped.
    pub fn without_oracles(&self) -> Self {
        Self {
            source: Arc::clone(&self.source),
            target: Arc::clone(&self.target),
            map: self.map.without_oracles(),
        }
    }

    /// `φ(x)`, checked against both chart domains.
    pub fn value(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.source.check_point(x)?;
        let y = self.map.value(x);
        self.target.check_point(&y)?;
        Ok(y)
    }

    pub fn jacobian(&self, x: &DVector<f64>, cfg: &DiffConfig) -> Result<DMatrix<f64>> {
        self.source.check_point(x)?;
        Ok(self.map.jacobian(x, cfg))
    }

    /// Coordinate second derivative `D²φ(x)(u, v)`.
    pub fn second(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
        self.source.check_point(x)?;
        self.source.check_vector(u)?;
        self.source.check_vector(v)?;
        Ok(self.map.second_derivative(x, u, v, cfg))
    }

    /// `next ∘ self`.
    pub fn compose(&self, next: &SmoothMap) -> Result<SmoothMap> {
        if self.target.dim() != next.source.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: next.source.dim(),
                found: self.target.dim(),
            });
        }
        SmoothMap::new(Arc::clone(&self.source), Arc::clone(&next.target), self.map.then(&next.map)?)
    }
}

/// `φ_* v` at `x`.
pub fn pushforward(phi: &SmoothMap, x: &DVector<f64>, v: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    phi.source().check_vector(v)?;
    Ok(phi.jacobian(x, cfg)? * v)
}

/// Eigenvalues of `b⁻¹a` for symmetric `a` and positive-definite `b`, ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DVector<f64>> {
    let q = orthonormal_frame(b)?;
    let m = q.transpose() * a * &q;
    let m = (&m + m.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(DVector::from_vec(eig))
}

/// `φ*g′` at `x`, as a matrix in source coordinates.
pub fn pullback_metric(phi: &SmoothMap, x: &DVector<f64>, cfg: &DiffConfig) -> Result<DMatrix<f64>> {
    let y = phi.value(x)?;
    let j = phi.jacobian(x, cfg)?;
    let gp = metric_at(phi.target(), &y)?;
    Ok(j.transpose() * gp * j)
}

/// Local dilatation estimate at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub point: Vec<f64>,
    pub lambda: f64,
    /// `max |μᵢ − λ̂| / λ̂` over the eigenvalues `μᵢ` of `g⁻¹ φ*g′`.
    pub residual: f64,
}

/// Least-squares fit of `φ*g′ ≈ λ g` at `x`: `λ̂ = tr(g⁻¹ φ*g′) / m`.
pub fn dilatation_at(phi: &SmoothMap, x: &DVector<f64>, cfg: &DiffConfig) -> Result<LambdaEstimate> {
    let pull = pullback_metric(phi, x, cfg)?;
    let g = metric_at(phi.source(), x)?;
    let mu = generalized_eigenvalues(&pull, &g)?;
    let (min, max) = (mu.min(), mu.max());
    if !(min > 1e-12 * max) {
        return Err(GeometryError::NotAnImmersion {
            min_stretch: if max > 0.0 { min / max } else { min },
        });
    }
    let lambda = mu.mean();
    let residual = crate::max_or_nan(mu.iter().map(|m| (m - lambda).abs())) / lambda;
    Ok(LambdaEstimate {
        point: x.iter().copied().collect(),
        lambda,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalityThresholds {
    /// Bound on the relative deviation of `φ*g′` from `λ̂ g`.
    pub residual: f64,
    /// Bound on the relative spread of `λ̂` across points.
    pub spread: f64,
}

impl Default for ConformalityThresholds {
    fn default() -> Self {
        Self {
            residual: 1e-5,
            spread: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalityReport {
    pub lambda_estimates: Vec<LambdaEstimate>,
    pub max_residual: f64,
    /// `(max λ̂ − min λ̂) / mean λ̂`.
    pub max_lambda_spread: f64,
    pub is_conformal: bool,
    pub is_homothety: bool,
}

pub fn base_conformality(
    phi: &SmoothMap,
    points: &[DVector<f64>],
    cfg: &DiffConfig,
    thresholds: &ConformalityThresholds,
) -> Result<ConformalityReport> {
    if points.is_empty() {
        return Err(GeometryError::InvalidParameter("no sample points".into()));
    }
    let lambda_estimates = points.iter().map(|x| dilatation_at(phi, x, cfg)).collect::<Result<Vec<_>>>()?;
    let max_residual = crate::max_or_nan(lambda_estimates.iter().map(|e| e.residual));
    let lambdas = lambda_estimates.iter().map(|e| e.lambda);
    let min = lambdas.clone().fold(f64::INFINITY, f64::min);
    let max = lambdas.clone().fold(f64::NEG_INFINITY, f64::max);
    let mean = lambdas.sum::<f64>() / lambda_estimates.len() as f64;
    let max_lambda_spread = (max - min) / mean;
    let is_conformal = max_residual <= thresholds.residual;
    Ok(ConformalityReport {
        lambda_estimates,
        max_residual,
        max_lambda_spread,
        is_conformal,
        is_homothety: is_conformal && max_lambda_spread <= thresholds.spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{euclidean, stereo_chart, veronese_map};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn scaling(factor: f64) -> SmoothMap {
        let e = Arc::new(euclidean(2));
        SmoothMap::new(Arc::clone(&e), e, VectorMap::linear(DMatrix::identity(2, 2) * factor)).unwrap()
    }

    #[test]
    fn dimension_checks() {
        let e2 = Arc::new(euclidean(2));
        let e3 = Arc::new(euclidean(3));
        assert!(SmoothMap::new(e2.clone(), e3.clone(), VectorMap::identity(2)).is_err());
        assert!(SmoothMap::new(e2, e3, VectorMap::linear(DMatrix::zeros(3, 2))).is_ok());
    }

    #[test]
    fn pushforward_of_linear_map() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let e = Arc::new(euclidean(2));
        let phi = SmoothMap::new(e.clone(), e, VectorMap::linear(l.clone())).unwrap();
        let cfg = DiffConfig::default();
        let x = v(&[0.3, 0.1]);
        let w = v(&[1.0, -1.0]);
        assert_eq!(pushforward(&phi, &x, &w, &cfg).unwrap(), &l * &w);
        let id = SmoothMap::identity(Arc::new(stereo_chart(2, 1.0)));
        assert_eq!(pushforward(&id, &x, &w, &cfg).unwrap(), w);
    }

    #[test]
    fn scaling_has_constant_dilatation() {
        let cfg = DiffConfig::default();
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, -2.0])];
        let r = base_conformality(&scaling(2.0), &pts, &cfg, &ConformalityThresholds::default()).unwrap();
        assert!(r.lambda_estimates.iter().all(|e| (e.lambda - 4.0).abs() < 1e-14));
        assert!(r.is_homothety);
        let id = base_conformality(&scaling(1.0), &pts, &cfg, &ConformalityThresholds::default()).unwrap();
        assert_eq!(id.max_residual, 0.0);
    }

    #[test]
    fn shear_is_not_conformal() {
        let e = Arc::new(euclidean(2));
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let phi = SmoothMap::new(e.clone(), e, VectorMap::linear(l)).unwrap();
        let r = base_conformality(&phi, &[v(&[0.0, 0.0])], &DiffConfig::default(), &ConformalityThresholds::default())
            .unwrap();
        assert!(!r.is_conformal);
        assert!(!r.is_homothety);
    }

    #[test]
    fn rank_deficient_map_is_rejected() {
        let e = Arc::new(euclidean(2));
        let phi = SmoothMap::new(e.clone(), e, VectorMap::linear(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])))
            .unwrap();
        assert!(matches!(
            dilatation_at(&phi, &v(&[0.0, 0.0]), &DiffConfig::default()),
            Err(GeometryError::NotAnImmersion { .. })
        ));
    }

    #[test]
    fn composition_multiplies_dilatations() {
        // inverse stereographic scaling composed with a Euclidean scaling
        let cfg = DiffConfig::default();
        let s = Arc::new(stereo_chart(2, 1.0));
        let e = Arc::new(euclidean(2));
        let a = SmoothMap::new(e.clone(), e.clone(), VectorMap::linear(DMatrix::identity(2, 2) * 0.5)).unwrap();
        let b = SmoothMap::new(e, s, VectorMap::identity(2)).unwrap();
        let x = v(&[0.4, -0.2]);
        let la = dilatation_at(&a, &x, &cfg).unwrap().lambda;
        let lb = dilatation_at(&b, &a.value(&x).unwrap(), &cfg).unwrap().lambda;
        let lab = dilatation_at(&a.compose(&b).unwrap(), &x, &cfg).unwrap().lambda;
        assert!((lab - la * lb).abs() < 1e-13);
    }

    #[test]
    fn veronese_is_isometric() {
        let cfg = DiffConfig::default();
        let phi = veronese_map();
        let e = dilatation_at(&phi, &v(&[0.3, -0.5]), &cfg).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn values_outside_domain_fail() {
        let phi = veronese_map();
        assert!(matches!(phi.value(&v(&[1.2, 0.0])), Err(GeometryError::OutsideDomain { .. })));
    }
}
