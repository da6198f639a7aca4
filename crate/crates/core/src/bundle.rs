//! The tangent bundle `TM` of a charted manifold: points `(x, Z)`, tangent
//! vectors stored as raw chart velocities `(ẋ, Ż)`, the connection map, the
//! horizontal/vertical splitting and the `(p, q, α)` metrics
//!
//! ```text
//! h(A, B) = g(π_*A, π_*B) + ω_α(Z)^p (g(KA, KB) + q g(KA, Z) g(KB, Z)),
//! ω_α(Z) = 1 / (1 + α g(Z, Z)).
//! ```

use nalgebra::{DMatrix, DVector};

use crate::diff::DiffConfig;
use crate::error::{GeometryError, Result};
use crate::manifold::{christoffel_at, inner, metric_at, Christoffel, ManifoldModel, ScalarField};

/// A point of `TM`: a chart point `x` and a tangent vector `Z` at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
}

impl BundlePoint {
    pub fn new(x: DVector<f64>, z: DVector<f64>) -> Self {
        Self { x, z }
    }

    pub fn zero_section(x: DVector<f64>) -> Self {
        let z = DVector::zeros(x.len());
        Self { x, z }
    }

    fn check(&self, m: &ManifoldModel) -> Result<()> {
        m.check_point(&self.x)?;
        m.check_vector(&self.z)
    }
}

/// A tangent vector to `TM` at `base`, in raw chart velocities: `xdot = π_*A`
/// and `zdot` the coordinate velocity of the fibre component.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    pub base: BundlePoint,
    pub xdot: DVector<f64>,
    pub zdot: DVector<f64>,
}

impl BundleTangent {
    pub fn new(base: BundlePoint, xdot: DVector<f64>, zdot: DVector<f64>) -> Self {
        Self { base, xdot, zdot }
    }

    pub fn zero(base: BundlePoint) -> Self {
        let n = base.x.len();
        Self {
            base,
            xdot: DVector::zeros(n),
            zdot: DVector::zeros(n),
        }
    }

    /// The vertical lift `X^v_Z`: the velocity of `t ↦ Z + tX`.
    pub fn vertical_lift(base: BundlePoint, x: DVector<f64>) -> Self {
        let n = base.x.len();
        Self {
            base,
            xdot: DVector::zeros(n),
            zdot: x,
        }
    }

    /// Linear combination `a·self + b·other`; both must share a base point.
    pub fn combine(&self, a: f64, other: &BundleTangent, b: f64) -> Result<BundleTangent> {
        if self.base != other.base {
            return Err(GeometryError::MismatchedBase);
        }
        Ok(BundleTangent {
            base: self.base.clone(),
            xdot: &self.xdot * a + &other.xdot * b,
            zdot: &self.zdot * a + &other.zdot * b,
        })
    }

    /// Raw coordinates `(ẋ, Ż)` stacked into one vector.
    pub fn coordinates(&self) -> DVector<f64> {
        let n = self.xdot.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.xdot[i] } else { self.zdot[i - n] })
    }

    fn check(&self, m: &ManifoldModel) -> Result<()> {
        self.base.check(m)?;
        m.check_vector(&self.xdot)?;
        m.check_vector(&self.zdot)
    }
}

/// Parameters `(p, q, α)` of a generalized Cheeger-Gromoll metric. Each is a
/// function on the base manifold.
#[derive(Debug, Clone)]
pub struct CGParams {
    pub p: ScalarField,
    pub q: ScalarField,
    pub alpha: ScalarField,
}

/// `(p, q, α)` evaluated at one base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl CGParams {
    pub fn new(p: ScalarField, q: ScalarField, alpha: ScalarField) -> Self {
        Self { p, q, alpha }
    }

    pub fn constant(p: f64, q: f64, alpha: f64) -> Self {
        Self::new(ScalarField::constant(p), ScalarField::constant(q), ScalarField::constant(alpha))
    }

    /// `h_{0,0,1}`.
    pub fn sasaki() -> Self {
        Self::constant(0.0, 0.0, 1.0)
    }

    /// `h_{1,1,1}`.
    pub fn cheeger_gromoll() -> Self {
        Self::constant(1.0, 1.0, 1.0)
    }

    /// Evaluate at `x`, checking `q ≥ 0` and `α > 0`.
    pub fn at(&self, x: &DVector<f64>) -> Result<LocalParams> {
        let local = LocalParams {
            p: self.p.value(x),
            q: self.q.value(x),
            alpha: self.alpha.value(x),
        };
        if !(local.q >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!("q must be non-negative, got {}", local.q)));
        }
        if !(local.alpha > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "alpha must be positive, got {}",
                local.alpha
            )));
        }
        if !local.p.is_finite() {
            return Err(GeometryError::InvalidParameter(format!("p must be finite, got {}", local.p)));
        }
        Ok(local)
    }
}

impl LocalParams {
    /// `ω_α(Z)^p` for a fibre vector of squared length `z2`.
    pub fn fibre_weight(&self, z2: f64) -> f64 {
        (1.0 + self.alpha * z2).powf(-self.p)
    }
}

fn connection_with(gamma: &Christoffel, a: &BundleTangent) -> DVector<f64> {
    &a.zdot + gamma.contract(&a.xdot, &a.base.z)
}

/// The connection map `K(A) = Ż + Γ_x(ẋ, Z)`.
pub fn connection_map(m: &ManifoldModel, a: &BundleTangent, cfg: &DiffConfig) -> Result<DVector<f64>> {
    a.check(m)?;
    let gamma = christoffel_at(m, &a.base.x, cfg)?;
    Ok(connection_with(&gamma, a))
}

/// The horizontal lift of `v` to `at`: `π_* = v`, `K = 0`.
pub fn horizontal_lift(m: &ManifoldModel, at: &BundlePoint, v: &DVector<f64>, cfg: &DiffConfig) -> Result<BundleTangent> {
    at.check(m)?;
    m.check_vector(v)?;
    let gamma = christoffel_at(m, &at.x, cfg)?;
    Ok(BundleTangent {
        base: at.clone(),
        xdot: v.clone(),
        zdot: -gamma.contract(v, &at.z),
    })
}

pub fn vertical_lift(at: &BundlePoint, x: &DVector<f64>) -> BundleTangent {
    BundleTangent::vertical_lift(at.clone(), x.clone())
}

/// Split `A` into its horizontal part and the vertical lift of `K(A)`.
pub fn hv_decompose(m: &ManifoldModel, a: &BundleTangent, cfg: &DiffConfig) -> Result<(BundleTangent, BundleTangent)> {
    a.check(m)?;
    let gamma = christoffel_at(m, &a.base.x, cfg)?;
    let k = connection_with(&gamma, a);
    let horizontal = BundleTangent {
        base: a.base.clone(),
        xdot: a.xdot.clone(),
        zdot: -gamma.contract(&a.xdot, &a.base.z),
    };
    Ok((horizontal, BundleTangent::vertical_lift(a.base.clone(), k)))
}

/// `h_{p,q,α}(A, B)`.
pub fn cg_metric_eval(
    m: &ManifoldModel,
    params: &CGParams,
    a: &BundleTangent,
    b: &BundleTangent,
    cfg: &DiffConfig,
) -> Result<f64> {
    if a.base != b.base {
        return Err(GeometryError::MismatchedBase);
    }
    a.check(m)?;
    b.check(m)?;
    let x = &a.base.x;
    let z = &a.base.z;
    let g = metric_at(m, x)?;
    let gamma = christoffel_at(m, x, cfg)?;
    let local = params.at(x)?;
    let ka = connection_with(&gamma, a);
    let kb = connection_with(&gamma, b);
    let weight = local.fibre_weight(inner(&g, z, z));
    Ok(inner(&g, &a.xdot, &b.xdot)
        + weight * (inner(&g, &ka, &kb) + local.q * inner(&g, &ka, z) * inner(&g, &kb, z)))
}

/// Matrix of `h_{p,q,α}` in the frame (horizontal lifts of `∂ᵢ`, vertical
/// lifts of `∂ᵢ`): `g ⊕ ω_α^p (g + q (gZ)(gZ)ᵀ)`.
pub fn cg_metric_matrix(m: &ManifoldModel, params: &CGParams, at: &BundlePoint) -> Result<DMatrix<f64>> {
    at.check(m)?;
    let n = m.dim();
    let g = metric_at(m, &at.x)?;
    let local = params.at(&at.x)?;
    let gz = &g * &at.z;
    let weight = local.fibre_weight(gz.dot(&at.z));
    let vertical = (&g + &gz * gz.transpose() * local.q) * weight;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&g);
    out.view_mut((n, n), (n, n)).copy_from(&vertical);
    Ok(out)
}

/// Matrix of `h_{p,q,α}` acting on raw chart velocities `(ẋ, Ż)`, so that
/// `h(A, B) = a_rawᵀ H b_raw`.
pub fn cg_metric_matrix_coordinates(
    m: &ManifoldModel,
    params: &CGParams,
    at: &BundlePoint,
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    let framed = cg_metric_matrix(m, params, at)?;
    let gamma = christoffel_at(m, &at.x, cfg)?;
    let n = m.dim();
    // (ẋ, Ż) ↦ (ẋ, Ż + Γ(ẋ, Z))
    let mut t = DMatrix::identity(2 * n, 2 * n);
    for k in 0..n {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += gamma.get(k, i, j) * at.z[j];
            }
            t[(n + k, i)] = s;
        }
    }
    Ok(t.transpose() * framed * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{euclidean, stereo_chart};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn vertical_lift_maps_to_itself() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let at = BundlePoint::new(v(&[0.3, -0.4]), v(&[1.0, 2.0]));
        let x = v(&[0.5, -0.25]);
        let k = connection_map(&s, &vertical_lift(&at, &x), &cfg).unwrap();
        assert_eq!(k, x);
    }

    #[test]
    fn euclidean_connection_is_fibre_velocity() {
        let e = euclidean(3);
        let cfg = DiffConfig::default();
        let a = BundleTangent::new(
            BundlePoint::new(v(&[1.0, 2.0, 3.0]), v(&[0.1, 0.2, 0.3])),
            v(&[1.0, 1.0, 0.0]),
            v(&[0.0, -1.0, 4.0]),
        );
        assert_eq!(connection_map(&e, &a, &cfg).unwrap(), a.zdot);
        let h = horizontal_lift(&e, &a.base, &v(&[1.0, 0.0, 2.0]), &cfg).unwrap();
        assert_eq!(h.zdot, v(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn horizontal_lift_has_no_connection_part() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let at = BundlePoint::new(v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        let e1 = v(&[1.0, 0.0]);
        let h = horizontal_lift(&s, &at, &e1, &cfg).unwrap();
        assert_eq!(h.xdot, e1);
        assert!(connection_map(&s, &h, &cfg).unwrap().amax() < 1e-15);
        // Γ(e₁, e₂) at (1, 0): Γ¹₁₂ = ∂₂u = 0, Γ²₁₂ = ∂₁u = −1
        assert!((h.zdot - v(&[0.0, 1.0])).amax() < 1e-15);
    }

    #[test]
    fn decomposition_of_pure_parts() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let at = BundlePoint::new(v(&[0.2, 0.1]), v(&[0.7, -0.3]));
        let h = horizontal_lift(&s, &at, &v(&[1.0, 0.5]), &cfg).unwrap();
        let (hh, hv) = hv_decompose(&s, &h, &cfg).unwrap();
        assert_eq!(hh, h);
        assert!(hv.zdot.amax() < 1e-15);
        let vl = vertical_lift(&at, &v(&[0.3, 0.3]));
        let (vh, vv) = hv_decompose(&s, &vl, &cfg).unwrap();
        assert_eq!(vh.xdot, v(&[0.0, 0.0]));
        assert_eq!(vh.zdot, v(&[0.0, 0.0]));
        assert_eq!(vv, vl);
    }

    #[test]
    fn sasaki_on_vertical_lifts_is_base_metric() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let at = BundlePoint::new(v(&[0.2, 0.1]), v(&[0.7, -0.3]));
        let (x, y) = (v(&[1.0, 0.5]), v(&[-0.2, 0.9]));
        let h = cg_metric_eval(&s, &CGParams::sasaki(), &vertical_lift(&at, &x), &vertical_lift(&at, &y), &cfg).unwrap();
        let g = s.inner(&at.x, &x, &y).unwrap();
        assert!((h - g).abs() < 1e-15);
    }

    #[test]
    fn cheeger_gromoll_on_position_vector() {
        // |Z|² = 3 on the Euclidean plane
        let e = euclidean(2);
        let cfg = DiffConfig::default();
        let z = v(&[1.0, 2f64.sqrt()]);
        let at = BundlePoint::new(v(&[0.0, 0.0]), z.clone());
        let zv = vertical_lift(&at, &z);
        let h = cg_metric_eval(&e, &CGParams::cheeger_gromoll(), &zv, &zv, &cfg).unwrap();
        assert!((h - 3.0).abs() < 1e-14);
    }

    #[test]
    fn horizontal_vectors_see_only_base_metric() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let at = BundlePoint::new(v(&[0.2, 0.1]), v(&[0.7, -0.3]));
        let w = v(&[0.4, 1.1]);
        let h = horizontal_lift(&s, &at, &w, &cfg).unwrap();
        for params in [CGParams::sasaki(), CGParams::cheeger_gromoll(), CGParams::constant(2.5, 0.7, 3.0)] {
            let val = cg_metric_eval(&s, &params, &h, &h, &cfg).unwrap();
            assert!((val - s.inner(&at.x, &w, &w).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let e = euclidean(2);
        let cfg = DiffConfig::default();
        let a = BundleTangent::zero(BundlePoint::zero_section(v(&[0.0, 0.0])));
        let b = BundleTangent::zero(BundlePoint::zero_section(v(&[1.0, 0.0])));
        assert_eq!(
            cg_metric_eval(&e, &CGParams::sasaki(), &a, &b, &cfg),
            Err(GeometryError::MismatchedBase)
        );
        assert!(a.combine(1.0, &b, 1.0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let e = euclidean(2);
        let at = BundlePoint::zero_section(v(&[0.0, 0.0]));
        assert!(cg_metric_matrix(&e, &CGParams::constant(1.0, -1.0, 1.0), &at).is_err());
        assert!(cg_metric_matrix(&e, &CGParams::constant(1.0, 1.0, 0.0), &at).is_err());
        assert!(cg_metric_matrix(&e, &CGParams::constant(1.0, 0.0, 1.0), &at).is_ok());
    }

    #[test]
    fn zero_section_gives_doubled_base_metric() {
        let s = stereo_chart(2, 1.0);
        let at = BundlePoint::zero_section(v(&[0.5, 0.5]));
        let g = metric_at(&s, &at.x).unwrap();
        for params in [CGParams::sasaki(), CGParams::cheeger_gromoll(), CGParams::constant(-1.5, 4.0, 0.3)] {
            let h = cg_metric_matrix(&s, &params, &at).unwrap();
            assert_eq!(h.view((0, 0), (2, 2)), g.view((0, 0), (2, 2)));
            assert!((h.view((2, 2), (2, 2)) - &g).amax() < 1e-15);
            assert_eq!(h.view((0, 2), (2, 2)).amax(), 0.0);
        }
    }

    #[test]
    fn coordinate_matrix_agrees_with_pointwise_formula() {
        let s = stereo_chart(2, 1.0);
        let cfg = DiffConfig::default();
        let params = CGParams::constant(1.0, 2.0, 0.5);
        let at = BundlePoint::new(v(&[0.2, -0.6]), v(&[1.3, 0.4]));
        let hm = cg_metric_matrix_coordinates(&s, &params, &at, &cfg).unwrap();
        let a = BundleTangent::new(at.clone(), v(&[0.1, 0.9]), v(&[-1.0, 0.3]));
        let b = BundleTangent::new(at.clone(), v(&[0.5, -0.2]), v(&[0.7, 0.7]));
        let direct = cg_metric_eval(&s, &params, &a, &b, &cfg).unwrap();
        let via = (hm * b.coordinates()).dot(&a.coordinates());
        assert!((direct - via).abs() < 1e-13);
    }
}
