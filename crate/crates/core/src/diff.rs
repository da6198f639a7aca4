//! Differentiation engine.
//!
//! Two independent routes are provided for every derivative the library
//! needs: central finite differences (optionally with one level of
//! Richardson extrapolation) and exact forward-mode derivatives through
//! hyper-dual numbers. Charts and maps that can be written generically over
//! [`num_dual::DualNum`] get the exact route as their "analytic" oracle; the
//! finite-difference route is always available as a cross-check.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_dual::HyperDual64;

use crate::error::{GeometryError, Result};

/// Step sizes and tolerances for numerical differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    /// Relative step for first derivatives; the absolute step is
    /// `step * max(1, |x|)`.
    pub step: f64,
    /// Relative step for derivatives of already-differentiated quantities
    /// (mixed second derivatives, derivatives of finite-difference
    /// Christoffel symbols).
    pub second_step: f64,
    pub richardson: bool,
    pub tol_derivative: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            step: f64::EPSILON.cbrt(),
            second_step: f64::EPSILON.powf(0.25),
            richardson: false,
            tol_derivative: 1e-6,
        }
    }
}

impl DiffConfig {
    pub fn new(step: f64, richardson: bool, tol_derivative: f64) -> Result<Self> {
        let cfg = Self {
            step,
            richardson,
            tol_derivative,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_richardson(mut self, on: bool) -> Self {
        self.richardson = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "differentiation step must be positive, got {}",
                self.step
            )));
        }
        if !(self.second_step > 0.0 && self.second_step.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "second differentiation step must be positive, got {}",
                self.second_step
            )));
        }
        if !(self.tol_derivative > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "derivative tolerance must be positive, got {}",
                self.tol_derivative
            )));
        }
        Ok(())
    }

    /// Absolute first-derivative step at `x`.
    pub fn step_at(&self, x: &DVector<f64>) -> f64 {
        self.step * x.amax().max(1.0)
    }

    /// Absolute step for nested or mixed second derivatives at `x`.
    pub fn second_step_at(&self, x: &DVector<f64>) -> f64 {
        self.second_step * x.amax().max(1.0)
    }
}

/// Central difference of a vector-valued function of one real variable at 0.
pub fn central_difference<F>(f: F, h: f64, richardson: bool) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    if richardson {
        let coarse = d(h);
        let fine = d(0.5 * h);
        (fine * 4.0 - coarse) / 3.0
    } else {
        d(h)
    }
}

/// Mixed second difference `D²f(x)(u, v)` with the symmetric four-point stencil.
///
/// The stencil is invariant under swapping `u` and `v`, so the estimate is
/// symmetric up to the rounding of the final sum.
pub fn mixed_second_difference<F>(
    f: F,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let pp = f(&(x + (u + v) * h));
    let mm = f(&(x - (u + v) * h));
    let pm = f(&(x + (u - v) * h));
    let mp = f(&(x - (u - v) * h));
    ((pp + mm) - (pm + mp)) / (4.0 * h * h)
}

pub type EvalFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type SecondFn = dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync;
/// A map written over hyper-dual numbers.
pub type DualFn = dyn Fn(&[HyperDual64]) -> Vec<HyperDual64> + Send + Sync;

/// A smooth map `ℝⁿ → ℝᵐ` between coordinate spaces, with optional exact
/// first- and second-derivative oracles.
#[derive(Clone)]
pub struct VectorMap {
    in_dim: usize,
    out_dim: usize,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacobianFn>>,
    second: Option<Arc<SecondFn>>,
}

impl fmt::Debug for VectorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("jacobian_oracle", &self.jacobian.is_some())
            .field("second_oracle", &self.second.is_some())
            .finish()
    }
}

fn seed(x: &DVector<f64>, u: Option<&DVector<f64>>, v: Option<&DVector<f64>>) -> Vec<HyperDual64> {
    (0..x.len())
        .map(|i| {
            HyperDual64::new(
                x[i],
                u.map_or(0.0, |u| u[i]),
                v.map_or(0.0, |v| v[i]),
                0.0,
            )
        })
        .collect()
}

impl VectorMap {
    /// A map known only through its values; derivatives use finite differences.
    pub fn new<F>(in_dim: usize, out_dim: usize, eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            in_dim,
            out_dim,
            eval: Arc::new(eval),
            jacobian: None,
            second: None,
        }
    }

    pub fn with_jacobian<F>(mut self, jac: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Oracle for `D²f(x)(u, v)`.
    pub fn with_second_derivative<F>(mut self, second: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(second));
        self
    }

    /// Build a map from a hyper-dual implementation. Values, Jacobians and
    /// second derivatives are all exact to rounding.
    pub fn from_dual<F>(in_dim: usize, out_dim: usize, f: F) -> Self
    where
        F: Fn(&[HyperDual64]) -> Vec<HyperDual64> + Send + Sync + 'static,
    {
        let f: Arc<DualFn> = Arc::new(f);
        let fe = Arc::clone(&f);
        let fj = Arc::clone(&f);
        let fs = Arc::clone(&f);
        Self {
            in_dim,
            out_dim,
            eval: Arc::new(move |x| {
                DVector::from_iterator(out_dim, fe(&seed(x, None, None)).iter().map(|d| d.re))
            }),
            jacobian: Some(Arc::new(move |x| {
                let mut jac = DMatrix::zeros(out_dim, in_dim);
                for j in 0..in_dim {
                    let e = DVector::from_fn(in_dim, |i, _| if i == j { 1.0 } else { 0.0 });
                    for (i, d) in fj(&seed(x, Some(&e), None)).iter().enumerate() {
                        jac[(i, j)] = d.eps1;
                    }
                }
                jac
            })),
            second: Some(Arc::new(move |x, u, v| {
                DVector::from_iterator(
                    out_dim,
                    fs(&seed(x, Some(u), Some(v))).iter().map(|d| d.eps1eps2),
                )
            })),
        }
    }

    /// Linear map `x ↦ L x`.
    pub fn linear(l: DMatrix<f64>) -> Self {
        let (out_dim, in_dim) = l.shape();
        let le = l.clone();
        let lj = l;
        Self::new(in_dim, out_dim, move |x| &le * x)
            .with_jacobian(move |_| lj.clone())
            .with_second_derivative(move |_, _, _| DVector::zeros(out_dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::linear(DMatrix::identity(dim, dim))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn has_jacobian_oracle(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn has_second_oracle(&self) -> bool {
        self.second.is_some()
    }

    /// Drop the derivative oracles, forcing finite differences.
    pub fn without_oracles(&self) -> Self {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            eval: Arc::clone(&self.eval),
            jacobian: None,
            second: None,
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    pub fn jacobian(&self, x: &DVector<f64>, cfg: &DiffConfig) -> DMatrix<f64> {
        if let Some(jac) = &self.jacobian {
            return jac(x);
        }
        self.jacobian_fd(x, cfg)
    }

    /// Finite-difference Jacobian, ignoring any oracle.
    pub fn jacobian_fd(&self, x: &DVector<f64>, cfg: &DiffConfig) -> DMatrix<f64> {
        let h = cfg.step_at(x);
        let mut jac = DMatrix::zeros(self.out_dim, self.in_dim);
        for j in 0..self.in_dim {
            let col = central_difference(
                |s| {
                    let mut y = x.clone();
                    y[j] += s;
                    self.value(&y)
                },
                h,
                cfg.richardson,
            );
            jac.set_column(j, &col);
        }
        jac
    }

    /// `D²f(x)(u, v)`.
    pub fn second_derivative(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
        cfg: &DiffConfig,
    ) -> DVector<f64> {
        if let Some(second) = &self.second {
            return second(x, u, v);
        }
        self.second_derivative_fd(x, u, v, cfg)
    }

    pub fn second_derivative_fd(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
        cfg: &DiffConfig,
    ) -> DVector<f64> {
        let h = cfg.second_step_at(x);
        if cfg.richardson {
            let coarse = mixed_second_difference(|y| self.value(y), x, u, v, h);
            let fine = mixed_second_difference(|y| self.value(y), x, u, v, 0.5 * h);
            (fine * 4.0 - coarse) / 3.0
        } else {
            mixed_second_difference(|y| self.value(y), x, u, v, h)
        }
    }

    /// `self` followed by `next`. Oracles are chained when both sides have them.
    pub fn then(&self, next: &VectorMap) -> Result<VectorMap> {
        if self.out_dim != next.in_dim {
            return Err(GeometryError::DimensionMismatch {
                expected: next.in_dim,
                found: self.out_dim,
            });
        }
        let (a, b) = (self.clone(), next.clone());
        let mut out = VectorMap::new(self.in_dim, next.out_dim, move |x| b.value(&a.value(x)));
        if self.jacobian.is_some() && next.jacobian.is_some() {
            let (a, b) = (self.clone(), next.clone());
            let cfg = DiffConfig::default();
            out = out.with_jacobian(move |x| b.jacobian(&a.value(x), &cfg) * a.jacobian(x, &cfg));
            if self.second.is_some() && next.second.is_some() {
                let (a, b) = (self.clone(), next.clone());
                out = out.with_second_derivative(move |x, u, v| {
                    let y = a.value(x);
                    let ja = a.jacobian(x, &cfg);
                    let jb = b.jacobian(&y, &cfg);
                    b.second_derivative(&y, &(&ja * u), &(&ja * v), &cfg)
                        + jb * a.second_derivative(x, u, v, &cfg)
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_dual::DualNum;

    fn cubic() -> VectorMap {
        // (x, y) ↦ (x²y, sin x + y³)
        VectorMap::from_dual(2, 2, |x| vec![x[0] * x[0] * x[1], x[0].sin() + x[1].powi(3)])
    }

    #[test]
    fn dual_jacobian_matches_hand_derivative() {
        let f = cubic();
        let x = DVector::from_vec(vec![0.7, -1.3]);
        let j = f.jacobian(&x, &DiffConfig::default());
        let expected = DMatrix::from_row_slice(2, 2, &[2.0 * 0.7 * -1.3, 0.49, 0.7f64.cos(), 3.0 * 1.69]);
        assert!((j - expected).amax() < 1e-14);
    }

    #[test]
    fn dual_second_derivative_matches_hand_derivative() {
        let f = cubic();
        let x = DVector::from_vec(vec![0.7, -1.3]);
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        let cfg = DiffConfig::default();
        let d00 = f.second_derivative(&x, &e0, &e0, &cfg);
        let d01 = f.second_derivative(&x, &e0, &e1, &cfg);
        let d11 = f.second_derivative(&x, &e1, &e1, &cfg);
        assert!((d00[0] - 2.0 * -1.3).abs() < 1e-14);
        assert!((d00[1] + 0.7f64.sin()).abs() < 1e-14);
        assert!((d01[0] - 1.4).abs() < 1e-14);
        assert!(d01[1].abs() < 1e-14);
        assert!((d11[1] - 6.0 * -1.3).abs() < 1e-13);
    }

    #[test]
    fn finite_differences_agree_with_dual_route() {
        let f = cubic();
        let x = DVector::from_vec(vec![0.3, 0.4]);
        let cfg = DiffConfig::default();
        assert!((f.jacobian(&x, &cfg) - f.jacobian_fd(&x, &cfg)).amax() < 1e-9);
        let rich = cfg.with_richardson(true);
        assert!((f.jacobian(&x, &cfg) - f.jacobian_fd(&x, &rich)).amax() < 1e-10);
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let v = DVector::from_vec(vec![-0.5, 1.0]);
        let exact = f.second_derivative(&x, &u, &v, &cfg);
        assert!((exact.clone() - f.second_derivative_fd(&x, &u, &v, &cfg)).amax() < 1e-6);
        assert!((exact - f.second_derivative_fd(&x, &u, &v, &rich)).amax() < 1e-7);
    }

    #[test]
    fn mixed_stencil_is_symmetric() {
        let f = cubic().without_oracles();
        let x = DVector::from_vec(vec![0.3, 0.4]);
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let v = DVector::from_vec(vec![-0.5, 1.0]);
        let cfg = DiffConfig::default();
        let uv = f.second_derivative(&x, &u, &v, &cfg);
        let vu = f.second_derivative(&x, &v, &u, &cfg);
        assert!((uv - vu).amax() < 1e-12);
    }

    #[test]
    fn composition_chains_oracles() {
        let f = cubic();
        let g = VectorMap::linear(DMatrix::from_row_slice(1, 2, &[2.0, -1.0]));
        let h = f.then(&g).unwrap();
        assert!(h.has_jacobian_oracle() && h.has_second_oracle());
        let x = DVector::from_vec(vec![0.3, 0.4]);
        let cfg = DiffConfig::default();
        assert!((h.jacobian(&x, &cfg) - h.without_oracles().jacobian(&x, &cfg)).amax() < 1e-9);
        let u = DVector::from_vec(vec![1.0, 0.5]);
        let exact = h.second_derivative(&x, &u, &u, &cfg);
        let fd = h.without_oracles().second_derivative(&x, &u, &u, &cfg);
        assert!((exact - fd).amax() < 1e-6);
        assert!(f.then(&VectorMap::identity(3)).is_err());
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(DiffConfig::new(0.0, false, 1e-6).is_err());
        assert!(DiffConfig::new(1e-5, false, -1.0).is_err());
        assert!(DiffConfig::new(1e-5, true, 1e-6).is_ok());
    }
}
