//! Charted Riemannian manifolds and the intrinsic quantities built on them:
//! metric, Levi-Civita Christoffel symbols, gradients, sectional curvature
//! and the tensor relating the connections of conformally related metrics.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::diff::{central_difference, DiffConfig, VectorMap};
use crate::error::{GeometryError, Result};

pub type MetricFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type ChristoffelFn = dyn Fn(&DVector<f64>) -> Christoffel + Send + Sync;
pub type DomainFn = dyn Fn(&DVector<f64>) -> bool + Send + Sync;

/// Christoffel symbols `Γᵏᵢⱼ` of a connection at one point, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    /// `Γᵏᵢⱼ`.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    /// Sets `Γᵏᵢⱼ` and `Γᵏⱼᵢ` together.
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        let a = self.idx(k, i, j);
        let b = self.idx(k, j, i);
        self.data[a] = value;
        self.data[b] = value;
    }

    /// The vector `Γ(a, b)ᵏ = Γᵏᵢⱼ aⁱ bʲ`.
    pub fn contract(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(k, i, j) * a[i] * b[j];
                }
            }
            s
        })
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        crate::max_or_nan(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        crate::max_or_nan(self.data.iter().map(|v| v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim;
        (0..n).all(|k| (0..n).all(|i| (0..n).all(|j| self.get(k, i, j) == self.get(k, j, i))))
    }

    fn central(plus: &Christoffel, minus: &Christoffel, h: f64) -> Christoffel {
        Christoffel {
            dim: plus.dim,
            data: plus
                .data
                .iter()
                .zip(&minus.data)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect(),
        }
    }

    fn richardson(coarse: &Christoffel, fine: &Christoffel) -> Christoffel {
        Christoffel {
            dim: coarse.dim,
            data: coarse
                .data
                .iter()
                .zip(&fine.data)
                .map(|(c, f)| (4.0 * f - c) / 3.0)
                .collect(),
        }
    }
}

/// A real function on a chart, optionally with an exact gradient (the
/// coordinate differential `∂f/∂xⁱ`).
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>,
    differential: Option<Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>>,
    constant: Option<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant {
            Some(c) => write!(f, "ScalarField::constant({c})"),
            None => write!(f, "ScalarField {{ oracle: {} }}", self.differential.is_some()),
        }
    }
}

impl ScalarField {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            differential: None,
            constant: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            eval: Arc::new(move |_| c),
            differential: Some(Arc::new(|x: &DVector<f64>| DVector::zeros(x.len()))),
            constant: Some(c),
        }
    }

    /// Attach the coordinate differential `x ↦ (∂f/∂x¹, …, ∂f/∂xⁿ)`.
    pub fn with_differential<F>(mut self, df: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.differential = Some(Arc::new(df));
        self
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.eval)(x)
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    /// Coordinate differential of the field, exact when an oracle is attached.
    pub fn differential(&self, x: &DVector<f64>, cfg: &DiffConfig) -> DVector<f64> {
        if let Some(df) = &self.differential {
            return df(x);
        }
        let h = cfg.step_at(x);
        DVector::from_fn(x.len(), |i, _| {
            central_difference(
                |s| {
                    let mut y = x.clone();
                    y[i] += s;
                    DVector::from_element(1, self.value(&y))
                },
                h,
                cfg.richardson,
            )[0]
        })
    }
}

/// A Riemannian manifold given on a single chart.
#[derive(Clone)]
pub struct ManifoldModel {
    name: String,
    dim: usize,
    metric: Arc<MetricFn>,
    christoffel: Option<Arc<ChristoffelFn>>,
    embedding: Option<VectorMap>,
    domain: Arc<DomainFn>,
}

impl fmt::Debug for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("christoffel_oracle", &self.christoffel.is_some())
            .field("embedding", &self.embedding.as_ref().map(VectorMap::out_dim))
            .finish()
    }
}

impl ManifoldModel {
    pub fn new<F>(name: impl Into<String>, dim: usize, metric: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            metric: Arc::new(metric),
            christoffel: None,
            embedding: None,
            domain: Arc::new(|x: &DVector<f64>| x.iter().all(|v| v.is_finite())),
        }
    }

    /// The metric induced on a chart by an immersion into Euclidean space.
    ///
    /// When the map carries a second-derivative oracle, the Christoffel
    /// symbols come from `Γ_{l,ij} = ⟨∂_l F, ∂_i ∂_j F⟩`, a route independent
    /// of differentiating the metric.
    pub fn induced(name: impl Into<String>, embedding: VectorMap) -> Self {
        let dim = embedding.in_dim();
        let cfg = DiffConfig::default();
        let em = embedding.clone();
        let mut model = Self::new(name, dim, move |x| {
            let j = em.jacobian(x, &cfg);
            j.transpose() * j
        });
        if embedding.has_jacobian_oracle() && embedding.has_second_oracle() {
            let em = embedding.clone();
            model = model.with_christoffel(move |x| {
                let j = em.jacobian(x, &cfg);
                let g = j.transpose() * &j;
                // a singular pullback means the map is not an immersion here; NaNs propagate
                let ginv = g.try_inverse().unwrap_or_else(|| DMatrix::from_element(dim, dim, f64::NAN));
                let mut first_kind = vec![DVector::zeros(dim); dim * dim];
                for i in 0..dim {
                    for k in i..dim {
                        let ei = unit(dim, i);
                        let ek = unit(dim, k);
                        let dd = em.second_derivative(x, &ei, &ek, &cfg);
                        first_kind[i * dim + k] = j.transpose() * dd;
                    }
                }
                let mut gamma = Christoffel::zeros(dim);
                for i in 0..dim {
                    for k in i..dim {
                        let lowered = &first_kind[i * dim + k];
                        let raised = &ginv * lowered;
                        for m in 0..dim {
                            gamma.set(m, i, k, raised[m]);
                        }
                    }
                }
                gamma
            });
        }
        model.with_embedding(embedding)
    }

    pub fn with_christoffel<F>(mut self, oracle: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Christoffel + Send + Sync + 'static,
    {
        self.christoffel = Some(Arc::new(oracle));
        self
    }

    pub fn with_embedding(mut self, embedding: VectorMap) -> Self {
        self.embedding = Some(embedding);
        self
    }

    pub fn with_domain<F>(mut self, domain: F) -> Self
    where
        F: Fn(&DVector<f64>) -> bool + Send + Sync + 'static,
    {
        self.domain = Arc::new(domain);
        self
    }

    /// Same model with the Christoffel oracle removed, so every connection
    /// quantity is computed from finite differences of the metric.
    pub fn without_christoffel_oracle(&self) -> Self {
        let mut m = self.clone();
        m.christoffel = None;
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_christoffel_oracle(&self) -> bool {
        self.christoffel.is_some()
    }

    pub fn embedding(&self) -> Option<&VectorMap> {
        self.embedding.as_ref()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && (self.domain)(x)
    }

    pub fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !(self.domain)(x) {
            return Err(GeometryError::OutsideDomain {
                point: x.iter().copied().collect(),
            });
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Metric matrix without any domain check.
    pub(crate) fn metric_raw(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.metric)(x)
    }

    /// `g(a, b)` at `x`.
    pub fn inner(&self, x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        Ok(inner(&metric_at(self, x)?, a, b))
    }

    pub fn norm(&self, x: &DVector<f64>, a: &DVector<f64>) -> Result<f64> {
        Ok(self.inner(x, a, a)?.sqrt())
    }
}

pub(crate) fn unit(dim: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// `aᵀ G b`.
pub fn inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (g * b).dot(a)
}

/// Inverse of a metric matrix, rejecting near-singular or indefinite input.
pub fn metric_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let ratio = if max > 0.0 { min / max } else { min };
    if !(ratio > 1e-12) {
        return Err(GeometryError::IllConditioned { ratio });
    }
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(GeometryError::IllConditioned { ratio })
}

/// Matrix `Q` whose columns form a `g`-orthonormal basis, i.e. `Qᵀ G Q = I`.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    metric_inverse(g)?;
    let chol = g.clone().cholesky().ok_or(GeometryError::IllConditioned { ratio: 0.0 })?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(GeometryError::IllConditioned { ratio: 0.0 })?;
    Ok(linv.transpose())
}

/// Metric matrix at a chart point.
pub fn metric_at(m: &ManifoldModel, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    m.check_point(x)?;
    Ok(m.metric_raw(x))
}

/// Coordinate derivatives `∂ₘ g` of the metric, one matrix per coordinate.
pub fn metric_derivatives(m: &ManifoldModel, x: &DVector<f64>, cfg: &DiffConfig) -> Result<Vec<DMatrix<f64>>> {
    let n = m.dim();
    let h = cfg.step_at(x);
    for i in 0..n {
        for s in [-h, h] {
            let mut y = x.clone();
            y[i] += s;
            m.check_point(&y)?;
        }
    }
    Ok((0..n)
        .map(|i| {
            let flat = central_difference(
                |s| {
                    let mut y = x.clone();
                    y[i] += s;
                    let g = m.metric_raw(&y);
                    DVector::from_column_slice(g.as_slice())
                },
                h,
                cfg.richardson,
            );
            DMatrix::from_column_slice(n, n, flat.as_slice())
        })
        .collect())
}

/// Levi-Civita Christoffel symbols from finite differences of the metric,
/// ignoring any oracle the model carries.
pub fn christoffel_finite_difference(m: &ManifoldModel, x: &DVector<f64>, cfg: &DiffConfig) -> Result<Christoffel> {
    let g = metric_at(m, x)?;
    let ginv = metric_inverse(&g)?;
    let dg = metric_derivatives(m, x, cfg)?;
    let n = m.dim();
    let mut gamma = Christoffel::zeros(n);
    // first kind: Γ_{l,ij} = ½(∂ᵢ g_{jl} + ∂ⱼ g_{il} − ∂ₗ g_{ij})
    for i in 0..n {
        for j in i..n {
            let lowered = DVector::from_fn(n, |l, _| {
                0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])
            });
            let raised = &ginv * lowered;
            for k in 0..n {
                gamma.set(k, i, j, raised[k]);
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols at `x`, from the model's oracle when present.
pub fn christoffel_at(m: &ManifoldModel, x: &DVector<f64>, cfg: &DiffConfig) -> Result<Christoffel> {
    match &m.christoffel {
        Some(oracle) => {
            m.check_point(x)?;
            Ok(oracle(x))
        }
        None => christoffel_finite_difference(m, x, cfg),
    }
}

/// Riemannian gradient `g⁻¹ df`.
pub fn grad_scalar(m: &ManifoldModel, f: &ScalarField, x: &DVector<f64>, cfg: &DiffConfig) -> Result<DVector<f64>> {
    let g = metric_at(m, x)?;
    let df = f.differential(x, cfg);
    let ginv = metric_inverse(&g)?;
    Ok(ginv * df)
}

/// Directional derivative of the Christoffel symbols along `u`.
fn christoffel_derivative(m: &ManifoldModel, x: &DVector<f64>, u: &DVector<f64>, cfg: &DiffConfig) -> Result<Christoffel> {
    // nested differences need the coarser step when Γ itself is a difference quotient
    let h = if m.has_christoffel_oracle() {
        cfg.step_at(x)
    } else {
        cfg.second_step_at(x)
    };
    let at = |s: f64| christoffel_at(m, &(x + u * s), cfg);
    let coarse = Christoffel::central(&at(h)?, &at(-h)?, h);
    if cfg.richardson {
        let fine = Christoffel::central(&at(0.5 * h)?, &at(-0.5 * h)?, 0.5 * h);
        Ok(Christoffel::richardson(&coarse, &fine))
    } else {
        Ok(coarse)
    }
}

/// Sectional curvature of the plane spanned by `u` and `v`, with the sign
/// convention that round spheres of radius ρ have curvature `1/ρ²`.
pub fn sectional_curvature(
    m: &ManifoldModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    cfg: &DiffConfig,
) -> Result<f64> {
    m.check_vector(u)?;
    m.check_vector(v)?;
    let g = metric_at(m, x)?;
    let uu = inner(&g, u, u);
    let vv = inner(&g, v, v);
    let uv = inner(&g, u, v);
    let gram = uu * vv - uv * uv;
    let threshold = 1e-12 * uu * vv;
    if !(gram >= threshold) || gram <= 0.0 {
        return Err(GeometryError::DegeneratePlane { gram, threshold });
    }
    let gamma = christoffel_at(m, x, cfg)?;
    let du = christoffel_derivative(m, x, u, cfg)?;
    let dv = christoffel_derivative(m, x, v, cfg)?;
    // R(u,v)v = (∂ᵤΓ)(v,v) − (∂ᵥΓ)(u,v) + Γ(u, Γ(v,v)) − Γ(v, Γ(u,v))
    let r = du.contract(v, v) - dv.contract(u, v) + gamma.contract(u, &gamma.contract(v, v))
        - gamma.contract(v, &gamma.contract(u, v));
    Ok(inner(&g, &r, u) / gram)
}

/// The difference tensor between the Levi-Civita connections of `λg` and `g`:
/// `S(X,Y) = (1/2λ)((Xλ)Y + (Yλ)X − g(X,Y) grad λ)`.
pub fn s_tensor(
    m: &ManifoldModel,
    lambda: &ScalarField,
    x: &DVector<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    m.check_vector(a)?;
    m.check_vector(b)?;
    let value = lambda.value(x);
    if !(value > 0.0) {
        return Err(GeometryError::InvalidDilatation { value });
    }
    let g = metric_at(m, x)?;
    let dl = lambda.differential(x, cfg);
    let grad = metric_inverse(&g)? * &dl;
    let xa = dl.dot(a);
    let xb = dl.dot(b);
    let gab = 0.5 * (inner(&g, a, b) + inner(&g, b, a));
    Ok((b * xa + a * xb - grad * gab) / (2.0 * value))
}
