//! The bundle differential `Φ = φ_*: TM → TM′` and its interaction with
//! `(p, q, α)` metrics and connection maps.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::cases::closed_form_dilatation;
use super::sff::{sphere_sff_vector, Sphere};
use super::{dilatation_at, generalized_eigenvalues, SmoothMap};
use crate::bundle::{cg_metric_eval, cg_metric_matrix_coordinates, connection_map, horizontal_lift, BundlePoint, BundleTangent, CGParams};
use crate::diff::DiffConfig;
use crate::error::{GeometryError, Result};
use crate::manifold::{christoffel_at, inner, metric_at, metric_inverse, s_tensor, unit, ScalarField};
use crate::sampling::{random_bundle_tangent, sample_rng};

/// `Φ_*(x, Z, ẋ, Ż) = (φ(x), φ_*Z, φ_*ẋ, D²φ(ẋ, Z) + φ_*Ż)`.
pub fn bundle_differential(phi: &SmoothMap, a: &BundleTangent, cfg: &DiffConfig) -> Result<BundleTangent> {
    let x = &a.base.x;
    phi.source().check_vector(&a.base.z)?;
    phi.source().check_vector(&a.xdot)?;
    phi.source().check_vector(&a.zdot)?;
    let y = phi.value(x)?;
    let j = phi.jacobian(x, cfg)?;
    let hess = phi.second(x, &a.xdot, &a.base.z, cfg)?;
    Ok(BundleTangent::new(
        BundlePoint::new(y, &j * &a.base.z),
        &j * &a.xdot,
        hess + &j * &a.zdot,
    ))
}

/// Image base point and the matrix of `Φ_*` on raw velocities `(ẋ, Ż)`:
/// `[[J, 0], [D²φ(·, Z), J]]`.
pub fn bundle_pushforward_matrix(phi: &SmoothMap, at: &BundlePoint, cfg: &DiffConfig) -> Result<(BundlePoint, DMatrix<f64>)> {
    let (m, n) = (phi.source().dim(), phi.target().dim());
    phi.source().check_vector(&at.z)?;
    let y = phi.value(&at.x)?;
    let j = phi.jacobian(&at.x, cfg)?;
    let mut t = DMatrix::zeros(2 * n, 2 * m);
    t.view_mut((0, 0), (n, m)).copy_from(&j);
    t.view_mut((n, m), (n, m)).copy_from(&j);
    for i in 0..m {
        let col = phi.second(&at.x, &unit(m, i), &at.z, cfg)?;
        t.view_mut((n, i), (n, 1)).copy_from(&col);
    }
    Ok((BundlePoint::new(y, &j * &at.z), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BundleSampling {
    pub seed: u64,
    /// Random pairs `(A, B)` drawn per base sample, on top of the
    /// generalized-eigenvalue test.
    pub pairs_per_sample: usize,
    pub tolerance: f64,
}

impl Default for BundleSampling {
    fn default() -> Self {
        Self {
            seed: 7,
            pairs_per_sample: 8,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleSample {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// `g(Z, Z)`.
    pub z_norm2: f64,
    /// Dilatation estimate of the base map at `x`.
    pub lambda: f64,
    /// Mean of the eigenvalues of `h⁻¹ Φ*h′` at `(x, Z)`.
    pub measured_ratio: f64,
    pub closed_form: f64,
    /// `(max − min) / mean` of those eigenvalues; zero iff `Φ*h′ ∝ h`.
    pub eigen_spread: f64,
    /// Max relative deviation of `h′(Φ_*A, Φ_*B) / h(A, B)` from the
    /// measured ratio over the random pairs.
    pub pair_deviation: f64,
}

impl BundleSample {
    pub fn relative_deviation(&self) -> f64 {
        (self.measured_ratio - self.closed_form).abs() / self.closed_form.abs()
    }

    pub fn constancy_deviation(&self) -> f64 {
        crate::max_or_nan([self.eigen_spread, self.pair_deviation])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleConformalityReport {
    pub seed: u64,
    pub samples: Vec<BundleSample>,
    /// Max relative deviation of the measured ratio from the closed form.
    pub max_relative_deviation: f64,
    pub max_constancy_deviation: f64,
    pub lambda_is_constant_in_a: bool,
    /// Relative deviation between the general closed form and the
    /// `λ(1 + α|Z|²)/(1 + λβr|Z|²)` form, when the exponents allow the latter.
    pub unit_exponent_form_deviation: Option<f64>,
}

const PAIR_COSINE_FLOOR: f64 = 0.1;
const MAX_REDRAWS: usize = 64;

fn measure_sample(
    phi: &SmoothMap,
    h: &CGParams,
    h_target: &CGParams,
    index: usize,
    at: &BundlePoint,
    opts: &BundleSampling,
    cfg: &DiffConfig,
) -> Result<(BundleSample, Option<f64>)> {
    let (src, tgt) = (phi.source(), phi.target());
    let (image, t) = bundle_pushforward_matrix(phi, at, cfg)?;
    let gram = cg_metric_matrix_coordinates(src, h, at, cfg)?;
    let gram_target = cg_metric_matrix_coordinates(tgt, h_target, &image, cfg)?;
    let pulled = t.transpose() * gram_target * &t;
    let mu = generalized_eigenvalues(&pulled, &gram)?;
    let measured_ratio = mu.mean();
    let eigen_spread = (mu.max() - mu.min()) / measured_ratio;

    let mut rng = sample_rng(opts.seed, index as u64);
    let mut pair_deviation: f64 = 0.0;
    for _ in 0..opts.pairs_per_sample {
        let mut drawn = None;
        for _ in 0..MAX_REDRAWS {
            let a = random_bundle_tangent(&mut rng, at);
            let b = random_bundle_tangent(&mut rng, at);
            let haa = cg_metric_eval(src, h, &a, &a, cfg)?;
            let hbb = cg_metric_eval(src, h, &b, &b, cfg)?;
            if !(haa > 1e-12) {
                return Err(GeometryError::DegenerateSample { value: haa });
            }
            let hab = cg_metric_eval(src, h, &a, &b, cfg)?;
            if hab.abs() >= PAIR_COSINE_FLOOR * (haa * hbb).sqrt() {
                drawn = Some((a, b, hab));
                break;
            }
        }
        let (a, b, hab) = drawn.ok_or(GeometryError::DegenerateSample { value: 0.0 })?;
        let fa = bundle_differential(phi, &a, cfg)?;
        let fb = bundle_differential(phi, &b, cfg)?;
        let ratio = cg_metric_eval(tgt, h_target, &fa, &fb, cfg)? / hab;
        pair_deviation = crate::max_or_nan([pair_deviation, (ratio - measured_ratio).abs() / measured_ratio.abs()]);
    }

    let lambda = dilatation_at(phi, &at.x, cfg)?.lambda;
    let g = metric_at(src, &at.x)?;
    let z_norm2 = inner(&g, &at.z, &at.z);
    let (ls, lt) = (h.at(&at.x)?, h_target.at(&image.x)?);
    let closed_form = closed_form_dilatation(&ls, &lt, lambda, z_norm2);
    let unit_exponent_form = if (ls.p - 1.0).abs() <= 1e-12 && (lt.p == 0.0 || lt.p == 1.0) {
        let alt = lambda * (1.0 + ls.alpha * z_norm2) / (1.0 + lambda * lt.alpha * lt.p * z_norm2);
        Some((alt - closed_form).abs() / closed_form.abs())
    } else {
        None
    };
    Ok((
        BundleSample {
            x: at.x.iter().copied().collect(),
            z: at.z.iter().copied().collect(),
            z_norm2,
            lambda,
            measured_ratio,
            closed_form,
            eigen_spread,
            pair_deviation,
        },
        unit_exponent_form,
    ))
}

/// Test whether `Φ*h′ = Λ h` at each sample `(x, Z)` and compare `Λ` with
/// the closed form.
pub fn bundle_conformality(
    phi: &SmoothMap,
    h: &CGParams,
    h_target: &CGParams,
    samples: &[BundlePoint],
    opts: &BundleSampling,
    cfg: &DiffConfig,
) -> Result<BundleConformalityReport> {
    if samples.is_empty() {
        return Err(GeometryError::InvalidParameter("no bundle samples".into()));
    }
    let measured = samples
        .par_iter()
        .enumerate()
        .map(|(i, at)| measure_sample(phi, h, h_target, i, at, opts, cfg))
        .collect::<Result<Vec<_>>>()?;
    let unit_exponent_form_deviation = measured
        .iter()
        .map(|(_, t)| *t)
        .try_fold(0.0_f64, |acc, t| t.map(|t| crate::max_or_nan([acc, t])));
    let samples: Vec<BundleSample> = measured.into_iter().map(|(s, _)| s).collect();
    let max_relative_deviation = crate::max_or_nan(samples.iter().map(BundleSample::relative_deviation));
    let max_constancy_deviation = crate::max_or_nan(samples.iter().map(BundleSample::constancy_deviation));
    Ok(BundleConformalityReport {
        seed: opts.seed,
        samples,
        max_relative_deviation,
        max_constancy_deviation,
        lambda_is_constant_in_a: max_constancy_deviation <= opts.tolerance,
        unit_exponent_form_deviation,
    })
}

/// Both sides of `K′(Φ_*A) = φ_*K(A) + φ_*S(v, Z) + Π(v′, Z′)` in target
/// chart coordinates, with `v = π_*A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KTransfer {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Target-metric norm of `lhs − rhs`.
    pub residual: f64,
}

/// Evaluate the connection-map transfer identity for `A`.
///
/// With a sphere, `Π(v′, Z′)` is built from the ambient second fundamental
/// form and mapped back to target chart coordinates through the target
/// embedding. Without one, it is the normal part (in `g′`) of the covariant
/// Hessian `∇dφ(v, Z)`.
pub fn k_transfer_residual(
    phi: &SmoothMap,
    lambda: &ScalarField,
    a: &BundleTangent,
    sphere: Option<&Sphere>,
    cfg: &DiffConfig,
) -> Result<KTransfer> {
    let (src, tgt) = (phi.source(), phi.target());
    let x = &a.base.x;
    let z = &a.base.z;
    let image = bundle_differential(phi, a, cfg)?;
    let lhs = connection_map(tgt, &image, cfg)?;

    let j = phi.jacobian(x, cfg)?;
    let k = connection_map(src, a, cfg)?;
    let s = s_tensor(src, lambda, x, &a.xdot, z, cfg)?;
    let y = &image.base.x;
    let gp = metric_at(tgt, y)?;
    let pi = match sphere {
        Some(sphere) => {
            let embed = tgt.embedding().ok_or(GeometryError::MissingEmbedding)?;
            let ambient = sphere_sff_vector(phi, sphere, x, &a.xdot, z, cfg)?;
            let je = embed.jacobian(y, cfg);
            metric_inverse(&(je.transpose() * &je))? * (je.transpose() * ambient)
        }
        None => {
            let gamma = christoffel_at(src, x, cfg)?;
            let gamma_t = christoffel_at(tgt, y, cfg)?;
            let hess = phi.second(x, &a.xdot, z, cfg)?;
            let cov = hess + gamma_t.contract(&(&j * &a.xdot), &(&j * z)) - &j * gamma.contract(&a.xdot, z);
            let pulled = j.transpose() * &gp * &j;
            let tangent = &j * (metric_inverse(&pulled)? * (j.transpose() * &gp * &cov));
            cov - tangent
        }
    };
    let rhs = &j * (k + s) + pi;
    let diff = &lhs - &rhs;
    Ok(KTransfer {
        residual: inner(&gp, &diff, &diff).abs().sqrt(),
        lhs: lhs.iter().copied().collect(),
        rhs: rhs.iter().copied().collect(),
    })
}

/// Target-metric norm of `K′(Φ_* v^h)`: zero iff the image of the horizontal
/// lift of `v` at `at` is horizontal.
pub fn horizontal_image_defect(phi: &SmoothMap, at: &BundlePoint, v: &DVector<f64>, cfg: &DiffConfig) -> Result<f64> {
    let a = horizontal_lift(phi.source(), at, v, cfg)?;
    let image = bundle_differential(phi, &a, cfg)?;
    let k = connection_map(phi.target(), &image, cfg)?;
    Ok(phi.target().norm(&image.base.x, &k)?)
}
