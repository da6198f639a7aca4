//! The scenario registry.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::RngExt;

use super::{CheckRecord, Ctx, ScenarioInfo};
use crate::bilinear::{
    classify_dim2_form, complex_mult_form, dim_ge3_certificate, e1_evaluate, e1_residual, search_dim3_counterexample,
    Branch, Dim2Outcome, SymBilinearForm,
};
use crate::bundle::{
    cg_metric_eval, cg_metric_matrix, connection_map, horizontal_lift, hv_decompose, vertical_lift, BundlePoint,
    BundleTangent, CGParams, LocalParams,
};
use crate::charts::{
    equator_inclusion, great_sphere_inclusion, stereo_chart, veronese, veronese_map, veronese_radius, veronese_target,
};
use crate::diff::DiffConfig;
use crate::max_or_nan;
use crate::error::{GeometryError, Result};
use crate::immersion::{
    ambient_sff, base_conformality, bundle_conformality, bundle_differential, classify_case, dilatation_at,
    gauss_relation_check, horizontal_image_defect, k_transfer_residual, mean_curvature, optimality_coefficient,
    pushforward, sff_table, sphere_sff_inner, sphere_sff_vector, BundleConformalityReport, BundleSampling,
    ConformalityThresholds, SmoothMap, Sphere,
};
use crate::manifold::{
    christoffel_at, inner, metric_at, metric_inverse, s_tensor, sectional_curvature, unit, ManifoldModel, ScalarField,
};
use crate::sampling::{normal_vector, random_bundle_tangent, sample_bundle_points, sample_points, tangent_of_norm, unit_vector};

pub(super) static REGISTRY: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "k-properties",
        summary: "connection map: vertical lifts, horizontal kernel, naturality under maps, covariant derivative, linearity",
        default_samples: 20,
        params: &[],
        run: k_properties,
    },
    ScenarioInfo {
        name: "sasaki-cg-special-cases",
        summary: "Sasaki and Cheeger-Gromoll members of the (p,q,alpha) family",
        default_samples: 100,
        params: &[],
        run: sasaki_cg_special_cases,
    },
    ScenarioInfo {
        name: "veronese-isometry",
        summary: "the Veronese map is an isometric immersion into the sphere of radius 1/sqrt(3)",
        default_samples: 100,
        params: &[],
        run: veronese_isometry,
    },
    ScenarioInfo {
        name: "veronese-optimality",
        summary: "the Veronese surface is minimal and optimal with coefficient one",
        default_samples: 50,
        params: &[],
        run: veronese_optimality,
    },
    ScenarioInfo {
        name: "bundle-conformality",
        summary: "conformality of the Veronese bundle differential for both metric pairs",
        default_samples: 50,
        params: &["pair", "q", "alpha"],
        run: bundle_conformality_scenario,
    },
    ScenarioInfo {
        name: "case-classification",
        summary: "exponent cases of metric pairs and the fibre-norm identity",
        default_samples: 20,
        params: &["q", "alpha"],
        run: case_classification,
    },
    ScenarioInfo {
        name: "gauss-relation",
        summary: "curvature of the Veronese surface against curvature of the sphere and the optimality coefficient",
        default_samples: 10,
        params: &[],
        run: gauss_relation,
    },
    ScenarioInfo {
        name: "k-transfer",
        summary: "connection maps before and after the bundle differential",
        default_samples: 50,
        params: &[],
        run: k_transfer,
    },
    ScenarioInfo {
        name: "horizontal-preservation",
        summary: "horizontal vectors stay horizontal exactly for totally geodesic homotheties",
        default_samples: 50,
        params: &[],
        run: horizontal_preservation,
    },
    ScenarioInfo {
        name: "sasaki-corollary",
        summary: "Sasaki and Cheeger-Gromoll bundle maps over great-sphere inclusions",
        default_samples: 50,
        params: &[],
        run: sasaki_corollary,
    },
    ScenarioInfo {
        name: "bilinear-forms",
        summary: "complex-multiplication forms, dimension-two classification, dimension-three obstruction",
        default_samples: 100,
        params: &["restarts"],
        run: bilinear_forms,
    },
];

/// Range checks on scenario parameters beyond "is it accepted".
pub(super) fn check_param(key: &str, value: f64) -> std::result::Result<(), String> {
    match key {
        "pair" if value != 1.0 && value != 2.0 => Err(format!("pair must be 1 or 2, got {value}")),
        "q" if !(value >= 0.0) => Err(format!("q must be non-negative, got {value}")),
        "alpha" if !(value > 0.0) => Err(format!("alpha must be positive, got {value}")),
        "restarts" if !(value >= 1.0 && value.fract() == 0.0) => {
            Err(format!("restarts must be a positive integer, got {value}"))
        }
        _ => Ok(()),
    }
}

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn veronese_sphere() -> Sphere {
    Sphere::new(veronese_radius()).expect("positive radius")
}

/// Veronese sample points, restricted to `|t| ≤ 0.9` to stay inside the
/// lower hemisphere.
fn veronese_points(ctx: &Ctx, tag: u32) -> Vec<DVector<f64>> {
    sample_points(2, ctx.sub_seed(tag), ctx.samples, 0.9)
}

fn veronese_bundle_points(ctx: &Ctx, tag: u32, z_max: f64) -> Result<Vec<BundlePoint>> {
    sample_bundle_points(&crate::charts::lower_hemisphere(), ctx.sub_seed(tag), ctx.samples, 0.9, z_max)
}

// ---------------------------------------------------------------------------

/// `|K(A) − ∇_{ẋ}ξ|` where the covariant derivative of the field
/// `ξ(s) = Z + sŻ` along `x(s) = x + sẋ` is the tangential part of the
/// ambient derivative through the embedding.
fn covariant_derivative_defect(m: &ManifoldModel, a: &BundleTangent, cfg: &DiffConfig) -> Result<f64> {
    let embed = m.embedding().ok_or(GeometryError::MissingEmbedding)?;
    let x = &a.base.x;
    let k = connection_map(m, a, cfg)?;
    let je = embed.jacobian(x, cfg);
    let ambient = embed.second_derivative(x, &a.xdot, &a.base.z, cfg) + &je * &a.zdot;
    let cov = metric_inverse(&(je.transpose() * &je))? * (je.transpose() * ambient);
    Ok(m.norm(x, &(k - &cov))? / (1.0 + m.norm(x, &cov)?))
}

fn k_properties(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let s2 = stereo_chart(2, 1.0);
    let pts = sample_bundle_points(&s2, ctx.sub_seed(0), ctx.samples, 1.5, 2.0)?;
    let (mut k1, mut kernel, mut lin) = (Vec::new(), Vec::new(), Vec::new());
    for (i, at) in pts.iter().enumerate() {
        let mut rng = ctx.rng(1, i);
        let x = normal_vector(&mut rng, 2);
        let kx = connection_map(&s2, &vertical_lift(at, &x), cfg)?;
        k1.push(s2.norm(&at.x, &(kx - &x))? / s2.norm(&at.x, &x)?);

        let v = normal_vector(&mut rng, 2);
        let h = horizontal_lift(&s2, at, &v, cfg)?;
        let kh = connection_map(&s2, &h, cfg)?;
        kernel.push((s2.norm(&at.x, &kh)? + (&h.xdot - &v).amax()) / s2.norm(&at.x, &v)?);

        let a = random_bundle_tangent(&mut rng, at);
        let b = random_bundle_tangent(&mut rng, at);
        let (ca, cb) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lhs = connection_map(&s2, &a.combine(ca, &b, cb)?, cfg)?;
        let rhs = connection_map(&s2, &a, cfg)? * ca + connection_map(&s2, &b, cfg)? * cb;
        lin.push((lhs - &rhs).amax() / (1.0 + rhs.amax()));
    }

    let phi = veronese_map();
    let tgt = phi.target();
    let vpts = veronese_bundle_points(ctx, 2, 2.0)?;
    let (mut natural, mut projection) = (Vec::new(), Vec::new());
    for (i, at) in vpts.iter().enumerate() {
        let mut rng = ctx.rng(3, i);
        let x = normal_vector(&mut rng, 2);
        let j = phi.jacobian(&at.x, cfg)?;
        let img = bundle_differential(&phi, &vertical_lift(at, &x), cfg)?;
        let jx = &j * &x;
        let y = &img.base.x;
        natural.push((tgt.norm(y, &img.xdot)? + tgt.norm(y, &(&img.zdot - &jx))?) / tgt.norm(y, &jx)?);

        let a = random_bundle_tangent(&mut rng, at);
        let fa = bundle_differential(&phi, &a, cfg)?;
        let base_ok = (&fa.base.x - phi.value(&at.x)?).amax() + (&fa.base.z - &j * &at.z).amax();
        projection.push(base_ok + (&fa.xdot - &j * &a.xdot).amax());
    }

    let mut cov = Vec::new();
    for (tag, m) in [(4, stereo_chart(2, 1.0)), (5, veronese_target())] {
        let pts = sample_bundle_points(&m, ctx.sub_seed(tag), ctx.samples, 1.5, 2.0)?;
        for (i, at) in pts.iter().enumerate() {
            let a = random_bundle_tangent(&mut ctx.rng(tag + 10, i), at);
            cov.push(covariant_derivative_defect(&m, &a, cfg)?);
        }
    }

    let exact = ctx.tol(1e-12);
    let (k1, kernel, lin) = (max_or_nan(k1), max_or_nan(kernel), max_or_nan(lin));
    let (natural, projection, cov) = (max_or_nan(natural), max_or_nan(projection), max_or_nan(cov));
    Ok(vec![
        CheckRecord::within("vertical lift: K(X^v) = X", 0.0, k1, k1, exact),
        CheckRecord::within("horizontal lift: K = 0 and projection = v", 0.0, kernel, kernel, exact),
        CheckRecord::within("K is linear", 0.0, lin, lin, exact),
        CheckRecord::within("Veronese bundle map sends X^v to (phi_* X)^v", 0.0, natural, natural, ctx.tol(1e-6)),
        CheckRecord::within("bundle map covers phi and its differential", 0.0, projection, projection, exact),
        CheckRecord::within("K of a curve velocity is the covariant derivative", 0.0, cov, cov, ctx.tol(1e-9)),
    ])
}

// ---------------------------------------------------------------------------

fn sasaki_cg_special_cases(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let s2 = stereo_chart(2, 1.0);
    let pts = sample_bundle_points(&s2, ctx.sub_seed(0), ctx.samples, 1.5, 2.0)?;
    let sasaki = CGParams::sasaki();
    let cg = CGParams::cheeger_gromoll();
    let families = [CGParams::sasaki(), CGParams::cheeger_gromoll(), CGParams::constant(0.5, 2.0, 3.0), CGParams::constant(-1.5, 0.0, 0.25)];
    let (mut block, mut pair, mut cg_vertical, mut orth, mut split, mut min_eig) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), f64::INFINITY);
    for (i, at) in pts.iter().enumerate() {
        let mut rng = ctx.rng(1, i);
        let g = metric_at(&s2, &at.x)?;
        let gamma = christoffel_at(&s2, &at.x, cfg)?;

        let m = cg_metric_matrix(&s2, &sasaki, at)?;
        let mut blk = DMatrix::zeros(4, 4);
        blk.view_mut((0, 0), (2, 2)).copy_from(&g);
        blk.view_mut((2, 2), (2, 2)).copy_from(&g);
        block.push((m - blk).amax() / g.amax());

        let a = random_bundle_tangent(&mut rng, at);
        let b = random_bundle_tangent(&mut rng, at);
        let ka = &a.zdot + gamma.contract(&a.xdot, &at.z);
        let kb = &b.zdot + gamma.contract(&b.xdot, &at.z);
        let direct = inner(&g, &a.xdot, &b.xdot) + inner(&g, &ka, &kb);
        let scale = (cg_metric_eval(&s2, &sasaki, &a, &a, cfg)? * cg_metric_eval(&s2, &sasaki, &b, &b, cfg)?).sqrt();
        pair.push((cg_metric_eval(&s2, &sasaki, &a, &b, cfg)? - direct).abs() / scale);

        let zv = vertical_lift(at, &at.z);
        let z2 = inner(&g, &at.z, &at.z);
        cg_vertical.push((cg_metric_eval(&s2, &cg, &zv, &zv, cfg)? - z2).abs() / z2.max(1.0));

        let hv = horizontal_lift(&s2, at, &normal_vector(&mut rng, 2), cfg)?;
        let vv = vertical_lift(at, &normal_vector(&mut rng, 2));
        let (ha, hb) = hv_decompose(&s2, &a, cfg)?;
        let recombined = ha.combine(1.0, &hb, 1.0)?;
        split.push((recombined.coordinates() - a.coordinates()).amax() / a.coordinates().amax());
        for params in &families {
            let hh = cg_metric_eval(&s2, params, &hv, &hv, cfg)?;
            let vvv = cg_metric_eval(&s2, params, &vv, &vv, cfg)?;
            orth.push(cg_metric_eval(&s2, params, &hv, &vv, cfg)?.abs() / (hh * vvv).sqrt());
            let h_ab = cg_metric_eval(&s2, params, &a, &b, cfg)?;
            let (hb_h, hb_v) = hv_decompose(&s2, &b, cfg)?;
            let again = cg_metric_eval(&s2, params, &recombined, &hb_h.combine(1.0, &hb_v, 1.0)?, cfg)?;
            split.push((h_ab - again).abs() / scale.max(1.0));
            let eig = nalgebra::SymmetricEigen::new(cg_metric_matrix(&s2, params, at)?).eigenvalues;
            min_eig = min_eig.min(eig.min() / eig.max());
        }
    }
    let tol = ctx.tol(1e-12);
    let (block, pair, cg_vertical, orth, split) = (max_or_nan(block), max_or_nan(pair), max_or_nan(cg_vertical), max_or_nan(orth), max_or_nan(split));
    Ok(vec![
        CheckRecord::within("Sasaki matrix is the block form g + g", 0.0, block, block, tol),
        CheckRecord::within("Sasaki metric on random pairs equals g(pi A, pi B) + g(KA, KB)", 0.0, pair, pair, tol),
        CheckRecord::within("Cheeger-Gromoll metric gives |Z|^2 on Z^v", 0.0, cg_vertical, cg_vertical, tol),
        CheckRecord::within("horizontal and vertical lifts are orthogonal", 0.0, orth, orth, tol),
        CheckRecord::within("metric invariant under horizontal/vertical recombination", 0.0, split, split, tol),
        CheckRecord::at_least("bundle metrics positive definite (min eigenvalue ratio)", min_eig, f64::MIN_POSITIVE),
    ])
}

// ---------------------------------------------------------------------------

fn veronese_isometry(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let phi = veronese_map();
    let pts = veronese_points(ctx, 0);
    let report = base_conformality(&phi, &pts, cfg, &ConformalityThresholds::default())?;
    let lambda_dev = max_or_nan(report.lambda_estimates.iter().map(|e| (e.lambda - 1.0).abs()));

    let mut lengths = Vec::new();
    for (i, t) in pts.iter().enumerate() {
        let v = normal_vector(&mut ctx.rng(1, i), 2);
        let w = pushforward(&phi, t, &v, cfg)?;
        let y = phi.value(t)?;
        let (lv, lw) = (phi.source().norm(t, &v)?, phi.target().norm(&y, &w)?);
        lengths.push((lw - lv).abs() / lv);
    }

    let (mut radius, mut antipodal) = (Vec::new(), Vec::new());
    for i in 0..ctx.samples {
        let x = unit_vector(&mut ctx.rng(2, i), 3);
        let u = veronese(&x)?;
        radius.push((u.norm() - veronese_radius()).abs());
        antipodal.push((u - veronese(&-x)?).amax());
    }

    let tol = ctx.tol(1e-7);
    let (lengths, radius, antipodal) = (max_or_nan(lengths), max_or_nan(radius), max_or_nan(antipodal));
    Ok(vec![
        CheckRecord::within("dilatation estimate equals one", 1.0, 1.0 + lambda_dev, lambda_dev, tol),
        CheckRecord::within("pullback metric proportional to source metric", 0.0, report.max_residual, report.max_residual, tol),
        CheckRecord::equal("reported as a homothety", "true", report.is_homothety.to_string()),
        CheckRecord::within("tangent lengths preserved", 0.0, lengths, lengths, tol),
        CheckRecord::within("image lies on the sphere of radius 1/sqrt(3)", veronese_radius(), radius, radius, ctx.tol(1e-12)),
        CheckRecord::within("map is even: u(-x) = u(x)", 0.0, antipodal, antipodal, ctx.tol(1e-12)),
    ])
}

// ---------------------------------------------------------------------------

/// Closed-form `Π̄(e₁,e₁)`, `Π̄(e₂,e₂)`, `Π̄(e₁,e₂)` of the Veronese surface in
/// lower-hemisphere coordinates.
fn reference_sff(t1: f64, t2: f64) -> [DVector<f64>; 3] {
    let s = t1 * t1 + t2 * t2;
    let s2 = s * s;
    let f = 4.0 / (s + 1.0).powi(4);
    let r3 = 3f64.sqrt();
    let (a, b) = (t1 * t1, t2 * t2);
    [
        DVector::from_vec(vec![
            4.0 * t2 * (1.0 - s - 2.0 * a),
            8.0 * t1 * (1.0 - a),
            4.0 * t1 * t2 * (a - b - 3.0),
            s2 - 8.0 * a * b + 6.0 * b - 6.0 * a + 1.0,
            r3 * (s2 - 2.0 * s - 4.0 * a + 1.0),
        ]) * f,
        DVector::from_vec(vec![
            8.0 * t2 * (1.0 - b),
            4.0 * t1 * (1.0 - s - 2.0 * b),
            4.0 * t1 * t2 * (b - a - 3.0),
            6.0 * b - 6.0 * a + 8.0 * a * b - s2 - 1.0,
            r3 * (s2 - 2.0 * s - 4.0 * b + 1.0),
        ]) * f,
        DVector::from_vec(vec![
            2.0 * t1 * (s - 4.0 * b + 1.0),
            2.0 * t2 * (s - 4.0 * a + 1.0),
            8.0 * a * b - s2 + 1.0,
            4.0 * t1 * t2 * (a - b),
            -4.0 * r3 * t1 * t2,
        ]) * f,
    ]
}

fn veronese_optimality(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let phi = veronese_map();
    let sphere = veronese_sphere();
    let pts = veronese_points(ctx, 0);
    let (mut c_dev, mut residual, mut identity, mut components, mut minimal, mut normal, mut symmetric) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let fd = phi.without_oracles();
    for (n, t) in pts.iter().enumerate() {
        let opt = optimality_coefficient(&phi, &sphere, t, cfg)?;
        c_dev.push((opt.c - 1.0).abs());
        residual.push(opt.residual);

        let table = sff_table(&phi, t, cfg)?;
        let scale = 16.0 / (1.0 + t.norm_squared()).powi(4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let expected = if i == j { (if i == k { 4.0 } else { 1.0 }) * scale } else { 0.0 };
                    identity.push((table.inner((i, k), (j, k)) - expected).abs() / scale);
                }
            }
        }
        let reference = reference_sff(t[0], t[1]);
        for (got, want) in [table.value(0, 0), table.value(1, 1), table.value(0, 1)].into_iter().zip(&reference) {
            components.push((got - want).amax() / scale.sqrt());
        }
        minimal.push(mean_curvature(&phi, &sphere, t, cfg)?.norm());

        let j = phi.jacobian(t, cfg)?;
        let embed = phi.target().embedding().ok_or(GeometryError::MissingEmbedding)?;
        let jf = embed.jacobian(&phi.value(t)?, cfg) * j;
        for (i, k) in [(0, 0), (0, 1), (1, 1)] {
            normal.push((jf.transpose() * table.value(i, k)).amax() / scale.sqrt());
        }
        let mut rng = ctx.rng(1, n);
        let (u, w) = (normal_vector(&mut rng, 2), normal_vector(&mut rng, 2));
        let (uw, wu) = (ambient_sff(&fd, t, &u, &w, cfg)?, ambient_sff(&fd, t, &w, &u, cfg)?);
        symmetric.push((uw - wu).amax());
    }

    let origin = v2(0.0, 0.0);
    let table0 = sff_table(&phi, &origin, cfg)?;
    let mut origin_dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let expected = if i != j { 0.0 } else if i == k { 64.0 } else { 16.0 };
                origin_dev = origin_dev.max((table0.inner((i, k), (j, k)) - expected).abs());
            }
        }
    }
    let inside = sphere_sff_inner(&phi, &sphere, &origin, (0, 0), (0, 0), cfg)?;
    let half = optimality_coefficient(&phi, &sphere, &v2(0.5, 0.0), cfg)?;

    let tol = ctx.tol(1e-6);
    let (c_dev, residual, identity, components) = (max_or_nan(c_dev), max_or_nan(residual), max_or_nan(identity), max_or_nan(components));
    let (minimal, normal, symmetric) = (max_or_nan(minimal), max_or_nan(normal), max_or_nan(symmetric));
    Ok(vec![
        CheckRecord::within("optimality coefficient equals one", 1.0, 1.0 + c_dev, c_dev, tol),
        CheckRecord::within("optimality condition residual", 0.0, residual, residual, tol),
        CheckRecord::within("<sff(e_i,e_k), sff(e_j,e_k)> = (3 delta_ik + 1) 16 delta_ij / (1+|t|^2)^4", 0.0, identity, identity, tol),
        CheckRecord::within("sff components match closed-form table", 0.0, components, components, tol),
        CheckRecord::within("sff values at t = 0 are 64, 16, 0", 0.0, origin_dev, origin_dev, ctx.tol(1e-10)),
        CheckRecord::within("in-sphere <sff(e1,e1), sff(e1,e1)> at t = 0 is 16", 16.0, inside, (inside - 16.0).abs(), ctx.tol(1e-10)),
        CheckRecord::within("optimality coefficient at t = (1/2, 0)", 1.0, half.c, (half.c - 1.0).abs(), tol),
        CheckRecord::within("mean curvature vanishes", 0.0, minimal, minimal, tol),
        CheckRecord::within("sff normal to the image", 0.0, normal, normal, ctx.tol(1e-10)),
        CheckRecord::within("finite-difference sff symmetric", 0.0, symmetric, symmetric, ctx.tol(1e-12)),
    ])
}

// ---------------------------------------------------------------------------

struct PairVariant {
    pair: u8,
    q: f64,
    alpha: f64,
}

impl PairVariant {
    fn params(&self) -> (CGParams, CGParams) {
        match self.pair {
            1 => (CGParams::constant(1.0, self.q, self.alpha + 1.0), CGParams::constant(1.0, self.q, self.alpha)),
            _ => (CGParams::constant(1.0, self.q, 1.0), CGParams::constant(0.0, self.q, 1.0)),
        }
    }

    /// The dilatation the example predicts for `g(Z, Z) = z2`.
    fn predicted(&self, z2: f64) -> f64 {
        match self.pair {
            1 => (1.0 + (self.alpha + 1.0) * z2) / (1.0 + self.alpha * z2),
            _ => 1.0 + z2,
        }
    }

    fn label(&self) -> String {
        match self.pair {
            1 => format!("pair 1 (q={}, alpha={})", self.q, self.alpha),
            _ => format!("pair 2 (q={})", self.q),
        }
    }
}

fn pair_variants(ctx: &Ctx) -> Vec<PairVariant> {
    let q = ctx.param("q");
    let alpha = ctx.param("alpha");
    match ctx.param("pair") {
        Some(p) => vec![PairVariant {
            pair: p as u8,
            q: q.unwrap_or(1.0),
            alpha: alpha.unwrap_or(1.0),
        }],
        None => {
            let mut out = Vec::new();
            match (q, alpha) {
                (None, None) => {
                    out.push(PairVariant { pair: 1, q: 1.0, alpha: 1.0 });
                    out.push(PairVariant { pair: 1, q: 2.0, alpha: 0.5 });
                }
                _ => out.push(PairVariant {
                    pair: 1,
                    q: q.unwrap_or(1.0),
                    alpha: alpha.unwrap_or(1.0),
                }),
            }
            let qs = q.map_or(vec![1.0, 2.0], |q| vec![q]);
            out.extend(qs.into_iter().map(|q| PairVariant { pair: 2, q, alpha: 1.0 }));
            out
        }
    }
}

fn bundle_conformality_scenario(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let phi = veronese_map();
    let tol = ctx.tol(1e-5);
    let pts = veronese_bundle_points(ctx, 0, 2.0)?;
    let zero: Vec<BundlePoint> = pts.iter().map(|p| BundlePoint::zero_section(p.x.clone())).collect();
    let mut checks = Vec::new();
    for (n, variant) in pair_variants(ctx).iter().enumerate() {
        let (h, hp) = variant.params();
        let opts = BundleSampling {
            seed: ctx.sub_seed(100 + n as u32),
            pairs_per_sample: 4,
            tolerance: tol,
        };
        let report: BundleConformalityReport = bundle_conformality(&phi, &h, &hp, &pts, &opts, cfg)?;
        let at_zero = bundle_conformality(&phi, &h, &hp, &zero, &opts, cfg)?;
        let label = variant.label();
        let predicted = max_or_nan(
            report
                .samples
                .iter()
                .map(|s| (s.measured_ratio - variant.predicted(s.z_norm2)).abs() / variant.predicted(s.z_norm2)),
        );
        let zero_dev = max_or_nan(at_zero.samples.iter().map(|s| (s.measured_ratio - s.lambda).abs() / s.lambda));
        let lambda_dev = max_or_nan(report.samples.iter().map(|s| (s.lambda - 1.0).abs()));
        let ratios = report.samples.iter().map(|s| s.measured_ratio);
        let spread = ratios.clone().fold(f64::NEG_INFINITY, f64::max) - ratios.fold(f64::INFINITY, f64::min);
        // pair 2 must span at least [1, 2]; pair 1 at least half its predicted range
        let spread_floor = match variant.pair {
            1 => 0.5 * (variant.predicted(4.0) - 1.0),
            _ => 1.0,
        };
        let alt_form = report.unit_exponent_form_deviation.unwrap_or(f64::NAN);
        checks.extend([
            CheckRecord::within(
                format!("{label}: ratio independent of (A, B)"),
                0.0,
                report.max_constancy_deviation,
                report.max_constancy_deviation,
                tol,
            ),
            CheckRecord::within(format!("{label}: ratio matches predicted dilatation"), 0.0, predicted, predicted, tol),
            CheckRecord::within(
                format!("{label}: ratio matches general closed form"),
                0.0,
                report.max_relative_deviation,
                report.max_relative_deviation,
                tol,
            ),
            CheckRecord::within(format!("{label}: closed forms agree"), 0.0, alt_form, alt_form, ctx.tol(1e-12)),
            CheckRecord::within(format!("{label}: base dilatation is one"), 1.0, 1.0 + lambda_dev, lambda_dev, ctx.tol(1e-7)),
            CheckRecord::within(format!("{label}: ratio on the zero section equals base dilatation"), 0.0, zero_dev, zero_dev, tol),
            CheckRecord::at_least(format!("{label}: dilatation range (not a homothety)"), spread, spread_floor),
        ]);
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------

fn local(p: f64, q: f64, alpha: f64) -> LocalParams {
    LocalParams { p, q, alpha }
}

fn case_classification(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let q = ctx.param("q").unwrap_or(1.0);
    let alpha = ctx.param("alpha").unwrap_or(1.0);
    let tol = ctx.tol(1e-9);
    let e3 = classify_case(&local(1.0, q, alpha + 1.0), &local(1.0, q, alpha), 1.0);
    let e4 = classify_case(&local(1.0, q, 1.0), &local(0.0, q, 1.0), 1.0);
    let e1 = classify_case(&local(0.0, 0.0, 1.0), &local(0.0, 0.0, 1.0), 1.0);
    let bad = classify_case(&local(1.0, q, alpha + 1.0), &local(1.0, q + 1.0, alpha), 1.0);
    let c3 = e3.coefficient().unwrap_or(f64::NAN);
    let c4 = e4.coefficient().unwrap_or(f64::NAN);

    let phi = veronese_map();
    let sphere = veronese_sphere();
    let pts = veronese_bundle_points(ctx, 0, 2.0)?;
    let (mut labels_ok, mut c_match, mut fibre) = (true, Vec::new(), Vec::new());
    for (i, at) in pts.iter().enumerate() {
        let lambda = dilatation_at(&phi, &at.x, cfg)?.lambda;
        let opt = optimality_coefficient(&phi, &sphere, &at.x, cfg)?;
        let v = normal_vector(&mut ctx.rng(1, i), 2);
        let pi = sphere_sff_vector(&phi, &sphere, &at.x, &v, &at.z, cfg)?;
        let g = metric_at(phi.source(), &at.x)?;
        let (v2n, z2) = (inner(&g, &v, &v), inner(&g, &at.z, &at.z));
        for (src, tgt, expected) in [
            (local(1.0, q, alpha + 1.0), local(1.0, q, alpha), "E3"),
            (local(1.0, q, 1.0), local(0.0, q, 1.0), "E4"),
        ] {
            let tag = classify_case(&src, &tgt, lambda);
            labels_ok &= tag.label() == expected;
            c_match.push((tag.coefficient().unwrap_or(f64::NAN) - opt.c).abs());
            // |Π(φ_*v, φ_*Z)|² = λ((1+α|Z|²)^p − (1+λβ|Z|²)^r)|v|²
            let rhs = lambda * ((1.0 + src.alpha * z2).powf(src.p) - (1.0 + lambda * tgt.alpha * z2).powf(tgt.p)) * v2n;
            fibre.push((pi.norm_squared() - rhs).abs() / (v2n * z2).max(1e-300).max(v2n));
        }
    }
    let (c_match, fibre) = (max_or_nan(c_match), max_or_nan(fibre));
    Ok(vec![
        CheckRecord::equal("pair 1 case", "E3", e3.label()),
        CheckRecord::within("pair 1 coefficient", 1.0, c3, (c3 - 1.0).abs(), tol),
        CheckRecord::equal("pair 2 case", "E4", e4.label()),
        CheckRecord::within("pair 2 coefficient", 1.0, c4, (c4 - 1.0).abs(), tol),
        CheckRecord::equal("Sasaki to Sasaki case", "E1", e1.label()),
        CheckRecord::equal("q differs from lambda s", "INCOMPATIBLE", bad.label()),
        CheckRecord::equal("cases with measured dilatation at Veronese samples", "true", labels_ok.to_string()),
        CheckRecord::within("case coefficient equals measured optimality coefficient", 0.0, c_match, c_match, ctx.tol(1e-6)),
        CheckRecord::within("|sff(v, Z)|^2 matches the metric exponents", 0.0, fibre, fibre, ctx.tol(1e-5)),
    ])
}

// ---------------------------------------------------------------------------

fn gauss_relation(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let phi = veronese_map();
    let sphere = veronese_sphere();
    let bare_src = phi.source().without_christoffel_oracle();
    let bare_tgt = phi.target().without_christoffel_oracle();
    let pts = veronese_points(ctx, 0);
    let (e1, e2) = (unit(2, 0), unit(2, 1));
    let (mut fd, mut oracle, mut k_src, mut k_tgt) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in &pts {
        let y = phi.value(t)?;
        let j = phi.jacobian(t, cfg)?;
        let (u, w) = (&j * &e1, &j * &e2);
        let c = optimality_coefficient(&phi, &sphere, t, cfg)?.c;
        let lambda = dilatation_at(&phi, t, cfg)?.lambda;

        let kappa = sectional_curvature(&bare_src, t, &e1, &e2, cfg)?;
        let kappa_t = sectional_curvature(&bare_tgt, &y, &u, &w, cfg)?;
        k_src.push((kappa - 1.0).abs());
        k_tgt.push((kappa_t - 3.0).abs());
        fd.push(gauss_relation_check(kappa, kappa_t, c, lambda).abs());

        let kappa = sectional_curvature(phi.source(), t, &e1, &e2, cfg)?;
        let kappa_t = sectional_curvature(phi.target(), &y, &u, &w, cfg)?;
        oracle.push(gauss_relation_check(kappa, kappa_t, c, lambda).abs());
    }
    let tol = ctx.tol(1e-4);
    let analytic = gauss_relation_check(1.0, 3.0, 1.0, 1.0);
    let (fd, oracle, k_src, k_tgt) = (max_or_nan(fd), max_or_nan(oracle), max_or_nan(k_src), max_or_nan(k_tgt));
    Ok(vec![
        CheckRecord::within("source curvature is 1 (finite differences)", 1.0, 1.0 + k_src, k_src, tol),
        CheckRecord::within("target curvature is 3 (finite differences)", 3.0, 3.0 + k_tgt, k_tgt, tol),
        CheckRecord::within("kappa = lambda kappa' - 2 C lambda (finite differences)", 0.0, fd, fd, tol),
        CheckRecord::within("kappa = lambda kappa' - 2 C lambda (Christoffel oracles)", 0.0, oracle, oracle, tol),
        CheckRecord::within("1 = 1*3 - 2*1*1", 0.0, analytic, analytic.abs(), ctx.tol(1e-15)),
    ])
}

// ---------------------------------------------------------------------------

fn measured_dilatation(phi: &SmoothMap, cfg: DiffConfig) -> ScalarField {
    let phi = phi.clone();
    ScalarField::new(move |x| dilatation_at(&phi, x, &cfg).map_or(f64::NAN, |e| e.lambda))
}

fn k_transfer(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let phi = veronese_map();
    let sphere = veronese_sphere();
    let lambda = measured_dilatation(&phi, *cfg);
    let pts = veronese_bundle_points(ctx, 0, 2.0)?;
    let (mut general, mut intrinsic, mut horizontal, mut s_norm, mut vertical) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, at) in pts.iter().enumerate() {
        let mut rng = ctx.rng(1, i);
        let a = random_bundle_tangent(&mut rng, at);
        general.push(k_transfer_residual(&phi, &lambda, &a, Some(&sphere), cfg)?.residual);
        intrinsic.push(k_transfer_residual(&phi, &lambda, &a, None, cfg)?.residual);

        let v = normal_vector(&mut rng, 2);
        let h = horizontal_lift(phi.source(), at, &v, cfg)?;
        horizontal.push(k_transfer_residual(&phi, &lambda, &h, Some(&sphere), cfg)?.residual);
        s_norm.push(phi.source().norm(&at.x, &s_tensor(phi.source(), &lambda, &at.x, &v, &at.z, cfg)?)?);

        let x = normal_vector(&mut rng, 2);
        let img = bundle_differential(&phi, &vertical_lift(at, &x), cfg)?;
        let k = connection_map(phi.target(), &img, cfg)?;
        let jx = phi.jacobian(&at.x, cfg)? * &x;
        vertical.push(phi.target().norm(&img.base.x, &(k - jx))?);
    }

    let eq = equator_inclusion(1.0);
    let one = ScalarField::constant(1.0);
    let eq_pts = sample_bundle_points(eq.source(), ctx.sub_seed(2), ctx.samples, 1.5, 2.0)?;
    let mut equator = Vec::new();
    for (i, at) in eq_pts.iter().enumerate() {
        let a = random_bundle_tangent(&mut ctx.rng(3, i), at);
        equator.push(k_transfer_residual(&eq, &one, &a, Some(&Sphere::new(1.0)?), cfg)?.residual);
    }

    let tol = ctx.tol(1e-5);
    let (general, intrinsic, horizontal, s_norm) = (max_or_nan(general), max_or_nan(intrinsic), max_or_nan(horizontal), max_or_nan(s_norm));
    let (vertical, equator) = (max_or_nan(vertical), max_or_nan(equator));
    Ok(vec![
        CheckRecord::within("Veronese, random A (ambient sff route)", 0.0, general, general, tol),
        CheckRecord::within("Veronese, random A (covariant Hessian route)", 0.0, intrinsic, intrinsic, tol),
        CheckRecord::within("Veronese, horizontal A: K'(Phi_* A) = S(v,Z) + sff(v',Z')", 0.0, horizontal, horizontal, tol),
        CheckRecord::within("Veronese: S vanishes for constant dilatation", 0.0, s_norm, s_norm, ctx.tol(1e-6)),
        CheckRecord::within("Veronese, vertical lift: K'(Phi_* X^v) = phi_* X", 0.0, vertical, vertical, ctx.tol(1e-6)),
        CheckRecord::within("equator inclusion, random A", 0.0, equator, equator, ctx.tol(1e-6)),
    ])
}

// ---------------------------------------------------------------------------

fn max_horizontal_defect(ctx: &Ctx, phi: &SmoothMap, tag: u32, chart_radius: f64) -> Result<f64> {
    let pts = sample_bundle_points(phi.source(), ctx.sub_seed(tag), ctx.samples, chart_radius, 2.0)?;
    let mut out = Vec::new();
    for (i, at) in pts.iter().enumerate() {
        let g = metric_at(phi.source(), &at.x)?;
        let v = tangent_of_norm(&mut ctx.rng(tag, i), &g, 1.0)?;
        out.push(horizontal_image_defect(phi, at, &v, &ctx.cfg)?);
    }
    Ok(max_or_nan(out))
}

fn horizontal_preservation(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let equator = max_horizontal_defect(ctx, &equator_inclusion(1.0), 0, 1.5)?;
    let homothety = max_horizontal_defect(ctx, &great_sphere_inclusion(2, 3, 1.0, 2.0), 1, 1.5)?;
    let veronese = max_horizontal_defect(ctx, &veronese_map(), 2, 0.9)?;
    let tol = ctx.tol(1e-6);
    Ok(vec![
        CheckRecord::within("equator inclusion keeps horizontal vectors horizontal", 0.0, equator, equator, tol),
        CheckRecord::within("great-sphere homothety keeps horizontal vectors horizontal", 0.0, homothety, homothety, tol),
        CheckRecord::at_least("Veronese map sends some horizontal vector off the horizontal", veronese, 0.1),
    ])
}

// ---------------------------------------------------------------------------

fn sasaki_corollary(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let tol = ctx.tol(1e-5);
    let isometry = great_sphere_inclusion(2, 3, 1.0, 1.0);
    let homothety = great_sphere_inclusion(2, 3, 1.0, 2.0);
    let pts = sample_bundle_points(isometry.source(), ctx.sub_seed(0), ctx.samples, 1.5, 2.0)?;
    let small = sample_bundle_points(isometry.source(), ctx.sub_seed(1), ctx.samples, 1.5, 1.0)?;
    let opts = BundleSampling {
        seed: ctx.sub_seed(2),
        pairs_per_sample: 4,
        tolerance: tol,
    };
    let (sasaki, cg) = (CGParams::sasaki(), CGParams::cheeger_gromoll());

    let dev_from = |r: &BundleConformalityReport, value: f64| max_or_nan(r.samples.iter().map(|s| (s.measured_ratio - value).abs() / value));
    let max_spread = |r: &BundleConformalityReport| max_or_nan(r.samples.iter().map(|s| s.eigen_spread));

    let s_iso = bundle_conformality(&isometry, &sasaki, &sasaki, &pts, &opts, cfg)?;
    let s_hom = bundle_conformality(&homothety, &sasaki, &sasaki, &pts, &opts, cfg)?;
    let c_iso = bundle_conformality(&isometry, &cg, &cg, &pts, &opts, cfg)?;
    let c_hom = bundle_conformality(&homothety, &cg, &cg, &pts, &opts, cfg)?;
    let mixed = bundle_conformality(&isometry, &cg, &sasaki, &small, &opts, cfg)?;
    let mixed_equator = bundle_conformality(&equator_inclusion(1.0), &cg, &sasaki, &small, &opts, cfg)?;
    let (d1, d4, dc) = (dev_from(&s_iso, 1.0), dev_from(&s_hom, 4.0), dev_from(&c_iso, 1.0));
    Ok(vec![
        CheckRecord::within("Sasaki, isometric great sphere: conformal", 0.0, s_iso.max_constancy_deviation, s_iso.max_constancy_deviation, tol),
        CheckRecord::within("Sasaki, isometric great sphere: dilatation 1", 1.0, 1.0 + d1, d1, tol),
        CheckRecord::within("Sasaki, homothetic great sphere: conformal", 0.0, s_hom.max_constancy_deviation, s_hom.max_constancy_deviation, tol),
        CheckRecord::within("Sasaki, homothetic great sphere: dilatation equals base dilatation 4", 4.0, 4.0 * (1.0 + d4), d4, tol),
        CheckRecord::within("Cheeger-Gromoll, isometric great sphere: conformal", 0.0, c_iso.max_constancy_deviation, c_iso.max_constancy_deviation, tol),
        CheckRecord::within("Cheeger-Gromoll, isometric great sphere: dilatation 1", 1.0, 1.0 + dc, dc, tol),
        CheckRecord::at_least("Cheeger-Gromoll, homothetic great sphere: not conformal (ratio spread)", max_spread(&c_hom), 0.1),
        CheckRecord::at_least("Cheeger-Gromoll to Sasaki over S^2 in S^3, |Z| <= 1: ratio spread", max_spread(&mixed), 0.1),
        CheckRecord::at_least("Cheeger-Gromoll to Sasaki over the equator of S^4, |Z| <= 1: ratio spread", max_spread(&mixed_equator), 0.1),
    ])
}

// ---------------------------------------------------------------------------

fn bilinear_forms(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let tol = ctx.tol(1e-12);
    let (mut residuals, mut round_trip, mut labels_ok, mut sign_identity, mut trace) =
        (Vec::new(), Vec::new(), true, Vec::new(), Vec::new());
    for i in 0..ctx.samples {
        let mut rng = ctx.rng(0, i);
        let c = rng.random_range(0.1..5.0);
        let theta = rng.random_range(0.0..2.0 * PI);
        let branch = if rng.random::<bool>() { Branch::Plain } else { Branch::Conjugate };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let b = complex_mult_form(c, theta, branch, sign)?;
        residuals.push(e1_residual(&b, c));
        trace.push((b.value(0, 0) + b.value(1, 1)).amax());

        let x = unit_vector(&mut rng, 2);
        let y = v2(-x[1], x[0]);
        sign_identity.push((b.apply(&x, &x).dot(&b.apply(&y, &y)) + c).abs());

        match classify_dim2_form(&b, 1e-9)? {
            Dim2Outcome::Accepted(cls) => {
                let rebuilt = complex_mult_form(cls.c, cls.theta, cls.branch, cls.sign)?;
                let err = rebuilt.coeffs().iter().zip(b.coeffs()).map(|(p, q)| (p - q).abs());
                round_trip.push(max_or_nan(err).max((cls.c - c).abs()));
                labels_ok &= cls.branch == branch && (0.0..PI).contains(&cls.theta);
            }
            Dim2Outcome::Rejected(_) => labels_ok = false,
        }
    }

    let scalar = SymBilinearForm::from_fn(2, 2, |i, j| if i == j { v2(1.0, 0.0) } else { v2(0.0, 0.0) });
    let scalar_rejected = matches!(classify_dim2_form(&scalar, 1e-9)?, Dim2Outcome::Rejected(_));
    let scalar_witness = e1_evaluate(&scalar, 1.0).residual;

    let extended = complex_mult_form(1.0, 0.0, Branch::Plain, 1.0)?.zero_extend(3, 2);
    let ext_residual = e1_residual(&extended, 1.0);

    let mut certificates_ok = true;
    for i in 0..ctx.samples {
        let mut rng = ctx.rng(1, i);
        let b = SymBilinearForm::from_fn(3, 4, |_, _| normal_vector(&mut rng, 4));
        let cert = dim_ge3_certificate(&b, 1e-9)?;
        certificates_ok &= cert.consistent_with_vanishing && cert.residual_at_best_c >= 0.0 && cert.best_c == crate::bilinear::best_fit_c(&b);
    }
    let zero_cert = dim_ge3_certificate(&SymBilinearForm::zeros(3, 3), 1e-9)?;

    let restarts = ctx.param("restarts").map_or(1000, |r| r as usize);
    let search = search_dim3_counterexample(restarts, 1.0, ctx.sub_seed(7));

    let (residuals, round_trip, sign_identity, trace) = (max_or_nan(residuals), max_or_nan(round_trip), max_or_nan(sign_identity), max_or_nan(trace));
    Ok(vec![
        CheckRecord::within("complex-multiplication forms satisfy the condition", 0.0, residuals, residuals, tol),
        CheckRecord::within("classification round-trips forms and C", 0.0, round_trip, round_trip, ctx.tol(1e-9)),
        CheckRecord::equal("classification recovers branch with theta in [0, pi)", "true", labels_ok.to_string()),
        CheckRecord::within("<B(X,X), B(Y,Y)> = -C for orthonormal X, Y", 0.0, sign_identity, sign_identity, ctx.tol(1e-11)),
        CheckRecord::within("B(e1,e1) + B(e2,e2) = 0", 0.0, trace, trace, ctx.tol(1e-15)),
        CheckRecord::equal("<X,Y> w form rejected", "true", scalar_rejected.to_string()),
        CheckRecord::at_least("<X,Y> w form residual at C = 1", scalar_witness, 0.5),
        CheckRecord::at_least("zero-extended complex form in dimension 3, residual at C = 1", ext_residual, 0.5),
        CheckRecord::equal("random dimension-3 forms consistent with vanishing", "true", certificates_ok.to_string()),
        CheckRecord::within("zero form certificate", 0.0, zero_cert.residual_at_best_c, zero_cert.residual_at_best_c + zero_cert.best_c, tol),
        CheckRecord::at_least(format!("best residual over {restarts} local searches in dimension 3 at C = 1"), search.best_residual, 1e-3),
    ])
}
