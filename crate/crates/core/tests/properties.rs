//! Property tests for the geometric invariants.

use nalgebra::{DMatrix, DVector};
use num_dual::HyperDual64;
use proptest::prelude::*;

use cgconf::bilinear::{classify_dim2_form, complex_mult_form, e1_residual, Branch, Dim2Outcome};
use cgconf::bundle::{
    cg_metric_eval, connection_map, horizontal_lift, hv_decompose, vertical_lift, BundlePoint, BundleTangent, CGParams,
};
use cgconf::charts::{lower_hemisphere, stereo_chart, veronese, veronese_image_chart, veronese_map, veronese_radius};
use cgconf::immersion::{bundle_differential, dilatation_at, SmoothMap};
use cgconf::manifold::{christoffel_at, metric_at, metric_derivatives, s_tensor, sectional_curvature, ScalarField};
use cgconf::{DiffConfig, ManifoldModel, VectorMap};

fn cfg() -> DiffConfig {
    DiffConfig::default()
}

fn vec2() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform2(-2.0..2.0f64).prop_map(|a| DVector::from_row_slice(&a))
}

/// Points in the open disc of radius 0.9.
fn disc_point() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform2(-0.9..0.9f64)
        .prop_filter("inside the disc", |a| a[0] * a[0] + a[1] * a[1] < 0.81)
        .prop_map(|a| DVector::from_row_slice(&a))
}

fn bundle_point() -> impl Strategy<Value = BundlePoint> {
    (disc_point(), vec2()).prop_map(|(x, z)| BundlePoint::new(x, z))
}

fn tangent_at(at: BundlePoint) -> impl Strategy<Value = BundleTangent> {
    (vec2(), vec2()).prop_map(move |(xd, zd)| BundleTangent::new(at.clone(), xd, zd))
}

fn params() -> impl Strategy<Value = CGParams> {
    (-2.0..2.0f64, 0.0..3.0f64, 0.05..3.0f64).prop_map(|(p, q, a)| CGParams::constant(p, q, a))
}

/// Graph of `t₁t₂ + t₁³/3`: curvature varies from point to point.
fn graph_surface() -> ManifoldModel {
    ManifoldModel::induced(
        "graph",
        VectorMap::from_dual(2, 3, |t: &[HyperDual64]| vec![t[0], t[1], t[0] * t[1] + t[0] * t[0] * t[0] * (1.0 / 3.0)]),
    )
}

fn models() -> Vec<ManifoldModel> {
    vec![stereo_chart(2, 1.0), stereo_chart(2, 0.4), veronese_image_chart(), graph_surface()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_and_christoffel_symmetric(x in disc_point()) {
        for m in models() {
            let g = metric_at(&m, &x).unwrap();
            prop_assert_eq!(&g, &g.transpose());
            prop_assert!(christoffel_at(&m, &x, &cfg()).unwrap().is_symmetric());
        }
    }

    #[test]
    fn christoffel_compatible_with_metric(x in disc_point()) {
        // ∂ₖ g_ij = g(Γ(e_k, e_i), e_j) + g(e_i, Γ(e_k, e_j))
        for m in models() {
            let g = metric_at(&m, &x).unwrap();
            let dg = metric_derivatives(&m, &x, &cfg()).unwrap();
            let gamma = christoffel_at(&m, &x, &cfg()).unwrap();
            let e = |i: usize| DVector::from_fn(2, |r, _| if r == i { 1.0 } else { 0.0 });
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let rhs = (&g * gamma.contract(&e(k), &e(i))).dot(&e(j))
                            + (&g * gamma.contract(&e(k), &e(j))).dot(&e(i));
                        prop_assert!((dg[k][(i, j)] - rhs).abs() <= 1e-6 * (1.0 + g.amax()), "{} {}", m.name(), dg[k][(i, j)] - rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn s_tensor_symmetric_and_linear(x in disc_point(), a in vec2(), b in vec2(), c in vec2(), s in -2.0..2.0f64) {
        let m = stereo_chart(2, 1.0);
        let lambda = ScalarField::new(|x: &DVector<f64>| (0.5 * x[0]).exp() + x[1] * x[1]);
        let st = |u: &DVector<f64>, v: &DVector<f64>| s_tensor(&m, &lambda, &x, u, v, &cfg()).unwrap();
        let scale = 1.0 + a.norm() * b.norm() + a.norm() * c.norm();
        prop_assert!((st(&a, &b) - st(&b, &a)).amax() <= 1e-12 * scale);
        let lhs = st(&(&a * s + &c), &b);
        let rhs = st(&a, &b) * s + st(&c, &b);
        prop_assert!((lhs - rhs).amax() <= 1e-10 * scale * (1.0 + s.abs()));
    }

    #[test]
    fn curvature_depends_only_on_the_plane(x in disc_point(), coef in prop::array::uniform4(-2.0..2.0f64)) {
        let [p, q, r, s] = coef;
        prop_assume!((p * s - q * r).abs() > 0.2);
        let m = graph_surface();
        let (u, v) = (DVector::from_row_slice(&[1.0, 0.0]), DVector::from_row_slice(&[0.0, 1.0]));
        let k0 = sectional_curvature(&m, &x, &u, &v, &cfg()).unwrap();
        let k1 = sectional_curvature(&m, &x, &(&u * p + &v * q), &(&u * r + &v * s), &cfg()).unwrap();
        prop_assert!((k0 - k1).abs() <= 1e-6 * (1.0 + k0.abs()), "{k0} vs {k1}");
    }

    #[test]
    fn connection_map_is_linear(at in bundle_point(), a in vec2(), b in vec2(), c in vec2(), d in vec2(), s in -3.0..3.0f64) {
        let m = stereo_chart(2, 1.0);
        let ta = BundleTangent::new(at.clone(), a, b);
        let tb = BundleTangent::new(at, c, d);
        let lhs = connection_map(&m, &ta.combine(s, &tb, 1.0).unwrap(), &cfg()).unwrap();
        let rhs = connection_map(&m, &ta, &cfg()).unwrap() * s + connection_map(&m, &tb, &cfg()).unwrap();
        prop_assert!((&lhs - &rhs).amax() <= 1e-12 * (1.0 + rhs.amax() + lhs.amax()));
    }

    #[test]
    fn horizontal_and_vertical_are_orthogonal(at in bundle_point(), v in vec2(), w in vec2(), h in params()) {
        let m = stereo_chart(2, 1.0);
        let hl = horizontal_lift(&m, &at, &v, &cfg()).unwrap();
        let vl = vertical_lift(&at, &w);
        let cross = cg_metric_eval(&m, &h, &hl, &vl, &cfg()).unwrap();
        let scale = (cg_metric_eval(&m, &h, &hl, &hl, &cfg()).unwrap() * cg_metric_eval(&m, &h, &vl, &vl, &cfg()).unwrap()).sqrt();
        prop_assert!(cross.abs() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn splitting_reassembles(a in bundle_point().prop_flat_map(tangent_at)) {
        let m = lower_hemisphere();
        let (h, v) = hv_decompose(&m, &a, &cfg()).unwrap();
        prop_assert!(connection_map(&m, &h, &cfg()).unwrap().amax() <= 1e-12 * (1.0 + a.coordinates().amax()));
        prop_assert!(v.xdot.amax() == 0.0);
        let back = h.combine(1.0, &v, 1.0).unwrap();
        prop_assert!((back.coordinates() - a.coordinates()).amax() <= 1e-12 * (1.0 + a.coordinates().amax()));
    }

    #[test]
    fn bundle_metric_is_symmetric_and_positive(a in bundle_point().prop_flat_map(tangent_at), bv in vec2(), bw in vec2(), h in params()) {
        let m = stereo_chart(2, 1.0);
        let b = BundleTangent::new(a.base.clone(), bv, bw);
        let ab = cg_metric_eval(&m, &h, &a, &b, &cfg()).unwrap();
        let ba = cg_metric_eval(&m, &h, &b, &a, &cfg()).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        prop_assume!(a.coordinates().amax() > 1e-3);
        prop_assert!(cg_metric_eval(&m, &h, &a, &a, &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn complex_forms_satisfy_the_condition(c in 0.01..10.0f64, theta in 0.0..std::f64::consts::TAU, conj in any::<bool>(), neg in any::<bool>()) {
        let branch = if conj { Branch::Conjugate } else { Branch::Plain };
        let b = complex_mult_form(c, theta, branch, if neg { -1.0 } else { 1.0 }).unwrap();
        prop_assert!(e1_residual(&b, c) <= 1e-12 * c.max(1.0));
        // trace-free, and ⟨B(X,X), B(Y,Y)⟩ = −C for orthonormal X, Y
        prop_assert!((b.value(0, 0) + b.value(1, 1)).amax() <= 1e-12 * c.sqrt());
        let (x, y) = (DVector::from_row_slice(&[theta.cos(), theta.sin()]), DVector::from_row_slice(&[-theta.sin(), theta.cos()]));
        prop_assert!((b.apply(&x, &x).dot(&b.apply(&y, &y)) + c).abs() <= 1e-12 * c.max(1.0));
    }

    #[test]
    fn classification_recovers_the_form(c in 0.01..10.0f64, theta in 0.0..std::f64::consts::TAU, conj in any::<bool>(), neg in any::<bool>()) {
        let branch = if conj { Branch::Conjugate } else { Branch::Plain };
        let b = complex_mult_form(c, theta, branch, if neg { -1.0 } else { 1.0 }).unwrap();
        match classify_dim2_form(&b, 1e-9).unwrap() {
            Dim2Outcome::Accepted(k) => {
                prop_assert!((k.c - c).abs() <= 1e-9 * c.max(1.0));
                prop_assert_eq!(k.branch, branch);
                let again = complex_mult_form(k.c, k.theta, k.branch, k.sign).unwrap();
                let err = again.coeffs().iter().zip(b.coeffs()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                prop_assert!(err <= 1e-9 * c.sqrt().max(1.0));
            }
            Dim2Outcome::Rejected(w) => prop_assert!(false, "rejected with residual {}", w.residual),
        }
    }

    #[test]
    fn veronese_is_even_and_spherical(a in prop::array::uniform3(-1.0..1.0f64)) {
        let x = DVector::from_row_slice(&a);
        prop_assume!(x.norm() > 1e-3);
        let x = x.normalize();
        let u = veronese(&x).unwrap();
        prop_assert!((u.norm() - veronese_radius()).abs() <= 1e-14);
        prop_assert_eq!(u, veronese(&-x).unwrap());
    }

    #[test]
    fn bundle_map_covers_the_base_map(a in bundle_point().prop_flat_map(tangent_at)) {
        let phi = veronese_map();
        let img = bundle_differential(&phi, &a, &cfg()).unwrap();
        let j = phi.jacobian(&a.base.x, &cfg()).unwrap();
        prop_assert!((&img.base.x - phi.value(&a.base.x).unwrap()).amax() <= 1e-15);
        prop_assert!((&img.base.z - &j * &a.base.z).amax() <= 1e-14 * (1.0 + a.base.z.amax()));
        prop_assert!((&img.xdot - &j * &a.xdot).amax() <= 1e-14 * (1.0 + a.xdot.amax()));
    }

    #[test]
    fn dilatations_multiply_under_composition(x in disc_point(), s1 in 0.2..3.0f64, s2 in 0.2..3.0f64, angle in 0.0..std::f64::consts::TAU) {
        let euclid = std::sync::Arc::new(cgconf::charts::euclidean(2));
        let rot = DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let f = SmoothMap::new(euclid.clone(), euclid.clone(), VectorMap::linear(rot * s1)).unwrap();
        let g = SmoothMap::new(euclid.clone(), euclid, VectorMap::linear(DMatrix::identity(2, 2) * s2)).unwrap();
        let composed = f.compose(&g).unwrap();
        let l = dilatation_at(&composed, &x, &cfg()).unwrap().lambda;
        prop_assert!((l - (s1 * s2).powi(2)).abs() <= 1e-12 * l);
    }
}
