//! Which pairs of `(p, q, α)` metrics can make a bundle differential
//! conformal, the closed-form dilatation, and the curvature relation.

use serde::Serialize;

use crate::bundle::LocalParams;

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Incompatibility {
    /// `q ≠ λ s`.
    FibreScaling,
    /// No exponent pattern matches.
    Exponents,
    /// `p = r = 1` but `α < λβ`: the coefficient would be negative, while it
    /// equals a squared norm.
    NegativeCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum CaseTag {
    /// `p = r = 0`.
    E1,
    /// `p = r ≠ 0` and `λβ = α`.
    E2,
    /// `p = r = 1` and `λβ ≠ α`; `C = λ(α − λβ)`.
    E3 { c: f64 },
    /// `p = 1`, `r = 0`; `C = λα`.
    E4 { c: f64 },
    Incompatible { reason: Incompatibility },
}

impl CaseTag {
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::E1 => "E1",
            CaseTag::E2 => "E2",
            CaseTag::E3 { .. } => "E3",
            CaseTag::E4 { .. } => "E4",
            CaseTag::Incompatible { .. } => "INCOMPATIBLE",
        }
    }

    /// The optimality coefficient the image must have, when the case fixes one.
    pub fn coefficient(&self) -> Option<f64> {
        match *self {
            CaseTag::E3 { c } | CaseTag::E4 { c } => Some(c),
            CaseTag::E1 | CaseTag::E2 => Some(0.0),
            CaseTag::Incompatible { .. } => None,
        }
    }
}

/// Classify source parameters `(p, q, α)` at `x` against target parameters
/// `(r, s, β)` at `φ(x)` for a conformal base map with dilatation `λ`.
/// Equalities use a relative tolerance of `1e-9`; a tie between E2 and E3
/// goes to E2.
pub fn classify_case(source: &LocalParams, target: &LocalParams, lambda: f64) -> CaseTag {
    let (p, q, alpha) = (source.p, source.q, source.alpha);
    let (r, s, beta) = (target.p, target.q, target.alpha);
    if !close(q, lambda * s) {
        return CaseTag::Incompatible {
            reason: Incompatibility::FibreScaling,
        };
    }
    let zero = |a: f64| a.abs() <= REL_TOL;
    let one = |a: f64| close(a, 1.0);
    if zero(p) && zero(r) {
        return CaseTag::E1;
    }
    if close(p, r) && close(lambda * beta, alpha) {
        return CaseTag::E2;
    }
    if one(p) && one(r) {
        let c = lambda * (alpha - lambda * beta);
        if c < 0.0 {
            return CaseTag::Incompatible {
                reason: Incompatibility::NegativeCoefficient,
            };
        }
        return CaseTag::E3 { c };
    }
    if one(p) && zero(r) {
        return CaseTag::E4 { c: lambda * alpha };
    }
    CaseTag::Incompatible {
        reason: Incompatibility::Exponents,
    }
}

/// `Λ(Z) = λ (1 + α|Z|²)^p / (1 + λβ|Z|²)^r` with `|Z|²` in the source metric.
pub fn closed_form_dilatation(source: &LocalParams, target: &LocalParams, lambda: f64, z2: f64) -> f64 {
    lambda * (1.0 + source.alpha * z2).powf(source.p) / (1.0 + lambda * target.alpha * z2).powf(target.p)
}

/// `κ − (λκ′ − 2Cλ)`, zero when the Gauss equation holds for a minimal
/// optimal image.
pub fn gauss_relation_check(kappa: f64, kappa_target: f64, c: f64, lambda: f64) -> f64 {
    kappa - (lambda * kappa_target - 2.0 * c * lambda)
}
