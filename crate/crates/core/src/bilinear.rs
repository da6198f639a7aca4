//! Symmetric bilinear forms `B: V × V → W` and the condition
//!
//! ```text
//! ⟨B(X,Z), B(Y,Z)⟩ = C ⟨X,Y⟩ ⟨Z,Z⟩   for all X, Y, Z ∈ V.
//! ```
//!
//! In dimension two the forms satisfying it are complex multiplication (or
//! conjugate multiplication) scaled by `±√C e^{iθ}`; from dimension three on
//! only the zero form does.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeometryError, Result};

/// Anything that can report the inner products `⟨B(eₐ,e_c), B(e_b,e_d)⟩` of a
/// symmetric bilinear form on an orthonormal basis of `V`.
pub trait BilinearGram {
    fn dim_v(&self) -> usize;

    fn gram(&self, a: usize, c: usize, b: usize, d: usize) -> f64;

    /// `⟨B(x,z), B(y,w)⟩` for arbitrary coefficient vectors.
    fn pair_inner(&self, x: &[f64], z: &[f64], y: &[f64], w: &[f64]) -> f64 {
        let n = self.dim_v();
        let mut s = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for c in 0..n {
                if z[c] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    if y[b] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        if w[d] == 0.0 {
                            continue;
                        }
                        s += x[a] * z[c] * y[b] * w[d] * self.gram(a, c, b, d);
                    }
                }
            }
        }
        s
    }
}

/// `B[k][i][j]` = component `k` of `B(eᵢ, eⱼ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymBilinearForm {
    dim_v: usize,
    dim_w: usize,
    coeffs: Vec<f64>,
}

impl SymBilinearForm {
    pub fn zeros(dim_v: usize, dim_w: usize) -> Self {
        Self {
            dim_v,
            dim_w,
            coeffs: vec![0.0; dim_v * dim_v * dim_w],
        }
    }

    /// Build from the values `B(eᵢ, eⱼ)`, given for `i ≤ j` by `value(i, j)`.
    pub fn from_fn<F>(dim_v: usize, dim_w: usize, mut value: F) -> Self
    where
        F: FnMut(usize, usize) -> DVector<f64>,
    {
        let mut b = Self::zeros(dim_v, dim_w);
        for i in 0..dim_v {
            for j in i..dim_v {
                b.set_value(i, j, &value(i, j));
            }
        }
        b
    }

    /// Checks symmetry of raw coefficients `[k][i][j]`.
    pub fn from_coeffs(dim_v: usize, dim_w: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dim_v * dim_v * dim_w {
            return Err(GeometryError::DimensionMismatch {
                expected: dim_v * dim_v * dim_w,
                found: coeffs.len(),
            });
        }
        let b = Self { dim_v, dim_w, coeffs };
        for k in 0..dim_w {
            for i in 0..dim_v {
                for j in 0..dim_v {
                    if b.coeff(k, i, j) != b.coeff(k, j, i) {
                        return Err(GeometryError::InvalidParameter(format!(
                            "form is not symmetric at component {k}, ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(b)
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    #[inline]
    pub fn coeff(&self, k: usize, i: usize, j: usize) -> f64 {
        self.coeffs[(k * self.dim_v + i) * self.dim_v + j]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn set_value(&mut self, i: usize, j: usize, w: &DVector<f64>) {
        assert_eq!(w.len(), self.dim_w, "value has wrong dimension");
        let n = self.dim_v;
        for k in 0..self.dim_w {
            self.coeffs[(k * n + i) * n + j] = w[k];
            self.coeffs[(k * n + j) * n + i] = w[k];
        }
    }

    /// `B(eᵢ, eⱼ)`.
    pub fn value(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim_w, |k, _| self.coeff(k, i, j))
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim_v;
        DVector::from_fn(self.dim_w, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.coeff(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// Extend by zero to a larger `V` and `W`.
    pub fn zero_extend(&self, dim_v: usize, dim_w: usize) -> Self {
        assert!(dim_v >= self.dim_v && dim_w >= self.dim_w);
        let mut out = Self::zeros(dim_v, dim_w);
        for i in 0..self.dim_v {
            for j in i..self.dim_v {
                let mut w = DVector::zeros(dim_w);
                w.rows_mut(0, self.dim_w).copy_from(&self.value(i, j));
                out.set_value(i, j, &w);
            }
        }
        out
    }

    /// Express values in a new orthonormal basis of `W` (columns of `frame`).
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Self {
        let dim_w = frame.ncols();
        Self::from_fn(self.dim_v, dim_w, |i, j| frame.transpose() * self.value(i, j))
    }
}

impl BilinearGram for SymBilinearForm {
    fn dim_v(&self) -> usize {
        self.dim_v
    }

    fn gram(&self, a: usize, c: usize, b: usize, d: usize) -> f64 {
        (0..self.dim_w).map(|k| self.coeff(k, a, c) * self.coeff(k, b, d)).sum()
    }
}

/// A triple `(X, Y, Z)` at which the condition was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub residual: f64,
}

/// The spanning set of unit vectors: basis vectors and normalized pairwise
/// sums. Both sides of the condition are bilinear in `(X, Y)` and quadratic in
/// `Z`, so vanishing on `X, Y ∈ basis`, `Z ∈ spanning set` is equivalent to
/// vanishing everywhere.
fn spanning_set(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = vec![0.0; n];
            e[i] = r;
            e[j] = r;
            out.push(e);
        }
    }
    out
}

/// Max deviation of the condition over the spanning set, with the worst triple.
pub fn e1_evaluate<G: BilinearGram + ?Sized>(b: &G, c: f64) -> Witness {
    let n = b.dim_v();
    let zs = spanning_set(n);
    let mut worst = Witness {
        x: vec![0.0; n],
        y: vec![0.0; n],
        z: vec![0.0; n],
        residual: 0.0,
    };
    for i in 0..n {
        for j in i..n {
            let (x, y) = (&zs[i], &zs[j]);
            let xy = if i == j { 1.0 } else { 0.0 };
            for z in &zs {
                // ⟨Z, Z⟩ = 1 for every member of the spanning set
                let r = (b.pair_inner(x, z, y, z) - c * xy).abs();
                if r > worst.residual {
                    worst = Witness {
                        x: x.clone(),
                        y: y.clone(),
                        z: z.clone(),
                        residual: r,
                    };
                }
            }
        }
    }
    worst
}

pub fn e1_residual<G: BilinearGram + ?Sized>(b: &G, c: f64) -> f64 {
    e1_evaluate(b, c).residual
}

/// Least-squares `C` from the constraints `|B(eᵢ, eⱼ)|² = C` (the condition
/// with `X = Y = eᵢ`, `Z = eⱼ`), i.e. their mean.
pub fn best_fit_c<G: BilinearGram + ?Sized>(b: &G) -> f64 {
    let n = b.dim_v();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += b.gram(i, j, i, j);
        }
    }
    s / (n * n) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct E1Report {
    pub best_fit_c: f64,
    pub residual: f64,
    pub satisfied: bool,
}

pub fn e1_report<G: BilinearGram + ?Sized>(b: &G, tol: f64) -> E1Report {
    let c = best_fit_c(b);
    let residual = e1_residual(b, c);
    E1Report {
        best_fit_c: c,
        residual,
        satisfied: residual <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `B(X,Y) = ±√C e^{iθ} X Y`
    Plain,
    /// `B(X,Y) = ±√C e^{iθ} X̄ Ȳ`
    Conjugate,
}

/// `±√C e^{iθ} XY` (or with conjugates) on `ℝ² ≅ ℂ`.
pub fn complex_mult_form(c: f64, theta: f64, branch: Branch, sign: f64) -> Result<SymBilinearForm> {
    if !(c >= 0.0) {
        return Err(GeometryError::InvalidParameter(format!("C must be non-negative, got {c}")));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(GeometryError::InvalidParameter(format!("sign must be ±1, got {sign}")));
    }
    let scale = sign * c.sqrt();
    let (re, im) = (scale * theta.cos(), scale * theta.sin());
    let mul = |a: (f64, f64)| DVector::from_vec(vec![re * a.0 - im * a.1, re * a.1 + im * a.0]);
    // products of basis vectors e₁ = 1, e₂ = ±i
    let i = match branch {
        Branch::Plain => 1.0,
        Branch::Conjugate => -1.0,
    };
    Ok(SymBilinearForm::from_fn(2, 2, |a, b| match (a, b) {
        (0, 0) => mul((1.0, 0.0)),
        (0, 1) => mul((0.0, i)),
        _ => mul((-1.0, 0.0)),
    }))
}

/// Parameters recovered from a two-dimensional form. `frame` holds the
/// orthonormal basis of the image plane `U ⊂ W` in which the form takes the
/// complex-multiplication shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dim2Classification {
    pub c: f64,
    /// In `[0, π)`; the sign absorbs the other half-turn.
    pub theta: f64,
    pub branch: Branch,
    pub sign: f64,
    pub frame: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dim2Outcome {
    Accepted(Dim2Classification),
    Rejected(Witness),
}

pub fn classify_dim2_form(b: &SymBilinearForm, tol: f64) -> Result<Dim2Outcome> {
    if b.dim_v != 2 {
        return Err(GeometryError::DimensionMismatch { expected: 2, found: b.dim_v });
    }
    let xi = b.value(0, 0);
    let c = xi.norm_squared();
    let check = e1_evaluate(b, c);
    if check.residual > tol * c.max(1.0) {
        return Ok(Dim2Outcome::Rejected(check));
    }
    let standard: Vec<Vec<f64>> = (0..b.dim_w)
        .take(2)
        .map(|k| (0..b.dim_w).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if c <= tol {
        return Ok(Dim2Outcome::Accepted(Dim2Classification {
            c: 0.0,
            theta: 0.0,
            branch: Branch::Plain,
            sign: 1.0,
            frame: standard,
        }));
    }
    let eta = b.value(0, 1);
    let (form, frame) = if b.dim_w == 2 {
        (b.clone(), standard)
    } else {
        let u1 = &xi / c.sqrt();
        let u2 = &eta / c.sqrt();
        let frame = DMatrix::from_columns(&[u1.clone(), u2.clone()]);
        (
            b.in_frame(&frame),
            vec![u1.iter().copied().collect(), u2.iter().copied().collect()],
        )
    };
    let w11 = form.value(0, 0);
    let w12 = form.value(0, 1);
    // plain: B(e₁,e₂) = i·B(e₁,e₁); conjugate: B(e₁,e₂) = −i·B(e₁,e₁)
    let i_w11 = DVector::from_vec(vec![-w11[1], w11[0]]);
    let branch = if (&w12 - &i_w11).norm() <= (&w12 + &i_w11).norm() {
        Branch::Plain
    } else {
        Branch::Conjugate
    };
    let mut arg = w11[1].atan2(w11[0]);
    let mut sign = 1.0;
    if arg < 0.0 {
        arg += PI;
        sign = -1.0;
    }
    if arg >= PI {
        arg -= PI;
        sign = -sign;
    }
    Ok(Dim2Outcome::Accepted(Dim2Classification {
        c,
        theta: arg,
        branch,
        sign,
        frame,
    }))
}

/// Evidence that a form on `dim V ≥ 3` cannot satisfy the condition with a
/// positive constant. For an orthonormal triple with `ξ = B(e₁,e₁)`,
/// `ζ = B(e₂,e₂)`, `η = B(e₃,e₃)`, a solution would force `ξ = −ζ = η = −ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dim3Certificate {
    pub best_c: f64,
    pub residual_at_best_c: f64,
    /// `|ξ+ζ|, |ζ+η|, |η+ξ|, |ξ|² − C`.
    pub chain: [f64; 4],
    /// `true` unless the form both satisfies the condition and has `C > tol`.
    pub consistent_with_vanishing: bool,
}

pub fn dim_ge3_certificate(b: &SymBilinearForm, tol: f64) -> Result<Dim3Certificate> {
    if b.dim_v < 3 {
        return Err(GeometryError::DimensionMismatch { expected: 3, found: b.dim_v });
    }
    let best_c = best_fit_c(b);
    let residual = e1_residual(b, best_c);
    let xi = b.value(0, 0);
    let zeta = b.value(1, 1);
    let eta = b.value(2, 2);
    Ok(Dim3Certificate {
        best_c,
        residual_at_best_c: residual,
        chain: [
            (&xi + &zeta).norm(),
            (&zeta + &eta).norm(),
            (&eta + &xi).norm(),
            xi.norm_squared() - best_c,
        ],
        consistent_with_vanishing: !(residual <= tol && best_c > tol),
    })
}

/// Result of the multi-start search for a counterexample in `dim V = 3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSearch {
    pub restarts: usize,
    pub c: f64,
    pub best_residual: f64,
    pub best_seed: u64,
}

const SEARCH_DIM_V: usize = 3;
// any form on ℝ³ has at most 6 independent values, so a 6-dimensional W
// loses no generality
const SEARCH_DIM_W: usize = 6;

fn pair_index() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..SEARCH_DIM_V {
        for j in i..SEARCH_DIM_V {
            out.push((i, j));
        }
    }
    out
}

fn form_from_params(params: &DVector<f64>) -> SymBilinearForm {
    let pairs = pair_index();
    SymBilinearForm::from_fn(SEARCH_DIM_V, SEARCH_DIM_W, |i, j| {
        let p = pairs.iter().position(|&q| q == (i, j)).unwrap();
        params.rows(p * SEARCH_DIM_W, SEARCH_DIM_W).into_owned()
    })
}

/// Residual vector of the condition at fixed `c` over (basis, basis,
/// spanning set), and its Jacobian with respect to the form coefficients.
fn residuals(params: &DVector<f64>, c: f64) -> (DVector<f64>, DMatrix<f64>) {
    let pairs = pair_index();
    let zs = spanning_set(SEARCH_DIM_V);
    let b = form_from_params(params);
    let n_params = params.len();
    let slot = |i: usize, j: usize| pairs.iter().position(|&q| q == (i.min(j), i.max(j))).unwrap();
    let mut rows = Vec::new();
    let mut jac_rows = Vec::new();
    for &(i, j) in &pairs {
        let xy = if i == j { 1.0 } else { 0.0 };
        for z in &zs {
            // B(eᵢ, z) and B(eⱼ, z)
            let mut bx = DVector::zeros(SEARCH_DIM_W);
            let mut by = DVector::zeros(SEARCH_DIM_W);
            for (m, &zm) in z.iter().enumerate() {
                if zm != 0.0 {
                    bx += b.value(i, m) * zm;
                    by += b.value(j, m) * zm;
                }
            }
            rows.push(bx.dot(&by) - c * xy);
            let mut grad = DVector::zeros(n_params);
            for (m, &zm) in z.iter().enumerate() {
                if zm == 0.0 {
                    continue;
                }
                let sx = slot(i, m);
                let sy = slot(j, m);
                for k in 0..SEARCH_DIM_W {
                    grad[sx * SEARCH_DIM_W + k] += zm * by[k];
                    grad[sy * SEARCH_DIM_W + k] += zm * bx[k];
                }
            }
            jac_rows.push(grad.transpose());
        }
    }
    (DVector::from_vec(rows), DMatrix::from_rows(&jac_rows))
}

/// Levenberg-Marquardt on the sum of squared residuals from one seeded start.
fn local_minimize(seed: u64, c: f64, max_iter: usize) -> SymBilinearForm {
    let n_params = pair_index().len() * SEARCH_DIM_W;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = DVector::from_fn(n_params, |_, _| rng.sample::<f64, _>(StandardNormal));
    // unit-normalize so the start has best-fit constant c
    let scale = (c / best_fit_c(&form_from_params(&params))).sqrt();
    params *= scale;

    let mut damping = 1e-3;
    let (mut r, mut j) = residuals(&params, c);
    let mut cost = r.norm_squared();
    for _ in 0..max_iter {
        let jt = j.transpose();
        let mut normal = &jt * &j;
        let g = &jt * &r;
        for d in 0..n_params {
            normal[(d, d)] += damping * (1.0 + normal[(d, d)]);
        }
        let Some(chol) = normal.cholesky() else {
            damping *= 10.0;
            continue;
        };
        let step = chol.solve(&g);
        let trial = &params - step;
        let (rt, jt_new) = residuals(&trial, c);
        let trial_cost = rt.norm_squared();
        if trial_cost < cost {
            let improvement = cost - trial_cost;
            params = trial;
            r = rt;
            j = jt_new;
            cost = trial_cost;
            damping = (damping * 0.3).max(1e-12);
            if improvement <= 1e-14 * cost.max(1e-300) {
                break;
            }
        } else {
            damping *= 10.0;
            if damping > 1e12 {
                break;
            }
        }
    }
    form_from_params(&params)
}

/// Multi-start local minimization of the condition residual for forms on
/// `ℝ³` at a fixed constant `c`. Each restart is seeded with
/// `base_seed + restart_index`.
pub fn search_dim3_counterexample(restarts: usize, c: f64, base_seed: u64) -> RestartSearch {
    let (best_residual, best_seed) = (0..restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let b = local_minimize(seed, c, 200);
            (e1_residual(&b, c), seed)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            // ties go to the smaller seed so the result is schedule-independent
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    RestartSearch {
        restarts,
        c,
        best_residual,
        best_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    /// `B(X,Y) = ⟨X,Y⟩ w` with a unit `w`.
    fn scalar_form(dim_v: usize) -> SymBilinearForm {
        SymBilinearForm::from_fn(dim_v, 2, |i, j| if i == j { v(&[1.0, 0.0]) } else { v(&[0.0, 0.0]) })
    }

    #[test]
    fn zero_form_satisfies_with_zero() {
        assert_eq!(e1_residual(&SymBilinearForm::zeros(2, 3), 0.0), 0.0);
    }

    #[test]
    fn complex_form_values() {
        let b = complex_mult_form(1.0, 0.0, Branch::Plain, 1.0).unwrap();
        assert_eq!(b.value(0, 0), v(&[1.0, 0.0]));
        assert_eq!(b.value(0, 1), v(&[0.0, 1.0]));
        assert_eq!(b.value(1, 1), v(&[-1.0, 0.0]));
        let b = complex_mult_form(1.0, 0.0, Branch::Conjugate, 1.0).unwrap();
        assert_eq!(b.value(0, 1), v(&[0.0, -1.0]));
        assert_eq!(b.value(1, 1), v(&[-1.0, 0.0]));
        let b4 = complex_mult_form(4.0, 0.7, Branch::Plain, -1.0).unwrap();
        let b1 = complex_mult_form(1.0, 0.7, Branch::Plain, -1.0).unwrap();
        for (a, b) in b4.coeffs().iter().zip(b1.coeffs()) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
        assert!(complex_mult_form(-1.0, 0.0, Branch::Plain, 1.0).is_err());
    }

    #[test]
    fn complex_form_satisfies_condition() {
        let b = complex_mult_form(4.0, PI / 3.0, Branch::Plain, 1.0).unwrap();
        assert!(e1_residual(&b, 4.0) <= 1e-12);
        assert!((best_fit_c(&b) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_form_fails_condition() {
        let b = scalar_form(2);
        let w = e1_evaluate(&b, 1.0);
        assert!(w.residual > 0.5, "{w:?}");
        // the sign identity: ⟨B(X,X), B(Y,Y)⟩ = 1 instead of −1
        assert_eq!(b.gram(0, 0, 1, 1), 1.0);
    }

    #[test]
    fn classify_round_trip() {
        let b = complex_mult_form(2.5, 1.1, Branch::Plain, 1.0).unwrap();
        let Dim2Outcome::Accepted(c) = classify_dim2_form(&b, 1e-9).unwrap() else {
            panic!("rejected");
        };
        assert!((c.c - 2.5).abs() < 1e-12);
        assert!((c.theta - 1.1).abs() < 1e-12);
        assert_eq!(c.branch, Branch::Plain);
        assert_eq!(c.sign, 1.0);
    }

    #[test]
    fn classify_gauge_absorbs_half_turn() {
        let b = complex_mult_form(1.0, 4.0, Branch::Conjugate, 1.0).unwrap();
        let Dim2Outcome::Accepted(c) = classify_dim2_form(&b, 1e-9).unwrap() else {
            panic!("rejected");
        };
        assert!((c.theta - (4.0 - PI)).abs() < 1e-12);
        assert_eq!(c.sign, -1.0);
        assert_eq!(c.branch, Branch::Conjugate);
        let rebuilt = complex_mult_form(c.c, c.theta, c.branch, c.sign).unwrap();
        assert!(rebuilt.coeffs().iter().zip(b.coeffs()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn classify_zero_and_rejection() {
        let Dim2Outcome::Accepted(c) = classify_dim2_form(&SymBilinearForm::zeros(2, 2), 1e-9).unwrap() else {
            panic!("zero form rejected");
        };
        assert_eq!(c.c, 0.0);
        let Dim2Outcome::Rejected(w) = classify_dim2_form(&scalar_form(2), 1e-9).unwrap() else {
            panic!("scalar form accepted");
        };
        assert!(w.residual > 0.5);
    }

    #[test]
    fn classify_in_larger_target() {
        // rotate a complex form into a 4-dimensional W
        let b = complex_mult_form(3.0, 0.4, Branch::Plain, 1.0).unwrap();
        let rot = DMatrix::from_row_slice(4, 2, &[0.6, 0.0, 0.0, 0.0, 0.8, 0.0, 0.0, 1.0]);
        let lifted = SymBilinearForm::from_fn(2, 4, |i, j| &rot * b.value(i, j));
        let Dim2Outcome::Accepted(c) = classify_dim2_form(&lifted, 1e-9).unwrap() else {
            panic!("rejected");
        };
        assert!((c.c - 3.0).abs() < 1e-12);
        let frame = DMatrix::from_fn(4, 2, |r, k| c.frame[k][r]);
        let back = lifted.in_frame(&frame);
        let rebuilt = complex_mult_form(c.c, c.theta, c.branch, c.sign).unwrap();
        assert!(rebuilt.coeffs().iter().zip(back.coeffs()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn dim3_certificates() {
        let zero = dim_ge3_certificate(&SymBilinearForm::zeros(3, 2), 1e-9).unwrap();
        assert_eq!(zero.best_c, 0.0);
        assert_eq!(zero.residual_at_best_c, 0.0);
        assert!(zero.consistent_with_vanishing);

        let ext = complex_mult_form(1.0, 0.0, Branch::Plain, 1.0).unwrap().zero_extend(3, 2);
        assert!(e1_residual(&ext, 1.0) > 0.5);
        let cert = dim_ge3_certificate(&ext, 1e-9).unwrap();
        assert!(cert.residual_at_best_c > 0.1);
        assert!(cert.consistent_with_vanishing);
        assert!(dim_ge3_certificate(&complex_mult_form(1.0, 0.0, Branch::Plain, 1.0).unwrap(), 1e-9).is_err());
    }

    #[test]
    fn residual_jacobian_matches_differences() {
        let n = pair_index().len() * SEARCH_DIM_W;
        let p = DVector::from_fn(n, |i, _| ((i * 7 % 11) as f64 - 5.0) / 5.0);
        let (r0, j) = residuals(&p, 1.0);
        let h = 1e-6;
        for col in [0, 5, 17, 35] {
            let mut pp = p.clone();
            pp[col] += h;
            let mut pm = p.clone();
            pm[col] -= h;
            let fd = (residuals(&pp, 1.0).0 - residuals(&pm, 1.0).0) / (2.0 * h);
            assert!((fd - j.column(col)).amax() < 1e-7);
        }
        assert_eq!(r0.len(), 6 * 6);
    }

    #[test]
    fn small_search_finds_nothing() {
        let s = search_dim3_counterexample(16, 1.0, 99);
        assert!(s.best_residual > 1e-3, "{s:?}");
    }
}
