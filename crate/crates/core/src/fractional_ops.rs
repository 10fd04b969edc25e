//! One-sided fractional operators `∂x D^α`, their adjoints, and the general
//! Riesz–Feller operator, discretized with shifted Grünwald–Letnikov weights.
//!
//! Symbols are multipliers on `e^{iξx}`: an operator `L` with symbol `m`
//! satisfies `L[e^{iξx}] = m(ξ) e^{iξx}`. In that convention `∂x D^α` has
//! symbol `(iξ)^{1+α}` and the Riesz–Feller operator of order `β` and skewness
//! `γ` has symbol `-|ξ|^β exp(-i sign(ξ) γπ/2)`; see [`FracParams::exact_symbol`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::grid::{Field, GridSpec};
use crate::special::{gamma, FftConvolver};

/// One-sided order, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Alpha(alpha))
        } else {
            Err(FracError::param("alpha", alpha, "must lie strictly inside (0, 1)"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = FracError;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FracParams {
    OneSided { alpha: f64 },
    RieszFeller { beta: f64, gamma: f64 },
}

impl FracParams {
    pub fn one_sided(alpha: f64) -> Result<Self> {
        let p = FracParams::OneSided { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn riesz_feller(beta: f64, gamma: f64) -> Result<Self> {
        let p = FracParams::RieszFeller { beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FracParams::OneSided { alpha } => Alpha::new(alpha).map(|_| ()),
            FracParams::RieszFeller { beta, gamma } => {
                if !(beta > 1.0 && beta <= 2.0) {
                    return Err(FracError::param("beta", beta, "must lie in (1, 2]"));
                }
                let bound = beta.min(2.0 - beta);
                if !(gamma.abs() <= bound + 1e-15) {
                    return Err(FracError::param(
                        "gamma",
                        gamma,
                        format!("skewness must satisfy |gamma| <= min(beta, 2 - beta) = {bound}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Total differential order (`1 + α` or `β`).
    pub fn order(&self) -> f64 {
        match *self {
            FracParams::OneSided { alpha } => 1.0 + alpha,
            FracParams::RieszFeller { beta, .. } => beta,
        }
    }

    /// The one-sided operator is the Riesz–Feller operator with
    /// `β = 1 + α`, `γ = 1 - α`.
    pub fn to_riesz_feller(&self) -> FracParams {
        match *self {
            FracParams::OneSided { alpha } => FracParams::RieszFeller {
                beta: 1.0 + alpha,
                gamma: 1.0 - alpha,
            },
            rf => rf,
        }
    }

    /// Weights `(a, b)` in `a·(left-sided) + b·(right-sided)`, where the
    /// left-sided operator has symbol `(iξ)^β` and the right-sided `(-iξ)^β`.
    pub fn side_coefficients(&self) -> (f64, f64) {
        match *self {
            FracParams::OneSided { .. } => (1.0, 0.0),
            FracParams::RieszFeller { beta, gamma } => riesz_feller_sides(beta, gamma),
        }
    }

    /// Normalized pair `(c1, c2) = d·(a, b)` with `d = 1/Γ(-β)`, the
    /// constants in front of the integral representation.
    pub fn integral_constants(&self) -> (f64, f64) {
        let (a, b) = self.side_coefficients();
        let d = 1.0 / gamma(-self.order());
        (a * d, b * d)
    }

    /// Continuous symbol; real part is `<= 0` for every `ξ`.
    pub fn exact_symbol(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match *self {
            FracParams::OneSided { alpha } => {
                Complex64::new(0.0, xi).powf(1.0 + alpha)
            }
            FracParams::RieszFeller { beta, gamma } => {
                let phase = -xi.signum() * gamma * PI / 2.0;
                -xi.abs().powf(beta) * Complex64::from_polar(1.0, phase)
            }
        }
    }

    /// The same multiplier written for the transform `∫ u e^{+iξx} dx`,
    /// i.e. `exact_symbol(-ξ)`. In this convention the Riesz–Feller symbol
    /// reads `-|ξ|^β exp(+i sign(ξ) γπ/2)`.
    pub fn exact_symbol_plus_convention(&self, xi: f64) -> Complex64 {
        self.exact_symbol(-xi)
    }

    /// Symbol of the discrete operator at spacing `dx`.
    pub fn discrete_symbol(&self, xi: f64, dx: f64) -> Complex64 {
        let (a, b) = self.side_coefficients();
        let left = shifted_gl_symbol(self.order(), xi * dx) * dx.powf(-self.order());
        a * left + b * left.conj()
    }
}

fn riesz_feller_sides(beta: f64, gamma: f64) -> (f64, f64) {
    let half = PI / 2.0;
    let sum = -(gamma * half).cos() / (beta * half).cos();
    let s = (beta * half).sin();
    // At β = 2 the skewness is forced to 0 and both sides carry half.
    let diff = if s.abs() < 1e-12 { 0.0 } else { (gamma * half).sin() / s };
    (0.5 * (sum + diff), 0.5 * (sum - diff))
}

/// `e^{iθ} (1 - e^{-iθ})^{order}`: the Grünwald–Letnikov generating function
/// shifted by one node, at `θ = ξ dx`.
pub fn shifted_gl_symbol(order: f64, theta: f64) -> Complex64 {
    let z = Complex64::new(1.0 - theta.cos(), theta.sin());
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(1.0, theta) * z.powf(order)
}

/// Coefficients of `(1 - z)^order`: `w_0 = 1`, `w_k = w_{k-1} (k - 1 - order)/k`.
pub fn grunwald_weights(order: f64, count: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(count);
    if count == 0 {
        return w;
    }
    w.push(1.0);
    for k in 1..count {
        let prev = w[k - 1];
        w.push(prev * (k as f64 - 1.0 - order) / k as f64);
    }
    w
}

/// Partial sums `S_m = Σ_{k<=m} w_k = (-1)^m binom(order - 1, m)`, by the
/// recurrence `S_m = S_{m-1} (m - order)/m` rather than by accumulation.
pub fn grunwald_partial_sums(order: f64, count: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(count);
    if count == 0 {
        return s;
    }
    s.push(1.0);
    for m in 1..count {
        let prev = s[m - 1];
        s.push(prev * (m as f64 - order) / m as f64);
    }
    s
}

/// Weights `(-1)^k binom(α+1, k)` of the one-sided operator of order `1 + α`.
pub fn gl_weights(alpha: f64, count: usize) -> Result<Vec<f64>> {
    Alpha::new(alpha)?;
    if count < 2 {
        return Err(FracError::param("count", count as f64, "need at least 2 weights"));
    }
    Ok(grunwald_weights(alpha + 1.0, count))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// `d_α = 1/Γ(1-α)`.
    OneSided { d_alpha: f64 },
    /// `c1`, `c2` and `d = 1/Γ(-β)`.
    RieszFeller { c1: f64, c2: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorWeights {
    pub params: FracParams,
    pub dx: f64,
    pub weights: Vec<f64>,
    pub normalization: Normalization,
}

impl OperatorWeights {
    pub fn new(params: FracParams, dx: f64, count: usize) -> Result<Self> {
        params.validate()?;
        if !(dx > 0.0) {
            return Err(FracError::param("dx", dx, "must be positive"));
        }
        let normalization = match params {
            FracParams::OneSided { alpha } => Normalization::OneSided {
                d_alpha: 1.0 / gamma(1.0 - alpha),
            },
            FracParams::RieszFeller { beta, .. } => {
                let (c1, c2) = params.integral_constants();
                Normalization::RieszFeller {
                    c1,
                    c2,
                    d: 1.0 / gamma(-beta),
                }
            }
        };
        Ok(OperatorWeights {
            params,
            dx,
            weights: grunwald_weights(params.order(), count.max(2)),
            normalization,
        })
    }

    /// `dx^{-order}`.
    pub fn scale(&self) -> f64 {
        self.dx.powf(-self.params.order())
    }
}

enum Plan {
    Periodic {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        /// `λ_j / n` for the left-sided operator.
        eig: Vec<Complex64>,
    },
    Truncated {
        conv: FftConvolver,
    },
}

/// A discrete operator bound to a grid, with its FFT plan precomputed.
pub struct DiscreteOperator {
    params: FracParams,
    grid: GridSpec,
    weights: OperatorWeights,
    sides: (f64, f64),
    plan: Plan,
}

impl std::fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("params", &self.params)
            .field("grid", &self.grid)
            .finish()
    }
}

impl DiscreteOperator {
    pub fn new(params: FracParams, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let n = grid.n;
        let weights = OperatorWeights::new(params, grid.dx, n + 1)?;
        let plan = if grid.is_periodic() {
            let mut planner = FftPlanner::new();
            let scale = weights.scale() / n as f64;
            let eig = (0..n)
                .map(|j| shifted_gl_symbol(params.order(), 2.0 * PI * j as f64 / n as f64) * scale)
                .collect();
            Plan::Periodic {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                eig,
            }
        } else {
            Plan::Truncated {
                conv: FftConvolver::new(&weights.weights, n + 1),
            }
        };
        Ok(DiscreteOperator {
            params,
            grid,
            sides: params.side_coefficients(),
            weights,
            plan,
        })
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &OperatorWeights {
        &self.weights
    }

    /// Upper bound on `|discrete symbol|`: `(|a|+|b|)·2^order·dx^{-order}`.
    pub fn symbol_bound(&self) -> f64 {
        let (a, b) = self.sides;
        (a.abs() + b.abs()) * 2f64.powf(self.params.order()) * self.weights.scale()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (l, r) = self.grid.pads().unwrap_or((0.0, 0.0));
        self.apply_padded(u, l, r)
    }

    pub fn apply_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let (l, r) = self.grid.pads().unwrap_or((0.0, 0.0));
        self.apply_adjoint_padded(u, l, r)
    }

    /// Applies the operator with explicit far-field values (ignored on
    /// periodic grids).
    pub fn apply_padded(&self, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let (a, b) = self.sides;
        self.combine(u, left, right, a, b)
    }

    /// The transpose: swaps the roles of the two sides.
    pub fn apply_adjoint_padded(&self, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let (a, b) = self.sides;
        self.combine(u, left, right, b, a)
    }

    fn combine(&self, u: &[f64], left: f64, right: f64, a: f64, b: f64) -> Vec<f64> {
        assert_eq!(u.len(), self.grid.n, "field length must match the grid");
        match &self.plan {
            Plan::Periodic {
                forward,
                inverse,
                eig,
            } => {
                let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                forward.process(&mut buf);
                for (c, l) in buf.iter_mut().zip(eig) {
                    *c *= a * l + b * l.conj();
                }
                inverse.process(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            }
            Plan::Truncated { conv } => {
                let h = self.weights.scale();
                let mut out = vec![0.0; u.len()];
                if a != 0.0 {
                    let left_part = self.left_sided(conv, u, left, right);
                    for (o, v) in out.iter_mut().zip(left_part) {
                        *o += a * h * v;
                    }
                }
                if b != 0.0 {
                    let right_part = self.right_sided(conv, u, left, right);
                    for (o, v) in out.iter_mut().zip(right_part) {
                        *o += b * h * v;
                    }
                }
                out
            }
        }
    }

    // Σ_k w_k u_{i+1-k}: subtracting the left pad makes the left memory
    // vanish; only the node just right of the window sees the right pad.
    fn left_sided(&self, conv: &FftConvolver, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let n = u.len();
        let mut v: Vec<f64> = u.iter().map(|x| x - left).collect();
        v.push(right - left);
        let c = conv.convolve(&v);
        (0..n).map(|i| c[i + 1]).collect()
    }

    // Σ_k w_k u_{i-1+k}, mirrored.
    fn right_sided(&self, conv: &FftConvolver, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let n = u.len();
        let mut r: Vec<f64> = u.iter().rev().map(|x| x - right).collect();
        r.push(left - right);
        let c = conv.convolve(&r);
        (0..n).map(|i| c[n - i]).collect()
    }
}

fn one_sided_params(params: FracParams) -> Result<FracParams> {
    match params {
        FracParams::OneSided { .. } => {
            params.validate()?;
            Ok(params)
        }
        FracParams::RieszFeller { .. } => Err(FracError::Unsupported(
            "expected one-sided parameters".into(),
        )),
    }
}

fn apply_field(u: &Field, op: &DiscreteOperator, adjoint: bool) -> Result<Field> {
    u.check_grid(op.grid())?;
    let values = if adjoint {
        op.apply_adjoint(&u.values)
    } else {
        op.apply(&u.values)
    };
    Field::at_time(*op.grid(), values, u.t)
}

/// `∂x D^α[u]` with left-sided memory.
pub fn apply_dx_caputo(u: &Field, params: FracParams, grid: &GridSpec) -> Result<Field> {
    let op = DiscreteOperator::new(one_sided_params(params)?, *grid)?;
    apply_field(u, &op, false)
}

/// The discrete transpose of [`apply_dx_caputo`] (right-sided memory).
pub fn apply_dx_caputo_adjoint(u: &Field, params: FracParams, grid: &GridSpec) -> Result<Field> {
    let op = DiscreteOperator::new(one_sided_params(params)?, *grid)?;
    apply_field(u, &op, true)
}

pub fn apply_riesz_feller(u: &Field, params: FracParams, grid: &GridSpec) -> Result<Field> {
    let params = params.to_riesz_feller();
    params.validate()?;
    let op = DiscreteOperator::new(params, *grid)?;
    apply_field(u, &op, false)
}

pub fn exact_symbol(xi: f64, params: FracParams) -> Complex64 {
    params.exact_symbol(xi)
}

/// Result of fitting `a·(iξ)^β + b·(-iξ)^β` to the target symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square misfit relative to the RMS of the target.
    pub residual: f64,
}

/// Least-squares fit of the side coefficients against
/// [`FracParams::exact_symbol`] on `samples` points of `[-xi_max, xi_max]`.
pub fn fit_side_coefficients(params: FracParams, xi_max: f64, samples: usize) -> Result<SideFit> {
    params.validate()?;
    let beta = params.order();
    let (mut m11, mut m12, mut m22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut rows = Vec::new();
    for j in 0..samples {
        let xi = -xi_max + 2.0 * xi_max * (j as f64 + 0.5) / samples as f64;
        let p = Complex64::new(0.0, xi).powf(beta);
        let q = Complex64::new(0.0, -xi).powf(beta);
        let t = params.exact_symbol(xi);
        m11 += p.norm_sqr();
        m22 += q.norm_sqr();
        m12 += (p.conj() * q).re;
        r1 += (p.conj() * t).re;
        r2 += (q.conj() * t).re;
        rows.push((p, q, t));
    }
    let det = m11 * m22 - m12 * m12;
    let (a, b) = if det.abs() <= 1e-12 * (m11 * m22) {
        // Both sides coincide (β = 2): split evenly.
        let s = r1 / m11;
        (0.5 * s, 0.5 * s)
    } else {
        ((m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det)
    };
    let (mut err, mut norm) = (0.0, 0.0);
    for (p, q, t) in rows {
        err += (a * p + b * q - t).norm_sqr();
        norm += t.norm_sqr();
    }
    Ok(SideFit {
        a,
        b,
        residual: (err / norm).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_weights_small_cases() {
        assert_eq!(gl_weights(0.5, 2).unwrap(), vec![1.0, -1.5]);
        let w = gl_weights(0.5, 4).unwrap();
        for (a, b) in w.iter().zip([1.0, -1.5, 0.375, 0.0625]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(gl_weights(0.5, 1).is_err());
        assert!(gl_weights(1.0, 4).is_err());
    }

    #[test]
    fn partial_sums_match_accumulation() {
        let w = grunwald_weights(1.3, 50);
        let s = grunwald_partial_sums(1.3, 50);
        let mut acc = 0.0;
        for m in 0..50 {
            acc += w[m];
            assert_abs_diff_eq!(acc, s[m], epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_symbol_values() {
        let p = FracParams::one_sided(0.5).unwrap();
        assert_eq!(p.exact_symbol(0.0), Complex64::new(0.0, 0.0));
        let s = p.exact_symbol(1.0);
        assert_abs_diff_eq!(s.re, -0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.im, 0.5f64.sqrt(), epsilon = 1e-14);
        for xi in [-3.0, -0.5, 0.7, 5.0] {
            let s = p.exact_symbol(xi);
            assert_abs_diff_eq!(s.re, -xi.abs().powf(1.5) * (PI / 4.0).sin(), epsilon = 1e-12);
            let rf = p.to_riesz_feller().exact_symbol(xi);
            assert_abs_diff_eq!((s - rf).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn side_coefficients_special_cases() {
        let (a, b) = FracParams::riesz_feller(1.5, 0.5).unwrap().side_coefficients();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-14);
        let (a, b) = FracParams::riesz_feller(2.0, 0.0).unwrap().side_coefficients();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-14);
        let (c1, c2) = FracParams::riesz_feller(1.2, -0.3).unwrap().integral_constants();
        assert!(c1 >= 0.0 && c2 >= 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FracParams::riesz_feller(1.0, 0.0).is_err());
        assert!(FracParams::riesz_feller(1.5, 0.6).is_err());
        assert!(FracParams::riesz_feller(2.1, 0.0).is_err());
        assert!(FracParams::one_sided(0.0).is_err());
    }

    #[test]
    fn truncated_constant_is_annihilated() {
        let g = GridSpec::truncated(-1.0, 1.0, 33, 2.5, 2.5).unwrap();
        let u = Field::constant(g, 2.5).unwrap();
        let p = FracParams::one_sided(0.4).unwrap();
        for out in [
            apply_dx_caputo(&u, p, &g).unwrap(),
            apply_dx_caputo_adjoint(&u, p, &g).unwrap(),
            apply_riesz_feller(&u, FracParams::riesz_feller(1.7, -0.2).unwrap(), &g).unwrap(),
        ] {
            assert!(out.values.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn truncated_matches_direct_sum() {
        let g = GridSpec::truncated(0.0, 1.0, 12, 1.0, -0.5).unwrap();
        let u = Field::from_fn(g, |x| (3.0 * x).cos()).unwrap();
        let p = FracParams::one_sided(0.3).unwrap();
        let w = grunwald_weights(1.3, 400);
        let h = g.dx.powf(-1.3);
        let out = apply_dx_caputo(&u, p, &g).unwrap();
        let adj = apply_dx_caputo_adjoint(&u, p, &g).unwrap();
        for i in 0..g.n {
            // Long explicit sums over the padded extension; the tail beyond
            // 400 weights is far below the tolerance.
            let tail = -grunwald_partial_sums(1.3, 400)[399];
            let d: f64 = (0..400)
                .map(|k| w[k] * u.extended(i as isize + 1 - k as isize))
                .sum::<f64>()
                + tail * 1.0;
            let da: f64 = (0..400)
                .map(|k| w[k] * u.extended(i as isize - 1 + k as isize))
                .sum::<f64>()
                + tail * -0.5;
            assert_abs_diff_eq!(out.values[i], h * d, epsilon = 1e-9 * h);
            assert_abs_diff_eq!(adj.values[i], h * da, epsilon = 1e-9 * h);
        }
    }

    #[test]
    fn periodic_discrete_symbol_matches_application() {
        let n = 32;
        let g = GridSpec::periodic(0.0, 2.0 * PI, n).unwrap();
        let p = FracParams::riesz_feller(1.6, 0.2).unwrap();
        let op = DiscreteOperator::new(p, g).unwrap();
        let xi = 3.0;
        let sym = p.discrete_symbol(xi, g.dx);
        let c: Vec<f64> = g.xs().iter().map(|x| (xi * x).cos()).collect();
        let s: Vec<f64> = g.xs().iter().map(|x| (xi * x).sin()).collect();
        let (lc, ls) = (op.apply(&c), op.apply(&s));
        for i in 0..n {
            // L[cos + i sin] = sym · e^{iξx}
            let lhs = Complex64::new(lc[i], ls[i]);
            let rhs = sym * Complex64::from_polar(1.0, xi * g.x(i));
            assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn side_fit_recovers_closed_form() {
        for (beta, gamma) in [(1.5, 0.5), (1.5, 0.0), (1.2, -0.3), (1.9, 0.05), (2.0, 0.0)] {
            let p = FracParams::riesz_feller(beta, gamma).unwrap();
            let fit = fit_side_coefficients(p, 8.0, 400).unwrap();
            let (a, b) = p.side_coefficients();
            assert!(fit.residual < 1e-6, "{beta} {gamma}: {}", fit.residual);
            assert_abs_diff_eq!(fit.a, a, epsilon = 1e-8);
            assert_abs_diff_eq!(fit.b, b, epsilon = 1e-8);
        }
    }
}
