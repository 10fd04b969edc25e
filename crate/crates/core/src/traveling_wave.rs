//! Traveling waves `u(t, x) = φ(x - ct)` of the viscous problem with the
//! one-sided operator: `h(φ) = ε D^α φ`, `φ(∓∞) = φ_∓`, with
//! `h(φ) = -c(φ - φ_-) + f(φ) - f(φ_-)` and `c` the Rankine–Hugoniot speed.
//!
//! `D^α φ(ξ) = d_{α+1} ∫_{-∞}^0 (φ(ξ+z) - φ(ξ)) |z|^{-1-α} dz` is discretised
//! by the difference form of the Grünwald weights of order α,
//! `dx^{-α} Σ_{k>=1} g_k (φ_{i-k} - φ_i)` (`Σ g_k = 0`). Memory runs to the
//! left only, so the discrete problem is a Volterra system: the right pad
//! never enters, and left of the window the profile is continued by the
//! discrete exponential mode `φ_- - A ρ^{-j}`, `ρ = 1 - λ_ε dx`, which solves
//! the linearised equation exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::experiments::fit::{linear_fit, LinearFit};
use crate::flux::{FluxFn, FluxSpec};
use crate::fractional_ops::{grunwald_weights, Alpha};
use crate::grid::{Field, GridSpec};
use crate::par::{self, Execution};
use crate::special::FftConvolver;

pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 60;
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeftClosure {
    /// Continue by the discrete exponential tail mode.
    #[default]
    Exponential,
    /// Continue by the constant `φ_-` (needs a wider window).
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TWSpec {
    pub flux: FluxSpec,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub epsilon: f64,
    pub alpha: Alpha,
    pub grid: GridSpec,
    #[serde(default)]
    pub left_closure: LeftClosure,
}

/// Sizing knobs for [`TWSpec::auto`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    /// `λ_ε dx`.
    pub lambda_dx: f64,
    /// Left edge where the left tail has decayed to this fraction of `φ_- - φ_+`.
    pub left_decay: f64,
    /// Right edge in units of `ε^{1/α}` (the natural length of the problem).
    pub right_extent: f64,
}

impl Default for WindowPlan {
    fn default() -> Self {
        WindowPlan {
            lambda_dx: 0.025,
            left_decay: 1e-10,
            right_extent: 2000.0,
        }
    }
}

impl TWSpec {
    pub fn new(
        flux: FluxSpec,
        phi_minus: f64,
        phi_plus: f64,
        epsilon: f64,
        alpha: f64,
        grid: GridSpec,
    ) -> Result<Self> {
        let spec = TWSpec {
            flux,
            phi_minus,
            phi_plus,
            epsilon,
            alpha: Alpha::new(alpha)?,
            grid,
            left_closure: LeftClosure::Exponential,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Window with `ξ = 0` on a node, sized by `plan`.
    pub fn auto(flux: FluxSpec, phi_minus: f64, phi_plus: f64, epsilon: f64, alpha: f64, plan: WindowPlan) -> Result<Self> {
        let probe = TWSpec {
            flux,
            phi_minus,
            phi_plus,
            epsilon,
            alpha: Alpha::new(alpha)?,
            grid: GridSpec::truncated(-1.0, 1.0, 8, phi_minus, phi_plus)?,
            left_closure: LeftClosure::Exponential,
        };
        probe.validate_states()?;
        if !(plan.lambda_dx > 0.0 && plan.lambda_dx < 0.5) {
            return Err(FracError::param("lambda_dx", plan.lambda_dx, "must lie in (0, 0.5)"));
        }
        let lambda = probe.lambda();
        let dx = plan.lambda_dx / lambda;
        let left = (plan.left_decay.ln().abs() + 1.0) / lambda;
        let right = plan.right_extent * epsilon.powf(1.0 / alpha);
        let (nl, nr) = ((left / dx).ceil() as usize, (right / dx).ceil() as usize);
        let grid = GridSpec::truncated(-(nl as f64) * dx, nr as f64 * dx, nl + nr + 1, phi_minus, phi_plus)?;
        TWSpec::new(flux, phi_minus, phi_plus, epsilon, alpha, grid)
    }

    fn validate_states(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(FracError::param("epsilon", self.epsilon, "must be positive"));
        }
        if !(self.phi_minus > self.phi_plus) {
            return Err(FracError::param("phi_minus", self.phi_minus, "must exceed phi_plus"));
        }
        let f = self.flux.build();
        f.require_convex(self.phi_plus, self.phi_minus)?;
        let (hm, hp) = (self.h_prime(self.phi_minus), self.h_prime(self.phi_plus));
        if !(hm > 0.0 && hp < 0.0) {
            return Err(FracError::param(
                "flux",
                hm,
                format!("need h'(phi_-) > 0 > h'(phi_+), got {hm} and {hp} (flux not genuinely nonlinear here)"),
            ));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_states()?;
        self.grid.validate()?;
        match self.grid.pads() {
            Some((l, r)) if l == self.phi_minus && r == self.phi_plus => {}
            _ => {
                return Err(FracError::Config(
                    "traveling-wave grid must be a truncated line with pads (phi_minus, phi_plus)".into(),
                ))
            }
        }
        if self.left_closure == LeftClosure::Exponential && self.lambda() * self.grid.dx >= 1.0 {
            return Err(FracError::UnderResolved {
                dx: self.grid.dx,
                required_dx: 1.0 / self.lambda(),
            });
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        let f = self.flux.build();
        (f.f(self.phi_plus) - f.f(self.phi_minus)) / (self.phi_plus - self.phi_minus)
    }

    pub fn h(&self, phi: f64) -> f64 {
        let f = self.flux.build();
        -self.speed() * (phi - self.phi_minus) + f.f(phi) - f.f(self.phi_minus)
    }

    pub fn h_prime(&self, phi: f64) -> f64 {
        self.flux.build().f_prime(phi) - self.speed()
    }

    /// `λ_ε = (h'(φ_-)/ε)^{1/α}`.
    pub fn lambda(&self) -> f64 {
        (self.h_prime(self.phi_minus) / self.epsilon).powf(1.0 / self.alpha.get())
    }

    /// `μ = h'(φ_+)/ε`, the rate in the right-tail equation `D^α W = μ W`.
    pub fn mu(&self) -> f64 {
        self.h_prime(self.phi_plus) / self.epsilon
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.phi_minus + self.phi_plus)
    }

    fn anchor_index(&self) -> usize {
        self.grid.nearest_index(0.0)
    }
}

/// Rankine–Hugoniot speed for states `phi_minus ≠ phi_plus`.
pub fn wave_speed(flux: &FluxFn, phi_minus: f64, phi_plus: f64) -> Result<f64> {
    if phi_minus == phi_plus || !phi_minus.is_finite() || !phi_plus.is_finite() {
        return Err(FracError::param("phi_plus", phi_plus, "states must be finite and distinct"));
    }
    Ok((flux.f(phi_plus) - flux.f(phi_minus)) / (phi_plus - phi_minus))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TWProfile {
    pub spec: TWSpec,
    pub values: Vec<f64>,
    /// Max residual over all rows except the one replaced by the phase condition.
    pub residual_norm: f64,
    /// `|h(φ_0) - ε D^α φ_0|` at the first node, where the exponential
    /// closure is exact only for the linearised equation.
    pub closure_defect: f64,
    /// `ξ` where the profile crosses the midpoint.
    pub phase_anchor: f64,
    pub iterations: usize,
}

/// Precomputed discrete operator for one spec.
struct Operator {
    /// `ε dx^{-α}`.
    scale: f64,
    g: Vec<f64>,
    /// `T_i = Σ_{m>=1} g_{i+m} ρ^m` (zero for the constant closure).
    tail: Vec<f64>,
}

impl Operator {
    fn new(spec: &TWSpec) -> Self {
        let n = spec.grid.n;
        let alpha = spec.alpha.get();
        let dx = spec.grid.dx;
        let scale = spec.epsilon * dx.powf(-alpha);
        let tail = match spec.left_closure {
            LeftClosure::Constant => vec![0.0; n],
            LeftClosure::Exponential => {
                let rho = 1.0 - spec.lambda() * dx;
                // Direct sum far out, then T_{i-1} = ρ (g_i + T_i) downwards.
                let extra = ((40.0 / (1.0 - rho)).ceil() as usize).max(64);
                let g = grunwald_weights(alpha, n + extra + 1);
                let mut t_last = 0.0;
                let mut p = rho;
                for m in 1..=extra {
                    t_last += g[n - 1 + m] * p;
                    p *= rho;
                }
                let mut tail = vec![0.0; n];
                tail[n - 1] = t_last;
                for i in (1..n).rev() {
                    tail[i - 1] = rho * (g[i] + tail[i]);
                }
                tail
            }
        };
        Operator {
            scale,
            g: grunwald_weights(alpha, n),
            tail,
        }
    }

    /// `ε D^α φ_i` from deviations `u = φ - φ_-`, with `A = -u_0`.
    fn apply_row(&self, u: &[f64], i: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..=i {
            s += self.g[k] * u[i - k];
        }
        self.scale * (s + u[0] * self.tail[i])
    }
}

/// Discrete residual `h(φ_i) - ε D^α φ_i` for every node.
pub fn residual(spec: &TWSpec, values: &[f64], exec: Execution) -> Result<Vec<f64>> {
    spec.validate()?;
    if values.len() != spec.grid.n {
        return Err(FracError::GridMismatch {
            expected: spec.grid.n,
            found: values.len(),
        });
    }
    let op = Operator::new(spec);
    Ok(residual_with(spec, &op, values, exec))
}

fn residual_with(spec: &TWSpec, op: &Operator, values: &[f64], exec: Execution) -> Vec<f64> {
    let u: Vec<f64> = values.iter().map(|v| v - spec.phi_minus).collect();
    par::map_range(values.len(), exec, |i| spec.h(values[i]) - op.apply_row(&u, i))
}

/// Same residual through one FFT convolution (used inside the iteration;
/// the reported norm always comes from [`residual_with`]).
fn residual_fft(spec: &TWSpec, op: &Operator, conv: &FftConvolver, values: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = values.iter().map(|v| v - spec.phi_minus).collect();
    let c = conv.convolve(&u);
    (0..values.len())
        .map(|i| spec.h(values[i]) - op.scale * (c[i] + u[0] * op.tail[i]))
        .collect()
}

/// Solves `x_i = (b_i + s Σ_{1<=j<i} g_{i-j} x_j) / d_i` for `i >= 1`
/// (`x_0` given) by divide and conquer with FFT block products.
struct March<'a> {
    g: &'a [f64],
    scale: f64,
    diag: &'a [f64],
    convolvers: HashMap<(usize, usize), FftConvolver>,
}

const LEAF: usize = 96;

impl March<'_> {
    fn solve(&mut self, acc: &mut [Vec<f64>], x: &mut [Vec<f64>]) {
        let n = self.diag.len();
        self.rec(acc, x, 1, n);
    }

    fn rec(&mut self, acc: &mut [Vec<f64>], x: &mut [Vec<f64>], l: usize, r: usize) {
        if r - l <= LEAF {
            for i in l..r {
                for (a, xv) in acc.iter_mut().zip(x.iter_mut()) {
                    xv[i] = a[i] / self.diag[i];
                    let xi = xv[i];
                    for (ak, gk) in a[i + 1..r].iter_mut().zip(&self.g[1..]) {
                        *ak += self.scale * gk * xi;
                    }
                }
            }
            return;
        }
        let m = (l + r) / 2;
        self.rec(acc, x, l, m);
        let g = self.g;
        let conv = self
            .convolvers
            .entry((m - l, r - l))
            .or_insert_with(|| FftConvolver::new(&g[..r - l], m - l));
        for (a, xv) in acc.iter_mut().zip(x.iter()) {
            let c = conv.convolve(&xv[l..m]);
            for i in m..r {
                a[i] += self.scale * c[i - l];
            }
        }
        self.rec(acc, x, m, r);
    }
}

fn initial_guess(spec: &TWSpec) -> Vec<f64> {
    let (lam, a) = (spec.lambda(), spec.alpha.get());
    let d = spec.phi_minus - spec.phi_plus;
    spec.grid
        .xs()
        .into_iter()
        .map(|xi| {
            let shape = if xi <= 0.0 {
                1.0 - 0.5 * (lam * xi).exp()
            } else {
                0.5 * (1.0 + lam * xi).powf(-a)
            };
            spec.phi_plus + d * shape
        })
        .collect()
}

fn merit(r: &[f64], values: &[f64], anchor: usize, mid: f64) -> f64 {
    r.iter()
        .skip(1)
        .fold((values[anchor] - mid).abs(), |m, v| m.max(v.abs()))
}

/// Damped Newton on the discrete profile equation, with the first row
/// replaced by the phase condition `φ(0) = (φ_- + φ_+)/2`.
pub fn solve_profile(spec: &TWSpec) -> Result<TWProfile> {
    solve_profile_exec(spec, Execution::default())
}

pub fn solve_profile_exec(spec: &TWSpec, exec: Execution) -> Result<TWProfile> {
    spec.validate()?;
    let n = spec.grid.n;
    let anchor = spec.anchor_index();
    if anchor == 0 || anchor + 1 >= n {
        return Err(FracError::Config("traveling-wave window must contain xi = 0 in its interior".into()));
    }
    let mid = spec.midpoint();
    let flux = spec.flux.build();
    let op = Operator::new(spec);
    let full = FftConvolver::new(&op.g, n);
    let mut phi = initial_guess(spec);
    let mut r = residual_fft(spec, &op, &full, &phi);
    let mut m = merit(&r, &phi, anchor, mid);
    let mut convolvers = HashMap::new();
    let mut iterations = 0;
    while m >= 0.1 * RESIDUAL_TOL {
        if iterations == MAX_NEWTON {
            return Err(FracError::NewtonStagnation { iterations, residual: m });
        }
        iterations += 1;
        // Rows i >= 1 of J δ = -R; column 0 carries g_i + T_i.
        let diag: Vec<f64> = phi
            .iter()
            .enumerate()
            .map(|(i, &p)| if i == 0 { 1.0 } else { flux.f_prime(p) - spec.speed() - op.scale * op.g[0] })
            .collect();
        let mut acc = vec![vec![0.0; n], vec![0.0; n]];
        for i in 1..n {
            acc[0][i] = -r[i];
            acc[1][i] = op.scale * (op.g[i] + op.tail[i]);
        }
        let mut x = vec![vec![0.0; n], vec![0.0; n]];
        x[1][0] = 1.0;
        let mut march = March {
            g: &op.g,
            scale: op.scale,
            diag: &diag,
            convolvers: std::mem::take(&mut convolvers),
        };
        march.solve(&mut acc, &mut x);
        convolvers = march.convolvers;
        let (p, q) = (&x[0], &x[1]);
        if q[anchor].abs() < 1e-300 {
            return Err(FracError::NewtonStagnation { iterations, residual: m });
        }
        let s = (mid - phi[anchor] - p[anchor]) / q[anchor];
        let delta: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + s * b).collect();

        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let rt = residual_fft(spec, &op, &full, &trial);
            let mt = merit(&rt, &trial, anchor, mid);
            if mt.is_finite() && (mt < (1.0 - 1e-4 * step) * m || mt < 0.1 * RESIDUAL_TOL) {
                phi = trial;
                r = rt;
                m = mt;
                break;
            }
            step *= 0.5;
            if step < 1e-6 {
                return Err(FracError::NewtonStagnation { iterations, residual: m });
            }
        }
    }
    let r = residual_with(spec, &op, &phi, exec);
    let residual_norm = r.iter().skip(1).fold(0.0_f64, |a, v| a.max(v.abs()));
    if residual_norm >= RESIDUAL_TOL {
        return Err(FracError::NewtonStagnation { iterations, residual: residual_norm });
    }
    if let Some(index) = (0..n).find(|&i| {
        phi[i] > spec.phi_minus + MONOTONE_SLACK
            || phi[i] < spec.phi_plus - MONOTONE_SLACK
            || (i > 0 && phi[i] > phi[i - 1] + MONOTONE_SLACK)
    }) {
        return Err(FracError::NonMonotoneProfile { index });
    }
    let phase_anchor = crossing(&spec.grid, &phi, mid);
    Ok(TWProfile {
        spec: *spec,
        values: phi,
        residual_norm,
        closure_defect: r[0].abs(),
        phase_anchor,
        iterations,
    })
}

fn crossing(grid: &GridSpec, v: &[f64], level: f64) -> f64 {
    match v.iter().position(|&x| x < level) {
        Some(0) => grid.x0,
        Some(i) => {
            let (x0, x1) = (grid.x(i - 1), grid.x(i));
            x0 + (v[i - 1] - level) / (v[i - 1] - v[i]) * (x1 - x0)
        }
        None => grid.x_last(),
    }
}

impl TWProfile {
    pub fn xi(&self) -> Vec<f64> {
        self.spec.grid.xs()
    }

    pub fn field(&self) -> Result<Field> {
        Field::new(self.spec.grid, self.values.clone())
    }

    /// `φ(ξ)`: cubic interpolation inside the window, the closure mode to
    /// the left, the last value to the right.
    pub fn eval(&self, xi: f64) -> f64 {
        let g = &self.spec.grid;
        let v = &self.values;
        let n = v.len();
        let s = (xi - g.x0) / g.dx;
        if s <= 0.0 {
            return match self.spec.left_closure {
                LeftClosure::Exponential => {
                    let rho = 1.0 - self.spec.lambda() * g.dx;
                    self.spec.phi_minus - (self.spec.phi_minus - v[0]) * rho.powf(-s)
                }
                LeftClosure::Constant => v[0],
            };
        }
        if s >= (n - 1) as f64 {
            return v[n - 1];
        }
        let i = (s.floor() as usize).clamp(1, n - 3);
        let t = s - i as f64;
        let (p0, p1, p2, p3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
        // Cubic Lagrange through i-1..i+2.
        p1 + t * (0.5 * (p2 - p0) + t * (p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3 + t * 0.5 * (3.0 * (p1 - p2) + p3 - p0)))
    }

    /// Mean of `(φ - φ_+) ξ^α` over the nodes in `[xi_lo, xi_hi]`.
    pub fn tail_amplitude(&self, xi_lo: f64, xi_hi: f64) -> Result<f64> {
        let g = &self.spec.grid;
        let a = self.spec.alpha.get();
        let v: Vec<f64> = (0..g.n)
            .filter(|&i| g.x(i) >= xi_lo && g.x(i) <= xi_hi && g.x(i) > 0.0)
            .map(|i| (self.values[i] - self.spec.phi_plus) * g.x(i).powf(a))
            .collect();
        if v.is_empty() {
            return Err(FracError::InsufficientTail {
                side: "right",
                detail: format!("no nodes in [{xi_lo}, {xi_hi}]; window ends at {}", g.x_last()),
            });
        }
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }

    /// `φ_- - φ` and `φ - φ_+` on the grid.
    pub fn tails(&self) -> (Vec<f64>, Vec<f64>) {
        let s = &self.spec;
        (
            self.values.iter().map(|v| s.phi_minus - v).collect(),
            self.values.iter().map(|v| v - s.phi_plus).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Slope of `log(φ_- - φ)` against `ξ` (expected `λ_ε`).
    pub lambda_fit: f64,
    /// Minus the slope of `log(φ - φ_+)` against `log ξ` (expected `α`).
    pub alpha_fit: f64,
    pub lambda_theory: f64,
    pub left_window: (f64, f64),
    pub right_window: (f64, f64),
    /// Mean of `(φ - φ_+) ξ^α` over the right window.
    pub right_amplitude: f64,
    pub left_r_squared: f64,
    pub right_r_squared: f64,
}

/// Longest run of consecutive local slopes within `tol` (relative) of the
/// run's mean, anchored at the end given by `from_end`.
fn stationary_run(slopes: &[f64], tol: f64, from_end: bool) -> usize {
    let n = slopes.len();
    let mut best = 0;
    for len in 1..=n {
        let run: Vec<f64> = if from_end {
            slopes[n - len..].to_vec()
        } else {
            slopes[..len].to_vec()
        };
        let mean = run.iter().sum::<f64>() / len as f64;
        if run.iter().all(|s| (s - mean).abs() <= tol * mean.abs()) {
            best = len;
        }
    }
    best
}

/// Local slopes of `pts` over sliding windows of `w` points.
fn local_slopes(pts: &[(f64, f64)], w: usize) -> Vec<f64> {
    pts.windows(w)
        .filter_map(|win| linear_fit(win).map(|f| f.slope))
        .collect()
}

fn fit_run(pts: &[(f64, f64)], w: usize, run: usize, from_end: bool) -> Option<(LinearFit, f64, f64)> {
    let m = pts.len();
    let span = run + w - 1;
    let sel = if from_end { &pts[m - span..] } else { &pts[..span] };
    let fit = linear_fit(sel)?;
    Some((fit, sel[0].0, sel[sel.len() - 1].0))
}

/// Tail rates with fit windows chosen where the local slope is stationary
/// within 5%. Needs a decade of decay on the left and a decade of `ξ` on
/// the right.
pub fn tail_exponents(profile: &TWProfile) -> Result<TailFit> {
    let s = &profile.spec;
    let xs = profile.xi();
    let (left, right) = profile.tails();
    let d = s.phi_minus - s.phi_plus;
    let lam = s.lambda();
    let alpha = s.alpha.get();
    // Resolution floor of the Newton solve relative to the jump.
    let floor = 1e-9 * d;

    // Left: log(φ_- - φ) against ξ, sampled every ~0.05/λ.
    let stride = ((0.05 / (lam * s.grid.dx)).round() as usize).max(1);
    let lpts: Vec<(f64, f64)> = (0..xs.len())
        .step_by(stride)
        .filter(|&i| xs[i] < 0.0 && left[i] > floor && left[i] < 0.1 * d)
        .map(|i| (xs[i], left[i].ln()))
        .collect();
    let decades = |p: &[(f64, f64)]| {
        if p.len() < 2 {
            0.0
        } else {
            (p[p.len() - 1].1 - p[0].1).abs() / std::f64::consts::LN_10
        }
    };
    if decades(&lpts) < 1.0 {
        return Err(FracError::InsufficientTail {
            side: "left",
            detail: format!(
                "{:.2} decades of decay inside the window; extend the left edge to about {:.1}",
                decades(&lpts),
                -(1e9f64.ln() + 1.0) / lam
            ),
        });
    }
    let w = (lpts.len() / 10).max(3);
    let slopes = local_slopes(&lpts, w);
    let run = stationary_run(&slopes, 0.05, false).max(1);
    let (lfit, l0, l1) = fit_run(&lpts, w, run, false).ok_or_else(|| FracError::InsufficientTail {
        side: "left",
        detail: "degenerate fit".into(),
    })?;

    // Right: log(φ - φ_+) against log ξ on log-spaced nodes.
    let x_min = 1.0 / lam;
    let x_max = xs[xs.len() - 1];
    if x_max < 10.0 * x_min {
        return Err(FracError::InsufficientTail {
            side: "right",
            detail: format!(
                "window ends at {x_max:.3}; need at least {:.3} (one decade past 1/lambda)",
                10.0 * x_min
            ),
        });
    }
    let per_decade = 40.0;
    let count = ((x_max / x_min).log10() * per_decade) as usize;
    let mut idx: Vec<usize> = (0..=count)
        .map(|k| s.grid.nearest_index(x_min * 10f64.powf(k as f64 / per_decade)))
        .collect();
    idx.dedup();
    let rpts: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| xs[i] > 0.0 && right[i] > floor)
        .map(|&i| (xs[i].ln(), right[i].ln()))
        .collect();
    let w = (per_decade as usize / 2).min(rpts.len().max(3) - 1).max(3);
    let slopes = local_slopes(&rpts, w);
    let run = stationary_run(&slopes, 0.05, true).max(1);
    let (rfit, r0, r1) = fit_run(&rpts, w, run, true).ok_or_else(|| FracError::InsufficientTail {
        side: "right",
        detail: "degenerate fit".into(),
    })?;
    let (r0, r1) = (r0.exp(), r1.exp());
    let amp: Vec<f64> = (0..xs.len())
        .filter(|&i| xs[i] >= r0 && xs[i] <= r1)
        .map(|i| right[i] * xs[i].powf(alpha))
        .collect();
    let right_amplitude = amp.iter().sum::<f64>() / amp.len().max(1) as f64;
    Ok(TailFit {
        lambda_fit: lfit.slope,
        alpha_fit: -rfit.slope,
        lambda_theory: lam,
        left_window: (l0, l1),
        right_window: (r0, r1),
        right_amplitude,
        left_r_squared: lfit.r_squared,
        right_r_squared: rfit.r_squared,
    })
}

/// The converged profile transported to another viscosity through
/// `φ_ε(ξ) = φ_1(ξ / ε^{1/α})`.
pub fn rescaled(profile: &TWProfile, epsilon: f64, xi: f64) -> f64 {
    let s = &profile.spec;
    let k = (epsilon / s.epsilon).powf(1.0 / s.alpha.get());
    profile.eval(xi / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speeds() {
        let b = FluxFn::burgers();
        assert_eq!(wave_speed(&b, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(wave_speed(&b, 1.0, -1.0).unwrap(), 0.0);
        assert_eq!(wave_speed(&FluxSpec::Quartic.build(), 1.0, 0.0).unwrap(), 1.0);
        assert!(wave_speed(&b, 0.3, 0.3).is_err());
    }

    #[test]
    fn march_matches_direct_forward_substitution() {
        let n = 700;
        let g = grunwald_weights(0.4, n);
        let diag: Vec<f64> = (0..n).map(|i| -3.0 - (i as f64 * 0.01).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64 - 6.0) * 0.1).collect();
        let scale = 2.5;
        let mut direct = vec![0.0; n];
        for i in 1..n {
            let s: f64 = (1..i).map(|j| g[i - j] * direct[j]).sum();
            direct[i] = (b[i] + scale * s) / diag[i];
        }
        let mut acc = vec![b.clone()];
        let mut x = vec![vec![0.0; n]];
        let mut m = March { g: &g, scale, diag: &diag, convolvers: HashMap::new() };
        m.solve(&mut acc, &mut x);
        let err = direct.iter().zip(&x[0]).fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn tail_sum_recurrence() {
        let spec = TWSpec::auto(FluxSpec::Burgers, 1.0, 0.0, 1.0, 0.5, WindowPlan { right_extent: 5.0, ..Default::default() }).unwrap();
        let op = Operator::new(&spec);
        let rho = 1.0 - spec.lambda() * spec.grid.dx;
        // T_0 = (1 - ρ)^α - 1 in closed form.
        assert!((op.tail[0] - ((1.0 - rho).powf(0.5) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_states() {
        let g = GridSpec::truncated(-1.0, 1.0, 11, 0.0, 1.0).unwrap();
        assert!(TWSpec::new(FluxSpec::Burgers, 0.0, 1.0, 1.0, 0.5, g).is_err());
        let g = GridSpec::truncated(-1.0, 1.0, 11, 1.0, 0.0).unwrap();
        assert!(TWSpec::new(FluxSpec::Linear { speed: 1.0 }, 1.0, 0.0, 1.0, 0.5, g).is_err());
        assert!(TWSpec::new(FluxSpec::Burgers, 1.0, 0.0, 1.0, 0.5, g).is_ok());
        let g = GridSpec::truncated(-1.0, 1.0, 11, 1.0, 0.5).unwrap();
        assert!(TWSpec::new(FluxSpec::Burgers, 1.0, 0.0, 1.0, 0.5, g).is_err());
    }
}
