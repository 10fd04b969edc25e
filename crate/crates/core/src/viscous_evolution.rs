//! The viscous problem `∂t u + ∂x f(u) = ε L[u]` for a fractional operator
//! `L` (one-sided `∂x D^α` or Riesz–Feller), and the reports that check the
//! maximum principle, L1 contraction and the viscous entropy inequality.
//!
//! Three solvers:
//! * method of lines — local Lax–Friedrichs flux differencing plus the
//!   discrete operator, Heun (SSP-RK2) in time under a CFL restriction that
//!   makes every Euler stage monotone;
//! * mild fixed point — Picard iteration of the Duhamel formula on periodic
//!   grids, with the semigroup applied exactly in Fourier space and the flux
//!   term integrated by linear product integration;
//! * kernel splitting — a Godunov step followed by convolution with the
//!   cell-integrated kernel `K(ε dt)` on truncated grids. Both halves are
//!   monotone and the step is limited by the hyperbolic CFL alone, which is
//!   what makes fine vanishing-viscosity sweeps affordable.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::flux::{EntropyPair, FluxFn, FluxSpec};
use crate::fractional_ops::{grunwald_partial_sums, DiscreteOperator, FracParams};
use crate::grid::{Field, GridSpec};
use crate::par::{self, Execution};
use crate::entropy_reference::godunov_flux;
use crate::semigroup_kernel::{cell_weights, peak_bound, unit_profile};
use crate::special::FftConvolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    MethodOfLines,
    MildFixedPoint,
    KernelSplitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub epsilon: f64,
    pub t_end: f64,
    pub cfl: f64,
    #[serde(default)]
    pub scheme: Scheme,
    pub grid: GridSpec,
    pub params: FracParams,
    pub flux: FluxSpec,
    /// Fixed step; `None` uses the largest stable one.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Extra output times in `(0, t_end)`; `t = 0` and `t_end` are always kept.
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub record_every_step: bool,
}

impl EvolutionConfig {
    pub fn new(grid: GridSpec, params: FracParams, flux: FluxSpec, epsilon: f64, t_end: f64) -> Self {
        EvolutionConfig {
            epsilon,
            t_end,
            cfl: 0.45,
            scheme: Scheme::MethodOfLines,
            grid,
            params,
            flux,
            dt: None,
            output_times: Vec::new(),
            record_every_step: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(FracError::param("epsilon", self.epsilon, "must be >= 0"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(FracError::param("t_end", self.t_end, "must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(FracError::param("cfl", self.cfl, "must lie in (0, 1)"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(FracError::param("dt", dt, "must be positive"));
            }
        }
        self.grid.validate()?;
        self.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub frames: Vec<Field>,
    /// Nominal step (the last step of each output interval may be shorter).
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.frames.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    /// Frame whose time is closest to `t`.
    pub fn at(&self, t: f64) -> &Field {
        self.frames
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory is never empty")
    }
}

/// Stable step for the method of lines:
/// `cfl / (max|f'|/dx + ε·max|symbol|)`, which is below
/// `cfl·min(dx/max|f'|, 1/(ε·max|symbol|))`.
pub fn stable_dt(config: &EvolutionConfig, r0: f64, op: &DiscreteOperator) -> f64 {
    let flux = config.flux.build();
    let a = flux.max_speed(-r0, r0);
    let rate = a / config.grid.dx + config.epsilon * op.symbol_bound();
    if rate > 0.0 {
        config.cfl / rate
    } else {
        config.t_end
    }
}

fn compatible(u0: &Field, grid: &GridSpec) -> Result<()> {
    u0.check_grid(grid)?;
    let g = &u0.grid;
    if g.x0 != grid.x0 || g.dx != grid.dx || g.is_periodic() != grid.is_periodic() {
        return Err(FracError::Config(
            "initial data lives on a different grid than the configuration".into(),
        ));
    }
    Ok(())
}

fn output_schedule(config: &EvolutionConfig) -> Vec<f64> {
    let mut ts: Vec<f64> = config
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < config.t_end)
        .collect();
    ts.push(config.t_end);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub fn evolve(u0: &Field, config: &EvolutionConfig) -> Result<Trajectory> {
    config.validate()?;
    compatible(u0, &config.grid)?;
    match config.scheme {
        Scheme::MethodOfLines => evolve_mol(u0, config),
        Scheme::MildFixedPoint => evolve_mild(u0, config),
        Scheme::KernelSplitting => evolve_split(u0, config),
    }
}

struct MolRhs {
    flux: FluxFn,
    op: DiscreteOperator,
    epsilon: f64,
    pads: Option<(f64, f64)>,
    dx: f64,
}

impl MolRhs {
    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let ext = |i: isize| -> f64 {
            match self.pads {
                None => u[i.rem_euclid(n as isize) as usize],
                Some((l, r)) => {
                    if i < 0 {
                        l
                    } else if i >= n as isize {
                        r
                    } else {
                        u[i as usize]
                    }
                }
            }
        };
        // Interface fluxes F_{i-1/2} for i in 0..=n.
        let fluxes: Vec<f64> = (0..=n as isize)
            .map(|i| {
                let (a, b) = (ext(i - 1), ext(i));
                let s = self.flux.f_prime(a).abs().max(self.flux.f_prime(b).abs());
                0.5 * (self.flux.f(a) + self.flux.f(b)) - 0.5 * s * (b - a)
            })
            .collect();
        let mut rhs: Vec<f64> = (0..n).map(|i| -(fluxes[i + 1] - fluxes[i]) / self.dx).collect();
        if self.epsilon != 0.0 {
            let d = self.op.apply(u);
            for (r, v) in rhs.iter_mut().zip(d) {
                *r += self.epsilon * v;
            }
        }
        rhs
    }
}

fn evolve_mol(u0: &Field, config: &EvolutionConfig) -> Result<Trajectory> {
    let grid = u0.grid;
    let flux = config.flux.build();
    let r0 = u0.sup_norm();
    flux.validate_on(-r0.max(1e-12), r0.max(1e-12))?;
    let op = DiscreteOperator::new(config.params, grid)?;
    let limit = stable_dt(config, r0, &op);
    let dt = match config.dt {
        Some(dt) if dt > limit * (1.0 + 1e-12) => {
            return Err(FracError::CflViolation { dt, limit })
        }
        Some(dt) => dt,
        None => limit,
    };
    let rhs = MolRhs {
        flux,
        op,
        epsilon: config.epsilon,
        pads: grid.pads(),
        dx: grid.dx,
    };
    let mut frames = vec![u0.clone()];
    let mut u = u0.values.clone();
    let mut t = u0.t;
    let t_start = u0.t;
    let mut steps = 0;
    for target in output_schedule(config) {
        let target = t_start + target;
        while t < target - 1e-12 * target.abs().max(1.0) {
            let h = dt.min(target - t);
            let k1 = rhs.eval(&u);
            let u1: Vec<f64> = u.iter().zip(&k1).map(|(a, k)| a + h * k).collect();
            let k2 = rhs.eval(&u1);
            for ((ui, a), k) in u.iter_mut().zip(&u1).zip(&k2) {
                *ui = 0.5 * *ui + 0.5 * (a + h * k);
            }
            t = if target - t <= dt { target } else { t + h };
            steps += 1;
            if let Some(index) = u.iter().position(|v| !v.is_finite()) {
                return Err(FracError::NonFinite { index });
            }
            if config.record_every_step && t < target {
                frames.push(Field::at_time(grid, u.clone(), t)?);
            }
        }
        frames.push(Field::at_time(grid, u.clone(), t)?);
    }
    Ok(Trajectory { frames, dt, steps })
}

/// Step limit of the splitting scheme: `cfl·dx / max|f'|`.
pub fn splitting_dt(config: &EvolutionConfig, lo: f64, hi: f64) -> f64 {
    let speed = config.flux.build().max_speed(lo, hi);
    if speed > 0.0 {
        config.cfl * config.grid.dx / speed
    } else {
        config.t_end
    }
}

struct SplitStep {
    conv: FftConvolver,
    left: Vec<f64>,
    right: Vec<f64>,
}

fn evolve_split(u0: &Field, config: &EvolutionConfig) -> Result<Trajectory> {
    let grid = u0.grid;
    let Some((lp, rp)) = grid.pads() else {
        return Err(FracError::Unsupported("the splitting scheme needs a truncated grid".into()));
    };
    let alpha = match config.params {
        FracParams::OneSided { alpha } => alpha,
        FracParams::RieszFeller { .. } => {
            return Err(FracError::Unsupported(
                "the splitting scheme uses the one-sided semigroup kernel".into(),
            ))
        }
    };
    let flux = config.flux.build();
    let lo = u0.min_value().min(lp).min(rp);
    let hi = u0.max_value().max(lp).max(rp);
    flux.require_convex(lo, hi)?;
    let sonic = flux.argmin_on(lo, hi);
    let limit = splitting_dt(config, lo, hi);
    let dt = match config.dt {
        Some(dt) if dt > limit * (1.0 + 1e-12) => return Err(FracError::CflViolation { dt, limit }),
        Some(dt) => dt,
        None => limit,
    };
    let profile = if config.epsilon > 0.0 { Some(unit_profile(alpha)?) } else { None };
    let n = grid.n;
    let mut steps_cache: HashMap<u64, SplitStep> = HashMap::new();
    let mut diffuse = |u: &mut Vec<f64>, h: f64| -> Result<()> {
        let Some(profile) = &profile else { return Ok(()) };
        let step = match steps_cache.entry(h.to_bits()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let w = cell_weights(profile, config.epsilon * h, grid.dx, n)?;
                e.insert(SplitStep { conv: FftConvolver::new(&w.kappa, n), left: w.left, right: w.right })
            }
        };
        let c = step.conv.convolve(u);
        for (i, v) in u.iter_mut().enumerate() {
            *v = c[i + n - 1] + step.left[i] * lp + step.right[i] * rp;
        }
        Ok(())
    };

    let mut frames = vec![u0.clone()];
    let mut u = u0.values.clone();
    let mut fluxes = vec![0.0; n + 1];
    let (t_start, mut t) = (u0.t, u0.t);
    let mut steps = 0;
    for target in output_schedule(config) {
        let target = t_start + target;
        while t < target - 1e-12 * target.abs().max(1.0) {
            let h = if target - t <= dt { target - t } else { dt };
            let lambda = h / grid.dx;
            for (i, g) in fluxes.iter_mut().enumerate() {
                let a = if i == 0 { lp } else { u[i - 1] };
                let b = if i == n { rp } else { u[i] };
                *g = godunov_flux(&flux, a, b, sonic);
            }
            for (i, v) in u.iter_mut().enumerate() {
                *v -= lambda * (fluxes[i + 1] - fluxes[i]);
            }
            diffuse(&mut u, h)?;
            t = if target - t <= dt { target } else { t + h };
            steps += 1;
            if config.record_every_step && t < target {
                frames.push(Field::at_time(grid, u.clone(), t)?);
            }
        }
        if let Some(index) = u.iter().position(|v| !v.is_finite()) {
            return Err(FracError::NonFinite { index });
        }
        frames.push(Field::at_time(grid, u.clone(), t)?);
    }
    Ok(Trajectory { frames, dt, steps })
}

/// `(e^z - 1)/z` and `(e^z - 1 - z)/z²`, by series near zero.
fn phi12(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        (
            1.0 + z / 2.0 + z2 / 6.0 + z2 * z / 24.0,
            0.5 + z / 6.0 + z2 / 24.0 + z2 * z / 120.0,
        )
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// Contraction-limited sub-interval `H` with `C·H^{α/(1+α)} = 1/2`, where
/// `C = Lip_f(R0)·‖∂xK(1)‖₁·((1+α)/α)·ε^{-1/(1+α)}`.
pub fn mild_subinterval(alpha: f64, lipschitz: f64, epsilon: f64) -> f64 {
    let s = 1.0 + alpha;
    let dk = 2.0 * peak_bound(alpha);
    let c = lipschitz * dk * (s / alpha) * epsilon.powf(-1.0 / s);
    if c <= 0.0 {
        f64::INFINITY
    } else {
        (0.5 / c).powf(s / alpha)
    }
}

const PICARD_TOL: f64 = 1e-8;
const PICARD_MAX_ITER: usize = 200;

fn evolve_mild(u0: &Field, config: &EvolutionConfig) -> Result<Trajectory> {
    let grid = u0.grid;
    if !grid.is_periodic() {
        return Err(FracError::Unsupported(
            "the mild fixed-point scheme needs a periodic grid".into(),
        ));
    }
    let alpha = match config.params {
        FracParams::OneSided { alpha } => alpha,
        FracParams::RieszFeller { .. } => {
            return Err(FracError::Unsupported(
                "the mild fixed-point scheme is implemented for the one-sided operator".into(),
            ))
        }
    };
    if !(config.epsilon > 0.0) {
        return Err(FracError::param("epsilon", config.epsilon, "mild scheme needs epsilon > 0"));
    }
    let n = grid.n;
    let flux = config.flux.build();
    let r0 = u0.sup_norm();
    let h_contract = mild_subinterval(alpha, flux.lipschitz(r0.max(1e-12)), config.epsilon);
    let dt = config.dt.unwrap_or(grid.dx).min(h_contract);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let period = n as f64 * grid.dx;
    let (lam, dxi): (Vec<Complex64>, Vec<Complex64>) = (0..n)
        .map(|j| {
            let jj = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let xi = 2.0 * PI * jj / period;
            let l = config.params.exact_symbol(xi) * config.epsilon;
            // The unpaired Nyquist mode is not differentiated.
            let d = if n.is_multiple_of(2) && j == n / 2 { 0.0 } else { xi };
            (l, Complex64::new(0.0, d))
        })
        .unzip();
    let to_hat = |u: &[f64]| -> Vec<Complex64> {
        let mut b: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fwd.process(&mut b);
        b
    };
    let from_hat = |h: &[Complex64]| -> Vec<f64> {
        let mut b = h.to_vec();
        inv.process(&mut b);
        b.into_iter().map(|c| c.re / n as f64).collect()
    };
    // -iξ·f̂(u)
    let flux_term = |u: &[f64]| -> Vec<Complex64> {
        let fu: Vec<f64> = u.iter().map(|&v| flux.f(v)).collect();
        to_hat(&fu).into_iter().zip(&dxi).map(|(f, d)| -d * f).collect()
    };

    let mut frames = vec![u0.clone()];
    let mut u = u0.values.clone();
    let mut t = 0.0;
    let mut steps = 0;
    for target in output_schedule(config) {
        while t < target - 1e-12 * target.max(1.0) {
            let t1 = (t + h_contract).min(target);
            let m = ((t1 - t) / dt).ceil().max(1.0) as usize;
            let h = (t1 - t) / m as f64;
            let weights: Vec<(Complex64, Complex64, Complex64)> = lam
                .iter()
                .map(|&l| {
                    let z = l * h;
                    let (p1, p2) = phi12(z);
                    (z.exp(), (p1 - p2) * h, p2 * h)
                })
                .collect();
            let u_hat0 = to_hat(&u);
            // Free evolution e^{ελ(t_j - t)} û(t) at each node.
            let free: Vec<Vec<Complex64>> = (0..=m)
                .map(|j| {
                    u_hat0
                        .iter()
                        .zip(&lam)
                        .map(|(c, l)| c * (l * (j as f64 * h)).exp())
                        .collect()
                })
                .collect();
            let mut iterate: Vec<Vec<f64>> = vec![u.clone(); m + 1];
            let mut previous = f64::INFINITY;
            let mut converged = false;
            for iteration in 1..=PICARD_MAX_ITER {
                let forcing: Vec<Vec<Complex64>> = iterate.iter().map(|v| flux_term(v)).collect();
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                let mut update: f64 = 0.0;
                let mut next = Vec::with_capacity(m + 1);
                next.push(u.clone());
                for j in 0..m {
                    for k in 0..n {
                        let (e, wa, wb) = weights[k];
                        acc[k] = e * acc[k] + wa * forcing[j][k] + wb * forcing[j + 1][k];
                    }
                    let hat: Vec<Complex64> =
                        free[j + 1].iter().zip(&acc).map(|(a, b)| a + b).collect();
                    let v = from_hat(&hat);
                    update = update.max(
                        v.iter()
                            .zip(&iterate[j + 1])
                            .fold(0.0_f64, |mx, (a, b)| mx.max((a - b).abs())),
                    );
                    next.push(v);
                }
                iterate = next;
                if update < PICARD_TOL {
                    converged = true;
                    break;
                }
                if iteration > 1 && update > previous {
                    return Err(FracError::NonContraction {
                        t0: t,
                        t1,
                        iteration,
                        previous,
                        current: update,
                    });
                }
                previous = update;
            }
            if !converged {
                return Err(FracError::FixedPointNotConverged {
                    iterations: PICARD_MAX_ITER,
                    tol: PICARD_TOL,
                    last: previous,
                });
            }
            u = iterate.pop().expect("at least one node");
            if config.record_every_step {
                for (j, v) in iterate.into_iter().enumerate().skip(1) {
                    frames.push(Field::at_time(grid, v, u0.t + t + j as f64 * h)?);
                }
            }
            t = t1;
            steps += m;
            if t < target && config.record_every_step {
                frames.push(Field::at_time(grid, u.clone(), u0.t + t)?);
            }
        }
        frames.push(Field::at_time(grid, u.clone(), u0.t + t)?);
    }
    Ok(Trajectory { frames, dt, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Largest increase of the sup norm between consecutive frames.
    pub worst_increase: f64,
    pub monotone: bool,
}

pub const MAX_PRINCIPLE_SLACK: f64 = 1e-8;

pub fn max_principle_report(trajectory: &Trajectory) -> MaxPrincipleReport {
    let times = trajectory.times();
    let sup_norms: Vec<f64> = trajectory.frames.iter().map(Field::sup_norm).collect();
    let worst_increase = sup_norms
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    MaxPrincipleReport {
        monotone: sup_norms.windows(2).all(|w| w[1] <= w[0] + MAX_PRINCIPLE_SLACK),
        worst_increase: if worst_increase.is_finite() { worst_increase } else { 0.0 },
        times,
        sup_norms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub l1_distances: Vec<f64>,
    /// Largest `d_{k+1} - d_k - slack_k`.
    pub worst_excess: f64,
    pub contractive: bool,
    pub bv_initial: f64,
    pub bv_u: Vec<f64>,
}

/// Evolves both data with the same configuration (concurrently when
/// parallel) and checks `‖u(t) - v(t)‖₁` is nonincreasing within
/// `1e-8 + 10·dx·dt` per step.
pub fn l1_contraction_report(u0: &Field, v0: &Field, config: &EvolutionConfig) -> Result<ContractionReport> {
    l1_contraction_report_exec(u0, v0, config, Execution::default())
}

pub fn l1_contraction_report_exec(
    u0: &Field,
    v0: &Field,
    config: &EvolutionConfig,
    exec: Execution,
) -> Result<ContractionReport> {
    let (pu, pv) = (u0.grid.pads(), v0.grid.pads());
    if pu != pv {
        let (lu, ru) = pu.unwrap_or((f64::NAN, f64::NAN));
        let (lv, rv) = pv.unwrap_or((f64::NAN, f64::NAN));
        return Err(FracError::PadMismatch {
            left_u: lu,
            right_u: ru,
            left_v: lv,
            right_v: rv,
        });
    }
    let mut cfg = config.clone();
    cfg.record_every_step = true;
    // Both runs must share one step: take the stricter data bound.
    if cfg.dt.is_none() {
        match cfg.scheme {
            Scheme::MethodOfLines => {
                let op = DiscreteOperator::new(cfg.params, u0.grid)?;
                cfg.dt = Some(stable_dt(&cfg, u0.sup_norm().max(v0.sup_norm()), &op));
            }
            Scheme::KernelSplitting => {
                let (l, r) = pu.unwrap_or((0.0, 0.0));
                let lo = u0.min_value().min(v0.min_value()).min(l).min(r);
                let hi = u0.max_value().max(v0.max_value()).max(l).max(r);
                cfg.dt = Some(splitting_dt(&cfg, lo, hi));
            }
            Scheme::MildFixedPoint => {}
        }
    }
    let (tu, tv) = par::join(exec, || evolve(u0, &cfg), || evolve(v0, &cfg));
    let (tu, tv) = (tu?, tv?);
    let dx = u0.grid.dx;
    let mut times = Vec::with_capacity(tu.frames.len());
    let mut d = Vec::with_capacity(tu.frames.len());
    for (a, b) in tu.frames.iter().zip(&tv.frames) {
        times.push(a.t);
        d.push(a.l1_distance(b)?);
    }
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 1..d.len() {
        let step = times[k] - times[k - 1];
        let slack = 1e-8 + 10.0 * dx * step;
        worst_excess = worst_excess.max(d[k] - d[k - 1] - slack);
    }
    let worst_excess = if worst_excess.is_finite() { worst_excess } else { 0.0 };
    Ok(ContractionReport {
        contractive: worst_excess <= 0.0,
        worst_excess,
        bv_initial: u0.total_variation(),
        bv_u: tu.frames.iter().map(Field::total_variation).collect(),
        times,
        l1_distances: d,
    })
}

/// Smooth compactly supported bump `b((t-tc)/τ)·b((x-xc)/w)`,
/// `b(s) = exp(-1/(1-s²))` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFn {
    pub t_center: f64,
    pub t_half_width: f64,
    pub x_center: f64,
    pub x_half_width: f64,
}

fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    let g1 = -2.0 * s / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (b, g1 * b, (g2 + g1 * g1) * b)
}

impl BumpTestFn {
    /// `(φ, φ_t, φ_tt, φ_x, φ_xx)`.
    pub fn eval(&self, t: f64, x: f64) -> [f64; 5] {
        let (bt, bt1, bt2) = bump((t - self.t_center) / self.t_half_width);
        let (bx, bx1, bx2) = bump((x - self.x_center) / self.x_half_width);
        let (tw, xw) = (self.t_half_width, self.x_half_width);
        [bt * bx, bt1 / tw * bx, bt2 / (tw * tw) * bx, bt * bx1 / xw, bt * bx2 / (xw * xw)]
    }

    /// `∫∫ |φ_t| + |φ_tt| + |φ_x| + |φ_xx|` by the midpoint rule.
    pub fn w21_norm(&self) -> f64 {
        let m = 400;
        let (ht, hx) = (2.0 * self.t_half_width / m as f64, 2.0 * self.x_half_width / m as f64);
        let mut acc = 0.0;
        for i in 0..m {
            let t = self.t_center - self.t_half_width + (i as f64 + 0.5) * ht;
            for j in 0..m {
                let x = self.x_center - self.x_half_width + (j as f64 + 0.5) * hx;
                let v = self.eval(t, x);
                acc += v[1].abs() + v[2].abs() + v[3].abs() + v[4].abs();
            }
        }
        acc * ht * hx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResidual {
    pub residual: f64,
    /// `(dx + dt)·(‖η‖∞ + ‖q‖∞ + ε‖η‖∞)·‖φ‖_{W^{2,1}}`.
    pub tolerance: f64,
    pub dx: f64,
    pub dt: f64,
}

impl EntropyResidual {
    pub fn passes(&self) -> bool {
        self.residual >= -self.tolerance
    }
}

/// Space–time quadrature of `η(u)φ_t + q(u)φ_x + ε η(u) L*[φ]`, which is
/// nonnegative for exact viscous solutions and nonnegative `φ`.
pub fn entropy_residual(
    trajectory: &Trajectory,
    pair: &EntropyPair,
    test_fn: &BumpTestFn,
    config: &EvolutionConfig,
) -> Result<EntropyResidual> {
    let frames = &trajectory.frames;
    let grid = frames[0].grid;
    let (t0, t1) = (frames[0].t, trajectory.last().t);
    let (xl, xr) = (
        test_fn.x_center - test_fn.x_half_width,
        test_fn.x_center + test_fn.x_half_width,
    );
    let (tl, tr) = (
        test_fn.t_center - test_fn.t_half_width,
        test_fn.t_center + test_fn.t_half_width,
    );
    if !grid.is_periodic() && (xl <= grid.x0 || xr >= grid.x_last()) {
        return Err(FracError::SupportTouchesBoundary(format!(
            "x-support [{xl}, {xr}] vs window [{}, {}]",
            grid.x0,
            grid.x_last()
        )));
    }
    if tl <= t0 || tr >= t1 {
        return Err(FracError::SupportTouchesBoundary(format!(
            "t-support [{tl}, {tr}] vs [{t0}, {t1}]"
        )));
    }
    if frames.len() < 3 {
        return Err(FracError::Config("entropy residual needs every step recorded".into()));
    }
    let op = DiscreteOperator::new(config.params, grid)?;
    let eps = config.epsilon;
    let xs = grid.xs();
    let n = grid.n;
    // The adjoint of a memory operator leaks outside the window, where u is
    // the pad state: Σ_{j<0} (M^T φ)_j = -Σ_i S_{i+1} φ_i and
    // Σ_{j>=n} (M φ)_j = -Σ_i S_{n-i} φ_i for the left-sided matrix M.
    let outside = grid.pads().map(|(l, r)| {
        let s = grunwald_partial_sums(config.params.order(), n + 2);
        let (a, b) = config.params.side_coefficients();
        let h = op.weights().scale();
        (l, r, s, a * h, b * h)
    });
    let integrand: Vec<f64> = frames
        .iter()
        .map(|fr| {
            let t = fr.t;
            if t <= tl || t >= tr {
                return 0.0;
            }
            let vals: Vec<[f64; 5]> = xs.iter().map(|&x| test_fn.eval(t, x)).collect();
            let phi: Vec<f64> = vals.iter().map(|v| v[0]).collect();
            let adj = op.apply_adjoint_padded(&phi, 0.0, 0.0);
            let mut acc: f64 = fr
                .values
                .iter()
                .zip(&vals)
                .zip(&adj)
                .map(|((&u, v), &a)| pair.eta(u) * v[1] + pair.q(u) * v[3] + eps * pair.eta(u) * a)
                .sum();
            if let Some((l, r, s, ah, bh)) = &outside {
                let left: f64 = (0..n).map(|i| -s[i + 1] * phi[i]).sum();
                let right: f64 = (0..n).map(|i| -s[n - i] * phi[i]).sum();
                acc += eps * (ah * pair.eta(*l) * left + bh * pair.eta(*r) * right);
            }
            grid.dx * acc
        })
        .collect();
    let mut residual = 0.0;
    for k in 1..frames.len() {
        residual += 0.5 * (frames[k].t - frames[k - 1].t) * (integrand[k] + integrand[k - 1]);
    }
    let (mut eta_max, mut q_max) = (0.0_f64, 0.0_f64);
    for fr in frames {
        for &u in &fr.values {
            eta_max = eta_max.max(pair.eta(u));
            q_max = q_max.max(pair.q(u).abs());
        }
    }
    let dt = trajectory.dt;
    Ok(EntropyResidual {
        residual,
        tolerance: (grid.dx + dt) * (eta_max + q_max + eps * eta_max) * test_fn.w21_norm(),
        dx: grid.dx,
        dt,
    })
}

/// `u_l` left of `x_c`, `u_r` right, joined by a `tanh` of the given width.
pub fn smoothed_step(grid: GridSpec, u_l: f64, u_r: f64, x_c: f64, width: f64) -> Result<Field> {
    Field::from_fn(grid, |x| {
        let s = if width > 0.0 {
            0.5 * (1.0 - ((x - x_c) / width).tanh())
        } else if x <= x_c {
            1.0
        } else {
            0.0
        };
        u_r + (u_l - u_r) * s
    })
}
