//! Vanishing-viscosity rate study: evolve one datum for a decreasing list of
//! ε, measure the L1 distance to the entropy solution at `t_eval`, and fit
//! the exponent of `error ~ ε^rate` against the upper bound `1/(α+1)`.

use serde::{Deserialize, Serialize};

use super::fit::loglog_fit;
use crate::entropy_reference::{exact_riemann_cell_averages, godunov_evolve, RiemannData};
use crate::error::{FracError, Result};
use crate::grid::{Field, GridSpec};
use crate::par::{self, Execution};
use crate::viscous_evolution::{evolve, smoothed_step, EvolutionConfig};

/// Absolute tolerance on the fitted exponent for "rate matched".
pub const RATE_TOLERANCE: f64 = 0.10;
/// Slack on the growth of `error / (ε t)^rate` for "bound satisfied".
pub const BOUND_SLACK: f64 = 0.10;
/// Errors must exceed this multiple of the reference's own error.
pub const FLOOR_FACTOR: f64 = 5.0;
/// Allowed excess of `err(2t)/err(t)` over `2^{1/(α+1)}`.
pub const TIME_RATIO_SLACK: f64 = 0.30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `tanh` step of the given width centred at `x_c`; width 0 is a pure step.
    SmoothedStep {
        u_l: f64,
        u_r: f64,
        width: f64,
        #[serde(default)]
        x_c: f64,
    },
    /// `amp·exp(1 - 1/(1 - (x/width)²))` on `|x| < width`.
    Bump { amp: f64, width: f64 },
    /// Nodal values on the base grid.
    Custom { values: Vec<f64> },
}

impl InitialData {
    /// Far-field states the truncated grid must be padded with.
    pub fn pads(&self) -> Option<(f64, f64)> {
        match self {
            InitialData::SmoothedStep { u_l, u_r, .. } => Some((*u_l, *u_r)),
            InitialData::Bump { .. } => Some((0.0, 0.0)),
            InitialData::Custom { .. } => None,
        }
    }

    pub fn sample(&self, grid: GridSpec) -> Result<Field> {
        match self {
            InitialData::SmoothedStep { u_l, u_r, width, x_c } => smoothed_step(grid, *u_l, *u_r, *x_c, *width),
            InitialData::Bump { amp, width } => {
                if !(*width > 0.0) {
                    return Err(FracError::param("width", *width, "bump width must be positive"));
                }
                Field::from_fn(grid, |x| {
                    let s = x / width;
                    if s.abs() < 1.0 {
                        amp * (1.0 - 1.0 / (1.0 - s * s)).exp()
                    } else {
                        0.0
                    }
                })
            }
            InitialData::Custom { values } => Field::new(grid, values.clone()),
        }
    }

    /// The Riemann problem this datum is, if it is a pure step.
    pub fn riemann(&self) -> Option<RiemannData> {
        match self {
            InitialData::SmoothedStep { u_l, u_r, width, x_c } if *width == 0.0 => {
                RiemannData::new(*u_l, *u_r, *x_c).ok()
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    ExactRiemann,
    /// Godunov on the base grid refined `refine` times, restricted back.
    Godunov { refine: usize },
}

impl Default for Reference {
    fn default() -> Self {
        Reference::Godunov { refine: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    /// Template; its `epsilon` and `t_end` are overwritten per run.
    pub base: EvolutionConfig,
    pub u0: InitialData,
    pub t_eval: f64,
    #[serde(default)]
    pub reference: Reference,
}

impl SweepConfig {
    /// `α` of `∂x D^α` (order − 1 for Riesz–Feller).
    pub fn alpha(&self) -> f64 {
        self.base.params.order() - 1.0
    }

    pub fn theoretical_rate(&self) -> f64 {
        1.0 / (self.alpha() + 1.0)
    }

    /// Largest `dx` resolving the thinnest layer: `ε_min^{1/α}/8`.
    pub fn required_dx(&self) -> f64 {
        let eps_min = self.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
        eps_min.powf(1.0 / self.alpha()) / 8.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < 3 {
            return Err(FracError::Config(format!(
                "a rate fit needs at least 3 epsilons, got {}",
                self.epsilons.len()
            )));
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e.is_finite()) {
                return Err(FracError::param("epsilon", e, "must be positive"));
            }
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(FracError::Config("epsilons must be strictly decreasing".into()));
        }
        if !(self.t_eval > 0.0 && self.t_eval.is_finite()) {
            return Err(FracError::param("t_eval", self.t_eval, "must be positive"));
        }
        let mut base = self.base.clone();
        base.t_end = self.t_eval;
        base.validate()?;
        let grid = &self.base.grid;
        if let (Some(want), Some(have)) = (self.u0.pads(), grid.pads()) {
            if want != have {
                return Err(FracError::Config(format!(
                    "grid pads {have:?} do not match the far field {want:?} of the initial data"
                )));
            }
        }
        match self.reference {
            Reference::Godunov { refine } if refine < 4 => {
                return Err(FracError::Config(format!(
                    "the reference must be at least 4x finer than the base grid, got {refine}x"
                )))
            }
            Reference::ExactRiemann if self.u0.riemann().is_none() => {
                return Err(FracError::Config(
                    "an exact Riemann reference needs a pure step (width 0)".into(),
                ))
            }
            _ => {}
        }
        let required = self.required_dx();
        if grid.dx > required {
            return Err(FracError::UnderResolved { dx: grid.dx, required_dx: required });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub epsilons: Vec<f64>,
    pub l1_errors: Vec<f64>,
    pub fitted_rate: f64,
    pub theoretical_rate: f64,
    pub r_squared: f64,
    /// Points (from the largest ε) the fit used.
    pub fit_points: usize,
    pub t_eval: f64,
    pub dx: f64,
    /// `error / ((ε t)^{1/(α+1)} |u0|_BV)`.
    pub bound_constants: Vec<f64>,
    pub bv_initial: f64,
    pub bv_final: Vec<f64>,
    pub bv_nonincreasing: bool,
    /// The constant of the upper bound does not grow as ε decreases: hard pass.
    pub bound_satisfied: bool,
    /// `|fitted - theoretical| <= RATE_TOLERANCE`: soft pass.
    pub rate_matched: bool,
    /// Self-convergence estimate of the reference (0 for exact references).
    pub reference_floor: f64,
    pub above_floor: bool,
    pub warnings: Vec<String>,
}

/// Reference entropy solution on the base grid at `t`, and its own error estimate.
fn reference(config: &SweepConfig, u0: &Field, t: f64) -> Result<(Field, f64)> {
    let flux = config.base.flux.build();
    let grid = u0.grid;
    match config.reference {
        Reference::ExactRiemann => {
            let data = config.u0.riemann().expect("validated");
            Ok((exact_riemann_cell_averages(data, &flux, t, &grid)?, 0.0))
        }
        Reference::Godunov { refine } => {
            let run = |factor: usize| -> Result<Field> {
                let fine = grid.refined(factor)?;
                let v0 = config.u0_on(fine)?;
                godunov_evolve(&v0, &flux, t, 0.9)?.last().restrict(factor, &grid)
            };
            let best = run(refine)?;
            let half = run(refine / 2)?;
            let floor = best.l1_distance(&half)?;
            Ok((best, floor))
        }
    }
}

impl SweepConfig {
    /// The initial datum on `grid`: cell averages for a pure step, the
    /// piecewise-constant prolongation of custom values on refined grids.
    fn u0_on(&self, grid: GridSpec) -> Result<Field> {
        if let Some(data) = self.u0.riemann() {
            // The jump splits its cell exactly.
            return exact_riemann_cell_averages(data, &self.base.flux.build(), 0.0, &grid);
        }
        match &self.u0 {
            InitialData::Custom { values } if grid.n != values.len() => {
                let factor = grid.n / values.len();
                Field::new(grid, values.iter().flat_map(|&v| std::iter::repeat_n(v, factor)).collect())
            }
            d => d.sample(grid),
        }
    }
}

pub fn viscosity_sweep(config: &SweepConfig) -> Result<RateReport> {
    viscosity_sweep_exec(config, Execution::default())
}

/// Sweep points run concurrently when parallel; each run is sequential and
/// deterministic, so the report does not depend on `exec`.
pub fn viscosity_sweep_exec(config: &SweepConfig, exec: Execution) -> Result<RateReport> {
    config.validate()?;
    let grid = config.base.grid;
    let u0 = config.u0_on(grid)?;
    let t = config.t_eval;
    let (exact, reference_floor) = reference(config, &u0, t)?;
    let runs: Vec<Result<(f64, f64)>> = par::map_slice(&config.epsilons, exec, |&eps| {
        let mut cfg = config.base.clone();
        cfg.epsilon = eps;
        cfg.t_end = t;
        cfg.output_times.clear();
        cfg.record_every_step = false;
        let last = evolve(&u0, &cfg)?.frames.pop().expect("trajectory is never empty");
        Ok((last.l1_distance(&exact)?, last.total_variation()))
    });
    let (l1_errors, bv_final): (Vec<f64>, Vec<f64>) = runs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let mut warnings = Vec::new();

    // Fit on the prefix over which the error decreases.
    let mut fit_points = 1;
    while fit_points < l1_errors.len() && l1_errors[fit_points] < l1_errors[fit_points - 1] {
        fit_points += 1;
    }
    if fit_points < l1_errors.len() {
        warnings.push(format!(
            "errors stop decreasing at epsilon = {} (reference error floor reached?); refit on the first {fit_points} points",
            config.epsilons[fit_points]
        ));
    }
    if fit_points < 2 {
        return Err(FracError::Config(format!(
            "errors do not decrease between the two largest epsilons ({:e} -> {:e}); nothing to fit",
            l1_errors[0], l1_errors[1]
        )));
    }
    let fit = loglog_fit(&config.epsilons[..fit_points], &l1_errors[..fit_points])
        .ok_or_else(|| FracError::Config("rate fit failed (non-positive errors?)".into()))?;
    let (fitted_rate, r_squared) = (fit.slope, fit.r_squared);

    let theoretical_rate = config.theoretical_rate();
    let bv_initial = u0.total_variation();
    let bound_constants: Vec<f64> = config
        .epsilons
        .iter()
        .zip(&l1_errors)
        .map(|(&e, &err)| err / ((e * t).powf(theoretical_rate) * bv_initial))
        .collect();
    let bound_satisfied = bound_constants.iter().all(|&c| c <= (1.0 + BOUND_SLACK) * bound_constants[0]);
    let bv_nonincreasing = bv_final.iter().all(|&b| b <= bv_initial + 1e-6);
    let above_floor = l1_errors.iter().all(|&e| e > FLOOR_FACTOR * reference_floor);
    if !above_floor {
        warnings.push(format!(
            "some errors are within {FLOOR_FACTOR}x of the reference error {reference_floor:e}"
        ));
    }
    Ok(RateReport {
        epsilons: config.epsilons.clone(),
        rate_matched: (fitted_rate - theoretical_rate).abs() <= RATE_TOLERANCE,
        l1_errors,
        fitted_rate,
        theoretical_rate,
        r_squared,
        fit_points,
        t_eval: t,
        dx: grid.dx,
        bound_constants,
        bv_initial,
        bv_final,
        bv_nonincreasing,
        bound_satisfied,
        reference_floor,
        above_floor,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScaling {
    pub t_eval: f64,
    /// `err(2t)/err(t)` per ε.
    pub ratios: Vec<f64>,
    /// `2^{1/(α+1)}`.
    pub bound: f64,
    pub passed: bool,
}

/// Re-runs the sweep at `2 t_eval` and checks every error ratio is at most
/// `(1 + TIME_RATIO_SLACK)·2^{1/(α+1)}`.
pub fn time_doubling(config: &SweepConfig, at_t: &RateReport, exec: Execution) -> Result<TimeScaling> {
    let mut doubled = config.clone();
    doubled.t_eval = 2.0 * config.t_eval;
    let at_2t = viscosity_sweep_exec(&doubled, exec)?;
    let ratios: Vec<f64> = at_2t.l1_errors.iter().zip(&at_t.l1_errors).map(|(b, a)| b / a).collect();
    let bound = 2f64.powf(config.theoretical_rate());
    Ok(TimeScaling {
        t_eval: config.t_eval,
        passed: ratios.iter().all(|&r| r <= (1.0 + TIME_RATIO_SLACK) * bound),
        ratios,
        bound,
    })
}

/// A truncated window around a Burgers-type Riemann problem with `dx`
/// chosen to resolve `ε_min`, the scheme set to kernel splitting.
pub fn riemann_sweep(
    alpha: f64,
    epsilons: Vec<f64>,
    (u_l, u_r): (f64, f64),
    t_eval: f64,
    window: (f64, f64),
) -> Result<SweepConfig> {
    use crate::flux::FluxSpec;
    use crate::fractional_ops::FracParams;
    use crate::viscous_evolution::Scheme;
    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let dx = eps_min.powf(1.0 / alpha) / 8.0;
    let n = ((window.1 - window.0) / dx).ceil() as usize + 1;
    let grid = GridSpec::truncated(window.0, window.1, n, u_l, u_r)?;
    let mut base = EvolutionConfig::new(grid, FracParams::one_sided(alpha)?, FluxSpec::Burgers, eps_min, t_eval);
    base.scheme = Scheme::KernelSplitting;
    base.cfl = 0.9;
    Ok(SweepConfig {
        epsilons,
        base,
        u0: InitialData::SmoothedStep { u_l, u_r, width: 0.0, x_c: 0.0 },
        t_eval,
        reference: Reference::ExactRiemann,
    })
}
