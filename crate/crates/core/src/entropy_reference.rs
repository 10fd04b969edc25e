//! Entropy solutions of `∂t u + ∂x f(u) = 0` for convex `f`: the exact
//! Riemann solution and a first-order Godunov scheme used as the limit
//! target in vanishing-viscosity studies.

use quadrature::double_exponential;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::flux::{EntropyPair, FluxFn};
use crate::grid::{Field, GridSpec};
use crate::viscous_evolution::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannData {
    pub u_left: f64,
    pub u_right: f64,
    pub x_jump: f64,
}

impl RiemannData {
    pub fn new(u_left: f64, u_right: f64, x_jump: f64) -> Result<Self> {
        if !(u_left.is_finite() && u_right.is_finite() && x_jump.is_finite()) {
            return Err(FracError::param("u_left", u_left, "Riemann data must be finite"));
        }
        if u_left == u_right {
            return Err(FracError::param("u_right", u_right, "must differ from u_left"));
        }
        Ok(RiemannData { u_left, u_right, x_jump })
    }

    fn range(&self) -> (f64, f64) {
        (self.u_left.min(self.u_right), self.u_left.max(self.u_right))
    }

    pub fn is_shock(&self) -> bool {
        self.u_left > self.u_right
    }

    /// Rankine–Hugoniot speed `(f(u_r) - f(u_l)) / (u_r - u_l)`.
    pub fn shock_speed(&self, flux: &FluxFn) -> f64 {
        (flux.f(self.u_right) - flux.f(self.u_left)) / (self.u_right - self.u_left)
    }
}

/// Value of the entropy solution at `(t, x)`. On the shock line the left
/// state is returned (`x <= x_jump + c t` is left-closed).
pub fn exact_riemann(data: RiemannData, flux: &FluxFn, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(FracError::param("t", t, "must be >= 0"));
    }
    let (lo, hi) = data.range();
    flux.require_convex(lo, hi)?;
    Ok(riemann_value(data, flux, t, x))
}

fn riemann_value(data: RiemannData, flux: &FluxFn, t: f64, x: f64) -> f64 {
    let RiemannData { u_left: ul, u_right: ur, x_jump } = data;
    if t == 0.0 {
        return if x <= x_jump { ul } else { ur };
    }
    if ul > ur {
        return if x <= x_jump + data.shock_speed(flux) * t { ul } else { ur };
    }
    let s = (x - x_jump) / t;
    if s <= flux.f_prime(ul) {
        ul
    } else if s >= flux.f_prime(ur) {
        ur
    } else {
        flux.inverse_speed(s, ul, ur)
    }
}

/// Exact cell averages of the Riemann solution over the cells
/// `[x_i - dx/2, x_i + dx/2]`: closed form off the fan, adaptive
/// double-exponential quadrature across it.
pub fn exact_riemann_cell_averages(data: RiemannData, flux: &FluxFn, t: f64, grid: &GridSpec) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(FracError::param("t", t, "must be >= 0"));
    }
    let (lo, hi) = data.range();
    flux.require_convex(lo, hi)?;
    let (ul, ur) = (data.u_left, data.u_right);
    // Breakpoints: the solution is ul left of `a`, ur right of `b`, smooth between.
    let (a, b) = if t == 0.0 || ul > ur {
        let s = if t == 0.0 { 0.0 } else { data.shock_speed(flux) };
        let p = data.x_jump + s * t;
        (p, p)
    } else {
        (data.x_jump + flux.f_prime(ul) * t, data.x_jump + flux.f_prime(ur) * t)
    };
    let h = 0.5 * grid.dx;
    let values = (0..grid.n)
        .map(|i| {
            let (c0, c1) = (grid.x(i) - h, grid.x(i) + h);
            let left = (a.min(c1) - c0).max(0.0) * ul;
            let right = (c1 - b.max(c0)).max(0.0) * ur;
            let (f0, f1) = (c0.max(a), c1.min(b));
            let fan = if f1 > f0 {
                double_exponential::integrate(|x| riemann_value(data, flux, t, x), f0, f1, 1e-13).integral
            } else {
                0.0
            };
            (left + fan + right) / grid.dx
        })
        .collect();
    Field::at_time(*grid, values, t)
}

/// State `w(a, b)` of the Riemann solution along `x/t = 0`; the Godunov flux
/// is `f(w)`. `sonic` is the minimiser of `f` on the data range.
#[inline]
pub fn interface_state(flux: &FluxFn, a: f64, b: f64, sonic: f64) -> f64 {
    if a > b {
        // Shock: upwind by the sign of its speed.
        let s = flux.f(b) - flux.f(a);
        if s <= 0.0 {
            a
        } else {
            b
        }
    } else if flux.f_prime(a) >= 0.0 {
        a
    } else if flux.f_prime(b) <= 0.0 {
        b
    } else {
        sonic
    }
}

/// Godunov flux for convex `f`: `max(f(max(a, u*)), f(min(b, u*)))` with `u*`
/// the minimiser of `f`.
pub fn godunov_flux(flux: &FluxFn, a: f64, b: f64, sonic: f64) -> f64 {
    flux.f(a.max(sonic)).max(flux.f(b.min(sonic)))
}

/// Godunov evolution to `t_end`, keeping the initial and final frames.
pub fn godunov_evolve(u0: &Field, flux: &FluxFn, t_end: f64, cfl: f64) -> Result<Trajectory> {
    godunov_evolve_at(u0, flux, t_end, cfl, &[])
}

/// As [`godunov_evolve`], also keeping frames at `output_times` (offsets
/// from `u0.t`), each hit exactly by shortening the step before it.
pub fn godunov_evolve_at(u0: &Field, flux: &FluxFn, t_end: f64, cfl: f64, output_times: &[f64]) -> Result<Trajectory> {
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(FracError::param("cfl", cfl, "must lie in (0, 1)"));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(FracError::param("t_end", t_end, "must be positive"));
    }
    let (lo, hi) = (u0.min_value(), u0.max_value());
    flux.require_convex(lo, hi)?;
    let sonic = flux.argmin_on(lo, hi);
    let speed = flux.max_speed(lo, hi);
    let grid = u0.grid;
    let dt = if speed > 0.0 { cfl * grid.dx / speed } else { t_end };
    let mut targets: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let n = grid.n;
    let mut frames = vec![u0.clone()];
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut steps = 0;
    let mut fluxes = vec![0.0; n + 1];
    for target in targets {
        while t < target - 1e-12 * target.max(1.0) {
            let h = dt.min(target - t);
            let lambda = h / grid.dx;
            for (i, g) in fluxes.iter_mut().enumerate() {
                let i = i as isize;
                *g = godunov_flux(flux, u.extended(i - 1), u.extended(i), sonic);
            }
            for (i, v) in u.values.iter_mut().enumerate() {
                *v -= lambda * (fluxes[i + 1] - fluxes[i]);
            }
            t += h;
            steps += 1;
        }
        t = target;
        u.t = u0.t + t;
        frames.push(u.clone());
    }
    Ok(Trajectory { frames, dt, steps })
}

/// Largest violation of the cell entropy inequality
/// `η(u_i^{n+1}) - η(u_i^n) + λ (Q_{i+1/2} - Q_{i-1/2}) <= 0` over one
/// Godunov step from `u` (numerical entropy flux `Q = q(w)`). Non-positive
/// up to round-off for a monotone scheme.
pub fn entropy_step_excess(u: &Field, pair: &EntropyPair, cfl: f64) -> f64 {
    let flux = pair.flux();
    let (lo, hi) = (u.min_value(), u.max_value());
    let sonic = flux.argmin_on(lo, hi);
    let speed = flux.max_speed(lo, hi).max(1e-300);
    let lambda = cfl / speed;
    let n = u.len();
    let w: Vec<f64> = (0..=n as isize)
        .map(|i| interface_state(flux, u.extended(i - 1), u.extended(i), sonic))
        .collect();
    (0..n)
        .map(|i| {
            let next = u.values[i] - lambda * (flux.f(w[i + 1]) - flux.f(w[i]));
            pair.eta(next) - pair.eta(u.values[i]) + lambda * (pair.q(w[i + 1]) - pair.q(w[i]))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxSpec;

    #[test]
    fn riemann_examples() {
        let b = FluxFn::burgers();
        let shock = RiemannData::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(exact_riemann(shock, &b, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(exact_riemann(shock, &b, 2.0, 1.0 + 1e-12).unwrap(), 0.0);
        assert_eq!(exact_riemann(shock, &b, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(exact_riemann(shock, &b, 0.0, 1e-9).unwrap(), 0.0);
        let fan = RiemannData::new(0.0, 1.0, 0.0).unwrap();
        assert!((exact_riemann(fan, &b, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(exact_riemann(fan, &b, -1.0, 0.5).is_err());
        assert!(RiemannData::new(1.0, 1.0, 0.0).is_err());
        let cubic = FluxFn::new("cubic", true, |u| u * u * u, |u| 3.0 * u * u);
        assert!(exact_riemann(RiemannData::new(-1.0, 1.0, 0.0).unwrap(), &cubic, 1.0, 0.0).is_err());
    }

    #[test]
    fn interface_state_matches_the_min_max_formula() {
        for spec in [FluxSpec::Burgers, FluxSpec::Quartic, FluxSpec::Linear { speed: -0.7 }] {
            let f = spec.build();
            let sonic = f.argmin_on(-2.0, 2.0);
            for a in [-1.5, -0.4, 0.0, 0.3, 1.2] {
                for b in [-1.1, -0.2, 0.0, 0.6, 1.4] {
                    let g = godunov_flux(&f, a, b, sonic);
                    let w = f.f(interface_state(&f, a, b, sonic));
                    assert!((g - w).abs() < 1e-12, "{} a={a} b={b}: {g} vs {w}", f.label);
                }
            }
        }
    }

    #[test]
    fn cell_averages_of_a_shock_are_exact() {
        let b = FluxFn::burgers();
        let data = RiemannData::new(1.0, 0.0, 0.0).unwrap();
        let g = GridSpec::truncated(-1.0, 1.0, 21, 1.0, 0.0).unwrap();
        // Shock at 0.2 splits the cell [0.15, 0.25] in half.
        let avg = exact_riemann_cell_averages(data, &b, 0.4, &g).unwrap();
        assert!((avg.values[12] - 0.5).abs() < 1e-12);
        assert!((avg.mass() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn constant_data_stays_constant() {
        let g = GridSpec::truncated(-1.0, 1.0, 50, 0.3, 0.3).unwrap();
        let u0 = Field::constant(g, 0.3).unwrap();
        let tr = godunov_evolve(&u0, &FluxFn::burgers(), 1.0, 0.9).unwrap();
        assert_eq!(tr.last().values, u0.values);
    }
}
