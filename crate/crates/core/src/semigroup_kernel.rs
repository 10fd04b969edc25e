//! The stable-law kernel `K(t, x)`, inverse Fourier transform of
//! `exp((iξ)^{1+α} t)`, tabulated at `t = 1` and rescaled by self-similarity
//! `K(t, x) = t^{-1/(1+α)} K(1, x t^{-1/(1+α)})`.
//!
//! The kernel is totally skewed: it decays algebraically like
//! `y^{-2-α}/Γ(-1-α)` as `y → +∞` and super-exponentially as `y → -∞`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::fractional_ops::Alpha;
use crate::grid::{Boundary, Field, GridSpec};
use crate::par::{self, Execution};
use crate::special::{fft_size, gamma, rgamma};

pub const DEFAULT_XI_MAX_CAP: f64 = 2000.0;
const MAX_FFT_LEN: usize = 1 << 23;
const PERIOD_FACTOR: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub alpha: f64,
    pub y_grid: GridSpec,
    /// `K(1, y_i)`.
    pub values: Vec<f64>,
    pub quad_tol: f64,
    /// Largest frequency in the quadrature.
    pub xi_max: f64,
    /// Largest imaginary part left by the inverse transform.
    pub imag_residue: f64,
}

/// Frequency beyond which `exp(-ξ^{1+α} sin(απ/2)) < tol`.
pub fn required_xi_max(alpha: f64, tol: f64) -> f64 {
    ((1.0 / tol).ln() / (alpha * PI / 2.0).sin()).powf(1.0 / (1.0 + alpha))
}

/// `sup K(1, ·) <= √2 Γ(1/(1+α)) / (√π (1+α) sin^{1/(1+α)}(απ/2))`.
pub fn peak_bound(alpha: f64) -> f64 {
    let s = 1.0 + alpha;
    2f64.sqrt() * gamma(1.0 / s) / (PI.sqrt() * s * (alpha * PI / 2.0).sin().powf(1.0 / s))
}

/// The sharper `(1/2π)∫|exp((iξ)^{1+α})| dξ`.
pub fn l1_symbol_bound(alpha: f64) -> f64 {
    let s = 1.0 + alpha;
    gamma(1.0 / s) / (PI * s * (alpha * PI / 2.0).sin().powf(1.0 / s))
}

pub fn build_kernel_profile(alpha: f64, y_grid: GridSpec, quad_tol: f64) -> Result<KernelProfile> {
    build_kernel_profile_capped(alpha, y_grid, quad_tol, DEFAULT_XI_MAX_CAP)
}

pub fn build_kernel_profile_capped(
    alpha: f64,
    y_grid: GridSpec,
    quad_tol: f64,
    xi_max_cap: f64,
) -> Result<KernelProfile> {
    let alpha = Alpha::new(alpha)?.get();
    y_grid.validate()?;
    if !(quad_tol > 1e-14 && quad_tol < 1e-3) {
        return Err(FracError::param("quad_tol", quad_tol, "must lie in (1e-14, 1e-3)"));
    }
    let xi_req = required_xi_max(alpha, quad_tol);
    if !(xi_req <= xi_max_cap) {
        return Err(FracError::XiMaxExceeded {
            required: xi_req,
            cap: xi_max_cap,
        });
    }
    let n = y_grid.n;
    let dy = y_grid.dx;
    let m = ((dy * xi_req / PI).ceil() as usize).max(1);
    let len = if y_grid.is_periodic() {
        n * m
    } else {
        let mut factor = PERIOD_FACTOR;
        while factor > 4 && fft_size(factor * n * m) > MAX_FFT_LEN {
            factor /= 2;
        }
        fft_size(factor * n * m)
    };
    let delta = dy / m as f64;
    let (samples, imag_residue) = inverse_transform(alpha, 1.0, y_grid.x0, delta, len);
    let values = (0..n).map(|i| samples[i * m]).collect();
    Ok(KernelProfile {
        alpha,
        y_grid,
        values,
        quad_tol,
        xi_max: PI / delta,
        imag_residue,
    })
}

/// `K(1, ·)` on `[-20, 200]` at spacing 0.02 and tolerance 1e-10, built
/// once per `α` and shared.
pub fn unit_profile(alpha: f64) -> Result<Arc<KernelProfile>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<KernelProfile>>>> = OnceLock::new();
    let alpha = Alpha::new(alpha)?.get();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("kernel cache poisoned").get(&alpha.to_bits()) {
        return Ok(Arc::clone(p));
    }
    let grid = GridSpec::new(-20.0, 0.02, 11001, Boundary::TruncatedLine { left_pad: 0.0, right_pad: 0.0 })?;
    let p = Arc::new(build_kernel_profile(alpha, grid, 1e-10)?);
    cache.lock().expect("kernel cache poisoned").insert(alpha.to_bits(), Arc::clone(&p));
    Ok(p)
}

/// Trapezoidal inverse transform of `exp((iξ)^{1+α} t)` on the lattice
/// `x0 + k δ`, `k < len`, periodized with period `len·δ`.
fn inverse_transform(alpha: f64, t: f64, x0: f64, delta: f64, len: usize) -> (Vec<f64>, f64) {
    let period = len as f64 * delta;
    let dxi = 2.0 * PI / period;
    let s = 1.0 + alpha;
    let mut buf: Vec<Complex64> = (0..len)
        .map(|j| {
            let jj = if j <= len / 2 { j as i64 } else { j as i64 - len as i64 };
            let xi = jj as f64 * dxi;
            if jj == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let g = (Complex64::new(0.0, xi).powf(s) * t).exp();
            g * Complex64::from_polar(1.0, xi * x0)
        })
        .collect();
    if len.is_multiple_of(2) {
        // The Nyquist mode has no partner; keep its real (symmetric) part.
        let k = len / 2;
        buf[k] = Complex64::new(buf[k].re, 0.0);
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let scale = dxi / (2.0 * PI);
    let imag = buf.iter().fold(0.0_f64, |a, c| a.max((c.im * scale).abs()));
    (buf.into_iter().map(|c| c.re * scale).collect(), imag)
}

/// Leading terms of the `y → +∞` expansion
/// `K(1, y) ~ Σ_k y^{-1-k(1+α)} / (k! Γ(-k(1+α)))`.
pub fn right_tail_asymptotic(alpha: f64, y: f64) -> f64 {
    asymptotic_terms(alpha, y, |k, s| y.powf(-1.0 - k as f64 * s) * rgamma(-(k as f64) * s))
}

/// `∫_y^∞ K(1, z) dz` from the same expansion.
pub fn right_tail_mass(alpha: f64, y: f64) -> f64 {
    asymptotic_terms(alpha, y, |k, s| {
        let ks = k as f64 * s;
        y.powf(-ks) * rgamma(-ks) / ks
    })
}

fn asymptotic_terms(alpha: f64, _y: f64, term: impl Fn(u32, f64) -> f64) -> f64 {
    let s = 1.0 + alpha;
    let mut sum = 0.0;
    let mut fact = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..=8u32 {
        fact *= k as f64;
        let t = term(k, s) / fact;
        // Stop once the (divergent) series stops decreasing.
        if t != 0.0 {
            if t.abs() >= last {
                break;
            }
            last = t.abs();
        }
        sum += t;
    }
    sum
}

/// Local power law `c·y^{-p}` fitted through two outer samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerTail {
    pub fn eval(&self, y: f64) -> f64 {
        self.coeff * y.abs().powf(-self.exponent)
    }
}

impl KernelProfile {
    pub fn s(&self, t: f64) -> f64 {
        t.powf(1.0 / (1.0 + self.alpha))
    }

    pub fn y_min(&self) -> f64 {
        self.y_grid.x0
    }

    pub fn y_max(&self) -> f64 {
        self.y_grid.x_last()
    }

    /// Least-squares slope of `log K` against `log y` on `[edge/2, edge]`.
    pub fn fitted_tail_exponent(&self) -> Option<f64> {
        let edge = self.y_max();
        if edge <= 0.0 {
            return None;
        }
        let pts: Vec<(f64, f64)> = self
            .y_grid
            .xs()
            .into_iter()
            .zip(&self.values)
            .filter(|(y, k)| *y >= 0.5 * edge && **k > 0.0)
            .map(|(y, k)| (y.ln(), k.ln()))
            .collect();
        crate::experiments::fit::linear_fit(&pts).map(|f| f.slope)
    }

    /// Power law through the last sample and the one at 90% of the edge.
    pub fn right_power_tail(&self) -> PowerTail {
        let n = self.values.len();
        let j = self.y_grid.nearest_index(0.9 * self.y_max()).min(n - 2);
        let (y1, k1) = (self.y_grid.x(j), self.values[j].max(f64::MIN_POSITIVE));
        let (y2, k2) = (self.y_max(), self.values[n - 1].max(f64::MIN_POSITIVE));
        let exponent = if y1 > 0.0 && y2 > y1 {
            -(k2 / k1).ln() / (y2 / y1).ln()
        } else {
            2.0
        };
        PowerTail {
            coeff: k2 * y2.abs().powf(exponent),
            exponent,
        }
    }

    /// `C/y²` matched to the leftmost sample.
    pub fn left_power_tail(&self) -> PowerTail {
        let y0 = self.y_min();
        PowerTail {
            coeff: self.values[0].max(0.0) * y0 * y0,
            exponent: 2.0,
        }
    }

    /// `K(1, y)`: cubic Lagrange interpolation inside the window, tail
    /// models outside (or periodic wrap).
    pub fn eval_unit(&self, y: f64) -> f64 {
        let g = &self.y_grid;
        let n = g.n;
        let mut r = (y - g.x0) / g.dx;
        if g.is_periodic() {
            r = r.rem_euclid(n as f64);
        } else if r < 0.0 {
            return self.left_power_tail().eval(y);
        } else if r > (n - 1) as f64 {
            return self.right_power_tail().eval(y);
        }
        let i = (r.floor() as isize).clamp(1, n as isize - 3);
        let f = r - i as f64;
        let at = |k: isize| -> f64 {
            if g.is_periodic() {
                self.values[k.rem_euclid(n as isize) as usize]
            } else {
                self.values[k.clamp(0, n as isize - 1) as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // nodes at -1, 0, 1, 2
        -f * (f - 1.0) * (f - 2.0) / 6.0 * p0
            + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * p1
            - (f + 1.0) * f * (f - 2.0) / 2.0 * p2
            + (f + 1.0) * f * (f - 1.0) / 6.0 * p3
    }

    /// Trapezoidal mass of the window plus both tail estimates.
    pub fn mass(&self) -> f64 {
        let inner = trapezoid(&self.values, self.y_grid.dx, self.y_grid.is_periodic());
        if self.y_grid.is_periodic() {
            return inner;
        }
        inner + self.left_tail_mass() + self.right_tail_mass()
    }

    pub fn right_tail_mass(&self) -> f64 {
        if self.y_max() <= 0.0 {
            return 0.0;
        }
        right_tail_mass(self.alpha, self.y_max())
    }

    /// `K(y0)/(d log K/dy)` at the left edge (the left tail is light).
    pub fn left_tail_mass(&self) -> f64 {
        let (k0, k1) = (self.values[0], self.values[1]);
        if k0 <= 0.0 || k1 <= k0 {
            return 0.0;
        }
        let slope = (k1 / k0).ln() / self.y_grid.dx;
        k0 / slope
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cumulative distribution `F(y) = ∫_{-∞}^y K(1, z) dz`.
    pub fn cdf(&self) -> KernelCdf<'_> {
        let dy = self.y_grid.dx;
        let mut cum = Vec::with_capacity(self.values.len());
        let mut acc = self.left_tail_mass();
        cum.push(acc);
        for w in self.values.windows(2) {
            acc += 0.5 * dy * (w[0].max(0.0) + w[1].max(0.0));
            cum.push(acc);
        }
        KernelCdf { profile: self, cum }
    }
}

fn trapezoid(v: &[f64], h: f64, periodic: bool) -> f64 {
    let s: f64 = v.iter().sum();
    if periodic {
        h * s
    } else {
        h * (s - 0.5 * (v[0] + v[v.len() - 1]))
    }
}

pub struct KernelCdf<'a> {
    profile: &'a KernelProfile,
    cum: Vec<f64>,
}

impl KernelCdf<'_> {
    /// `F(+∞)`: one up to the tabulation error.
    pub fn total(&self) -> f64 {
        let p = self.profile;
        self.cum[p.y_grid.n - 1] + right_tail_mass(p.alpha, p.y_grid.x_last())
    }

    pub fn eval(&self, y: f64) -> f64 {
        let p = self.profile;
        let g = &p.y_grid;
        if y <= g.x0 {
            let tail = p.left_power_tail();
            // ∫_{-∞}^y C/z² dz = C/|y|, capped by the edge value.
            return (tail.coeff / y.abs()).min(self.cum[0]);
        }
        if y >= g.x_last() {
            let edge = right_tail_mass(p.alpha, g.x_last());
            let beyond = right_tail_mass(p.alpha, y).max(0.0);
            return self.cum[g.n - 1] + (edge - beyond);
        }
        let r = (y - g.x0) / g.dx;
        let i = (r.floor() as usize).min(g.n - 2);
        let f = r - i as f64;
        let (k0, k1) = (p.values[i].max(0.0), p.values[i + 1].max(0.0));
        // Integrate the linear interpolant exactly.
        self.cum[i] + g.dx * (f * k0 + 0.5 * f * f * (k1 - k0))
    }
}

/// `K(t, x) = s^{-1} K(1, x/s)`, `s = t^{1/(1+α)}`.
pub fn kernel_at(t: f64, x: f64, profile: &KernelProfile) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FracError::param("t", t, "must be positive"));
    }
    let s = profile.s(t);
    Ok(profile.eval_unit(x / s) / s)
}

/// Discrete L1 norm of `∂x K(t, ·)` by central differences of samples at
/// spacing `dx` over the tabulated window.
pub fn derivative_l1_norm(profile: &KernelProfile, t: f64, dx: f64) -> Result<f64> {
    let s = profile.s(t);
    let (lo, hi) = (profile.y_min() * s, profile.y_max() * s);
    let n = ((hi - lo) / dx).floor() as usize;
    let k: Vec<f64> = (0..=n)
        .map(|i| kernel_at(t, lo + i as f64 * dx, profile))
        .collect::<Result<_>>()?;
    Ok(k.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Sampled convolution weights `κ_m = dx K(t, m dx)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    /// `kappa[m + offset]` for displacements `m` in `-offset..=offset`
    /// (truncated) or `0..n` (periodic, already folded).
    pub kappa: Vec<f64>,
    pub offset: usize,
}

fn kernel_weights(grid: &GridSpec, t: f64, profile: &KernelProfile) -> Result<KernelWeights> {
    let n = grid.n;
    let s = profile.s(t);
    let dx = grid.dx;
    match grid.boundary {
        Boundary::Periodic => {
            // Fold all periodic images exactly through the spectrum.
            let m = ((dx / s * required_xi_max(profile.alpha, profile.quad_tol) / PI).ceil()
                as usize)
                .max(1);
            let (samples, _) = inverse_transform(profile.alpha, t, 0.0, dx / m as f64, n * m);
            let mut kappa: Vec<f64> = (0..n).map(|j| (samples[j * m] * dx).max(0.0)).collect();
            let total: f64 = kappa.iter().sum();
            kappa.iter_mut().for_each(|k| *k /= total);
            Ok(KernelWeights { kappa, offset: 0 })
        }
        Boundary::TruncatedLine { .. } => {
            let offset = n - 1;
            let kappa = (0..2 * n - 1)
                .map(|j| {
                    let m = j as f64 - offset as f64;
                    (dx / s * profile.eval_unit(m * dx / s)).max(0.0)
                })
                .collect();
            Ok(KernelWeights { kappa, offset })
        }
    }
}

/// Cell-integrated transition weights of `K(t, ·)` on a truncated grid of
/// `n` cells: `kappa[m + n - 1] = ∫ K(t, y) dy` over
/// `[(m - 1/2)dx, (m + 1/2)dx]`, plus the mass `left[i]`/`right[i]` that
/// cell `i` receives from the constant pads. Every row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CellWeights {
    pub kappa: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

pub fn cell_weights(profile: &KernelProfile, t: f64, dx: f64, n: usize) -> Result<CellWeights> {
    if !(t > 0.0) {
        return Err(FracError::param("t", t, "must be positive"));
    }
    let cdf = profile.cdf();
    let h = dx / profile.s(t);
    let nn = n as isize;
    // F at the cell edges (m - 1/2) dx for m in -(n-1)..=n.
    let total = cdf.total();
    let edges: Vec<f64> = (-(nn - 1)..=nn)
        .map(|m| (cdf.eval((m as f64 - 0.5) * h) / total).min(1.0))
        .collect();
    let kappa = edges.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    let left = (0..n).map(|i| (1.0 - edges[i + n]).max(0.0)).collect();
    let right = (0..n).map(|i| edges[i]).collect();
    Ok(CellWeights { kappa, left, right })
}

/// `K(t, ·) * u0` with nonnegative, mass-one weights: constants are preserved
/// exactly and the output stays within the range of the data (pads included).
pub fn convolve_with_kernel(u0: &Field, t: f64, profile: &KernelProfile) -> Result<Field> {
    convolve_with_kernel_exec(u0, t, profile, Execution::default())
}

pub fn convolve_with_kernel_exec(
    u0: &Field,
    t: f64,
    profile: &KernelProfile,
    exec: Execution,
) -> Result<Field> {
    if !(t > 0.0) {
        return Err(FracError::param("t", t, "must be positive"));
    }
    let grid = u0.grid;
    let n = grid.n;
    let w = kernel_weights(&grid, t, profile)?;
    let u = &u0.values;
    let values = match grid.boundary {
        Boundary::Periodic => par::map_range(n, exec, |i| {
            let mut acc = 0.0;
            for (j, uj) in u.iter().enumerate() {
                acc += w.kappa[(i + n - j) % n] * uj;
            }
            acc
        }),
        Boundary::TruncatedLine {
            left_pad,
            right_pad,
        } => {
            let cdf = profile.cdf();
            let s = profile.s(t);
            let h = grid.dx / s;
            par::map_range(n, exec, |i| {
                let mut acc = 0.0;
                let mut inner = 0.0;
                for (j, uj) in u.iter().enumerate() {
                    let k = w.kappa[i + w.offset - j];
                    acc += k * uj;
                    inner += k;
                }
                // Sources left of the window sit at displacements > i.
                let wl = (1.0 - cdf.eval((i as f64 + 0.5) * h)).max(0.0);
                let wr = cdf.eval((i as f64 - n as f64 + 0.5) * h).max(0.0);
                (acc + wl * left_pad + wr * right_pad) / (inner + wl + wr)
            })
        }
    };
    Field::at_time(grid, values, u0.t + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(alpha: f64) -> KernelProfile {
        let g = GridSpec::new(-20.0, 0.02, 11001, Boundary::TruncatedLine { left_pad: 0.0, right_pad: 0.0 }).unwrap();
        build_kernel_profile(alpha, g, 1e-10).unwrap()
    }

    #[test]
    fn mass_and_sign() {
        let p = profile(0.5);
        assert!((p.mass() - 1.0).abs() < 1e-6, "mass {}", p.mass());
        assert!(p.min_value() > -1e-9);
        assert!(p.max_value() <= l1_symbol_bound(0.5));
        assert!(l1_symbol_bound(0.5) < peak_bound(0.5));
        assert!(p.imag_residue < 1e-10);
    }

    #[test]
    fn matches_tail_expansion() {
        let p = profile(0.5);
        for y in [100.0, 150.0, 200.0] {
            let k = p.eval_unit(y);
            let a = right_tail_asymptotic(0.5, y);
            assert!((k / a - 1.0).abs() < 1e-4, "y = {y}: {k} vs {a}");
        }
    }

    #[test]
    fn rejects_tiny_alpha() {
        let g = GridSpec::truncated(-1.0, 1.0, 16, 0.0, 0.0).unwrap();
        assert!(matches!(
            build_kernel_profile(0.005, g, 1e-10),
            Err(FracError::XiMaxExceeded { .. })
        ));
        assert!(build_kernel_profile(0.5, g, 1e-2).is_err());
    }

    #[test]
    fn cdf_is_monotone_and_normalized() {
        let p = profile(0.5);
        let cdf = p.cdf();
        let mut prev = 0.0;
        for j in 0..400 {
            let y = -40.0 + j as f64;
            let f = cdf.eval(y);
            assert!(f >= prev - 1e-15);
            prev = f;
        }
        assert!((cdf.eval(1e6) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_at_rejects_nonpositive_time() {
        let p = profile(0.5);
        assert!(kernel_at(0.0, 1.0, &p).is_err());
    }
}
