//! Flux functions and Kruzhkov entropy pairs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named fluxes usable from config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxSpec {
    Zero,
    Linear { speed: f64 },
    /// `u²/2`
    Burgers,
    /// `u⁴`
    Quartic,
}

impl FluxSpec {
    pub fn build(self) -> FluxFn {
        match self {
            FluxSpec::Zero => FluxFn::new("zero", true, |_| 0.0, |_| 0.0),
            FluxSpec::Linear { speed } => {
                FluxFn::new(format!("linear({speed})"), true, move |u| speed * u, move |_| speed)
            }
            FluxSpec::Burgers => FluxFn::burgers(),
            FluxSpec::Quartic => FluxFn::new("quartic", true, |u| u.powi(4), |u| 4.0 * u.powi(3)),
        }
    }
}

#[derive(Clone)]
pub struct FluxFn {
    pub label: String,
    pub convex: bool,
    f: ScalarFn,
    f_prime: ScalarFn,
}

impl fmt::Debug for FluxFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxFn")
            .field("label", &self.label)
            .field("convex", &self.convex)
            .finish()
    }
}

impl FluxFn {
    pub fn new(
        label: impl Into<String>,
        convex: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FluxFn {
            label: label.into(),
            convex,
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
        }
    }

    pub fn burgers() -> Self {
        FluxFn::new("burgers", true, |u| 0.5 * u * u, |u| u)
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        (self.f_prime)(u)
    }

    /// `max |f'|` on `[lo, hi]`, sampled (exact at the endpoints for convex f).
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let m = 256;
        (0..=m)
            .map(|j| self.f_prime(lo + (hi - lo) * j as f64 / m as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Lipschitz constant of `f` on `[-r, r]`.
    pub fn lipschitz(&self, r: f64) -> f64 {
        self.max_speed(-r, r)
    }

    /// Checks finiteness and that `f'` matches central differences of `f`
    /// within `1e-6` relative on `[lo, hi]`.
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<()> {
        let m = 64;
        let scale = self.max_speed(lo, hi).max(1.0);
        for j in 0..=m {
            let u = lo + (hi - lo) * j as f64 / m as f64;
            let (fu, fp) = (self.f(u), self.f_prime(u));
            if !fu.is_finite() || !fp.is_finite() {
                return Err(FracError::param("flux", u, format!("`{}` is not finite", self.label)));
            }
            let h = 1e-4 * (1.0 + u.abs());
            let fd = (self.f(u + h) - self.f(u - h)) / (2.0 * h);
            if (fd - fp).abs() > 1e-6 * scale {
                return Err(FracError::param(
                    "flux",
                    u,
                    format!("derivative of `{}` disagrees with finite differences", self.label),
                ));
            }
        }
        Ok(())
    }

    /// Rejects fluxes that are not flagged convex or whose sampled `f'`
    /// decreases on `[lo, hi]`.
    pub fn require_convex(&self, lo: f64, hi: f64) -> Result<()> {
        let err = || FracError::NonConvexFlux {
            label: self.label.clone(),
            lo,
            hi,
        };
        if !self.convex {
            return Err(err());
        }
        let m = 256;
        let mut prev = self.f_prime(lo);
        for j in 1..=m {
            let d = self.f_prime(lo + (hi - lo) * j as f64 / m as f64);
            if d < prev - 1e-12 * (1.0 + prev.abs()) {
                return Err(err());
            }
            prev = d;
        }
        Ok(())
    }

    /// Minimizer of a convex flux on `[lo, hi]` by bisection on `f'`.
    pub fn argmin_on(&self, lo: f64, hi: f64) -> f64 {
        if self.f_prime(lo) >= 0.0 {
            return lo;
        }
        if self.f_prime(hi) <= 0.0 {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.f_prime(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Solves `f'(u) = s` on `[lo, hi]` for convex f (clamped to the ends).
    pub fn inverse_speed(&self, s: f64, lo: f64, hi: f64) -> f64 {
        if self.f_prime(lo) >= s {
            return lo;
        }
        if self.f_prime(hi) <= s {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.f_prime(m) < s {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Kruzhkov pair `η(u) = |u - k|`, `q(u) = sign(u - k)(f(u) - f(k))`.
#[derive(Debug, Clone)]
pub struct EntropyPair {
    pub k: f64,
    flux: FluxFn,
}

impl EntropyPair {
    pub fn kruzhkov(k: f64, flux: FluxFn) -> Self {
        EntropyPair { k, flux }
    }

    #[inline]
    pub fn eta(&self, u: f64) -> f64 {
        (u - self.k).abs()
    }

    #[inline]
    pub fn q(&self, u: f64) -> f64 {
        sign(u - self.k) * (self.flux.f(u) - self.flux.f(self.k))
    }

    pub fn flux(&self) -> &FluxFn {
        &self.flux
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_helpers() {
        let f = FluxFn::burgers();
        f.validate_on(-2.0, 2.0).unwrap();
        f.require_convex(-2.0, 2.0).unwrap();
        assert_eq!(f.max_speed(-1.0, 0.5), 1.0);
        assert!(f.argmin_on(-1.0, 1.0).abs() < 1e-12);
        assert_eq!(f.argmin_on(0.2, 1.0), 0.2);
        assert!((f.inverse_speed(0.3, 0.0, 1.0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_is_rejected() {
        let cubic = FluxFn::new("cubic", true, |u| u * u * u, |u| 3.0 * u * u);
        assert!(cubic.require_convex(-1.0, 1.0).is_err());
        assert!(cubic.require_convex(0.0, 1.0).is_ok());
        let bad = FluxFn::new("bad", true, |u| u * u, |u| u);
        assert!(bad.validate_on(-1.0, 1.0).is_err());
    }

    #[test]
    fn kruzhkov_pair() {
        let p = EntropyPair::kruzhkov(0.5, FluxFn::burgers());
        assert_eq!(p.q(0.5), 0.0);
        assert_eq!(p.eta(0.0), 0.5);
        // q(u) = sign(u-k)(u²-k²)/2
        assert!((p.q(0.0) - 0.125).abs() < 1e-15);
        for (a, b) in [(-1.0, 2.0), (0.0, 0.7), (0.4, 0.6)] {
            let mid = p.eta(0.5 * (a + b));
            assert!(mid <= 0.5 * (p.eta(a) + p.eta(b)) + 1e-15);
        }
    }
}
