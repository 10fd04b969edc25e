//! `e(t) = E_α(-t^α)` and its derivative for `0 < α < 1`, and the
//! traveling-wave tail fundamental solution `v(z) = E_α(μ z^α)`, `μ < 0`.
//!
//! Three regimes in `x = t^α`:
//! * `x <= 1`: the power series, no cancellation;
//! * large `t`: the algebraic expansion `Σ (-1)^{k+1} x^{-k} / Γ(1-αk)`,
//!   summed to its smallest term and used only when that term is tiny;
//! * in between: the real Laplace representation
//!   `e(t) = sin(απ)/(απ) ∫_0^∞ e^{-t q^{1/α}} / (q² + 2q cos(απ) + 1) dq`,
//!   folded onto `[0, 1]` by `q → 1/q`, which leaves a smooth integrand.

use std::f64::consts::PI;

use quadrature::double_exponential;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::rgamma;

const SERIES_MAX_X: f64 = 1.0;
/// Accept the asymptotic sum when its smallest term is below this.
const ASYMPTOTIC_TOL: f64 = 1e-15;
const QUAD_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Series,
    Laplace,
    Asymptotic,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(FracError::param("alpha", alpha, "must lie strictly inside (0, 1)"))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(FracError::param("z", t, "must be finite and >= 0"))
    }
}

/// `Σ_{k>=k0} (-x)^k / Γ(αk + β)`.
fn series(alpha: f64, beta: f64, x: f64, k0: usize) -> f64 {
    let mut sum = 0.0;
    let mut pow = (-x).powi(k0 as i32);
    for k in k0..400 {
        let term = pow * rgamma(alpha * k as f64 + beta);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > k0 + 2 {
            break;
        }
        pow *= -x;
    }
    sum
}

/// `Σ_{k>=1} (-1)^{k+1} x^{-k} / Γ(β - αk)` truncated before its terms start
/// to grow; `None` unless the smallest term is below [`ASYMPTOTIC_TOL`].
fn asymptotic(alpha: f64, beta: f64, x: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        pow /= x;
        let g = rgamma(beta - alpha * k as f64);
        if g == 0.0 {
            continue;
        }
        let term = if k % 2 == 1 { pow * g } else { -pow * g };
        if term.abs() > prev {
            return None;
        }
        sum += term;
        prev = term.abs();
        if prev < ASYMPTOTIC_TOL * sum.abs() {
            return Some(sum);
        }
    }
    None
}

fn laplace_fold(alpha: f64, g: impl Fn(f64) -> f64) -> f64 {
    let c = (alpha * PI).cos();
    let h = |q: f64| {
        if q <= 0.0 {
            return 0.0;
        }
        let p = 1.0 / alpha;
        (g(q.powf(p)) + g(q.powf(-p))) / (q * q + 2.0 * q * c + 1.0)
    };
    (alpha * PI).sin() / (alpha * PI) * double_exponential::integrate(h, 0.0, 1.0, QUAD_TOL).integral
}

fn laplace(alpha: f64, t: f64) -> f64 {
    laplace_fold(alpha, |r| (-r * t).exp())
}

fn laplace_derivative(alpha: f64, t: f64) -> f64 {
    -laplace_fold(alpha, |r| if r.is_finite() { r * (-r * t).exp() } else { 0.0 })
}

/// Regime used for `e(t)` at this `t`.
pub fn branch(alpha: f64, t: f64) -> Branch {
    let x = t.powf(alpha);
    if x <= SERIES_MAX_X {
        Branch::Series
    } else if asymptotic(alpha, 1.0, x).is_some() && asymptotic(alpha, 0.0, x).is_some() {
        Branch::Asymptotic
    } else {
        Branch::Laplace
    }
}

/// `E_α(-t^α)`, completely monotone from 1 at `t = 0` to 0.
pub fn ml_decay(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_t(t)?;
    let x = t.powf(alpha);
    Ok(match branch(alpha, t) {
        Branch::Series => series(alpha, 1.0, x, 0),
        Branch::Asymptotic => asymptotic(alpha, 1.0, x).expect("branch checked"),
        Branch::Laplace => laplace(alpha, t),
    })
}

/// `d/dt E_α(-t^α) = -t^{α-1} E_{α,α}(-t^α)`; `-∞` at `t = 0`.
pub fn ml_decay_derivative(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_t(t)?;
    if t == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let x = t.powf(alpha);
    Ok(match branch(alpha, t) {
        // (1/t) Σ_{k>=1} (-x)^k / Γ(αk)
        Branch::Series => series(alpha, 0.0, x, 1) / t,
        // (1/t) Σ (-1)^{k+1} x^{-k} / Γ(-αk)
        Branch::Asymptotic => asymptotic(alpha, 0.0, x).expect("branch checked") / t,
        Branch::Laplace => laplace_derivative(alpha, t),
    })
}

fn check_mu(mu: f64) -> Result<()> {
    if mu < 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(FracError::param("mu", mu, "must be negative (decaying branch)"))
    }
}

/// `v(z) = E_α(μ z^α)` for `μ < 0`.
pub fn mittag_leffler_v(z: f64, alpha: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    check_t(z)?;
    ml_decay(alpha, (-mu).powf(1.0 / alpha) * z)
}

/// `v'(z) = μ z^{α-1} E_{α,α}(μ z^α)`.
pub fn mittag_leffler_v_prime(z: f64, alpha: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    check_t(z)?;
    let s = (-mu).powf(1.0 / alpha);
    Ok(s * ml_decay_derivative(alpha, s * z)?)
}

/// `lim z^α v(z) = -1 / (μ Γ(1-α))`.
pub fn v_tail_constant(alpha: f64, mu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_mu(mu)?;
    Ok(-rgamma(1.0 - alpha) / mu)
}

/// `lim_{z→0} v'(z) / z^{α-1} = μ / Γ(α)`.
pub fn v_prime_origin_constant(alpha: f64, mu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_mu(mu)?;
    Ok(mu * rgamma(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    // (α, t, E_α(-t^α), d/dt) from 40-digit arithmetic.
    #[allow(clippy::excessive_precision)]
    const PINNED: [(f64, f64, f64, f64); 20] = [
        (0.25, 0.3, 0.54089130150755628, -0.2121110435045602),
        (0.25, 1.7, 0.43019893802660266, -0.037015052939835124),
        (0.25, 6.0, 0.35325331587371122, -0.0097719003160955526),
        (0.25, 25.0, 0.27473838683653461, -0.0020415794658749235),
        (0.25, 120.0, 0.20231982374619721, -0.00034331094464666454),
        (0.5, 0.3, 0.59201841131473566, -0.43804612741376991),
        (0.5, 1.7, 0.35688176816268338, -0.075831889490824094),
        (0.5, 6.0, 0.2146263390698206, -0.015703093911069719),
        (0.5, 25.0, 0.11070463773306863, -0.002133278976482631),
        (0.5, 120.0, 0.051291258304183654, -0.00021196863224162351),
        (0.75, 0.3, 0.66033746664230044, -0.64269704436129343),
        (0.75, 1.7, 0.27586395732181549, -0.12042682208928279),
        (0.75, 6.0, 0.093512859899954715, -0.014169749625027873),
        (0.75, 25.0, 0.027101038394073898, -0.00089066398933680927),
        (0.75, 120.0, 0.0078272727012670413, -5.0328115929114531e-5),
        (0.9, 0.3, 0.70807456094404936, -0.71873114475103763),
        (0.9, 1.7, 0.22161877602917908, -0.15427505147004992),
        (0.9, 6.0, 0.034253419549917998, -0.0084564026877124558),
        (0.9, 25.0, 0.0064115912287846375, -0.00025623054356885531),
        (0.9, 120.0, 0.0014463594615876337, -1.1099542453521622e-5),
    ];

    #[test]
    fn pinned_high_precision_values() {
        for (alpha, t, e, de) in PINNED {
            let v = ml_decay(alpha, t).unwrap();
            let d = ml_decay_derivative(alpha, t).unwrap();
            assert!((v - e).abs() < 1e-12 * e, "α={alpha} t={t}: {v} vs {e} ({:?})", branch(alpha, t));
            assert!((d - de).abs() < 1e-10 * de.abs(), "α={alpha} t={t}: {d} vs {de} ({:?})", branch(alpha, t));
        }
    }

    #[test]
    fn branches_join_continuously() {
        for alpha in [0.25, 0.5, 0.75, 0.9] {
            let ts: Vec<f64> = (0..4000).map(|i| 1e-3 * 1.005f64.powi(i)).collect();
            for w in ts.windows(2) {
                let (b0, b1) = (branch(alpha, w[0]), branch(alpha, w[1]));
                if b0 != b1 {
                    let m = 0.5 * (w[0] + w[1]);
                    let x = m.powf(alpha);
                    let via_laplace = laplace(alpha, m);
                    let other = match (b0, b1) {
                        (Branch::Series, _) | (_, Branch::Series) => series(alpha, 1.0, x, 0),
                        _ => asymptotic(alpha, 1.0, x).unwrap_or(via_laplace),
                    };
                    assert!((via_laplace - other).abs() < 1e-8, "α={alpha} t={m}: {via_laplace} vs {other}");
                }
            }
        }
    }

    #[test]
    fn rejects_growing_branch() {
        assert!(mittag_leffler_v(1.0, 0.5, 0.0).is_err());
        assert!(mittag_leffler_v(1.0, 0.5, 0.3).is_err());
        assert!(mittag_leffler_v(-1.0, 0.5, -0.3).is_err());
        assert!(ml_decay(1.0, 1.0).is_err());
        assert_eq!(mittag_leffler_v(0.0, 0.3, -2.0).unwrap(), 1.0);
    }
}
