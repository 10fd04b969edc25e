use fracwave::mittag_leffler::*;
use num_complex::Complex64;
use proptest::prelude::*;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

/// Fixed-Talbot inversion of `F` at `t` (Abate–Valkó), `m` nodes.
fn talbot(f: impl Fn(Complex64) -> Complex64, t: f64, m: usize) -> f64 {
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut acc = 0.5 * (f(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..m {
        let th = k as f64 * std::f64::consts::PI / m as f64;
        let cot = th.cos() / th.sin();
        let s = Complex64::new(r * th * cot, r * th);
        let sigma = th + (th * cot - 1.0) * cot;
        acc += ((s * t).exp() * f(s) * Complex64::new(1.0, sigma)).re;
    }
    acc * r / m as f64
}

/// Laplace transform of `E_α(-t^α)`.
fn decay_transform(alpha: f64) -> impl Fn(Complex64) -> Complex64 {
    move |s| s.powf(alpha - 1.0) / (s.powf(alpha) + 1.0)
}

#[test]
fn half_order_closed_form() {
    // E_{1/2}(-√t) = exp(t) erfc(√t).
    for t in [1e-6f64, 0.01, 0.3, 1.0, 2.5, 7.0, 20.0] {
        let exact = t.exp() * erfc(t.sqrt());
        let v = ml_decay(0.5, t).unwrap();
        assert!((v - exact).abs() <= 1e-12 + 1e-10 * exact, "t {t}: {v} vs {exact}");
    }
}

#[test]
fn talbot_oracle_across_branches() {
    for alpha in [0.25, 0.5, 0.75, 0.9] {
        for t in [0.05, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0] {
            let oracle = talbot(decay_transform(alpha), t, 32);
            let v = ml_decay(alpha, t).unwrap();
            assert!((v - oracle).abs() < 1e-8, "alpha {alpha} t {t} ({:?}): {v} vs {oracle}", branch(alpha, t));
        }
    }
}

#[test]
fn derivative_matches_difference_quotient() {
    for alpha in [0.3, 0.6] {
        for t in [0.2, 1.0, 3.0, 30.0] {
            let h = 1e-5 * t;
            let fd = (ml_decay(alpha, t + h).unwrap() - ml_decay(alpha, t - h).unwrap()) / (2.0 * h);
            let d = ml_decay_derivative(alpha, t).unwrap();
            assert!((d - fd).abs() < 1e-6 * d.abs().max(1e-3), "alpha {alpha} t {t}: {d} vs {fd}");
        }
    }
}

#[test]
fn fundamental_solution_limits() {
    let (alpha, mu) = (0.5, -2.0);
    assert_eq!(mittag_leffler_v(0.0, alpha, mu).unwrap(), 1.0);
    let c = v_tail_constant(alpha, mu).unwrap();
    assert!((c + 1.0 / (mu * gamma(1.0 - alpha))).abs() < 1e-14);
    let far: Vec<f64> = [1e6, 3e6, 1e7].iter().map(|&z: &f64| z.powf(alpha) * mittag_leffler_v(z, alpha, mu).unwrap()).collect();
    for v in &far {
        assert!((v / c - 1.0).abs() < 1e-3, "{v} vs {c}");
    }
    let z = 1e-8;
    let ratio = mittag_leffler_v_prime(z, alpha, mu).unwrap() / z.powf(alpha - 1.0);
    let target = v_prime_origin_constant(alpha, mu).unwrap();
    assert!((ratio / target - 1.0).abs() < 0.02, "{ratio} vs {target}");
    assert!((target - mu / gamma(alpha)).abs() < 1e-14);
}

#[test]
fn rejects_out_of_domain() {
    assert!(mittag_leffler_v(1.0, 0.5, 1.0).is_err());
    assert!(mittag_leffler_v(-1.0, 0.5, -1.0).is_err());
    assert!(ml_decay(1.5, 1.0).is_err());
}

proptest! {
    #[test]
    fn completely_monotone_samples(alpha in 0.1..0.95f64, t in 1e-4..50.0f64, dt in 1e-3..5.0f64) {
        let (a, b) = (ml_decay(alpha, t).unwrap(), ml_decay(alpha, t + dt).unwrap());
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a + 1e-14, "{a} {b}");
        prop_assert!(ml_decay_derivative(alpha, t).unwrap() < 0.0);
    }

    #[test]
    fn v_scales_with_mu(alpha in 0.2..0.9f64, mu in -5.0..-0.1f64, z in 0.0..100.0f64) {
        // E_α(μ z^α) depends on z only through (-μ)^{1/α} z.
        let w = (-mu).powf(1.0 / alpha) * z;
        let a = mittag_leffler_v(z, alpha, mu).unwrap();
        let b = mittag_leffler_v(w, alpha, -1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} {b}");
    }
}
