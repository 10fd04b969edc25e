use fracwave::fractional_ops::*;
use fracwave::{Field, GridSpec};
use proptest::prelude::*;
use quadrature::double_exponential;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// `∂x D^α u(x) = Γ(1-α)^{-1} ∫_0^∞ u''(x - s) s^{-α} ds`, with `s = r^{1/(1-α)}`
/// to remove the endpoint singularity.
fn quadrature_oracle(u2: impl Fn(f64) -> f64, alpha: f64, x: f64, s_max: f64) -> f64 {
    let p = 1.0 / (1.0 - alpha);
    let r_max = s_max.powf(1.0 / p);
    let out = double_exponential::integrate(|r| p * u2(x - r.powf(p)), 0.0, r_max, 1e-12);
    out.integral / gamma(1.0 - alpha)
}

#[test]
fn exponential_oracle_first_order() {
    // ∂x D^α e^{x} = e^{x}; the window reaches far enough left that e^{x0} is negligible.
    let alpha = 0.5;
    let params = FracParams::one_sided(alpha).unwrap();
    for x in [-1.0, 0.0] {
        let q = quadrature_oracle(f64::exp, alpha, x, 60.0);
        assert!((q - x.exp()).abs() < 1e-9, "quadrature {q} vs {}", x.exp());
    }
    let err = |n: usize| {
        let (a, b) = (-40.0, 1.0);
        let dx = (b - a) / (n - 1) as f64;
        let grid = GridSpec::truncated(a, b, n, 0.0, (b + dx).exp()).unwrap();
        let u = Field::from_fn(grid, f64::exp).unwrap();
        let v = apply_dx_caputo(&u, params, &grid).unwrap();
        (0..n)
            .filter(|&i| grid.x(i) >= -2.0)
            .map(|i| (v.values[i] - grid.x(i).exp()).abs())
            .fold(0.0_f64, f64::max)
    };
    let (e1, e2) = (err(4097), err(8193));
    assert!(e1 < 0.02, "{e1}");
    assert!((e1 / e2).log2() > 0.9, "{e1} {e2}");
}

#[test]
fn gaussian_against_quadrature() {
    for alpha in [0.3, 0.7] {
        let params = FracParams::one_sided(alpha).unwrap();
        let u2 = |x: f64| (4.0 * x * x - 2.0) * (-x * x).exp();
        let err = |n: usize| {
            let grid = GridSpec::truncated(-12.0, 12.0, n, 0.0, 0.0).unwrap();
            let u = Field::from_fn(grid, |x| (-x * x).exp()).unwrap();
            let v = apply_dx_caputo(&u, params, &grid).unwrap();
            [-1.0, -0.25, 0.5, 1.5]
                .iter()
                .map(|&x| {
                    let i = grid.nearest_index(x);
                    (v.values[i] - quadrature_oracle(u2, alpha, grid.x(i), 20.0)).abs()
                })
                .fold(0.0_f64, f64::max)
        };
        let (e1, e2) = (err(1201), err(2401));
        assert!(e1 < 0.05 && (e1 / e2).log2() > 0.8, "alpha {alpha}: {e1} {e2}");
    }
}

#[test]
fn symbol_order_at_least_first() {
    let mut all = vec![FracParams::one_sided(0.5).unwrap()];
    for (b, g) in [(1.5, 0.5), (1.5, 0.0), (1.2, -0.3)] {
        all.push(FracParams::riesz_feller(b, g).unwrap());
    }
    for p in all {
        for xi in [1.0, 2.0, 4.0] {
            let e = |h: f64| (p.discrete_symbol(xi, h) - p.exact_symbol(xi)).norm();
            let (e0, e1, e2) = (e(0.02), e(0.01), e(0.005));
            let order = (e0 / e1).log2().min((e1 / e2).log2());
            assert!(order >= 0.9, "{p:?} xi {xi}: {order}");
            // |ψ_h - ψ| <= C dx |ξ|^{2+α}
            assert!(e0 <= 2.0 * 0.02 * xi.powf(p.order() + 1.0), "{p:?} xi {xi}: {e0}");
        }
    }
}

#[test]
fn one_sided_and_riesz_feller_forms_agree() {
    let alpha = 0.4;
    let grid = GridSpec::periodic(0.0, 2.0 * PI, 128).unwrap();
    let u = Field::from_fn(grid, |x| x.sin() + 0.3 * (3.0 * x).cos()).unwrap();
    let a = apply_dx_caputo(&u, FracParams::one_sided(alpha).unwrap(), &grid).unwrap();
    let b = apply_riesz_feller(&u, FracParams::riesz_feller(1.0 + alpha, 1.0 - alpha).unwrap(), &grid).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()), "{x} {y}");
    }
}

#[test]
fn symmetric_riesz_feller_commutes_with_reflection() {
    let grid = GridSpec::periodic(0.0, 1.0, 64).unwrap();
    let n = grid.n;
    let p = FracParams::riesz_feller(1.5, 0.0).unwrap();
    let u: Vec<f64> = (0..n).map(|i| ((i * 7919) % 61) as f64 / 61.0).collect();
    let refl = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| v[(n - i) % n]).collect() };
    let lu = apply_riesz_feller(&Field::new(grid, u.clone()).unwrap(), p, &grid).unwrap();
    let lr = apply_riesz_feller(&Field::new(grid, refl(&u)).unwrap(), p, &grid).unwrap();
    for (a, b) in refl(&lu.values).iter().zip(&lr.values) {
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
}

fn params_strategy() -> impl Strategy<Value = FracParams> {
    prop_oneof![
        (0.05..0.95f64).prop_map(|a| FracParams::one_sided(a).unwrap()),
        (1.05..2.0f64, -1.0..1.0f64).prop_map(|(b, s)| {
            let g = s * b.min(2.0 - b);
            FracParams::riesz_feller(b, g).unwrap()
        }),
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_adjointness(
        alpha in 0.05..0.95f64,
        u in prop::collection::vec(-1.0..1.0f64, 64),
        v in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        let grid = GridSpec::periodic(0.0, 1.0, 64).unwrap();
        let p = FracParams::one_sided(alpha).unwrap();
        let lu = apply_dx_caputo(&Field::new(grid, u.clone()).unwrap(), p, &grid).unwrap();
        let lv = apply_dx_caputo_adjoint(&Field::new(grid, v.clone()).unwrap(), p, &grid).unwrap();
        let norm = dot(&u, &u).sqrt() * dot(&v, &v).sqrt();
        // The operator scales like dx^{-(1+α)}; measure the defect relative to it.
        let scale = grid.dx.powf(-(1.0 + alpha));
        prop_assert!((dot(&lu.values, &v) - dot(&u, &lv.values)).abs() <= 1e-10 * norm * scale);
    }

    #[test]
    fn convexity_inequality_for_squares(
        p in params_strategy(),
        coeffs in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let grid = GridSpec::periodic(0.0, 2.0 * PI, 256).unwrap();
        let phi = Field::from_fn(grid, |x| {
            coeffs.chunks(2).enumerate().map(|(k, c)| {
                let m = (k + 1) as f64;
                c[0] * (m * x).sin() + c[1] * (m * x).cos()
            }).sum()
        }).unwrap();
        let sq = Field::new(grid, phi.values.iter().map(|v| v * v).collect()).unwrap();
        let apply = |f: &Field| match p {
            FracParams::OneSided { .. } => apply_dx_caputo(f, p, &grid).unwrap(),
            FracParams::RieszFeller { .. } => apply_riesz_feller(f, p, &grid).unwrap(),
        };
        let (l_sq, l_phi) = (apply(&sq), apply(&phi));
        let scale = l_sq.values.iter().chain(&l_phi.values).fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..grid.n {
            let gap = l_sq.values[i] - 2.0 * phi.values[i] * l_phi.values[i];
            prop_assert!(gap >= -1e-10 * scale, "i {i}: {gap}");
        }
    }

    #[test]
    fn dissipative_on_grid_frequencies(p in params_strategy(), n in 8usize..200) {
        let dx = 1.0 / n as f64;
        for m in 0..n {
            let xi = 2.0 * PI * m as f64;
            prop_assert!(p.discrete_symbol(xi, dx).re <= 1e-12 * dx.powf(-p.order()));
            prop_assert!(p.exact_symbol(xi).re <= 0.0);
        }
    }

    #[test]
    fn constants_are_annihilated(p in params_strategy(), c in -5.0..5.0f64, pad in any::<bool>()) {
        let grid = if pad {
            GridSpec::truncated(-1.0, 1.0, 97, c, c).unwrap()
        } else {
            GridSpec::periodic(-1.0, 2.0, 96).unwrap()
        };
        let u = Field::constant(grid, c).unwrap();
        let out = match p {
            FracParams::OneSided { .. } => apply_dx_caputo(&u, p, &grid).unwrap(),
            FracParams::RieszFeller { .. } => apply_riesz_feller(&u, p, &grid).unwrap(),
        };
        let scale = grid.dx.powf(-p.order()) * c.abs().max(1.0);
        prop_assert!(out.values.iter().all(|v| v.abs() <= 1e-12 * scale));
    }
}
