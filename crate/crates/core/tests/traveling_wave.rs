use fracwave::flux::FluxSpec;
use fracwave::mittag_leffler::mittag_leffler_v;
use fracwave::traveling_wave::*;
use std::sync::OnceLock;
use std::time::Instant;

fn burgers(eps: f64, plan: WindowPlan) -> TWProfile {
    let spec = TWSpec::auto(FluxSpec::Burgers, 1.0, 0.0, eps, 0.5, plan).unwrap();
    solve_profile(&spec).unwrap()
}

fn unit() -> &'static TWProfile {
    static P: OnceLock<TWProfile> = OnceLock::new();
    P.get_or_init(|| burgers(1.0, WindowPlan::default()))
}

#[test]
fn converged_profile_is_monotone_and_anchored() {
    let t = Instant::now();
    let p = unit();
    eprintln!("n = {} iterations = {} in {:?}", p.values.len(), p.iterations, t.elapsed());
    assert!(p.residual_norm < RESIDUAL_TOL, "{}", p.residual_norm);
    assert!(p.closure_defect < 1e-12, "{}", p.closure_defect);
    assert!(p.phase_anchor.abs() <= p.spec.grid.dx);
    assert!(p.values.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    assert!(p.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn tail_rates() {
    let p = unit();
    let fit = tail_exponents(p).unwrap();
    eprintln!("{fit:?}");
    assert!((fit.lambda_fit / 0.25 - 1.0).abs() < 0.1);
    assert!((fit.alpha_fit / 0.5 - 1.0).abs() < 0.1);
}

#[test]
fn right_tail_is_bounded_below_by_the_fundamental_solution() {
    // W(0) v(z) <= W(z) with W(z) = φ(z + ξ∞) - φ_+.
    let p = unit();
    let s = &p.spec;
    let mu = s.mu();
    for xi_inf in [20.0, 100.0] {
        let i0 = s.grid.nearest_index(xi_inf);
        let w0 = p.values[i0] - s.phi_plus;
        let mut worst: f64 = f64::INFINITY;
        for i in (i0..p.values.len()).step_by(37) {
            let z = s.grid.x(i) - s.grid.x(i0);
            let lower = w0 * mittag_leffler_v(z, 0.5, mu).unwrap();
            worst = worst.min((p.values[i] - s.phi_plus) - lower);
        }
        eprintln!("xi_inf {xi_inf}: min(W - W0 v) = {worst:e}");
        assert!(worst >= -1e-3 * w0, "{worst}");
    }
}

#[test]
fn amplitude_scales_with_epsilon_on_a_common_window() {
    // The same physical window [100, 400] for every ε.
    let mut amps = Vec::new();
    for eps in [1.0f64, 0.5, 0.25] {
        let plan = WindowPlan { right_extent: 400.0 / eps.powi(2), ..Default::default() };
        let p = burgers(eps, plan);
        let fit = tail_exponents(&p).unwrap();
        assert!((fit.alpha_fit / 0.5 - 1.0).abs() < 0.1, "eps {eps}: {fit:?}");
        amps.push(p.tail_amplitude(100.0, 400.0).unwrap() / eps);
    }
    let (lo, hi) = amps.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 1.2, "{amps:?}");
}

#[test]
fn rescaling_commutes_with_epsilon() {
    // φ_ε(ξ) = φ_1(ξ / ε^{1/α}), on a grid that does not map onto the ε = 1 one.
    let eps = 0.3;
    let plan = WindowPlan { lambda_dx: 0.0137, right_extent: 60.0, ..Default::default() };
    let direct = burgers(eps, plan);
    let p = unit();
    let k = eps.powf(2.0);
    let worst = direct
        .xi()
        .iter()
        .zip(&direct.values)
        .filter(|(x, _)| **x >= -8.0 * k && **x <= 50.0 * k)
        .fold(0.0_f64, |m, (&x, &v)| m.max((v - rescaled(p, eps, x)).abs()));
    // Both are first-order discretisations (λ dx = 0.025 and 0.0137).
    assert!(worst < 5e-3, "{worst}");
}

#[test]
fn pointwise_vanishing_viscosity() {
    let mut prev = (0.0, 1.0);
    for eps in [1.0f64, 0.3, 0.1, 0.03] {
        let plan = WindowPlan { right_extent: 2.5 / eps.powi(2), ..Default::default() };
        let p = burgers(eps, plan);
        let (l, r) = (p.eval(-2.0), p.eval(2.0));
        assert!(l >= prev.0 && r < prev.1, "eps {eps}: {l} {r}");
        prev = (l, r);
    }
    assert!(1.0 - prev.0 < 1e-6 && prev.1 < 0.05, "{prev:?}");
}

fn interpolated_residual(coarse: &TWProfile, fine: &TWSpec) -> f64 {
    let v: Vec<f64> = fine.grid.xs().iter().map(|&x| coarse.eval(x)).collect();
    let r = residual(fine, &v, fracwave::Execution::Parallel).unwrap();
    // Skip the phase row and the closure row.
    r.iter().skip(1).fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[test]
fn self_convergence_is_first_order() {
    let plan = |ld: f64| WindowPlan { lambda_dx: ld, left_decay: 1e-8, right_extent: 50.0 };
    let spec = |ld| TWSpec::auto(FluxSpec::Burgers, 1.0, 0.0, 1.0, 0.5, plan(ld)).unwrap();
    let (s1, s2, s4) = (spec(0.1), spec(0.05), spec(0.025));
    let p1 = solve_profile(&s1).unwrap();
    let p2 = solve_profile(&s2).unwrap();
    let r12 = interpolated_residual(&p1, &s2);
    let r24 = interpolated_residual(&p2, &s4);
    let ratio = r12 / r24;
    assert!((1.6..2.5).contains(&ratio), "{r12:e} / {r24:e} = {ratio}");
}

#[test]
fn constant_closure_on_a_wide_window_agrees() {
    // Independent of the exponential continuation: pad with φ_- on a window
    // wide enough that the tail has died out.
    let mut spec = TWSpec::auto(
        FluxSpec::Burgers,
        1.0,
        0.0,
        1.0,
        0.5,
        WindowPlan { left_decay: 1e-14, right_extent: 200.0, ..Default::default() },
    )
    .unwrap();
    spec.left_closure = LeftClosure::Constant;
    let q = solve_profile(&spec).unwrap();
    let fit = tail_exponents(&q).unwrap();
    assert!((fit.lambda_fit / 0.25 - 1.0).abs() < 0.1, "{fit:?}");
    let p = unit();
    let worst = q
        .xi()
        .iter()
        .zip(&q.values)
        .filter(|(x, _)| x.abs() <= 50.0)
        .fold(0.0_f64, |m, (&x, &v)| m.max((v - p.eval(x)).abs()));
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn two_sided_algebraic_bound_on_the_fit_window() {
    let p = unit();
    let fit = tail_exponents(p).unwrap();
    let (a, b) = fit.right_window;
    let g = &p.spec.grid;
    let scaled: Vec<f64> = (0..g.n)
        .filter(|&i| g.x(i) >= a && g.x(i) <= b)
        .map(|i| p.values[i] * g.x(i).sqrt())
        .collect();
    let c = scaled.iter().fold(1.0_f64, |c, &w| c.max(w).max(1.0 / w));
    assert!(c.is_finite() && c < 3.0, "C = {c}");
}

#[test]
fn sequential_and_parallel_agree() {
    let plan = WindowPlan { right_extent: 40.0, ..Default::default() };
    let spec = TWSpec::auto(FluxSpec::Quartic, 1.0, 0.0, 0.5, 0.7, plan).unwrap();
    let a = solve_profile_exec(&spec, fracwave::Execution::Sequential).unwrap();
    let b = solve_profile_exec(&spec, fracwave::Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.residual_norm < RESIDUAL_TOL);
    // Quartic: c = 1, h'(1) = 3, λ = (3/0.5)^{1/0.7}.
    assert!((spec.lambda() - 6f64.powf(1.0 / 0.7)).abs() < 1e-12);
}

#[test]
fn small_window_is_rejected() {
    let plan = WindowPlan { right_extent: 5.0, left_decay: 0.05, ..Default::default() };
    let p = burgers(1.0, plan);
    assert!(matches!(tail_exponents(&p), Err(fracwave::FracError::InsufficientTail { .. })));
}
