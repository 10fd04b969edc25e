use fracwave::entropy_reference::*;
use fracwave::experiments::fit::loglog_fit;
use fracwave::flux::{EntropyPair, FluxFn, FluxSpec};
use fracwave::grid::{Field, GridSpec};
use proptest::prelude::*;

fn shock() -> RiemannData {
    RiemannData::new(1.0, 0.0, -0.5).unwrap()
}

fn godunov_riemann(data: RiemannData, n: usize, t: f64) -> (Field, Field) {
    let b = FluxFn::burgers();
    let g = GridSpec::truncated(-2.0, 2.0, n, data.u_left, data.u_right).unwrap();
    let u0 = exact_riemann_cell_averages(data, &b, 0.0, &g).unwrap();
    let num = godunov_evolve(&u0, &b, t, 0.8).unwrap().last().clone();
    let exact = exact_riemann_cell_averages(data, &b, t, &g).unwrap();
    (num, exact)
}

#[test]
fn shock_sits_at_the_rankine_hugoniot_position() {
    for n in [200, 401, 800] {
        let (num, _) = godunov_riemann(shock(), n, 1.0);
        let i = num.values.iter().position(|&v| v < 0.5).unwrap();
        let (x0, x1) = (num.grid.x(i - 1), num.grid.x(i));
        let (v0, v1) = (num.values[i - 1], num.values[i]);
        let x = x0 + (v0 - 0.5) / (v0 - v1) * (x1 - x0);
        assert!((x - 0.0).abs() <= 2.0 * num.grid.dx, "n = {n}: shock at {x}");
    }
}

#[test]
fn rarefaction_error_is_first_order_up_to_a_log() {
    let fan = RiemannData::new(0.0, 1.0, 0.0).unwrap();
    let mut ratios = Vec::new();
    for n in [200, 400, 800, 1600] {
        let (num, exact) = godunov_riemann(fan, n, 1.0);
        let dx = num.grid.dx;
        let err = num.l1_distance(&exact).unwrap();
        ratios.push(err / (dx * (1.0 + (1.0 / dx).ln())));
    }
    // The constant does not grow under refinement.
    assert!(ratios.windows(2).all(|w| w[1] <= 1.05 * w[0]), "{ratios:?}");
    assert!(ratios[0] < 1.0, "{ratios:?}");
}

#[test]
fn shock_convergence_rate() {
    let ns = [100, 200, 400, 800, 1600];
    let (mut dxs, mut errs) = (Vec::new(), Vec::new());
    for n in ns {
        let (num, exact) = godunov_riemann(shock(), n, 1.0);
        dxs.push(num.grid.dx);
        errs.push(num.l1_distance(&exact).unwrap());
    }
    let fit = loglog_fit(&dxs, &errs).unwrap();
    assert!(fit.slope >= 0.5, "rate {}", fit.slope);
}

#[test]
fn max_principle_and_monotonicity() {
    let g = GridSpec::truncated(-2.0, 2.0, 300, 1.0, -0.5).unwrap();
    let u0 = Field::from_fn(g, |x| 0.25 - 0.75 * (3.0 * x).tanh()).unwrap();
    let tr = godunov_evolve_at(&u0, &FluxFn::burgers(), 1.0, 0.9, &[0.25, 0.5, 0.75]).unwrap();
    for f in &tr.frames {
        assert!(f.max_value() <= 1.0 + 1e-14 && f.min_value() >= -0.5 - 1e-14);
        assert!(f.values.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }
    assert_eq!(tr.frames.len(), 5);
}

#[test]
fn periodic_conservation() {
    let g = GridSpec::periodic(0.0, 1.0, 128).unwrap();
    let u0 = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
    let tr = godunov_evolve(&u0, &FluxSpec::Quartic.build(), 0.4, 0.5).unwrap();
    assert!((tr.last().mass() - u0.mass()).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l1_contraction(
        mut a in prop::collection::vec(-1.0f64..1.0, 40),
        mut b in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        // Equal data ranges give both runs the same time step.
        (a[5], a[6], b[5], b[6]) = (1.0, -1.0, 1.0, -1.0);
        let g = GridSpec::truncated(0.0, 1.0, 40, 0.2, -0.3).unwrap();
        let (u, v) = (Field::new(g, a).unwrap(), Field::new(g, b).unwrap());
        let f = FluxFn::burgers();
        let out = [0.1, 0.2, 0.3];
        let tu = godunov_evolve_at(&u, &f, 0.4, 0.9, &out).unwrap();
        let tv = godunov_evolve_at(&v, &f, 0.4, 0.9, &out).unwrap();
        prop_assert_eq!(tu.dt, tv.dt);
        let d: Vec<f64> = tu.frames.iter().zip(&tv.frames).map(|(x, y)| x.l1_distance(y).unwrap()).collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", d);
    }

    #[test]
    fn cell_entropy_inequality(
        vals in prop::collection::vec(-1.0f64..1.0, 30),
        k in -1.2f64..1.2,
        cfl in 0.1f64..0.95,
        quartic in any::<bool>(),
    ) {
        let g = GridSpec::truncated(0.0, 1.0, 30, vals[0], vals[29]).unwrap();
        let u = Field::new(g, vals).unwrap();
        let spec = if quartic { FluxSpec::Quartic } else { FluxSpec::Burgers };
        let pair = EntropyPair::kruzhkov(k, spec.build());
        prop_assert!(entropy_step_excess(&u, &pair, cfl) <= 1e-13);
    }
}
