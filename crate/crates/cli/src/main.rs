mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracwave::experiments::checks::{BV_SLACK, KERNEL_MASS_TOL, KERNEL_MIN_TOL, TW_RATE_REL_TOL};
use fracwave::experiments::fit::loglog_fit;
use fracwave::experiments::{run_manifest, viscosity_sweep};
use fracwave::flux::EntropyPair;
use fracwave::io::{self, Series};
use fracwave::semigroup_kernel::unit_profile;
use fracwave::traveling_wave::{solve_profile, tail_exponents, MONOTONE_SLACK, RESIDUAL_TOL};
use fracwave::viscous_evolution::{entropy_residual, evolve, l1_contraction_report, max_principle_report};
use fracwave::{par, Alpha, Execution, FracError};
use serde::Serialize;

use config::{ContractionFile, EntropyFile, EvolveFile, SweepFile, TwFile};

const EVOLVE_SCHEMA: &str = r#"CONFIG (TOML):
  schema_version = 1
  [evolution]
  epsilon = 0.1            # >= 0
  t_end = 1.0              # > 0
  cfl = 0.45               # in (0, 1)
  scheme = "method_of_lines"   # | "mild_fixed_point" | "kernel_splitting"
  dt = 0.001               # optional fixed step
  output_times = [0.5]     # optional
  record_every_step = false
  flux = { kind = "burgers" }  # | zero | quartic | { kind = "linear", speed = c }
  params = { kind = "one_sided", alpha = 0.5 }  # | { kind = "riesz_feller", beta, gamma }
  [evolution.grid]
  x0 = -4.0
  dx = 0.0078125
  n = 1024
  boundary = { kind = "truncated_line", left_pad = 1.0, right_pad = 0.0 }  # | { kind = "periodic" }
  [initial]
  kind = "smoothed_step"   # u_l, u_r, width, x_c | "bump": amp, width | "custom": values
  u_l = 1.0
  u_r = 0.0
  width = 0.25"#;

const SWEEP_SCHEMA: &str = r#"CONFIG (TOML):
  schema_version = 1
  [sweep]
  epsilons = [0.2, 0.1, 0.05, 0.025]   # strictly decreasing, at least 3
  t_eval = 0.5
  reference = { kind = "exact_riemann" }  # | { kind = "godunov", refine = 8 }
  u0 = { kind = "smoothed_step", u_l = 1.0, u_r = 0.0, width = 0.0 }
  [sweep.base]                          # an [evolution] table, see `evolve --help`;
  ...                                   # dx must be <= eps_min^(1/alpha) / 8"#;

const TW_SCHEMA: &str = r#"CONFIG (TOML):
  schema_version = 1
  flux = { kind = "burgers" }
  phi_minus = 1.0
  phi_plus = 0.0
  epsilon = 1.0
  alpha = 0.5
  left_closure = "exponential"   # | "constant"
  [plan]                         # optional
  lambda_dx = 0.025              # lambda * dx
  left_decay = 1e-10             # left tail level at the left edge
  right_extent = 2000.0          # right edge in units of eps^(1/alpha)"#;

const MANIFEST_SCHEMA: &str = r#"CONFIG (TOML):
  schema_version = 1
  checks = ["kernel_mass", "kernel_tail", "semigroup", "symbol", "max_principle",
            "contraction", "entropy", "sweep", "traveling_wave", "mittag_leffler"]
  output_dir = "out"        # optional, relative to the manifest
  [settings]                # optional; every key has a default
  alpha = 0.5
  [settings.sweep]
  alphas = [0.5, 0.75]
  epsilons = [0.2, 0.1, 0.05, 0.025]
  See docs/formats.md for all settings."#;

/// Fractional-viscosity conservation laws: kernels, solvers, sweeps and traveling waves.
///
/// Exit status: 0 when the run's checks pass, 1 when a check fails,
/// 2 on usage or configuration errors. FRACWAVE_THREADS caps worker threads.
#[derive(Parser)]
#[command(name = "fracwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Run {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config file's directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the unit-time semigroup kernel K(1, y) to CSV.
    Kernel {
        #[arg(long)]
        alpha: f64,
        /// CSV file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve initial data and check the maximum principle.
    #[command(after_help = EVOLVE_SCHEMA)]
    Evolve(Run),
    /// Evolve two data and check L1 contraction and BV decay.
    #[command(after_help = "CONFIG (TOML): as for `evolve`, with [u0] and [v0] tables in place of [initial].")]
    Contraction(Run),
    /// Kruzhkov entropy residual of a viscous trajectory.
    #[command(
        after_help = "CONFIG (TOML): as for `evolve`, plus\n  [test_fn]\n  t_center = 0.5\n  t_half_width = 0.45\n  x_center = 0.0\n  x_half_width = 1.2"
    )]
    Entropy {
        #[command(flatten)]
        run: Run,
        /// Kruzhkov constant k of |u - k|.
        #[arg(long)]
        k: f64,
    },
    /// Vanishing-viscosity rate sweep against an entropy reference.
    #[command(after_help = SWEEP_SCHEMA)]
    Sweep(Run),
    /// Solve for a traveling-wave profile and fit its tails.
    #[command(after_help = TW_SCHEMA)]
    Tw(Run),
    /// Run a manifest of checks; writes report.json, timings.json and CSV series.
    #[command(after_help = MANIFEST_SCHEMA)]
    Manifest(Run),
}

/// A run that completed: whether its checks held.
type Outcome = Result<bool, FracError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn threads_from_env() -> Result<(), String> {
    match std::env::var("FRACWAVE_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| format!("FRACWAVE_THREADS = {v:?} is not a positive integer"))?;
            par::set_threads(n).map_err(|e| format!("FRACWAVE_THREADS: {e}"))
        }
        Err(_) => Ok(()),
    }
}

/// Solver breakdowns are check failures; everything else is the caller's input.
fn exit_code(e: &FracError) -> u8 {
    match e {
        FracError::NonContraction { .. }
        | FracError::FixedPointNotConverged { .. }
        | FracError::NewtonStagnation { .. }
        | FracError::NonMonotoneProfile { .. }
        | FracError::NonFinite { .. } => 1,
        _ => 2,
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Kernel { alpha, out } => kernel(alpha, &out),
        Command::Evolve(run) => evolve_cmd(&run),
        Command::Contraction(run) => contraction(&run),
        Command::Entropy { run, k } => entropy(&run, k),
        Command::Sweep(run) => sweep(&run),
        Command::Tw(run) => tw(&run),
        Command::Manifest(run) => manifest(&run),
    }
}

fn out_dir(run: &Run) -> PathBuf {
    match &run.out {
        Some(d) => d.clone(),
        None => run.config.parent().map(Path::to_path_buf).unwrap_or_default(),
    }
}

fn verdict(label: &str, ok: bool) -> bool {
    println!("{}: {label}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<(), FracError> {
    io::write_json(&path, value)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_series(path: PathBuf, series: &Series) -> Result<(), FracError> {
    io::write_series(&path, series)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn kernel(alpha: f64, out: &Path) -> Outcome {
    Alpha::new(alpha)?;
    let p = unit_profile(alpha)?;
    write_series(out.to_path_buf(), &io::kernel_series(&p)?)?;
    let mass_err = (p.mass() - 1.0).abs();
    let min = p.min_value();
    println!("|mass - 1| = {mass_err:e}, min K(1, y) = {min:e}");
    Ok(verdict("kernel mass", mass_err <= KERNEL_MASS_TOL) & verdict("kernel nonnegativity", min >= -KERNEL_MIN_TOL))
}

fn evolve_cmd(run: &Run) -> Outcome {
    let cfg: EvolveFile = config::load(&run.config)?;
    let u0 = cfg.initial.sample(cfg.evolution.grid)?;
    let tr = evolve(&u0, &cfg.evolution)?;
    let rep = max_principle_report(&tr);
    let dir = out_dir(run);
    let mut series = Series::new("evolve", &["x", "u0", "u_final"])
        .meta("t_final", tr.last().t)
        .meta("dt", tr.dt)
        .meta("steps", tr.steps);
    for ((x, a), b) in u0.grid.xs().iter().zip(&u0.values).zip(&tr.last().values) {
        series.push(vec![*x, *a, *b]);
    }
    write_series(dir.join("evolve.csv"), &series)?;
    write_json(dir.join("evolve.json"), &rep)?;
    println!("{} steps, dt = {:e}, worst sup-norm increase {:e}", tr.steps, tr.dt, rep.worst_increase);
    Ok(verdict("maximum principle", rep.monotone))
}

fn contraction(run: &Run) -> Outcome {
    let cfg: ContractionFile = config::load(&run.config)?;
    let u0 = cfg.u0.sample(cfg.evolution.grid)?;
    let v0 = cfg.v0.sample(cfg.evolution.grid)?;
    let rep = l1_contraction_report(&u0, &v0, &cfg.evolution)?;
    let dir = out_dir(run);
    let mut series = Series::new("contraction", &["t", "l1_distance", "bv_u"]);
    for i in 0..rep.times.len() {
        series.push(vec![rep.times[i], rep.l1_distances[i], rep.bv_u[i]]);
    }
    write_series(dir.join("contraction.csv"), &series)?;
    write_json(dir.join("contraction.json"), &rep)?;
    let bv_ok = rep.bv_u.iter().all(|b| *b <= rep.bv_initial + BV_SLACK);
    println!("worst excess {:e}", rep.worst_excess);
    Ok(verdict("L1 contraction", rep.contractive) & verdict("BV nonincreasing", bv_ok))
}

#[derive(Serialize)]
struct EntropyOutput {
    k: f64,
    residual: fracwave::viscous_evolution::EntropyResidual,
    passed: bool,
}

fn entropy(run: &Run, k: f64) -> Outcome {
    if !k.is_finite() {
        return Err(FracError::Config(format!("--k must be finite, got {k}")));
    }
    let mut cfg: EntropyFile = config::load(&run.config)?;
    cfg.evolution.record_every_step = true;
    let u0 = cfg.initial.sample(cfg.evolution.grid)?;
    let tr = evolve(&u0, &cfg.evolution)?;
    let pair = EntropyPair::kruzhkov(k, cfg.evolution.flux.build());
    let residual = entropy_residual(&tr, &pair, &cfg.test_fn, &cfg.evolution)?;
    let passed = residual.passes();
    write_json(out_dir(run).join("entropy.json"), &EntropyOutput { k, residual, passed })?;
    println!("residual {:e}, tolerance {:e}", residual.residual, residual.tolerance);
    Ok(verdict(&format!("entropy residual for k = {k}"), passed))
}

fn sweep(run: &Run) -> Outcome {
    let cfg: SweepFile = config::load(&run.config)?;
    let r = viscosity_sweep(&cfg.sweep)?;
    let dir = out_dir(run);
    let mut series = Series::new("sweep", &["epsilon", "l1_error", "bound_constant", "bv_final"])
        .meta("fitted_rate", r.fitted_rate)
        .meta("theoretical_rate", r.theoretical_rate)
        .meta("r_squared", r.r_squared);
    for i in 0..r.epsilons.len() {
        series.push(vec![r.epsilons[i], r.l1_errors[i], r.bound_constants[i], r.bv_final[i]]);
    }
    write_series(dir.join("sweep.csv"), &series)?;
    write_json(dir.join("rate_report.json"), &r)?;
    if let Some(fit) = loglog_fit(&r.epsilons[..r.fit_points], &r.l1_errors[..r.fit_points]) {
        let svg = io::loglog_svg("L1 error vs epsilon", &r.epsilons, &r.l1_errors, fit.slope, fit.intercept);
        io::write_text(dir.join("sweep.svg"), &svg)?;
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    println!("fitted rate {:.4} (theory {:.4}, r² {:.5})", r.fitted_rate, r.theoretical_rate, r.r_squared);
    Ok(verdict("error bound", r.bound_satisfied)
        & verdict("rate", r.rate_matched)
        & verdict("BV nonincreasing", r.bv_nonincreasing))
}

fn tw(run: &Run) -> Outcome {
    let cfg: TwFile = config::load(&run.config)?;
    let spec = cfg.spec()?;
    let p = solve_profile(&spec)?;
    let fit = tail_exponents(&p)?;
    let dir = out_dir(run);
    write_series(dir.join("profile.csv"), &io::profile_series(&p)?)?;
    write_json(dir.join("tail_fit.json"), &fit)?;
    let rise = p.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let near = |v: f64, target: f64| (v / target - 1.0).abs() <= TW_RATE_REL_TOL;
    println!(
        "residual {:e} after {} iterations; lambda {:.4} (theory {:.4}); alpha {:.4}",
        p.residual_norm, p.iterations, fit.lambda_fit, fit.lambda_theory, fit.alpha_fit
    );
    Ok(verdict("residual", p.residual_norm < RESIDUAL_TOL)
        & verdict("monotone", rise <= MONOTONE_SLACK)
        & verdict("left exponential rate", near(fit.lambda_fit, fit.lambda_theory))
        & verdict("right algebraic exponent", near(fit.alpha_fit, cfg.alpha)))
}

fn manifest(run: &Run) -> Outcome {
    let m = run_manifest(&run.config, run.out.as_deref(), Execution::default())?;
    for (c, t) in m.report.checks.iter().zip(&m.timings.checks) {
        let detail = c.error.as_ref().map(|e| format!(" ({})", e.message)).unwrap_or_default();
        println!(
            "{} [{}] {} {:.1}s{detail}",
            if c.passed { "PASS" } else { "FAIL" },
            c.criterion,
            c.check,
            t.seconds
        );
    }
    println!(
        "total {:.1}s of {:.0}s; report in {}",
        m.timings.total_seconds,
        m.timings.total_budget,
        m.out_dir.join("report.json").display()
    );
    Ok(m.report.passed & verdict("wall-clock budget", m.timings.within_budget))
}
