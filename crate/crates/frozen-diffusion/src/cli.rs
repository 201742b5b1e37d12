//! The `fbdsim` command surface.
//!
//! Subcommands: `fbd` (deterministic evolution + diagnostics), `frw`
//! (seeded particle Monte Carlo), `solve-q` (fixed point + inequality
//! table), `check` (invariant suite), `fbd2d` (2D analogue + heat maps).
//!
//! Exit codes are a stable contract: 0 success, 1 usage or I/O problems,
//! 2 invariant violation, 3 solver non-convergence. `FBD_LOG` controls log
//! verbosity (`error`..`trace`). All validation happens before any output
//! file is created, so a rejected configuration leaves no partial files.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    atom_form_residual, atom_form_residual_quadrature, check_inequalities, fixed_point_residual,
    g_closed, g_series, levy_distance, solve_q, trunc_gauss_moment, trunc_gauss_moment_quadrature,
};
use crate::engine::{
    diagnostics_row, free_moment, moment, run_fbd_with_snapshots, Schedule, MAX_MOMENT_ORDER,
};
use crate::frw::frw_average;
use crate::grid2d::{freeze_split_2d, run_fbd2d};
use crate::io as ser;
use crate::lattice::{boundary, freeze_split, heat_step, MassState};
use crate::numeric::NeumaierSum;
use crate::{tol, Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "fbdsim",
    version,
    about = "Frozen-boundary diffusion: lattice evolution, particle Monte Carlo, \
             fixed-point analysis, and 2D heat maps"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the mass process and write sampled diagnostics.
    Fbd(FbdArgs),
    /// Run the n-particle frozen random walk, averaged over seeded trials.
    Frw(FrwArgs),
    /// Solve x g(x) = (1-alpha)/alpha and report residuals and inequalities.
    #[command(name = "solve-q")]
    SolveQ(SolveQArgs),
    /// Run the invariant suite and report a pass/fail table.
    Check(CheckArgs),
    /// Evolve the experimental 2D analogue and export heat maps.
    Fbd2d(Fbd2dArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct FbdArgs {
    /// Frozen fraction per step, strictly inside (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Steps to evolve (>= 1).
    #[arg(long)]
    steps: u64,
    /// Sampling schedule: geometric, linear:<stride>, or explicit:<t1,t2,...>.
    #[arg(long, default_value = "geometric")]
    schedule: String,
    /// Diagnostics output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Diagnostics file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the final mass profile here (site,mass CSV).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Report extra even moment orders (<= 12) of the final state.
    #[arg(long, value_delimiter = ',')]
    moments: Vec<usize>,
}

#[derive(Args, Debug)]
struct FrwArgs {
    /// Number of particles.
    #[arg(long)]
    n: u64,
    /// Frozen fraction, strictly inside (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Steps to run (0 allowed: the initial configuration).
    #[arg(long)]
    steps: u64,
    /// Independent trials to average.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Master seed; per-trial seeds derive from it deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trials; the output is identical at any setting.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Profile file (site,fraction CSV); standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON path; defaults to the profile path with a .meta.json
    /// extension, and is skipped when the profile goes to standard output.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveQArgs {
    /// Frozen fraction; repeat the flag to solve for several values.
    #[arg(long = "alpha", required = true)]
    alpha: Vec<f64>,
    /// Accepted residual for the root.
    #[arg(long, default_value_t = 1e-13)]
    tolerance: f64,
    /// Also check the inequality family for k = 0..=K.
    #[arg(long = "check-k")]
    check_k: Option<usize>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Frozen fraction; repeat the flag to check a grid of values.
    #[arg(long = "alpha", default_values_t = [0.5])]
    alpha: Vec<f64>,
    /// Steps to evolve while checking per-step invariants.
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    /// Corrupt one mass entry mid-run (negative control for the suite).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct Fbd2dArgs {
    /// Frozen fraction, strictly inside (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Steps to evolve (>= 1).
    #[arg(long)]
    steps: u64,
    /// Write the mass grid as a dense CSV matrix.
    #[arg(long = "grid-csv")]
    grid_csv: Option<PathBuf>,
    /// Write the mass grid as a binary graymap (P5).
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Write the x = 0 column of the free mass as y,mass CSV.
    #[arg(long)]
    slice: Option<PathBuf>,
}

/// Parse arguments from the environment, run, and return the exit code.
pub fn run() -> i32 {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter("FBD_LOG");
    let _ = env_logger::Builder::from_env(env).try_init();
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Io(_) => 1,
        Error::InvalidState(_) => 2,
        Error::NoConvergence { .. } => 3,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Fbd(args) => cmd_fbd(args),
        Command::Frw(args) => cmd_frw(args),
        Command::SolveQ(args) => cmd_solve_q(args),
        Command::Check(args) => cmd_check(args),
        Command::Fbd2d(args) => cmd_fbd2d(args),
    }
}

fn with_output<F>(path: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(path) => {
            let file = File::create(path)?;
            let mut buffered = std::io::BufWriter::new(file);
            write(&mut buffered)?;
            buffered.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn cmd_fbd(args: FbdArgs) -> Result<i32> {
    if args.steps == 0 {
        return Err(Error::Domain("fbd needs --steps >= 1".into()));
    }
    for &k in &args.moments {
        if k % 2 != 0 || k > MAX_MOMENT_ORDER {
            return Err(Error::Domain(format!(
                "moment orders must be even and <= {MAX_MOMENT_ORDER}, got {k}"
            )));
        }
    }
    let times = Schedule::parse(&args.schedule)?.times(args.steps)?;
    if times.first() == Some(&0) {
        return Err(Error::Domain("sample times must be >= 1".into()));
    }
    let lm = solve_q(args.alpha, 1e-13)?;
    let trajectory = run_fbd_with_snapshots(args.alpha, args.steps, &times, &times)?;
    let mut records = Vec::with_capacity(trajectory.rows.len());
    for (row, (t, state)) in trajectory.rows.iter().zip(&trajectory.snapshots) {
        debug_assert_eq!(row.t, *t);
        records.push(ser::DiagnosticsRecord::new(row, levy_distance(state, &lm)?));
    }
    with_output(args.out.as_deref(), |w| match args.format {
        Format::Csv => ser::write_diagnostics_csv(w, &records),
        Format::Json => ser::write_diagnostics_json(w, &trajectory, &records),
    })?;
    if let Some(path) = &args.profile {
        with_output(Some(path), |w| ser::write_profile_csv(w, &trajectory.final_state))?;
    }
    for &k in &args.moments {
        println!("M_{k}({}) = {}", args.steps, moment(&trajectory.final_state, k)?);
    }
    Ok(0)
}

fn cmd_frw(args: FrwArgs) -> Result<i32> {
    let profile = frw_average(args.n, args.alpha, args.steps, args.trials, args.seed, args.jobs)?;
    with_output(args.out.as_deref(), |w| ser::write_frw_profile_csv(w, &profile))?;
    let meta_path = args
        .meta
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("meta.json")));
    if let Some(path) = meta_path {
        with_output(Some(&path), |w| ser::write_frw_metadata_json(w, &profile))?;
    }
    Ok(0)
}

fn cmd_solve_q(args: SolveQArgs) -> Result<i32> {
    for &alpha in &args.alpha {
        let lm = solve_q(alpha, args.tolerance)?;
        println!("alpha = {alpha}");
        println!("q = {}", lm.q());
        println!("residual, series form x g(x) - (1-a)/a : {:e}", fixed_point_residual(&lm));
        println!("residual, atom balance form            : {:e}", atom_form_residual(&lm));
        if let Some(k_max) = args.check_k {
            let report = check_inequalities(&lm, k_max)?;
            println!(
                "{:>3}  {:>24}  {:>24}  {:>13}  {:>13}  status",
                "k", "P_k/(2k-1)!!", "upper bound", "lower margin", "upper margin"
            );
            for row in &report.rows {
                println!(
                    "{:>3}  {:>24.16e}  {:>24.16e}  {:>13.3e}  {:>13.3e}  {}",
                    row.k,
                    row.value_scaled,
                    row.upper_scaled,
                    row.lower_margin,
                    row.upper_margin,
                    if row.pass { "PASS" } else { "FAIL" }
                );
            }
            println!(
                "inequalities k <= {k_max}: {}",
                if report.all_pass { "all pass" } else { "FAILED" }
            );
        }
        println!();
    }
    Ok(0)
}

fn cmd_fbd2d(args: Fbd2dArgs) -> Result<i32> {
    if args.steps == 0 {
        return Err(Error::Domain("fbd2d needs --steps >= 1".into()));
    }
    let grid = run_fbd2d(args.alpha, args.steps)?;
    let split = freeze_split_2d(&grid)?;
    if let Some(path) = &args.grid_csv {
        with_output(Some(path), |w| ser::write_grid_csv(w, &grid))?;
    }
    if let Some(path) = &args.pgm {
        with_output(Some(path), |w| ser::write_grid_pgm(w, &grid))?;
    }
    if let Some(path) = &args.slice {
        let column: Vec<(i64, f64)> =
            (-grid.radius()..=grid.radius()).map(|y| (y, split.free_at(0, y))).collect();
        with_output(Some(path), |w| ser::write_slice_csv(w, &column))?;
    }
    println!(
        "t = {}, window radius = {}, radial m2 = {}, threshold r^2 = {}",
        grid.t(),
        grid.radius(),
        grid.radial_second_moment(),
        split.threshold_radius2()
    );
    Ok(0)
}

// ---- the invariant suite -------------------------------------------------

/// Worst scaled residual seen so far (1.0 = exactly at budget).
struct Worst {
    ratio: f64,
    at: u64,
}

impl Worst {
    fn new() -> Self {
        Self { ratio: 0.0, at: 0 }
    }

    fn note(&mut self, ratio: f64, t: u64) {
        if ratio > self.ratio {
            self.ratio = ratio;
            self.at = t;
        }
    }

    fn pass(&self) -> bool {
        self.ratio <= 1.0
    }

    fn detail(&self) -> String {
        format!("worst {:.3e} of budget at t = {}", self.ratio, self.at)
    }
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn from_worst(name: &'static str, worst: &Worst) -> Self {
        Self { name, pass: worst.pass(), detail: worst.detail() }
    }
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    if args.steps == 0 {
        return Err(Error::Domain("check needs --steps >= 1".into()));
    }
    let mut all_pass = true;
    for &alpha in &args.alpha {
        println!("== alpha = {alpha}, steps = {} ==", args.steps);
        let checks = invariant_suite(alpha, args.steps, args.inject_fault)?;
        for check in &checks {
            println!(
                "{:<34} {}  {}",
                check.name,
                if check.pass { "PASS" } else { "FAIL" },
                check.detail
            );
            all_pass &= check.pass;
        }
        println!();
    }
    if all_pass {
        Ok(0)
    } else {
        eprintln!("invariant suite failed");
        Ok(2)
    }
}

fn invariant_suite(alpha: f64, steps: u64, inject_fault: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // Analytic layer: fixed point, series routes, oracle agreements.
    let lm = solve_q(alpha, 1e-13)?;
    let mut fixed = Worst::new();
    fixed.note(fixed_point_residual(&lm).abs() / tol::Q_SERIES_RESIDUAL, 0);
    fixed.note(atom_form_residual(&lm).abs() / tol::Q_ATOM_FORM_RESIDUAL, 0);
    fixed.note(
        atom_form_residual_quadrature(&lm).abs() / tol::Q_ATOM_FORM_RESIDUAL_QUAD,
        0,
    );
    checks.push(Check {
        name: "fixed point residuals (3 forms)",
        pass: fixed.pass(),
        detail: format!("q = {}, {}", lm.q(), fixed.detail()),
    });

    let mut g_agree = Worst::new();
    let mut x = 0.25;
    while x <= 3.0 + 1e-9 {
        let diff = (g_series(x, 60)? - g_closed(x)?).abs();
        g_agree.note(diff / tol::G_AGREEMENT_ABS, 0);
        x += 0.25;
    }
    checks.push(Check::from_worst("g series vs closed form", &g_agree));

    let mut trunc = Worst::new();
    for k in 0..=10 {
        let stable = trunc_gauss_moment(k, &lm)?;
        let quad = trunc_gauss_moment_quadrature(k, &lm)?;
        trunc.note(((stable - quad) / quad).abs() / tol::TRUNC_MOMENT_QUAD_REL, k as u64);
    }
    checks.push(Check {
        name: "truncated moments vs quadrature",
        pass: trunc.pass(),
        detail: format!("worst {:.3e} of budget at k = {}", trunc.ratio, trunc.at),
    });

    let ineq = check_inequalities(&lm, 20)?;
    let min_margin = ineq
        .rows
        .iter()
        .map(|r| r.lower_margin.min(r.upper_margin))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "inequality family at q (k <= 20)",
        pass: ineq.all_pass,
        detail: format!("smallest margin {min_margin:.3e}"),
    });

    // Evolution layer: per-step structural invariants.
    let mut validity: Option<String> = None;
    let mut conservation = Worst::new();
    let mut frozen_total = Worst::new();
    let mut m2_identity = Worst::new();
    let mut bounds = Worst::new();
    let mut monotone = Worst::new();
    let mut support = Worst::new();
    let mut frozen_sites = Worst::new();
    let mut change = Worst::new();
    let mut telescope = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
    let mut m_prev = [0.0f64; 3];

    let mut state = MassState::delta(alpha)?;
    for t in 0..steps {
        if inject_fault && t == steps / 2 {
            state.set_site_mass(0, state.mass_at(0) + 0.6);
        }
        let split = match freeze_split(&state) {
            Ok(split) => split,
            Err(e) => {
                validity = Some(format!("at t = {t}: {e}"));
                break;
            }
        };
        frozen_total.note((split.frozen_total() - alpha).abs() / tol::FROZEN_TOTAL, t);
        let occupied = split.frozen().iter().filter(|&&m| m > 0.0).count();
        frozen_sites.note(occupied.saturating_sub(2) as f64, t);
        let beta = split.beta();
        if t >= 1 {
            let spread = (t as f64 * (1.0 - alpha)).sqrt();
            let lower = spread - 1.0;
            let upper = spread / alpha.sqrt();
            let violation = (lower - beta as f64).max(beta as f64 - upper).max(0.0);
            bounds.note(violation / tol::BOUNDARY_BOUND_SLACK, t);
        }
        let nu0 = free_moment(&split, 0)?;
        let nu2 = free_moment(&split, 2)?;
        let nu4 = free_moment(&split, 4)?;
        let rhs = [nu0, 6.0 * nu2 + nu0, 15.0 * nu4 + 15.0 * nu2 + nu0];
        for (acc, r) in telescope.iter_mut().zip(rhs) {
            acc.add(r);
        }

        state = heat_step(&split);
        let t1 = t + 1;
        support.note((state.max_site() as f64 - (beta + 1) as f64).max(0.0), t1);
        monotone.note((beta as f64 - boundary(&state) as f64).max(0.0), t1);
        conservation.note(
            (state.total_mass() - 1.0).abs() / (tol::MASS_DRIFT_PER_T * (t1 + 1) as f64),
            t1,
        );
        let m_next = [moment(&state, 2)?, moment(&state, 4)?, moment(&state, 6)?];
        m2_identity.note(
            (m_next[0] - t1 as f64 * (1.0 - alpha)).abs() / (tol::ROW_M2_REL * t1 as f64),
            t1,
        );
        for i in 0..3 {
            let residual = (m_next[i] - m_prev[i] - rhs[i]).abs();
            change.note(residual / (tol::MOMENT_CHANGE_REL * rhs[i].abs().max(1.0)), t1);
        }
        m_prev = m_next;
    }

    checks.push(Check {
        name: "state validity each step",
        pass: validity.is_none(),
        detail: validity.clone().unwrap_or_else(|| "freeze split accepted every state".into()),
    });
    checks.push(Check::from_worst("mass conservation", &conservation));
    checks.push(Check::from_worst("frozen mass equals alpha", &frozen_total));
    checks.push(Check {
        name: "frozen support (<= 2 sites/side)",
        pass: frozen_sites.ratio == 0.0,
        detail: format!("worst excess sites {} at t = {}", frozen_sites.ratio, frozen_sites.at),
    });
    checks.push(Check::from_worst("second moment identity", &m2_identity));
    checks.push(Check::from_worst("boundary bounds", &bounds));
    checks.push(Check {
        name: "boundary non-decreasing",
        pass: monotone.ratio == 0.0,
        detail: format!("worst decrease {} at t = {}", monotone.ratio, monotone.at),
    });
    checks.push(Check {
        name: "support within boundary + 1",
        pass: support.ratio == 0.0,
        detail: format!("worst excess sites {} at t = {}", support.ratio, support.at),
    });
    checks.push(Check::from_worst("moment change identity (k=1,2,3)", &change));

    let mut tele = Worst::new();
    if validity.is_none() {
        for (i, acc) in telescope.iter().enumerate() {
            let ratio = (m_prev[i] - acc.value()).abs()
                / (tol::TELESCOPE_REL * m_prev[i].abs().max(1.0));
            tele.note(ratio, steps);
        }
        checks.push(Check::from_worst("telescoped moment evolution", &tele));
    } else {
        checks.push(Check {
            name: "telescoped moment evolution",
            pass: false,
            detail: "skipped: evolution aborted".into(),
        });
    }

    if validity.is_none() && steps >= 100 {
        let distance = levy_distance(&state, &lm)?;
        checks.push(Check {
            name: "levy distance to limit (<= 0.1)",
            pass: distance <= 0.1,
            detail: format!("distance {distance:.4}"),
        });
        let row = diagnostics_row(&state);
        checks.push(Check {
            name: "diagnostics row at final state",
            pass: row.is_ok(),
            detail: match row {
                Ok(r) => format!("beta/sqrt(t) = {:.4}", r.beta_scaled),
                Err(e) => e.to_string(),
            },
        });
    }

    Ok(checks)
}
