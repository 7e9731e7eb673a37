//! Command-line front end for the averaging pipeline.
//!
//! Stages: validate → coeffs → averaged → roots → verify, plus a Cartesian
//! orbit exporter and the two bundled end-to-end constructions
//! (`reproduce thm11|thm12`). Every data artifact is CSV or JSON under
//! `--out`; a run manifest lists all emitted files.
//!
//! Exit codes: 0 success · 1 reproduce criterion failure · 2 validation or
//! argument failure · 3 quadrature failure · 4 root isolation failure ·
//! 5 simulation failure · 6 I/O failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use avgcycles::averaging::{
    assemble_h, compute_table, AveragedPolynomial, CoefficientTable,
};
use avgcycles::blowup::{build_flow_factor_for_line, check_g_nonvanishing, FlowFactor};
use avgcycles::error::Error;
use avgcycles::flowsim::{
    cartesian_orbit, find_fixed_points, integrate_period_logged, VerificationConfig,
};
use avgcycles::poly::BivarPoly;
use avgcycles::problem::{
    parse_problem, serialize_problem, validate_center, Problem, SwitchingLine,
};
use avgcycles::roots::{descartes_bound, isolate_positive_roots, RootReport};

const EXIT_CRITERION: u8 = 1;
const EXIT_VALIDATE: u8 = 2;
const EXIT_QUAD: u8 = 3;
const EXIT_ROOTS: u8 = 4;
const EXIT_SIM: u8 = 5;
const EXIT_IO: u8 = 6;

/// Absolute tolerance for the flow-factor antiderivative (fixed: everything
/// downstream depends on it, so it is kept an order tighter than any stage
/// default).
const FLOW_TOL: f64 = 1e-12;
/// Default absolute quadrature tolerance for coefficient integrals.
const QUAD_TOL: f64 = 1e-9;
/// Default bisection width for root isolation.
const ROOT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "avgcycles",
    version,
    about = "Limit cycles of piecewise-cubic perturbations of a quasi-homogeneous center: \
             first-order averaging prediction plus return-map verification."
)]
struct Cli {
    /// Problem configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Primary tolerance of the invoked stage (quadrature for
    /// coeffs/averaged, bisection width for roots, integrator error control
    /// for verify/orbit). Stage defaults apply when omitted.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Comma-separated ε ladder, strictly decreasing (verify; first entry is
    /// used by orbit). Default: 1e-3,1e-4 for verify, 0 for orbit.
    #[arg(long, global = true)]
    eps: Option<String>,

    /// Upper end of the root search interval (default: automatic coefficient
    /// bound).
    #[arg(long, global = true)]
    zmax: Option<f64>,

    /// Output directory for all artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Skip the return-map verification stage of `reproduce`.
    #[arg(long, global = true)]
    skip_verify: bool,

    /// Skip even-exponent coefficient integrals that vanish by symmetry
    /// (horizontal switching line only).
    #[arg(long, global = true)]
    fast_symmetry: bool,

    /// Also dump the flow factor (theta,w,value) as flow.csv.
    #[arg(long, global = true)]
    dump_flow: bool,

    /// Also dump accepted integrator steps of one period integration as
    /// steps.csv (verify only; debug aid).
    #[arg(long, global = true)]
    step_log: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse the configuration and run the validity checks (center
    /// condition, g-nonvanishing); exit 2 on any failure.
    Validate,
    /// Compute the coefficient table k_{i,j} (coeffs.csv).
    Coeffs,
    /// Assemble the averaged polynomial h(z) (averaged.csv).
    Averaged,
    /// Isolate positive zeros of h (roots.csv, roots.json).
    Roots,
    /// Locate return-map fixed points near each predicted zero (verify.json).
    Verify,
    /// Integrate one Cartesian orbit and export it (orbit.csv).
    Orbit {
        /// Initial x.
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        /// Initial y.
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        /// Integration time span.
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
    },
    /// Run a bundled construction end to end and check every step against
    /// its published target; exit 1 if any check fails.
    Reproduce {
        #[arg(value_enum)]
        which: Repro,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repro {
    /// Vertical switching line, 7 limit cycles at z = 1..7.
    Thm11,
    /// Horizontal switching line, 3 limit cycles at z = 1, √2, √3.
    Thm12,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

type CliError = (u8, anyhow::Error);
type CliResult<T> = Result<T, CliError>;

fn fail<E: Into<anyhow::Error>>(code: u8) -> impl FnOnce(E) -> CliError {
    move |e| (code, e.into())
}

/// Worker cap: AVGCYCLES_THREADS when set, else the machine's parallelism.
fn thread_count() -> CliResult<usize> {
    match std::env::var("AVGCYCLES_THREADS") {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| (EXIT_VALIDATE, anyhow!("AVGCYCLES_THREADS must be a positive integer, got {s:?}")))?;
            if n == 0 {
                return Err((EXIT_VALIDATE, anyhow!("AVGCYCLES_THREADS must be positive")));
            }
            Ok(n)
        }
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
        Err(e) => Err((EXIT_VALIDATE, anyhow!("AVGCYCLES_THREADS: {e}"))),
    }
}

fn parse_eps_list(s: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| (EXIT_VALIDATE, anyhow!("--eps: {part:?} is not a number")))?;
        out.push(v);
    }
    Ok(out)
}

/// Collects artifacts and timings for the run manifest.
struct Run {
    out_dir: PathBuf,
    subcommand: String,
    config_label: String,
    tolerances: BTreeMap<String, f64>,
    timings_ms: BTreeMap<String, f64>,
    outputs: Vec<String>,
}

impl Run {
    fn new(out_dir: &Path, subcommand: &str, config_label: &str) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))
            .map_err(fail(EXIT_IO))?;
        Ok(Run {
            out_dir: out_dir.to_path_buf(),
            subcommand: subcommand.to_string(),
            config_label: config_label.to_string(),
            tolerances: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let result = f();
        self.timings_ms
            .insert(stage.to_string(), t0.elapsed().as_secs_f64() * 1e3);
        result
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(fail(EXIT_IO))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    fn finish(mut self) -> CliResult<()> {
        #[derive(serde::Serialize)]
        struct RunManifest<'a> {
            version: &'a str,
            subcommand: &'a str,
            config: &'a str,
            tolerances: &'a BTreeMap<String, f64>,
            timings_ms: &'a BTreeMap<String, f64>,
            outputs: &'a [String],
        }
        let manifest_path = self.out_dir.join("manifest.json");
        self.outputs.push(manifest_path.display().to_string());
        let doc = serde_json::to_string_pretty(&RunManifest {
            version: avgcycles::VERSION,
            subcommand: &self.subcommand,
            config: &self.config_label,
            tolerances: &self.tolerances,
            timings_ms: &self.timings_ms,
            outputs: &self.outputs,
        })
        .expect("manifest serialization cannot fail");
        std::fs::write(&manifest_path, doc)
            .with_context(|| format!("writing {}", manifest_path.display()))
            .map_err(fail(EXIT_IO))?;
        Ok(())
    }
}

fn load_problem(cli: &Cli) -> CliResult<(Problem, String)> {
    let path = cli.config.as_ref().ok_or_else(|| {
        (
            EXIT_VALIDATE,
            anyhow!("--config PATH is required for this subcommand"),
        )
    })?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(fail(EXIT_IO))?;
    let problem = parse_problem(&text).map_err(fail(EXIT_VALIDATE))?;
    Ok((problem, path.display().to_string()))
}

fn build_ff(run: &mut Run, problem: &Problem) -> CliResult<FlowFactor> {
    run.tolerances.insert("flow_factor".into(), FLOW_TOL);
    run.timed("flow_factor", || {
        build_flow_factor_for_line(problem.params, problem.line, FLOW_TOL)
    })
    .map_err(fail(EXIT_QUAD))
}

fn dump_flow(run: &mut Run, ff: &FlowFactor) -> CliResult<()> {
    let alpha = ff.base_angle();
    let mut csv = String::from("theta,w,value\n");
    for k in 0..=1024 {
        let theta = alpha + std::f64::consts::TAU * k as f64 / 1024.0;
        let w = ff.w(theta).map_err(fail(EXIT_QUAD))?;
        let _ = writeln!(csv, "{theta},{w},{}", w.exp());
    }
    run.write("flow.csv", &csv)?;
    Ok(())
}

fn stage_coeffs(
    run: &mut Run,
    cli: &Cli,
    problem: &Problem,
    ff: &FlowFactor,
    tol: f64,
) -> CliResult<CoefficientTable> {
    let threads = thread_count()?;
    run.tolerances.insert("quadrature".into(), tol);
    let table = run
        .timed("coeffs", || {
            compute_table(problem, ff, tol, cli.fast_symmetry, threads)
        })
        .map_err(fail(EXIT_QUAD))?;
    let mut csv = String::from("i,j,value,err\n");
    for ((i, j), entry) in table.entries() {
        let _ = writeln!(csv, "{i},{j},{},{}", entry.value, entry.err);
    }
    run.write("coeffs.csv", &csv)?;
    Ok(table)
}

fn stage_averaged(run: &mut Run, table: &CoefficientTable) -> CliResult<AveragedPolynomial> {
    let h = run
        .timed("averaged", || assemble_h(table))
        .map_err(fail(EXIT_QUAD))?;
    let mut csv = String::from("n,coefficient\n");
    for (n, c) in h.coeffs() {
        let _ = writeln!(csv, "{n},{c}");
    }
    run.write("averaged.csv", &csv)?;
    Ok(h)
}

fn stage_roots(
    run: &mut Run,
    cli: &Cli,
    h: &AveragedPolynomial,
    tol: f64,
) -> CliResult<RootReport> {
    run.tolerances.insert("root_bisection".into(), tol);
    let report = run
        .timed("roots", || isolate_positive_roots(h, tol, cli.zmax))
        .map_err(fail(EXIT_ROOTS))?;
    let mut csv = String::from("z_star,h_deriv,simple\n");
    for r in &report.roots {
        let _ = writeln!(csv, "{},{},{}", r.z_star, r.h_deriv, r.simple);
    }
    run.write("roots.csv", &csv)?;
    let json = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    run.write("roots.json", &json)?;
    Ok(report)
}

fn verification_config(cli: &Cli) -> CliResult<VerificationConfig> {
    let mut cfg = VerificationConfig::default();
    if let Some(list) = cli.eps.as_deref() {
        cfg.epsilons = parse_eps_list(list)?;
    }
    if let Some(tol) = cli.tol {
        cfg.integrator_tol = tol;
    }
    cfg.validate().map_err(fail(EXIT_VALIDATE))?;
    Ok(cfg)
}

fn stage_verify(
    run: &mut Run,
    cli: &Cli,
    problem: &Problem,
    ff: &FlowFactor,
    predicted: &RootReport,
) -> CliResult<avgcycles::flowsim::CycleReport> {
    let cfg = verification_config(cli)?;
    run.tolerances
        .insert("integrator".into(), cfg.integrator_tol);
    run.tolerances.insert("fixpoint".into(), cfg.fixpoint_tol);
    if cli.step_log {
        // Debug aid: one period integration with every accepted step logged.
        let z = predicted.roots.first().map(|r| r.z_star).unwrap_or(1.0);
        let eps = cfg.epsilons.first().copied().unwrap_or(0.0);
        let mut steps = Vec::new();
        integrate_period_logged(problem, ff, z, eps, cfg.integrator_tol, Some(&mut steps))
            .map_err(fail(EXIT_SIM))?;
        let mut csv = String::from("theta_start,theta_end\n");
        for (a, b) in steps {
            let _ = writeln!(csv, "{a},{b}");
        }
        run.write("steps.csv", &csv)?;
    }
    let report = run.timed("verify", || find_fixed_points(problem, ff, predicted, &cfg));
    let json = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    run.write("verify.json", &json)?;
    Ok(report)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match &cli.cmd {
        Cmd::Validate => cmd_validate(&cli),
        Cmd::Coeffs | Cmd::Averaged | Cmd::Roots | Cmd::Verify => cmd_pipeline(&cli),
        Cmd::Orbit { x0, y0, tmax } => cmd_orbit(&cli, *x0, *y0, *tmax),
        Cmd::Reproduce { which } => cmd_reproduce(&cli, *which),
    }
}

fn cmd_validate(cli: &Cli) -> CliResult<u8> {
    let (problem, config_label) = load_problem(cli)?;
    let mut run = Run::new(&cli.out, "validate", &config_label)?;
    let p = problem.params;
    println!(
        "center: a={}, b={}, c={}, d={}  (discriminant {} < 0)",
        p.a,
        p.b,
        p.c,
        p.d,
        p.discriminant()
    );
    println!("switching line: {}", problem.line.as_config_str());
    let gmin = run
        .timed("g_check", || {
            check_g_nonvanishing(
                p,
                avgcycles::blowup::G_GUARD_SAMPLES,
                avgcycles::blowup::G_GUARD_FLOOR,
            )
        })
        .map_err(fail(EXIT_VALIDATE))?;
    println!("min |g| = {} at theta = {}", gmin.min_abs, gmin.theta);
    for (name, poly) in [
        ("p+", &problem.p_plus),
        ("p-", &problem.p_minus),
        ("q+", &problem.q_plus),
        ("q-", &problem.q_minus),
    ] {
        println!("{name}: {poly}");
    }
    println!("validate: OK");
    run.finish()?;
    Ok(0)
}

fn cmd_pipeline(cli: &Cli) -> CliResult<u8> {
    let stage = match cli.cmd {
        Cmd::Coeffs => "coeffs",
        Cmd::Averaged => "averaged",
        Cmd::Roots => "roots",
        Cmd::Verify => "verify",
        _ => unreachable!(),
    };
    let (problem, config_label) = load_problem(cli)?;
    let mut run = Run::new(&cli.out, stage, &config_label)?;
    let ff = build_ff(&mut run, &problem)?;
    if cli.dump_flow {
        dump_flow(&mut run, &ff)?;
    }
    let quad_tol = match cli.cmd {
        Cmd::Coeffs | Cmd::Averaged => cli.tol.unwrap_or(QUAD_TOL),
        _ => QUAD_TOL,
    };
    let table = stage_coeffs(&mut run, cli, &problem, &ff, quad_tol)?;
    println!(
        "coeffs: {} entries at tol {quad_tol} -> coeffs.csv",
        table.entries().count()
    );
    if !matches!(cli.cmd, Cmd::Coeffs) {
        let h = stage_averaged(&mut run, &table)?;
        println!("averaged: h(z) = {h} -> averaged.csv");
        if !matches!(cli.cmd, Cmd::Averaged) {
            let root_tol = match cli.cmd {
                Cmd::Roots => cli.tol.unwrap_or(ROOT_TOL),
                _ => ROOT_TOL,
            };
            let report = stage_roots(&mut run, cli, &h, root_tol)?;
            println!(
                "roots: {} found, bound {} ({}) -> roots.csv",
                report.roots.len(),
                report.descartes_bound,
                if report.bound_attained {
                    "attained"
                } else {
                    "not attained"
                }
            );
            if matches!(cli.cmd, Cmd::Verify) {
                if cli.skip_verify {
                    println!("verify: skipped (--skip-verify)");
                } else {
                    let cycles = stage_verify(&mut run, cli, &problem, &ff, &report)?;
                    println!(
                        "verify: {}/{} roots verified -> verify.json",
                        cycles.count_verified,
                        cycles.roots.len()
                    );
                }
            }
        }
    }
    run.finish()?;
    Ok(0)
}

fn cmd_orbit(cli: &Cli, x0: f64, y0: f64, tmax: f64) -> CliResult<u8> {
    let (problem, config_label) = load_problem(cli)?;
    let mut run = Run::new(&cli.out, "orbit", &config_label)?;
    let tol = cli.tol.unwrap_or(1e-11);
    let eps = match cli.eps.as_deref() {
        Some(list) => *parse_eps_list(list)?
            .first()
            .ok_or_else(|| (EXIT_VALIDATE, anyhow!("--eps list is empty")))?,
        None => 0.0,
    };
    run.tolerances.insert("integrator".into(), tol);
    if tmax <= 0.0 {
        return Err((EXIT_VALIDATE, anyhow!("--tmax must be positive")));
    }
    let samples = run
        .timed("orbit", || cartesian_orbit(&problem, x0, y0, eps, tmax, tol))
        .map_err(fail(EXIT_SIM))?;
    let mut csv = String::from("t,x,y\n");
    for (t, x, y) in &samples {
        let _ = writeln!(csv, "{t},{x},{y}");
    }
    run.write("orbit.csv", &csv)?;
    println!(
        "orbit: {} samples over t in [0, {tmax}] at eps={eps} -> orbit.csv",
        samples.len()
    );
    run.finish()?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// Bundled constructions.

/// Which perturbation slot a probe activates.
#[derive(Clone, Copy)]
enum Slot {
    PPlus(u32, u32),
    QPlus(u32, u32),
}

struct Construction {
    name: &'static str,
    line: SwitchingLine,
    /// (slot, resulting exponent n = i+2j, target coefficient of zⁿ).
    targets: &'static [(Slot, u32, f64)],
    expected_roots: &'static [f64],
    /// Audit that all even-i table entries vanish (horizontal line only).
    even_i_audit: bool,
}

const THM11: Construction = Construction {
    name: "thm11",
    line: SwitchingLine::VerticalX0,
    targets: &[
        (Slot::QPlus(0, 0), 1, -5040.0),
        (Slot::PPlus(0, 0), 2, 13068.0),
        (Slot::PPlus(1, 0), 3, -13132.0),
        (Slot::PPlus(2, 0), 4, 6769.0),
        (Slot::PPlus(3, 0), 5, -1960.0),
        (Slot::PPlus(2, 1), 6, 322.0),
        (Slot::PPlus(1, 2), 7, -28.0),
        (Slot::PPlus(0, 3), 8, 1.0),
    ],
    expected_roots: &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
    even_i_audit: false,
};

const SQRT2: f64 = std::f64::consts::SQRT_2;
const THM12: Construction = Construction {
    name: "thm12",
    line: SwitchingLine::HorizontalY0,
    targets: &[
        (Slot::QPlus(0, 0), 1, -6.0),
        (Slot::PPlus(1, 0), 3, 11.0),
        (Slot::PPlus(1, 1), 5, -6.0),
        (Slot::PPlus(1, 2), 7, 1.0),
    ],
    expected_roots: &[1.0, SQRT2, 1.7320508075688772],
    even_i_audit: true,
};

/// Center parameters shared by both bundled constructions.
fn bundled_params() -> avgcycles::problem::CenterParams {
    validate_center(1.0, 1.0, -0.25, 3.0).expect("bundled parameters satisfy the center condition")
}

fn empty_problem(line: SwitchingLine) -> Problem {
    Problem {
        params: bundled_params(),
        line,
        p_plus: BivarPoly::new(),
        p_minus: BivarPoly::new(),
        q_plus: BivarPoly::new(),
        q_minus: BivarPoly::new(),
    }
}

fn with_slot(line: SwitchingLine, slot: Slot, value: f64) -> Problem {
    let mut problem = empty_problem(line);
    match slot {
        Slot::PPlus(i, j) => problem.p_plus.set_term(i, j, value),
        Slot::QPlus(i, j) => problem.q_plus.set_term(i, j, value),
    }
    .expect("bundled slots are within degree bounds");
    problem
}

/// All four branch polynomials with every cubic slot set to 1: activates all
/// 14 table entries, including the even-i ones that must cancel by symmetry.
fn all_ones_problem(line: SwitchingLine) -> Problem {
    let mut problem = empty_problem(line);
    for i in 0..=3u32 {
        for j in 0..=(3 - i) {
            problem.p_plus.set_term(i, j, 1.0).unwrap();
            problem.p_minus.set_term(i, j, 1.0).unwrap();
            problem.q_plus.set_term(i, j, 1.0).unwrap();
            problem.q_minus.set_term(i, j, 1.0).unwrap();
        }
    }
    problem
}

struct Check {
    pass: bool,
    label: String,
    detail: String,
}

fn check(list: &mut Vec<Check>, pass: bool, label: impl Into<String>, detail: String) {
    list.push(Check {
        pass,
        label: label.into(),
        detail,
    });
}

fn rel_err(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn cmd_reproduce(cli: &Cli, which: Repro) -> CliResult<u8> {
    let cons = match which {
        Repro::Thm11 => &THM11,
        Repro::Thm12 => &THM12,
    };
    let config_label = format!("<bundled:{}>", cons.name);
    let mut run = Run::new(&cli.out, &format!("reproduce {}", cons.name), &config_label)?;
    let quad_tol = cli.tol.unwrap_or(QUAD_TOL);
    run.tolerances.insert("quadrature".into(), quad_tol);
    let threads = thread_count()?;
    let params = bundled_params();
    let ff = run
        .timed("flow_factor", || {
            build_flow_factor_for_line(params, cons.line, FLOW_TOL)
        })
        .map_err(fail(EXIT_QUAD))?;
    if cli.dump_flow {
        dump_flow(&mut run, &ff)?;
    }

    let mut checks: Vec<Check> = Vec::new();

    // Stage 1: per-slot response C_n (unit value in one slot), then solve
    // slot_value = target_n / C_n. The construction is exact by linearity:
    // each target exponent is fed by exactly one slot.
    let mut full = empty_problem(cons.line);
    let solve = run.timed("solve_slots", || -> Result<Vec<(u32, f64)>, Error> {
        let mut responses = Vec::new();
        for &(slot, n, target) in cons.targets {
            let probe = with_slot(cons.line, slot, 1.0);
            let table = compute_table(&probe, &ff, quad_tol, false, threads)?;
            let h = assemble_h(&table)?;
            let c_n = h.coeff(n);
            responses.push((n, c_n));
            let value = target / c_n;
            match slot {
                Slot::PPlus(i, j) => full.p_plus.set_term(i, j, value)?,
                Slot::QPlus(i, j) => full.q_plus.set_term(i, j, value)?,
            }
        }
        Ok(responses)
    });
    let responses = solve.map_err(fail(EXIT_QUAD))?;
    for (n, c_n) in &responses {
        if !(c_n.is_finite() && *c_n != 0.0) {
            return Err((
                EXIT_QUAD,
                anyhow!("degenerate unit-slot response for exponent {n}: {c_n}"),
            ));
        }
    }
    run.write("reproduce-problem.json", &serialize_problem(&full))?;

    // Stage 2: full pipeline on the solved problem.
    let table = stage_coeffs(&mut run, cli, &full, &ff, quad_tol)?;
    let h = stage_averaged(&mut run, &table)?;
    for &(_, n, target) in cons.targets {
        let got = h.coeff(n);
        let re = rel_err(got, target);
        check(
            &mut checks,
            re <= 1e-6,
            format!("coefficient z^{n} = {target}"),
            format!("got {got} (rel err {re:.2e})"),
        );
    }
    let spurious: Vec<u32> = h
        .coeffs()
        .map(|(n, _)| n)
        .filter(|n| !cons.targets.iter().any(|&(_, m, _)| m == *n))
        .collect();
    check(
        &mut checks,
        spurious.is_empty(),
        "no spurious exponents",
        format!("extra exponents: {spurious:?}"),
    );

    let bound = descartes_bound(&h).map_err(fail(EXIT_ROOTS))?;
    check(
        &mut checks,
        bound as usize == cons.expected_roots.len(),
        format!("sign-variation bound = {}", cons.expected_roots.len()),
        format!("got {bound}"),
    );

    let report = stage_roots(&mut run, cli, &h, cli.tol.unwrap_or(ROOT_TOL).min(ROOT_TOL))?;
    check(
        &mut checks,
        report.roots.len() == cons.expected_roots.len(),
        format!("{} positive roots", cons.expected_roots.len()),
        format!("got {}", report.roots.len()),
    );
    for (k, &expected) in cons.expected_roots.iter().enumerate() {
        let (pass, detail) = match report.roots.get(k) {
            Some(r) => (
                (r.z_star - expected).abs() <= 1e-8 && r.simple,
                format!("got {} (|Δ| = {:.2e}, simple = {})", r.z_star, (r.z_star - expected).abs(), r.simple),
            ),
            None => (false, "missing".to_string()),
        };
        check(&mut checks, pass, format!("root #{} ≈ {expected}", k + 1), detail);
    }

    if cons.even_i_audit {
        let audit = run
            .timed("even_i_audit", || {
                compute_table(&all_ones_problem(cons.line), &ff, quad_tol, false, threads)
            })
            .map_err(fail(EXIT_QUAD))?;
        let mut worst = 0.0f64;
        let mut count = 0;
        for ((i, _), entry) in audit.entries() {
            if i % 2 == 0 {
                worst = worst.max(entry.value.abs());
                count += 1;
            }
        }
        check(
            &mut checks,
            count == 8 && worst < 1e-8,
            "even-i entries vanish (symmetry audit)",
            format!("{count} entries, max |value| = {worst:.2e}"),
        );
    }

    if cli.skip_verify {
        println!("verify: skipped (--skip-verify)");
    } else {
        let cycles = stage_verify(&mut run, cli, &full, &ff, &report)?;
        check(
            &mut checks,
            cycles.count_verified == cons.expected_roots.len(),
            format!("{} verified cycles", cons.expected_roots.len()),
            format!(
                "got {} (per-root: {})",
                cycles.count_verified,
                cycles
                    .roots
                    .iter()
                    .map(|r| format!(
                        "z*={:.4}:{}",
                        r.z_star,
                        if r.verified { "ok" } else { "UNVERIFIED" }
                    ))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
    }

    let mut all_pass = true;
    println!("reproduce {}:", cons.name);
    for c in &checks {
        all_pass &= c.pass;
        println!(
            "  {}  {:<40} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        );
    }
    let mut report_txt = String::new();
    for c in &checks {
        let _ = writeln!(
            report_txt,
            "{}\t{}\t{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        );
    }
    run.write("reproduce-report.txt", &report_txt)?;
    run.finish()?;
    if all_pass {
        println!("reproduce {}: all checks passed", cons.name);
        Ok(0)
    } else {
        println!("reproduce {}: CHECKS FAILED", cons.name);
        Ok(EXIT_CRITERION)
    }
}
