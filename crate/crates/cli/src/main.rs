use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gpsol_core::solver::{minimize, MinimizeConfig, SolveResult, SolveSummary};
use gpsol_core::state::StateJson;
use gpsol_core::suites::{rearrangement_suite, residual_suite, scalar_suite, CheckLine};
use gpsol_core::surface::{check_properties, sweep, write_surface_csv};
use gpsol_core::{ConstraintTargets, Error as CoreError, Grid, PairState};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gpsol",
    version,
    about = "Dark-bright soliton pairs by constrained energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize the energy at one (q, m).
    Solve(SolveArgs),
    /// Minimize over a (q, m) table and check the surface properties.
    Sweep(SweepArgs),
    /// Run a verification suite.
    #[command(subcommand)]
    Check(CheckCmd),
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Grid half-width.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Number of grid nodes (odd).
    #[arg(long)]
    n: Option<usize>,
    /// Projected-gradient tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Include the rho, phi, v arrays in the output.
    #[arg(long)]
    profiles: bool,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    q_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    m_list: Option<Vec<f64>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, env = "GPSOL_THREADS")]
    jobs: Option<usize>,
    /// CSV table destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON property report destination.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Tolerance of the surface property checks.
    #[arg(long, default_value_t = 2e-3)]
    property_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    strict_margin: f64,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Rearrangement inequalities and the symmetrization transform.
    Rearrange {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form scalar solitons.
    Scalar {
        #[arg(long = "L", default_value_t = 40.0)]
        half_width: f64,
        #[arg(long, default_value_t = 8001)]
        n: usize,
    },
    /// Traveling-wave residuals of a stored profile.
    Residual {
        #[arg(long = "in")]
        input: PathBuf,
        /// Speed; taken from the file when it holds a solve summary.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1e-4)]
        ode_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        first_integral_tol: f64,
    },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    beta: Option<f64>,
    q: Option<f64>,
    m: Option<f64>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
    n: Option<usize>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    seed: Option<u64>,
    symmetrize_every: Option<usize>,
    q_list: Option<Vec<f64>>,
    m_list: Option<Vec<f64>>,
    restarts: Option<usize>,
    jobs: Option<usize>,
}

/// Failure of a command: bad input or an unconverged solve.
enum Failure {
    Input(anyhow::Error),
    NotConverged(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = Result<(), Failure>;

fn load_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("--config: cannot read {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("--config: invalid JSON in {}", p.display()))
        }
    }
}

/// Names the flag behind a core domain error.
fn flag_error(e: CoreError) -> anyhow::Error {
    match e {
        CoreError::Domain {
            name,
            value,
            domain,
        } => {
            anyhow!("--{name}: value {value} is outside {domain}")
        }
        CoreError::EvenOrTinyGrid(n) => anyhow!("--n: need an odd number of nodes >= 3, got {n}"),
        CoreError::BadHalfWidth(l) => anyhow!("--L: half-width must be positive, got {l}"),
        CoreError::Config(msg) => anyhow!("invalid configuration: {msg}"),
        other => anyhow!(other),
    }
}

fn build_config(
    common: &Common,
    file: &FileConfig,
    q: f64,
    m: f64,
) -> anyhow::Result<MinimizeConfig> {
    let alpha = common.alpha.or(file.alpha).unwrap_or(1.0);
    let beta = common.beta.or(file.beta).unwrap_or(1.0);
    let l = common.half_width.or(file.half_width).unwrap_or(40.0);
    let n = common.n.or(file.n).unwrap_or(8001);
    let targets = ConstraintTargets::new(q, m, alpha, beta).map_err(flag_error)?;
    let grid = Grid::new(l, n).map_err(flag_error)?;
    let mut cfg = MinimizeConfig::new(targets, grid);
    if let Some(tol) = common.tol.or(file.tol) {
        cfg.grad_tol = tol;
        if tol.is_nan() || tol <= 0.0 {
            return Err(anyhow!("--tol: must be positive, got {tol}"));
        }
    }
    if let Some(k) = common.max_iters.or(file.max_iters) {
        if k == 0 {
            return Err(anyhow!("--max-iters: must be at least 1"));
        }
        cfg.max_iters = k;
    }
    if let Some(s) = common.seed.or(file.seed) {
        cfg.seed = s;
    }
    if let Some(k) = file.symmetrize_every {
        cfg.symmetrize_every = k;
    }
    Ok(cfg)
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("--out: cannot write {}", p.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn summary_line(r: &SolveResult) -> String {
    let lambda = r
        .multiplier_lambda
        .map_or("none".to_string(), |l| format!("{l:.16e}"));
    format!(
        "E={:.16e} c={:.16e} lambda={lambda} c_check={:.16e} p_res={:.3e} m_res={:.3e} ode={:.3e} first_integral={:.3e} H1={} H2={} bounds={} converged={} iters={} grad={:.3e}",
        r.energy,
        r.multiplier_c,
        r.multiplier_c_crosscheck,
        r.momentum_residual,
        r.mass_residual,
        r.ode_residual,
        r.first_integral_residual,
        r.h1_holds,
        r.h2_holds,
        r.bounds_ok,
        r.converged,
        r.iterations,
        r.grad_norm
    )
}

fn summary_csv(s: &SolveSummary) -> String {
    let lambda = s.lambda.map(|l| format!("{l:.16e}")).unwrap_or_default();
    format!(
        "q,m,alpha,beta,energy,c,lambda,c_crosscheck,grad_norm,iterations,converged,momentum_residual,mass_residual,h1,h2,bounds_ok,first_integral_residual,ode_residual\n\
         {:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{lambda},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e}\n",
        s.q,
        s.m,
        s.alpha,
        s.beta,
        s.energy,
        s.c,
        s.c_crosscheck,
        s.grad_norm,
        s.iterations,
        s.converged,
        s.momentum_residual,
        s.mass_residual,
        s.h1,
        s.h2,
        s.bounds_ok,
        s.first_integral_residual,
        s.ode_residual
    )
}

fn profile_csv(state: &PairState) -> String {
    let g = state.grid();
    let theta = state.reconstruct_phase(0.0);
    let mut out = String::from("x,rho,phi,v,theta\n");
    for i in 0..g.n_points() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            g.x(i),
            state.rho()[i],
            state.phi()[i],
            state.v()[i],
            theta[i]
        ));
    }
    out
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let file = load_config(a.common.config.as_deref())?;
    let q = a.q.or(file.q).ok_or_else(|| anyhow!("--q: required"))?;
    let m = a.m.or(file.m).unwrap_or(0.0);
    let cfg = build_config(&a.common, &file, q, m)?;
    cfg.targets.check_solvable().map_err(flag_error)?;
    let r = minimize(&cfg, None).map_err(flag_error)?;
    println!("{}", summary_line(&r));
    if let Some(out) = &a.out {
        let text = match a.format {
            Format::Json => r.to_json(a.profiles).map_err(|e| anyhow!(e))? + "\n",
            Format::Csv if a.profiles => profile_csv(&r.state),
            Format::Csv => summary_csv(&r.summary(false)),
        };
        write_output(Some(out), &text)?;
    }
    if let Some(path) = &a.trace {
        let f = fs::File::create(path)
            .with_context(|| format!("--trace: cannot write {}", path.display()))?;
        r.write_trace_csv(std::io::BufWriter::new(f))
            .map_err(|e| anyhow!(e))?;
    }
    if r.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "no convergence after {} iterations (gradient norm {:.3e})",
            r.iterations, r.grad_norm
        )))
    }
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let file = load_config(a.common.config.as_deref())?;
    let qs = a
        .q_list
        .or(file.q_list.clone())
        .unwrap_or_else(|| vec![0.15, 0.3, 0.45, 0.6]);
    let ms = a
        .m_list
        .or(file.m_list.clone())
        .unwrap_or_else(|| vec![0.0, 0.1, 0.2, 0.4]);
    if qs.is_empty() {
        return Err(anyhow!("--q-list: empty").into());
    }
    if ms.is_empty() {
        return Err(anyhow!("--m-list: empty").into());
    }
    let restarts = a.restarts.or(file.restarts).unwrap_or(3);
    if restarts == 0 {
        return Err(anyhow!("--restarts: must be at least 1").into());
    }
    let jobs = a
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(anyhow!("--jobs: must be at least 1").into());
    }
    let cfg = build_config(&a.common, &file, 0.0, 0.0)?;
    for &q in &qs {
        for &m in &ms {
            ConstraintTargets::new(q, m, cfg.targets.alpha, cfg.targets.beta)
                .and_then(|t| t.check_solvable())
                .map_err(|e| match e {
                    CoreError::Domain {
                        name: "q",
                        value,
                        domain,
                    } => anyhow!("--q-list: value {value} is outside {domain}"),
                    CoreError::Domain {
                        name: "m",
                        value,
                        domain,
                    } => anyhow!("--m-list: value {value} is outside {domain}"),
                    other => flag_error(other),
                })?;
        }
    }
    let table = sweep(&qs, &ms, &cfg, restarts, jobs).map_err(flag_error)?;
    let mut csv = Vec::new();
    write_surface_csv(&mut csv, &table).map_err(|e| anyhow!(e))?;
    write_output(a.out.as_deref(), &String::from_utf8(csv).expect("ascii"))?;

    let report = check_properties(&table, &cfg.targets, a.property_tol, a.strict_margin);
    for c in &report.checks {
        eprintln!(
            "{:<28} {:<12} instances={:<4} worst_margin={:.16e}",
            c.name,
            format!("{:?}", c.verdict).to_lowercase(),
            c.instances,
            c.worst_margin
        );
    }
    for w in &report.near_equality {
        eprintln!("near equality in subadditivity: {w}");
    }
    if let Some(p) = &a.report {
        let text = serde_json::to_string_pretty(&report).map_err(|e| anyhow!(e))?;
        fs::write(p, text + "\n")
            .with_context(|| format!("--report: cannot write {}", p.display()))?;
    }
    let bad: Vec<String> = table
        .iter()
        .filter(|s| !s.converged)
        .map(|s| format!("(q={}, m={})", s.q, s.m))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "cells without convergence: {}",
            bad.join(", ")
        )))
    }
}

fn print_lines(lines: &[CheckLine]) -> bool {
    for l in lines {
        println!(
            "{} {:<30} cases={:<5} failures={:<4} worst_margin={:.16e}",
            if l.passed() { "PASS" } else { "FAIL" },
            l.name,
            l.cases,
            l.failures,
            l.worst_margin
        );
    }
    lines.iter().all(CheckLine::passed)
}

/// Reads either a bare profile or a solve summary carrying profiles.
fn read_profile(path: &Path) -> anyhow::Result<(PairState, Option<SolveSummary>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("--in: cannot read {}", path.display()))?;
    if let Ok(summary) = serde_json::from_str::<SolveSummary>(&text) {
        if let Some(p) = summary.profiles.clone() {
            let state = PairState::try_from(p).map_err(|e| anyhow!("--in: {e}"))?;
            return Ok((state, Some(summary)));
        }
        return Err(anyhow!(
            "--in: summary has no profiles (solve with --profiles)"
        ));
    }
    let p: StateJson = serde_json::from_str(&text)
        .with_context(|| format!("--in: {} is not a profile", path.display()))?;
    Ok((
        PairState::try_from(p).map_err(|e| anyhow!("--in: {e}"))?,
        None,
    ))
}

fn cmd_check(c: CheckCmd) -> CmdResult {
    let ok = match c {
        CheckCmd::Rearrange { cases, seed } => {
            if cases == 0 {
                return Err(anyhow!("--cases: must be at least 1").into());
            }
            print_lines(&rearrangement_suite(cases, seed).map_err(flag_error)?)
        }
        CheckCmd::Scalar { half_width, n } => {
            let g = Grid::new(half_width, n).map_err(flag_error)?;
            print_lines(&scalar_suite(&g).map_err(flag_error)?)
        }
        CheckCmd::Residual {
            input,
            c,
            lambda,
            alpha,
            beta,
            ode_tol,
            first_integral_tol,
        } => {
            let (state, summary) = read_profile(&input)?;
            let c = c
                .or(summary.as_ref().map(|s| s.c))
                .ok_or_else(|| anyhow!("--c: required for a bare profile"))?;
            let lambda = lambda
                .or(summary.as_ref().and_then(|s| s.lambda))
                .unwrap_or(0.0);
            let alpha = alpha.or(summary.as_ref().map(|s| s.alpha)).unwrap_or(1.0);
            let beta = beta.or(summary.as_ref().map(|s| s.beta)).unwrap_or(1.0);
            let t = ConstraintTargets::new(0.0, 0.0, alpha, beta).map_err(flag_error)?;
            print_lines(&residual_suite(
                &state,
                c,
                lambda,
                &t,
                ode_tol,
                first_integral_tol,
            ))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Failure::NotConverged("some checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Check(c) => cmd_check(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
    }
}
