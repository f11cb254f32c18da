//! Command-line front end: `solve`, `verify`, `saddle-escape`, `gen` and
//! `spectrum`.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 iteration
//! budget exhausted, 3 divergence, 4 refused on a degenerate spectrum,
//! 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::engine::{
    auto_stepsize, init_random, solve_observed, DomainBounds, EngineError, SolverConfig, Stepsize,
    StopRule, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::experiments::{
    run_monitored, saddle_escape, verify, verify_replay, SaddleConfig, Suite, VerifyConfig,
};
use crate::io::{
    format_f64, read_trace_csv, write_json, write_matrix_market, write_matrix_market_to,
    write_trace_csv, IoError, MatrixSource, RunArchive,
};
use crate::linalg::{LinalgError, SparseSymMatrix, Spectrum};
use crate::theory::monitors::MonitorOptions;
use crate::theory::{e_obj, e_vec, MonitorKind, MonitorReport, MonitorStatus, TheoryError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

const SOURCE_HELP: &str = "Matrix source: gen:diag=v1,v2,..., gen:lap2d=nx,ny,shift, \
gen:rand=n,density,shift[,seed], or file:path.mtx. Files must be Matrix Market \
`coordinate real symmetric`; a Hamiltonian built elsewhere (for example an FCI \
matrix) can be exported in that form and passed as file:H.mtx.";

#[derive(Debug, Parser)]
#[command(name = "triofm", version, about = "Lowest eigenpairs of sparse symmetric matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iteration and report eigenvalue estimates.
    Solve(SolveArgs),
    /// Run convergence checks over fresh solves or a recorded trace.
    Verify(VerifyArgs),
    /// Perturb random saddle points and check that every trial escapes.
    SaddleEscape(SaddleArgs),
    /// Write a generated matrix in Matrix Market form.
    Gen(GenArgs),
    /// Print the dense spectrum, domain radii and automatic stepsize.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(help = "Matrix source", long_help = SOURCE_HELP)]
    pub matrix: MatrixSource,
    /// Number of eigenpairs.
    #[arg(short, long, default_value_t = 1)]
    pub p: usize,
    /// Fixed stepsize.
    #[arg(long, conflicts_with = "auto")]
    pub alpha: Option<f64>,
    /// Stepsize 1/(10 R_p²) from the estimated spectral norm (default).
    #[arg(long)]
    pub auto: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// JSON solver config; its keys override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl SolverArgs {
    fn stepsize(&self) -> Stepsize {
        self.alpha.map_or(Stepsize::Auto, Stepsize::Fixed)
    }

    /// Flags first, then the config file's keys on top.
    fn solver_config(&self, base: SolverConfig) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            p: self.p,
            alpha: self.stepsize(),
            max_iter: self.max_iter,
            tol: self.tol,
            ..base
        };
        let cfg = match &self.config {
            None => cfg,
            Some(path) => merge_config(cfg, path)?,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    /// Compute the dense spectrum and report e_vec and e_obj.
    #[arg(long)]
    pub oracle: bool,
    /// Stop on the eigenvector error instead of the relative residual
    /// (implies --oracle).
    #[arg(long)]
    pub stop_on_evec: bool,
    /// Attach a monitor (repeatable; implies --oracle).
    #[arg(long = "monitor", value_parser = parse_monitor)]
    pub monitors: Vec<MonitorKind>,
    /// Write a JSON archive of the run.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Check a recorded trace instead of running fresh solves.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Seeds of the fresh solves.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2])]
    pub seeds: Vec<u64>,
    /// Sample every `stride`-th step pair in the costlier monitors.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Neighborhood radius override.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Saddle trials run by the neighborhood suite.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SaddleArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Perturbation bound on ‖X⁰ − X_saddle‖_F.
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Watch each trial with the neighborhood monitor.
    #[arg(long)]
    pub neighborhoods: bool,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator, with or without the `gen:` prefix (diag=..., lap2d=..., rand=...).
    pub spec: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(help = "Matrix source", long_help = SOURCE_HELP)]
    pub matrix: MatrixSource,
    /// Number of lowest eigenpairs to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Columns for the radius ladder and stepsize.
    #[arg(short, long, default_value_t = 1)]
    pub p: usize,
    /// Print eigenvectors even for large n.
    #[arg(long)]
    pub vectors: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Engine(EngineError::InvalidConfig(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn parse_monitor(s: &str) -> Result<MonitorKind, String> {
    MonitorKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| {
            let names: Vec<_> = MonitorKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown monitor {s:?}, expected one of {}", names.join(", "))
        })
}

fn merge_config(cfg: SolverConfig, path: &PathBuf) -> Result<SolverConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
        path: path.clone(),
        source: e,
    })?;
    let file: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(over) = file else {
        return Err(CliError::Usage(format!("{}: expected a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(&cfg).expect("config serializes");
    let obj = merged.as_object_mut().expect("config is an object");
    for (k, v) in over {
        obj.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Oracle spectrum: closed form for diagonal generators, dense Jacobi
/// otherwise.
pub fn oracle_spectrum(source: &MatrixSource, a: &SparseSymMatrix) -> Result<Spectrum, LinalgError> {
    match source.generator().and_then(|g| g.closed_form_spectrum()) {
        Some(s) => Ok(s),
        None => a.dense_spectrum(),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing the summary to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code)
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::SaddleEscape(a) => cmd_saddle(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Spectrum(a) => cmd_spectrum(&a, out),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let base = SolverConfig {
        seed: args.seed,
        trace_every: args.trace_every,
        stop: if args.stop_on_evec {
            StopRule::EigenvectorError
        } else {
            StopRule::RelativeResidual
        },
        monitors: args.monitors.clone(),
        ..SolverConfig::default()
    };
    let cfg = args.solver.solver_config(base)?;
    let source = &args.solver.matrix;
    let a = source.load()?;
    let needs_oracle =
        args.oracle || cfg.stop == StopRule::EigenvectorError || !cfg.monitors.is_empty();
    let oracle = needs_oracle.then(|| oracle_spectrum(source, &a)).transpose()?;
    if let Some(s) = &oracle {
        if cfg.p > s.q() {
            writeln!(
                err,
                "warning: p = {} exceeds the {} negative eigenvalues; trailing columns tend to zero",
                cfg.p,
                s.q()
            )?;
        }
    }
    let start = Instant::now();
    let bounds = DomainBounds::for_matrix(&a, cfg.p)?;
    let x0 = init_random(a.n(), &bounds, cfg.seed)?;
    let (solution, reports) = match &oracle {
        Some(s) if !cfg.monitors.is_empty() => {
            let run = run_monitored(&a, &cfg, x0, s, &MonitorOptions::default())?;
            (run.solution, run.reports)
        }
        _ => (solve_observed(&a, &cfg, x0, oracle.as_ref(), &mut [])?, Vec::new()),
    };
    let wall_time = start.elapsed().as_secs_f64();

    writeln!(out, "matrix       {source} (n = {}, nnz = {})", a.n(), a.nnz())?;
    let how = match cfg.alpha {
        Stepsize::Auto => format!("auto, rho = {:.6}", bounds.rho),
        Stepsize::Fixed(_) => "fixed".to_string(),
    };
    writeln!(out, "alpha        {:.6e} ({how})", solution.alpha)?;
    writeln!(
        out,
        "outcome      {} after {} iterations",
        outcome_name(solution.outcome),
        solution.iterations()
    )?;
    writeln!(out, "stop value   {:.3e} (tol {:.1e})", solution.stop_value, cfg.tol)?;
    writeln!(out, "eigenvalue estimates -|x_i|^2:")?;
    for (i, l) in solution.eigenvalue_estimates().iter().enumerate() {
        match &oracle {
            Some(s) => writeln!(out, "  {:>3}  {l:>20.12}  oracle {:>20.12}", i + 1, s.eigenvalue(i))?,
            None => writeln!(out, "  {:>3}  {l:>20.12}", i + 1)?,
        }
    }
    if let Some(s) = &oracle {
        if solution.state.x.is_finite() {
            let ev = e_vec(&solution.state.x, s).ok();
            let eo = e_obj(&a, &solution.state.x, s).ok();
            writeln!(out, "e_vec        {}", fmt_opt(ev))?;
            writeln!(out, "e_obj        {}", fmt_opt(eo))?;
        }
    }
    if solution.outcome != crate::engine::Outcome::Converged {
        let norms: Vec<String> = solution
            .state
            .x
            .col_norms()
            .iter()
            .map(|v| format!("{v:.4e}"))
            .collect();
        writeln!(out, "column norms [{}]", norms.join(", "))?;
        writeln!(
            out,
            "converged leading columns {} of {}",
            solution.state.converged_columns, cfg.p
        )?;
        if let Some(t) = solution.diverged_at {
            writeln!(out, "non-finite entries at iteration {t}")?;
        }
    }
    write_reports(out, &reports)?;
    if let Some(path) = &args.trace {
        write_trace_csv(&solution.trace, cfg.p, path)?;
    }
    if let Some(path) = &args.json {
        let archive = RunArchive {
            config: cfg.clone(),
            matrix_source: source.to_string(),
            alpha: solution.alpha,
            iterations: solution.iterations(),
            outcome: solution.outcome,
            eigenvalue_estimates: solution.eigenvalue_estimates(),
            trace: solution.trace.clone(),
            monitors: reports.clone(),
            wall_time,
        };
        write_json(&archive, path)?;
    }
    let failed = reports.iter().any(|r| r.status == MonitorStatus::Fail);
    let code = solution.outcome.exit_code();
    Ok(if code == EXIT_OK && failed { EXIT_FAILURE } else { code })
}

fn outcome_name(o: crate::engine::Outcome) -> String {
    serde_json::to_value(o)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn status_name(s: MonitorStatus) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn write_reports(out: &mut dyn Write, reports: &[MonitorReport]) -> std::io::Result<()> {
    for r in reports {
        writeln!(
            out,
            "  {:<22} {:<8} checks {:>9}  worst margin {:>10}  violations {}  warnings {}",
            r.monitor,
            status_name(r.status),
            r.checks,
            fmt_opt(r.worst_margin),
            r.violation_count,
            r.warning_count
        )?;
        for (lemma, s) in &r.lemmas {
            writeln!(
                out,
                "    {:<28} {:<4} checks {:>9}  worst margin {:>10}  violations {}",
                lemma,
                if s.violations == 0 { "pass" } else { "FAIL" },
                s.checks,
                fmt_opt(Some(s.worst_margin)),
                s.violations
            )?;
        }
        if let Some(why) = &r.refusal {
            writeln!(out, "    refused: {why}")?;
        }
        for v in r.violations.iter().take(5) {
            writeln!(
                out,
                "    violation {} t = {} col {:?}: observed {:e} vs bound {:e}",
                v.lemma, v.iteration, v.column, v.observed, v.bound
            )?;
        }
        for n in r.notes.iter().take(8) {
            writeln!(out, "    note: {n}")?;
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let solver = args.solver.solver_config(SolverConfig::default())?;
    if args.stride == 0 {
        return Err(CliError::Usage("stride must be at least 1".into()));
    }
    let source = &args.solver.matrix;
    let a = source.load()?;
    let spectrum = oracle_spectrum(source, &a)?;
    let mut cfg = VerifyConfig::new(solver.p);
    cfg.seeds = args.seeds.clone();
    cfg.alpha = solver.alpha;
    cfg.tol = solver.tol;
    cfg.max_iter = solver.max_iter;
    cfg.saddle_trials = args.trials;
    cfg.monitor_opts.stride = args.stride;
    cfg.monitor_opts.epsilon = args.epsilon;
    let report = match &args.replay {
        Some(path) => {
            let trace = read_trace_csv(path)?;
            verify_replay(&a, &spectrum, &source.to_string(), args.suite, &cfg, &trace)?
        }
        None => verify(&a, &spectrum, &source.to_string(), args.suite, &cfg)?,
    };
    writeln!(out, "matrix {source} (n = {}, q = {}), p = {}", a.n(), spectrum.q(), report.p)?;
    for s in &report.suites {
        writeln!(
            out,
            "{:<14} {:<8} worst margin {}",
            s.suite.name(),
            status_name(s.status),
            fmt_opt(s.worst_margin())
        )?;
        write_reports(out, &s.reports)?;
    }
    if let Some(path) = &args.json {
        write_json(&report, path)?;
    }
    Ok(report.exit_code())
}

fn cmd_saddle(args: &SaddleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let solver = args.solver.solver_config(SolverConfig::default())?;
    let source = &args.solver.matrix;
    let a = source.load()?;
    let spectrum = oracle_spectrum(source, &a)?;
    let mut cfg = SaddleConfig::new(solver.p, args.trials);
    cfg.delta = args.delta;
    cfg.seed = args.seed;
    cfg.tol = solver.tol;
    cfg.max_iter = solver.max_iter;
    cfg.alpha = solver.alpha;
    cfg.neighborhoods = args.neighborhoods;
    cfg.monitor_opts.stride = args.stride;
    let summary = saddle_escape(&a, &spectrum, &cfg)?;
    writeln!(out, "escaped {}/{}", summary.successes, summary.total)?;
    for t in &summary.trials {
        writeln!(
            out,
            "  trial {:>4}  seed {:>6}  saddle {:<24} {:<10} iterations {:>9}  e_vec {:.3e}  plateau {}",
            t.index,
            t.seed,
            t.saddle,
            outcome_name(t.outcome),
            t.iterations,
            t.final_e_vec,
            if t.plateau.holds { "yes" } else { "no" }
        )?;
        if let Some(r) = &t.neighborhoods {
            write_reports(out, std::slice::from_ref(r))?;
        }
    }
    if let Some(path) = &args.json {
        write_json(&summary, path)?;
    }
    Ok(if summary.all_escaped() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_gen(args: &GenArgs, mut out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = if args.spec.starts_with("gen:") {
        args.spec.clone()
    } else {
        format!("gen:{}", args.spec)
    };
    let source: MatrixSource = spec.parse().map_err(|e: IoError| CliError::Usage(e.to_string()))?;
    if source.generator().is_none() {
        return Err(CliError::Usage(format!("{spec:?} is not a generator")));
    }
    let a = source.load()?;
    match &args.out {
        Some(path) => {
            write_matrix_market(&a, path)?;
            writeln!(out, "wrote {} (n = {}, nnz = {})", path.display(), a.n(), a.nnz())?;
        }
        None => write_matrix_market_to(&a, &mut out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.p == 0 {
        return Err(CliError::Usage("p must be at least 1".into()));
    }
    let a = args.matrix.load()?;
    let s = oracle_spectrum(&args.matrix, &a)?;
    let bounds = DomainBounds::for_matrix(&a, args.p)?;
    writeln!(out, "matrix {} (n = {}, nnz = {})", args.matrix, a.n(), a.nnz())?;
    writeln!(out, "q      {}", s.q())?;
    writeln!(out, "rho    {} (|A|_2 = {})", format_f64(bounds.rho), format_f64(s.spectral_norm()))?;
    for (i, r) in bounds.radii.iter().enumerate() {
        writeln!(out, "R_{:<4} {}", i + 1, format_f64(*r))?;
    }
    writeln!(out, "alpha  {} (auto, p = {})", format_f64(auto_stepsize(&bounds)), args.p)?;
    let vectors = args.vectors || a.n() <= 16;
    for i in 0..args.top.min(s.n()) {
        write!(out, "{:>4}  {:>22}", i + 1, format_f64(s.eigenvalue(i)))?;
        if vectors {
            let v: Vec<String> = s.eigenvector(i).iter().map(|x| format_f64(*x)).collect();
            write!(out, "  [{}]", v.join(", "))?;
        }
        writeln!(out)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            std::iter::once("triofm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(&["solve"]).0, EXIT_USAGE);
        assert_eq!(run(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "gen:diag=-1,1", "--alpha", "0.1", "--auto"]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "gen:diag=-1,1", "--tol", "-1"]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "gen:nope=1"]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "gen:diag=-1,1", "--monitor", "nope"]).0, EXIT_USAGE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn spectrum_prints_ladder() {
        let (code, out, _) = run(&["spectrum", "gen:diag=-4,-2,-1,3", "--top", "2", "-p", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("q      3"), "{out}");
        assert!(out.contains("R_1"));
        assert!(out.contains("R_2"));
        assert!(!out.contains("R_3"));
        assert_eq!(out.lines().filter(|l| l.trim_start().starts_with(['1', '2'])).count(), 2);
    }

    #[test]
    fn max_iter_one_exits_2() {
        let (code, out, _) = run(&["solve", "gen:diag=-4,-2,-1,3", "-p", "2", "--max-iter", "1"]);
        assert_eq!(code, 2);
        assert!(out.contains("MAX_ITER"));
        assert!(out.contains("column norms"));
    }

    #[test]
    fn fixed_huge_stepsize_exits_3() {
        let (code, out, _) = run(&["solve", "gen:diag=-4,-2,-1,3", "--alpha", "10"]);
        assert_eq!(code, 3, "{out}");
        assert!(out.contains("DIVERGED"));
    }
}
