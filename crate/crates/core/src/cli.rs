//! The `sysid` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or numerical error,
//! 3 failed assumption check. JSON results go to stdout, diagnostics to
//! stderr.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    bc_estimate, default_horizon, ho_kalman_estimate, iv_estimate, ls_estimate, Estimate, Method,
};
use crate::experiment::{
    format_float,
    builtin_config, emit_config_echo, emit_csv, emit_summary_csv, emit_svg_plot, run_experiment, BuiltinConfig,
    ExperimentConfig,
};
use crate::numerics::{Matrix, RngStream};
use crate::system::{check_assumptions, simulate_with, LinearSystem, MatrixLiteral, SimulationOptions, Trajectory};
use crate::theory::{bounds_report, BoundConfig, DEFAULT_DELTA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sysid", version, about = "Identify linear systems from noisy state observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate (A, B) from a trajectory CSV.
    Estimate(EstimateArgs),
    /// Report which identifiability assumptions a system satisfies.
    Check(CheckArgs),
    /// Evaluate the finite-sample constants, thresholds and error bounds.
    Bounds(BoundsArgs),
    /// Run a Monte-Carlo experiment and write records, summary and plot.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long = "T")]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the process and observation noise columns.
    #[arg(long)]
    emit_noise: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Matrix literal file with the observation-noise covariance (bc only).
    #[arg(long)]
    sigma_eta_hat: Option<PathBuf>,
    /// Markov-parameter horizon (hokalman only).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    eps_eta: f64,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    eps_eta: Option<f64>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    config: Option<PathBuf>,
    /// paper-nonautonomous, paper-autonomous or scalar-benchmark.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "ls" | "iv" | "bc" | "hokalman" => s.parse().map_err(|e: Error| e.to_string()),
        _ => Err(format!("expected one of ls, iv, bc, hokalman; got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.name());
            EXIT_RUNTIME
        }
        Err(Failure::CheckFailed) => EXIT_CHECK_FAILED,
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    main_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Simulate(a) => simulate_cmd(a, stdout),
        Command::Estimate(a) => estimate_cmd(a, stdout),
        Command::Check(a) => check_cmd(a, stdout, stderr),
        Command::Bounds(a) => bounds_cmd(a, stdout),
        Command::Experiment(a) => experiment_cmd(a, stdout, stderr),
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

fn simulate_cmd(a: SimulateArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let sys: LinearSystem = read_json(&a.system)?;
    let opts = SimulationOptions { inputs: None, record_noise: a.emit_noise };
    let traj = simulate_with(&sys, a.horizon, &RngStream::new(a.seed, "", 0), &opts)?;
    write_trajectory_csv(&traj, BufWriter::new(File::create(&a.out)?))?;
    print_json(
        stdout,
        &serde_json::json!({ "out": a.out, "T": a.horizon, "n": traj.state_dim(), "m": traj.input_dim(), "seed": a.seed }),
    )?;
    Ok(())
}

fn estimate_cmd(a: EstimateArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    if a.method == Method::BiasCompensation && a.sigma_eta_hat.is_none() {
        return Err(Failure::Usage("--method bc requires --sigma-eta-hat".into()));
    }
    if a.method != Method::BiasCompensation && a.sigma_eta_hat.is_some() {
        return Err(Failure::Usage("--sigma-eta-hat only applies to --method bc".into()));
    }
    if a.method != Method::HoKalman && a.k.is_some() {
        return Err(Failure::Usage("--k only applies to --method hokalman".into()));
    }
    let traj = read_trajectory_csv(File::open(&a.traj)?)?;
    let est: Estimate = match a.method {
        Method::LeastSquares => ls_estimate(&traj)?,
        Method::InstrumentalVariable => iv_estimate(&traj)?,
        Method::BiasCompensation => {
            let path = a.sigma_eta_hat.as_deref().expect("checked above");
            let lit: MatrixLiteral = read_json(path)?;
            bc_estimate(&traj, &lit.to_matrix()?)?
        }
        Method::HoKalman => ho_kalman_estimate(&traj, a.k.unwrap_or_else(|| default_horizon(traj.state_dim())))?,
    };
    let mut f = BufWriter::new(File::create(&a.out)?);
    print_json(&mut f, &est)?;
    f.flush().map_err(Error::from)?;
    print_json(stdout, &est)?;
    Ok(())
}

fn check_cmd(a: CheckArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let sys: LinearSystem = read_json(&a.system)?;
    let report = check_assumptions(&sys, a.eps_eta)?;
    print_json(stdout, &report)?;
    if report.all_ok() {
        Ok(())
    } else {
        let _ = writeln!(
            stderr,
            "assumption check failed: iv_ok = {}, bc_ok = {}",
            report.verdict.iv_ok, report.verdict.bc_ok
        );
        Err(Failure::CheckFailed)
    }
}

fn bounds_cmd(a: BoundsArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let sys: LinearSystem = read_json(&a.system)?;
    let cfg = BoundConfig { delta: a.delta, c1: a.c1, c2: a.c2, ..BoundConfig::default() };
    let report = bounds_report(&sys, &cfg, a.horizon, a.eps_eta)?;
    print_json(stdout, &report)?;
    Ok(())
}

fn experiment_cmd(a: ExperimentArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let cfg: ExperimentConfig = match (&a.config, &a.builtin) {
        (Some(path), None) => read_json(path)?,
        (None, Some(name)) => builtin_config(name.parse::<BuiltinConfig>().map_err(|e| Failure::Usage(e.to_string()))?),
        _ => return Err(Failure::Usage("pass exactly one of --config and --builtin".into())),
    };
    let res = run_experiment(&cfg)?;
    fs::create_dir_all(&a.out_dir).map_err(Error::from)?;
    let dir = &a.out_dir;
    emit_csv(&res, dir.join("records.csv"))?;
    emit_summary_csv(&res, dir.join("summary.csv"))?;
    emit_config_echo(&res, dir.join("config_echo.json"))?;
    let plotted = match emit_svg_plot(&res, dir.join("plot.svg")) {
        Ok(()) => true,
        Err(Error::EmptyPlot) => {
            let _ = writeln!(stderr, "warning: every trial failed, plot.svg not written");
            false
        }
        Err(e) => return Err(e.into()),
    };
    let failed = res.records.iter().filter(|r| r.failed).count();
    print_json(
        stdout,
        &serde_json::json!({
            "out_dir": dir,
            "records": res.records.len(),
            "failed": failed,
            "plot": plotted,
            "summary": res.summary,
        }),
    )?;
    Ok(())
}

fn push_columns(header: &mut Vec<String>, prefix: &str, count: usize) {
    header.extend((0..count).map(|i| format!("{prefix}_{i}")));
}

/// Writes `t, x_*, xhat_*, u_*` (plus `w_*, eta_*` when the noise was
/// recorded), one row per `t = 0..=T`. Inputs and process noise are empty
/// on the final row.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let n = traj.state_dim();
    let m = traj.input_dim();
    let horizon = traj.horizon();
    let mut header = vec!["t".to_string()];
    push_columns(&mut header, "x", n);
    push_columns(&mut header, "xhat", n);
    push_columns(&mut header, "u", m);
    if traj.noise.is_some() {
        push_columns(&mut header, "w", n);
        push_columns(&mut header, "eta", n);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for t in 0..=horizon {
        let mut row = vec![t.to_string()];
        let col = |m: &Matrix, t: usize, present: bool| -> Vec<String> {
            (0..m.nrows()).map(|i| if present { format_float(m[(i, t)]) } else { String::new() }).collect()
        };
        row.extend(col(&traj.states, t, true));
        row.extend(col(&traj.observations, t, true));
        row.extend(col(&traj.inputs, t.min(horizon - 1), t < horizon));
        if let Some(noise) = &traj.noise {
            row.extend(col(&noise.process, t.min(horizon - 1), t < horizon));
            row.extend(col(&noise.observation, t, true));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`]. Noise columns,
/// if present, are ignored.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let indices = |prefix: &str| -> Vec<usize> {
        let mut cols: Vec<(usize, usize)> = header
            .iter()
            .enumerate()
            .filter_map(|(j, h)| h.strip_prefix(prefix)?.strip_prefix('_')?.parse().ok().map(|i: usize| (i, j)))
            .collect();
        cols.sort();
        cols.into_iter().map(|(_, j)| j).collect()
    };
    let (xs, xhats, us) = (indices("x"), indices("xhat"), indices("u"));
    if header.get(0) != Some("t") || xhats.is_empty() || xs.len() != xhats.len() {
        return Err(Error::InvalidInput("trajectory CSV needs columns t, x_i and xhat_i".into()));
    }
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(Error::InvalidInput("trajectory CSV needs at least two rows".into()));
    }
    let horizon = rows.len() - 1;
    let cell = |r: usize, j: usize| -> Result<f64> {
        rows[r][j]
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("row {}, column {}: not a number", r + 1, &header[j])))
    };
    let fill = |cols: &[usize], count: usize| -> Result<Matrix> {
        let mut m = Matrix::zeros(cols.len(), count);
        for t in 0..count {
            for (i, &j) in cols.iter().enumerate() {
                m[(i, t)] = cell(t, j)?;
            }
        }
        Ok(m)
    };
    let states = fill(&xs, horizon + 1)?;
    let observations = fill(&xhats, horizon + 1)?;
    let inputs = fill(&us, horizon)?;
    crate::numerics::ensure_finite(&observations)?;
    Trajectory::from_parts(states, observations, inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("sysid").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["check", "--system", "s.json", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["estimate", "--method", "xx", "--traj", "a", "--out", "b"]).0, EXIT_USAGE);
        assert_eq!(run(&["experiment", "--out-dir", "d"]).0, EXIT_USAGE);
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn bc_without_sigma_is_usage_error() {
        let (code, _, err) = run(&["estimate", "--method", "bc", "--traj", "missing.csv", "--out", "e.json"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--sigma-eta-hat"));
    }

    #[test]
    fn missing_file_is_runtime_error() {
        let (code, out, err) = run(&["check", "--system", "/nonexistent/sys.json"]);
        assert_eq!(code, EXIT_RUNTIME);
        assert!(out.is_empty());
        assert!(err.starts_with("error[io]"), "{err}");
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let sys = LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        let opts = SimulationOptions { inputs: None, record_noise: true };
        let traj = simulate_with(&sys, 20, &RngStream::new(3, "", 0), &opts).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x_0,xhat_0,u_0,w_0,eta_0\n"));
        assert_eq!(text.lines().count(), 22);
        let back = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(back.observations, traj.observations);
        assert_eq!(back.states, traj.states);
        assert_eq!(back.inputs, traj.inputs);
    }
}
