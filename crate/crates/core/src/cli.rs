//! Command-line front end for the `tlk` binary.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage error, 3 verification failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use crate::closed_form::{final_distribution, mean_photon_final, postselect_probability, thermal_distribution, wigner_closed};
use crate::error::Error;
use crate::model::{InteractionConfig, ThermalPointer, Truncation, DEFAULT_TAIL_EPS};
use crate::numeric::linspace;
use crate::sweep::{reproduce, sweep_theta, sweep_z, wigner_grid, Column, SweepResult};
use crate::verify::{run_checks, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "TLK_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tlk",
    version,
    about = "Postselected amplification of a thermal pointer via single-photon cross-Kerr coupling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of the published operating points (z, P, n_bar_f, R)
    Reproduce(OutputArgs),
    /// Dark-port success probability
    Prob {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Photon-number distribution before and after postselection
    Pnd {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        trunc: TruncArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conditional mean photon number and amplification ratio
    Mean {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Wigner function at a point, or a W(x, p) slice with --window/--points
    Wigner {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        p: f64,
        /// Half-width of the x range
        #[arg(long, requires = "points")]
        window: Option<f64>,
        #[arg(long, requires = "window")]
        points: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep over the pointer parameter z
    SweepZ {
        #[command(flatten)]
        phase: PhaseArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep over the phase-shifter angle theta
    SweepTheta {
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[command(flatten)]
        phase: PhaseArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check closed forms against the Fock and coherent-state oracles
    Verify {
        #[arg(long, default_value_t = VerifyOptions::default().samples)]
        samples: u64,
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt_closed_form: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct PhaseArgs {
    /// Cross-phase per photon in radians
    #[arg(long, allow_hyphen_values = true, required_unless_present = "phi0_2pi", conflicts_with = "phi0_2pi")]
    phi0: Option<f64>,
    /// Cross-phase per photon in units of 2π
    #[arg(long = "phi0-2pi", allow_hyphen_values = true)]
    phi0_2pi: Option<f64>,
    /// Phase-shifter angle in radians
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
}

impl PhaseArgs {
    fn phi0(&self) -> f64 {
        match (self.phi0, self.phi0_2pi) {
            (Some(v), _) => v,
            (None, Some(turns)) => 2.0 * std::f64::consts::PI * turns,
            (None, None) => unreachable!("clap enforces one of --phi0/--phi0-2pi"),
        }
    }

    fn config(&self) -> Result<InteractionConfig, Error> {
        InteractionConfig::new(self.phi0(), self.theta)
    }
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Thermal pointer parameter z in [0, 1)
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
    #[command(flatten)]
    phase: PhaseArgs,
}

impl PointArgs {
    fn pointer(&self) -> Result<ThermalPointer, Error> {
        ThermalPointer::new(self.z)
    }
}

#[derive(Debug, Args)]
struct TruncArgs {
    #[arg(long, conflicts_with = "tail_eps")]
    n_max: Option<usize>,
    #[arg(long)]
    tail_eps: Option<f64>,
}

impl TruncArgs {
    fn truncation(&self) -> Result<Truncation, Error> {
        match (self.n_max, self.tail_eps) {
            (Some(n), _) => Ok(Truncation::MaxLevel(n)),
            (None, Some(eps)) => Truncation::tail_eps(eps),
            (None, None) => Ok(Truncation::TailEps(DEFAULT_TAIL_EPS)),
        }
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Comma-separated grid values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["from", "to", "points"])]
    grid: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["to", "points"])]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["from", "points"])]
    to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"])]
    points: Option<usize>,
}

impl GridArgs {
    fn values(&self) -> Result<Vec<f64>, Error> {
        match (&self.grid, self.from, self.to, self.points) {
            (Some(g), ..) => Ok(g.clone()),
            (None, Some(a), Some(b), Some(n)) => Ok(linspace(a, b, n)),
            _ => Err(Error::invalid("give either --grid or --from/--to/--points")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Computation(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Computation(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Computation(format!("i/o error: {e}"))
    }
}

fn emit(text: &str, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_sweep(result: &SweepResult, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = match output.format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json(),
    };
    emit(&text, &output.out, stdout)
}

fn single_row(axis: &str, x: f64, cols: Vec<(&str, f64)>) -> Result<SweepResult, Error> {
    SweepResult::new(
        axis,
        vec![x],
        cols.into_iter()
            .map(|(name, v)| Column {
                name: name.into(),
                values: vec![Some(v)],
            })
            .collect(),
    )
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Reproduce(output) => emit_sweep(&reproduce()?, &output, stdout),
        Command::Prob { point, output } => {
            let p = postselect_probability(&point.pointer()?, &point.phase.config()?);
            emit_sweep(&single_row("z", point.z, vec![("P", p)])?, &output, stdout)
        }
        Command::Mean { point, output } => {
            let (nf, r) = mean_photon_final(&point.pointer()?, &point.phase.config()?)?;
            emit_sweep(
                &single_row("z", point.z, vec![("n_bar_f", nf), ("R", r)])?,
                &output,
                stdout,
            )
        }
        Command::Pnd { point, trunc, output } => {
            let pointer = point.pointer()?;
            let trunc = trunc.truncation()?;
            let thermal = thermal_distribution(&pointer, &trunc)?;
            let post = final_distribution(&pointer, &point.phase.config()?, &trunc)?;
            let levels = (0..=thermal.n_max()).map(|n| n as f64).collect();
            let result = SweepResult::new(
                "n",
                levels,
                vec![
                    Column {
                        name: "thermal".into(),
                        values: thermal.probs().iter().map(|v| Some(*v)).collect(),
                    },
                    Column {
                        name: "postselected".into(),
                        values: post.distribution.probs().iter().map(|v| Some(*v)).collect(),
                    },
                ],
            )?;
            emit_sweep(&result, &output, stdout)
        }
        Command::Wigner { point, x, p, window, points, output } => {
            let result = match (window, points) {
                (Some(window), Some(points)) => {
                    wigner_grid(point.z, point.phase.phi0(), point.phase.theta, window, points, p)?
                }
                _ => {
                    let w = wigner_closed(&point.pointer()?, &point.phase.config()?, x, p)?;
                    single_row("x", x, vec![("W", w)])?
                }
            };
            emit_sweep(&result, &output, stdout)
        }
        Command::SweepZ { phase, grid, output } => {
            let result = sweep_z(phase.phi0(), phase.theta, &grid.values()?)?;
            emit_sweep(&result, &output, stdout)
        }
        Command::SweepTheta { z, phase, grid, output } => {
            let result = sweep_theta(z, phase.phi0(), &grid.values()?)?;
            emit_sweep(&result, &output, stdout)
        }
        Command::Verify { samples, seed, corrupt_closed_form, out } => {
            let checks = run_checks(&VerifyOptions {
                samples,
                seed,
                corrupt_closed_form,
            })?;
            let mut report = String::new();
            for c in &checks {
                report.push_str(&c.to_string());
                report.push('\n');
            }
            let passed = checks.iter().filter(|c| c.passed()).count();
            report.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
            emit(&report, &out, stdout)?;
            if passed == checks.len() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => builder = builder.num_threads(n),
            _ => return Err(format!("{THREADS_ENV} must be an integer >= 1, got {raw:?}")),
        }
    }
    builder.build().map_err(|e| e.to_string())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut buffer = Vec::new();
    let status = pool.install(|| execute(cli.command, &mut buffer));
    if let Err(e) = stdout.write_all(&buffer) {
        let _ = writeln!(stderr, "error: i/o error: {e}");
        return EXIT_COMPUTATION;
    }
    match status {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Computation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_COMPUTATION
        }
        Err(Failure::Verification) => {
            let _ = writeln!(stderr, "verification failed");
            EXIT_VERIFY_FAILED
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
