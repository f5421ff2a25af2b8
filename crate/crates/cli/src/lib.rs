//! Experiment runner for the decoupling library: writes the data series of
//! the Zeno, trajectory, tail and pulse-inversion experiments as CSV files and
//! runs the verification suite.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_fixtures, cmd_pulse_inversion, cmd_tail, cmd_trajectories, cmd_zeno, Outcome};
pub use config::ExperimentConfig;
pub use csv::CsvSeries;
pub use error::CliError;
pub use verify::{cmd_verify, Report, VerifyOptions};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "ZENO_DD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "zeno-dd", version, about = "Random and averaged dynamical decoupling experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zeno product errors against their bounds.
    Zeno(Flags),
    /// Monte-Carlo means of trajectory statistics against their bounds.
    Trajectories(Flags),
    /// Empirical tail probabilities of a statistic.
    Tail(Flags),
    /// Pulse-inverted distances to the identity and to the closest unitary.
    PulseInversion(Flags),
    /// Run every identity and bound check; exits 1 on any failure.
    Verify {
        #[command(flatten)]
        flags: Flags,
        /// Perturb the decoupling projector (test hook for the failure path).
        #[arg(long, hide = true)]
        corrupt_projector: bool,
    },
    /// Dump the reference Hamiltonian, projector, sequences and statistics.
    Fixtures(Flags),
}

/// Flags shared by every command; each overrides the config-file key of the
/// same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// reference | random:SEED | file:PATH
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub d1: Option<String>,
    #[arg(long)]
    pub d2: Option<String>,
    /// `T = t‖Ĥ‖∞`.
    #[arg(long = "big-t", value_name = "T")]
    pub big_t: Option<String>,
    /// pauli | pauli-atypical | file:PATH
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long = "n-min")]
    pub n_min: Option<String>,
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    #[arg(long = "n-points")]
    pub n_points: Option<String>,
    /// pure-0 | max-mixed | PATH
    #[arg(long)]
    pub sigma1: Option<String>,
    /// pure-0 | max-mixed | PATH
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long)]
    pub threshold: Option<String>,
    /// Comma-separated statistic names.
    #[arg(long)]
    pub statistics: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
    /// Worker threads (falls back to ZENO_DD_THREADS).
    #[arg(long)]
    pub threads: Option<String>,
}

impl Flags {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if cfg.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                cfg.set("threads", &v)?;
            }
        }
        let pairs = [
            ("model", &self.model),
            ("d1", &self.d1),
            ("d2", &self.d2),
            ("big-t", &self.big_t),
            ("set", &self.set),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("n-min", &self.n_min),
            ("n-max", &self.n_max),
            ("n-points", &self.n_points),
            ("sigma1", &self.sigma1),
            ("sigma2", &self.sigma2),
            ("threshold", &self.threshold),
            ("statistics", &self.statistics),
            ("out", &self.out),
            ("threads", &self.threads),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs `f` on a pool with the configured thread count. Results do not
/// depend on the count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_all(series: &[CsvSeries], out: &mut dyn Write) -> Result<(), CliError> {
    for s in series {
        s.write()?;
        writeln!(out, "wrote {}", s.path.display())?;
    }
    Ok(())
}

fn run_series(
    flags: &Flags,
    out: &mut dyn Write,
    f: fn(&ExperimentConfig) -> Result<Outcome, CliError>,
) -> Result<(), CliError> {
    let cfg = flags.resolve()?;
    let outcome = with_threads(cfg.threads, || f(&cfg))??;
    write_all(&outcome.series, out)?;
    outcome.into_result().map(|_| ())
}

/// Executes a parsed command, writing progress to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Zeno(flags) => run_series(&flags, out, cmd_zeno),
        Command::Trajectories(flags) => run_series(&flags, out, cmd_trajectories),
        Command::Tail(flags) => run_series(&flags, out, cmd_tail),
        Command::PulseInversion(flags) => run_series(&flags, out, cmd_pulse_inversion),
        Command::Verify { flags, corrupt_projector } => {
            let cfg = flags.resolve()?;
            let opts = VerifyOptions { corrupt_projector, ..VerifyOptions::default() };
            let report = with_threads(cfg.threads, || cmd_verify(&cfg, opts))??;
            write!(out, "{}", report.render())?;
            if report.passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
                Err(CliError::CheckFailed(names.join(", ")))
            }
        }
        Command::Fixtures(flags) => {
            let cfg = flags.resolve()?;
            std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
            for fx in cmd_fixtures()? {
                let path = cfg.out.join(fx.name);
                std::fs::write(&path, fx.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                writeln!(out, "wrote {}", path.display())?;
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
