//! Command-line harness: `table1`, `simulate` and `rate-sweep`.
//!
//! Every command writes its table (CSV or JSON) to `--out` or stdout and a
//! short human-readable report to stderr. Exit status: 0 when all checks
//! pass, 1 when a check fails, 2 for usage errors, 3 for IO errors.

mod commands;
mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use xchannel::config::{CANCELLATION_TOL, DECODE_TOL, MAX_CONDITION};
use xchannel::{CsitPattern, Tolerances, BLOCK_SLOTS};

pub use commands::{cmd_rate_sweep, cmd_simulate, cmd_table1, SLOPE_RANGE};
pub use format::fmt_num;

#[derive(Parser, Debug)]
#[command(name = "xchannel", version, about = "Alternating-CSIT X-channel experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the 18 candidate patterns and compare with the reference table
    Table1 {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run encode, transmit, combine and solve for many seeded trials
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Receiver noise power
        #[arg(long, default_value_t = 0.0)]
        noise_power: f64,
        /// Accept a non-synergistic pattern and report why it fails
        #[arg(long)]
        allow_dissociative: bool,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Average sum rate over a power grid and fit the slope against log2(P)
    RateSweep {
        #[command(flatten)]
        run: RunArgs,
        /// Smallest power exponent (P = 2^exp)
        #[arg(long, default_value_t = 20.0)]
        power_min_exp: f64,
        /// Largest power exponent
        #[arg(long, default_value_t = 40.0)]
        power_max_exp: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 5)]
        power_points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// CSIT pattern, e.g. DD,ND,PN,NN (first letter: receiver 1)
    #[arg(long)]
    pub pattern: CsitPattern,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ToleranceArgs {
    /// Relative residual below which a receiver counts as decoded
    #[arg(long, default_value_t = DECODE_TOL)]
    pub decode_tol: f64,
    /// Largest relative unintended coefficient after combining
    #[arg(long, default_value_t = CANCELLATION_TOL)]
    pub cancellation_tol: f64,
    /// Condition number above which a system is treated as singular
    #[arg(long, default_value_t = MAX_CONDITION)]
    pub max_condition: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Table1,
    Simulate,
    RateSweep,
}

/// Validated settings for one command.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub pattern: Option<CsitPattern>,
    pub seed: u64,
    pub trials: u64,
    pub noise_power: f64,
    pub power_min_exp: f64,
    pub power_max_exp: f64,
    pub power_points: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub allow_dissociative: bool,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    fn base(command: CommandKind, output: OutputArgs) -> Self {
        Self {
            command,
            pattern: None,
            seed: 1,
            trials: 1000,
            noise_power: 0.0,
            power_min_exp: 20.0,
            power_max_exp: 40.0,
            power_points: 5,
            format: output.format,
            out: output.out,
            allow_dissociative: false,
            tolerances: Tolerances::default(),
        }
    }

    pub fn table1(format: Format) -> Self {
        Self::base(CommandKind::Table1, OutputArgs { format, out: None })
    }

    pub fn simulate(pattern: CsitPattern, seed: u64, trials: u64, noise_power: f64, format: Format) -> Self {
        Self {
            pattern: Some(pattern),
            seed,
            trials,
            noise_power,
            ..Self::base(CommandKind::Simulate, OutputArgs { format, out: None })
        }
    }

    pub fn rate_sweep(pattern: CsitPattern, seed: u64, trials: u64, format: Format) -> Self {
        Self {
            pattern: Some(pattern),
            seed,
            trials,
            ..Self::base(CommandKind::RateSweep, OutputArgs { format, out: None })
        }
    }

    pub fn from_command(command: Command) -> Result<Self, CliError> {
        let config = match command {
            Command::Table1 { output } => Self::base(CommandKind::Table1, output),
            Command::Simulate {
                run,
                noise_power,
                allow_dissociative,
                tolerances,
                output,
            } => Self {
                pattern: Some(run.pattern),
                seed: run.seed,
                trials: run.trials,
                noise_power,
                allow_dissociative,
                tolerances: Tolerances {
                    decode: tolerances.decode_tol,
                    cancellation: tolerances.cancellation_tol,
                    max_condition: tolerances.max_condition,
                },
                ..Self::base(CommandKind::Simulate, output)
            },
            Command::RateSweep {
                run,
                power_min_exp,
                power_max_exp,
                power_points,
                output,
            } => Self {
                pattern: Some(run.pattern),
                seed: run.seed,
                trials: run.trials,
                power_min_exp,
                power_max_exp,
                power_points,
                ..Self::base(CommandKind::RateSweep, output)
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if let Some(p) = &self.pattern {
            if p.len() != BLOCK_SLOTS {
                return usage(format!("pattern must have {BLOCK_SLOTS} slots, got {}", p.len()));
            }
        }
        if self.command != CommandKind::Table1 && self.trials == 0 {
            return usage("--trials must be at least 1".into());
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return usage("--noise-power must be a nonnegative number".into());
        }
        if self.command == CommandKind::RateSweep {
            if self.power_points < 2 {
                return usage(format!(
                    "need at least 2 power points to fit a slope, got {}",
                    self.power_points
                ));
            }
            if self.power_min_exp.partial_cmp(&self.power_max_exp) != Some(std::cmp::Ordering::Less) {
                return usage("--power-min-exp must be below --power-max-exp".into());
            }
        }
        let t = &self.tolerances;
        if !(t.decode > 0.0 && t.cancellation > 0.0 && t.max_condition >= 1.0) {
            return usage("tolerances must be positive (max condition at least 1)".into());
        }
        Ok(())
    }

    pub(crate) fn pattern(&self) -> &CsitPattern {
        self.pattern.as_ref().expect("pattern required for this command")
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Run a validated config. `data` receives the table unless the config names
/// an output file; `report` receives the summary lines. Returns whether
/// every check passed.
pub fn execute(config: &ExperimentConfig, data: &mut dyn Write, report: &mut dyn Write) -> Result<bool, CliError> {
    let run = |sink: &mut dyn Write, report: &mut dyn Write| match config.command {
        CommandKind::Table1 => cmd_table1(config, sink, report),
        CommandKind::Simulate => cmd_simulate(config, sink, report),
        CommandKind::RateSweep => cmd_rate_sweep(config, sink, report),
    };
    match &config.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            let ok = run(&mut file, report)?;
            file.flush()?;
            Ok(ok)
        }
        None => run(data, report),
    }
}

/// Parse arguments, run, and map the outcome to an exit status.
pub fn run<I, T>(args: I, data: &mut dyn Write, report: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(report, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = ExperimentConfig::from_command(cli.command).and_then(|c| execute(&c, data, report));
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(report, "error: {e}");
            e.exit_code()
        }
    }
}
