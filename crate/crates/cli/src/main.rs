mod commands;
mod config;
mod demo;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;
use crate::error::CliError;

const AFTER_HELP: &str = "\
Exit status: 0 success, 2 usage error, 3 data error, 4 numeric-validity error \
(Nyquist or Bedrosian violation).

Environment: POWERTRIAD_SEED is reserved for future noise generators and is \
currently ignored.";

#[derive(Parser, Debug)]
#[command(name = "powertriad", version, about = "Hermitian/complementary power decomposition toolkit", after_help = AFTER_HELP)]
struct Cli {
    /// key = value config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic waveform CSV (`t,v[,i]`).
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Full time-domain decomposition of a `t,v,i` CSV.
    Analyze(AnalyzeArgs),
    /// Per-frequency power triangles and the broadband Pythagoras gap.
    Spectrum(SpectrumArgs),
    /// Block-streaming meter over a CSV or raw sample file.
    Meter(MeterArgs),
    /// Canned reproductions with expected values.
    Demo {
        #[command(subcommand)]
        name: DemoName,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Sample rate in Hz.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Fundamental in rad/s.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Record length in fundamental periods.
    #[arg(long, conflicts_with = "samples")]
    pub periods: Option<f64>,
    /// Record length in samples.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum GenerateKind {
    /// `V·cos(ω₀t + θ)`, optionally with a current `I·cos(ω₀t + φ)`.
    Sinusoid {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "v")]
        v: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "i")]
        i: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Sum of harmonics given as `index,amplitude,phase`.
    Harmonic {
        #[command(flatten)]
        grid: GridArgs,
        /// Voltage term `m,A_m,θ_m` (repeatable).
        #[arg(long = "term", required = true)]
        terms: Vec<String>,
        /// Current term `m,B_m,φ_m` (repeatable).
        #[arg(long = "iterm")]
        iterms: Vec<String>,
    },
    /// `V(1 + d·cos ω_a t)·cos(ω₀t + θ + β·sin ω_p t)`.
    Modulated {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "v")]
        v: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        am_depth: Option<f64>,
        #[arg(long)]
        am_omega: Option<f64>,
        #[arg(long)]
        pm_index: Option<f64>,
        #[arg(long)]
        pm_omega: Option<f64>,
        /// Optional unmodulated current amplitude.
        #[arg(long = "i")]
        i: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum HilbertChoice {
    Spectral,
    Fir,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowChoice {
    Rectangular,
    Hamming,
    Blackman,
}

#[derive(Args, Debug)]
pub struct MeterArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input is interleaved little-endian f64 `v,i` pairs (needs --fs).
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub fs: Option<f64>,
    /// Start time of raw input in seconds.
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Known carrier in rad/s.
    #[arg(long, conflicts_with = "estimate_omega0")]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub estimate_omega0: bool,
    #[arg(long, value_enum)]
    pub hilbert: Option<HilbertChoice>,
    #[arg(long)]
    pub fir_taps: Option<usize>,
    #[arg(long, value_enum)]
    pub fir_window: Option<WindowChoice>,
    /// Write records as CSV instead of newline-delimited JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Subcommand, Debug)]
pub enum DemoName {
    /// Spinning power triangle for one power angle.
    PowerTriangle {
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Positive and negative instantaneous power.
    PosNeg {
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Product-rule Hilbert transform against the exact one.
    Bedrosian {
        /// Envelope frequency as a fraction of the carrier.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Per-frequency apparent powers do not add in quadrature.
    Czarnecki,
    /// Slowly varying impedance driven by a sinusoidal current.
    TheveninTv {
        #[arg(long)]
        ratio: Option<f64>,
    },
}

/// Flag-then-config resolution for one subcommand section.
pub struct Settings<'a> {
    config: &'a Config,
    section: &'static str,
}

impl<'a> Settings<'a> {
    pub fn value<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(self.section, key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Usage(format!("config value `{raw}` for `{key}` is not valid"))
            }),
        }
    }

    pub fn required<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.value(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }

    pub fn or<T: std::str::FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        Ok(self.value(key, flag)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, set: bool) -> Result<bool, CliError> {
        if set {
            return Ok(true);
        }
        Ok(self.value::<bool>(key, None)?.unwrap_or(false))
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        self.required(key, flag)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let section = match &cli.command {
        Command::Generate { .. } => "generate",
        Command::Analyze(_) => "analyze",
        Command::Spectrum(_) => "spectrum",
        Command::Meter(_) => "meter",
        Command::Demo { .. } => "demo",
    };
    let settings = Settings {
        config: &config,
        section,
    };
    match cli.command {
        Command::Generate { kind } => commands::generate(&settings, &cli.out_dir, kind),
        Command::Analyze(args) => commands::analyze(&settings, &cli.out_dir, args),
        Command::Spectrum(args) => commands::spectrum(&settings, &cli.out_dir, args),
        Command::Meter(args) => commands::meter(&settings, &cli.out_dir, args),
        Command::Demo { name } => demo::run(&settings, &cli.out_dir, name),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("powertriad: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
