use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use minstab_cli::{run, Command, ConfigError, RunReport, SuiteConfig, EXIT_CONFIG, EXIT_FAILURE, EXIT_PASS};

#[derive(Parser)]
#[command(name = "minstab", version, about = "Verification suites for the second variation of minimal submanifolds in CP x M and HP x M")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// JSON config file; omitted fields take the embedded defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config sample count
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Print the effective config and exit
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Agreement of the five formulas for Q on random complete frames
    VerifyIdentities,
    /// Sign of Q in the analysed regimes
    SignScan,
    /// Equality cases, quaternionic collapse and structure detection
    Classify,
    /// Jacobi spectra of closed geodesics in CP1 x S1 and CP1 x S^k
    GeodesicIndex,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Json,
    Csv,
}

fn load(cli: &Cli) -> Result<SuiteConfig, ConfigError> {
    let mut config = match &cli.config {
        Some(path) => SuiteConfig::from_path(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    config.validate()?;
    Ok(config)
}

fn emit(report: &RunReport, cli: &Cli) -> anyhow::Result<()> {
    let out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(out);
    match cli.format {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::VerifyIdentities => Command::VerifyIdentities,
        Sub::SignScan => Command::SignScan,
        Sub::Classify => Command::Classify,
        Sub::GeodesicIndex => Command::GeodesicIndex,
    };
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if cli.print_config {
        let text = serde_json::to_string_pretty(&config).expect("config serialises");
        // a closed pipe (e.g. `| head`) is not an error
        let _ = writeln!(io::stdout(), "{text}");
        return ExitCode::from(EXIT_PASS as u8);
    }
    let report = match run(command, &config) {
        Ok(r) => r,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = emit(&report, &cli) {
        log::error!("cannot write report: {e}");
        return ExitCode::from(EXIT_FAILURE as u8);
    }
    let code = if report.passed { EXIT_PASS } else { EXIT_FAILURE };
    ExitCode::from(code as u8)
}

