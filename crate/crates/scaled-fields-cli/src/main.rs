use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scaled_fields_cli::commands::{self, CmdError, CmdOutput};
use scaled_fields_cli::config::RunConfig;
use scaled_fields_cli::output::Format;
use scaled_fields_cli::DEFAULT_SEED;

#[derive(Parser)]
#[command(
    name = "scaled-fields",
    version,
    about = "Scaled arithmetic, lifted integrals, and invariant suites over universe-tagged values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant suite; exit 0 iff all properties pass
    Verify(CommonArgs),
    /// Local and lifted integrals of the configured field, with error estimates
    Integrate(CommonArgs),
    /// Scaled covariant derivative of the configured field at a point
    Derivative(CommonArgs),
    /// Discretized scaled wave packet components and norm contributions
    Wavepacket(CommonArgs),
    /// Scaled-increment ratios rho(h) and the fitted convergence slope
    DuCheck(CommonArgs),
    /// Expansion-history table: theta, scale factor, scaled distance element
    Cosmo(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration (optional only for verify)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default: json for verify, csv otherwise)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Override the per-axis quadrature cell count
    #[arg(long)]
    cells: Option<usize>,
    /// Property-suite sampling seed (fallback: SCALED_FIELDS_SEED, then a fixed default)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<Option<RunConfig>, CmdError> {
    match &args.config {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Config(format!("{}: {e}", path.display())))?;
            Ok(Some(RunConfig::from_json(&text)?))
        }
    }
}

fn require_config(args: &CommonArgs) -> Result<RunConfig, CmdError> {
    load_config(args)?.ok_or_else(|| CmdError::Config("this command needs --config".into()))
}

fn resolve_seed(args: &CommonArgs) -> Result<u64, CmdError> {
    if let Some(seed) = args.seed {
        return Ok(seed);
    }
    match std::env::var("SCALED_FIELDS_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CmdError::Config(format!("SCALED_FIELDS_SEED must be a u64, got {text:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn format_or(args: &CommonArgs, default: Format) -> Format {
    args.format.map(Format::from).unwrap_or(default)
}

fn dispatch(command: &Command) -> Result<CmdOutput, CmdError> {
    match command {
        Command::Verify(args) => {
            let config = load_config(args)?;
            let seed = resolve_seed(args)?;
            commands::cmd_verify(config.as_ref(), seed, format_or(args, Format::Json))
        }
        Command::Integrate(args) => {
            let config = require_config(args)?;
            commands::cmd_integrate(&config, args.cells, format_or(args, Format::Csv))
        }
        Command::Derivative(args) => {
            let config = require_config(args)?;
            commands::cmd_derivative(&config, format_or(args, Format::Csv))
        }
        Command::Wavepacket(args) => {
            let config = require_config(args)?;
            commands::cmd_wavepacket(&config, args.cells, format_or(args, Format::Csv))
        }
        Command::DuCheck(args) => {
            let config = require_config(args)?;
            commands::cmd_du_check(&config, format_or(args, Format::Csv))
        }
        Command::Cosmo(args) => {
            let config = require_config(args)?;
            commands::cmd_cosmo(&config, format_or(args, Format::Csv))
        }
    }
}

fn write_output(command: &Command, output: &CmdOutput) -> Result<(), CmdError> {
    let args = match command {
        Command::Verify(a)
        | Command::Integrate(a)
        | Command::Derivative(a)
        | Command::Wavepacket(a)
        | Command::DuCheck(a)
        | Command::Cosmo(a) => a,
    };
    for (path, contents) in &output.side_files {
        std::fs::write(path, contents)
            .map_err(|e| CmdError::Run(format!("{}: {e}", path.display())))?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, &output.rendered)
            .map_err(|e| CmdError::Run(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", output.rendered);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(output) => {
            if let Err(e) = write_output(&cli.command, &output) {
                eprintln!("{e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            ExitCode::from(output.exit as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
