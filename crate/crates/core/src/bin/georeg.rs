use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use georeg::cli::{self, CliError, Options, Source};
use georeg::report::DEFAULT_PRECISION;
use georeg::InterceptMode;

/// Multiple regression from lengths and angles.
#[derive(Parser)]
#[command(name = "georeg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a CSV dataset by both the classical and the geometric route.
    Fit {
        /// CSV file with a header row.
        data: PathBuf,
        #[arg(long)]
        response: String,
        /// Comma-separated regressor columns; defaults to every other numeric column.
        #[arg(long, value_delimiter = ',')]
        regressors: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
        /// Append a subset R² table, optionally limited to subsets of this size.
        #[arg(long, num_args = 0..=1, value_name = "MAX_SIZE")]
        subsets: Option<Option<usize>>,
        /// Exit nonzero when the two routes disagree.
        #[arg(long)]
        check_equivalence: bool,
    },
    /// Analyse a correlation file (Φ, or Ω followed by Θ; text or JSON).
    FromCorrelation {
        file: PathBuf,
        /// Sample size, overriding the file.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 0..=1, value_name = "MAX_SIZE")]
        subsets: Option<Option<usize>>,
    },
    /// Tabulate R² for every regressor subset.
    Subsets {
        #[arg(long, conflicts_with = "correlation", required_unless_present = "correlation")]
        data: Option<PathBuf>,
        #[arg(long, requires = "data")]
        response: Option<String>,
        #[arg(long, value_delimiter = ',', requires = "data")]
        regressors: Option<Vec<String>>,
        #[arg(long)]
        correlation: Option<PathBuf>,
        #[arg(long, requires = "correlation")]
        n: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Fit through the origin.
    #[arg(long)]
    no_intercept: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Significant digits in the report.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            mode: if self.no_intercept {
                InterceptMode::None
            } else {
                InterceptMode::Centered
            },
            precision: self.precision,
            ..Options::default()
        }
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Fit {
            data,
            response,
            regressors,
            common,
            subsets,
            check_equivalence,
        } => {
            let opts = Options {
                subsets,
                check_equivalence,
                ..common.options()
            };
            let report = cli::cmd_fit(&data, &response, regressors.as_deref(), &opts)?;
            Ok(match common.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json(),
            })
        }
        Command::FromCorrelation {
            file,
            n,
            common,
            subsets,
        } => {
            let opts = Options {
                subsets,
                ..common.options()
            };
            let report = cli::cmd_from_correlation(&file, n, &opts)?;
            Ok(match common.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json(),
            })
        }
        Command::Subsets {
            data,
            response,
            regressors,
            correlation,
            n,
            max_size,
            common,
        } => {
            let source = match (&data, &correlation) {
                (Some(path), None) => Source::Data {
                    path,
                    response: response.as_deref().ok_or_else(|| {
                        CliError::Usage("--data needs --response".into())
                    })?,
                    regressors: regressors.as_deref(),
                },
                (None, Some(path)) => Source::Correlation { path, n },
                _ => return Err(CliError::Usage("pass exactly one of --data, --correlation".into())),
            };
            let table = cli::cmd_subsets(&source, max_size, &common.options())?;
            Ok(match common.format {
                Format::Text => table.to_text(),
                Format::Json => table.to_json(),
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            // A closed pipe (`georeg ... | head`) is not a failure.
            match std::io::stdout().lock().write_all(out.as_bytes()) {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                    eprintln!("error: writing report: {e}");
                    ExitCode::FAILURE
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
