mod commands;
mod config;

use clap::{Parser, Subcommand, ValueEnum};
use mep::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

/// Evolve and inspect multi expression programs.
#[derive(Parser)]
#[command(name = "mep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Infix,
    #[value(name = "c-like")]
    CLike,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolutionary search described by a JSON config file.
    Run {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Score a saved solution against a CSV dataset, gene by gene.
    Eval {
        /// Path to a solution text file.
        #[arg(long)]
        solution: PathBuf,
        /// Path to the CSV dataset.
        #[arg(long)]
        data: PathBuf,
        /// Number of input columns in the dataset.
        #[arg(long)]
        ni: usize,
        /// Number of target columns in the dataset.
        #[arg(long, default_value_t = 1)]
        no: usize,
        /// Treat the first CSV row as a header.
        #[arg(long)]
        has_header: bool,
        /// Problem mode: regression, classification, or boolean.
        #[arg(long, default_value = "regression")]
        mode: Mode,
    },
    /// Print a saved solution as expressions or C-like assignments.
    Export {
        /// Path to a solution text file.
        #[arg(long)]
        solution: PathBuf,
        /// Output style.
        #[arg(long, value_enum, default_value = "infix")]
        format: FormatArg,
        /// Gene indices to export (defaults to the last gene).
        #[arg(long, value_delimiter = ',')]
        genes: Vec<usize>,
    },
    /// Generate a benchmark dataset and write it as CSV.
    Gen {
        /// Generator name: even_parity, full_adder, multiplier, or polynomial.
        #[arg(long)]
        problem: String,
        /// Bit width for even_parity and multiplier.
        #[arg(long)]
        bits: Option<usize>,
        /// Polynomial coefficients, lowest power first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<f64>>,
        /// Polynomial sampling domain as `low,high`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        domain: Option<Vec<f64>>,
        /// Number of polynomial sample points.
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for polynomial sampling.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config } => commands::cmd_run(&config),
        Command::Eval {
            solution,
            data,
            ni,
            no,
            has_header,
            mode,
        } => commands::cmd_eval(&solution, &data, ni, no, has_header, mode),
        Command::Export {
            solution,
            format,
            genes,
        } => {
            let format = match format {
                FormatArg::Infix => commands::ExportFormat::Infix,
                FormatArg::CLike => commands::ExportFormat::CLike,
            };
            commands::cmd_export(&solution, format, &genes)
        }
        Command::Gen {
            problem,
            bits,
            coefficients,
            domain,
            samples,
            seed,
            out,
        } => {
            let domain = domain
                .map(|d| match d[..] {
                    [low, high] => Ok((low, high)),
                    _ => Err(anyhow::anyhow!(
                        "--domain takes exactly two numbers, got {}",
                        d.len()
                    )),
                })
                .transpose()?;
            commands::cmd_gen(&problem, bits, coefficients, domain, samples, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
