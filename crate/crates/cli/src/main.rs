use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grating_cli::commands::{self, CliError, Options};
use grating_cli::RunConfig;

#[derive(Parser)]
#[command(name = "grating", version, about = "Transmittance of periodic rigid acoustic gratings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output; overrides output.csv_path.
    #[arg(long, global = true)]
    out_csv: Option<PathBuf>,
    /// JSON summary; overrides output.json_path.
    #[arg(long, global = true)]
    out_json: Option<PathBuf>,
    /// Highest frequency derivative.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Angular frequency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Tabulated Green function case (1, 2 or 3).
    #[arg(long, global = true)]
    case: Option<u32>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// T, R and accuracy indicators at one frequency.
    Solve,
    /// Adaptive Padé sweep: CSV curve and JSON summary.
    Sweep,
    /// Gauss-Legendre reference average.
    Reference,
    /// Adaptive sweep and closed-form band average only.
    Average,
    /// Derivative tables of the Ewald series.
    Greens,
}

fn run(cli: &Cli, opts: &Options) -> Result<(), CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config(grating_cli::ConfigError::Invalid("--config is required".into())))?;
    let cfg = RunConfig::load(path)?;
    match cli.command {
        Command::Solve => commands::print_solve(&commands::solve(&cfg, opts)?),
        Command::Sweep => {
            let s = commands::sweep(&cfg, opts)?;
            println!("J = {}  subbands = {}  solves = {}", grating_cli::output::fmt(s.j), s.partition.centres.len(), s.solves);
        }
        Command::Average => {
            let s = commands::average(&cfg, opts)?;
            println!("J = {}", grating_cli::output::fmt(s.j));
        }
        Command::Reference => {
            let s = commands::reference(&cfg, opts)?;
            println!("J = {}  nodes = {}", grating_cli::output::fmt(s.j), s.nodes);
        }
        Command::Greens => commands::print_greens(&commands::greens(&cfg, opts)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        out_csv: cli.out_csv.clone(),
        out_json: cli.out_json.clone(),
        order: cli.order,
        omega: cli.omega,
        case: cli.case,
    };
    match run(&cli, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = err.report();
            eprintln!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            // The report also replaces the summary when a JSON path is known.
            if let Some(p) = &cli.out_json {
                let _ = grating_cli::output::write_json(p, &report);
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
