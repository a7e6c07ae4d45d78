use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fplower::search::SearchConfig;
use fplower::target::load_target;
use fplower_cli::{compile, emit_report, operator_table, CliError, Format};

#[derive(Parser)]
#[command(
    name = "fplower",
    version,
    about = "Lower real-number programs to a floating-point target"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for accurate and cheap implementations of one FPCore program.
    Compile(CompileArgs),
    /// Load a target description and print its operator table.
    CheckTarget {
        /// Target description file.
        path: PathBuf,
    },
}

#[derive(Args)]
struct CompileArgs {
    /// Target description file.
    #[arg(long, value_name = "PATH")]
    target: PathBuf,
    /// FPCore program, or `-` for standard input.
    #[arg(long, value_name = "PATH|-")]
    input: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled input points, split evenly into training and test points.
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long, default_value_t = 4)]
    iters: usize,
    /// E-graph size limit per rewritten subexpression.
    #[arg(long, default_value_t = 8000)]
    node_limit: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file, or `-` for standard output.
    #[arg(long, value_name = "PATH|-", default_value = "-")]
    out: String,
}

fn read_input(path: &str) -> Result<String, CliError> {
    let read_err = |e: io::Error| CliError::Read {
        path: path.to_string(),
        msg: e.to_string(),
    };
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(read_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(read_err)
    }
}

fn write_output(path: &str, text: &str) -> Result<(), CliError> {
    let write_err = |e: io::Error| CliError::Write {
        path: path.to_string(),
        msg: e.to_string(),
    };
    if path == "-" {
        io::stdout().write_all(text.as_bytes()).map_err(write_err)
    } else {
        fs::write(path, text).map_err(write_err)
    }
}

fn run_compile(a: &CompileArgs) -> Result<(), CliError> {
    let target = load_target(&a.target)?;
    let input = read_input(&a.input)?;
    let cfg = SearchConfig {
        iterations: a.iters,
        node_limit: a.node_limit,
        points: a.points,
        seed: a.seed,
        ..SearchConfig::default()
    };
    let report = compile(&input, &target, &cfg)?;
    write_output(&a.out, &emit_report(&report, a.format)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile(a) => run_compile(a),
        Command::CheckTarget { path } => {
            let t = load_target(path)?;
            write_output("-", &operator_table(&t))
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fplower: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
