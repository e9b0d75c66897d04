use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dp_endo::cli_report::{cmd_classify, cmd_graph, cmd_verify, cmd_web};

#[derive(Parser)]
#[command(
    name = "dp-endo",
    version,
    about = "Anticanonical loops on weak del Pezzo surfaces and their self-maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate loop classes with K^2 in a range and write them as JSON.
    Classify {
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        k2_min: i64,
        #[arg(long, default_value_t = 7, allow_negative_numbers = true)]
        k2_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every check on a surface script and write a JSON report.
    Verify {
        script: PathBuf,
        /// Degree parameter for the ledgers; repeat for several.
        #[arg(long = "d", default_values_t = [2, 3], allow_negative_numbers = true)]
        d: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the loop of a surface script.
    Graph {
        script: PathBuf,
        /// `dot` or `ascii`.
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the blow-down web between the classified surfaces as DOT.
    Web {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let status = match cli.command {
        Command::Classify {
            k2_min,
            k2_max,
            out: path,
        } => cmd_classify(k2_min, k2_max, path.as_deref(), &mut out, &mut err),
        Command::Verify {
            script,
            d,
            out: path,
        } => cmd_verify(&script, &d, path.as_deref(), &mut out, &mut err),
        Command::Graph {
            script,
            format,
            out: path,
        } => cmd_graph(&script, &format, path.as_deref(), &mut out, &mut err),
        Command::Web { out: path } => cmd_web(path.as_deref(), &mut out, &mut err),
    };
    ExitCode::from(status.code())
}
