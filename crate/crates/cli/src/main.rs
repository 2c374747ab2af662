use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_cli::scenario::parameters;
use finsler_cli::tasks::{geodesic_table, GeodesicParams};
use finsler_cli::{render_suite, run_scenario, suite, write_suite, CliError, EXIT_RESIDUAL};
use finsler_core::descriptor::MetricDescriptor;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "FINSLER_THREADS";

#[derive(Parser)]
#[command(name = "finsler", version, about = "Numerical Finsler geometry on a coordinate chart")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file and write its CSV and report.
    Run { scenario: PathBuf },
    /// Run the bundled verification corpus and print a pass/fail matrix.
    VerifyAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write summary.{txt,csv,json} into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one geodesic and print `t, x, y, F` as CSV.
    Geodesic {
        /// Built-in metric name, e.g. euclidean, sphere, hyperbolic, randers-default, funk.
        #[arg(long)]
        metric: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 401)]
        nodes: usize,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_VAR, format!("expected a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(THREADS_VAR, e.to_string()))
}

fn geodesic(metric: &str, x0: Vec<f64>, y0: Vec<f64>, t: f64, nodes: usize) -> Result<(), CliError> {
    let source = "--metric";
    let descriptor: MetricDescriptor = serde_json::from_value(serde_json::json!({ "name": metric }))
        .map_err(|e| CliError::config(source, e.to_string()))?;
    let m = descriptor.build().map_err(|e| CliError::config(source, e.to_string()))?;
    let params: GeodesicParams = parameters(
        &serde_json::json!({ "x0": x0, "y0": y0, "t_end": t, "nodes": nodes }),
        "command line",
    )?;
    if params.x0.len() != m.dim() || params.y0.len() != m.dim() || nodes < 2 || t <= 0.0 {
        return Err(CliError::config(
            "command line",
            format!("--x0 and --y0 need {} components, --t must be positive, --nodes at least 2", m.dim()),
        ));
    }
    let (table, _) = geodesic_table(&m, &params)?;
    print!("{}", table.render());
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { scenario } => {
            let outcome = run_scenario(&scenario)?;
            print!("{}", outcome.report);
            Ok(outcome.exit_code())
        }
        Command::VerifyAll { seed, out } => {
            let report = suite::verify_all(seed);
            print!("{}", render_suite(&report));
            if let Some(dir) = out {
                write_suite(&report, &dir)?;
            }
            Ok(if report.passed() { 0 } else { EXIT_RESIDUAL })
        }
        Command::Geodesic { metric, x0, y0, t, nodes } => geodesic(&metric, x0, y0, t, nodes).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
