use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prequant_field::config::ExperimentConfig;
use prequant_field::{read_report, run, summary, write_report, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

#[derive(Parser)]
#[command(name = "prequant-field", version, about = "Run and summarize prequantum field experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir` in the configuration.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the summary of a JSON report written by `run`.
    Summarize { report: PathBuf },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out_dir, jobs } => {
            let config = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(EXIT_CONFIG);
                }
            };
            if jobs == Some(0) {
                eprintln!("error: --jobs must be at least 1");
                return exit(EXIT_CONFIG);
            }
            let report = match run(&config, jobs) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(EXIT_CONFIG);
                }
            };
            let dir = out_dir
                .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let paths = match write_report(&report, &dir) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot write reports to {}: {e}", dir.display());
                    return exit(EXIT_CONFIG);
                }
            };
            let c = &report.summary.counts;
            println!(
                "{}: {} rows, {} pass, {} fail, {} error, {} info -> {}",
                report.experiment,
                report.summary.rows,
                c.pass,
                c.fail,
                c.error,
                c.info,
                if report.passed() { "PASS" } else { "FAIL" }
            );
            println!("wrote {} and {}", paths.csv.display(), paths.json.display());
            exit(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Summarize { report } => {
            let report = match read_report(&report) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(EXIT_CONFIG);
                }
            };
            let summary = summary::summarize(&report.rows);
            let doc = serde_json::json!({ "experiment": report.experiment, "summary": summary });
            println!("{}", serde_json::to_string_pretty(&doc).expect("summaries serialize"));
            exit(if summary.passed { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}
