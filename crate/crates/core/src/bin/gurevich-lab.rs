use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gurevich_lab::cli::{self, emit_report, parse_config, run_experiment_with, Format, RunOptions};
use gurevich_lab::Error;

#[derive(Parser)]
#[command(
    name = "gurevich-lab",
    version,
    about = "Growth rates of group extensions of subshifts of finite type"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Worker thread cap.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides `[params] n_max`.
        #[arg(long)]
        n_max: Option<usize>,
        /// Accepted for symmetry with `selftest`; experiments are not randomized.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock times in count tables (reports stop being reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Randomized consistency checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            out,
            format,
            threads,
            n_max,
            seed: _,
            timings,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = parse_config(&text)?;
            if let Some(n) = n_max {
                cfg.params.n_max = n;
                cfg.build()?;
            }
            let format = match format {
                Some(FormatArg::Json) => Format::Json,
                Some(FormatArg::Csv) => Format::Csv,
                None => cfg.output.format,
            };
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let report = pool
                .install(|| run_experiment_with(&cfg, RunOptions { timings }))
                .inspect_err(|_| eprintln!("experiment {} ({}) failed", cfg.name, cfg.experiment.as_str()))?;
            for path in emit_report(&report, format, &dir)? {
                println!("{}", path.display());
            }
            if let Some(v) = report.results.get("verdict") {
                println!("verdict: {}", v.as_str().unwrap_or_default());
            }
            Ok(())
        }
        Command::Selftest { seed, rounds } => {
            let checks = cli::selftest(seed, rounds)?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
            for c in &failed {
                println!("FAIL {}: {}", c.name, c.detail);
            }
            println!("{} checks, {} failed (seed {seed})", checks.len(), failed.len());
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{} selftest checks failed",
                    failed.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
