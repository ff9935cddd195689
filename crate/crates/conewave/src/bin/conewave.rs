use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use conewave::config::ExperimentConfig;
use conewave::forward::Resolution;
use conewave::run::{self, Command, RunOptions};

#[derive(Clone, Copy, ValueEnum)]
enum Res {
    Coarse,
    Default,
    Fine,
}

#[derive(Parser)]
#[command(name = "conewave", version, about = "Cone traces and coefficient recovery for perturbed wave operators")]
struct Cli {
    /// forward, traces, invert-ab, invert-q, carleman, diverse, identity,
    /// stability, psi or validate
    subcommand: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides CONEWAVE_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "default")]
    resolution: Res,
    /// With `validate`, also run the quick acceptance checks.
    #[arg(long)]
    deep: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = Command::parse(&cli.subcommand).and_then(|cmd| {
        let cfg = match &cli.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::minimal(),
        };
        let opts = RunOptions {
            out: cli.out.clone(),
            threads: cli.threads,
            seed: cli.seed,
            resolution: match cli.resolution {
                Res::Coarse => Resolution::Coarse,
                Res::Default => Resolution::Default,
                Res::Fine => Resolution::Fine,
            },
            deep: cli.deep,
        };
        run::run(cmd, &cfg, &opts)
    });
    match result {
        Ok(o) => {
            for l in &o.lines {
                println!("{l}");
            }
            if o.checks_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            let kind = format!("{e:?}");
            let kind = kind.split('(').next().unwrap_or("Error");
            eprintln!("{{\"error\": {:?}, \"message\": {:?}}}", kind, e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
