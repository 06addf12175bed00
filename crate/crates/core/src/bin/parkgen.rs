use clap::{Parser, Subcommand};
use parkgen::config::PipelineConfig;
use parkgen::pipeline;
use parkgen::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "parkgen", version, about = "Parking maneuver dataset generator and evaluator")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Episode selection such as `layout=parallel,slot=0..3,ped=off`.
    #[arg(long, global = true)]
    filter: Option<String>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the episode catalogue and write the dataset.
    Generate,
    /// Run the evaluation suite and print the metrics table.
    Evaluate,
    /// Plan the first selected episode and write the path as JSON.
    Plan,
    /// Run the first selected episode and write its frames plus an overview raster.
    Render,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::NoPathFound { .. } | Error::InvalidStart | Error::InvalidGoal => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(filter) = cli.filter {
        cfg.filter = filter;
    }
    cfg.validate()?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(0);
    }
    let Some(command) = cli.command else {
        return Err(Error::Config("no subcommand given (generate, evaluate, plan, render)".into()));
    };
    match command {
        Command::Generate => {
            let summary = pipeline::generate(&cfg)?;
            println!("{}", summary.line());
            println!("dataset written to {}", cfg.out.display());
            Ok(if summary.plan_failures() > 0 { 4 } else { 0 })
        }
        Command::Evaluate => {
            let report = pipeline::evaluate(&cfg)?;
            print!("{}", report.table());
            println!("report written to {}", cfg.out.join(pipeline::EVAL_REPORT).display());
            Ok(0)
        }
        Command::Plan => {
            println!("{}", pipeline::plan_episode(&cfg)?.display());
            Ok(0)
        }
        Command::Render => {
            println!("{}", pipeline::render_episode(&cfg)?.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("parkgen: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
