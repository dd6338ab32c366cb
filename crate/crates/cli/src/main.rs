use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::Parser;

use bitonic_core::bench::{
    emit_report, parse_sizes, run_bench, run_verification, BenchConfig, BenchStrategy, OutputFormat,
};
use bitonic_core::engine::DEFAULT_BLOCK_CAPACITY;

/// Sweeps array sizes, timing a CPU quicksort against the bitonic network
/// under each launch strategy.
#[derive(Debug, Parser)]
#[command(name = "bitonic-bench", version)]
struct Args {
    /// Sizes as a list or doubling range, e.g. `2^17..2^24` or `1024,3000`.
    #[arg(long, default_value = "2^17..2^24")]
    sizes: String,

    /// Comma list of cpu-quicksort, cpu-bitonic-sequential, baseline, shared,
    /// fused, or `all`.
    #[arg(long, default_value = "all")]
    strategies: String,

    /// Keys per shared block (power of two).
    #[arg(long, default_value_t = DEFAULT_BLOCK_CAPACITY)]
    block_capacity: usize,

    /// Worker threads, or `auto`.
    #[arg(long, default_value = "auto")]
    workers: String,

    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,

    /// Repetitions per cell; the minimum is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,

    #[arg(long, default_value = "table", value_parser = ["table", "csv", "json"])]
    format: String,

    /// Run the correctness suite only, without timing.
    #[arg(long)]
    verify_only: bool,

    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(args: &Args) -> Result<BenchConfig> {
    let workers = match args.workers.trim() {
        "auto" => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w
            .parse()
            .map_err(|_| anyhow!("--workers expects a count or `auto`, got '{w}'"))?,
    };
    let config = BenchConfig {
        sizes: parse_sizes(&args.sizes)?,
        strategies: BenchStrategy::parse_list(&args.strategies)?,
        block_capacity: args.block_capacity,
        workers,
        seed: args.seed,
        repetitions: args.reps,
        output_format: args.format.parse::<OutputFormat>()?,
    };
    config.check()?;
    Ok(config)
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn run(args: Args) -> Result<bool> {
    let config = config(&args)?;
    if args.verify_only {
        let checks = run_verification(&config)?;
        let mut text = String::new();
        for c in &checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!("{tag}  {:<40} {}\n", c.name, c.detail));
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        text.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
        write_out(&args.out, &text)?;
        return Ok(failed == 0);
    }
    let records = run_bench(&config)?;
    write_out(&args.out, &emit_report(&records, config.output_format))?;
    Ok(true)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
