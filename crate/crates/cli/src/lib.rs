//! Experiment runner: each subcommand drives one part of `sml_core`, writes a
//! JSON report with CSV tables and exits 0 on pass, 1 on a failed assertion
//! and 2 on a usage or configuration error.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use config::{Cli, Command, UsageError};
use report::{Report, Timings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, clap::Args, Serialize)]
#[command(args_override_self = true)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, value_enum, default_value_t = plot::Scale::Linear)]
    pub scale: plot::Scale,
    /// SVG path; defaults to the CSV path with an `.svg` extension.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Resolved run: subcommand, seed, thread count and output directory.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let command = cli.command.name().to_string();
        let out = cli
            .global
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("sml-out").join(&command));
        ExperimentConfig {
            command,
            seed: cli.global.seed,
            threads: cli.global.threads,
            out,
        }
    }
}

/// Runs one experiment and returns its report without writing anything.
pub fn run_command(command: &Command, seed: u64) -> Result<Report> {
    use experiments::*;
    match command {
        Command::Latcount(a) => latcount::run(a, seed),
        Command::Gauss(a) => gauss::run(a, seed),
        Command::Farey(a) => farey::run(a, seed),
        Command::Ortho(a) => ortho::run(a, seed),
        Command::Tailsum(a) => tailsum::run(a, seed),
        Command::Stbound(a) => stbound::run(a, seed),
        Command::Maxop(a) => maxop::run(a, seed),
        Command::Telescope(a) => telescope::run(a, seed),
        Command::Verify(a) => Ok(verify::run(a, seed)?.report),
        Command::Plot(_) => anyhow::bail!("plot produces an SVG, not a report"),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = ExperimentConfig::from_cli(cli);
    let threads = config::init_threads(cfg.threads)?;
    if let Command::Plot(p) = &cli.command {
        let svg = p
            .output
            .clone()
            .unwrap_or_else(|| p.csv.with_extension("svg"));
        plot::emit_plot(&p.csv, &p.x, &p.y, p.scale, &svg)?;
        let _ = writeln!(std::io::stdout(), "wrote {}", svg.display());
        return Ok(EXIT_PASS);
    }
    let start = Instant::now();
    let (report, extra) = match &cli.command {
        Command::Verify(a) => {
            let v = verify::run(a, cfg.seed)?;
            (v.report, v.parts)
        }
        c => (run_command(c, cfg.seed)?, Vec::new()),
    };
    let wall = start.elapsed().as_secs_f64();
    let mut written = report.write(&cfg.out)?;
    for (name, part) in &extra {
        written.extend(part.write(&cfg.out.join(name))?);
    }
    written.push(
        Timings {
            command: cfg.command.clone(),
            wall_seconds: wall,
            threads,
        }
        .write(&cfg.out)?,
    );
    // A closed pipe on stdout is not an error for the run itself.
    let mut out = std::io::stdout().lock();
    for line in report.summary_lines() {
        let _ = writeln!(out, "{line}");
    }
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(
        out,
        "wrote {} files under {}",
        written.len(),
        cfg.out.display()
    );
    Ok(if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let cli = match config::parse_args(argv) {
        Ok(c) => c,
        Err(UsageError::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
