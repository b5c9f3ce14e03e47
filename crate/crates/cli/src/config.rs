//! Command line, `key=value` config files and thread setup.
//!
//! A config file is spliced into the argument list right after the
//! subcommand, so every key goes through the same parser as its flag and
//! explicit flags, which come later, override it.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand};
use serde::{Serialize, Serializer};

use crate::experiments::{
    farey::FareyArgs, gauss::GaussArgs, latcount::LatcountArgs, maxop::MaxopArgs, ortho::OrthoArgs,
    stbound::StboundArgs, tailsum::TailsumArgs, telescope::TelescopeArgs,
};
use crate::verify::VerifyArgs;

#[derive(Debug, Parser)]
#[command(
    name = "sml",
    version,
    about = "Numerical experiments on discrete spherical maximal functions"
)]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GlobalOpts {
    /// File of `key=value` lines; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; falls back to SML_THREADS, then to the machine.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; defaults to `sml-out/<subcommand>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice point counts on spheres.
    Latcount(LatcountArgs),
    /// Quadratic Gauss sum magnitudes.
    Gauss(GaussArgs),
    /// Farey arcs and point location.
    Farey(FareyArgs),
    /// Almost-orthogonality sums of the sampling multipliers.
    Ortho(OrthoArgs),
    /// Non-divisor tail sums.
    Tailsum(TailsumArgs),
    /// Arc-integral estimate against the closed-form bound.
    Stbound(StboundArgs),
    /// Maximal operators and spherical averages.
    Maxop(MaxopArgs),
    /// Telescoping decomposition and the localized norm trend.
    Telescope(TelescopeArgs),
    /// Every acceptance criterion.
    Verify(VerifyArgs),
    /// SVG plot of two CSV columns.
    Plot(crate::PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Latcount(_) => "latcount",
            Command::Gauss(_) => "gauss",
            Command::Farey(_) => "farey",
            Command::Ortho(_) => "ortho",
            Command::Tailsum(_) => "tailsum",
            Command::Stbound(_) => "stbound",
            Command::Maxop(_) => "maxop",
            Command::Telescope(_) => "telescope",
            Command::Verify(_) => "verify",
            Command::Plot(_) => "plot",
        }
    }
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got `{line}`", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        if key == "config" {
            bail!(
                "line {}: config files cannot include other config files",
                i + 1
            );
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Long option names accepted by `subcommand`, globals included.
pub fn known_keys(subcommand: &str) -> Vec<String> {
    let root = Cli::command();
    let mut keys: Vec<String> = root
        .get_arguments()
        .filter_map(|a| a.get_long().map(String::from))
        .collect();
    if let Some(sub) = root.find_subcommand(subcommand) {
        keys.extend(
            sub.get_arguments()
                .filter_map(|a| a.get_long().map(String::from)),
        );
    }
    keys
}

#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0:#}")]
    Config(anyhow::Error),
}

/// Parses the command line, then splices in the `--config` file if one is given.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Cli, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv)?;
    let Some(path) = cli.global.config.clone() else {
        return Ok(cli);
    };
    let name = cli.command.name();
    let pairs = read_config_file(&path).map_err(UsageError::Config)?;
    let known = known_keys(name);
    let mut spliced = Vec::new();
    for (k, v) in pairs {
        if !known.contains(&k) {
            return Err(UsageError::Config(anyhow::anyhow!(
                "unknown key `{k}` for `{name}` in {}",
                path.display()
            )));
        }
        spliced.push(format!("--{k}={v}"));
    }
    let at = argv
        .iter()
        .skip(1)
        .position(|a| a == name)
        .map(|p| p + 2)
        .unwrap_or(argv.len());
    let mut merged = argv[..at].to_vec();
    merged.extend(spliced);
    merged.extend_from_slice(&argv[at..]);
    Ok(Cli::try_parse_from(&merged)?)
}

/// Resolves the worker count from the flag or `SML_THREADS` and sizes the global pool.
pub fn init_threads(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SML_THREADS") {
            Ok(s) if !s.trim().is_empty() => {
                Some(s.trim().parse::<usize>().with_context(|| {
                    format!("SML_THREADS must be a positive integer, got `{s}`")
                })?)
            }
            _ => None,
        },
    };
    if n == Some(0) {
        bail!("thread count must be positive");
    }
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        b = b.num_threads(n);
    }
    // A pool already built by an earlier call in the same process is kept.
    let _ = b.build_global();
    Ok(rayon::current_num_threads())
}

/// Comma-separated list argument, echoed back in the same form.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl<T: Display> Serialize for List<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
