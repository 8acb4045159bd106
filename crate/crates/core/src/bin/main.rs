use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sov_xxx::cli_harness::{parse_tolerance, run, Format, RunConfig, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sov-xxx", version, about = "Antiperiodic XXX chain: SoV spectrum, determinants and form factors checked against dense matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// number of sites, 1..=8
    #[arg(long = "n", global = true, default_value_t = 3)]
    n: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// minimum separation of ξ_a, ξ_a ± η
    #[arg(long, global = true, default_value_t = sov_xxx::chain_model::DEFAULT_MARGIN)]
    margin: f64,
    /// suite=value, replaces every tolerance of that suite
    #[arg(long = "tol", global = true, value_parser = tol_arg)]
    tol: Vec<(Suite, f64)>,
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json", value_parser = format_arg)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// oracle gates and the full T-Q spectrum
    Spectrum,
    /// determinant identities, off and on shell
    VerifyIdentities,
    /// scalar-product forms and eigenstate cases
    ScalarProducts,
    /// form factors over the whole spectrum
    FormFactors,
    /// Bethe-state correspondence and the two-route form factor
    AbaCheck,
    /// every suite
    All,
    /// an explicit suite list
    Run {
        #[arg(long, value_delimiter = ',', value_parser = suite_arg, required = true)]
        suites: Vec<Suite>,
    },
}

fn tol_arg(s: &str) -> Result<(Suite, f64), String> {
    parse_tolerance(s).map_err(|e| e.to_string())
}

fn format_arg(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: sov_xxx::Error| e.to_string())
}

fn suite_arg(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: sov_xxx::Error| e.to_string())
}

fn suites_for(cmd: &Command) -> Vec<Suite> {
    match cmd {
        Command::Spectrum => vec![Suite::Oracle, Suite::Spectrum],
        Command::VerifyIdentities => vec![Suite::Identities],
        Command::ScalarProducts => vec![Suite::ScalarProducts],
        Command::FormFactors => vec![Suite::FormFactors],
        Command::AbaCheck => vec![Suite::AbaCheck],
        Command::All => Suite::ALL.to_vec(),
        Command::Run { suites } => suites.clone(),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let c = cli.common;
    let config = RunConfig {
        n_sites: c.n,
        seed: c.seed,
        margin: c.margin,
        tolerances: c.tol.into_iter().collect(),
        suites: suites_for(&cli.command),
        out: c.out,
        format: c.format,
    };
    config.validate().context("invalid configuration")?;
    let report = run(&config)?;
    let text = report.render(config.format);
    match &config.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    let failed: Vec<_> = report.failures().collect();
    eprintln!("{} checks, {} failed", report.rows.len(), failed.len());
    for r in failed {
        eprintln!("FAIL {}  value={:e} tol={:e}{}", r.name, r.value[0], r.tol, r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default());
    }
    Ok(report.pass)
}
