use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use frechet_frames::scenario::{self, Format, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "frechet-frames", version, about = "Run frame scenarios and check their reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: exf1, exf2, runo or custom.
    Run {
        scenario: ScenarioKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check the config hash of a written report and summarize it.
    Report { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Failed verdicts; anything else is a configuration or input error.
struct VerdictFailure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, config, r, truncation, levels, n_max, format, out } => {
            run(scenario, config, Overrides { r, truncation, levels, n_max, format, out })
        }
        Command::Report { path } => report(&path),
    };
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(VerdictFailure)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Overrides {
    r: Option<u32>,
    truncation: Option<usize>,
    levels: Option<usize>,
    n_max: Option<usize>,
    format: Option<FormatArg>,
    out: Option<PathBuf>,
}

fn run(kind: ScenarioKind, path: Option<PathBuf>, o: Overrides) -> anyhow::Result<Result<(), VerdictFailure>> {
    let mut cfg = match &path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::new(kind),
    };
    cfg.scenario = kind;
    if let Some(r) = o.r {
        cfg.r = r;
    }
    if let Some(n) = o.truncation {
        cfg.truncation = n;
    }
    if let Some(k) = o.levels {
        cfg.levels = k;
    }
    if let Some(n) = o.n_max {
        cfg.n_max = n;
    }
    if let Some(f) = o.format {
        cfg.output.format = f.into();
    }
    if let Some(out) = o.out {
        cfg.output.path = Some(out);
    }
    cfg.validate()?;
    let report = scenario::run(&cfg).with_context(|| format!("scenario {}", kind.id()))?;
    let bytes = scenario::render(&report, cfg.output.format)?;
    match &cfg.output.path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    let failed = report.rows.iter().filter(|r| !r.passed).count();
    eprintln!("{}: {} rows, {} failed, config {}", kind.id(), report.rows.len(), failed, &report.config_hash[..12]);
    Ok(if failed == 0 { Ok(()) } else { Err(VerdictFailure) })
}

fn report(path: &PathBuf) -> anyhow::Result<Result<(), VerdictFailure>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report = scenario::parse_report(&text)?;
    let mismatches = report.hash_mismatches();
    let failed: Vec<_> = report.rows.iter().filter(|r| !r.passed).collect();
    println!("scenario: {}", report.config.scenario.id());
    println!("schema: {}  tool: {}", report.schema_version, report.tool);
    println!("config hash: {} ({})", report.config_hash, if mismatches.is_empty() { "verified" } else { "MISMATCH" });
    println!("rows: {}  passed: {}  failed: {}", report.rows.len(), report.rows.len() - failed.len(), failed.len());
    for r in &failed {
        let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
        println!("  FAIL {}{}: {}", r.label, k, r.detail);
    }
    Ok(if mismatches.is_empty() && failed.is_empty() { Ok(()) } else { Err(VerdictFailure) })
}
