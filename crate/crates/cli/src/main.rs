//! `appaudit` command line.
//!
//! Exit status: 0 when nothing was found, 1 when a policy violation or
//! vulnerability was found, 2 on any input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use appaudit::detectors::DetectorCatalog;
use appaudit::flow::SourceSinkCatalog;
use appaudit::geo::GeoTable;
use appaudit::manifest::{PermissionCatalog, TargetEra};
use appaudit::policy::parse_claims;
use appaudit::report::{
    audit, batch, explain, render_csv, render_markdown_batch, render_markdown_report, AuditConfig, AuditReport,
};
use appaudit::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "appaudit", version, about = "Static privilege, privacy-policy and vulnerability audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit one package directory.
    Audit {
        package: PathBuf,
        #[command(flatten)]
        opts: AuditOpts,
    },
    /// Audit every package directory under a corpus directory.
    Batch {
        corpus: PathBuf,
        #[command(flatten)]
        opts: AuditOpts,
    },
    /// Print the evidence trail of one finding in a JSON report.
    Explain {
        report: PathBuf,
        finding_id: String,
        /// Detector catalog used for rule titles.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Md => "md",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args)]
struct AuditOpts {
    /// Policy claims file.
    #[arg(long)]
    claims: PathBuf,
    /// Host-suffix to country table.
    #[arg(long)]
    geo: PathBuf,
    /// Source/sink catalog replacing the bundled one.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Detector rule catalog replacing the bundled one.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Permission catalog replacing the bundled one.
    #[arg(long)]
    permissions: Option<PathBuf>,
    #[arg(long, default_value = "pre-31", value_parser = parse_era)]
    target_era: TargetEra,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write reports into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_era(s: &str) -> std::result::Result<TargetEra, String> {
    s.parse()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn rules_catalog(path: Option<&Path>) -> Result<DetectorCatalog> {
    match path {
        Some(p) => DetectorCatalog::parse(&read(p)?),
        None => Ok(DetectorCatalog::bundled().clone()),
    }
}

fn config(opts: &AuditOpts) -> Result<AuditConfig> {
    let mut cfg = AuditConfig::new(parse_claims(&read(&opts.claims)?)?, GeoTable::parse(&read(&opts.geo)?)?);
    if let Some(p) = &opts.catalog {
        cfg.flows = SourceSinkCatalog::parse(&read(p)?)?;
    }
    cfg.rules = rules_catalog(opts.rules.as_deref())?;
    if let Some(p) = &opts.permissions {
        cfg.permissions = PermissionCatalog::parse(&read(p)?)?;
    }
    cfg.era = opts.target_era;
    Ok(cfg)
}

fn emit(out: Option<&Path>, file_name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write(&dir.join(file_name), text)
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run_audit(package: &Path, opts: &AuditOpts) -> Result<ExitCode> {
    let cfg = config(opts)?;
    let report = audit(package, &cfg)?;
    let text = match opts.format {
        Format::Json => report.to_json()?,
        Format::Md => render_markdown_report(&report, &cfg.permissions),
        Format::Csv => render_csv(std::slice::from_ref(&report))?,
    };
    let name = format!("{}.{}", report.app.source, opts.format.extension());
    emit(opts.out.as_deref(), &name, &text)?;
    Ok(if report.has_issues() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn run_batch(corpus: &Path, opts: &AuditOpts) -> Result<ExitCode> {
    let cfg = config(opts)?;
    let result = batch(corpus, &cfg)?;
    let out = opts.out.as_deref();
    match opts.format {
        Format::Json => match out {
            Some(dir) => {
                for r in &result.reports {
                    emit(Some(dir), &format!("{}.json", r.app.source), &r.to_json()?)?;
                }
                emit(Some(dir), "summary.json", &result.summary.to_json()?)?;
            }
            None => emit(None, "", &result.to_json()?)?,
        },
        Format::Md => emit(out, "corpus.md", &render_markdown_batch(&result, &cfg.permissions))?,
        Format::Csv => emit(out, "corpus.csv", &render_csv(&result.reports)?)?,
    }
    for f in &result.summary.failures {
        eprintln!("error: {}: {}", f.source, f.error);
    }
    Ok(if !result.summary.failures.is_empty() {
        ExitCode::from(2)
    } else if result.reports.iter().any(AuditReport::has_issues) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_explain(report: &Path, finding_id: &str, rules: Option<&Path>) -> Result<ExitCode> {
    let report = AuditReport::from_json(&read(report)?)?;
    print!("{}", explain(&report, finding_id, &rules_catalog(rules)?)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Audit { package, opts } => run_audit(package, opts),
        Command::Batch { corpus, opts } => run_batch(corpus, opts),
        Command::Explain {
            report,
            finding_id,
            rules,
        } => run_explain(report, finding_id, rules.as_deref()),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
