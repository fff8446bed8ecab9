//! Command-line front end.
//!
//! Three subcommands: `scan` analyzes a corpus and writes a report,
//! `explain` shows how one file votes, and `catalog lint` validates a
//! detection catalog. Exit codes: 0 on success, 1 on analysis errors,
//! 2 on usage errors (clap's default).

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use testpat_core::patterns::{PatternKind, TccpcMode};
use testpat_core::pipeline::{self, RunConfig};
use testpat_core::report::{render_csv, render_json, render_text};
use testpat_core::Catalog;

#[derive(Parser)]
#[command(name = "testpat", version, about = "Detect test files and xUnit maintainability patterns across a corpus of projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a corpus and write a report
    Scan(ScanArgs),
    /// Explain how a single file votes and which patterns it shows
    Explain(ExplainArgs),
    /// Work with detection catalogs
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// Corpus root: a directory whose subdirectories are projects
    /// (a directory without subdirectories is analyzed as one project)
    root: Option<PathBuf>,

    /// Fetch projects listed in this manifest (`<id> <path-or-url>` per line)
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Directory that receives the fetched projects (with --manifest)
    #[arg(long)]
    dest: Option<PathBuf>,

    /// Detection catalog (TOML); defaults to the built-in catalog
    #[arg(long)]
    catalog: Option<PathBuf>,

    /// Glob pattern to skip, relative to each project root (repeatable)
    #[arg(long = "exclude", value_name = "GLOB")]
    excludes: Vec<String>,

    /// Comma-separated patterns to detect (default: all four)
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern, value_name = "PATTERN")]
    patterns: Vec<PatternKind>,

    /// How test-case pairing treats shared production declarations
    #[arg(long, value_enum, default_value_t)]
    tccpc_mode: TccpcModeArg,

    /// Fit the test-count regression over the corpus
    #[arg(long)]
    regression: bool,

    /// Worker threads (default: one per logical CPU)
    #[arg(long)]
    jobs: Option<usize>,

    /// Attach keyword vote evidence to every test file in the report
    #[arg(long)]
    explain: bool,

    /// Report format
    #[arg(long, value_enum, default_value_t)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    /// File to explain
    file: PathBuf,

    /// Detection catalog (TOML); defaults to the built-in catalog
    #[arg(long)]
    catalog: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value_t)]
    format: ExplainFormat,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Validate a catalog file (or the built-in catalog)
    Lint {
        /// Catalog to check; defaults to the built-in catalog
        path: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum ExplainFormat {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum TccpcModeArg {
    /// Production declaration referenced by exactly one test, and the
    /// test references exactly one declaration
    #[default]
    Strict,
    /// Only the sole-reference requirement
    Loose,
}

impl From<TccpcModeArg> for TccpcMode {
    fn from(mode: TccpcModeArg) -> Self {
        match mode {
            TccpcModeArg::Strict => TccpcMode::Strict,
            TccpcModeArg::Loose => TccpcMode::Loose,
        }
    }
}

fn parse_pattern(value: &str) -> Result<PatternKind, String> {
    value.replace('-', "_").parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(args) => scan(args),
        Command::Explain(args) => explain(args),
        Command::Catalog { command: CatalogCommand::Lint { path } } => lint(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn scan(args: ScanArgs) -> anyhow::Result<()> {
    let config = RunConfig {
        root: args.root,
        manifest: args.manifest,
        dest: args.dest,
        catalog: args.catalog,
        excludes: args.excludes,
        patterns: args.patterns.into_iter().collect::<BTreeSet<_>>(),
        tccpc_mode: args.tccpc_mode.into(),
        regression: args.regression,
        jobs: args.jobs,
        explain: args.explain,
    };
    let report = pipeline::run(&config)?;
    let rendered = match args.format {
        Format::Json => render_json(&report),
        Format::Csv => render_csv(&report),
        Format::Text => render_text(&report),
    };
    emit(&rendered, args.output.as_deref())
}

fn explain(args: ExplainArgs) -> anyhow::Result<()> {
    let explanation = pipeline::explain_file(&args.file, args.catalog.as_deref())?;
    let rendered = match args.format {
        ExplainFormat::Json => {
            let mut out = serde_json::to_string_pretty(&explanation)?;
            out.push('\n');
            out
        }
        ExplainFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("{}\n", explanation.path));
            out.push_str(&format!(
                "  language:         {}\n",
                explanation.language.as_ref().map(|l| l.as_str()).unwrap_or("unknown")
            ));
            out.push_str(&format!("  framework import: {}\n", explanation.framework_import));
            out.push_str(&format!("  testing keyword:  {}\n", explanation.keyword_found));
            out.push_str(&format!(
                "  test file:        {} (both conditions must hold)\n",
                explanation.is_test
            ));
            if !explanation.frameworks.is_empty() {
                let names: Vec<&str> =
                    explanation.frameworks.iter().map(|f| f.as_str()).collect();
                out.push_str(&format!("  frameworks:       {}\n", names.join(", ")));
            }
            if !explanation.keyword_hits.is_empty() {
                out.push_str("  keyword evidence:\n");
                let mut hits = explanation.keyword_hits.clone();
                hits.sort_by(|a, b| a.line.cmp(&b.line).then_with(|| a.token.cmp(&b.token)));
                for hit in &hits {
                    out.push_str(&format!("    line {:>4}: {}\n", hit.line, hit.token));
                }
            }
            if !explanation.patterns.is_empty() {
                out.push_str("  patterns:\n");
                for hit in &explanation.patterns {
                    out.push_str(&format!("    {}:\n", hit.kind.display_name()));
                    for evidence in &hit.evidence {
                        out.push_str(&format!(
                            "      line {:>4}: {}\n",
                            evidence.line, evidence.detail
                        ));
                    }
                }
            }
            for note in &explanation.notes {
                out.push_str(&format!("  note: {note}\n"));
            }
            for diagnostic in &explanation.diagnostics {
                out.push_str(&format!("  diagnostic: {diagnostic}\n"));
            }
            out
        }
    };
    emit(&rendered, None)
}

fn lint(path: Option<PathBuf>) -> anyhow::Result<()> {
    let catalog = match &path {
        Some(path) => Catalog::load(path)
            .with_context(|| format!("catalog `{}` failed validation", path.display()))?,
        None => Catalog::builtin().clone(),
    };
    println!(
        "catalog ok: version {}, {} language(s), {} framework(s)",
        catalog.version(),
        catalog.languages().len(),
        catalog.frameworks().len()
    );
    Ok(())
}

fn emit(rendered: &str, output: Option<&std::path::Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("could not write `{}`", path.display())),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes()).context("could not write to stdout")
        }
    }
}
