//! End-to-end corpus analysis.
//!
//! [`run`] takes a [`RunConfig`], locates the projects (a corpus root
//! directory or a fetch manifest), and produces a [`Report`]:
//! deduplicate projects, scan each one, vote every file, detect the
//! requested patterns in the test files, compute per-project metrics,
//! aggregate, and optionally fit the regression. Project analysis runs
//! in parallel; all output ordering is independent of scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, FrameworkId, LanguageId};
use crate::diagnostics::Diagnostic;
use crate::ingest::{
    self, classify_size, FetchError, ProjectSource, ScanError, ScanOptions, SourceFile,
};
use crate::metrics::{
    self, fit_test_count_model, MetricsError, OlsError, QaSatisfaction, RegressionObservation,
};
use crate::patterns::{self, PatternHit, PatternKind, TccpcMode};
use crate::report::{
    ratio_out, CorpusSummary, FrameworkRow, PatternRow, PatternStat, ProjectReport, QaRow,
    RatioOut, RegressionReport, Report, SizeClassStat, TestFileDetail, SCHEMA_VERSION,
};
use crate::testdetect::{self, KeywordHit};

/// Everything a run needs to know.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// Corpus root: either a directory of project directories, or a
    /// single project directory.
    pub root: Option<PathBuf>,
    /// Fetch manifest (`<id> <path-or-url>` per line); requires `dest`.
    pub manifest: Option<PathBuf>,
    /// Where manifest entries are materialized.
    pub dest: Option<PathBuf>,
    /// Detection catalog; the built-in catalog when absent.
    pub catalog: Option<PathBuf>,
    /// Glob patterns pruned during scanning, relative to project roots.
    pub excludes: Vec<String>,
    /// Patterns to detect; empty means all four.
    pub patterns: BTreeSet<PatternKind>,
    /// How test-case-per-class pairs production declarations.
    pub tccpc_mode: TccpcMode,
    /// Fit the test-count regression over the corpus.
    pub regression: bool,
    /// Worker threads (`None` = one per logical CPU).
    pub jobs: Option<usize>,
    /// Attach keyword vote evidence to each test file in the report.
    pub explain: bool,
}

/// Why a run could not produce a report.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("nothing to analyze: pass a corpus root directory or --manifest")]
    NoInput,
    #[error("--manifest requires --dest for the fetched projects")]
    DestRequired,
    #[error("corpus root `{}` is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("could not read corpus root `{}`: {source}", path.display())]
    RootUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("could not build worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error("could not read `{}`: {source}", path.display())]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Analyze a corpus and assemble the report.
pub fn run(config: &RunConfig) -> Result<Report, PipelineError> {
    let catalog = load_catalog(config)?;
    let selected = selected_patterns(&config.patterns);
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let mut notes: Vec<String> = Vec::new();

    let sources = gather_sources(config, &mut diagnostics)?;
    let outcome = ingest::dedup_projects(&sources);
    diagnostics.extend(outcome.diagnostics.iter().cloned());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()?;
    let analyses: Vec<Result<ProjectAnalysis, PipelineError>> = pool.install(|| {
        use rayon::prelude::*;
        outcome
            .kept
            .par_iter()
            .map(|project| analyze_project(project, &catalog, config, &selected))
            .collect()
    });
    let mut projects = Vec::with_capacity(analyses.len());
    for analysis in analyses {
        let analysis = analysis?;
        diagnostics.extend(analysis.diagnostics.iter().cloned());
        projects.push(analysis);
    }
    projects.sort_by(|a, b| a.report.id.cmp(&b.report.id));

    let mut corpus = summarize(&projects, &catalog, &selected, &mut diagnostics)?;
    corpus.dropped = outcome.dropped;
    let regression = if config.regression {
        fit_regression(&projects, &selected, &mut notes)
    } else {
        None
    };

    diagnostics.sort();
    diagnostics.dedup();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        catalog_version: catalog.version().to_string(),
        notes,
        corpus,
        projects: projects.into_iter().map(|p| p.report).collect(),
        regression,
        diagnostics,
    })
}

/// What a single file's vote and pattern scan look like, for `explain`.
#[derive(Debug, Clone, Serialize)]
pub struct FileExplanation {
    pub path: String,
    pub language: Option<LanguageId>,
    pub framework_import: bool,
    pub keyword_found: bool,
    pub is_test: bool,
    pub frameworks: Vec<FrameworkId>,
    pub keyword_hits: Vec<KeywordHit>,
    pub patterns: Vec<PatternHit>,
    pub notes: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Explain one file in isolation: the two vote conditions, the evidence,
/// and the single-file patterns. Cross-file analysis needs a project, so
/// test-case pairing is only noted here.
pub fn explain_file(path: &Path, catalog_path: Option<&Path>) -> Result<FileExplanation, PipelineError> {
    let catalog = match catalog_path {
        Some(path) => Catalog::load(path)?,
        None => Catalog::builtin().clone(),
    };
    let bytes = std::fs::read(path).map_err(|source| PipelineError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let display = path.display().to_string();
    let language = catalog.language_of(path).cloned();
    let file = SourceFile::from_bytes("explain", &display, language, bytes);
    let (verdict, mut diagnostics) = testdetect::vote(&file, &catalog);

    let mut notes = Vec::new();
    let mut hits = Vec::new();
    if file.language.is_none() {
        notes.push("extension not in the catalog; the file cannot vote".into());
    } else {
        for kind in [
            PatternKind::AssertionMessage,
            PatternKind::SimpleTest,
            PatternKind::ImplicitTeardown,
        ] {
            if !patterns::file_evaluable(kind, &file, &catalog) {
                notes.push(format!("{kind} not evaluable for this language"));
                continue;
            }
            let (found, extra) = detect_single_file(kind, &file, &catalog);
            diagnostics.extend(extra);
            hits.extend(found);
        }
        notes.push(format!(
            "{} needs the surrounding project (cross-file references); run `scan` for it",
            PatternKind::TestcaseClassPerClass
        ));
        if !verdict.is_test() {
            notes.push("patterns are reported for context; the file is not a test file".into());
        }
    }
    hits.sort();
    diagnostics.sort();
    diagnostics.dedup();
    Ok(FileExplanation {
        path: display,
        language: file.language.clone(),
        framework_import: verdict.framework_import(),
        keyword_found: verdict.keyword_found(),
        is_test: verdict.is_test(),
        frameworks: verdict.frameworks().iter().cloned().collect(),
        keyword_hits: verdict.keyword_hits().to_vec(),
        patterns: hits,
        notes,
        diagnostics,
    })
}

fn load_catalog(config: &RunConfig) -> Result<Catalog, PipelineError> {
    Ok(match &config.catalog {
        Some(path) => Catalog::load(path)?,
        None => Catalog::builtin().clone(),
    })
}

fn selected_patterns(requested: &BTreeSet<PatternKind>) -> BTreeSet<PatternKind> {
    if requested.is_empty() {
        PatternKind::ALL.into_iter().collect()
    } else {
        requested.clone()
    }
}

fn gather_sources(
    config: &RunConfig,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<ProjectSource>, PipelineError> {
    if let Some(manifest) = &config.manifest {
        let dest = config.dest.as_ref().ok_or(PipelineError::DestRequired)?;
        let outcome = ingest::fetch_manifest(manifest, dest)?;
        diagnostics.extend(outcome.diagnostics);
        return Ok(outcome.fetched);
    }
    let root = config.root.as_ref().ok_or(PipelineError::NoInput)?;
    if !root.is_dir() {
        return Err(PipelineError::NotADirectory(root.clone()));
    }
    let mut projects = Vec::new();
    let mut loose_files = 0u64;
    let entries =
        std::fs::read_dir(root).map_err(|source| PipelineError::RootUnreadable {
            path: root.clone(),
            source,
        })?;
    for entry in entries {
        let entry = entry.map_err(|source| PipelineError::RootUnreadable {
            path: root.clone(),
            source,
        })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = entry.path();
        if path.is_dir() {
            if name.starts_with('.') {
                continue; // VCS and editor state, not projects
            }
            projects.push(ProjectSource { id: name, root: path });
        } else {
            loose_files += 1;
        }
    }
    if projects.is_empty() {
        // A directory of source files is a corpus of one.
        let id = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .filter(|n| !n.is_empty())
            .unwrap_or_else(|| "project".into());
        projects.push(ProjectSource { id, root: root.clone() });
    } else if loose_files > 0 {
        diagnostics.push(Diagnostic::corpus(format!(
            "{loose_files} file(s) directly under the corpus root were ignored; projects are directories"
        )));
    }
    projects.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(projects)
}

struct ProjectAnalysis {
    report: ProjectReport,
    test_file_count: u64,
    adoption_exact: BTreeMap<PatternKind, Option<metrics::Ratio64>>,
    tp_ratio_exact: Option<metrics::Ratio64>,
    frameworks: BTreeSet<FrameworkId>,
    patterns_present: BTreeSet<PatternKind>,
    diagnostics: Vec<Diagnostic>,
}

fn analyze_project(
    project: &ProjectSource,
    catalog: &Catalog,
    config: &RunConfig,
    selected: &BTreeSet<PatternKind>,
) -> Result<ProjectAnalysis, PipelineError> {
    let options = ScanOptions { excludes: config.excludes.clone() };
    let scan = ingest::scan_project(&project.id, &project.root, catalog, &options)?;
    let mut diagnostics = scan.diagnostics;
    let files = scan.files;

    let mut test_paths: BTreeSet<String> = BTreeSet::new();
    let mut verdicts: BTreeMap<String, crate::TestVerdict> = BTreeMap::new();
    for file in &files {
        let (verdict, extra) = testdetect::vote(file, catalog);
        diagnostics.extend(extra);
        if verdict.is_test() {
            test_paths.insert(file.rel_path.clone());
        }
        verdicts.insert(file.rel_path.clone(), verdict);
    }

    // Per-file patterns over the test files.
    let mut file_hits: BTreeMap<String, Vec<PatternHit>> = BTreeMap::new();
    let mut evaluable: BTreeMap<PatternKind, u64> = BTreeMap::new();
    let mut files_with: BTreeMap<PatternKind, u64> = BTreeMap::new();
    for kind in selected {
        evaluable.insert(*kind, 0);
        files_with.insert(*kind, 0);
    }
    for file in &files {
        if !test_paths.contains(&file.rel_path) {
            continue;
        }
        for kind in [
            PatternKind::AssertionMessage,
            PatternKind::SimpleTest,
            PatternKind::ImplicitTeardown,
        ] {
            if !selected.contains(&kind) || !patterns::file_evaluable(kind, file, catalog) {
                continue;
            }
            *evaluable.get_mut(&kind).expect("kind selected") += 1;
            let (hit, extra) = detect_single_file(kind, file, catalog);
            diagnostics.extend(extra);
            if let Some(hit) = hit {
                *files_with.get_mut(&kind).expect("kind selected") += 1;
                file_hits.entry(file.rel_path.clone()).or_default().push(hit);
            }
        }
    }
    if selected.contains(&PatternKind::TestcaseClassPerClass) {
        let analysis = patterns::detect_tccpc(&files, &test_paths, config.tccpc_mode);
        diagnostics.extend(analysis.diagnostics);
        let kind = PatternKind::TestcaseClassPerClass;
        *evaluable.get_mut(&kind).expect("kind selected") = analysis.evaluable.len() as u64;
        *files_with.get_mut(&kind).expect("kind selected") = analysis.hits.len() as u64;
        for (path, hit) in analysis.hits {
            file_hits.entry(path).or_default().push(hit);
        }
    }

    // Line counts and language totals.
    let mut test_loc = 0u64;
    let mut production_loc = 0u64;
    let mut total_loc = 0u64;
    let mut classified_files = 0u64;
    let mut language_loc: BTreeMap<LanguageId, u64> = BTreeMap::new();
    for file in &files {
        total_loc += u64::from(file.code_lines);
        if let Some(language) = &file.language {
            classified_files += 1;
            *language_loc.entry(language.clone()).or_default() += u64::from(file.code_lines);
            if test_paths.contains(&file.rel_path) {
                test_loc += u64::from(file.code_lines);
            } else {
                production_loc += u64::from(file.code_lines);
            }
        }
    }
    let dominant_language = language_loc
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(language, _)| language.clone());

    let tp_ratio_exact = metrics::tp_ratio(test_loc, production_loc);
    let mut adoption_exact = BTreeMap::new();
    let mut pattern_stats: BTreeMap<PatternKind, PatternStat> = BTreeMap::new();
    for kind in selected {
        let with = files_with[kind];
        let evaluable_count = evaluable[kind];
        let adoption = metrics::adoption_ratio(*kind, with, evaluable_count)?;
        adoption_exact.insert(*kind, adoption);
        pattern_stats.insert(
            *kind,
            PatternStat { files: with, evaluable: evaluable_count, adoption: ratio_out(adoption) },
        );
    }

    let mut frameworks: BTreeSet<FrameworkId> = BTreeSet::new();
    for path in &test_paths {
        frameworks.extend(verdicts[path].frameworks().iter().cloned());
    }
    let patterns_present: BTreeSet<PatternKind> =
        selected.iter().copied().filter(|kind| files_with[kind] > 0).collect();
    let qa: Vec<QaSatisfaction> = metrics::qa_satisfaction(&patterns_present);

    let mut test_file_details = Vec::new();
    for path in &test_paths {
        let verdict = &verdicts[path];
        let file = files
            .iter()
            .find(|f| &f.rel_path == path)
            .expect("test path came from this file list");
        let mut hits = file_hits.remove(path).unwrap_or_default();
        hits.sort();
        test_file_details.push(TestFileDetail {
            path: path.clone(),
            language: file
                .language
                .as_ref()
                .map(|l| l.as_str().to_string())
                .unwrap_or_default(),
            frameworks: verdict.frameworks().iter().map(|f| f.as_str().to_string()).collect(),
            keyword_hits: config.explain.then(|| verdict.keyword_hits().to_vec()),
            patterns: hits,
        });
    }

    let report = ProjectReport {
        id: project.id.clone(),
        dominant_language: dominant_language.as_ref().map(|l| l.as_str().to_string()),
        size_class: classify_size(total_loc),
        total_files: files.len() as u64,
        classified_files,
        test_files: test_paths.len() as u64,
        production_files: classified_files - test_paths.len() as u64,
        test_loc,
        production_loc,
        total_loc,
        tp_ratio: ratio_out(tp_ratio_exact),
        frameworks: frameworks.iter().map(|f| f.as_str().to_string()).collect(),
        patterns: pattern_stats,
        qa: qa.clone(),
        test_file_details,
    };
    Ok(ProjectAnalysis {
        test_file_count: test_paths.len() as u64,
        adoption_exact,
        tp_ratio_exact,
        frameworks,
        patterns_present,
        diagnostics,
        report,
    })
}

fn detect_single_file(
    kind: PatternKind,
    file: &SourceFile,
    catalog: &Catalog,
) -> (Option<PatternHit>, Vec<Diagnostic>) {
    match kind {
        PatternKind::AssertionMessage => patterns::detect_assertion_message(file, catalog),
        PatternKind::SimpleTest => patterns::detect_simple_test(file, catalog),
        PatternKind::ImplicitTeardown => patterns::detect_implicit_teardown(file, catalog),
        PatternKind::TestcaseClassPerClass => (None, vec![]),
    }
}

fn average_ratio(ratios: &[metrics::Ratio64]) -> Option<String> {
    if ratios.is_empty() {
        return None;
    }
    let sum: f64 = ratios
        .iter()
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .sum();
    Some(metrics::round_f64_4dp(sum / ratios.len() as f64))
}

fn summarize(
    projects: &[ProjectAnalysis],
    catalog: &Catalog,
    selected: &BTreeSet<PatternKind>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<CorpusSummary, PipelineError> {
    let projects_with_tests = projects.iter().filter(|p| p.test_file_count > 0).count() as u64;

    // Size-class table, in ascending size order.
    let mut size_classes = Vec::new();
    for class in crate::ingest::SizeClass::ALL {
        let members: Vec<&ProjectAnalysis> =
            projects.iter().filter(|p| p.report.size_class == class).collect();
        let ratios: Vec<metrics::Ratio64> =
            members.iter().filter_map(|p| p.tp_ratio_exact).collect();
        size_classes.push(SizeClassStat {
            size_class: class,
            projects: members.len() as u64,
            projects_with_tests: members.iter().filter(|p| p.test_file_count > 0).count() as u64,
            average_tp_ratio: average_ratio(&ratios),
        });
    }
    let all_ratios: Vec<metrics::Ratio64> =
        projects.iter().filter_map(|p| p.tp_ratio_exact).collect();

    // Framework usage and language pools (dominant language per project).
    let mut usage: BTreeMap<FrameworkId, u64> = BTreeMap::new();
    for project in projects {
        for framework in &project.frameworks {
            *usage.entry(framework.clone()).or_default() += 1;
        }
    }
    let mut language_pools: BTreeMap<LanguageId, u64> = BTreeMap::new();
    for project in projects {
        if let Some(language) = &project.report.dominant_language {
            *language_pools.entry(LanguageId(language.clone())).or_default() += 1;
        }
    }
    let (frequencies, frequency_diags) =
        metrics::normalized_framework_frequency(&usage, &language_pools, catalog);
    diagnostics.extend(frequency_diags);
    let frameworks = frequencies
        .into_iter()
        .map(|f| FrameworkRow {
            id: f.id.as_str().to_string(),
            name: f.display_name,
            projects: f.projects,
            language_pool: f.language_pool,
            frequency: f.frequency.map(RatioOut::from),
        })
        .collect();

    // Pattern aggregates: corpus adoption pools every evaluable file.
    let mut pattern_rows = Vec::new();
    for kind in selected {
        let mut files_with = 0u64;
        let mut evaluable = 0u64;
        let mut projects_with = 0u64;
        for project in projects {
            let stat = &project.report.patterns[kind];
            files_with += stat.files;
            evaluable += stat.evaluable;
            if stat.files > 0 {
                projects_with += 1;
            }
        }
        let adoption = metrics::adoption_ratio(*kind, files_with, evaluable)?;
        pattern_rows.push(PatternRow {
            pattern: *kind,
            projects_with,
            files_with,
            evaluable_files: evaluable,
            adoption: ratio_out(adoption),
        });
    }

    // Quality attributes over projects that have test files.
    let mut qa_rows = Vec::new();
    for attribute in metrics::QualityAttribute::ALL {
        let linked: Vec<PatternKind> = attribute
            .linked_patterns()
            .iter()
            .copied()
            .filter(|kind| selected.contains(kind))
            .collect();
        let mut any_projects = 0u64;
        let mut all_projects = 0u64;
        for project in projects.iter().filter(|p| p.test_file_count > 0) {
            let present =
                |kind: &PatternKind| project.patterns_present.contains(kind);
            if !linked.is_empty() && linked.iter().any(present) {
                any_projects += 1;
            }
            if !linked.is_empty() && linked.iter().all(present) {
                all_projects += 1;
            }
        }
        let percent = |count: u64| -> Option<String> {
            (projects_with_tests > 0)
                .then(|| metrics::round_ratio_4dp(metrics::Ratio64::new(count * 100, projects_with_tests)))
        };
        qa_rows.push(QaRow {
            attribute,
            any_projects,
            all_projects,
            denominator: projects_with_tests,
            any_percent: percent(any_projects),
            all_percent: percent(all_projects),
        });
    }

    Ok(CorpusSummary {
        projects_analyzed: projects.len() as u64,
        projects_with_tests,
        dropped: Vec::new(),
        average_tp_ratio: average_ratio(&all_ratios),
        size_classes,
        frameworks,
        patterns: pattern_rows,
        qa: qa_rows,
    })
}

fn fit_regression(
    projects: &[ProjectAnalysis],
    selected: &BTreeSet<PatternKind>,
    notes: &mut Vec<String>,
) -> Option<RegressionReport> {
    if selected.len() != PatternKind::ALL.len() {
        notes.push("regression skipped: it needs all four patterns enabled".into());
        return None;
    }
    let mut observations = Vec::new();
    let mut dropped = 0u64;
    for project in projects {
        let ratio = |kind: PatternKind| -> Option<f64> {
            project.adoption_exact.get(&kind).copied().flatten().map(|r| {
                *r.numer() as f64 / *r.denom() as f64
            })
        };
        let adoption = [
            ratio(PatternKind::SimpleTest),
            ratio(PatternKind::TestcaseClassPerClass),
            ratio(PatternKind::AssertionMessage),
            ratio(PatternKind::ImplicitTeardown),
        ];
        if adoption.iter().any(Option::is_none) {
            dropped += 1;
            continue;
        }
        observations.push(RegressionObservation {
            project_id: project.report.id.clone(),
            test_files: project.test_file_count as f64,
            adoption: adoption.map(|a| a.expect("checked above")),
            total_loc: project.report.total_loc as f64,
        });
    }
    match fit_test_count_model(&observations) {
        Ok(result) => Some(RegressionReport { result, dropped_observations: dropped }),
        Err(OlsError::TooFewObservations { have, need }) => {
            notes.push(format!(
                "regression skipped: {have} usable project(s), {need} needed ({dropped} had undefined adoption)"
            ));
            None
        }
        Err(err) => {
            notes.push(format!("regression failed: {err}"));
            None
        }
    }
}
