//! Report assembly and rendering.
//!
//! One [`Report`] value feeds all three output formats. Everything in it
//! is deterministically ordered (BTree maps, pre-sorted vectors) and all
//! ratios are carried as exact numerator/denominator pairs next to a
//! fixed 4-decimal half-even rounding, so rendering the same corpus twice
//! yields byte-identical output. Reports carry no timestamps or host
//! details for the same reason.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diagnostics::Diagnostic;
use crate::ingest::{DroppedProject, SizeClass};
use crate::metrics::{
    round_ratio_4dp, QaSatisfaction, QualityAttribute, Ratio64, RegressionResult,
};
use crate::patterns::{PatternHit, PatternKind};
use crate::testdetect::KeywordHit;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// An exact ratio with its fixed-precision rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioOut {
    /// Numerator of the reduced fraction.
    pub numerator: u64,
    /// Denominator of the reduced fraction.
    pub denominator: u64,
    /// Four decimals, ties to even.
    pub rounded: String,
}

impl From<Ratio64> for RatioOut {
    fn from(ratio: Ratio64) -> Self {
        RatioOut {
            numerator: *ratio.numer(),
            denominator: *ratio.denom(),
            rounded: round_ratio_4dp(ratio),
        }
    }
}

/// Ratio column helper: `None` renders as JSON `null` / empty CSV cell.
pub fn ratio_out(ratio: Option<Ratio64>) -> Option<RatioOut> {
    ratio.map(RatioOut::from)
}

/// The full analysis result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool_version: &'static str,
    pub catalog_version: String,
    /// Run-level remarks (e.g. why a requested regression was skipped).
    pub notes: Vec<String>,
    pub corpus: CorpusSummary,
    pub projects: Vec<ProjectReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionReport>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Corpus-level aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub projects_analyzed: u64,
    pub projects_with_tests: u64,
    pub dropped: Vec<DroppedProject>,
    /// Mean of the defined per-project test-to-production ratios.
    pub average_tp_ratio: Option<String>,
    pub size_classes: Vec<SizeClassStat>,
    /// Sorted by descending normalized frequency.
    pub frameworks: Vec<FrameworkRow>,
    pub patterns: Vec<PatternRow>,
    pub qa: Vec<QaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeClassStat {
    pub size_class: SizeClass,
    pub projects: u64,
    pub projects_with_tests: u64,
    pub average_tp_ratio: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameworkRow {
    pub id: String,
    pub name: String,
    /// Projects with at least one test file matching the framework.
    pub projects: u64,
    /// Projects whose dominant language is one of the framework's.
    pub language_pool: u64,
    pub frequency: Option<RatioOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternRow {
    pub pattern: PatternKind,
    pub projects_with: u64,
    pub files_with: u64,
    pub evaluable_files: u64,
    /// Corpus-level adoption: summed hits over summed evaluable files.
    pub adoption: Option<RatioOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaRow {
    pub attribute: QualityAttribute,
    /// Projects satisfying the attribute through at least one linked
    /// pattern / through all linked patterns.
    pub any_projects: u64,
    pub all_projects: u64,
    /// Projects with at least one test file (the percentage base).
    pub denominator: u64,
    pub any_percent: Option<String>,
    pub all_percent: Option<String>,
}

/// Fitted regression plus how many projects could not contribute a row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    #[serde(flatten)]
    pub result: RegressionResult,
    /// Projects excluded because an adoption ratio was undefined.
    pub dropped_observations: u64,
}

/// One analyzed project.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectReport {
    pub id: String,
    pub dominant_language: Option<String>,
    pub size_class: SizeClass,
    pub total_files: u64,
    pub classified_files: u64,
    pub test_files: u64,
    pub production_files: u64,
    pub test_loc: u64,
    pub production_loc: u64,
    pub total_loc: u64,
    pub tp_ratio: Option<RatioOut>,
    pub frameworks: Vec<String>,
    pub patterns: BTreeMap<PatternKind, PatternStat>,
    pub qa: Vec<QaSatisfaction>,
    pub test_file_details: Vec<TestFileDetail>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternStat {
    pub files: u64,
    pub evaluable: u64,
    pub adoption: Option<RatioOut>,
}

/// Per-test-file evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestFileDetail {
    pub path: String,
    pub language: String,
    pub frameworks: Vec<String>,
    /// Included when the run asks for vote evidence (`--explain`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyword_hits: Option<Vec<KeywordHit>>,
    pub patterns: Vec<PatternHit>,
}

/// Render as pretty JSON, newline-terminated.
pub fn render_json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

fn ratio_cell(ratio: &Option<RatioOut>) -> String {
    ratio.as_ref().map(|r| r.rounded.clone()).unwrap_or_default()
}

/// Render one row per project as CSV with a fixed header.
pub fn render_csv(report: &Report) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "project".to_string(),
        "dominant_language".into(),
        "size_class".into(),
        "total_files".into(),
        "classified_files".into(),
        "test_files".into(),
        "production_files".into(),
        "test_loc".into(),
        "production_loc".into(),
        "total_loc".into(),
        "tp_ratio".into(),
        "frameworks".into(),
    ];
    for kind in PatternKind::ALL {
        header.push(format!("{}_files", kind.key()));
        header.push(format!("{}_evaluable", kind.key()));
        header.push(format!("{}_adoption", kind.key()));
    }
    writer.write_record(&header).expect("csv header writes");

    for project in &report.projects {
        let mut row = vec![
            project.id.clone(),
            project.dominant_language.clone().unwrap_or_default(),
            project.size_class.label().replace(' ', "_"),
            project.total_files.to_string(),
            project.classified_files.to_string(),
            project.test_files.to_string(),
            project.production_files.to_string(),
            project.test_loc.to_string(),
            project.production_loc.to_string(),
            project.total_loc.to_string(),
            ratio_cell(&project.tp_ratio),
            project.frameworks.join(";"),
        ];
        for kind in PatternKind::ALL {
            match project.patterns.get(&kind) {
                Some(stat) => {
                    row.push(stat.files.to_string());
                    row.push(stat.evaluable.to_string());
                    row.push(ratio_cell(&stat.adoption));
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        writer.write_record(&row).expect("csv row writes");
    }
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("csv is utf-8")
}

fn push_table(out: &mut String, headers: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>, out: &mut String| {
        let mut parts = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            parts.push(format!("{cell:<width$}", width = widths[i]));
        }
        out.push_str("  ");
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(headers.iter().map(|h| h.to_string()).collect(), out);
    for row in rows {
        line(row.clone(), out);
    }
}

/// Render a human-readable summary.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "testpat report (catalog {}, schema {})\n\n",
        report.catalog_version, report.schema_version
    ));
    let corpus = &report.corpus;
    out.push_str(&format!(
        "Projects analyzed: {} ({} with test files, {} dropped)\n",
        corpus.projects_analyzed,
        corpus.projects_with_tests,
        corpus.dropped.len()
    ));
    if let Some(avg) = &corpus.average_tp_ratio {
        out.push_str(&format!("Average test/production LOC ratio: {avg}\n"));
    }
    out.push('\n');

    out.push_str("Size classes:\n");
    let rows: Vec<Vec<String>> = corpus
        .size_classes
        .iter()
        .map(|s| {
            vec![
                s.size_class.label().to_string(),
                s.projects.to_string(),
                s.projects_with_tests.to_string(),
                s.average_tp_ratio.clone().unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    push_table(&mut out, &["class", "projects", "with tests", "avg tp ratio"], &rows);
    out.push('\n');

    if !corpus.frameworks.is_empty() {
        out.push_str("Frameworks (normalized by language pool):\n");
        let rows: Vec<Vec<String>> = corpus
            .frameworks
            .iter()
            .map(|f| {
                vec![
                    f.name.clone(),
                    f.projects.to_string(),
                    f.language_pool.to_string(),
                    f.frequency.as_ref().map(|r| r.rounded.clone()).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        push_table(&mut out, &["framework", "projects", "pool", "frequency"], &rows);
        out.push('\n');
    }

    out.push_str("Patterns:\n");
    let rows: Vec<Vec<String>> = corpus
        .patterns
        .iter()
        .map(|p| {
            vec![
                p.pattern.display_name().to_string(),
                p.projects_with.to_string(),
                p.files_with.to_string(),
                p.evaluable_files.to_string(),
                p.adoption.as_ref().map(|r| r.rounded.clone()).unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    push_table(
        &mut out,
        &["pattern", "projects", "files", "evaluable", "adoption"],
        &rows,
    );
    out.push('\n');

    out.push_str("Quality attributes (share of projects with test files):\n");
    let rows: Vec<Vec<String>> = corpus
        .qa
        .iter()
        .map(|q| {
            vec![
                q.attribute.display_name().to_string(),
                q.any_percent.clone().map(|p| format!("{p}%")).unwrap_or_else(|| "-".into()),
                q.all_percent.clone().map(|p| format!("{p}%")).unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    push_table(&mut out, &["attribute", "any pattern", "all patterns"], &rows);
    out.push('\n');

    if let Some(regression) = &report.regression {
        out.push_str(&format!(
            "Regression of test-file count ({} observations, {} dropped, df {}):\n",
            regression.result.observations,
            regression.dropped_observations,
            regression.result.residual_df
        ));
        let rows: Vec<Vec<String>> = regression
            .result
            .terms
            .iter()
            .map(|t| {
                vec![
                    t.name.clone(),
                    format!("{:+.4e}", t.coefficient),
                    format!("{:.4e}", t.std_error),
                    format!("{:+.3}", t.t_value),
                    format!("{:.4e}", t.p_value),
                ]
            })
            .collect();
        push_table(&mut out, &["term", "coefficient", "std error", "t", "p"], &rows);
        if let Some(r2) = regression.result.r_squared {
            out.push_str(&format!("  r-squared: {r2:.6}\n"));
        }
        out.push('\n');
    }

    out.push_str("Projects:\n");
    let rows: Vec<Vec<String>> = report
        .projects
        .iter()
        .map(|p| {
            vec![
                p.id.clone(),
                p.dominant_language.clone().unwrap_or_else(|| "-".into()),
                p.size_class.label().to_string(),
                p.test_files.to_string(),
                p.production_files.to_string(),
                p.tp_ratio.as_ref().map(|r| r.rounded.clone()).unwrap_or_else(|| "-".into()),
                p.frameworks.join(";"),
            ]
        })
        .collect();
    push_table(
        &mut out,
        &["project", "language", "size", "test files", "prod files", "tp ratio", "frameworks"],
        &rows,
    );

    for note in &report.notes {
        out.push_str(&format!("\nnote: {note}\n"));
    }
    if !report.diagnostics.is_empty() {
        out.push_str(&format!("\nDiagnostics ({}):\n", report.diagnostics.len()));
        for diagnostic in &report.diagnostics {
            out.push_str(&format!("  {diagnostic}\n"));
        }
    }
    out
}
