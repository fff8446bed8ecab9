//! Project and corpus metrics.
//!
//! Ratios are exact rationals until the moment they are printed, where a
//! fixed 4-decimal half-even rounding applies, so repeated runs and
//! different worker counts can never disagree on a digit. Ratios with a
//! zero denominator are undefined (`None`), never zero, never an error.

pub mod ols;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::catalog::{Catalog, FrameworkId, LanguageId};
use crate::diagnostics::Diagnostic;
use crate::ingest::SizeClass;
use crate::patterns::PatternKind;

pub use ols::{
    fit_test_count_model, OlsError, RegressionObservation, RegressionResult, RegressionTerm,
};

/// Exact non-negative ratio.
pub type Ratio64 = Ratio<u64>;

/// Metric preconditions that indicate a pipeline bug, not bad input.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error(
        "pattern {pattern} counts {with_pattern} files with the pattern but only {evaluable} evaluable files"
    )]
    AdoptionExceedsEvaluable {
        pattern: PatternKind,
        with_pattern: u64,
        evaluable: u64,
    },
}

/// Test-to-production LOC ratio; undefined when there is no production
/// code.
pub fn tp_ratio(test_loc: u64, production_loc: u64) -> Option<Ratio64> {
    (production_loc > 0).then(|| Ratio64::new(test_loc, production_loc))
}

/// Share of evaluable test files exhibiting a pattern; undefined when
/// nothing was evaluable. More hits than evaluable files is impossible by
/// construction, so it is reported as an error rather than clamped.
pub fn adoption_ratio(
    pattern: PatternKind,
    with_pattern: u64,
    evaluable: u64,
) -> Result<Option<Ratio64>, MetricsError> {
    if evaluable == 0 {
        return Ok(None);
    }
    if with_pattern > evaluable {
        return Err(MetricsError::AdoptionExceedsEvaluable { pattern, with_pattern, evaluable });
    }
    Ok(Some(Ratio64::new(with_pattern, evaluable)))
}

/// One framework's corpus frequency, normalized by the combined project
/// pool of the framework's languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkFrequency {
    pub id: FrameworkId,
    pub display_name: String,
    /// Projects using the framework.
    pub projects: u64,
    /// Combined count of projects whose dominant language is one of the
    /// framework's languages.
    pub language_pool: u64,
    /// `projects / language_pool`; undefined on an empty pool.
    pub frequency: Option<Ratio64>,
}

/// Normalize per-framework usage counts against their language pools and
/// order by descending frequency (exact comparison), then id. Frameworks
/// whose pool is empty sort last and carry a diagnostic.
pub fn normalized_framework_frequency(
    usage: &BTreeMap<FrameworkId, u64>,
    language_pools: &BTreeMap<LanguageId, u64>,
    catalog: &Catalog,
) -> (Vec<FrameworkFrequency>, Vec<Diagnostic>) {
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (id, &projects) in usage {
        let Some(spec) = catalog.framework(id) else {
            diagnostics.push(Diagnostic::corpus(format!(
                "framework `{id}` is not in the active catalog; usage not normalized"
            )));
            continue;
        };
        let pool: u64 = spec
            .languages
            .iter()
            .map(|lang| language_pools.get(lang).copied().unwrap_or(0))
            .sum();
        let frequency = (pool > 0).then(|| Ratio64::new(projects, pool));
        if pool == 0 {
            diagnostics.push(Diagnostic::corpus(format!(
                "framework `{id}` was seen but no project has a matching dominant language; frequency undefined"
            )));
        }
        rows.push(FrameworkFrequency {
            id: id.clone(),
            display_name: spec.display_name.clone(),
            projects,
            language_pool: pool,
            frequency,
        });
    }
    rows.sort_by(|a, b| match (&b.frequency, &a.frequency) {
        (Some(fb), Some(fa)) => fb.cmp(fa).then_with(|| a.id.cmp(&b.id)),
        (Some(_), None) => std::cmp::Ordering::Greater,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (None, None) => a.id.cmp(&b.id),
    });
    (rows, diagnostics)
}

/// The three quality attributes the patterns are linked to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityAttribute {
    EaseOfModification,
    EaseOfDiagnoses,
    Comprehension,
}

impl QualityAttribute {
    pub const ALL: [QualityAttribute; 3] = [
        QualityAttribute::EaseOfModification,
        QualityAttribute::EaseOfDiagnoses,
        QualityAttribute::Comprehension,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            QualityAttribute::EaseOfModification => "Ease of Modification",
            QualityAttribute::EaseOfDiagnoses => "Ease of Diagnoses",
            QualityAttribute::Comprehension => "Comprehension",
        }
    }

    /// The patterns linked to this attribute.
    pub fn linked_patterns(self) -> &'static [PatternKind] {
        match self {
            QualityAttribute::EaseOfModification => {
                &[PatternKind::ImplicitTeardown, PatternKind::TestcaseClassPerClass]
            }
            QualityAttribute::EaseOfDiagnoses => {
                &[PatternKind::SimpleTest, PatternKind::AssertionMessage]
            }
            QualityAttribute::Comprehension => &[
                PatternKind::ImplicitTeardown,
                PatternKind::AssertionMessage,
                PatternKind::SimpleTest,
            ],
        }
    }
}

/// How far one project satisfies one quality attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QaSatisfaction {
    pub attribute: QualityAttribute,
    /// At least one linked pattern is present.
    pub any: bool,
    /// Every linked pattern is present.
    pub all: bool,
    /// Presence of each linked pattern.
    pub patterns: BTreeMap<PatternKind, bool>,
}

/// Evaluate all three attributes against the set of patterns present in a
/// project.
pub fn qa_satisfaction(present: &BTreeSet<PatternKind>) -> Vec<QaSatisfaction> {
    QualityAttribute::ALL
        .into_iter()
        .map(|attribute| {
            let linked = attribute.linked_patterns();
            let patterns: BTreeMap<PatternKind, bool> =
                linked.iter().map(|p| (*p, present.contains(p))).collect();
            QaSatisfaction {
                attribute,
                any: patterns.values().any(|v| *v),
                all: patterns.values().all(|v| *v),
                patterns,
            }
        })
        .collect()
}

/// Everything measured about one project.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectMetrics {
    pub project_id: String,
    /// Language owning the most code lines; ties go to the smaller id.
    pub dominant_language: Option<LanguageId>,
    pub total_files: u64,
    /// Files with a registered language.
    pub classified_files: u64,
    pub test_files: u64,
    /// Classified files that are not test files.
    pub production_files: u64,
    pub test_loc: u64,
    pub production_loc: u64,
    /// `test_loc + production_loc`, the regression's size control.
    pub total_loc: u64,
    pub size_class: SizeClass,
    pub tp_ratio: Option<Ratio64>,
    pub frameworks: BTreeSet<FrameworkId>,
    /// Test files exhibiting each pattern.
    pub pattern_files: BTreeMap<PatternKind, u64>,
    /// Test files each pattern could be judged on.
    pub pattern_evaluable: BTreeMap<PatternKind, u64>,
    pub adoption: BTreeMap<PatternKind, Option<Ratio64>>,
    pub qa: Vec<QaSatisfaction>,
}

/// Round an exact ratio to four decimals, ties to even, as a string.
pub fn round_ratio_4dp(ratio: Ratio64) -> String {
    let numer = *ratio.numer() as u128;
    let denom = *ratio.denom() as u128;
    let scaled = numer * 10_000;
    let mut quotient = scaled / denom;
    let remainder = scaled % denom;
    match (remainder * 2).cmp(&denom) {
        std::cmp::Ordering::Greater => quotient += 1,
        std::cmp::Ordering::Equal => {
            if quotient % 2 == 1 {
                quotient += 1;
            }
        }
        std::cmp::Ordering::Less => {}
    }
    format!("{}.{:04}", quotient / 10_000, quotient % 10_000)
}

/// Round a non-negative float to four decimals, ties to even, as a
/// string. Used only for aggregate averages; exact ratios go through
/// [`round_ratio_4dp`].
pub fn round_f64_4dp(value: f64) -> String {
    let scaled = (value * 10_000.0).round_ties_even();
    let quotient = scaled.max(0.0) as u128;
    format!("{}.{:04}", quotient / 10_000, quotient % 10_000)
}
