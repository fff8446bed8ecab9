//! Maintainability-pattern detectors.
//!
//! Four xUnit patterns are recognized in test files:
//!
//! * **Assertion Message** — an assertion whose last argument is a string
//!   literal (three signature shapes, see [`assertions::MessageForm`]).
//! * **Simple Test** — a test method exercising exactly one assertion.
//! * **Implicit Teardown** — a teardown hook together with a removal verb
//!   (`remove`/`destroy`) somewhere in the file.
//! * **Testcase Class Per Class** — a test file paired one-to-one with a
//!   single production class through the project's reference graph
//!   (see [`tccpc`]).
//!
//! The first three are per-file decisions; the fourth needs whole-project
//! context. Every hit carries line-level evidence.

pub mod assertions;
pub mod methods;
pub mod tccpc;

pub use assertions::{scan_assertions, AssertionSite, MessageForm};
pub use methods::{segment_test_methods, TestMethod};
pub use tccpc::{detect_tccpc, supports_language, TccpcAnalysis, TccpcMode};

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::catalog::Catalog;
use crate::diagnostics::Diagnostic;
use crate::ingest::SourceFile;

use assertions::excerpt_of;

/// The four detected patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    AssertionMessage,
    SimpleTest,
    ImplicitTeardown,
    TestcaseClassPerClass,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [
        PatternKind::AssertionMessage,
        PatternKind::SimpleTest,
        PatternKind::ImplicitTeardown,
        PatternKind::TestcaseClassPerClass,
    ];

    /// Stable snake_case key used in reports and CLI flags.
    pub const fn key(self) -> &'static str {
        match self {
            PatternKind::AssertionMessage => "assertion_message",
            PatternKind::SimpleTest => "simple_test",
            PatternKind::ImplicitTeardown => "implicit_teardown",
            PatternKind::TestcaseClassPerClass => "testcase_class_per_class",
        }
    }

    /// Human-readable name for text output.
    pub fn display_name(self) -> &'static str {
        match self {
            PatternKind::AssertionMessage => "Assertion Message",
            PatternKind::SimpleTest => "Simple Test",
            PatternKind::ImplicitTeardown => "Implicit Teardown",
            PatternKind::TestcaseClassPerClass => "Testcase Class Per Class",
        }
    }
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| format!("unknown pattern `{s}`"))
    }
}

/// One piece of line-level evidence for a pattern hit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Evidence {
    pub line: u32,
    pub excerpt: String,
    /// What the line proves, e.g. `message-bearing assertion (boolean_assert)`.
    pub detail: String,
}

/// A detected pattern in one test file, with its evidence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PatternHit {
    pub kind: PatternKind,
    pub evidence: Vec<Evidence>,
}

/// Whether `file` can be judged for `kind` at all. Files that cannot be
/// judged are excluded from the pattern's adoption denominator.
pub fn file_evaluable(kind: PatternKind, file: &SourceFile, catalog: &Catalog) -> bool {
    let Some(language) = &file.language else {
        return false;
    };
    match kind {
        // Without assertion callees for the language there is nothing to
        // count, so absence would be meaningless rather than negative.
        PatternKind::AssertionMessage | PatternKind::SimpleTest => {
            !catalog.assertion_callees(language).is_empty()
        }
        // The universal `teardown` marker applies to any language.
        PatternKind::ImplicitTeardown => true,
        PatternKind::TestcaseClassPerClass => tccpc::supports_language(language),
    }
}

/// Detect Assertion Message: any assertion site whose last argument is a
/// string literal.
pub fn detect_assertion_message(
    file: &SourceFile,
    catalog: &Catalog,
) -> (Option<PatternHit>, Vec<Diagnostic>) {
    let (sites, diagnostics) = scan_assertions(file, catalog);
    let evidence: Vec<Evidence> = sites
        .iter()
        .filter_map(|site| {
            site.message_form().map(|form| Evidence {
                line: site.line,
                excerpt: site.excerpt.clone(),
                detail: format!("message-bearing assertion ({})", form.label()),
            })
        })
        .collect();
    let hit = (!evidence.is_empty())
        .then_some(PatternHit { kind: PatternKind::AssertionMessage, evidence });
    (hit, diagnostics)
}

/// Detect Simple Test: a test method containing exactly one assertion.
///
/// When no test method can be segmented, the whole file is treated as one
/// unit (reported as a diagnostic): it is simple exactly when it contains
/// exactly one assertion.
pub fn detect_simple_test(
    file: &SourceFile,
    catalog: &Catalog,
) -> (Option<PatternHit>, Vec<Diagnostic>) {
    let (sites, mut diagnostics) = scan_assertions(file, catalog);
    let methods = segment_test_methods(file, catalog);

    if methods.is_empty() {
        diagnostics.push(Diagnostic::file(
            file.project_id.clone(),
            file.rel_path.clone(),
            "no test methods recognized; judging the whole file as one unit",
        ));
        if sites.len() == 1 {
            let site = &sites[0];
            let hit = PatternHit {
                kind: PatternKind::SimpleTest,
                evidence: vec![Evidence {
                    line: site.line,
                    excerpt: site.excerpt.clone(),
                    detail: "whole file contains exactly one assertion".into(),
                }],
            };
            return (Some(hit), diagnostics);
        }
        return (None, diagnostics);
    }

    let mut evidence = Vec::new();
    for method in &methods {
        let in_method: Vec<&assertions::AssertionSite> =
            sites.iter().filter(|s| method.contains(s.line)).collect();
        if let [site] = in_method.as_slice() {
            evidence.push(Evidence {
                line: method.start_line,
                excerpt: method.name.clone(),
                detail: format!("exactly one assertion (line {})", site.line),
            });
        }
    }
    let hit =
        (!evidence.is_empty()).then_some(PatternHit { kind: PatternKind::SimpleTest, evidence });
    (hit, diagnostics)
}

fn removal_verb_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(remove|destroy)\b").expect("removal regex compiles"))
}

/// Detect Implicit Teardown: a teardown hook (the case-insensitive
/// substring `teardown`, or a catalog teardown marker) plus a removal
/// verb (`remove`/`destroy` as whole words) anywhere in the file.
pub fn detect_implicit_teardown(
    file: &SourceFile,
    catalog: &Catalog,
) -> (Option<PatternHit>, Vec<Diagnostic>) {
    let markers: &[String] = file
        .language
        .as_ref()
        .and_then(|l| catalog.keyword_set(l))
        .map(|s| s.teardown_markers.as_slice())
        .unwrap_or(&[]);

    let mut marker_evidence: Option<Evidence> = None;
    let mut removal_evidence: Option<Evidence> = None;
    for (line_no, line) in file.lines() {
        let Ok(line) = line else { continue };
        if marker_evidence.is_none() {
            let lowered = line.to_lowercase();
            let hit_builtin = lowered.contains("teardown");
            let hit_marker = markers.iter().any(|m| line.contains(m.as_str()));
            if hit_builtin || hit_marker {
                marker_evidence = Some(Evidence {
                    line: line_no,
                    excerpt: excerpt_of(line),
                    detail: "teardown hook".into(),
                });
            }
        }
        if removal_evidence.is_none() {
            if let Some(m) = removal_verb_regex().find(line) {
                removal_evidence = Some(Evidence {
                    line: line_no,
                    excerpt: excerpt_of(line),
                    detail: format!("removal verb `{}`", m.as_str().to_lowercase()),
                });
            }
        }
        if marker_evidence.is_some() && removal_evidence.is_some() {
            break;
        }
    }

    let hit = match (marker_evidence, removal_evidence) {
        (Some(marker), Some(removal)) => Some(PatternHit {
            kind: PatternKind::ImplicitTeardown,
            evidence: vec![marker, removal],
        }),
        _ => None,
    };
    (hit, Vec::new())
}
