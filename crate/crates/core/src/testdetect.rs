//! Test-file detection.
//!
//! A file is a test file exactly when two independent conditions both
//! hold: some framework registered for the file's language has an import
//! match (condition 1), and at least one testing keyword for that
//! language occurs (condition 2). Either signal alone is never enough —
//! a production file calling `assert` stays production, and a file that
//! merely imports JUnit without exercising it stays production. File
//! names play no part in the vote.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::catalog::{Catalog, FrameworkId};
use crate::diagnostics::Diagnostic;
use crate::ingest::SourceFile;

/// One testing-keyword occurrence: which catalog token fired and where.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct KeywordHit {
    /// Catalog-source spelling of the token (literal text or pattern).
    pub token: String,
    /// 1-based line of the occurrence.
    pub line: u32,
}

/// The vote outcome for one file.
///
/// Fields are private so a verdict can only be built through the vote,
/// which guarantees `is_test == framework_import && keyword_found`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestVerdict {
    framework_import: bool,
    keyword_found: bool,
    is_test: bool,
    frameworks: BTreeSet<FrameworkId>,
    keyword_hits: Vec<KeywordHit>,
}

impl TestVerdict {
    fn from_parts(frameworks: BTreeSet<FrameworkId>, keyword_hits: Vec<KeywordHit>) -> Self {
        let framework_import = !frameworks.is_empty();
        let keyword_found = !keyword_hits.is_empty();
        TestVerdict {
            framework_import,
            keyword_found,
            is_test: framework_import && keyword_found,
            frameworks,
            keyword_hits,
        }
    }

    /// Verdict for a file that cannot be a test (unknown language, binary).
    pub fn negative() -> Self {
        TestVerdict::from_parts(BTreeSet::new(), Vec::new())
    }

    /// Condition 1: a registered framework import was found.
    pub fn framework_import(&self) -> bool {
        self.framework_import
    }

    /// Condition 2: a testing keyword was found.
    pub fn keyword_found(&self) -> bool {
        self.keyword_found
    }

    /// The conjunction of the two conditions.
    pub fn is_test(&self) -> bool {
        self.is_test
    }

    /// Frameworks whose import matched, sorted by id.
    pub fn frameworks(&self) -> &BTreeSet<FrameworkId> {
        &self.frameworks
    }

    /// Every keyword occurrence, sorted by line then token.
    pub fn keyword_hits(&self) -> &[KeywordHit] {
        &self.keyword_hits
    }
}

fn analyze(
    file: &SourceFile,
    catalog: &Catalog,
    want_imports: bool,
    want_keywords: bool,
) -> (BTreeSet<FrameworkId>, Vec<KeywordHit>, Vec<Diagnostic>) {
    let mut frameworks = BTreeSet::new();
    let mut hits = Vec::new();
    let mut bad_lines = 0u32;

    let Some(language) = &file.language else {
        return (frameworks, hits, Vec::new());
    };
    let candidates = if want_imports { catalog.frameworks_for_language(language) } else { Vec::new() };
    let tokens = if want_keywords { catalog.vote_tokens(language) } else { &[] };

    for (line_no, line) in file.lines() {
        let Ok(line) = line else {
            bad_lines += 1;
            continue;
        };
        for framework in &candidates {
            if frameworks.contains(&framework.id) {
                continue;
            }
            if catalog.import_matchers(&framework.id).iter().any(|re| re.is_match(line)) {
                frameworks.insert(framework.id.clone());
            }
        }
        for token in tokens {
            if token.matches(line) {
                hits.push(KeywordHit { token: token.source().to_string(), line: line_no });
            }
        }
    }

    hits.sort();
    hits.dedup();
    let mut diagnostics = Vec::new();
    if bad_lines > 0 {
        diagnostics.push(Diagnostic::file(
            file.project_id.clone(),
            file.rel_path.clone(),
            format!("skipped {bad_lines} line(s) that are not valid UTF-8"),
        ));
    }
    (frameworks, hits, diagnostics)
}

/// Condition 1 alone: frameworks whose import regex matches some line.
pub fn check_framework_import(file: &SourceFile, catalog: &Catalog) -> BTreeSet<FrameworkId> {
    analyze(file, catalog, true, false).0
}

/// Condition 2 alone: every testing-keyword occurrence.
pub fn check_keywords(file: &SourceFile, catalog: &Catalog) -> Vec<KeywordHit> {
    analyze(file, catalog, false, true).1
}

/// Run the full two-condition vote over one file.
pub fn vote(file: &SourceFile, catalog: &Catalog) -> (TestVerdict, Vec<Diagnostic>) {
    let (frameworks, hits, diagnostics) = analyze(file, catalog, true, true);
    (TestVerdict::from_parts(frameworks, hits), diagnostics)
}
