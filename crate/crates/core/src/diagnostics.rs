//! Non-fatal analysis diagnostics.
//!
//! Anything the pipeline can survive — an unreadable file, a line that is
//! not valid UTF-8, an assertion call that never closes its parenthesis —
//! is reported as a [`Diagnostic`] instead of aborting the run. Reports
//! carry the full sorted list so a corpus scan never silently drops input.

use serde::Serialize;

/// A single non-fatal problem encountered during analysis.
///
/// Diagnostics order by (project, path, line, message) so that report
/// output is stable regardless of worker count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    /// Project the problem belongs to, when known.
    pub project: Option<String>,
    /// Path relative to the project root, with `/` separators.
    pub path: Option<String>,
    /// 1-based line number, when the problem is tied to a line.
    pub line: Option<u32>,
    /// Human-readable description of what was skipped or assumed.
    pub message: String,
}

impl Diagnostic {
    /// Diagnostic scoped to a whole corpus or run.
    pub fn corpus(message: impl Into<String>) -> Self {
        Diagnostic { project: None, path: None, line: None, message: message.into() }
    }

    /// Diagnostic scoped to one project.
    pub fn project(project: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { project: Some(project.into()), path: None, line: None, message: message.into() }
    }

    /// Diagnostic scoped to one file.
    pub fn file(
        project: impl Into<String>,
        path: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            project: Some(project.into()),
            path: Some(path.into()),
            line: None,
            message: message.into(),
        }
    }

    /// Diagnostic scoped to one line of one file.
    pub fn line(
        project: impl Into<String>,
        path: impl Into<String>,
        line: u32,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            project: Some(project.into()),
            path: Some(path.into()),
            line: Some(line),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.project, &self.path, self.line) {
            (Some(p), Some(path), Some(line)) => {
                write!(f, "{p}:{path}:{line}: {}", self.message)
            }
            (Some(p), Some(path), None) => write!(f, "{p}:{path}: {}", self.message),
            (Some(p), None, _) => write!(f, "{p}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}
