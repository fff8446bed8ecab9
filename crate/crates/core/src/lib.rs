//! Core analysis library for `testpat`.
//!
//! Detects test files and unit-testing frameworks across multi-language
//! source trees, finds four xUnit maintainability patterns (Assertion
//! Message, Simple Test, Implicit Teardown, Testcase Class Per Class),
//! and computes the derived project metrics: test-to-production ratio,
//! per-pattern adoption ratios, normalized framework frequency, quality
//! attribute satisfaction, and an optional least-squares regression of
//! test-file counts on pattern adoption.
//!
//! The pipeline is catalog-driven: every framework matcher and testing
//! keyword lives in a declarative [`catalog::Catalog`] document, never in
//! code. See `catalog/default.toml` for the bundled registry.

pub mod catalog;
pub mod diagnostics;
pub mod ingest;
pub mod metrics;
pub mod patterns;
pub mod pipeline;
pub mod report;
pub mod testdetect;

pub use catalog::{Catalog, FrameworkId, FrameworkSpec, KeywordSet, LanguageId};
pub use diagnostics::Diagnostic;
pub use ingest::{ProjectSource, SizeClass, SourceFile};
pub use metrics::{ProjectMetrics, RegressionResult};
pub use patterns::{PatternHit, PatternKind};
pub use report::CorpusSummary;
pub use testdetect::TestVerdict;
