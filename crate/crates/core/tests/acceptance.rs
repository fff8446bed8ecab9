//! End-to-end acceptance checks, one test per criterion:
//!
//! (a) test-file detection is exact on a labeled multi-language corpus,
//! (b) all four pattern detectors agree with labeled fixtures,
//! (c) metric arithmetic is exact, including bucket boundaries and
//!     zero-denominator guards,
//! (d) the regression recovers synthetic coefficients,
//! (e) output is byte-identical across runs and worker counts,
//! (f) flagging is monotone under catalog growth and pattern addition,
//! (g) a 10,000-file tree is analyzed within the time budget.
//!
//! Each test prints one `PASS (…)` line; a violated criterion panics
//! with the full disagreement list.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use testpat_core::catalog::Catalog;
use testpat_core::ingest::{classify_size, SizeClass, SourceFile};
use testpat_core::metrics::{
    adoption_ratio, fit_test_count_model, normalized_framework_frequency, qa_satisfaction,
    round_ratio_4dp, tp_ratio, MetricsError, Ratio64, RegressionObservation, RegressionResult,
};
use testpat_core::patterns::{
    detect_assertion_message, detect_implicit_teardown, detect_simple_test, detect_tccpc,
    PatternKind, TccpcMode,
};
use testpat_core::pipeline::{run, RunConfig};
use testpat_core::report::{render_json, RatioOut};
use testpat_core::testdetect::vote;
use testpat_core::{FrameworkId, LanguageId};

fn fixture_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Parse a tab-separated labels file, skipping blanks and `#` comments.
fn read_labels(path: &Path, columns: usize) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("labels file {} unreadable: {e}", path.display()));
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        assert_eq!(
            fields.len(),
            columns,
            "{}:{}: expected {columns} tab-separated fields, got {}",
            path.display(),
            idx + 1,
            fields.len()
        );
        rows.push(fields);
    }
    rows
}

/// Load one fixture file with the language the catalog assigns its path.
fn load_fixture(catalog: &Catalog, project: &str, dir: &Path, rel: &str) -> SourceFile {
    let bytes = std::fs::read(dir.join(rel))
        .unwrap_or_else(|e| panic!("fixture {rel} under {} unreadable: {e}", dir.display()));
    let language = catalog.language_of(Path::new(rel)).cloned();
    SourceFile::from_bytes(project, rel, language, bytes)
}

fn assert_ratio(actual: &Option<RatioOut>, numerator: u64, denominator: u64, rounded: &str, what: &str) {
    let actual = actual.as_ref().unwrap_or_else(|| panic!("{what}: expected a defined ratio"));
    assert_eq!(
        (actual.numerator, actual.denominator, actual.rounded.as_str()),
        (numerator, denominator, rounded),
        "{what}"
    );
}

// ---------------------------------------------------------------------
// (a) Test-file detection: 100% precision and recall on a labeled corpus
// ---------------------------------------------------------------------

#[test]
fn criterion_a_detection_exact_on_labeled_corpus() {
    let catalog = Catalog::builtin();
    let dir = fixture_root().join("detect");
    let rows = read_labels(&dir.join("labels.tsv"), 2);
    assert!(rows.len() >= 50, "need >= 50 labeled files, have {}", rows.len());

    let started = Instant::now();
    let mut languages: BTreeSet<LanguageId> = BTreeSet::new();
    let mut false_positives: Vec<String> = Vec::new();
    let mut false_negatives: Vec<String> = Vec::new();
    for row in &rows {
        let (rel, label) = (&row[0], row[1].as_str());
        assert!(
            matches!(label, "test" | "other"),
            "{rel}: unknown label `{label}`"
        );
        let file = load_fixture(catalog, "detect-fixture", &dir, rel);
        languages.extend(file.language.clone());
        let (verdict, _diags) = vote(&file, catalog);
        match (verdict.is_test(), label == "test") {
            (true, false) => false_positives.push(rel.clone()),
            (false, true) => false_negatives.push(rel.clone()),
            _ => {}
        }
    }
    let elapsed = started.elapsed();

    assert!(
        false_positives.is_empty() && false_negatives.is_empty(),
        "detection disagrees with labels\n  false positives: {false_positives:?}\n  false negatives: {false_negatives:?}"
    );
    assert!(languages.len() >= 5, "need >= 5 languages, have {languages:?}");
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "detection over the fixture corpus took {elapsed:?}, budget is 5 s"
    );
    println!(
        "PASS (a) detection: {} files, {} languages, precision = recall = 100%, {elapsed:?}",
        rows.len(),
        languages.len()
    );
}

// ---------------------------------------------------------------------
// (b) Pattern detection agrees with labeled fixtures
// ---------------------------------------------------------------------

fn check_single_file_pattern(
    catalog: &Catalog,
    subdir: &str,
    detect: fn(&SourceFile, &Catalog) -> (Option<testpat_core::PatternHit>, Vec<testpat_core::Diagnostic>),
) -> usize {
    let dir = fixture_root().join("patterns").join(subdir);
    let rows = read_labels(&dir.join("labels.tsv"), 2);
    assert!(rows.len() >= 15, "{subdir}: need >= 15 labeled fixtures, have {}", rows.len());
    let mut disagreements = Vec::new();
    for row in &rows {
        let (rel, label) = (&row[0], row[1].as_str());
        assert!(matches!(label, "yes" | "no"), "{subdir}/{rel}: unknown label `{label}`");
        let file = load_fixture(catalog, "pattern-fixture", &dir, rel);
        let (hit, _diags) = detect(&file, catalog);
        if hit.is_some() != (label == "yes") {
            disagreements.push(format!(
                "{subdir}/{rel}: labeled {label}, detector said {}",
                if hit.is_some() { "yes" } else { "no" }
            ));
        }
    }
    assert!(disagreements.is_empty(), "{subdir} disagreements:\n  {}", disagreements.join("\n  "));
    rows.len()
}

#[test]
fn criterion_b_pattern_detection_matches_labels() {
    let catalog = Catalog::builtin();
    let am = check_single_file_pattern(catalog, "assertion_message", detect_assertion_message);
    let st = check_single_file_pattern(catalog, "simple_test", detect_simple_test);
    let it = check_single_file_pattern(catalog, "implicit_teardown", detect_implicit_teardown);

    // Testcase class per class is cross-file: load each mini-project and
    // judge every labeled test file in both pairing modes.
    let dir = fixture_root().join("patterns/tccpc");
    let rows = read_labels(&dir.join("labels.tsv"), 4);
    assert!(rows.len() >= 15, "tccpc: need >= 15 labeled test files, have {}", rows.len());
    let mut projects: BTreeSet<String> = rows.iter().map(|r| r[0].clone()).collect();
    let mut disagreements = Vec::new();
    for project in std::mem::take(&mut projects) {
        let project_dir = dir.join(&project);
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(&project_dir).sort_by_file_name() {
            let entry = entry.expect("fixture tree readable");
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(&project_dir)
                .expect("file under project dir")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            files.push(load_fixture(catalog, &project, &project_dir, &rel));
        }
        let labeled: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == project).collect();
        let test_paths: BTreeSet<String> = labeled.iter().map(|r| r[1].clone()).collect();
        for (mode, column) in [(TccpcMode::Strict, 2usize), (TccpcMode::Loose, 3usize)] {
            let analysis = detect_tccpc(&files, &test_paths, mode);
            for row in &labeled {
                let (rel, expected) = (&row[1], row[column].as_str());
                let outcome = if !analysis.evaluable.contains(rel) {
                    "excluded"
                } else if analysis.hits.contains_key(rel) {
                    "yes"
                } else {
                    "no"
                };
                if outcome != expected {
                    disagreements.push(format!(
                        "{project}/{rel} ({mode:?}): labeled {expected}, detector said {outcome}"
                    ));
                }
            }
        }
    }
    assert!(disagreements.is_empty(), "tccpc disagreements:\n  {}", disagreements.join("\n  "));

    println!(
        "PASS (b) patterns: assertion message {am}, simple test {st}, implicit teardown {it}, \
         testcase class per class {} fixtures (strict + loose), all agree",
        rows.len()
    );
}

// ---------------------------------------------------------------------
// (c) Metric arithmetic is exact
// ---------------------------------------------------------------------

#[test]
fn criterion_c_metric_arithmetic_exact() {
    // Size buckets, including every boundary.
    for (loc, class) in [
        (0u64, SizeClass::VerySmall),
        (999, SizeClass::VerySmall),
        (1000, SizeClass::Small),
        (9999, SizeClass::Small),
        (10000, SizeClass::Medium),
        (99999, SizeClass::Medium),
        (100000, SizeClass::Large),
        (u64::MAX, SizeClass::Large),
    ] {
        assert_eq!(classify_size(loc), class, "classify_size({loc})");
    }

    // Test-to-production ratio, including the zero-denominator guard.
    assert_eq!(tp_ratio(13, 5), Some(Ratio64::new(13, 5)));
    assert_eq!(tp_ratio(0, 7), Some(Ratio64::new(0, 7)));
    assert_eq!(tp_ratio(7, 0), None, "no production code must be undefined, not zero");

    // Adoption ratio: exact value, zero-denominator guard, impossible count.
    let kind = PatternKind::SimpleTest;
    assert_eq!(adoption_ratio(kind, 3, 12), Ok(Some(Ratio64::new(1, 4))));
    assert_eq!(adoption_ratio(kind, 0, 0), Ok(None));
    assert_eq!(
        adoption_ratio(kind, 5, 4),
        Err(MetricsError::AdoptionExceedsEvaluable { pattern: kind, with_pattern: 5, evaluable: 4 })
    );

    // Four-decimal rounding, ties to even in both directions.
    assert_eq!(round_ratio_4dp(Ratio64::new(1, 3)), "0.3333");
    assert_eq!(round_ratio_4dp(Ratio64::new(2, 3)), "0.6667");
    assert_eq!(round_ratio_4dp(Ratio64::new(13, 5)), "2.6000");
    assert_eq!(round_ratio_4dp(Ratio64::new(3, 20000)), "0.0002", "0.00015 rounds up to even");
    assert_eq!(round_ratio_4dp(Ratio64::new(1, 20000)), "0.0000", "0.00005 rounds down to even");

    // Normalized framework frequency on hand-built usage maps.
    let catalog = Catalog::builtin();
    let junit = FrameworkId("junit".into());
    let unittest = FrameworkId("unittest".into());
    let mockito = FrameworkId("mockito".into());
    let usage = [(junit.clone(), 3u64), (unittest.clone(), 1u64)].into_iter().collect();
    let pools = [(LanguageId("java".into()), 4u64), (LanguageId("python".into()), 2u64)]
        .into_iter()
        .collect();
    let (rows, diags) = normalized_framework_frequency(&usage, &pools, catalog);
    assert!(diags.is_empty());
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].id.clone(), rows[0].projects, rows[0].language_pool), (junit.clone(), 3, 4));
    assert_eq!(rows[0].frequency, Some(Ratio64::new(3, 4)));
    assert_eq!(rows[1].frequency, Some(Ratio64::new(1, 2)));

    // Equal frequency breaks the tie by id; an empty pool is undefined,
    // sorts last, and carries a diagnostic.
    let usage = [(mockito.clone(), 1u64), (junit.clone(), 1u64), (unittest.clone(), 1u64)]
        .into_iter()
        .collect();
    let pools = [(LanguageId("java".into()), 2u64)].into_iter().collect();
    let (rows, diags) = normalized_framework_frequency(&usage, &pools, catalog);
    assert_eq!(
        rows.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(),
        vec!["junit", "mockito", "unittest"],
        "tie on 1/2 breaks by id; undefined unittest frequency sorts last"
    );
    assert_eq!(rows[2].frequency, None);
    assert_eq!(diags.len(), 1, "empty language pool must be diagnosed");

    // The whole pipeline over a corpus whose numbers are derived by hand:
    //   alpha: java, test 13 LOC / production 5 LOC, all four patterns;
    //   beta:  python, 8/4, simple test only, no judgeable class pairing;
    //   gamma: javascript, no tests, 0/3.
    let config = RunConfig {
        root: Some(fixture_root().join("corpus")),
        jobs: Some(1),
        ..RunConfig::default()
    };
    let report = run(&config).expect("fixture corpus analyzes");

    assert_eq!(report.corpus.projects_analyzed, 3);
    assert_eq!(report.corpus.projects_with_tests, 2);
    // Mean of 13/5, 8/4, 0/3 = 23/15.
    assert_eq!(report.corpus.average_tp_ratio.as_deref(), Some("1.5333"));

    let very_small = &report.corpus.size_classes[0];
    assert_eq!(very_small.size_class, SizeClass::VerySmall);
    assert_eq!((very_small.projects, very_small.projects_with_tests), (3, 2));
    assert_eq!(very_small.average_tp_ratio.as_deref(), Some("1.5333"));
    for stat in &report.corpus.size_classes[1..] {
        assert_eq!((stat.projects, stat.average_tp_ratio.clone()), (0, None));
    }

    let frameworks: Vec<(&str, u64, u64)> = report
        .corpus
        .frameworks
        .iter()
        .map(|f| (f.id.as_str(), f.projects, f.language_pool))
        .collect();
    assert_eq!(
        frameworks,
        vec![("junit", 1, 1), ("unittest", 1, 1)],
        "both at 1/1; the tie breaks by id"
    );
    assert_ratio(&report.corpus.frameworks[0].frequency, 1, 1, "1.0000", "junit frequency");

    let pattern = |kind: PatternKind| {
        report.corpus.patterns.iter().find(|row| row.pattern == kind).expect("pattern row")
    };
    let am = pattern(PatternKind::AssertionMessage);
    assert_eq!((am.projects_with, am.files_with, am.evaluable_files), (1, 1, 2));
    assert_ratio(&am.adoption, 1, 2, "0.5000", "assertion message corpus adoption");
    let st = pattern(PatternKind::SimpleTest);
    assert_eq!((st.projects_with, st.files_with, st.evaluable_files), (2, 2, 2));
    assert_ratio(&st.adoption, 1, 1, "1.0000", "simple test corpus adoption");
    let it = pattern(PatternKind::ImplicitTeardown);
    assert_eq!((it.projects_with, it.files_with, it.evaluable_files), (1, 1, 2));
    assert_ratio(&it.adoption, 1, 2, "0.5000", "implicit teardown corpus adoption");
    let tc = pattern(PatternKind::TestcaseClassPerClass);
    assert_eq!((tc.projects_with, tc.files_with, tc.evaluable_files), (1, 1, 1));
    assert_ratio(&tc.adoption, 1, 1, "1.0000", "testcase class per class corpus adoption");

    let qa: Vec<(u64, u64, u64)> =
        report.corpus.qa.iter().map(|q| (q.any_projects, q.all_projects, q.denominator)).collect();
    assert_eq!(
        qa,
        vec![(1, 1, 2), (2, 1, 2), (2, 1, 2)],
        "ease of modification, ease of diagnoses, comprehension"
    );
    assert_eq!(report.corpus.qa[0].any_percent.as_deref(), Some("50.0000"));
    assert_eq!(report.corpus.qa[1].any_percent.as_deref(), Some("100.0000"));
    assert_eq!(report.corpus.qa[1].all_percent.as_deref(), Some("50.0000"));
    assert_eq!(report.corpus.qa[2].any_percent.as_deref(), Some("100.0000"));
    assert_eq!(report.corpus.qa[2].all_percent.as_deref(), Some("50.0000"));

    let project = |id: &str| report.projects.iter().find(|p| p.id == id).expect("project row");
    let alpha = project("alpha");
    assert_eq!(alpha.dominant_language.as_deref(), Some("java"));
    assert_eq!(
        (alpha.total_files, alpha.classified_files, alpha.test_files, alpha.production_files),
        (2, 2, 1, 1)
    );
    assert_eq!((alpha.test_loc, alpha.production_loc, alpha.total_loc), (13, 5, 18));
    assert_ratio(&alpha.tp_ratio, 13, 5, "2.6000", "alpha tp ratio");
    assert_eq!(alpha.frameworks, vec!["junit".to_string()]);
    for kind in PatternKind::ALL {
        let stat = &alpha.patterns[&kind];
        assert_eq!((stat.files, stat.evaluable), (1, 1), "alpha {kind}");
    }

    let beta = project("beta");
    assert_ratio(&beta.tp_ratio, 2, 1, "2.0000", "beta tp ratio");
    assert_eq!(beta.frameworks, vec!["unittest".to_string()]);
    assert_eq!(
        (beta.patterns[&PatternKind::AssertionMessage].files,
         beta.patterns[&PatternKind::AssertionMessage].evaluable),
        (0, 1)
    );
    assert_eq!(
        (beta.patterns[&PatternKind::SimpleTest].files,
         beta.patterns[&PatternKind::SimpleTest].evaluable),
        (1, 1)
    );
    assert_eq!(
        (beta.patterns[&PatternKind::ImplicitTeardown].files,
         beta.patterns[&PatternKind::ImplicitTeardown].evaluable),
        (0, 1)
    );
    let beta_tccpc = &beta.patterns[&PatternKind::TestcaseClassPerClass];
    assert_eq!((beta_tccpc.files, beta_tccpc.evaluable), (0, 0));
    assert_eq!(beta_tccpc.adoption, None, "nothing judgeable: undefined, not zero");

    let gamma = project("gamma");
    assert_eq!(gamma.test_files, 0);
    assert_ratio(&gamma.tp_ratio, 0, 1, "0.0000", "gamma tp ratio");
    assert!(gamma.frameworks.is_empty());

    println!("PASS (c) metrics: buckets, guards, rounding, frequencies, and the 3-project corpus all exact");
}

// ---------------------------------------------------------------------
// (d) Regression oracle
// ---------------------------------------------------------------------

/// Deterministic, well-spread synthetic design with known coefficients.
fn synthetic_observation(i: usize, beta: &[f64; 6], noise: f64) -> RegressionObservation {
    let adoption = [
        ((i * 7) % 11) as f64 / 10.0,
        ((i * 5 + 3) % 13) as f64 / 12.0,
        ((i * 3 + 1) % 7) as f64 / 6.0,
        ((i * 11 + 5) % 9) as f64 / 8.0,
    ];
    let total_loc = 500.0 + 997.0 * (i as f64);
    let mean = beta[0]
        + beta[1] * adoption[0]
        + beta[2] * adoption[1]
        + beta[3] * adoption[2]
        + beta[4] * adoption[3]
        + beta[5] * total_loc;
    RegressionObservation {
        project_id: format!("p{i:04}"),
        test_files: mean + noise,
        adoption,
        total_loc,
    }
}

fn fit_noisy(seed: u64, beta: &[f64; 6], n: usize, sigma: f64) -> RegressionResult {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let observations: Vec<RegressionObservation> =
        (0..n).map(|i| synthetic_observation(i, beta, normal.sample(&mut rng))).collect();
    fit_test_count_model(&observations).expect("noisy synthetic design is full rank")
}

#[test]
fn criterion_d_regression_recovers_synthetic_coefficients() {
    // Noise-free recovery to 1e-9 relative error.
    let beta = [12.0, -3.5, -1.25, -2.0, -0.75, 0.002];
    let observations: Vec<RegressionObservation> =
        (0..40).map(|i| synthetic_observation(i, &beta, 0.0)).collect();
    let fit = fit_test_count_model(&observations).expect("noise-free design is full rank");
    assert_eq!(fit.observations, 40);
    assert_eq!(fit.residual_df, 34);
    for (term, truth) in fit.terms.iter().zip(beta) {
        let relative = (term.coefficient - truth).abs() / truth.abs().max(1.0);
        assert!(
            relative <= 1e-9,
            "{}: estimate {} vs truth {truth}, relative error {relative:e} > 1e-9",
            term.name,
            term.coefficient
        );
    }

    // Reported p-values agree with an independent Student-t implementation.
    let noisy = fit_noisy(424242, &[73.0, -137.0, -77.0, -59.0, -93.0, 2e-5], 400, 5.0);
    let t_dist = statrs::distribution::StudentsT::new(0.0, 1.0, noisy.residual_df as f64)
        .expect("valid degrees of freedom");
    for term in &noisy.terms {
        use statrs::distribution::ContinuousCDF;
        let reference = 2.0 * (1.0 - t_dist.cdf(term.t_value.abs()));
        assert!(
            (term.p_value - reference).abs() <= 1e-9,
            "{}: p-value {} vs Student-t reference {reference}",
            term.name,
            term.p_value
        );
    }

    // Seeded noisy study: in >= 18 of 20 seeds every estimate lands within
    // 3 reported standard errors of truth and every pattern coefficient
    // keeps its (negative) sign.
    let beta = [73.0, -137.0, -77.0, -59.0, -93.0, 2e-5];
    let mut passes = 0usize;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let fit = fit_noisy(seed, &beta, 400, 5.0);
        let within_3se = fit
            .terms
            .iter()
            .zip(beta)
            .all(|(term, truth)| (term.coefficient - truth).abs() <= 3.0 * term.std_error);
        let patterns_negative = fit.terms[1..5].iter().all(|term| term.coefficient < 0.0);
        if within_3se && patterns_negative {
            passes += 1;
        } else {
            failures.push(format!(
                "seed {seed}: within 3 SE = {within_3se}, pattern signs negative = {patterns_negative}"
            ));
        }
    }
    assert!(
        passes >= 18,
        "only {passes}/20 seeds passed the recovery study:\n  {}",
        failures.join("\n  ")
    );

    println!(
        "PASS (d) regression: noise-free recovery <= 1e-9, p-values match the reference CDF, {passes}/20 noisy seeds recovered"
    );
}

// ---------------------------------------------------------------------
// (e) Determinism across runs and worker counts
// ---------------------------------------------------------------------

/// Generate a corpus of Java projects with `production_classes + tests`
/// files each and per-project variation in every pattern's adoption (so a
/// regression over the corpus has a full-rank design).
///
/// The last three production classes form a solo pool: project `p`
/// assigns `p % 3` of them a dedicated single test (its only reference,
/// referenced by no other test), which makes strict one-to-one pairing
/// hold for exactly those tests. All other tests share the remaining
/// classes, each of which ends up with several referring tests.
fn write_synthetic_corpus(root: &Path, projects: usize, tests: usize, production_classes: usize) {
    assert!(production_classes >= 6 && tests >= 2 * (production_classes - 3));
    for p in 0..projects {
        let src = root.join(format!("proj{p:03}")).join("src");
        let test = root.join(format!("proj{p:03}")).join("test");
        std::fs::create_dir_all(&src).unwrap();
        std::fs::create_dir_all(&test).unwrap();
        for c in 0..production_classes {
            // Padding methods give production LOC a per-project size of
            // its own, not a function of the test-shape counts.
            let padding: String = if c == 0 {
                (0..(p * 7) % 13)
                    .map(|k| format!("    public int pad{k}() {{ return {k}; }}\n"))
                    .collect()
            } else {
                String::new()
            };
            std::fs::write(
                src.join(format!("Calc{c}.java")),
                format!(
                    "public class Calc{c} {{\n    public int add(int a, int b) {{\n        return a + b + {p};\n    }}\n{padding}}}\n"
                ),
            )
            .unwrap();
        }
        let solo = p % 3;
        let shared = production_classes - 3;
        for i in 0..tests {
            let target = if i < solo { production_classes - 1 - i } else { i % shared };
            // Vary the shapes with different periods per pattern so
            // adoption ratios differ project to project.
            let message =
                if i % (1 + p % 3) == 0 { ", \"stays stable\"" } else { "" };
            let second_assert = if (i * 5 + p) % 7 < 3 {
                "        assertTrue(sandbox.add(1, 2) > 0);\n"
            } else {
                ""
            };
            let teardown = if (i * 3 + p * 2) % 11 < 4 {
                "\n    @After\n    public void tearDown() {\n        sandbox.remove();\n    }\n"
            } else {
                ""
            };
            std::fs::write(
                test.join(format!("CalcCheck{i}.java")),
                format!(
                    "import org.junit.After;\nimport org.junit.Test;\n\npublic class CalcCheck{i} {{\n    private Calc{target} sandbox = new Calc{target}();\n\n    @Test\n    public void adds() {{\n        assertEquals({i}, sandbox.add({i}, 0){message});\n{second_assert}    }}\n{teardown}}}\n"
                ),
            )
            .unwrap();
        }
    }
}

#[test]
fn criterion_e_output_byte_identical_across_runs_and_workers() {
    // Two sequential runs over the hand-built fixture corpus.
    let config = RunConfig {
        root: Some(fixture_root().join("corpus")),
        jobs: Some(1),
        ..RunConfig::default()
    };
    let first = render_json(&run(&config).expect("first run"));
    let second = render_json(&run(&config).expect("second run"));
    assert_eq!(first, second, "two sequential runs must be byte-identical");

    let parallel_config = RunConfig { jobs: Some(4), ..config.clone() };
    let parallel = render_json(&run(&parallel_config).expect("parallel run"));
    assert_eq!(first, parallel, "4 workers must match 1 worker byte-for-byte");

    // A wider synthetic corpus (with the regression requested) so the
    // worker pool actually interleaves projects.
    let dir = tempfile::tempdir().expect("tempdir");
    write_synthetic_corpus(dir.path(), 12, 8, 6);
    let config = RunConfig {
        root: Some(dir.path().to_path_buf()),
        regression: true,
        jobs: Some(1),
        ..RunConfig::default()
    };
    let single_report = run(&config).expect("single-worker run");
    assert!(
        single_report.regression.is_some(),
        "the synthetic corpus is built to support a fit; notes: {:?}",
        single_report.notes
    );
    let single = render_json(&single_report);
    let parallel_config = RunConfig { jobs: Some(4), ..config.clone() };
    let parallel = render_json(&run(&parallel_config).expect("4-worker run"));
    assert_eq!(single, parallel, "synthetic corpus: 4 workers must match 1 worker");

    println!("PASS (e) determinism: repeat runs and 1-vs-4 workers byte-identical on both corpora");
}

// ---------------------------------------------------------------------
// (f) Monotonicity properties
// ---------------------------------------------------------------------

/// Grow the built-in catalog: an extra framework, extra keyword
/// literals, or both — expressed through the public document format.
fn extended_catalog(add_framework: bool, add_keyword: bool) -> Catalog {
    let text = include_str!("../catalog/default.toml");
    let mut doc: toml::Value = toml::from_str(text).expect("built-in catalog parses");
    if add_framework {
        let table: toml::Value = toml::from_str(
            r#"
            id = "zved"
            name = "Zved"
            languages = ["java"]
            imports = ["^\\s*import\\s+com\\.zved\\b"]
            keywords = ["zvedCheck("]
            "#,
        )
        .unwrap();
        doc.get_mut("frameworks").unwrap().as_array_mut().unwrap().push(table);
    }
    if add_keyword {
        let literals = doc
            .get_mut("keywords")
            .unwrap()
            .get_mut("java")
            .unwrap()
            .get_mut("literals")
            .unwrap()
            .as_array_mut()
            .unwrap();
        literals.push(toml::Value::String("zvmarker(".into()));
    }
    Catalog::from_toml_str(&toml::to_string(&doc).unwrap()).expect("extended catalog is valid")
}

const VOTE_LINE_POOL: [&str; 15] = [
    "import org.junit.Test;",
    "import static org.junit.Assert.assertEquals;",
    "import org.mockito.Mockito;",
    "import java.util.List;",
    "import com.zved.Probe;",
    "@Test",
    "@Before",
    "assertEquals(1, computed());",
    "verify(collaborator).poke();",
    "zvmarker();",
    "public class Sample {",
    "    int x = 1;",
    "    // plain comment",
    "}",
    "",
];

#[test]
fn criterion_f_flagging_is_monotone() {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    let cases = 1000;
    let config = Config { cases, ..Config::default() };

    // Catalog growth (a new framework, a new keyword literal, or both)
    // never turns a test file into a non-test file; each vote condition
    // is individually monotone.
    let base = Catalog::builtin();
    let extensions: Vec<Catalog> = [(false, false), (true, false), (false, true), (true, true)]
        .into_iter()
        .map(|(fw, kw)| extended_catalog(fw, kw))
        .collect();
    let strategy =
        (proptest::collection::vec(0usize..VOTE_LINE_POOL.len(), 0..14), 0usize..extensions.len());
    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&strategy, |(picks, which)| {
            let content =
                picks.iter().map(|&i| VOTE_LINE_POOL[i]).collect::<Vec<_>>().join("\n");
            let language = base.language_of(Path::new("src/Sample.java")).cloned();
            let file =
                SourceFile::from_bytes("prop", "src/Sample.java", language, content.into_bytes());
            let (before, _) = vote(&file, base);
            let (after, _) = vote(&file, &extensions[which]);
            prop_assert!(
                !before.framework_import() || after.framework_import(),
                "framework-import condition lost under catalog growth"
            );
            prop_assert!(
                !before.keyword_found() || after.keyword_found(),
                "keyword condition lost under catalog growth"
            );
            prop_assert!(!before.is_test() || after.is_test(), "catalog growth un-flagged a test file");
            Ok(())
        })
        .unwrap_or_else(|e| panic!("catalog-extension monotonicity violated: {e}"));

    // Adding patterns to a project never withdraws a satisfied quality
    // attribute, for `any` and `all` alike.
    let from_bits = |bits: u8| -> BTreeSet<PatternKind> {
        PatternKind::ALL
            .into_iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, kind)| kind)
            .collect()
    };
    let mut runner = TestRunner::new(config);
    runner
        .run(&(0u8..16, 0u8..16), |(base_bits, extra_bits)| {
            let before = qa_satisfaction(&from_bits(base_bits));
            let after = qa_satisfaction(&from_bits(base_bits | extra_bits));
            for (a, b) in before.iter().zip(&after) {
                prop_assert_eq!(a.attribute, b.attribute);
                prop_assert!(
                    !a.any || b.any,
                    "`any` lost for {:?} when patterns were added",
                    a.attribute
                );
                prop_assert!(
                    !a.all || b.all,
                    "`all` lost for {:?} when patterns were added",
                    a.attribute
                );
            }
            Ok(())
        })
        .unwrap_or_else(|e| panic!("quality-attribute monotonicity violated: {e}"));

    println!(
        "PASS (f) monotonicity: catalog growth and pattern addition hold over {cases} randomized cases each"
    );
}

// ---------------------------------------------------------------------
// (g) Throughput over a 10,000-file tree
// ---------------------------------------------------------------------

#[test]
fn criterion_g_ten_thousand_files_within_budget() {
    let dir = tempfile::tempdir().expect("tempdir");
    // 50 projects x (40 production + 160 test files) = 10,000 files.
    write_synthetic_corpus(dir.path(), 50, 160, 40);
    let total: usize = walkdir::WalkDir::new(dir.path())
        .into_iter()
        .filter(|e| e.as_ref().map(|e| e.file_type().is_file()).unwrap_or(false))
        .count();
    assert_eq!(total, 10_000, "generator must produce exactly 10,000 files");

    let config = RunConfig {
        root: Some(dir.path().to_path_buf()),
        jobs: Some(1),
        ..RunConfig::default()
    };
    let started = Instant::now();
    let report = run(&config).expect("synthetic corpus analyzes");
    let elapsed = started.elapsed();

    assert_eq!(report.corpus.projects_analyzed, 50);
    let scanned: u64 = report.projects.iter().map(|p| p.total_files).sum();
    assert_eq!(scanned, 10_000);
    let tests: u64 = report.projects.iter().map(|p| p.test_files).sum();
    assert_eq!(tests, 50 * 160);
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "10,000-file scan + detection took {elapsed:?}, budget is 60 s on one worker"
    );
    println!("PASS (g) throughput: 10,000 files scanned and detected in {elapsed:?} on one worker");
}
