//! Testcase Class Per Class detection.
//!
//! Builds a textual reference graph per project: production files
//! contribute declared names (classes, functions, entities, selectors —
//! whatever the language declares), test files contribute reference
//! edges wherever a declared name occurs as a whole word. A test file
//! exhibits the pattern when it pairs with exactly one production
//! declaration:
//!
//! * strict (default): the test references exactly one declaration and
//!   no other test references that declaration — a one-to-one pairing;
//! * loose: the test references exactly one declaration, shared or not.
//!
//! Eleven languages have declaration profiles. Test files in any other
//! language cannot be judged; they are reported as diagnostics and stay
//! out of the adoption denominator.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::catalog::LanguageId;
use crate::diagnostics::Diagnostic;
use crate::ingest::SourceFile;
use crate::patterns::assertions::excerpt_of;
use crate::patterns::{Evidence, PatternHit, PatternKind};

/// Languages with a declaration profile.
pub const SUPPORTED_LANGUAGES: [&str; 11] = [
    "c", "cpp", "csharp", "css", "fortran", "html", "java", "javascript", "pascal", "php", "vhdl",
];

/// Whether a test file of this language can be judged.
pub fn supports_language(language: &LanguageId) -> bool {
    SUPPORTED_LANGUAGES.contains(&language.as_str())
}

/// Pairing strictness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TccpcMode {
    /// One-to-one: sole referenced declaration, sole referencing test.
    #[default]
    Strict,
    /// One-way: sole referenced declaration; other tests may share it.
    Loose,
}

/// Project-level detection result.
#[derive(Debug, Default)]
pub struct TccpcAnalysis {
    /// Hits keyed by test-file relative path.
    pub hits: BTreeMap<String, PatternHit>,
    /// Relative paths of the test files that could be judged.
    pub evaluable: BTreeSet<String>,
    pub diagnostics: Vec<Diagnostic>,
}

struct DeclMatcher {
    regex: Regex,
    /// Skip lines containing `;` for this matcher (separates C function
    /// prototypes and calls from definitions).
    reject_semicolon_lines: bool,
}

struct Profile {
    matchers: Vec<DeclMatcher>,
    /// Capture-1 names to discard (statement keywords a loose matcher
    /// would otherwise swallow).
    stopwords: &'static [&'static str],
}

fn profiles() -> &'static BTreeMap<&'static str, Profile> {
    static PROFILES: OnceLock<BTreeMap<&'static str, Profile>> = OnceLock::new();
    PROFILES.get_or_init(|| {
        let m = |p: &str| DeclMatcher {
            regex: Regex::new(p).expect("declaration regex compiles"),
            reject_semicolon_lines: false,
        };
        let mut map = BTreeMap::new();
        map.insert(
            "java",
            Profile {
                matchers: vec![m(
                    r"^\s*(?:@\w+\s+)?(?:(?:public|private|protected|abstract|final|static|sealed)\s+)*(?:class|interface|enum|record)\s+([A-Za-z_]\w*)",
                )],
                stopwords: &[],
            },
        );
        map.insert(
            "csharp",
            Profile {
                matchers: vec![m(
                    r"^\s*(?:(?:public|private|protected|internal|abstract|sealed|static|partial)\s+)*(?:class|interface|struct|enum|record)\s+([A-Za-z_]\w*)",
                )],
                stopwords: &[],
            },
        );
        map.insert(
            "cpp",
            Profile {
                matchers: vec![m(
                    r"^\s*(?:template\s*<[^>]*>\s*)?(?:class|struct|union|enum(?:\s+(?:class|struct))?)\s+([A-Za-z_]\w*)",
                )],
                stopwords: &[],
            },
        );
        map.insert(
            "c",
            Profile {
                matchers: vec![
                    m(r"^\s*(?:typedef\s+)?(?:struct|union|enum)\s+([A-Za-z_]\w*)"),
                    // Function definition: starts in column 0, return type
                    // then name, no semicolon on the line (prototypes and
                    // calls carry one, definitions open a body instead).
                    DeclMatcher {
                        regex: Regex::new(r"^[A-Za-z_][\w\s\*]*?[\s\*]([A-Za-z_]\w*)\s*\(")
                            .expect("declaration regex compiles"),
                        reject_semicolon_lines: true,
                    },
                ],
                stopwords: &["if", "for", "while", "switch", "return", "sizeof", "else", "do"],
            },
        );
        map.insert(
            "fortran",
            Profile {
                matchers: vec![m(
                    r"(?i)^\s*(?:[a-z][\w\(\)\*, ]*\s+)?(?:subroutine|function|module|program)\s+([A-Za-z_]\w*)",
                )],
                stopwords: &["end"],
            },
        );
        map.insert(
            "pascal",
            Profile {
                matchers: vec![
                    m(r"(?i)^\s*(?:procedure|function|unit|program)\s+([A-Za-z_]\w*)"),
                    m(r"(?i)^\s*([A-Za-z_]\w*)\s*=\s*(?:class|record|object)\b"),
                ],
                stopwords: &[],
            },
        );
        map.insert(
            "vhdl",
            Profile {
                matchers: vec![m(
                    r"(?i)^\s*(?:entity|package(?:\s+body)?|architecture)\s+([A-Za-z_]\w*)",
                )],
                stopwords: &[],
            },
        );
        map.insert(
            "html",
            Profile {
                matchers: vec![m(r#"\bid\s*=\s*["']([A-Za-z_][\w-]*)["']"#)],
                stopwords: &[],
            },
        );
        map.insert(
            "css",
            Profile {
                matchers: vec![m(r"(?:^|[\s,])[.#]([A-Za-z_][\w-]*)")],
                stopwords: &[],
            },
        );
        map.insert(
            "php",
            Profile {
                matchers: vec![
                    m(r"^\s*(?:(?:abstract|final)\s+)*(?:class|interface|trait)\s+([A-Za-z_]\w*)"),
                    m(r"^\s*function\s+([A-Za-z_]\w*)"),
                ],
                stopwords: &[],
            },
        );
        map.insert(
            "javascript",
            Profile {
                matchers: vec![
                    m(r"\bclass\s+([A-Za-z_$][\w$]*)"),
                    m(r"\bfunction\s+([A-Za-z_$][\w$]*)"),
                ],
                stopwords: &[],
            },
        );
        map
    })
}

/// Names declared by one production file, with first declaration lines.
fn declared_names(file: &SourceFile) -> Vec<(String, u32)> {
    let Some(language) = &file.language else {
        return Vec::new();
    };
    let Some(profile) = profiles().get(language.as_str()) else {
        return Vec::new();
    };
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for (line_no, line) in file.lines() {
        let Ok(line) = line else { continue };
        for matcher in &profile.matchers {
            if matcher.reject_semicolon_lines && line.contains(';') {
                continue;
            }
            for capture in matcher.regex.captures_iter(line) {
                let name = capture.get(1).expect("group 1").as_str();
                if profile.stopwords.contains(&name) {
                    continue;
                }
                if seen.insert(name.to_string()) {
                    names.push((name.to_string(), line_no));
                }
            }
        }
    }
    names
}

/// Where a name is declared.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct DeclarationSite {
    rel_path: String,
    line: u32,
}

/// Detect the pattern across one project.
///
/// `files` is the project's full scan; `test_paths` names which of them
/// are test files (by relative path).
pub fn detect_tccpc(
    files: &[SourceFile],
    test_paths: &BTreeSet<String>,
    mode: TccpcMode,
) -> TccpcAnalysis {
    let mut analysis = TccpcAnalysis::default();

    // Declarations from production files of supported languages.
    let mut declarations: BTreeMap<String, BTreeSet<DeclarationSite>> = BTreeMap::new();
    for file in files {
        if test_paths.contains(&file.rel_path) {
            continue;
        }
        for (name, line) in declared_names(file) {
            declarations.entry(name).or_default().insert(DeclarationSite {
                rel_path: file.rel_path.clone(),
                line,
            });
        }
    }

    // Evaluable test files, and the unsupported ones as diagnostics.
    let mut evaluable_files: Vec<&SourceFile> = Vec::new();
    for file in files {
        if !test_paths.contains(&file.rel_path) {
            continue;
        }
        match &file.language {
            Some(language) if supports_language(language) => {
                analysis.evaluable.insert(file.rel_path.clone());
                evaluable_files.push(file);
            }
            Some(language) => analysis.diagnostics.push(Diagnostic::file(
                file.project_id.clone(),
                file.rel_path.clone(),
                format!(
                    "not judged for testcase_class_per_class: no declaration profile for language `{language}`"
                ),
            )),
            None => {}
        }
    }

    if declarations.is_empty() || evaluable_files.is_empty() {
        return analysis;
    }

    // One alternation over every declared name; longest first so longer
    // names win overlapping alternatives.
    let mut names: Vec<&String> = declarations.keys().collect();
    names.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let alternation = names.iter().map(|n| regex::escape(n)).collect::<Vec<_>>().join("|");
    let reference_regex =
        Regex::new(&format!(r"\b(?:{alternation})\b")).expect("escaped alternation compiles");

    // References per test file: name -> first occurrence.
    let mut references: BTreeMap<&str, BTreeMap<String, (u32, String)>> = BTreeMap::new();
    for file in &evaluable_files {
        let entry = references.entry(file.rel_path.as_str()).or_default();
        for (line_no, line) in file.lines() {
            let Ok(line) = line else { continue };
            for m in reference_regex.find_iter(line) {
                entry
                    .entry(m.as_str().to_string())
                    .or_insert_with(|| (line_no, excerpt_of(line)));
            }
        }
    }

    // Reverse edges: name -> referencing test files.
    let mut referenced_by: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (test, names) in &references {
        for name in names.keys() {
            referenced_by.entry(name.as_str()).or_default().insert(test);
        }
    }

    for file in &evaluable_files {
        let refs = &references[file.rel_path.as_str()];
        if refs.len() != 1 {
            continue;
        }
        let (name, (line, excerpt)) = refs.iter().next().expect("len checked");
        let sole_referrer = referenced_by[name.as_str()].len() == 1;
        if mode == TccpcMode::Strict && !sole_referrer {
            continue;
        }
        let declaration = declarations[name.as_str()]
            .iter()
            .next()
            .expect("referenced names are declared");
        let sharing = if sole_referrer {
            "referenced by this test alone".to_string()
        } else {
            format!("shared with {} other test file(s)", referenced_by[name.as_str()].len() - 1)
        };
        analysis.hits.insert(
            file.rel_path.clone(),
            PatternHit {
                kind: PatternKind::TestcaseClassPerClass,
                evidence: vec![Evidence {
                    line: *line,
                    excerpt: excerpt.clone(),
                    detail: format!(
                        "sole production declaration referenced: `{name}` (declared at {}:{}); {sharing}",
                        declaration.rel_path, declaration.line
                    ),
                }],
            },
        );
    }

    analysis.diagnostics.sort();
    analysis
}
