//! Lexical assertion-site scanner.
//!
//! Finds call sites whose callee matches one of the language's
//! assertion-callee regexes, splits their arguments with a quote-aware
//! bracket scan (following the call across lines), and classifies
//! message-bearing signatures. Both the Assertion Message and Simple
//! Test detectors consume these sites.

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::catalog::Catalog;
use crate::diagnostics::Diagnostic;
use crate::ingest::SourceFile;

/// A call can continue across at most this many lines before the scanner
/// gives up on it (guards against unbalanced brackets in odd files).
const MAX_CALL_LINES: usize = 16;

/// How a message-bearing assertion is shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageForm {
    /// `assertSomething(expected, actual, MESSAGE)` — three or more
    /// arguments on a named assertion.
    ConditionArgs,
    /// `assert(value, condition, MESSAGE)` — three or more arguments on
    /// the bare `assert` callee.
    GenericAssert,
    /// `assertTrue(value, MESSAGE)` — exactly two arguments.
    BooleanAssert,
}

impl MessageForm {
    pub fn label(self) -> &'static str {
        match self {
            MessageForm::ConditionArgs => "condition_args",
            MessageForm::GenericAssert => "generic_assert",
            MessageForm::BooleanAssert => "boolean_assert",
        }
    }
}

/// One assertion call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionSite {
    /// Callee as written, whitespace squeezed out (`Assert.AreEqual`).
    pub callee: String,
    /// 1-based line of the callee.
    pub line: u32,
    /// Top-level arguments, trimmed.
    pub args: Vec<String>,
    /// Trimmed text of the callee line, capped for report output.
    pub excerpt: String,
}

impl AssertionSite {
    /// The message form of this site, if its last argument is a string
    /// literal (two or more arguments required).
    pub fn message_form(&self) -> Option<MessageForm> {
        if self.args.len() < 2 || !is_string_literal_start(self.args.last().unwrap()) {
            return None;
        }
        Some(if self.args.len() == 2 {
            MessageForm::BooleanAssert
        } else if last_segment(&self.callee).eq_ignore_ascii_case("assert") {
            MessageForm::GenericAssert
        } else {
            MessageForm::ConditionArgs
        })
    }
}

/// Whether an argument starts as a string literal, allowing up to two
/// prefix characters for typed literals (`L"x"`, `f"x"`, `$"x"`, `@"x"`).
fn is_string_literal_start(arg: &str) -> bool {
    let arg = arg.trim_start();
    match arg.find(['"', '\'']) {
        Some(pos) if pos <= 2 => arg[..pos]
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '$' || c == '@'),
        _ => false,
    }
}

/// Last identifier of a possibly qualified callee (`self.assertEqual` →
/// `assertEqual`).
pub fn last_segment(callee: &str) -> &str {
    let mut rest = callee;
    for sep in [".", "::", "->"] {
        if let Some(pos) = rest.rfind(sep) {
            let candidate = &rest[pos + sep.len()..];
            if candidate.len() < rest.len() {
                rest = candidate;
            }
        }
    }
    rest
}

fn callee_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"([$A-Za-z_][\w$]*(?:\s*(?:::|->|\.)\s*[$A-Za-z_][\w$]*)*)\s*\(")
            .expect("callee regex compiles")
    })
}

/// Whether `callee` is named by any of the language's assertion-callee
/// regexes, trying the full qualified spelling and the last segment.
/// A callee named exactly `assert` always counts: the generic-assert
/// message form exists for it, in every language.
fn is_assertion_callee(callee: &str, matchers: &[Regex]) -> bool {
    let last = last_segment(callee);
    last.eq_ignore_ascii_case("assert")
        || matchers.iter().any(|re| full_match(re, callee) || full_match(re, last))
}

fn full_match(re: &Regex, text: &str) -> bool {
    re.find(text).is_some_and(|m| m.start() == 0 && m.end() == text.len())
}

/// Cap an excerpt at a readable width without splitting a character.
pub fn excerpt_of(line: &str) -> String {
    let trimmed = line.trim();
    if trimmed.chars().count() <= 120 {
        trimmed.to_string()
    } else {
        let mut s: String = trimmed.chars().take(117).collect();
        s.push_str("...");
        s
    }
}

/// Scan one file for assertion call sites.
///
/// Lines that are not valid UTF-8 are skipped (the vote already reported
/// them); a call whose brackets never balance within [`MAX_CALL_LINES`]
/// is skipped with a diagnostic.
pub fn scan_assertions(file: &SourceFile, catalog: &Catalog) -> (Vec<AssertionSite>, Vec<Diagnostic>) {
    let mut sites = Vec::new();
    let mut diagnostics = Vec::new();
    let Some(language) = &file.language else {
        return (sites, diagnostics);
    };
    let matchers = catalog.assertion_callees(language);
    if matchers.is_empty() {
        return (sites, diagnostics);
    }

    let lines: Vec<(u32, &str)> = file.lines().filter_map(|(n, l)| Some((n, l.ok()?))).collect();
    for (index, (line_no, line)) in lines.iter().enumerate() {
        for capture in callee_regex().captures_iter(line) {
            let raw = capture.get(1).expect("group 1 exists");
            let callee: String = raw.as_str().chars().filter(|c| !c.is_whitespace()).collect();
            if !is_assertion_callee(&callee, matchers) {
                continue;
            }
            let open_col = capture.get(0).expect("whole match").end();
            match parse_args(&lines, index, open_col) {
                Some(args) => sites.push(AssertionSite {
                    callee,
                    line: *line_no,
                    args,
                    excerpt: excerpt_of(line),
                }),
                None => diagnostics.push(Diagnostic::line(
                    file.project_id.clone(),
                    file.rel_path.clone(),
                    *line_no,
                    format!("call to `{callee}` never closes; not counted as an assertion"),
                )),
            }
        }
    }
    (sites, diagnostics)
}

/// Split the argument list that starts just after an opening parenthesis
/// at `(lines[start].1)[open_col..]`. Quote-aware, bracket-balanced,
/// continues over following lines. `None` if the call never closes.
fn parse_args(lines: &[(u32, &str)], start: usize, open_col: usize) -> Option<Vec<String>> {
    let mut args: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut depth = 1u32;
    let mut string_quote: Option<char> = None;
    let mut escaped = false;

    for (offset, (_, line)) in lines.iter().enumerate().skip(start).take(MAX_CALL_LINES) {
        let text: &str = if offset == start { &line[open_col..] } else { line };
        if offset != start && !current.is_empty() {
            current.push(' ');
        }
        for c in text.chars() {
            if let Some(q) = string_quote {
                current.push(c);
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    string_quote = None;
                }
                continue;
            }
            match c {
                '"' | '\'' | '`' => {
                    string_quote = Some(c);
                    current.push(c);
                }
                '(' | '[' | '{' => {
                    depth += 1;
                    current.push(c);
                }
                ')' | ']' | '}' => {
                    depth -= 1;
                    if depth == 0 {
                        let arg = current.trim().to_string();
                        if !arg.is_empty() || !args.is_empty() {
                            args.push(arg);
                        }
                        // `foo()` has no arguments at all.
                        if args.last().is_some_and(String::is_empty) {
                            args.pop();
                        }
                        return Some(args);
                    }
                    current.push(c);
                }
                ',' if depth == 1 => {
                    args.push(current.trim().to_string());
                    current.clear();
                }
                _ => current.push(c),
            }
        }
        // Strings do not continue across physical lines in this scan.
        string_quote = None;
        escaped = false;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::LanguageId;

    fn java(body: &str) -> SourceFile {
        SourceFile::from_bytes(
            "p",
            "T.java",
            Some(LanguageId("java".into())),
            body.as_bytes().to_vec(),
        )
    }

    fn scan(body: &str) -> Vec<AssertionSite> {
        scan_assertions(&java(body), Catalog::builtin()).0
    }

    #[test]
    fn finds_sites_and_splits_args() {
        let sites = scan("assertEquals(a, b);\nassertTrue(x > compute(1, 2));\n");
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].callee, "assertEquals");
        assert_eq!(sites[0].args, vec!["a", "b"]);
        assert_eq!(sites[1].args, vec!["x > compute(1, 2)"], "nested call stays one arg");
    }

    #[test]
    fn non_assertion_callees_are_ignored() {
        let sites = scan("launch(a, b);\nprocess(x);\n");
        assert!(sites.is_empty());
    }

    #[test]
    fn commas_inside_strings_do_not_split() {
        let sites = scan("assertEquals(a, b, \"left, right\");\n");
        assert_eq!(sites[0].args.len(), 3);
        assert_eq!(sites[0].args[2], "\"left, right\"");
    }

    #[test]
    fn multi_line_calls_are_followed() {
        let sites = scan("assertEquals(\n    expected,\n    actual,\n    \"joined msg\");\n");
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].line, 1);
        assert_eq!(sites[0].args.len(), 3);
        assert_eq!(sites[0].message_form(), Some(MessageForm::ConditionArgs));
    }

    #[test]
    fn unterminated_call_is_a_diagnostic_not_a_site() {
        let (sites, diags) = scan_assertions(&java("assertEquals(a, b\n"), Catalog::builtin());
        assert!(sites.is_empty());
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("never closes"));
    }

    #[test]
    fn message_forms_cover_all_three_shapes() {
        let sites = scan(
            "assertEquals(a, b, \"cond msg\");\nassert(v, v > 0, \"generic msg\");\nassertTrue(ok, \"bool msg\");\nassertEquals(a, b);\nassertTrue(ok);\n",
        );
        let forms: Vec<Option<MessageForm>> = sites.iter().map(|s| s.message_form()).collect();
        assert_eq!(
            forms,
            vec![
                Some(MessageForm::ConditionArgs),
                Some(MessageForm::GenericAssert),
                Some(MessageForm::BooleanAssert),
                None,
                None,
            ]
        );
    }

    #[test]
    fn prefixed_string_literals_count_as_messages() {
        let file = SourceFile::from_bytes(
            "p",
            "t.py",
            Some(LanguageId("python".into())),
            b"self.assertEqual(a, b, f\"diff {a}\")\n".to_vec(),
        );
        let (sites, _) = scan_assertions(&file, Catalog::builtin());
        assert_eq!(sites[0].message_form(), Some(MessageForm::ConditionArgs));
    }

    #[test]
    fn non_literal_last_argument_is_not_a_message() {
        let sites = scan("assertEquals(a, b, describe(c));\n");
        assert_eq!(sites[0].message_form(), None);
    }

    #[test]
    fn qualified_callees_match_on_last_segment() {
        let file = SourceFile::from_bytes(
            "p",
            "t.cs",
            Some(LanguageId("csharp".into())),
            b"Assert.AreEqual(a, b, \"msg\");\n".to_vec(),
        );
        let (sites, _) = scan_assertions(&file, Catalog::builtin());
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].callee, "Assert.AreEqual");
        assert_eq!(sites[0].message_form(), Some(MessageForm::ConditionArgs));
    }

    #[test]
    fn zero_argument_call_has_no_args() {
        let file = SourceFile::from_bytes(
            "p",
            "t.java",
            Some(LanguageId("java".into())),
            b"fail();\n".to_vec(),
        );
        let (sites, _) = scan_assertions(&file, Catalog::builtin());
        assert_eq!(sites.len(), 1);
        assert!(sites[0].args.is_empty());
        assert_eq!(sites[0].message_form(), None);
    }
}
