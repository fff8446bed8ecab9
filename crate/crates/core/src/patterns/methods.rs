//! Test-method segmentation.
//!
//! Splits a test file into test methods using the catalog's annotation
//! and definition markers, then finds each method's extent with the
//! language's block style: brace balancing, indentation scoping, or
//! `def`/`end` nesting. Only the Simple Test detector needs method
//! boundaries, so the segmentation is a deliberately lexical heuristic —
//! a file where no method is recognized falls back to whole-file scope
//! at the call site.

use crate::catalog::{BlockStyle, Catalog};
use crate::ingest::SourceFile;
use crate::patterns::assertions::excerpt_of;

/// One segmented test method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestMethod {
    /// Trimmed header line, capped, used as the method's display name.
    pub name: String,
    pub start_line: u32,
    pub end_line: u32,
}

impl TestMethod {
    pub fn contains(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }
}

/// Whether `token` occurs in `line` starting at a word boundary, so that
/// `it(` does not fire inside `commit(`.
fn contains_at_boundary(line: &str, token: &str) -> bool {
    let mut from = 0;
    while let Some(pos) = line[from..].find(token) {
        let at = from + pos;
        let boundary = at == 0
            || line[..at]
                .chars()
                .next_back()
                .is_some_and(|c| !c.is_alphanumeric() && c != '_');
        if boundary {
            return true;
        }
        from = at + token.len().max(1);
    }
    false
}

/// Segment the test methods of one file.
pub fn segment_test_methods(file: &SourceFile, catalog: &Catalog) -> Vec<TestMethod> {
    let Some(language) = &file.language else {
        return Vec::new();
    };
    let Some(set) = catalog.keyword_set(language) else {
        return Vec::new();
    };
    let annotations = &set.test_annotations;
    let definitions = &set.test_definitions;
    if annotations.is_empty() && definitions.is_empty() {
        return Vec::new();
    }
    let block = catalog.block_style(language);
    let lines: Vec<(u32, String)> = file
        .lines()
        .map(|(n, l)| (n, l.unwrap_or("").to_string()))
        .collect();

    let mut starts: Vec<usize> = Vec::new();
    let mut pending_annotation = false;
    for (index, (_, line)) in lines.iter().enumerate() {
        if definitions.iter().any(|t| contains_at_boundary(line, t)) {
            starts.push(index);
            pending_annotation = false;
            continue;
        }
        if annotations.iter().any(|t| line.contains(t.as_str())) {
            pending_annotation = true;
            continue;
        }
        if pending_annotation {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('@') || trimmed.starts_with('[') {
                // Blank lines and further decorations keep the marker alive.
                continue;
            }
            starts.push(index);
            pending_annotation = false;
        }
    }
    starts.dedup();

    starts
        .iter()
        .map(|&start| {
            let end = match block {
                BlockStyle::Braces => braces_extent(&lines, start),
                BlockStyle::Indent => indent_extent(&lines, start),
                BlockStyle::End => end_extent(&lines, start),
            };
            TestMethod {
                name: excerpt_of(&lines[start].1),
                start_line: lines[start].0,
                end_line: lines[end].0,
            }
        })
        .collect()
}

/// Strip `//` line comments outside strings so a commented brace does not
/// unbalance the count.
fn strip_line_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    let mut quote: Option<u8> = None;
    let mut escaped = false;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == q {
                quote = None;
            }
        } else if b == b'"' || b == b'\'' {
            quote = Some(b);
        } else if b == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            return &line[..i];
        }
        i += 1;
    }
    line
}

/// Count brace depth changes on one line, ignoring braces inside strings.
fn brace_delta(line: &str) -> (i32, bool) {
    let line = strip_line_comment(line);
    let mut delta = 0;
    let mut any_open = false;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in line.chars() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => quote = Some(c),
            '{' => {
                delta += 1;
                any_open = true;
            }
            '}' => delta -= 1,
            _ => {}
        }
    }
    (delta, any_open)
}

/// Extent of a brace-delimited body: from the header, find the first `{`
/// within a few lines and balance to its close. Headers that never open a
/// body span just themselves.
fn braces_extent(lines: &[(u32, String)], start: usize) -> usize {
    let mut depth = 0i32;
    let mut opened = false;
    for (index, (_, line)) in lines.iter().enumerate().skip(start) {
        if !opened && index > start + 8 {
            break;
        }
        let (delta, any_open) = brace_delta(line);
        depth += delta;
        opened = opened || any_open;
        if opened && depth <= 0 {
            return index;
        }
    }
    if opened {
        lines.len() - 1
    } else {
        start
    }
}

fn indent_width(line: &str) -> usize {
    line.chars().take_while(|c| *c == ' ' || *c == '\t').count()
}

/// Extent of an indentation-scoped body: every following line more
/// indented than the header (blank lines inside do not end it).
fn indent_extent(lines: &[(u32, String)], start: usize) -> usize {
    let base = indent_width(&lines[start].1);
    let mut end = start;
    for (index, (_, line)) in lines.iter().enumerate().skip(start + 1) {
        if line.trim().is_empty() {
            continue;
        }
        if indent_width(line) > base {
            end = index;
        } else {
            break;
        }
    }
    end
}

const END_BLOCK_OPENERS: [&str; 10] =
    ["def", "if", "unless", "while", "until", "case", "class", "module", "begin", "for"];

/// Extent of a `def`/`end` body, tracking nested blocks (including
/// trailing `do` blocks).
fn end_extent(lines: &[(u32, String)], start: usize) -> usize {
    let mut depth = 1i32;
    for (index, (_, line)) in lines.iter().enumerate().skip(start + 1) {
        let trimmed = line.trim();
        let first_word = trimmed.split(|c: char| !c.is_alphanumeric() && c != '_').next();
        if let Some(word) = first_word {
            if END_BLOCK_OPENERS.contains(&word) {
                depth += 1;
            }
        }
        if trimmed.ends_with(" do") || trimmed.contains(" do |") {
            depth += 1;
        }
        if trimmed == "end" || trimmed.starts_with("end ") || trimmed.starts_with("end#") {
            depth -= 1;
            if depth == 0 {
                return index;
            }
        }
    }
    lines.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, LanguageId};

    fn file(path: &str, lang: &str, body: &str) -> SourceFile {
        SourceFile::from_bytes(
            "p",
            path,
            Some(LanguageId(lang.into())),
            body.as_bytes().to_vec(),
        )
    }

    #[test]
    fn annotation_marks_the_following_method() {
        let f = file(
            "T.java",
            "java",
            "public class T {\n  @Test\n  public void adds() {\n    assertEquals(2, 2);\n  }\n\n  private int helper() {\n    return 1;\n  }\n}\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 1);
        assert_eq!((methods[0].start_line, methods[0].end_line), (3, 5));
        assert!(methods[0].name.contains("adds"));
    }

    #[test]
    fn stacked_attributes_keep_the_marker_alive() {
        let f = file(
            "T.cs",
            "csharp",
            "using Xunit;\nclass T {\n  [Fact]\n  [Trait(\"a\", \"b\")]\n  public void Adds() {\n    Assert.Equal(2, 2);\n  }\n}\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 1);
        assert_eq!(methods[0].start_line, 5);
    }

    #[test]
    fn python_bodies_end_where_indentation_returns() {
        let f = file(
            "t.py",
            "python",
            "class T(unittest.TestCase):\n    def test_one(self):\n        a = 1\n\n        self.assertEqual(a, 1)\n    def test_two(self):\n        self.assertTrue(True)\nprint('done')\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 2);
        assert_eq!((methods[0].start_line, methods[0].end_line), (2, 5));
        assert_eq!((methods[1].start_line, methods[1].end_line), (6, 7));
    }

    #[test]
    fn ruby_bodies_balance_nested_blocks_to_their_end() {
        let f = file(
            "t.rb",
            "ruby",
            "class T < Minitest::Test\n  def test_items\n    [1, 2].each do |n|\n      assert n > 0\n    end\n  end\n  def helper\n  end\nend\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 1);
        assert_eq!((methods[0].start_line, methods[0].end_line), (2, 6));
    }

    #[test]
    fn definition_token_needs_a_word_boundary() {
        let f = file(
            "t.js",
            "javascript",
            "function commit(x) {\n  return x;\n}\nit('adds', function () {\n  assert.equal(1, 1);\n});\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 1, "commit( must not read as it(");
        assert_eq!((methods[0].start_line, methods[0].end_line), (4, 6));
    }

    #[test]
    fn commented_braces_do_not_unbalance() {
        let f = file(
            "T.java",
            "java",
            "@Test\nvoid x() { // }\n  assertTrue(true);\n}\n",
        );
        let methods = segment_test_methods(&f, Catalog::builtin());
        assert_eq!(methods.len(), 1);
        assert_eq!((methods[0].start_line, methods[0].end_line), (2, 4));
    }

    #[test]
    fn file_with_no_markers_has_no_methods() {
        let f = file("t.pl", "perl", "ok(1, 'fine');\nis(2, 2, 'two');\n");
        assert!(segment_test_methods(&f, Catalog::builtin()).is_empty());
    }
}
