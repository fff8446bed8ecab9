//! Framework and keyword catalog.
//!
//! A [`Catalog`] is the single declarative registry driving the whole
//! analysis: which languages exist (keyed by file extension), which
//! unit-testing frameworks exist per language (with line-anchored import
//! regexes), and which testing keywords vote a file into the test set.
//! Detection code never hardcodes a framework or keyword — extending the
//! tool to a new framework is a catalog edit, not a code change.
//!
//! Catalogs are authored as TOML (see `docs/catalog-format.md`), validated
//! and compiled at load time, and rejected outright on any violation: an
//! unknown language reference, a duplicate extension, a regex that does not
//! compile. The bundled registry lives in `catalog/default.toml` and is
//! embedded into the binary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Identifier of a language table entry, e.g. `java`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageId(pub String);

/// Identifier of a framework entry, e.g. `junit`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrameworkId(pub String);

impl std::fmt::Display for LanguageId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for FrameworkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl LanguageId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FrameworkId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// How a language delimits method bodies. Drives test-method segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockStyle {
    /// `{ ... }` bodies (C family, Java, JavaScript, PHP, Perl).
    #[default]
    Braces,
    /// Indentation-scoped bodies (Python).
    Indent,
    /// `def ... end` bodies (Ruby).
    End,
}

/// One language entry: display name, owned extensions, block style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageDef {
    /// Human-readable name, e.g. `C++`.
    pub name: String,
    /// Extensions owned by this language, each starting with a dot.
    /// Multi-part suffixes such as `.test.js` are allowed; the longest
    /// registered suffix wins when classifying a file.
    pub extensions: Vec<String>,
    /// Body delimiter style; defaults to braces.
    #[serde(default)]
    pub block: BlockStyle,
}

/// One unit-testing framework entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkSpec {
    /// Stable identifier, unique within the catalog.
    pub id: FrameworkId,
    /// Display name as reported in output tables.
    #[serde(rename = "name")]
    pub display_name: String,
    /// Languages the framework applies to. Never empty.
    pub languages: BTreeSet<LanguageId>,
    /// Line-anchored regexes recognizing an import/include of the framework.
    #[serde(rename = "imports")]
    pub import_patterns: Vec<String>,
    /// Literal testing keywords this framework contributes to the keyword
    /// vote of each of its languages (e.g. `@Test` for JUnit).
    #[serde(default)]
    pub keywords: Vec<String>,
}

/// Testing keywords for one language (or the `default` fallback set).
///
/// All token arrays except `assertion_callees` participate in the keyword
/// half of the test-file vote. The role split exists because pattern
/// detection needs more structure than the vote does: annotations flag the
/// *next* definition as a test method, definition prefixes start one
/// directly, teardown markers feed the Implicit Teardown detector, and
/// assertion callees name the functions counted as assertions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeywordSet {
    /// Case-sensitive substrings counted as testing keywords.
    #[serde(default)]
    pub literals: Vec<String>,
    /// Per-line regexes counted as testing keywords.
    #[serde(default)]
    pub patterns: Vec<String>,
    /// Literals that mark the next method definition as a test case
    /// (e.g. `@Test`, `[Fact]`). Also counted as testing keywords.
    #[serde(default)]
    pub test_annotations: Vec<String>,
    /// Literals whose line begins a test method (e.g. `def test_`, `it(`).
    /// Also counted as testing keywords.
    #[serde(default)]
    pub test_definitions: Vec<String>,
    /// Literals naming teardown hooks beyond the universal `teardown`
    /// substring (e.g. `@AfterClass`). Also counted as testing keywords.
    #[serde(default)]
    pub teardown_markers: Vec<String>,
    /// Regexes matched against call-site callee names to count assertions.
    /// Not part of the test-file vote.
    #[serde(default)]
    pub assertion_callees: Vec<String>,
}

impl KeywordSet {
    /// All literal tokens participating in the test-file keyword vote.
    pub fn vote_literals(&self) -> impl Iterator<Item = &str> {
        self.literals
            .iter()
            .chain(&self.test_annotations)
            .chain(&self.test_definitions)
            .chain(&self.teardown_markers)
            .map(String::as_str)
    }

    fn is_empty(&self) -> bool {
        self.vote_literals().next().is_none() && self.patterns.is_empty()
    }
}

/// Key of the fallback keyword set usable by any language without its own.
pub const DEFAULT_KEYWORD_SET: &str = "default";

/// The serializable half of a catalog. Equality and round-tripping are
/// defined on this data alone; compiled matchers are derived state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CatalogData {
    version: String,
    #[serde(default)]
    languages: BTreeMap<LanguageId, LanguageDef>,
    #[serde(default)]
    keywords: BTreeMap<String, KeywordSet>,
    #[serde(default)]
    frameworks: Vec<FrameworkSpec>,
}

/// A compiled condition-2 token: the source string that names the hit in
/// evidence output, plus how to match it.
#[derive(Debug, Clone)]
pub enum VoteToken {
    /// Matched as a case-sensitive substring of a line.
    Literal(String),
    /// Matched as a regex against a line.
    Pattern(String, Regex),
}

impl VoteToken {
    /// The catalog-source spelling of the token, as reported in evidence.
    pub fn source(&self) -> &str {
        match self {
            VoteToken::Literal(s) => s,
            VoteToken::Pattern(s, _) => s,
        }
    }

    /// Whether the token occurs in `line`.
    pub fn matches(&self, line: &str) -> bool {
        match self {
            VoteToken::Literal(s) => line.contains(s.as_str()),
            VoteToken::Pattern(_, re) => re.is_match(line),
        }
    }
}

#[derive(Debug, Default)]
struct Compiled {
    /// (lowercased extension, language), sorted longest extension first so
    /// the first suffix match wins.
    extensions: Vec<(String, LanguageId)>,
    /// Framework import regexes, in catalog order per framework.
    imports: BTreeMap<FrameworkId, Vec<Regex>>,
    /// Per-language effective vote tokens: the language's keyword set
    /// (falling back to `default`) plus every keyword contributed by a
    /// framework of that language. Deduplicated by source spelling.
    vote_tokens: BTreeMap<LanguageId, Vec<VoteToken>>,
    /// Per-language compiled assertion-callee regexes.
    assertion_callees: BTreeMap<LanguageId, Vec<Regex>>,
    /// Framework ids per language, sorted.
    by_language: BTreeMap<LanguageId, Vec<FrameworkId>>,
}

/// Validated, query-ready catalog.
pub struct Catalog {
    data: CatalogData,
    compiled: Compiled,
}

impl std::fmt::Debug for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalog")
            .field("version", &self.data.version)
            .field("languages", &self.data.languages.len())
            .field("frameworks", &self.data.frameworks.len())
            .finish()
    }
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl Clone for Catalog {
    fn clone(&self) -> Self {
        // Recompile rather than clone compiled regexes; loading already
        // proved the data valid, so this cannot fail.
        Catalog::from_data(self.data.clone()).expect("validated catalog re-compiles")
    }
}

/// Why a catalog failed to load.
#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// TOML syntax or shape error; the message carries line/column context.
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("catalog version must be a non-empty string")]
    EmptyVersion,
    #[error("framework at index {0} has an empty id")]
    EmptyFrameworkId(usize),
    #[error("duplicate framework id `{0}`")]
    DuplicateFramework(FrameworkId),
    #[error("framework `{0}` lists no languages")]
    FrameworkWithoutLanguages(FrameworkId),
    #[error("framework `{framework}` references unknown language `{language}`")]
    UnknownLanguage { framework: FrameworkId, language: LanguageId },
    #[error("framework `{framework}` import pattern `{pattern}` does not compile: {source}")]
    BadImportPattern {
        framework: FrameworkId,
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("language `{0}` lists no extensions")]
    LanguageWithoutExtensions(LanguageId),
    #[error("language `{language}` extension `{extension}` must start with a dot and name at least one character")]
    BadExtension { language: LanguageId, extension: String },
    #[error("extension `{extension}` is claimed by both `{first}` and `{second}`")]
    AmbiguousExtension { extension: String, first: LanguageId, second: LanguageId },
    #[error("keyword set key `{0}` is neither `default` nor a declared language")]
    UnknownKeywordLanguage(String),
    #[error("keyword set `{set}` repeats token `{token}`")]
    DuplicateKeywordToken { set: String, token: String },
    #[error("keyword set `{set}` contains an empty token")]
    EmptyKeywordToken { set: String },
    #[error("keyword set `{set}` pattern `{pattern}` does not compile: {source}")]
    BadKeywordPattern {
        set: String,
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("framework `{framework}` language `{language}` has no keyword set and no `default` set exists")]
    MissingKeywordSet { framework: FrameworkId, language: LanguageId },
    #[error("keyword set `{0}` has no vote tokens; delete it or add tokens")]
    EmptyKeywordSet(String),
    #[error("framework `{framework}` contributes an empty keyword")]
    EmptyFrameworkKeyword { framework: FrameworkId },
}

impl Catalog {
    /// Load and validate a catalog from a TOML file.
    pub fn load(path: &Path) -> Result<Catalog, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Catalog::from_toml_str(&text)
    }

    /// Load and validate a catalog from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Catalog, CatalogError> {
        let data: CatalogData =
            toml::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        Catalog::from_data(data)
    }

    /// The registry bundled into the binary.
    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Catalog::from_toml_str(include_str!("../catalog/default.toml"))
                .expect("bundled catalog is valid")
        })
    }

    fn from_data(data: CatalogData) -> Result<Catalog, CatalogError> {
        validate(&data)?;
        let compiled = compile(&data)?;
        Ok(Catalog { data, compiled })
    }

    /// Serialize back to TOML. Loading the output yields an equal catalog.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.data).expect("catalog data serializes")
    }

    pub fn version(&self) -> &str {
        &self.data.version
    }

    /// Declared languages, keyed by id.
    pub fn languages(&self) -> &BTreeMap<LanguageId, LanguageDef> {
        &self.data.languages
    }

    /// All frameworks, sorted by id.
    pub fn frameworks(&self) -> &[FrameworkSpec] {
        &self.data.frameworks
    }

    pub fn framework(&self, id: &FrameworkId) -> Option<&FrameworkSpec> {
        self.data.frameworks.iter().find(|f| &f.id == id)
    }

    /// Frameworks applicable to `language`, sorted by id. Empty for a
    /// language with no registered frameworks.
    pub fn frameworks_for_language(&self, language: &LanguageId) -> Vec<&FrameworkSpec> {
        self.compiled
            .by_language
            .get(language)
            .map(|ids| {
                ids.iter()
                    .map(|id| self.framework(id).expect("indexed framework exists"))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Classify a path by longest registered extension suffix, case-
    /// insensitively. `None` when no registered extension matches.
    pub fn language_of(&self, path: &Path) -> Option<&LanguageId> {
        let name = path.file_name()?.to_string_lossy().to_lowercase();
        self.compiled
            .extensions
            .iter()
            .find(|(ext, _)| name.len() > ext.len() && name.ends_with(ext.as_str()))
            .map(|(_, lang)| lang)
    }

    /// Compiled import regexes for one framework, in catalog order.
    pub fn import_matchers(&self, id: &FrameworkId) -> &[Regex] {
        self.compiled.imports.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Effective keyword-vote tokens for one language: its keyword set
    /// (or the `default` set) plus framework keyword contributions.
    pub fn vote_tokens(&self, language: &LanguageId) -> &[VoteToken] {
        self.compiled.vote_tokens.get(language).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Compiled assertion-callee regexes for one language (with `default`
    /// fallback applied at load time).
    pub fn assertion_callees(&self, language: &LanguageId) -> &[Regex] {
        self.compiled.assertion_callees.get(language).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The keyword set serving `language`, honoring the `default` fallback.
    pub fn keyword_set(&self, language: &LanguageId) -> Option<&KeywordSet> {
        self.data
            .keywords
            .get(language.as_str())
            .or_else(|| self.data.keywords.get(DEFAULT_KEYWORD_SET))
    }

    /// Block style for segmentation; braces for unknown languages.
    pub fn block_style(&self, language: &LanguageId) -> BlockStyle {
        self.data.languages.get(language).map(|l| l.block).unwrap_or_default()
    }
}

/// Load and validate the catalog at `path`.
pub fn load_catalog(path: &Path) -> Result<Catalog, CatalogError> {
    Catalog::load(path)
}

fn validate(data: &CatalogData) -> Result<(), CatalogError> {
    if data.version.trim().is_empty() {
        return Err(CatalogError::EmptyVersion);
    }

    // Languages: non-empty dotted extensions, unique across the catalog.
    let mut ext_owner: BTreeMap<String, LanguageId> = BTreeMap::new();
    for (lang, def) in &data.languages {
        if def.extensions.is_empty() {
            return Err(CatalogError::LanguageWithoutExtensions(lang.clone()));
        }
        for ext in &def.extensions {
            if !ext.starts_with('.') || ext.len() < 2 {
                return Err(CatalogError::BadExtension {
                    language: lang.clone(),
                    extension: ext.clone(),
                });
            }
            let key = ext.to_lowercase();
            if let Some(first) = ext_owner.get(&key) {
                return Err(CatalogError::AmbiguousExtension {
                    extension: ext.clone(),
                    first: first.clone(),
                    second: lang.clone(),
                });
            }
            ext_owner.insert(key, lang.clone());
        }
    }

    // Keyword sets: known key, non-empty deduplicated tokens, compiling
    // patterns, at least one vote token.
    for (key, set) in &data.keywords {
        if key != DEFAULT_KEYWORD_SET && !data.languages.contains_key(&LanguageId(key.clone())) {
            return Err(CatalogError::UnknownKeywordLanguage(key.clone()));
        }
        let mut seen = BTreeSet::new();
        for token in set.vote_literals().chain(set.patterns.iter().map(String::as_str)) {
            if token.is_empty() {
                return Err(CatalogError::EmptyKeywordToken { set: key.clone() });
            }
            if !seen.insert(token) {
                return Err(CatalogError::DuplicateKeywordToken {
                    set: key.clone(),
                    token: token.to_string(),
                });
            }
        }
        for pattern in set.patterns.iter().chain(&set.assertion_callees) {
            Regex::new(pattern).map_err(|source| CatalogError::BadKeywordPattern {
                set: key.clone(),
                pattern: pattern.clone(),
                source,
            })?;
        }
        if set.is_empty() {
            return Err(CatalogError::EmptyKeywordSet(key.clone()));
        }
    }

    // Frameworks: unique non-empty ids, known non-empty language lists,
    // compiling import patterns, a keyword set for every language.
    let mut ids = BTreeSet::new();
    for (index, fw) in data.frameworks.iter().enumerate() {
        if fw.id.as_str().trim().is_empty() {
            return Err(CatalogError::EmptyFrameworkId(index));
        }
        if !ids.insert(fw.id.clone()) {
            return Err(CatalogError::DuplicateFramework(fw.id.clone()));
        }
        if fw.languages.is_empty() {
            return Err(CatalogError::FrameworkWithoutLanguages(fw.id.clone()));
        }
        for lang in &fw.languages {
            if !data.languages.contains_key(lang) {
                return Err(CatalogError::UnknownLanguage {
                    framework: fw.id.clone(),
                    language: lang.clone(),
                });
            }
            if !data.keywords.contains_key(lang.as_str())
                && !data.keywords.contains_key(DEFAULT_KEYWORD_SET)
            {
                return Err(CatalogError::MissingKeywordSet {
                    framework: fw.id.clone(),
                    language: lang.clone(),
                });
            }
        }
        for pattern in &fw.import_patterns {
            Regex::new(pattern).map_err(|source| CatalogError::BadImportPattern {
                framework: fw.id.clone(),
                pattern: pattern.clone(),
                source,
            })?;
        }
        if fw.keywords.iter().any(|k| k.is_empty()) {
            return Err(CatalogError::EmptyFrameworkKeyword { framework: fw.id.clone() });
        }
    }

    Ok(())
}

fn compile(data: &CatalogData) -> Result<Compiled, CatalogError> {
    let mut compiled = Compiled::default();

    for (lang, def) in &data.languages {
        for ext in &def.extensions {
            compiled.extensions.push((ext.to_lowercase(), lang.clone()));
        }
    }
    // Longest suffix first; lexicographic tiebreak keeps the order total.
    compiled.extensions.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));

    for fw in &data.frameworks {
        let regexes = fw
            .import_patterns
            .iter()
            .map(|p| Regex::new(p))
            .collect::<Result<Vec<_>, _>>()
            .expect("validated import patterns compile");
        compiled.imports.insert(fw.id.clone(), regexes);
        for lang in &fw.languages {
            compiled.by_language.entry(lang.clone()).or_default().push(fw.id.clone());
        }
    }
    for ids in compiled.by_language.values_mut() {
        ids.sort();
    }

    // Effective vote tokens per language that has (or inherits) a keyword
    // set. Framework keyword contributions append after the language set;
    // duplicates collapse on source spelling.
    let all_languages: BTreeSet<&LanguageId> = data.languages.keys().collect();
    for lang in all_languages {
        let Some(set) = data
            .keywords
            .get(lang.as_str())
            .or_else(|| data.keywords.get(DEFAULT_KEYWORD_SET))
        else {
            continue;
        };
        let mut tokens: Vec<VoteToken> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for lit in set.vote_literals() {
            if seen.insert(lit.to_string()) {
                tokens.push(VoteToken::Literal(lit.to_string()));
            }
        }
        for pat in &set.patterns {
            if seen.insert(pat.clone()) {
                let re = Regex::new(pat).expect("validated keyword patterns compile");
                tokens.push(VoteToken::Pattern(pat.clone(), re));
            }
        }
        if let Some(ids) = compiled.by_language.get(lang) {
            for id in ids {
                let fw = data.frameworks.iter().find(|f| &f.id == id).expect("indexed");
                for kw in &fw.keywords {
                    if seen.insert(kw.clone()) {
                        tokens.push(VoteToken::Literal(kw.clone()));
                    }
                }
            }
        }
        compiled.vote_tokens.insert(lang.clone(), tokens);

        let callees = set
            .assertion_callees
            .iter()
            .map(|p| Regex::new(p))
            .collect::<Result<Vec<_>, _>>()
            .expect("validated callee patterns compile");
        compiled.assertion_callees.insert(lang.clone(), callees);
    }

    Ok(compiled)
}
