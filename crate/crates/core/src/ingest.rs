//! Corpus ingestion: enumerating projects, scanning source trees,
//! counting lines, deduplicating identical projects, and fetching
//! manifest-listed projects into a local working directory.
//!
//! Scanning never follows symlinks, treats unreadable files as
//! diagnostics rather than failures, and returns files sorted by
//! relative path so downstream stages are order-independent.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::catalog::{Catalog, LanguageId};
use crate::diagnostics::Diagnostic;

/// Bytes sniffed for a NUL when deciding whether a file is binary.
const BINARY_SNIFF_LEN: usize = 8192;

/// One project root on disk, identified by a corpus-unique id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjectSource {
    pub id: String,
    pub root: PathBuf,
}

/// One scanned file with its line counts and raw content.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub project_id: String,
    /// Path relative to the project root, `/`-separated.
    pub rel_path: String,
    /// Owning language, or `None` when no registered extension matches
    /// (or the file is binary).
    pub language: Option<LanguageId>,
    /// Physical line count.
    pub total_lines: u32,
    /// Lines containing at least one non-whitespace character.
    pub code_lines: u32,
    content: Vec<u8>,
}

impl SourceFile {
    /// Build a file record from raw bytes, counting its lines.
    pub fn from_bytes(
        project_id: impl Into<String>,
        rel_path: impl Into<String>,
        language: Option<LanguageId>,
        content: Vec<u8>,
    ) -> SourceFile {
        let (total_lines, code_lines) = count_lines(&content);
        SourceFile {
            project_id: project_id.into(),
            rel_path: rel_path.into(),
            language,
            total_lines,
            code_lines,
            content,
        }
    }

    /// Record for a binary file: no language, no lines, no retained bytes.
    pub fn binary(project_id: impl Into<String>, rel_path: impl Into<String>) -> SourceFile {
        SourceFile {
            project_id: project_id.into(),
            rel_path: rel_path.into(),
            language: None,
            total_lines: 0,
            code_lines: 0,
            content: Vec::new(),
        }
    }

    pub fn content(&self) -> &[u8] {
        &self.content
    }

    /// Iterate physical lines as `(1-based line number, line)`. A line
    /// that is not valid UTF-8 yields `Err(line_number)` so callers can
    /// report it once and skip it.
    pub fn lines(&self) -> impl Iterator<Item = (u32, Result<&str, u32>)> {
        iter_lines(&self.content)
    }
}

/// Split bytes into physical lines: `\n`-separated, trailing `\r`
/// stripped, no phantom line after a final newline.
pub fn iter_lines(content: &[u8]) -> impl Iterator<Item = (u32, Result<&str, u32>)> {
    let trimmed = content.strip_suffix(b"\n").unwrap_or(content);
    let non_empty = !content.is_empty();
    trimmed
        .split(|&b| b == b'\n')
        .enumerate()
        .filter(move |_| non_empty)
        .map(|(i, raw)| {
            let no = (i + 1) as u32;
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            (no, std::str::from_utf8(raw).map_err(|_| no))
        })
}

/// Count `(total, non-blank)` physical lines in raw bytes.
pub fn count_lines(content: &[u8]) -> (u32, u32) {
    let mut total = 0u32;
    let mut code = 0u32;
    let trimmed = content.strip_suffix(b"\n").unwrap_or(content);
    if content.is_empty() {
        return (0, 0);
    }
    for line in trimmed.split(|&b| b == b'\n') {
        total += 1;
        if line.iter().any(|b| !b.is_ascii_whitespace()) {
            code += 1;
        }
    }
    (total, code)
}

/// Whether the first 8 KiB contain a NUL byte.
pub fn looks_binary(content: &[u8]) -> bool {
    content[..content.len().min(BINARY_SNIFF_LEN)].contains(&0)
}

/// Scan configuration shared by every project in a run.
#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Glob patterns matched against `/`-separated relative paths.
    /// A matching directory is pruned with its whole subtree.
    pub excludes: Vec<String>,
}

/// Result of scanning one project tree.
#[derive(Debug)]
pub struct ScanOutcome {
    /// All non-excluded regular files, sorted by relative path.
    pub files: Vec<SourceFile>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Why a scan could not start at all. Per-file problems never land here;
/// they become diagnostics in the outcome.
#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("project root {0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("invalid exclude pattern `{pattern}`: {source}")]
    BadExcludePattern {
        pattern: String,
        #[source]
        source: globset::Error,
    },
}

fn build_globset(patterns: &[String]) -> Result<GlobSet, ScanError> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|source| ScanError::BadExcludePattern {
            pattern: pattern.clone(),
            source,
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|source| ScanError::BadExcludePattern {
        pattern: patterns.join(","),
        source,
    })
}

fn relative_slash_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let parts: Vec<String> =
        rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    parts.join("/")
}

/// Walk one project tree, classify each file by the catalog, count lines,
/// and flag binaries. Unreadable entries become diagnostics.
pub fn scan_project(
    project_id: &str,
    root: &Path,
    catalog: &Catalog,
    options: &ScanOptions,
) -> Result<ScanOutcome, ScanError> {
    if !root.is_dir() {
        return Err(ScanError::NotADirectory(root.to_path_buf()));
    }
    let excludes = build_globset(&options.excludes)?;

    let mut paths: Vec<PathBuf> = Vec::new();
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let walker = WalkDir::new(root).follow_links(false).into_iter();
    let mut it = walker.filter_entry(|entry| {
        let rel = relative_slash_path(root, entry.path());
        rel.is_empty() || !excludes.is_match(rel.as_str())
    });
    while let Some(entry) = it.next() {
        match entry {
            Ok(entry) if entry.file_type().is_file() => paths.push(entry.into_path()),
            Ok(_) => {}
            Err(err) => {
                let rel = err
                    .path()
                    .map(|p| relative_slash_path(root, p))
                    .unwrap_or_default();
                diagnostics.push(Diagnostic::file(
                    project_id,
                    rel,
                    format!("skipped unreadable entry: {err}"),
                ));
            }
        }
    }

    let mut results: Vec<Result<SourceFile, Diagnostic>> = paths
        .par_iter()
        .map(|path| {
            let rel = relative_slash_path(root, path);
            match std::fs::read(path) {
                Ok(bytes) if looks_binary(&bytes) => Ok(SourceFile::binary(project_id, rel)),
                Ok(bytes) => {
                    let language = catalog.language_of(Path::new(&rel)).cloned();
                    Ok(SourceFile::from_bytes(project_id, rel, language, bytes))
                }
                Err(err) => Err(Diagnostic::file(
                    project_id,
                    rel,
                    format!("skipped unreadable file: {err}"),
                )),
            }
        })
        .collect();
    // Deterministic regardless of worker interleaving.
    results.sort_by(|a, b| {
        let ka = match a {
            Ok(f) => f.rel_path.as_str(),
            Err(d) => d.path.as_deref().unwrap_or(""),
        };
        let kb = match b {
            Ok(f) => f.rel_path.as_str(),
            Err(d) => d.path.as_deref().unwrap_or(""),
        };
        ka.cmp(kb)
    });

    let mut files = Vec::with_capacity(results.len());
    for result in results {
        match result {
            Ok(file) => files.push(file),
            Err(diag) => diagnostics.push(diag),
        }
    }
    diagnostics.sort();
    Ok(ScanOutcome { files, diagnostics })
}

/// Size class of a project by production lines of code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    VerySmall,
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub fn label(self) -> &'static str {
        match self {
            SizeClass::VerySmall => "very small",
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }

    pub const ALL: [SizeClass; 4] =
        [SizeClass::VerySmall, SizeClass::Small, SizeClass::Medium, SizeClass::Large];
}

/// Bucket a project by production LOC: under 1k, 1k–10k, 10k–100k, 100k+.
pub fn classify_size(production_loc: u64) -> SizeClass {
    match production_loc {
        0..=999 => SizeClass::VerySmall,
        1000..=9999 => SizeClass::Small,
        10000..=99999 => SizeClass::Medium,
        _ => SizeClass::Large,
    }
}

/// Why a project was removed before analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "kept")]
pub enum DropReason {
    /// No file in the tree has a single non-blank line.
    Empty,
    /// Byte-identical content multiset as the named kept project.
    DuplicateOf(String),
}

/// One removed project and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedProject {
    pub id: String,
    #[serde(flatten)]
    pub reason: DropReason,
}

/// Result of corpus deduplication.
#[derive(Debug)]
pub struct DedupOutcome {
    /// Surviving projects, sorted by id.
    pub kept: Vec<ProjectSource>,
    /// Content digest per kept project id.
    pub digests: BTreeMap<String, String>,
    /// Removed projects, sorted by id.
    pub dropped: Vec<DroppedProject>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Digest of one project: SHA-256 over the sorted list of per-file content
/// hashes. File *names* are deliberately excluded so renamed copies of the
/// same content still collide; returns `None` when no file has code.
fn project_digest(root: &Path) -> (Option<String>, bool, Vec<Diagnostic>) {
    let mut file_hashes: Vec<String> = Vec::new();
    let mut any_code = false;
    let mut diagnostics = Vec::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                diagnostics.push(Diagnostic::corpus(format!(
                    "dedup skipped unreadable entry under {}: {err}",
                    root.display()
                )));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        match std::fs::read(entry.path()) {
            Ok(bytes) => {
                if bytes.iter().any(|b| !b.is_ascii_whitespace()) {
                    any_code = true;
                }
                let mut hasher = Sha256::new();
                hasher.update(&bytes);
                file_hashes.push(hex_digest(&hasher.finalize()));
            }
            Err(err) => diagnostics.push(Diagnostic::corpus(format!(
                "dedup skipped unreadable file {}: {err}",
                entry.path().display()
            ))),
        }
    }
    if file_hashes.is_empty() || !any_code {
        return (None, any_code, diagnostics);
    }
    file_hashes.sort();
    let mut hasher = Sha256::new();
    for h in &file_hashes {
        hasher.update(h.as_bytes());
    }
    (Some(hex_digest(&hasher.finalize())), any_code, diagnostics)
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut out, b| {
        let _ = write!(out, "{b:02x}");
        out
    })
}

/// Remove byte-identical duplicate projects (keeping the lexicographically
/// smallest id of each group) and projects with zero code lines.
pub fn dedup_projects(projects: &[ProjectSource]) -> DedupOutcome {
    let mut sorted: Vec<&ProjectSource> = projects.iter().collect();
    sorted.sort();

    let digests: Vec<(Option<String>, Vec<Diagnostic>)> = sorted
        .par_iter()
        .map(|p| {
            let (digest, _, diags) = project_digest(&p.root);
            (digest, diags)
        })
        .collect();

    let mut kept = Vec::new();
    let mut kept_digests = BTreeMap::new();
    let mut dropped = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    for (project, (digest, diags)) in sorted.iter().zip(digests) {
        diagnostics.extend(diags);
        match digest {
            None => dropped.push(DroppedProject {
                id: project.id.clone(),
                reason: DropReason::Empty,
            }),
            Some(digest) => match seen.get(&digest) {
                Some(original) => dropped.push(DroppedProject {
                    id: project.id.clone(),
                    reason: DropReason::DuplicateOf(original.clone()),
                }),
                None => {
                    seen.insert(digest.clone(), project.id.clone());
                    kept_digests.insert(project.id.clone(), digest);
                    kept.push((*project).clone());
                }
            },
        }
    }
    dropped.sort_by(|a, b| a.id.cmp(&b.id));
    diagnostics.sort();
    DedupOutcome { kept, digests: kept_digests, dropped, diagnostics }
}

/// Result of materializing a manifest.
#[derive(Debug)]
pub struct FetchOutcome {
    /// Successfully materialized projects, sorted by id.
    pub fetched: Vec<ProjectSource>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Why a fetch could not run at all.
#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: expected `<id> <path-or-url>`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("manifest line {line}: duplicate project id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error(
        "manifest lists remote sources but `{git}` is not runnable ({source}); \
         install git or restrict the manifest to local paths"
    )]
    GitUnavailable {
        git: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot create destination {path}: {source}")]
    Dest {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug)]
struct ManifestEntry {
    id: String,
    source: String,
}

fn is_remote(source: &str) -> bool {
    source.contains("://") || source.starts_with("git@")
}

fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, FetchError> {
    let mut entries = Vec::new();
    let mut ids = std::collections::BTreeSet::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(source), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(FetchError::Malformed { line: index + 1, text: line.to_string() });
        };
        if !ids.insert(id.to_string()) {
            return Err(FetchError::DuplicateId { line: index + 1, id: id.to_string() });
        }
        entries.push(ManifestEntry { id: id.to_string(), source: source.to_string() });
    }
    Ok(entries)
}

fn copy_tree(from: &Path, to: &Path) -> std::io::Result<()> {
    for entry in WalkDir::new(from).follow_links(false) {
        let entry = entry.map_err(std::io::Error::other)?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dest)?;
        } else if entry.file_type().is_file() {
            if let Some(parent) = dest.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::copy(entry.path(), &dest)?;
        }
    }
    Ok(())
}

/// Materialize every manifest entry under `dest/<id>`. Remote entries are
/// shallow-cloned with git; local entries are copied. A failing entry is a
/// diagnostic, not a fatal error — but an unusable git binary is fatal
/// when the manifest needs it, and a malformed manifest is always fatal.
pub fn fetch_manifest(manifest: &Path, dest: &Path) -> Result<FetchOutcome, FetchError> {
    fetch_manifest_with_git(manifest, dest, "git")
}

/// [`fetch_manifest`] with an explicit git executable, for tests.
pub fn fetch_manifest_with_git(
    manifest: &Path,
    dest: &Path,
    git: &str,
) -> Result<FetchOutcome, FetchError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| FetchError::Io {
        path: manifest.display().to_string(),
        source,
    })?;
    let entries = parse_manifest(&text)?;

    if entries.iter().any(|e| is_remote(&e.source)) {
        Command::new(git)
            .arg("--version")
            .output()
            .map_err(|source| FetchError::GitUnavailable { git: git.to_string(), source })?;
    }
    std::fs::create_dir_all(dest).map_err(|source| FetchError::Dest {
        path: dest.display().to_string(),
        source,
    })?;

    let mut fetched = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in entries {
        let target = dest.join(&entry.id);
        let result = if is_remote(&entry.source) {
            clone_remote(git, &entry.source, &target)
        } else {
            let from = PathBuf::from(&entry.source);
            if from.is_dir() {
                copy_tree(&from, &target).map_err(|e| e.to_string())
            } else {
                Err(format!("local source {} is not a directory", from.display()))
            }
        };
        match result {
            Ok(()) => fetched.push(ProjectSource { id: entry.id, root: target }),
            Err(message) => diagnostics.push(Diagnostic::project(
                entry.id,
                format!("fetch failed: {message}"),
            )),
        }
    }
    fetched.sort();
    diagnostics.sort();
    Ok(FetchOutcome { fetched, diagnostics })
}

fn clone_remote(git: &str, url: &str, target: &Path) -> Result<(), String> {
    let output = Command::new(git)
        .args(["clone", "--depth", "1", "--quiet", url])
        .arg(target)
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(format!(
            "git clone exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        ))
    }
}
