//! Syntax front end: parse repository source into files and typed code
//! blocks, produce sketched fragments for editing, and merge edited
//! fragments back unambiguously.
//!
//! The analyzed language is a statically analyzable Python-like subset:
//! modules, `import`/`from-import`, classes with single inheritance, methods,
//! constructors, fields (class-level annotations or `self.x = ...` in the
//! constructor), top-level functions and call statements. The front end is
//! deliberately line-oriented: block spans are byte ranges over the original
//! text and untouched regions round-trip byte-exactly through parse + merge.

mod fragment;
mod parser;
mod refs;

pub use fragment::{extract_fragment, merge_fragment, FoldEntry, Fragment, MergeError, MergeOutcome};
pub use parser::parse_source;
pub use refs::{scan_refs, CallArgs, ExprRef};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Tag for the analyzed language. One concrete front end ships; the tag keeps
/// the seam where other front ends would plug in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    PySubset,
}

impl Language {
    pub fn extension(self) -> &'static str {
        match self {
            Language::PySubset => "py",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::PySubset => write!(f, "py-subset"),
        }
    }
}

/// The kind of a code block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Per-file module root; parent of all top-level blocks in the file.
    Module,
    Class,
    Method,
    Constructor,
    Field,
    Import,
    Statement,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockKind::Module => "module",
            BlockKind::Class => "class",
            BlockKind::Method => "method",
            BlockKind::Constructor => "constructor",
            BlockKind::Field => "field",
            BlockKind::Import => "import",
            BlockKind::Statement => "statement",
        };
        write!(f, "{s}")
    }
}

impl FromStr for BlockKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "module" => BlockKind::Module,
            "class" => BlockKind::Class,
            "method" => BlockKind::Method,
            "constructor" => BlockKind::Constructor,
            "field" => BlockKind::Field,
            "import" => BlockKind::Import,
            "statement" => BlockKind::Statement,
            other => return Err(format!("unknown block kind `{other}`")),
        })
    }
}

/// Opaque stable block identifier: file path + qualified name + kind +
/// ordinal. Spans are deliberately not part of the identity so the id
/// survives edits elsewhere in the file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId {
    pub file: String,
    pub qname: String,
    pub kind: BlockKind,
    pub ordinal: u32,
}

impl BlockId {
    pub fn new(file: impl Into<String>, qname: impl Into<String>, kind: BlockKind) -> Self {
        BlockId { file: file.into(), qname: qname.into(), kind, ordinal: 0 }
    }

    pub fn with_ordinal(mut self, ordinal: u32) -> Self {
        self.ordinal = ordinal;
        self
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}::{}", self.file, self.qname, self.kind)?;
        if self.ordinal != 0 {
            write!(f, "#{}", self.ordinal)?;
        }
        Ok(())
    }
}

impl FromStr for BlockId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (main, ordinal) = match s.rsplit_once('#') {
            Some((m, o)) => (m, o.parse::<u32>().map_err(|e| e.to_string())?),
            None => (s, 0),
        };
        let mut parts = main.rsplitn(3, "::");
        let kind = parts.next().ok_or("missing kind")?.parse::<BlockKind>()?;
        let qname = parts.next().ok_or("missing qualified name")?.to_string();
        let file = parts.next().ok_or("missing file")?.to_string();
        Ok(BlockId { file, qname, kind, ordinal })
    }
}

impl Serialize for BlockId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BlockId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Byte + line range of a block within its file. Byte range is half-open and
/// covers content only (no trailing newline). Lines are 1-based, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
    pub end_line: usize,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn contains_line(&self, line: usize) -> bool {
        self.start_line <= line && line <= self.end_line
    }
}

/// A typed, addressable span of source; the node unit of both graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    pub id: BlockId,
    pub kind: BlockKind,
    pub span: Span,
    pub qualified_name: String,
    pub parent: Option<BlockId>,
    pub text: String,
}

/// One parsed parameter of a function signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub annotation: Option<String>,
    pub has_default: bool,
}

/// Structured declaration data kept alongside each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclInfo {
    Module,
    Import(ImportDecl),
    Class(ClassDecl),
    Func(FuncDecl),
    Field(FieldDecl),
    Statement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportDecl {
    /// Module the line imports from.
    pub module: String,
    /// `import m as alias` binding; `None` binds the module name itself.
    pub alias: Option<String>,
    /// For `from m import a, b as c`: (name, alias) pairs. Empty for plain imports.
    pub names: Vec<(String, Option<String>)>,
    pub is_from: bool,
}

impl ImportDecl {
    /// Names this import line binds in the module scope.
    pub fn bound_names(&self) -> Vec<String> {
        if self.is_from {
            self.names
                .iter()
                .map(|(n, a)| a.clone().unwrap_or_else(|| n.clone()))
                .collect()
        } else {
            vec![self.alias.clone().unwrap_or_else(|| self.module.clone())]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub base: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_annotation: Option<String>,
    pub is_constructor: bool,
    /// Signature line text, used for signature-change classification.
    pub signature_text: String,
}

impl FuncDecl {
    /// Parameters excluding a leading `self`.
    pub fn call_params(&self) -> &[Param] {
        match self.params.first() {
            Some(p) if p.name == "self" => &self.params[1..],
            _ => &self.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub annotation: Option<String>,
    /// Right-hand side text when declared with an initializer.
    pub value: Option<String>,
    /// True when declared via `self.x = ...` inside the constructor.
    pub from_constructor: bool,
}

/// A source file of the repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    pub language: Language,
}

/// Non-fatal event recorded while loading or parsing a repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("unknown block: {0}")]
    UnknownBlock(BlockId),
}

/// Parsed repository: files plus the per-file block forest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Repository {
    files: BTreeMap<String, SourceFile>,
    blocks: BTreeMap<BlockId, CodeBlock>,
    decls: BTreeMap<BlockId, DeclInfo>,
    /// Blocks of each file in document order.
    file_blocks: BTreeMap<String, Vec<BlockId>>,
    warnings: Vec<ParseWarning>,
}

impl Repository {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a repository from an in-memory map of path -> source text.
    /// Unparseable files are excluded from the block forest and recorded as
    /// warnings; the file text itself is kept so metrics still see it.
    pub fn from_sources<I, P, T>(sources: I) -> Repository
    where
        I: IntoIterator<Item = (P, T)>,
        P: Into<String>,
        T: Into<String>,
    {
        let mut repo = Repository::new();
        for (path, text) in sources {
            repo.insert_file(path.into(), text.into());
        }
        repo
    }

    /// Parse all files with the language extension under `root`.
    pub fn parse_repository(root: &Path, language: Language) -> Result<Repository, SyntaxError> {
        let mut sources = Vec::new();
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| SyntaxError::Io {
                path: root.display().to_string(),
                source: e.into(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some(language.extension()) {
                continue;
            }
            let rel = path
                .strip_prefix(root)
                .unwrap_or(path)
                .to_string_lossy()
                .replace('\\', "/");
            let text = std::fs::read_to_string(path).map_err(|e| SyntaxError::Io {
                path: rel.clone(),
                source: e,
            })?;
            sources.push((rel, text));
        }
        Ok(Repository::from_sources(sources))
    }

    /// Materialize the repository's files under `dest`.
    pub fn write_to_dir(&self, dest: &Path) -> Result<(), SyntaxError> {
        for file in self.files.values() {
            let out = dest.join(&file.path);
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent).map_err(|e| SyntaxError::Io {
                    path: out.display().to_string(),
                    source: e,
                })?;
            }
            std::fs::write(&out, &file.text).map_err(|e| SyntaxError::Io {
                path: out.display().to_string(),
                source: e,
            })?;
        }
        Ok(())
    }

    fn insert_file(&mut self, path: String, text: String) {
        match parser::parse_source(&path, &text) {
            Ok(parsed) => {
                let ids: Vec<BlockId> = parsed.iter().map(|(b, _)| b.id.clone()).collect();
                for (block, decl) in parsed {
                    self.decls.insert(block.id.clone(), decl);
                    self.blocks.insert(block.id.clone(), block);
                }
                self.file_blocks.insert(path.clone(), ids);
            }
            Err(SyntaxError::Parse { file, line, message }) => {
                self.warnings.push(ParseWarning { file, line, message });
                // Keep a whole-file module block so diagnostics in an
                // unparsed file still anchor somewhere.
                let qname = Repository::module_name(&path);
                let module = CodeBlock {
                    id: BlockId::new(&path, &qname, BlockKind::Module),
                    kind: BlockKind::Module,
                    span: Span {
                        start_byte: 0,
                        end_byte: text.len(),
                        start_line: 1,
                        end_line: text.lines().count().max(1),
                    },
                    qualified_name: qname,
                    parent: None,
                    text: text.clone(),
                };
                self.decls.insert(module.id.clone(), DeclInfo::Module);
                self.file_blocks.insert(path.clone(), vec![module.id.clone()]);
                self.blocks.insert(module.id.clone(), module);
            }
            Err(_) => unreachable!("parse_source only returns Parse errors"),
        }
        self.files.insert(
            path.clone(),
            SourceFile { path, text, language: Language::PySubset },
        );
    }

    /// Replace one file's text and re-extract its block forest.
    pub fn replace_file_text(&mut self, path: &str, new_text: String) {
        if let Some(old) = self.file_blocks.remove(path) {
            for id in old {
                self.blocks.remove(&id);
                self.decls.remove(&id);
            }
        }
        self.files.remove(path);
        self.insert_file(path.to_string(), new_text);
    }

    pub fn files(&self) -> impl Iterator<Item = &SourceFile> {
        self.files.values()
    }

    pub fn file(&self, path: &str) -> Option<&SourceFile> {
        self.files.get(path)
    }

    pub fn file_paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(|s| s.as_str())
    }

    pub fn blocks(&self) -> impl Iterator<Item = &CodeBlock> {
        self.blocks.values()
    }

    pub fn block(&self, id: &BlockId) -> Option<&CodeBlock> {
        self.blocks.get(id)
    }

    pub fn decl(&self, id: &BlockId) -> Option<&DeclInfo> {
        self.decls.get(id)
    }

    /// Blocks of a file in document order.
    pub fn blocks_of_file(&self, path: &str) -> impl Iterator<Item = &CodeBlock> {
        self.file_blocks
            .get(path)
            .into_iter()
            .flatten()
            .filter_map(move |id| self.blocks.get(id))
    }

    pub fn children(&self, id: &BlockId) -> Vec<&CodeBlock> {
        self.blocks_of_file(&id.file)
            .filter(|b| b.parent.as_ref() == Some(id))
            .collect()
    }

    pub fn warnings(&self) -> &[ParseWarning] {
        &self.warnings
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Smallest block of `file` whose line range contains `line`; falls back
    /// to the file's module block.
    pub fn enclosing_block(&self, file: &str, line: usize) -> Option<&CodeBlock> {
        let mut best: Option<&CodeBlock> = None;
        for b in self.blocks_of_file(file) {
            if b.span.contains_line(line) {
                let better = match best {
                    Some(cur) => {
                        b.span.end_byte - b.span.start_byte < cur.span.end_byte - cur.span.start_byte
                    }
                    None => true,
                };
                if better {
                    best = Some(b);
                }
            }
        }
        best
    }

    /// Module name for a file path: `pkg/mod.py` -> `pkg.mod`.
    pub fn module_name(path: &str) -> String {
        let trimmed = path.strip_suffix(".py").unwrap_or(path);
        trimmed.replace('/', ".")
    }

    /// Block inventory as the `blocks.json` document.
    pub fn blocks_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .files
            .keys()
            .flat_map(|path| self.blocks_of_file(path))
            .map(|b| {
                serde_json::json!({
                    "id": b.id,
                    "kind": b.kind,
                    "file": b.id.file,
                    "qualified_name": b.qualified_name,
                    "span": b.span,
                    "parent": b.parent,
                })
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}
