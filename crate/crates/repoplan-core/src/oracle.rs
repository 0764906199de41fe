//! Validity oracles: an external-command adapter and a hermetic internal
//! checker for the analyzed subset, plus the mapping from diagnostics back
//! to seed edit specifications.

use crate::depgraph::resolve::{Resolver, Target, BUILTINS};
use crate::syntax::{scan_refs, BlockId, BlockKind, DeclInfo, Repository};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::time::{Duration, Instant};

/// One reported problem: file, line range, message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line_start: usize,
    pub line_end: usize,
    pub message: String,
}

/// Oracle verdict; `pass` holds iff `diagnostics` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub pass: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl OracleVerdict {
    pub fn passing() -> Self {
        OracleVerdict { pass: true, diagnostics: Vec::new() }
    }

    pub fn failing(diagnostics: Vec<Diagnostic>) -> Self {
        OracleVerdict { pass: diagnostics.is_empty(), diagnostics }
    }
}

/// Infrastructure failures are distinct from a failing verdict.
#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle infrastructure error: {0}")]
    Infrastructure(String),
}

pub trait Oracle {
    fn name(&self) -> &str;
    fn check(&self, repo: &Repository) -> Result<OracleVerdict, OracleError>;
}

// ---------------------------------------------------------------------------
// Command oracle
// ---------------------------------------------------------------------------

/// How to read diagnostics out of command output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DiagnosticParser {
    /// Line regex with named groups `file`, `line`, `message`.
    Regex { pattern: String },
    /// Output is a JSON array of {file, line, message} objects.
    Json,
}

/// Runs an external command on a materialized copy of the repository and
/// parses its diagnostics. The exit status alone never decides a pass —
/// empty parsed diagnostics (plus a clean exit) do.
pub struct CommandOracle {
    /// Command template; `{repo}` is replaced with the workspace path.
    pub command: String,
    pub parser: DiagnosticParser,
    pub timeout_secs: u64,
}

impl CommandOracle {
    pub fn new(command: impl Into<String>, parser: DiagnosticParser) -> Self {
        CommandOracle { command: command.into(), parser, timeout_secs: 60 }
    }

    fn parse_output(&self, text: &str) -> Result<Vec<Diagnostic>, OracleError> {
        match &self.parser {
            DiagnosticParser::Regex { pattern } => {
                let re = regex::Regex::new(pattern).map_err(|e| {
                    OracleError::Infrastructure(format!("bad diagnostics regex: {e}"))
                })?;
                let mut out = Vec::new();
                for line in text.lines() {
                    if let Some(caps) = re.captures(line) {
                        let file = caps
                            .name("file")
                            .map(|m| m.as_str().to_string())
                            .unwrap_or_default();
                        let line_no = caps
                            .name("line")
                            .and_then(|m| m.as_str().parse::<usize>().ok())
                            .unwrap_or(1);
                        let message = caps
                            .name("message")
                            .map(|m| m.as_str().to_string())
                            .unwrap_or_else(|| line.to_string());
                        out.push(Diagnostic {
                            file,
                            line_start: line_no,
                            line_end: line_no,
                            message,
                        });
                    }
                }
                Ok(out)
            }
            DiagnosticParser::Json => {
                let trimmed = text.trim();
                if trimmed.is_empty() {
                    return Ok(Vec::new());
                }
                serde_json::from_str::<Vec<Diagnostic>>(trimmed)
                    .map_err(|e| OracleError::Infrastructure(format!("bad JSON diagnostics: {e}")))
            }
        }
    }
}

impl Oracle for CommandOracle {
    fn name(&self) -> &str {
        "command"
    }

    fn check(&self, repo: &Repository) -> Result<OracleVerdict, OracleError> {
        // Materialize to a temp workspace so failed runs never dirty the tree.
        let dir = tempfile::tempdir()
            .map_err(|e| OracleError::Infrastructure(format!("tempdir: {e}")))?;
        repo.write_to_dir(dir.path())
            .map_err(|e| OracleError::Infrastructure(format!("materialize: {e}")))?;

        let command = self.command.replace("{repo}", &dir.path().display().to_string());
        let mut child = std::process::Command::new("sh")
            .arg("-c")
            .arg(&command)
            .stdout(std::process::Stdio::piped())
            .stderr(std::process::Stdio::piped())
            .spawn()
            .map_err(|e| OracleError::Infrastructure(format!("spawn `{command}`: {e}")))?;

        let deadline = Instant::now() + Duration::from_secs(self.timeout_secs);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() > deadline {
                        let _ = child.kill();
                        return Err(OracleError::Infrastructure(format!(
                            "oracle command timed out after {}s",
                            self.timeout_secs
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
                Err(e) => {
                    return Err(OracleError::Infrastructure(format!("wait: {e}")));
                }
            }
        };

        let mut output = String::new();
        if let Some(mut stdout) = child.stdout.take() {
            let _ = stdout.read_to_string(&mut output);
        }
        if let Some(mut stderr) = child.stderr.take() {
            let mut err_text = String::new();
            let _ = stderr.read_to_string(&mut err_text);
            output.push_str(&err_text);
        }

        let mut diagnostics = self.parse_output(&output)?;
        if !status.success() && diagnostics.is_empty() {
            // Nonzero exit without parseable diagnostics: fail with a
            // synthetic whole-repo diagnostic.
            let file = repo.file_paths().next().unwrap_or("").to_string();
            diagnostics.push(Diagnostic {
                file,
                line_start: 1,
                line_end: 1,
                message: format!(
                    "oracle command exited with {} but reported no diagnostics",
                    status.code().map(|c| c.to_string()).unwrap_or_else(|| "signal".into())
                ),
            });
        }
        Ok(OracleVerdict { pass: status.success() && diagnostics.is_empty(), diagnostics })
    }
}

// ---------------------------------------------------------------------------
// Internal checker
// ---------------------------------------------------------------------------

/// Hermetic checker for the analyzed subset: unresolved names, call-arity
/// mismatches against resolved signatures, unknown attributes on statically
/// known classes. Defaulted parameters are treated as optional; `strict`
/// additionally flags call sites that omit defaulted parameters.
pub struct InternalChecker {
    pub strict: bool,
}

impl InternalChecker {
    pub fn new() -> Self {
        InternalChecker { strict: false }
    }

    pub fn strict() -> Self {
        InternalChecker { strict: true }
    }

    fn check_arity(
        &self,
        repo: &Repository,
        callee: &BlockId,
        given_positional: usize,
        given_keywords: &[String],
        diags: &mut Vec<Diagnostic>,
        file: &str,
        line: usize,
        display: &str,
    ) {
        let params = match repo.decl(callee) {
            Some(DeclInfo::Func(f)) => f.call_params().to_vec(),
            _ => return,
        };
        let required = params.iter().filter(|p| !p.has_default).count();
        let given = given_positional + given_keywords.len();
        let unknown_kw: Vec<&String> = given_keywords
            .iter()
            .filter(|k| !params.iter().any(|p| &p.name == *k))
            .collect();
        if !unknown_kw.is_empty() {
            diags.push(Diagnostic {
                file: file.to_string(),
                line_start: line,
                line_end: line,
                message: format!(
                    "call to `{display}` passes unknown keyword argument `{}`",
                    unknown_kw[0]
                ),
            });
            return;
        }
        if given < required {
            diags.push(Diagnostic {
                file: file.to_string(),
                line_start: line,
                line_end: line,
                message: format!(
                    "call to `{display}` is missing required arguments ({given} given, {required} required)"
                ),
            });
        } else if given > params.len() {
            diags.push(Diagnostic {
                file: file.to_string(),
                line_start: line,
                line_end: line,
                message: format!(
                    "call to `{display}` has too many arguments ({given} given, at most {})",
                    params.len()
                ),
            });
        } else if self.strict && given < params.len() {
            diags.push(Diagnostic {
                file: file.to_string(),
                line_start: line,
                line_end: line,
                message: format!(
                    "strict: call to `{display}` omits defaulted parameters ({given} of {} given)",
                    params.len()
                ),
            });
        }
    }
}

impl Default for InternalChecker {
    fn default() -> Self {
        InternalChecker::new()
    }
}

impl Oracle for InternalChecker {
    fn name(&self) -> &str {
        if self.strict {
            "internal-strict"
        } else {
            "internal"
        }
    }

    fn check(&self, repo: &Repository) -> Result<OracleVerdict, OracleError> {
        let resolver = Resolver::new(repo);
        let mut diags: Vec<Diagnostic> = Vec::new();

        for w in repo.warnings() {
            diags.push(Diagnostic {
                file: w.file.clone(),
                line_start: w.line,
                line_end: w.line,
                message: format!("parse error: {}", w.message),
            });
        }

        for block in repo.blocks() {
            let carrier = match block.kind {
                BlockKind::Method | BlockKind::Constructor => true,
                BlockKind::Statement => {
                    block.parent.as_ref().map(|p| p.kind == BlockKind::Module).unwrap_or(false)
                }
                _ => false,
            };
            if !carrier {
                continue;
            }
            let (body, params, body_first_line) = match repo.decl(&block.id) {
                Some(DeclInfo::Func(f)) => {
                    let body = match block.text.find('\n') {
                        Some(i) => block.text[i + 1..].to_string(),
                        None => String::new(),
                    };
                    (body, f.params.clone(), block.span.start_line + 1)
                }
                Some(DeclInfo::Statement) => {
                    (block.text.clone(), Vec::new(), block.span.start_line)
                }
                _ => continue,
            };
            let enclosing_class = block
                .parent
                .as_ref()
                .filter(|p| p.kind == BlockKind::Class)
                .cloned();
            let mut locals: BTreeSet<String> = params.iter().map(|p| p.name.clone()).collect();
            for r in scan_refs(&body) {
                if r.is_assign_target && r.path.len() == 1 {
                    locals.insert(r.path[0].clone());
                }
            }
            let env = resolver.local_types(&block.id.file, &body, &params, enclosing_class.as_ref());

            for r in scan_refs(&body) {
                let line = body_first_line + r.line - 1;
                let resolved =
                    resolver.resolve_ref(&block.id.file, &r, &env, enclosing_class.as_ref(), &locals);
                let display = r.path.join(".");
                match resolved.target {
                    Target::Unresolved => {
                        let head = r.path[0].as_str();
                        let head_known = locals.contains(head)
                            || env.contains_key(head)
                            || head == "self"
                            || BUILTINS.contains(&head);
                        if !head_known {
                            diags.push(Diagnostic {
                                file: block.id.file.clone(),
                                line_start: line,
                                line_end: line,
                                message: format!("unresolved name `{display}`"),
                            });
                        }
                    }
                    Target::UnknownMember(class) => {
                        // Attribute writes create attributes dynamically;
                        // only reads and calls of missing members are flagged.
                        if !r.is_assign_target {
                            let class_name = class.qname.clone();
                            diags.push(Diagnostic {
                                file: block.id.file.clone(),
                                line_start: line,
                                line_end: line,
                                message: format!(
                                    "class `{class_name}` has no attribute `{}`",
                                    r.path.last().expect("non-empty path")
                                ),
                            });
                        }
                    }
                    Target::Methods(candidates) => {
                        if let Some(call) = &r.call {
                            // Lenient over may-dispatch: only flag when no
                            // candidate accepts the given arity.
                            let mut candidate_diags = Vec::new();
                            let mut any_ok = false;
                            for m in &candidates {
                                let mut local = Vec::new();
                                self.check_arity(
                                    repo,
                                    m,
                                    call.positional,
                                    &call.keywords,
                                    &mut local,
                                    &block.id.file,
                                    line,
                                    &display,
                                );
                                if local.is_empty() {
                                    any_ok = true;
                                } else {
                                    candidate_diags.extend(local);
                                }
                            }
                            if !any_ok {
                                if let Some(first) = candidate_diags.into_iter().next() {
                                    diags.push(first);
                                }
                            }
                        }
                    }
                    Target::Function(f) => {
                        if let Some(call) = &r.call {
                            self.check_arity(
                                repo,
                                &f,
                                call.positional,
                                &call.keywords,
                                &mut diags,
                                &block.id.file,
                                line,
                                &display,
                            );
                        }
                    }
                    Target::Class(c) => {
                        if let Some(call) = &r.call {
                            if let Some(info) = resolver.class_info(&c) {
                                if let Some(ctor) = info.ctor.clone() {
                                    self.check_arity(
                                        repo,
                                        &ctor,
                                        call.positional,
                                        &call.keywords,
                                        &mut diags,
                                        &block.id.file,
                                        line,
                                        &display,
                                    );
                                } else if call.positional + call.keywords.len() > 0 {
                                    diags.push(Diagnostic {
                                        file: block.id.file.clone(),
                                        line_start: line,
                                        line_end: line,
                                        message: format!(
                                            "class `{display}` has no constructor but is instantiated with arguments"
                                        ),
                                    });
                                }
                            }
                        }
                    }
                    Target::Field(_)
                    | Target::External
                    | Target::Builtin
                    | Target::Local
                    | Target::UntypedReceiver => {}
                }
            }
        }

        diags.sort_by(|a, b| {
            (&a.file, a.line_start, &a.message).cmp(&(&b.file, b.line_start, &b.message))
        });
        diags.dedup();
        Ok(OracleVerdict { pass: diags.is_empty(), diagnostics: diags })
    }
}

// ---------------------------------------------------------------------------
// Diagnostics -> seeds
// ---------------------------------------------------------------------------

const REPAIR_PREAMBLE: &str = "Fix the following issues reported by the validity check:";

/// Map each diagnostic to the smallest enclosing block of its span;
/// diagnostics landing on one block merge into a single specification.
pub fn diagnostics_to_seeds(
    verdict: &OracleVerdict,
    repo: &Repository,
) -> Vec<(BlockId, String)> {
    let mut per_block: BTreeMap<BlockId, Vec<String>> = BTreeMap::new();
    let mut order: Vec<BlockId> = Vec::new();
    for d in &verdict.diagnostics {
        let block = repo
            .enclosing_block(&d.file, d.line_start)
            .map(|b| {
                // prefer an editable unit over a raw statement line
                if b.kind == BlockKind::Statement {
                    match b.parent.as_ref().and_then(|p| repo.block(p)) {
                        Some(p) if p.kind != BlockKind::Module => p.id.clone(),
                        _ => b.id.clone(),
                    }
                } else {
                    b.id.clone()
                }
            })
            .or_else(|| {
                repo.blocks_of_file(&d.file)
                    .find(|b| b.kind == BlockKind::Module)
                    .map(|b| b.id.clone())
            });
        let Some(block) = block else { continue };
        if !per_block.contains_key(&block) {
            order.push(block.clone());
        }
        per_block.entry(block).or_default().push(d.message.clone());
    }
    order
        .into_iter()
        .map(|block| {
            let messages = per_block.remove(&block).unwrap_or_default();
            let instruction = format!("{REPAIR_PREAMBLE} {}", messages.join("; "));
            (block, instruction)
        })
        .collect()
}
