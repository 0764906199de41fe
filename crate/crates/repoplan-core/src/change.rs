//! Classification of merged edits into atomic-change labels, plus escape
//! analysis for body-only method changes.
//!
//! The classifier aligns the declarations of the before/after region texts by
//! qualified name and kind and emits one [`AtomicChange`] per differing
//! element. Comment- and whitespace-only deltas classify as no change.

use crate::syntax::{parse_source, scan_refs, BlockId, BlockKind, CodeBlock, DeclInfo};
use crate::textdiff::changed_lines;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// The sixteen atomic-change labels:
/// modification/addition/deletion of method body or signature, field, class,
/// constructor and import elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChangeLabel {
    MMB,
    MMS,
    MF,
    MC,
    MCC,
    MI,
    AM,
    AF,
    AC,
    ACC,
    AI,
    DM,
    DF,
    DC,
    DCC,
    DI,
}

impl ChangeLabel {
    pub const ALL: [ChangeLabel; 16] = [
        ChangeLabel::MMB,
        ChangeLabel::MMS,
        ChangeLabel::MF,
        ChangeLabel::MC,
        ChangeLabel::MCC,
        ChangeLabel::MI,
        ChangeLabel::AM,
        ChangeLabel::AF,
        ChangeLabel::AC,
        ChangeLabel::ACC,
        ChangeLabel::AI,
        ChangeLabel::DM,
        ChangeLabel::DF,
        ChangeLabel::DC,
        ChangeLabel::DCC,
        ChangeLabel::DI,
    ];

    pub fn is_addition(self) -> bool {
        matches!(
            self,
            ChangeLabel::AM | ChangeLabel::AF | ChangeLabel::AC | ChangeLabel::ACC | ChangeLabel::AI
        )
    }

    pub fn is_deletion(self) -> bool {
        matches!(
            self,
            ChangeLabel::DM | ChangeLabel::DF | ChangeLabel::DC | ChangeLabel::DCC | ChangeLabel::DI
        )
    }

    pub fn is_modification(self) -> bool {
        !self.is_addition() && !self.is_deletion()
    }
}

impl fmt::Display for ChangeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A classified edit: label, subject block, before/after text and (for MMB
/// only) whether the change escapes the method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicChange {
    pub label: ChangeLabel,
    pub subject: BlockId,
    pub before_text: Option<String>,
    pub after_text: Option<String>,
    pub escaping: Option<bool>,
}

impl AtomicChange {
    /// Check the optional-field arity contract: A* changes carry no before
    /// text, D* changes no after text, M* both; `escaping` only with MMB.
    pub fn arity_ok(&self) -> bool {
        let texts_ok = if self.label.is_addition() {
            self.before_text.is_none() && self.after_text.is_some()
        } else if self.label.is_deletion() {
            self.before_text.is_some() && self.after_text.is_none()
        } else {
            self.before_text.is_some() && self.after_text.is_some()
        };
        texts_ok && (self.escaping.is_some() == (self.label == ChangeLabel::MMB))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("classification parse failure: {0}")]
    Parse(String),
}

/// Strip a trailing comment (outside string literals) and surrounding
/// whitespace from one line.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    let mut in_str: Option<u8> = None;
    for i in 0..bytes.len() {
        match (in_str, bytes[i]) {
            (Some(q), c) if c == q && (i == 0 || bytes[i - 1] != b'\\') => in_str = None,
            (None, b'"') => in_str = Some(b'"'),
            (None, b'\'') => in_str = Some(b'\''),
            (None, b'#') => return line[..i].trim_end(),
            _ => {}
        }
    }
    line.trim_end()
}

/// Comment- and whitespace-insensitive projection of a text used to decide
/// whether an element "really" changed.
fn semantic_text(text: &str) -> String {
    text.lines()
        .map(strip_comment)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut s = String::with_capacity(l.len());
            let mut last_space = true;
            for c in l.trim_end().chars() {
                if c.is_whitespace() {
                    if !last_space {
                        s.push(' ');
                    }
                    last_space = true;
                } else {
                    s.push(c);
                    last_space = false;
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Body of a function block (everything after the signature line).
fn body_of(text: &str) -> &str {
    match text.find('\n') {
        Some(i) => &text[i + 1..],
        None => "",
    }
}

/// Header line of a class block.
fn header_of(text: &str) -> &str {
    text.lines().next().unwrap_or("")
}

#[derive(Debug)]
struct Element {
    block: CodeBlock,
    decl: DeclInfo,
}

type ElementKey = (String, BlockKind);

/// Parse a region text into its classifiable elements (classes, methods,
/// constructors, fields, imports). Statements and the synthetic module root
/// are not classification units.
fn elements_of(file: &str, text: &str) -> Result<BTreeMap<ElementKey, Element>, ClassifyError> {
    let parsed = parse_source(file, text).map_err(|e| ClassifyError::Parse(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (block, decl) in parsed {
        match block.kind {
            BlockKind::Class
            | BlockKind::Method
            | BlockKind::Constructor
            | BlockKind::Field
            | BlockKind::Import => {
                out.insert((block.qualified_name.clone(), block.kind), Element { block, decl });
            }
            BlockKind::Module | BlockKind::Statement => {}
        }
    }
    Ok(out)
}

/// Classify the differences between the before and after text of a merged
/// region into atomic changes. `subject` names the edited obligation block;
/// its file scopes the element identifiers.
pub fn classify_changes(
    before: &str,
    after: &str,
    subject: &BlockId,
) -> Result<Vec<AtomicChange>, ClassifyError> {
    let before_elems = elements_of(&subject.file, before)?;
    let after_elems = elements_of(&subject.file, after)?;
    let mut changes = Vec::new();

    let keys: BTreeSet<&ElementKey> = before_elems.keys().chain(after_elems.keys()).collect();
    for key in keys {
        match (before_elems.get(key), after_elems.get(key)) {
            (Some(b), Some(a)) => classify_matched(b, a, &mut changes),
            (None, Some(a)) => {
                let label = match a.block.kind {
                    BlockKind::Method => ChangeLabel::AM,
                    BlockKind::Constructor => ChangeLabel::ACC,
                    BlockKind::Field => ChangeLabel::AF,
                    BlockKind::Class => ChangeLabel::AC,
                    BlockKind::Import => ChangeLabel::AI,
                    _ => unreachable!(),
                };
                changes.push(AtomicChange {
                    label,
                    subject: a.block.id.clone(),
                    before_text: None,
                    after_text: Some(a.block.text.clone()),
                    escaping: None,
                });
            }
            (Some(b), None) => {
                let label = match b.block.kind {
                    BlockKind::Method => ChangeLabel::DM,
                    BlockKind::Constructor => ChangeLabel::DCC,
                    BlockKind::Field => ChangeLabel::DF,
                    BlockKind::Class => ChangeLabel::DC,
                    BlockKind::Import => ChangeLabel::DI,
                    _ => unreachable!(),
                };
                changes.push(AtomicChange {
                    label,
                    subject: b.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: None,
                    escaping: None,
                });
            }
            (None, None) => unreachable!(),
        }
    }

    // Members of an added or deleted class are covered by the AC/DC change
    // itself; drop their individual A*/D* records.
    let added_classes: Vec<&BlockId> = changes
        .iter()
        .filter(|c| c.label == ChangeLabel::AC || c.label == ChangeLabel::DC)
        .map(|c| &c.subject)
        .collect();
    if !added_classes.is_empty() {
        let covered: BTreeSet<BlockId> = added_classes.into_iter().cloned().collect();
        changes.retain(|c| {
            c.label == ChangeLabel::AC
                || c.label == ChangeLabel::DC
                || !c
                    .subject
                    .qname
                    .split_once('.')
                    .map(|(class_name, _)| {
                        covered
                            .iter()
                            .any(|cls| cls.qname == class_name && cls.file == c.subject.file)
                    })
                    .unwrap_or(false)
        });
    }

    Ok(changes)
}

fn classify_matched(b: &Element, a: &Element, changes: &mut Vec<AtomicChange>) {
    match a.block.kind {
        BlockKind::Method | BlockKind::Constructor => {
            let (b_sig, a_sig) = match (&b.decl, &a.decl) {
                (DeclInfo::Func(fb), DeclInfo::Func(fa)) => {
                    (fb.signature_text.clone(), fa.signature_text.clone())
                }
                _ => return,
            };
            let sig_changed =
                semantic_text(strip_comment(&b_sig)) != semantic_text(strip_comment(&a_sig));
            if sig_changed {
                changes.push(AtomicChange {
                    label: if a.block.kind == BlockKind::Constructor {
                        ChangeLabel::MCC
                    } else {
                        ChangeLabel::MMS
                    },
                    subject: a.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: Some(a.block.text.clone()),
                    escaping: None,
                });
            }
            let b_body = body_of(&b.block.text);
            let a_body = body_of(&a.block.text);
            if semantic_text(b_body) != semantic_text(a_body) {
                let params = match &a.decl {
                    DeclInfo::Func(f) => {
                        f.params.iter().map(|p| p.name.clone()).collect::<BTreeSet<_>>()
                    }
                    _ => BTreeSet::new(),
                };
                let escaping = escapes(b_body, a_body, &params);
                changes.push(AtomicChange {
                    label: ChangeLabel::MMB,
                    subject: a.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: Some(a.block.text.clone()),
                    escaping: Some(escaping),
                });
            }
        }
        BlockKind::Field => {
            if semantic_text(&b.block.text) != semantic_text(&a.block.text) {
                changes.push(AtomicChange {
                    label: ChangeLabel::MF,
                    subject: a.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: Some(a.block.text.clone()),
                    escaping: None,
                });
            }
        }
        BlockKind::Class => {
            let b_header = semantic_text(strip_comment(header_of(&b.block.text)));
            let a_header = semantic_text(strip_comment(header_of(&a.block.text)));
            if b_header != a_header {
                changes.push(AtomicChange {
                    label: ChangeLabel::MC,
                    subject: a.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: Some(a.block.text.clone()),
                    escaping: None,
                });
            }
        }
        BlockKind::Import => {
            if semantic_text(&b.block.text) != semantic_text(&a.block.text) {
                changes.push(AtomicChange {
                    label: ChangeLabel::MI,
                    subject: a.block.id.clone(),
                    before_text: Some(b.block.text.clone()),
                    after_text: Some(a.block.text.clone()),
                    escaping: None,
                });
            }
        }
        _ => {}
    }
}

/// Syntactic escape analysis for a body-only method change.
///
/// Returns true when the body delta touches a return statement, an attribute
/// of `self` or of a parameter, a raise statement, or a global/module-level
/// name; false when the delta is confined to locals.
pub fn escapes(before_body: &str, after_body: &str, params: &BTreeSet<String>) -> bool {
    let (removed, added) = changed_lines(before_body, after_body);
    if removed.is_empty() && added.is_empty() {
        return false;
    }

    // Locals: parameters plus names assigned anywhere in either body version.
    let mut locals: BTreeSet<String> = params.clone();
    for body in [before_body, after_body] {
        for r in scan_refs(body) {
            if r.is_assign_target && r.path.len() == 1 {
                locals.insert(r.path[0].clone());
            }
        }
    }

    for line in removed.iter().chain(added.iter()) {
        let stripped = strip_comment(line);
        let trimmed = stripped.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with("return") || trimmed.starts_with("raise") {
            return true;
        }
        for r in scan_refs(stripped) {
            let head = r.path[0].as_str();
            if head == "self" && r.path.len() >= 2 {
                return true;
            }
            if params.contains(head) && r.path.len() >= 2 {
                return true;
            }
            if r.path.len() == 1
                && !locals.contains(head)
                && head != "self"
                && !crate::depgraph::resolve::BUILTINS.contains(&head)
            {
                // global / module-level name
                return true;
            }
        }
    }
    false
}

/// Detect rename pairs among classified changes: a D* and an A* of the same
/// kind whose bodies are identical up to whitespace. Returns (deleted -> added).
pub fn rename_pairs(changes: &[AtomicChange]) -> BTreeMap<BlockId, BlockId> {
    let mut out = BTreeMap::new();
    let deletions: Vec<&AtomicChange> = changes.iter().filter(|c| c.label.is_deletion()).collect();
    let additions: Vec<&AtomicChange> = changes.iter().filter(|c| c.label.is_addition()).collect();
    for d in &deletions {
        let d_text = d.before_text.as_deref().unwrap_or("");
        let d_comparable = match d.subject.kind {
            BlockKind::Method | BlockKind::Constructor => semantic_text(body_of(d_text)),
            _ => continue,
        };
        if d_comparable.is_empty() {
            continue;
        }
        for a in &additions {
            if a.subject.kind != d.subject.kind || a.subject.file != d.subject.file {
                continue;
            }
            let a_text = a.after_text.as_deref().unwrap_or("");
            let a_comparable = semantic_text(body_of(a_text));
            if a_comparable == d_comparable && !out.values().any(|v| v == &a.subject) {
                out.insert(d.subject.clone(), a.subject.clone());
                break;
            }
        }
    }
    out
}
