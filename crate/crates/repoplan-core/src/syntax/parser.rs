//! Line-oriented parser for the analyzed subset.
//!
//! Produces the block forest of one file: module root, imports, classes,
//! methods/constructors, fields and tracked statements. Spans are byte
//! ranges over the original text; nothing is reformatted.

use super::refs::scan_refs;
use super::{
    BlockId, BlockKind, ClassDecl, CodeBlock, DeclInfo, FieldDecl, FuncDecl, ImportDecl, Param,
    Repository, Span, SyntaxError,
};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

#[derive(Debug)]
struct Line {
    start: usize,
    content_end: usize,
    indent: usize,
    text: String,
    is_content: bool,
    number: usize,
}

fn split_lines(text: &str) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let content = raw.strip_suffix('\n').unwrap_or(raw);
        let content = content.strip_suffix('\r').unwrap_or(content);
        let trimmed = content.trim_start();
        let indent = content.len() - trimmed.len();
        lines.push(Line {
            start: offset,
            content_end: offset + content.len(),
            indent,
            text: content.to_string(),
            is_content: !trimmed.is_empty() && !trimmed.starts_with('#'),
            number: idx + 1,
        });
        offset += raw.len();
    }
    lines
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false)
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_dotted_ident(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(is_ident)
}

struct IdAlloc {
    seen: BTreeMap<(String, BlockKind), u32>,
}

impl IdAlloc {
    fn new() -> Self {
        IdAlloc { seen: BTreeMap::new() }
    }

    fn alloc(&mut self, file: &str, qname: &str, kind: BlockKind) -> BlockId {
        let counter = self.seen.entry((qname.to_string(), kind)).or_insert(0);
        let ordinal = *counter;
        *counter += 1;
        BlockId::new(file, qname, kind).with_ordinal(ordinal)
    }
}

struct FileParser<'t> {
    path: &'t str,
    lines: Vec<Line>,
    ids: IdAlloc,
    out: Vec<(CodeBlock, DeclInfo)>,
}

type ParseResult<T> = Result<T, SyntaxError>;

pub fn parse_source(path: &str, text: &str) -> ParseResult<Vec<(CodeBlock, DeclInfo)>> {
    let mut p = FileParser { path, lines: split_lines(text), ids: IdAlloc::new(), out: Vec::new() };
    p.parse_module(text)?;
    Ok(p.out)
}

impl<'t> FileParser<'t> {
    fn err<T>(&self, line: usize, message: impl Into<String>) -> ParseResult<T> {
        Err(SyntaxError::Parse { file: self.path.to_string(), line, message: message.into() })
    }

    fn span(&self, first: usize, last: usize) -> Span {
        Span {
            start_byte: self.lines[first].start,
            end_byte: self.lines[last].content_end,
            start_line: self.lines[first].number,
            end_line: self.lines[last].number,
        }
    }

    fn slice(&self, text_of: &str, span: &Span) -> String {
        text_of[span.start_byte..span.end_byte].to_string()
    }

    /// Index of the last content line of a body starting after `header`,
    /// where body lines are those with indent greater than `indent`.
    fn body_end(&self, header: usize, indent: usize) -> Option<usize> {
        let mut last = None;
        for i in header + 1..self.lines.len() {
            let line = &self.lines[i];
            if line.is_content {
                if line.indent <= indent {
                    break;
                }
                last = Some(i);
            }
        }
        last
    }

    fn parse_module(&mut self, text: &str) -> ParseResult<()> {
        let module_qname = Repository::module_name(self.path);
        let module_id = self.ids.alloc(self.path, &module_qname, BlockKind::Module);
        let module_span = Span {
            start_byte: 0,
            end_byte: text.len(),
            start_line: 1,
            end_line: self.lines.len().max(1),
        };
        self.out.push((
            CodeBlock {
                id: module_id.clone(),
                kind: BlockKind::Module,
                span: module_span,
                qualified_name: module_qname,
                parent: None,
                text: text.to_string(),
            },
            DeclInfo::Module,
        ));

        // Names assigned at module level count as "local" for statement
        // tracking, so `x = 5` alone never becomes a block.
        let mut module_locals: BTreeSet<String> = BTreeSet::new();
        for line in &self.lines {
            if !line.is_content || line.indent != 0 {
                continue;
            }
            let t = line.text.trim_start();
            if t.starts_with("import ")
                || t.starts_with("from ")
                || t.starts_with("class ")
                || t.starts_with("def ")
            {
                continue;
            }
            for r in scan_refs(&line.text) {
                if r.is_assign_target && r.path.len() == 1 {
                    module_locals.insert(r.path[0].clone());
                }
            }
        }

        let mut stmt_counter = 0u32;
        let mut i = 0;
        while i < self.lines.len() {
            if !self.lines[i].is_content {
                i += 1;
                continue;
            }
            let line = &self.lines[i];
            if line.indent != 0 {
                return self.err(line.number, "unexpected indentation at module level");
            }
            let trimmed = line.text.trim_start().to_string();
            if trimmed.starts_with("import ") || trimmed.starts_with("from ") {
                self.parse_import(text, i, &module_id)?;
                i += 1;
            } else if trimmed.starts_with("class ") {
                i = self.parse_class(text, i, &module_id)?;
            } else if trimmed.starts_with("def ") {
                i = self.parse_function(text, i, &module_id, None)?;
            } else {
                self.maybe_statement(text, i, &module_id, Some(&module_locals), &mut stmt_counter);
                i += 1;
            }
        }
        Ok(())
    }

    fn parse_import(&mut self, text: &str, idx: usize, parent: &BlockId) -> ParseResult<()> {
        let lineno = self.lines[idx].number;
        let trimmed = self.lines[idx].text.trim().to_string();
        let decl = if let Some(rest) = trimmed.strip_prefix("import ") {
            if rest.contains(',') {
                return self.err(lineno, "one module per import line");
            }
            let mut parts = rest.split_whitespace();
            let module = parts.next().unwrap_or("").to_string();
            if !is_dotted_ident(&module) {
                return self.err(lineno, format!("bad import target `{module}`"));
            }
            let alias = match (parts.next(), parts.next()) {
                (None, _) => None,
                (Some("as"), Some(a)) if is_ident(a) => Some(a.to_string()),
                _ => return self.err(lineno, "malformed import statement"),
            };
            ImportDecl { module, alias, names: Vec::new(), is_from: false }
        } else if let Some(rest) = trimmed.strip_prefix("from ") {
            let (module, names_part) = match rest.split_once(" import ") {
                Some((m, n)) => (m.trim().to_string(), n.trim()),
                None => return self.err(lineno, "malformed from-import statement"),
            };
            if !is_dotted_ident(&module) {
                return self.err(lineno, format!("bad import source `{module}`"));
            }
            let mut names = Vec::new();
            for part in names_part.split(',') {
                let mut words = part.split_whitespace();
                let name = words.next().unwrap_or("");
                if !is_ident(name) {
                    return self.err(lineno, format!("bad imported name `{name}`"));
                }
                let alias = match (words.next(), words.next()) {
                    (None, _) => None,
                    (Some("as"), Some(a)) if is_ident(a) => Some(a.to_string()),
                    _ => return self.err(lineno, "malformed from-import alias"),
                };
                names.push((name.to_string(), alias));
            }
            ImportDecl { module, alias: None, names, is_from: true }
        } else {
            unreachable!()
        };

        let span = self.span(idx, idx);
        let id = self.ids.alloc(self.path, &decl.module, BlockKind::Import);
        self.out.push((
            CodeBlock {
                id: id.clone(),
                kind: BlockKind::Import,
                span,
                qualified_name: decl.module.clone(),
                parent: Some(parent.clone()),
                text: self.slice(text, &span),
            },
            DeclInfo::Import(decl),
        ));
        Ok(())
    }

    fn parse_class(&mut self, text: &str, idx: usize, parent: &BlockId) -> ParseResult<usize> {
        let lineno = self.lines[idx].number;
        let header = self.lines[idx].text.trim().to_string();
        let rest = header.strip_prefix("class ").unwrap();
        let rest = match rest.strip_suffix(':') {
            Some(r) => r.trim(),
            None => return self.err(lineno, "class header must end with `:`"),
        };
        let (name, base) = match rest.split_once('(') {
            Some((n, b)) => {
                let b = match b.strip_suffix(')') {
                    Some(b) => b.trim(),
                    None => return self.err(lineno, "unclosed base class list"),
                };
                (n.trim().to_string(), if b.is_empty() { None } else { Some(b.to_string()) })
            }
            None => (rest.to_string(), None),
        };
        if !is_ident(&name) {
            return self.err(lineno, format!("bad class name `{name}`"));
        }
        if let Some(b) = &base {
            if !is_dotted_ident(b) {
                return self.err(lineno, format!("bad base class `{b}`"));
            }
            if b.contains(',') {
                return self.err(lineno, "multiple inheritance is not supported");
            }
        }

        let body_last = self.body_end(idx, 0);
        let last = body_last.unwrap_or(idx);
        let span = self.span(idx, last);
        let class_id = self.ids.alloc(self.path, &name, BlockKind::Class);
        self.out.push((
            CodeBlock {
                id: class_id.clone(),
                kind: BlockKind::Class,
                span,
                qualified_name: name.clone(),
                parent: Some(parent.clone()),
                text: self.slice(text, &span),
            },
            DeclInfo::Class(ClassDecl { name: name.clone(), base }),
        ));

        let Some(body_last) = body_last else {
            return self.err(lineno, format!("class `{name}` has an empty body"));
        };

        // Member indent comes from the first content line of the body.
        let member_indent = (idx + 1..=body_last)
            .find(|&i| self.lines[i].is_content)
            .map(|i| self.lines[i].indent)
            .unwrap();

        let mut declared_fields: BTreeSet<String> = BTreeSet::new();
        let mut i = idx + 1;
        while i <= body_last {
            if !self.lines[i].is_content {
                i += 1;
                continue;
            }
            let line = &self.lines[i];
            if line.indent != member_indent {
                return self.err(line.number, "unexpected indentation in class body");
            }
            let trimmed = line.text.trim_start().to_string();
            if trimmed.starts_with("def ") {
                i = self.parse_function(text, i, &class_id, Some((&name, &mut declared_fields)))?;
            } else if trimmed.starts_with("class ") {
                return self.err(line.number, "nested classes are not supported");
            } else if trimmed == "pass" {
                i += 1;
            } else {
                self.parse_class_field(text, i, &class_id, &name, &mut declared_fields)?;
                i += 1;
            }
        }
        Ok(body_last + 1)
    }

    fn parse_class_field(
        &mut self,
        text: &str,
        idx: usize,
        class_id: &BlockId,
        class_name: &str,
        declared: &mut BTreeSet<String>,
    ) -> ParseResult<()> {
        let lineno = self.lines[idx].number;
        let trimmed = self.lines[idx].text.trim().to_string();
        let (name, annotation, value) = parse_field_like(&trimmed);
        let Some(name) = name else {
            return self.err(lineno, format!("expected field or method in class body: `{trimmed}`"));
        };
        let qname = format!("{class_name}.{name}");
        let span = self.span(idx, idx);
        let id = self.ids.alloc(self.path, &qname, BlockKind::Field);
        declared.insert(name.clone());
        self.out.push((
            CodeBlock {
                id,
                kind: BlockKind::Field,
                span,
                qualified_name: qname,
                parent: Some(class_id.clone()),
                text: self.slice(text, &span),
            },
            DeclInfo::Field(FieldDecl { name, annotation, value, from_constructor: false }),
        ));
        Ok(())
    }

    fn parse_function(
        &mut self,
        text: &str,
        idx: usize,
        parent: &BlockId,
        class_ctx: Option<(&str, &mut BTreeSet<String>)>,
    ) -> ParseResult<usize> {
        let lineno = self.lines[idx].number;
        let indent = self.lines[idx].indent;
        let header = self.lines[idx].text.trim().to_string();
        let decl = parse_signature(&header)
            .ok_or(())
            .or_else(|_| self.err::<FuncDecl>(lineno, format!("malformed signature `{header}`")))?;

        let (class_name, is_ctor) = match &class_ctx {
            Some((cname, _)) => (Some(cname.to_string()), decl.name == "__init__"),
            None => (None, false),
        };
        let kind = if is_ctor { BlockKind::Constructor } else { BlockKind::Method };
        let qname = match &class_name {
            Some(c) => format!("{c}.{}", decl.name),
            None => decl.name.clone(),
        };

        let body_last = self.body_end(idx, indent);
        let Some(body_last) = body_last else {
            return self.err(lineno, format!("function `{}` has an empty body", decl.name));
        };
        let span = self.span(idx, body_last);
        let func_id = self.ids.alloc(self.path, &qname, kind);
        self.out.push((
            CodeBlock {
                id: func_id.clone(),
                kind,
                span,
                qualified_name: qname.clone(),
                parent: Some(parent.clone()),
                text: self.slice(text, &span),
            },
            DeclInfo::Func(FuncDecl { is_constructor: is_ctor, ..decl.clone() }),
        ));

        // Locals: parameters plus simple assignment targets in the body.
        let body_span = Span {
            start_byte: self.lines[idx + 1].start.min(self.lines[body_last].start),
            end_byte: self.lines[body_last].content_end,
            start_line: self.lines[idx + 1].number,
            end_line: self.lines[body_last].number,
        };
        let body_text = &text[body_span.start_byte..body_span.end_byte];
        let mut locals: BTreeSet<String> =
            decl.params.iter().map(|p| p.name.clone()).collect();
        for r in scan_refs(body_text) {
            if r.is_assign_target && r.path.len() == 1 {
                locals.insert(r.path[0].clone());
            }
        }

        let mut class_ctx = class_ctx;
        let mut stmt_counter = 0u32;
        for i in idx + 1..=body_last {
            if !self.lines[i].is_content {
                continue;
            }
            if self.lines[i].indent <= indent {
                return self.err(self.lines[i].number, "inconsistent indentation in body");
            }
            if self.lines[i].text.trim_start().starts_with("def ") {
                return self.err(self.lines[i].number, "nested functions are not supported");
            }
            // Constructor `self.x = ...` lines declare fields.
            if is_ctor {
                if let Some((cname, declared)) = class_ctx.as_mut() {
                    let trimmed = self.lines[i].text.trim();
                    if let Some(field) = parse_self_assign(trimmed) {
                        if !declared.contains(&field.name) {
                            declared.insert(field.name.clone());
                            let fq = format!("{cname}.{}", field.name);
                            let fspan = self.span(i, i);
                            let fid = self.ids.alloc(self.path, &fq, BlockKind::Field);
                            self.out.push((
                                CodeBlock {
                                    id: fid,
                                    kind: BlockKind::Field,
                                    span: fspan,
                                    qualified_name: fq,
                                    parent: parent.clone().into(),
                                    text: self.slice(text, &fspan),
                                },
                                DeclInfo::Field(field),
                            ));
                            continue;
                        }
                    }
                }
            }
            self.maybe_statement_local(text, i, &func_id, &locals, &mut stmt_counter);
        }
        Ok(body_last + 1)
    }

    fn maybe_statement(
        &mut self,
        text: &str,
        idx: usize,
        parent: &BlockId,
        locals: Option<&BTreeSet<String>>,
        counter: &mut u32,
    ) {
        let line_text = &self.lines[idx].text;
        let refs = scan_refs(line_text);
        let locals_set = locals.cloned().unwrap_or_default();
        let qualifies = refs.iter().any(|r| {
            r.call.is_some()
                || r.path.len() >= 2
                || (!r.is_assign_target && !locals_set.contains(&r.path[0]))
        });
        if !qualifies {
            return;
        }
        let span = self.span(idx, idx);
        let parent_q = &parent.qname;
        let qname = format!("{parent_q}[{counter}]");
        *counter += 1;
        let id = self.ids.alloc(self.path, &qname, BlockKind::Statement);
        self.out.push((
            CodeBlock {
                id,
                kind: BlockKind::Statement,
                span,
                qualified_name: qname,
                parent: Some(parent.clone()),
                text: self.slice(text, &span),
            },
            DeclInfo::Statement,
        ));
    }

    fn maybe_statement_local(
        &mut self,
        text: &str,
        idx: usize,
        parent: &BlockId,
        locals: &BTreeSet<String>,
        counter: &mut u32,
    ) {
        self.maybe_statement(text, idx, parent, Some(locals), counter)
    }
}

/// Parse `name`, `name: ann`, `name = v`, `name: ann = v` shapes.
fn parse_field_like(line: &str) -> (Option<String>, Option<String>, Option<String>) {
    let (lhs, value) = match split_top_assign(line) {
        Some((l, r)) => (l.trim().to_string(), Some(r.trim().to_string())),
        None => (line.trim().to_string(), None),
    };
    let (name, annotation) = match lhs.split_once(':') {
        Some((n, a)) => (n.trim().to_string(), Some(a.trim().to_string())),
        None => (lhs, None),
    };
    if is_ident(&name) && (annotation.is_some() || value.is_some()) {
        (Some(name), annotation, value)
    } else {
        (None, None, None)
    }
}

/// Split on a single top-level `=` (ignores `==`, `<=`, `+=`, ...).
fn split_top_assign(line: &str) -> Option<(&str, &str)> {
    let bytes = line.as_bytes();
    let mut depth = 0i32;
    let mut in_str: Option<u8> = None;
    for i in 0..bytes.len() {
        let c = bytes[i];
        if let Some(q) = in_str {
            if c == q && (i == 0 || bytes[i - 1] != b'\\') {
                in_str = None;
            }
            continue;
        }
        match c {
            b'"' | b'\'' => in_str = Some(c),
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b'=' if depth == 0 => {
                let prev = if i > 0 { bytes[i - 1] } else { 0 };
                let next = if i + 1 < bytes.len() { bytes[i + 1] } else { 0 };
                if next != b'='
                    && !matches!(prev, b'=' | b'!' | b'<' | b'>' | b'+' | b'-' | b'*' | b'/' | b'%')
                {
                    return Some((&line[..i], &line[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

/// Parse `self.name = value` into a constructor-declared field.
fn parse_self_assign(line: &str) -> Option<FieldDecl> {
    let (lhs, rhs) = split_top_assign(line)?;
    let lhs = lhs.trim();
    let name = lhs.strip_prefix("self.")?;
    if !is_ident(name) {
        return None;
    }
    Some(FieldDecl {
        name: name.to_string(),
        annotation: None,
        value: Some(rhs.trim().to_string()),
        from_constructor: true,
    })
}

/// Parse a `def name(params) -> ret:` header.
fn parse_signature(header: &str) -> Option<FuncDecl> {
    let rest = header.strip_prefix("def ")?;
    let open = rest.find('(')?;
    let name = rest[..open].trim().to_string();
    if !is_ident(&name) {
        return None;
    }
    let after = &rest[open + 1..];
    let close = find_matching_paren(after)?;
    let params_text = &after[..close];
    let tail = after[close + 1..].trim();
    let return_annotation = if let Some(t) = tail.strip_suffix(':') {
        let t = t.trim();
        if t.is_empty() {
            None
        } else {
            let ann = t.strip_prefix("->")?.trim();
            if ann.is_empty() {
                return None;
            }
            Some(ann.to_string())
        }
    } else {
        return None;
    };

    let mut params = Vec::new();
    for part in split_top_commas(params_text) {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (lhs, default) = match split_top_assign(part) {
            Some((l, _r)) => (l.trim(), true),
            None => (part, false),
        };
        let (pname, annotation) = match lhs.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim().to_string())),
            None => (lhs, None),
        };
        if !is_ident(pname) {
            return None;
        }
        params.push(Param { name: pname.to_string(), annotation, has_default: default });
    }
    Some(FuncDecl {
        name,
        params,
        return_annotation,
        is_constructor: false,
        signature_text: header.trim().to_string(),
    })
}

fn find_matching_paren(s: &str) -> Option<usize> {
    let mut depth = 1;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top_commas(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
from complexlib import create_complex
import display

class Holder(Base):
    limit: int

    def __init__(self, size):
        self.size = size
        self.items = display.make_list()

    def add(self, item):
        self.items.append(item)
        count = 1
        return count

def top(a, b) -> int:
    c = create_complex(a, b)
    return c
";

    fn parse(text: &str) -> Vec<(CodeBlock, DeclInfo)> {
        parse_source("sample.py", text).expect("parse failed")
    }

    fn find<'a>(blocks: &'a [(CodeBlock, DeclInfo)], qname: &str, kind: BlockKind) -> &'a CodeBlock {
        blocks
            .iter()
            .map(|(b, _)| b)
            .find(|b| b.qualified_name == qname && b.kind == kind)
            .unwrap_or_else(|| panic!("missing block {qname} ({kind})"))
    }

    #[test]
    fn extracts_expected_block_kinds() {
        let blocks = parse(SAMPLE);
        let kinds: Vec<BlockKind> = blocks.iter().map(|(b, _)| b.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == BlockKind::Import).count(), 2);
        assert_eq!(kinds.iter().filter(|k| **k == BlockKind::Class).count(), 1);
        assert_eq!(kinds.iter().filter(|k| **k == BlockKind::Constructor).count(), 1);
        // add + top
        assert_eq!(kinds.iter().filter(|k| **k == BlockKind::Method).count(), 2);
        // limit (class-level) + size + items (constructor)
        assert_eq!(kinds.iter().filter(|k| **k == BlockKind::Field).count(), 3);
    }

    #[test]
    fn constructor_self_assigns_become_fields_not_statements() {
        let blocks = parse(SAMPLE);
        let ctor = find(&blocks, "Holder.__init__", BlockKind::Constructor);
        let stmt_children = blocks
            .iter()
            .filter(|(b, _)| b.kind == BlockKind::Statement && b.parent.as_ref() == Some(&ctor.id))
            .count();
        assert_eq!(stmt_children, 0);
        let field = find(&blocks, "Holder.items", BlockKind::Field);
        assert!(field.text.contains("display.make_list()"));
    }

    #[test]
    fn local_only_statements_are_not_tracked() {
        let blocks = parse(SAMPLE);
        let add = find(&blocks, "Holder.add", BlockKind::Method);
        let stmts: Vec<&CodeBlock> = blocks
            .iter()
            .map(|(b, _)| b)
            .filter(|b| b.kind == BlockKind::Statement && b.parent.as_ref() == Some(&add.id))
            .collect();
        // `self.items.append(item)` is tracked; `count = 1` and `return count` are local-only.
        assert_eq!(stmts.len(), 1);
        assert!(stmts[0].text.contains("append"));
    }

    #[test]
    fn spans_nest_inside_parents() {
        let blocks = parse(SAMPLE);
        let by_id: std::collections::BTreeMap<_, _> =
            blocks.iter().map(|(b, _)| (b.id.clone(), b)).collect();
        for (b, _) in &blocks {
            if let Some(parent) = &b.parent {
                let p = by_id[parent];
                assert!(p.span.contains(&b.span), "{} not inside {}", b.id, p.id);
            }
        }
    }

    #[test]
    fn signature_parse_extracts_defaults_and_annotations() {
        let decl = parse_signature("def load(path, filename=None, cache_dir=None) -> int:").unwrap();
        assert_eq!(decl.name, "load");
        assert_eq!(decl.params.len(), 3);
        assert!(!decl.params[0].has_default);
        assert!(decl.params[1].has_default);
        assert_eq!(decl.return_annotation.as_deref(), Some("int"));
    }

    #[test]
    fn rejects_malformed_class_header() {
        let err = parse_source("bad.py", "class Broken\n    pass\n").unwrap_err();
        match err {
            SyntaxError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn module_block_is_root() {
        let blocks = parse(SAMPLE);
        let module = &blocks[0].0;
        assert_eq!(module.kind, BlockKind::Module);
        assert!(blocks.iter().skip(1).all(|(b, _)| b.parent.is_some()));
        assert_eq!(module.qualified_name, "sample");
    }
}
