//! Lightweight reference scanner over statement text.
//!
//! Extracts identifier chains (`a.b.c`), whether a chain is called and with
//! which argument shape, and whether it is the target of an assignment.
//! String literals and `#` comments are skipped. This feeds dependency-edge
//! derivation, escape analysis and the internal checker.

/// Argument shape of a call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallArgs {
    pub positional: usize,
    pub keywords: Vec<String>,
}

impl CallArgs {
    pub fn total(&self) -> usize {
        self.positional + self.keywords.len()
    }
}

/// One identifier chain found in a piece of text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprRef {
    /// Identifier chain, e.g. `self.reporter.emit` -> ["self", "reporter", "emit"].
    pub path: Vec<String>,
    /// Present when the chain is immediately called.
    pub call: Option<CallArgs>,
    /// Chain is the left-hand side of a top-level `=` assignment.
    pub is_assign_target: bool,
    /// 1-based line within the scanned text.
    pub line: usize,
}

const KEYWORDS: &[&str] = &[
    "def", "class", "import", "from", "as", "return", "raise", "if", "elif", "else", "while",
    "for", "in", "not", "and", "or", "pass", "del", "with", "try", "except", "finally", "lambda",
    "global", "nonlocal", "assert", "yield", "is", "None", "True", "False", "break", "continue",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Dot,
    LParen,
    RParen,
    Comma,
    /// Single `=` (not `==`, `<=`, etc.).
    Assign,
    Other,
}

fn tokenize(text: &str) -> Vec<(Tok, usize)> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '"' | '\'' => {
                let quote = bytes[i];
                i += 1;
                while i < bytes.len() && bytes[i] != quote {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                i += 1;
                toks.push((Tok::Other, line));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                if KEYWORDS.contains(&word) {
                    toks.push((Tok::Other, line));
                } else {
                    toks.push((Tok::Ident(word.to_string()), line));
                }
            }
            '.' => {
                toks.push((Tok::Dot, line));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, line));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, line));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, line));
                i += 1;
            }
            '=' => {
                let prev = if i > 0 { bytes[i - 1] } else { 0 };
                let next = if i + 1 < bytes.len() { bytes[i + 1] } else { 0 };
                let is_compare = next == b'='
                    || matches!(prev, b'=' | b'!' | b'<' | b'>' | b'+' | b'-' | b'*' | b'/');
                if is_compare {
                    toks.push((Tok::Other, line));
                } else {
                    toks.push((Tok::Assign, line));
                }
                i += 1;
            }
            c if c.is_ascii_digit() => {
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'.')
                {
                    i += 1;
                }
                toks.push((Tok::Other, line));
            }
            _ => {
                toks.push((Tok::Other, line));
                i += 1;
            }
        }
    }
    toks
}

/// Count the argument shape of a call whose `(` sits at token index `open`.
fn call_args(toks: &[(Tok, usize)], open: usize) -> CallArgs {
    let mut depth = 0usize;
    let mut positional = 0usize;
    let mut keywords = Vec::new();
    let mut saw_any = false;
    let mut arg_start = open + 1;
    let mut i = open;
    while i < toks.len() {
        match &toks[i].0 {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth == 0 {
                    if saw_any || i > open + 1 {
                        classify_arg(toks, arg_start, i, &mut positional, &mut keywords);
                    }
                    break;
                }
            }
            Tok::Comma if depth == 1 => {
                classify_arg(toks, arg_start, i, &mut positional, &mut keywords);
                saw_any = true;
                arg_start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    CallArgs { positional, keywords }
}

fn classify_arg(
    toks: &[(Tok, usize)],
    start: usize,
    end: usize,
    positional: &mut usize,
    keywords: &mut Vec<String>,
) {
    if start >= end {
        return;
    }
    if let (Tok::Ident(name), Some((Tok::Assign, _))) = (&toks[start].0, toks.get(start + 1)) {
        keywords.push(name.clone());
    } else {
        *positional += 1;
    }
}

/// Scan `text` for identifier chains. Nested call arguments are scanned too.
pub fn scan_refs(text: &str) -> Vec<ExprRef> {
    let toks = tokenize(text);
    let mut refs = Vec::new();
    let mut depth = 0usize;
    let mut i = 0;
    while i < toks.len() {
        match &toks[i].0 {
            Tok::LParen => {
                depth += 1;
                i += 1;
            }
            Tok::RParen => {
                depth = depth.saturating_sub(1);
                i += 1;
            }
            Tok::Ident(first) => {
                let line = toks[i].1;
                let mut path = vec![first.clone()];
                let mut j = i + 1;
                while j + 1 < toks.len() {
                    if toks[j].0 == Tok::Dot {
                        if let Tok::Ident(next) = &toks[j + 1].0 {
                            path.push(next.clone());
                            j += 2;
                            continue;
                        }
                    }
                    break;
                }
                let call = if toks.get(j).map(|t| &t.0) == Some(&Tok::LParen) {
                    Some(call_args(&toks, j))
                } else {
                    None
                };
                let has_call = call.is_some();
                let is_assign_target =
                    depth == 0 && !has_call && toks.get(j).map(|t| &t.0) == Some(&Tok::Assign);
                refs.push(ExprRef { path, call, is_assign_target, line });
                // Continue just past the chain so nested refs inside call
                // arguments are still visited.
                i = j;
                if has_call {
                    // skip the '(' itself; argument tokens are scanned normally
                    depth += 1;
                    i += 1;
                }
            }
            _ => {
                i += 1;
            }
        }
    }
    refs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(refs: &[ExprRef]) -> Vec<String> {
        refs.iter().map(|r| r.path.join(".")).collect()
    }

    #[test]
    fn scans_calls_and_chains() {
        let refs = scan_refs("c = create_complex(a, b)\n");
        assert_eq!(paths(&refs), vec!["c", "create_complex", "a", "b"]);
        assert!(refs[0].is_assign_target);
        let call = refs[1].call.as_ref().unwrap();
        assert_eq!(call.positional, 2);
        assert!(call.keywords.is_empty());
    }

    #[test]
    fn scans_dotted_receiver_call() {
        let refs = scan_refs("self.reporter.emit(data)");
        assert_eq!(paths(&refs), vec!["self.reporter.emit", "data"]);
        assert_eq!(refs[0].call.as_ref().unwrap().positional, 1);
    }

    #[test]
    fn keyword_arguments_are_not_assign_targets() {
        let refs = scan_refs("fetch(url, cache_dir=cache_dir)");
        let fetch = &refs[0];
        let call = fetch.call.as_ref().unwrap();
        assert_eq!(call.positional, 1);
        assert_eq!(call.keywords, vec!["cache_dir".to_string()]);
        assert!(refs.iter().all(|r| !r.is_assign_target));
    }

    #[test]
    fn skips_strings_comments_and_keywords() {
        let refs = scan_refs("x = data.pop(\"api_key\")  # pop() the key\nreturn x\n");
        assert_eq!(paths(&refs), vec!["x", "data.pop", "x"]);
    }

    #[test]
    fn nested_call_arguments_are_scanned() {
        let refs = scan_refs("show(make_pair(a, b))");
        assert_eq!(paths(&refs), vec!["show", "make_pair", "a", "b"]);
    }

    #[test]
    fn comparison_is_not_assignment() {
        let refs = scan_refs("flag == other");
        assert!(refs.iter().all(|r| !r.is_assign_target));
        let refs = scan_refs("count += value");
        assert!(refs.iter().all(|r| !r.is_assign_target));
    }
}
