//! Text differencing primitives: LCS line diff, zero-context unified hunks
//! and character-level Levenshtein distance.

/// One run of a line-level diff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffOp {
    Equal(Vec<String>),
    Delete(Vec<String>),
    Insert(Vec<String>),
}

/// LCS-based line diff of `a` against `b`.
pub fn line_diff(a: &str, b: &str) -> Vec<DiffOp> {
    let a_lines: Vec<&str> = a.lines().collect();
    let b_lines: Vec<&str> = b.lines().collect();
    let n = a_lines.len();
    let m = b_lines.len();

    // lcs[i][j] = LCS length of a[i..] and b[j..]
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a_lines[i] == b_lines[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }

    let mut ops: Vec<DiffOp> = Vec::new();
    let push = |ops: &mut Vec<DiffOp>, op: DiffOp| match (ops.last_mut(), op) {
        (Some(DiffOp::Equal(v)), DiffOp::Equal(mut w)) => v.append(&mut w),
        (Some(DiffOp::Delete(v)), DiffOp::Delete(mut w)) => v.append(&mut w),
        (Some(DiffOp::Insert(v)), DiffOp::Insert(mut w)) => v.append(&mut w),
        (_, op) => ops.push(op),
    };

    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a_lines[i] == b_lines[j] {
            push(&mut ops, DiffOp::Equal(vec![a_lines[i].to_string()]));
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            push(&mut ops, DiffOp::Delete(vec![a_lines[i].to_string()]));
            i += 1;
        } else {
            push(&mut ops, DiffOp::Insert(vec![b_lines[j].to_string()]));
            j += 1;
        }
    }
    if i < n {
        push(&mut ops, DiffOp::Delete(a_lines[i..].iter().map(|s| s.to_string()).collect()));
    }
    if j < m {
        push(&mut ops, DiffOp::Insert(b_lines[j..].iter().map(|s| s.to_string()).collect()));
    }
    ops
}

/// Lines removed from `a` and lines added in `b`, per the LCS diff.
pub fn changed_lines(a: &str, b: &str) -> (Vec<String>, Vec<String>) {
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for op in line_diff(a, b) {
        match op {
            DiffOp::Delete(v) => removed.extend(v),
            DiffOp::Insert(v) => added.extend(v),
            DiffOp::Equal(_) => {}
        }
    }
    (removed, added)
}

/// One zero-context unified hunk: `-` lines then `+` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub a_start: usize,
    pub b_start: usize,
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

/// Zero-context unified hunks of `a` -> `b`.
pub fn unified_hunks(a: &str, b: &str) -> Vec<Hunk> {
    let mut hunks = Vec::new();
    let mut a_line = 1usize;
    let mut b_line = 1usize;
    let mut current: Option<Hunk> = None;
    for op in line_diff(a, b) {
        match op {
            DiffOp::Equal(v) => {
                if let Some(h) = current.take() {
                    hunks.push(h);
                }
                a_line += v.len();
                b_line += v.len();
            }
            DiffOp::Delete(v) => {
                let h = current.get_or_insert(Hunk {
                    a_start: a_line,
                    b_start: b_line,
                    removed: Vec::new(),
                    added: Vec::new(),
                });
                a_line += v.len();
                h.removed.extend(v);
            }
            DiffOp::Insert(v) => {
                let h = current.get_or_insert(Hunk {
                    a_start: a_line,
                    b_start: b_line,
                    removed: Vec::new(),
                    added: Vec::new(),
                });
                b_line += v.len();
                h.added.extend(v);
            }
        }
    }
    if let Some(h) = current.take() {
        hunks.push(h);
    }
    hunks
}

/// Serialized hunk content: `-`/`+` prefixed lines, no positional headers.
pub fn hunks_text(hunks: &[Hunk]) -> String {
    let mut out = String::new();
    for h in hunks {
        for l in &h.removed {
            out.push('-');
            out.push_str(l);
            out.push('\n');
        }
        for l in &h.added {
            out.push('+');
            out.push_str(l);
            out.push('\n');
        }
    }
    out
}

/// Character-level Levenshtein distance (unit costs).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kitten_sitting_is_three() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn levenshtein_empty_cases() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("", "abcd"), 4);
    }

    #[test]
    fn identical_texts_have_no_hunks() {
        assert!(unified_hunks("a\nb\n", "a\nb\n").is_empty());
    }

    #[test]
    fn single_line_replacement_is_one_hunk() {
        let hunks = unified_hunks("a\nb\nc\n", "a\nB\nc\n");
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].removed, vec!["b"]);
        assert_eq!(hunks[0].added, vec!["B"]);
        assert_eq!(hunks[0].a_start, 2);
    }

    #[test]
    fn hunks_text_uses_prefixes() {
        let hunks = unified_hunks("x\n", "y\n");
        assert_eq!(hunks_text(&hunks), "-x\n+y\n");
    }

    #[test]
    fn changed_lines_reports_both_sides() {
        let (removed, added) = changed_lines("a\nold\nc\n", "a\nnew\nc\nd\n");
        assert_eq!(removed, vec!["old"]);
        assert_eq!(added, vec!["new", "d"]);
    }
}
