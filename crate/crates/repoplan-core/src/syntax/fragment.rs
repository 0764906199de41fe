//! Sketched fragments: the unit of text handed to an edit backend.
//!
//! A fragment keeps the subject block's code in full. When the subject sits
//! inside a class, the sketch additionally shows the class declaration line
//! and every sibling member declaration with its body folded behind a
//! single-line placeholder comment. Folding is byte-exact and reversible, so
//! an unedited sketch merges back to the identical repository.

use super::{BlockId, BlockKind, Repository, SyntaxError};

/// One folded member body: the placeholder marker that stands for it in the
/// sketch and the original body bytes used to restore it on merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldEntry {
    pub marker: String,
    pub block: BlockId,
    pub(crate) body_text: String,
}

/// A sketched, editable extract of the repository.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub subject: BlockId,
    pub sketch_text: String,
    pub fold_map: Vec<FoldEntry>,
    pub file: String,
    /// The subject block's own text; appears in the sketch exactly once.
    pub subject_text: String,
    pub(crate) region_start: usize,
    pub(crate) region_end: usize,
    pub(crate) region_text: String,
}

/// Result of merging an edited sketch back into the repository.
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub repo: Repository,
    /// Exact text of the subject region before the merge.
    pub before_text: String,
    /// Exact text of the subject region after the merge.
    pub after_text: String,
    pub file: String,
}

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error("merge rejected: {0}")]
    Rejected(String),
    #[error("fragment is stale: {0}")]
    Stale(String),
}

fn marker_for(index: usize) -> String {
    format!("# <<folded:{index}>>")
}

/// Extract the editable fragment for `subject`.
///
/// Subjects inside a class produce the class sketch (subject body kept, all
/// sibling bodies folded). A `Class` subject folds every member body. Blocks
/// without an enclosing class are extracted verbatim.
pub fn extract_fragment(repo: &Repository, subject: &BlockId) -> Result<Fragment, SyntaxError> {
    let block = repo.block(subject).ok_or_else(|| SyntaxError::UnknownBlock(subject.clone()))?;
    let file = repo
        .file(&subject.file)
        .ok_or_else(|| SyntaxError::UnknownBlock(subject.clone()))?;

    // The sketch region: the enclosing class when there is one, else the block.
    let region_block = match block.kind {
        BlockKind::Class => Some(block),
        _ => block
            .parent
            .as_ref()
            .and_then(|p| repo.block(p))
            .filter(|p| p.kind == BlockKind::Class),
    }
    .unwrap_or(block);

    let region_start = region_block.span.start_byte;
    let region_end = region_block.span.end_byte;
    let region_text = file.text[region_start..region_end].to_string();

    let mut folds = Vec::new();
    if region_block.kind == BlockKind::Class {
        for child in repo.children(&region_block.id) {
            if !matches!(child.kind, BlockKind::Method | BlockKind::Constructor) {
                continue;
            }
            if &child.id == subject {
                continue;
            }
            // Body bytes: everything after the signature line.
            let header_end = file.text[child.span.start_byte..child.span.end_byte]
                .find('\n')
                .map(|i| child.span.start_byte + i + 1);
            let Some(body_start) = header_end else { continue };
            if body_start >= child.span.end_byte {
                continue;
            }
            folds.push((body_start, child.span.end_byte, child.id.clone()));
        }
    }
    folds.sort_by_key(|(start, _, _)| *start);

    let mut sketch = region_text.clone();
    let mut fold_map = Vec::new();
    for (i, (start, end, id)) in folds.iter().enumerate() {
        fold_map.push(FoldEntry {
            marker: marker_for(i),
            block: id.clone(),
            body_text: file.text[*start..*end].to_string(),
        });
    }
    // Replace back to front so earlier offsets stay valid.
    for (i, (start, end, _)) in folds.iter().enumerate().rev() {
        let rel_start = start - region_start;
        let rel_end = end - region_start;
        let indent_len = file.text[*start..*end].len() - file.text[*start..*end].trim_start().len();
        let indent = &file.text[*start..*start + indent_len];
        let replacement = format!("{indent}{}", marker_for(i));
        sketch.replace_range(rel_start..rel_end, &replacement);
    }

    Ok(Fragment {
        subject: subject.clone(),
        sketch_text: sketch,
        fold_map,
        file: subject.file.clone(),
        subject_text: block.text.clone(),
        region_start,
        region_end,
        region_text,
    })
}

/// Restore folded bodies in an edited sketch text.
fn restore_folds(new_text: &str, fragment: &Fragment) -> Result<String, MergeError> {
    let marker_re = regex::Regex::new(r"#\s*<<folded:(\d+)>>").expect("static regex");
    let mut seen = vec![false; fragment.fold_map.len()];
    let mut restored = String::with_capacity(new_text.len());
    for raw in new_text.split_inclusive('\n') {
        let line = raw.strip_suffix('\n').unwrap_or(raw);
        let newline = if raw.ends_with('\n') { "\n" } else { "" };
        if let Some(cap) = marker_re.captures(line) {
            let index: usize = cap[1].parse().map_err(|_| {
                MergeError::Rejected(format!("unparseable placeholder `{}`", line.trim()))
            })?;
            if index >= fragment.fold_map.len() {
                return Err(MergeError::Rejected(format!(
                    "unknown placeholder `{}`",
                    line.trim()
                )));
            }
            if seen[index] {
                return Err(MergeError::Rejected(format!(
                    "duplicate placeholder `{}`",
                    line.trim()
                )));
            }
            seen[index] = true;
            restored.push_str(&fragment.fold_map[index].body_text);
            restored.push_str(newline);
        } else {
            restored.push_str(raw);
        }
    }
    Ok(restored)
}

/// Merge an edited sketch back into the repository.
///
/// On success returns the new repository plus the exact before/after text of
/// the subject region for change classification. On rejection the input
/// repository is untouched.
pub fn merge_fragment(
    repo: &Repository,
    new_text: &str,
    fragment: &Fragment,
) -> Result<MergeOutcome, MergeError> {
    let file = repo
        .file(&fragment.file)
        .ok_or_else(|| MergeError::Stale(format!("file {} no longer exists", fragment.file)))?;
    if fragment.region_end > file.text.len()
        || file.text[fragment.region_start..fragment.region_end] != fragment.region_text
    {
        return Err(MergeError::Stale(format!(
            "region of {} changed since extraction",
            fragment.subject
        )));
    }

    let restored = restore_folds(new_text, fragment)?;
    let candidate = format!(
        "{}{}{}",
        &file.text[..fragment.region_start],
        restored,
        &file.text[fragment.region_end..]
    );
    if let Err(e) = super::parser::parse_source(&fragment.file, &candidate) {
        return Err(MergeError::Rejected(format!("edited fragment does not parse: {e}")));
    }

    let mut new_repo = repo.clone();
    new_repo.replace_file_text(&fragment.file, candidate);
    Ok(MergeOutcome {
        repo: new_repo,
        before_text: fragment.region_text.clone(),
        after_text: restored,
        file: fragment.file.clone(),
    })
}
