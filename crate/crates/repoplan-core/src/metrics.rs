//! Evaluation metrics: block metrics (matched/missed/spurious), file-level
//! Levenshtein distance, Diff BLEU over zero-context diff hunks, and the
//! validity check against oracle plus ground truth.

use crate::oracle::{Oracle, OracleError, OracleVerdict};
use crate::syntax::{BlockKind, Repository};
use crate::textdiff::{hunks_text, levenshtein, unified_hunks};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Full evaluation report for a predicted repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub matched: usize,
    pub missed: usize,
    pub spurious: usize,
    pub levenshtein_total: usize,
    pub diff_bleu: f64,
    pub oracle_pass: Option<bool>,
    pub ground_truth_match: bool,
    pub validity: bool,
}

impl MetricsReport {
    /// Human-readable table in the conventional column order.
    pub fn render_table(&self) -> String {
        let validity = match (self.oracle_pass, self.validity) {
            (_, true) => "pass",
            (Some(false), _) => "fail (oracle)",
            _ => "fail",
        };
        let mut out = String::new();
        out.push_str(
            "| Matched Blocks | Missed Blocks | Spurious Blocks | Diff BLEU | Levenshtein Distance | Validity |\n",
        );
        out.push_str(
            "|---------------|---------------|-----------------|-----------|----------------------|----------|\n",
        );
        out.push_str(&format!(
            "| {} | {} | {} | {:.2} | {} | {} |\n",
            self.matched, self.missed, self.spurious, self.diff_bleu, self.levenshtein_total, validity
        ));
        out
    }
}

/// Key of a metrics unit block: (file, qualified name, kind).
type UnitKey = (String, String, BlockKind);

/// Whitespace normalization for the "edited" decision: collapse all runs of
/// whitespace to single spaces.
fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Unit blocks of a repository: imports, fields, methods, constructors,
/// module-level statements, and classes compared by header line only (their
/// members are units of their own).
fn unit_blocks(repo: &Repository) -> BTreeMap<UnitKey, String> {
    let mut out = BTreeMap::new();
    for b in repo.blocks() {
        let text = match b.kind {
            BlockKind::Import | BlockKind::Field | BlockKind::Method | BlockKind::Constructor => {
                b.text.clone()
            }
            BlockKind::Statement => {
                let module_level =
                    b.parent.as_ref().map(|p| p.kind == BlockKind::Module).unwrap_or(false);
                if !module_level {
                    continue;
                }
                b.text.clone()
            }
            BlockKind::Class => b.text.lines().next().unwrap_or("").to_string(),
            BlockKind::Module => continue,
        };
        out.insert(
            (b.id.file.clone(), b.qualified_name.clone(), b.kind),
            normalize_ws(&text),
        );
    }
    out
}

/// Keys edited between two repositories: text differs after whitespace
/// normalization; blocks present on only one side count as edited.
fn edited_keys(
    base: &BTreeMap<UnitKey, String>,
    other: &BTreeMap<UnitKey, String>,
) -> BTreeSet<UnitKey> {
    let mut out = BTreeSet::new();
    for (k, v) in base {
        match other.get(k) {
            Some(w) if w == v => {}
            _ => {
                out.insert(k.clone());
            }
        }
    }
    for k in other.keys() {
        if !base.contains_key(k) {
            out.insert(k.clone());
        }
    }
    out
}

/// Matched / missed / spurious block counts.
///
/// matched: edited in target and in predicted; missed: edited in target
/// only; spurious: edited in predicted only.
pub fn block_metrics(
    source: &Repository,
    target: &Repository,
    predicted: &Repository,
) -> (usize, usize, usize) {
    let s = unit_blocks(source);
    let t = unit_blocks(target);
    let p = unit_blocks(predicted);
    let target_edited = edited_keys(&s, &t);
    let predicted_edited = edited_keys(&s, &p);
    let matched = target_edited.intersection(&predicted_edited).count();
    let missed = target_edited.difference(&predicted_edited).count();
    let spurious = predicted_edited.difference(&target_edited).count();
    (matched, missed, spurious)
}

/// Keys edited in the target relative to source (exposed for fixtures/tests).
pub fn target_edited_count(source: &Repository, target: &Repository) -> usize {
    edited_keys(&unit_blocks(source), &unit_blocks(target)).len()
}

/// Sum of character-level Levenshtein distances over the union of file
/// paths; a file missing on one side compares against empty text.
pub fn levenshtein_total(predicted: &Repository, target: &Repository) -> usize {
    let mut paths: BTreeSet<&str> = predicted.file_paths().collect();
    paths.extend(target.file_paths());
    paths
        .into_iter()
        .map(|p| {
            let a = predicted.file(p).map(|f| f.text.as_str()).unwrap_or("");
            let b = target.file(p).map(|f| f.text.as_str()).unwrap_or("");
            levenshtein(a, b)
        })
        .sum()
}

/// Tokenize diff text on whitespace and punctuation: identifier/number runs
/// are single tokens, every other non-space character is its own token.
fn bleu_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut out: BTreeMap<&[String], usize> = BTreeMap::new();
    if tokens.len() < n {
        return out;
    }
    for window in tokens.windows(n) {
        *out.entry(window).or_insert(0) += 1;
    }
    out
}

/// Corpus-level 4-gram BLEU between per-file diffs: reference is the
/// source->target diff, hypothesis the source->predicted diff. Hunks are
/// zero-context; files where both diffs are empty are skipped. Higher-order
/// n-gram precisions use add-one smoothing so an exact modification match
/// scores exactly 1.0; an empty hypothesis against a non-empty reference
/// scores 0.0.
pub fn diff_bleu(source: &Repository, target: &Repository, predicted: &Repository) -> f64 {
    let mut paths: BTreeSet<&str> = source.file_paths().collect();
    paths.extend(target.file_paths());
    paths.extend(predicted.file_paths());

    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];

    for path in paths {
        let src = source.file(path).map(|f| f.text.as_str()).unwrap_or("");
        let tgt = target.file(path).map(|f| f.text.as_str()).unwrap_or("");
        let prd = predicted.file(path).map(|f| f.text.as_str()).unwrap_or("");
        let ref_diff = hunks_text(&unified_hunks(src, tgt));
        let hyp_diff = hunks_text(&unified_hunks(src, prd));
        if ref_diff.is_empty() && hyp_diff.is_empty() {
            continue;
        }
        let ref_tokens = bleu_tokens(&ref_diff);
        let hyp_tokens = bleu_tokens(&hyp_diff);
        ref_len += ref_tokens.len();
        hyp_len += hyp_tokens.len();
        for n in 1..=4 {
            let ref_counts = ngram_counts(&ref_tokens, n);
            let hyp_counts = ngram_counts(&hyp_tokens, n);
            for (gram, count) in &hyp_counts {
                totals[n - 1] += count;
                if let Some(rc) = ref_counts.get(gram) {
                    matches[n - 1] += count.min(rc);
                }
            }
        }
    }

    if hyp_len == 0 {
        return if ref_len == 0 { 1.0 } else { 0.0 };
    }
    if totals[0] == 0 || matches[0] == 0 {
        return 0.0;
    }

    let mut log_sum = 0.0f64;
    for n in 0..4 {
        let p = if n == 0 {
            matches[0] as f64 / totals[0] as f64
        } else {
            (matches[n] as f64 + 1.0) / (totals[n] as f64 + 1.0)
        };
        log_sum += p.ln();
    }
    let brevity = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    brevity * (log_sum / 4.0).exp()
}

/// Validity: the oracle accepts the predicted repository AND block metrics
/// show no missed or spurious blocks against the ground truth.
pub fn validity_check(
    source: &Repository,
    target: &Repository,
    predicted: &Repository,
    oracle: &dyn Oracle,
) -> Result<MetricsReport, OracleError> {
    let verdict: OracleVerdict = oracle.check(predicted)?;
    Ok(report(source, target, predicted, Some(&verdict)))
}

/// Assemble the full metrics report; `verdict` is the oracle's output on the
/// predicted repository when available.
pub fn report(
    source: &Repository,
    target: &Repository,
    predicted: &Repository,
    verdict: Option<&OracleVerdict>,
) -> MetricsReport {
    let (matched, missed, spurious) = block_metrics(source, target, predicted);
    let ground_truth_match = missed == 0 && spurious == 0;
    let oracle_pass = verdict.map(|v| v.pass);
    MetricsReport {
        matched,
        missed,
        spurious,
        levenshtein_total: levenshtein_total(predicted, target),
        diff_bleu: diff_bleu(source, target, predicted),
        oracle_pass,
        ground_truth_match,
        validity: ground_truth_match && oracle_pass == Some(true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repo(files: &[(&str, &str)]) -> Repository {
        Repository::from_sources(files.iter().map(|(p, t)| (p.to_string(), t.to_string())))
    }

    const SRC: &str = "\
def func(a, b):
    c = make(a, b)
    return c

def other(x):
    return x
";

    #[test]
    fn predicted_equals_target_matches_all() {
        let source = repo(&[("m.py", SRC)]);
        let edited = SRC.replace("make(a, b)", "make(a, b, 1)").replace("return x", "return x + 1");
        let target = repo(&[("m.py", &edited)]);
        let (m, mi, s) = block_metrics(&source, &target, &target);
        assert_eq!((m, mi, s), (2, 0, 0));
    }

    #[test]
    fn predicted_equals_source_misses_all() {
        let source = repo(&[("m.py", SRC)]);
        let edited = SRC.replace("make(a, b)", "make(a, b, 1)");
        let target = repo(&[("m.py", &edited)]);
        let (m, mi, s) = block_metrics(&source, &target, &source);
        assert_eq!((m, mi, s), (0, 1, 0));
    }

    #[test]
    fn whitespace_only_change_is_not_edited() {
        let source = repo(&[("m.py", SRC)]);
        let ws = SRC.replace("c = make(a, b)", "c  =  make(a,  b)");
        let predicted = repo(&[("m.py", &ws)]);
        let (m, mi, s) = block_metrics(&source, &source, &predicted);
        assert_eq!((m, mi, s), (0, 0, 0));
    }

    #[test]
    fn file_only_in_target_counts_as_edited() {
        let source = repo(&[("m.py", SRC)]);
        let target = repo(&[("m.py", SRC), ("extra.py", "def fresh(x):\n    return x\n")]);
        let (m, mi, s) = block_metrics(&source, &target, &source);
        assert_eq!(m, 0);
        assert_eq!(mi, 1); // the new method block
        assert_eq!(s, 0);
    }

    #[test]
    fn matched_plus_missed_equals_target_edits() {
        let source = repo(&[("m.py", SRC)]);
        let edited = SRC.replace("make(a, b)", "make(a)").replace("return x", "return x * 2");
        let target = repo(&[("m.py", &edited)]);
        let half = SRC.replace("make(a, b)", "make(a)");
        let predicted = repo(&[("m.py", &half)]);
        let (m, mi, _s) = block_metrics(&source, &target, &predicted);
        assert_eq!(m + mi, target_edited_count(&source, &target));
    }

    #[test]
    fn levenshtein_totals() {
        let a = repo(&[("m.py", "kitten")]);
        let b = repo(&[("m.py", "sitting")]);
        assert_eq!(levenshtein_total(&a, &b), 3);
        let only_target = repo(&[("m.py", "kitten"), ("n.py", "abcd")]);
        assert_eq!(levenshtein_total(&a, &only_target), 4);
        assert_eq!(levenshtein_total(&a, &a), 0);
    }

    #[test]
    fn diff_bleu_perfect_match_is_exactly_one() {
        let source = repo(&[("m.py", SRC)]);
        let edited = SRC.replace("make(a, b)", "make(a, b, extra)");
        let target = repo(&[("m.py", &edited)]);
        assert_eq!(diff_bleu(&source, &target, &target), 1.0);
    }

    #[test]
    fn diff_bleu_empty_hypothesis_is_zero() {
        let source = repo(&[("m.py", SRC)]);
        let edited = SRC.replace("make(a, b)", "make(a, b, extra)");
        let target = repo(&[("m.py", &edited)]);
        assert_eq!(diff_bleu(&source, &target, &source), 0.0);
    }

    #[test]
    fn diff_bleu_no_required_edits_is_one() {
        let source = repo(&[("m.py", SRC)]);
        assert_eq!(diff_bleu(&source, &source, &source), 1.0);
    }

    #[test]
    fn diff_bleu_partial_overlap_is_strictly_between() {
        let source = repo(&[("m.py", "a\nb\nc\nd\n")]);
        let target = repo(&[("m.py", "a\nB1 B2 B3 B4\nc\nd\n")]);
        let predicted = repo(&[("m.py", "a\nB1 B2 X Y\nc\nd\n")]);
        let score = diff_bleu(&source, &target, &predicted);
        assert!(score > 0.0 && score < 1.0, "score = {score}");
        // adding more matching tokens raises the score
        let closer = repo(&[("m.py", "a\nB1 B2 B3 Y\nc\nd\n")]);
        let better = diff_bleu(&source, &target, &closer);
        assert!(better > score, "{better} !> {score}");
    }
}
