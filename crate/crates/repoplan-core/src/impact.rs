//! Change may-impact analysis: map classified atomic changes to the set of
//! possibly affected blocks, each paired with the relation that caused it.
//!
//! Every label's rule is the union of `rel(...)` clauses over the dependency
//! graph before (D) and, where the rule says so, after (D') the update. The
//! analysis over-approximates; it never decides that an affected block truly
//! requires an edit — that decision belongs to the edit backend.

use crate::change::{AtomicChange, ChangeLabel};
use crate::depgraph::{DependencyGraph, RelationLabel};
use crate::syntax::{BlockId, BlockKind, Repository};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// An affected block together with the dependency relation that implicated it.
pub type AffectedPair = (BlockId, RelationLabel);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactWarning {
    pub block: BlockId,
    pub message: String,
}

/// Enclosing class of a subject, looked up in the given graph (falls back to
/// the repository parent for freshly added blocks).
fn enclosing_class(
    subject: &BlockId,
    graph: &DependencyGraph,
    repo: &Repository,
) -> Option<BlockId> {
    if let Some(parent) = graph
        .neighbors(subject, RelationLabel::ChildOf)
        .into_iter()
        .find(|p| p.kind == BlockKind::Class)
    {
        return Some(parent);
    }
    repo.block(subject)
        .and_then(|b| b.parent.clone())
        .filter(|p| p.kind == BlockKind::Class)
}

fn rel_of(
    graph: &DependencyGraph,
    b: Option<&BlockId>,
    label: RelationLabel,
    out: &mut BTreeSet<AffectedPair>,
) {
    if let Some(b) = b {
        for peer in graph.neighbors(b, label) {
            out.insert((peer, label));
        }
    }
}

/// Apply the may-impact rule of each change and union the results.
///
/// `subject` is the edited obligation block; it is never part of its own
/// affected set. Affected blocks that are no longer live in the repository
/// are dropped with a warning.
pub fn get_affected_blocks(
    changes: &[AtomicChange],
    subject: &BlockId,
    d_before: &DependencyGraph,
    d_after: &DependencyGraph,
    repo: &Repository,
) -> (BTreeSet<AffectedPair>, Vec<ImpactWarning>) {
    use RelationLabel::*;
    let mut out: BTreeSet<AffectedPair> = BTreeSet::new();
    let mut warnings = Vec::new();

    for change in changes {
        let s = &change.subject;
        match change.label {
            ChangeLabel::MMB => {
                if change.escaping == Some(true) {
                    if s.kind == BlockKind::Constructor {
                        // Constructors have no CalledBy edges; an escaping
                        // body change reaches the class's instantiators.
                        let class = enclosing_class(s, d_before, repo);
                        rel_of(d_before, class.as_ref(), InstantiatedBy, &mut out);
                    } else {
                        rel_of(d_before, Some(s), CalledBy, &mut out);
                    }
                }
            }
            ChangeLabel::MMS => {
                rel_of(d_before, Some(s), CalledBy, &mut out);
                rel_of(d_before, Some(s), Overrides, &mut out);
                rel_of(d_before, Some(s), OverriddenBy, &mut out);
                rel_of(d_after, Some(s), Overrides, &mut out);
                rel_of(d_after, Some(s), OverriddenBy, &mut out);
            }
            ChangeLabel::MF => {
                let class = enclosing_class(s, d_before, repo);
                rel_of(d_before, Some(s), UsedBy, &mut out);
                rel_of(d_before, class.as_ref(), ConstructedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::MC => {
                rel_of(d_before, Some(s), InstantiatedBy, &mut out);
                rel_of(d_before, Some(s), BaseClassOf, &mut out);
                rel_of(d_before, Some(s), DerivedClassOf, &mut out);
                rel_of(d_after, Some(s), BaseClassOf, &mut out);
                rel_of(d_after, Some(s), DerivedClassOf, &mut out);
            }
            ChangeLabel::MCC => {
                let class = enclosing_class(s, d_before, repo);
                rel_of(d_before, class.as_ref(), InstantiatedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::MI => {
                rel_of(d_before, Some(s), ImportedBy, &mut out);
            }
            ChangeLabel::AM => {
                let class = enclosing_class(s, d_after, repo);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
                rel_of(d_after, Some(s), CalledBy, &mut out);
            }
            ChangeLabel::AF => {
                let class = enclosing_class(s, d_after, repo);
                rel_of(d_before, class.as_ref(), ConstructedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::AC | ChangeLabel::AI => {
                // Nil: a newly added class or import has no uses yet.
            }
            ChangeLabel::ACC => {
                let class = enclosing_class(s, d_after, repo);
                rel_of(d_before, class.as_ref(), InstantiatedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::DM => {
                rel_of(d_before, Some(s), CalledBy, &mut out);
                rel_of(d_before, Some(s), Overrides, &mut out);
                rel_of(d_before, Some(s), OverriddenBy, &mut out);
            }
            ChangeLabel::DF => {
                let class = enclosing_class(s, d_before, repo);
                rel_of(d_before, Some(s), UsedBy, &mut out);
                rel_of(d_before, class.as_ref(), ConstructedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::DC => {
                rel_of(d_before, Some(s), InstantiatedBy, &mut out);
                rel_of(d_before, Some(s), BaseClassOf, &mut out);
                rel_of(d_before, Some(s), DerivedClassOf, &mut out);
            }
            ChangeLabel::DCC => {
                let class = enclosing_class(s, d_before, repo);
                rel_of(d_before, class.as_ref(), InstantiatedBy, &mut out);
                rel_of(d_before, class.as_ref(), BaseClassOf, &mut out);
                rel_of(d_before, class.as_ref(), DerivedClassOf, &mut out);
            }
            ChangeLabel::DI => {
                rel_of(d_before, Some(s), ImportedBy, &mut out);
            }
        }
    }

    // Self-exclusion and liveness filtering.
    out.remove(&(subject.clone(), RelationLabel::CalledBy));
    let filtered: BTreeSet<AffectedPair> = out
        .into_iter()
        .filter(|(b, _)| {
            if b == subject {
                return false;
            }
            if repo.block(b).is_none() || d_after.is_tombstone(b) {
                warnings.push(ImpactWarning {
                    block: b.clone(),
                    message: "affected block is not part of the repository; dropped".to_string(),
                });
                return false;
            }
            true
        })
        .collect();

    (filtered, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::change::classify_changes;
    use crate::depgraph::{construct_dependency_graph, update_dependency_graph};
    use crate::syntax::{extract_fragment, merge_fragment};

    fn fig_repo() -> Repository {
        Repository::from_sources([
            (
                "create.py",
                "\
from complexlib import create_pair, create_complex

def func(a, b) -> Pair:
    c = create_pair(a, b)
    return c
",
            ),
            (
                "process.py",
                "\
from create import func
from display import show

def process(a, b, k):
    c = func(a, b)
    show(c.first)
    norm = c.first * c.first
    show(norm * k)
",
            ),
            (
                "complexlib.py",
                "\
class Pair:
    def __init__(self, first, second):
        self.first = first
        self.second = second

def create_pair(first, second):
    return Pair(first, second)

def create_complex(real, imag):
    return Pair(real, imag)
",
            ),
            ("display.py", "def show(value):\n    kept = value\n    return kept\n"),
        ])
    }

    fn id(repo: &Repository, qname: &str, kind: BlockKind) -> BlockId {
        repo.blocks()
            .find(|b| b.qualified_name == qname && b.kind == kind)
            .map(|b| b.id.clone())
            .unwrap()
    }

    #[test]
    fn mms_on_func_affects_caller_via_called_by() {
        let repo = fig_repo();
        let d = construct_dependency_graph(&repo);
        let func = id(&repo, "func", BlockKind::Method);
        let frag = extract_fragment(&repo, &func).unwrap();
        let edited = frag
            .sketch_text
            .replace("-> Pair", "-> Complex")
            .replace("create_pair(a, b)", "create_complex(a, b)");
        let merged = merge_fragment(&repo, &edited, &frag).unwrap();
        let changes = classify_changes(&merged.before_text, &merged.after_text, &func).unwrap();
        let d2 = update_dependency_graph(&d, &changes, &merged.repo).unwrap();
        let (affected, warnings) =
            get_affected_blocks(&changes, &func, &d, &d2, &merged.repo);
        let process = id(&repo, "process", BlockKind::Method);
        assert_eq!(affected, BTreeSet::from([(process, RelationLabel::CalledBy)]));
        assert!(warnings.is_empty());
    }

    #[test]
    fn added_class_with_no_uses_affects_nothing() {
        let repo = fig_repo();
        let d = construct_dependency_graph(&repo);
        let module = id(&repo, "display", BlockKind::Module);
        let frag = extract_fragment(&repo, &module).unwrap();
        let edited = format!("{}\nclass Fresh:\n    def noop(self):\n        return 0\n", frag.sketch_text);
        let merged = merge_fragment(&repo, &edited, &frag).unwrap();
        let changes = classify_changes(&merged.before_text, &merged.after_text, &module).unwrap();
        assert_eq!(changes.len(), 1);
        assert_eq!(changes[0].label, ChangeLabel::AC);
        let d2 = update_dependency_graph(&d, &changes, &merged.repo).unwrap();
        let (affected, _) = get_affected_blocks(&changes, &module, &d, &d2, &merged.repo);
        assert!(affected.is_empty());
    }

    #[test]
    fn added_field_affects_constructor_and_subclass() {
        let repo = Repository::from_sources([(
            "shop.py",
            "\
class Store:
    def __init__(self):
        self.open = 1

class Outlet(Store):
    def close(self):
        self.open = 0
",
        )]);
        let d = construct_dependency_graph(&repo);
        let class = id(&repo, "Store", BlockKind::Class);
        let frag = extract_fragment(&repo, &class).unwrap();
        let edited = frag.sketch_text.replace(
            "class Store:\n",
            "class Store:\n    stock: int\n",
        );
        let merged = merge_fragment(&repo, &edited, &frag).unwrap();
        let changes = classify_changes(&merged.before_text, &merged.after_text, &class).unwrap();
        assert_eq!(changes.iter().map(|c| c.label).collect::<Vec<_>>(), vec![ChangeLabel::AF]);
        let d2 = update_dependency_graph(&d, &changes, &merged.repo).unwrap();
        let (affected, _) = get_affected_blocks(&changes, &class, &d, &d2, &merged.repo);
        let ctor = id(&repo, "Store.__init__", BlockKind::Constructor);
        let outlet = id(&repo, "Outlet", BlockKind::Class);
        assert_eq!(
            affected,
            BTreeSet::from([
                (ctor, RelationLabel::ConstructedBy),
                (outlet, RelationLabel::DerivedClassOf),
            ])
        );
    }

    #[test]
    fn non_escaping_mmb_affects_nothing() {
        let repo = fig_repo();
        let d = construct_dependency_graph(&repo);
        let show = id(&repo, "show", BlockKind::Method);
        let frag = extract_fragment(&repo, &show).unwrap();
        let edited = frag.sketch_text.replace("kept = value", "kept = value * 1");
        let merged = merge_fragment(&repo, &edited, &frag).unwrap();
        let changes = classify_changes(&merged.before_text, &merged.after_text, &show).unwrap();
        assert_eq!(changes.len(), 1);
        assert_eq!(changes[0].label, ChangeLabel::MMB);
        assert_eq!(changes[0].escaping, Some(false));
        let d2 = update_dependency_graph(&d, &changes, &merged.repo).unwrap();
        let (affected, _) = get_affected_blocks(&changes, &show, &d, &d2, &merged.repo);
        assert!(affected.is_empty());
    }
}
