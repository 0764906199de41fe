//! Shared helpers for the integration suites: a single-edit harness over
//! in-memory repositories and the hand-derived golden expectations for every
//! atomic-change label of the rules table.

#![allow(dead_code)]

use repoplan_core::change::{classify_changes, AtomicChange, ChangeLabel};
use repoplan_core::depgraph::{
    construct_dependency_graph, update_dependency_graph, DependencyGraph, EdgeTriple,
    RelationLabel,
};
use repoplan_core::impact::get_affected_blocks;
use repoplan_core::syntax::{extract_fragment, merge_fragment, BlockId, BlockKind, Repository};
use std::collections::BTreeSet;

pub fn repo(files: &[(&str, &str)]) -> Repository {
    Repository::from_sources(files.iter().map(|(p, t)| (p.to_string(), t.to_string())))
}

pub fn block(repo: &Repository, qname: &str, kind: BlockKind) -> BlockId {
    repo.blocks()
        .find(|b| b.qualified_name == qname && b.kind == kind)
        .map(|b| b.id.clone())
        .unwrap_or_else(|| panic!("no block {qname} ({kind})"))
}

/// Outcome of one classified edit applied through the real merge path.
pub struct EditOutcome {
    pub repo_before: Repository,
    pub repo_after: Repository,
    pub graph_before: DependencyGraph,
    pub graph_after: DependencyGraph,
    pub changes: Vec<AtomicChange>,
    pub affected: BTreeSet<(BlockId, RelationLabel)>,
}

impl EditOutcome {
    pub fn added_edges(&self) -> BTreeSet<EdgeTriple> {
        self.graph_after
            .edge_set()
            .difference(&self.graph_before.edge_set())
            .cloned()
            .collect()
    }

    pub fn removed_edges(&self) -> BTreeSet<EdgeTriple> {
        self.graph_before
            .edge_set()
            .difference(&self.graph_after.edge_set())
            .cloned()
            .collect()
    }

    pub fn labels(&self) -> Vec<ChangeLabel> {
        self.changes.iter().map(|c| c.label).collect()
    }
}

/// Apply one edit to `subject`'s sketch and run classify/update/impact.
pub fn apply_edit(
    source: &Repository,
    subject: &BlockId,
    edit: impl Fn(&str) -> String,
) -> EditOutcome {
    let graph_before = construct_dependency_graph(source);
    let fragment = extract_fragment(source, subject).expect("extract");
    let edited = edit(&fragment.sketch_text);
    let merged = merge_fragment(source, &edited, &fragment).expect("merge");
    let changes =
        classify_changes(&merged.before_text, &merged.after_text, subject).expect("classify");
    let graph_after =
        update_dependency_graph(&graph_before, &changes, &merged.repo).expect("update");
    let (affected, _warnings) =
        get_affected_blocks(&changes, subject, &graph_before, &graph_after, &merged.repo);
    EditOutcome {
        repo_before: source.clone(),
        repo_after: merged.repo,
        graph_before,
        graph_after,
        changes,
        affected,
    }
}

/// Both stored directions of one relation pair.
pub fn pair(a: &BlockId, l: RelationLabel, b: &BlockId) -> BTreeSet<EdgeTriple> {
    BTreeSet::from([(a.clone(), l, b.clone()), (b.clone(), l.inverse(), a.clone())])
}

pub fn pairs(list: &[(&BlockId, RelationLabel, &BlockId)]) -> BTreeSet<EdgeTriple> {
    let mut out = BTreeSet::new();
    for (a, l, b) in list {
        out.extend(pair(a, *l, b));
    }
    out
}

pub fn affected_set(list: &[(&BlockId, RelationLabel)]) -> BTreeSet<(BlockId, RelationLabel)> {
    list.iter().map(|(b, l)| ((*b).clone(), *l)).collect()
}

// ---------------------------------------------------------------------------
// Golden checks, one per atomic-change label. Each asserts the classified
// labels, the exact dependency-graph update delta, and the affected-block
// set, all hand-derived from the rules table.
// ---------------------------------------------------------------------------

pub fn check_label(label: ChangeLabel) -> Result<(), String> {
    let run = std::panic::catch_unwind(|| match label {
        ChangeLabel::MMB => golden_mmb(),
        ChangeLabel::MMS => golden_mms(),
        ChangeLabel::MF => golden_mf(),
        ChangeLabel::MC => golden_mc(),
        ChangeLabel::MCC => golden_mcc(),
        ChangeLabel::MI => golden_mi(),
        ChangeLabel::AM => golden_am(),
        ChangeLabel::AF => golden_af(),
        ChangeLabel::AC => golden_ac(),
        ChangeLabel::ACC => golden_acc(),
        ChangeLabel::AI => golden_ai(),
        ChangeLabel::DM => golden_dm(),
        ChangeLabel::DF => golden_df(),
        ChangeLabel::DC => golden_dc(),
        ChangeLabel::DCC => golden_dcc(),
        ChangeLabel::DI => golden_di(),
    });
    run.map_err(|e| {
        e.downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "golden check panicked".to_string())
    })
}

pub fn golden_mmb() {
    let source = repo(&[(
        "m.py",
        "\
def helper_one(x):
    return x

def helper_two(x):
    return x

def callee(x):
    out = helper_one(x)
    return out

def caller(y):
    r = callee(y)
    return r
",
    )]);
    let callee = block(&source, "callee", BlockKind::Method);
    let caller = block(&source, "caller", BlockKind::Method);
    let h1 = block(&source, "helper_one", BlockKind::Method);
    let h2 = block(&source, "helper_two", BlockKind::Method);

    let out = apply_edit(&source, &callee, |s| s.replace("helper_one(x)", "helper_two(x)"));
    assert_eq!(out.labels(), vec![ChangeLabel::MMB]);
    assert_eq!(out.changes[0].escaping, Some(true), "global name in delta escapes");
    // Update rule: recompute edges incident on the body statements.
    assert_eq!(out.added_edges(), pairs(&[(&callee, RelationLabel::Calls, &h2)]));
    assert_eq!(out.removed_edges(), pairs(&[(&callee, RelationLabel::Calls, &h1)]));
    // Impact: escaping => Rel(D, M, CalledBy)
    assert_eq!(out.affected, affected_set(&[(&caller, RelationLabel::CalledBy)]));

    // Non-escaping branch: a delta confined to locals impacts nothing.
    let source2 = repo(&[(
        "m.py",
        "\
def quiet(x):
    tmp = x
    kept = tmp
    return kept

def watcher(y):
    r = quiet(y)
    return r
",
    )]);
    let quiet = block(&source2, "quiet", BlockKind::Method);
    let out2 = apply_edit(&source2, &quiet, |s| {
        s.replace("tmp = x", "tmp2 = x").replace("kept = tmp", "kept = tmp2")
    });
    assert_eq!(out2.labels(), vec![ChangeLabel::MMB]);
    assert_eq!(out2.changes[0].escaping, Some(false));
    assert!(out2.affected.is_empty(), "non-escaping MMB must impact nothing");
    assert!(out2.added_edges().is_empty());
    assert!(out2.removed_edges().is_empty());
}

pub fn golden_mms() {
    let source = repo(&[(
        "m.py",
        "\
def callee(x):
    kept = x
    return kept

def caller(y):
    r = callee(y)
    return r
",
    )]);
    let callee = block(&source, "callee", BlockKind::Method);
    let caller = block(&source, "caller", BlockKind::Method);
    let out = apply_edit(&source, &callee, |s| {
        s.replace("def callee(x):", "def callee(x, flag):")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::MMS]);
    // Update rule: recompute edges incident on the method; the incoming
    // caller edge derives from the (unedited) caller and is preserved.
    assert!(out.added_edges().is_empty(), "added: {:?}", out.added_edges());
    assert!(out.removed_edges().is_empty(), "removed: {:?}", out.removed_edges());
    assert!(out
        .graph_after
        .neighbors(&callee, RelationLabel::CalledBy)
        .contains(&caller));
    // Impact: CalledBy + override clauses over D and D' (none here).
    assert_eq!(out.affected, affected_set(&[(&caller, RelationLabel::CalledBy)]));
}

pub fn golden_mf() {
    let source = repo(&[(
        "m.py",
        "\
class Box:
    size: int

    def __init__(self, size):
        self.volume = size

    def read(self):
        return self.size

class Crate(Box):
    def read_twice(self):
        return self.size

def use(b: Box):
    s = b.size
    return s
",
    )]);
    let field = block(&source, "Box.size", BlockKind::Field);
    let ctor = block(&source, "Box.__init__", BlockKind::Constructor);
    let read = block(&source, "Box.read", BlockKind::Method);
    let read_twice = block(&source, "Crate.read_twice", BlockKind::Method);
    let use_fn = block(&source, "use", BlockKind::Method);
    let crate_class = block(&source, "Crate", BlockKind::Class);
    let box_class = block(&source, "Box", BlockKind::Class);

    let out = apply_edit(&source, &field, |s| s.replace("size: int", "size: float"));
    assert_eq!(out.labels(), vec![ChangeLabel::MF]);
    // Update rule: recompute edges incident on the field — the UsedBy edges
    // derive from unedited users, so the delta is empty.
    assert!(out.added_edges().is_empty());
    assert!(out.removed_edges().is_empty());
    // Impact: UsedBy + ConstructedBy(C) + BaseClassOf(C) + DerivedClassOf(C).
    assert_eq!(
        out.affected,
        affected_set(&[
            (&read, RelationLabel::UsedBy),
            (&read_twice, RelationLabel::UsedBy),
            (&use_fn, RelationLabel::UsedBy),
            (&ctor, RelationLabel::ConstructedBy),
            (&crate_class, RelationLabel::DerivedClassOf),
        ])
    );
    let _ = box_class;
}

pub fn golden_mc() {
    let source = repo(&[(
        "m.py",
        "\
class BaseA:
    def ping(self):
        return 1

class BaseB:
    def ping(self):
        return 2

class Kid(BaseA):
    def kid_only(self):
        return 3

def spawn():
    k = Kid()
    return k
",
    )]);
    let kid = block(&source, "Kid", BlockKind::Class);
    let base_a = block(&source, "BaseA", BlockKind::Class);
    let base_b = block(&source, "BaseB", BlockKind::Class);
    let spawn = block(&source, "spawn", BlockKind::Method);

    let out = apply_edit(&source, &kid, |s| s.replace("class Kid(BaseA):", "class Kid(BaseB):"));
    assert_eq!(out.labels(), vec![ChangeLabel::MC]);
    // Update rule: recompute the edges incident on the class.
    assert_eq!(out.added_edges(), pairs(&[(&kid, RelationLabel::BaseClassOf, &base_b)]));
    assert_eq!(out.removed_edges(), pairs(&[(&kid, RelationLabel::BaseClassOf, &base_a)]));
    // Impact: InstantiatedBy + Base/Derived over D and over D'.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&spawn, RelationLabel::InstantiatedBy),
            (&base_a, RelationLabel::BaseClassOf),
            (&base_b, RelationLabel::BaseClassOf),
        ])
    );
}

pub fn golden_mcc() {
    let source = repo(&[(
        "m.py",
        "\
class Gadget:
    def __init__(self, power):
        self.power = power

class SuperGadget(Gadget):
    def boost(self):
        return self.power

def build():
    g = Gadget(1)
    return g
",
    )]);
    let ctor = block(&source, "Gadget.__init__", BlockKind::Constructor);
    let build = block(&source, "build", BlockKind::Method);
    let sub = block(&source, "SuperGadget", BlockKind::Class);

    let out = apply_edit(&source, &ctor, |s| {
        s.replace("def __init__(self, power):", "def __init__(self, power, mode):")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::MCC]);
    // Update rule: "No change."
    assert!(out.added_edges().is_empty());
    assert!(out.removed_edges().is_empty());
    // Impact: InstantiatedBy + Base/Derived over D.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&build, RelationLabel::InstantiatedBy),
            (&sub, RelationLabel::DerivedClassOf),
        ])
    );
}

pub fn golden_mi() {
    let source = repo(&[
        (
            "m.py",
            "\
import helpers

def go(x):
    y = helpers.fix(x)
    return y
",
        ),
        ("helpers.py", "def fix(x):\n    return x\n"),
    ]);
    let imp = block(&source, "helpers", BlockKind::Import);
    let go = block(&source, "go", BlockKind::Method);

    let out = apply_edit(&source, &imp, |s| s.replace("import helpers", "import helpers as h"));
    assert_eq!(out.labels(), vec![ChangeLabel::MI]);
    // Mid-plan the ImportedBy relationship is maintained; the user is
    // re-resolved at the next boundary.
    assert!(out.added_edges().is_empty());
    assert!(out.removed_edges().is_empty());
    assert!(out.graph_after.neighbors(&imp, RelationLabel::ImportedBy).contains(&go));
    // Impact: Rel(D, I, ImportedBy).
    assert_eq!(out.affected, affected_set(&[(&go, RelationLabel::ImportedBy)]));
}

pub fn golden_am() {
    let source = repo(&[(
        "m.py",
        "\
class Base:
    def act(self):
        return 0

class Derived(Base):
    def idle(self):
        return 9

def drive(d: Derived):
    r = d.act()
    return r
",
    )]);
    let base = block(&source, "Base", BlockKind::Class);
    let base_act = block(&source, "Base.act", BlockKind::Method);
    let derived = block(&source, "Derived", BlockKind::Class);
    let drive = block(&source, "drive", BlockKind::Method);

    let out = apply_edit(&source, &derived, |s| {
        s.replace(
            "class Derived(Base):\n",
            "class Derived(Base):\n    def act(self):\n        return 1\n\n",
        )
    });
    assert_eq!(out.labels(), vec![ChangeLabel::AM]);
    let derived_act = block(&out.repo_after, "Derived.act", BlockKind::Method);
    // Update rule: add node and edges; redirect the Calls/CalledBy edges from
    // B.M to C.M for receivers of type C.
    let mut expected_added = pairs(&[
        (&derived, RelationLabel::ParentOf, &derived_act),
        (&derived_act, RelationLabel::Overrides, &base_act),
        (&drive, RelationLabel::Calls, &derived_act),
    ]);
    assert_eq!(out.added_edges(), expected_added);
    assert_eq!(out.removed_edges(), pairs(&[(&drive, RelationLabel::Calls, &base_act)]));
    // Impact: Base/Derived of C over D plus Rel(D', M, CalledBy).
    assert_eq!(
        out.affected,
        affected_set(&[
            (&base, RelationLabel::BaseClassOf),
            (&drive, RelationLabel::CalledBy),
        ])
    );
    expected_added.clear();
}

pub fn golden_af() {
    let source = repo(&[(
        "m.py",
        "\
class Store:
    def __init__(self):
        self.open = 1

class Outlet(Store):
    def close(self):
        self.open = 0
",
    )]);
    let store = block(&source, "Store", BlockKind::Class);
    let ctor = block(&source, "Store.__init__", BlockKind::Constructor);
    let outlet = block(&source, "Outlet", BlockKind::Class);

    let out = apply_edit(&source, &store, |s| {
        s.replace("class Store:\n", "class Store:\n    stock: int\n")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::AF]);
    let stock = block(&out.repo_after, "Store.stock", BlockKind::Field);
    // Update rule: add node and edges by analyzing the field declaration.
    assert_eq!(out.added_edges(), pairs(&[(&store, RelationLabel::ParentOf, &stock)]));
    assert!(out.removed_edges().is_empty());
    // Impact: ConstructedBy + Base/Derived over D.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&ctor, RelationLabel::ConstructedBy),
            (&outlet, RelationLabel::DerivedClassOf),
        ])
    );
}

pub fn golden_ac() {
    let source = repo(&[("m.py", "def anchor(x):\n    return x\n")]);
    let module = block(&source, "m", BlockKind::Module);

    let out = apply_edit(&source, &module, |s| {
        format!("{s}\nclass Fresh:\n    def greet(self):\n        return 1\n")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::AC]);
    let fresh = block(&out.repo_after, "Fresh", BlockKind::Class);
    let greet = block(&out.repo_after, "Fresh.greet", BlockKind::Method);
    // Update rule: add new node and edges by analyzing the class declaration.
    assert_eq!(
        out.added_edges(),
        pairs(&[
            (&module, RelationLabel::ParentOf, &fresh),
            (&fresh, RelationLabel::ParentOf, &greet),
        ])
    );
    assert!(out.removed_edges().is_empty());
    // Impact: Nil.
    assert!(out.affected.is_empty());
}

pub fn golden_acc() {
    let source = repo(&[(
        "m.py",
        "\
class Tool:
    def use_it(self):
        return 1

class PowerTool(Tool):
    def boost(self):
        return 2

def grab():
    t = Tool()
    return t
",
    )]);
    let tool = block(&source, "Tool", BlockKind::Class);
    let grab = block(&source, "grab", BlockKind::Method);
    let power = block(&source, "PowerTool", BlockKind::Class);

    let out = apply_edit(&source, &tool, |s| {
        s.replace(
            "class Tool:\n",
            "class Tool:\n    def __init__(self):\n        noted = 0\n\n",
        )
    });
    assert_eq!(out.labels(), vec![ChangeLabel::ACC]);
    let ctor = block(&out.repo_after, "Tool.__init__", BlockKind::Constructor);
    // Update rule: add node and edges by analyzing the constructor.
    assert_eq!(
        out.added_edges(),
        pairs(&[
            (&tool, RelationLabel::ParentOf, &ctor),
            (&ctor, RelationLabel::Construct, &tool),
        ])
    );
    assert!(out.removed_edges().is_empty());
    // Impact: InstantiatedBy + Base/Derived over D.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&grab, RelationLabel::InstantiatedBy),
            (&power, RelationLabel::DerivedClassOf),
        ])
    );
}

pub fn golden_ai() {
    let source = repo(&[
        ("m.py", "def anchor(x):\n    return x\n"),
        ("extras.py", "def bonus():\n    return 1\n"),
    ]);
    let module = block(&source, "m", BlockKind::Module);

    let out = apply_edit(&source, &module, |s| format!("import extras\n\n{s}"));
    assert_eq!(out.labels(), vec![ChangeLabel::AI]);
    let imp = block(&out.repo_after, "extras", BlockKind::Import);
    // Update rule: add node and edges by analyzing the import statement.
    assert_eq!(out.added_edges(), pairs(&[(&module, RelationLabel::ParentOf, &imp)]));
    assert!(out.removed_edges().is_empty());
    // Impact: Nil.
    assert!(out.affected.is_empty());
}

pub fn golden_dm() {
    let source = repo(&[(
        "m.py",
        "\
class Base:
    def act(self):
        return 0

class Derived(Base):
    def act(self):
        return 1

def drive(d: Derived):
    r = d.act()
    return r
",
    )]);
    let base_act = block(&source, "Base.act", BlockKind::Method);
    let derived = block(&source, "Derived", BlockKind::Class);
    let derived_act = block(&source, "Derived.act", BlockKind::Method);
    let drive = block(&source, "drive", BlockKind::Method);

    let out = apply_edit(&source, &derived, |s| {
        s.replace("class Derived(Base):\n    def act(self):\n        # <<folded:0>>", "class Derived(Base):\n    pass")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::DM]);
    // Update rule: remove the node and edges incident on it; redirect the
    // Calls/CalledBy edges from C.M back to B.M for receivers of type C.
    assert_eq!(out.added_edges(), pairs(&[(&drive, RelationLabel::Calls, &base_act)]));
    assert_eq!(
        out.removed_edges(),
        pairs(&[
            (&derived, RelationLabel::ParentOf, &derived_act),
            (&derived_act, RelationLabel::Overrides, &base_act),
            (&drive, RelationLabel::Calls, &derived_act),
        ])
    );
    // Impact over D: CalledBy + Overrides + OverriddenBy.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&drive, RelationLabel::CalledBy),
            (&base_act, RelationLabel::Overrides),
        ])
    );
}

pub fn golden_df() {
    let source = repo(&[(
        "m.py",
        "\
class Box:
    size: int

    def read(self):
        return self.size

def use(b: Box):
    s = b.size
    return s
",
    )]);
    let box_class = block(&source, "Box", BlockKind::Class);
    let field = block(&source, "Box.size", BlockKind::Field);
    let read = block(&source, "Box.read", BlockKind::Method);
    let use_fn = block(&source, "use", BlockKind::Method);

    let out = apply_edit(&source, &box_class, |s| s.replace("    size: int\n\n", ""));
    assert_eq!(out.labels(), vec![ChangeLabel::DF]);
    // Update rule: remove the node of the field and edges incident on it.
    assert!(out.added_edges().is_empty());
    assert_eq!(
        out.removed_edges(),
        pairs(&[
            (&box_class, RelationLabel::ParentOf, &field),
            (&read, RelationLabel::Uses, &field),
            (&use_fn, RelationLabel::Uses, &field),
        ])
    );
    // Impact over D: UsedBy + ConstructedBy + Base/Derived.
    assert_eq!(
        out.affected,
        affected_set(&[
            (&read, RelationLabel::UsedBy),
            (&use_fn, RelationLabel::UsedBy),
        ])
    );
}

pub fn golden_dc() {
    let source = repo(&[(
        "m.py",
        "\
class Gone:
    def gone_method(self):
        return 1

def maker():
    g = Gone()
    return g

def bystander():
    return 2
",
    )]);
    let module = block(&source, "m", BlockKind::Module);
    let gone = block(&source, "Gone", BlockKind::Class);
    let gone_method = block(&source, "Gone.gone_method", BlockKind::Method);
    let maker = block(&source, "maker", BlockKind::Method);

    let out = apply_edit(&source, &module, |s| {
        s.replace("class Gone:\n    def gone_method(self):\n        return 1\n\n", "")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::DC]);
    // Update rule: remove the node of the class (and its subtree) and edges
    // incident on it.
    assert!(out.added_edges().is_empty());
    assert_eq!(
        out.removed_edges(),
        pairs(&[
            (&module, RelationLabel::ParentOf, &gone),
            (&gone, RelationLabel::ParentOf, &gone_method),
            (&maker, RelationLabel::Instantiates, &gone),
        ])
    );
    // Impact over D: InstantiatedBy + Base/Derived.
    assert_eq!(out.affected, affected_set(&[(&maker, RelationLabel::InstantiatedBy)]));
}

pub fn golden_dcc() {
    let source = repo(&[(
        "m.py",
        "\
class Widget:
    def __init__(self):
        seeded = 0

    def spin(self):
        return 1

def forge():
    w = Widget()
    return w
",
    )]);
    let widget = block(&source, "Widget", BlockKind::Class);
    let ctor = block(&source, "Widget.__init__", BlockKind::Constructor);
    let forge = block(&source, "forge", BlockKind::Method);

    let out = apply_edit(&source, &widget, |s| {
        s.replace("    def __init__(self):\n        # <<folded:0>>\n\n", "")
    });
    assert_eq!(out.labels(), vec![ChangeLabel::DCC]);
    // Update rule: remove the constructor and the instantiation edges on the
    // class that went through it.
    assert!(out.added_edges().is_empty());
    assert_eq!(
        out.removed_edges(),
        pairs(&[
            (&widget, RelationLabel::ParentOf, &ctor),
            (&ctor, RelationLabel::Construct, &widget),
            (&forge, RelationLabel::Instantiates, &widget),
        ])
    );
    // Impact over D: InstantiatedBy + Base/Derived.
    assert_eq!(out.affected, affected_set(&[(&forge, RelationLabel::InstantiatedBy)]));
}

pub fn golden_di() {
    let source = repo(&[
        (
            "m.py",
            "\
import helpers

def go(x):
    y = helpers.fix(x)
    return y
",
        ),
        ("helpers.py", "def fix(x):\n    return x\n"),
    ]);
    let module = block(&source, "m", BlockKind::Module);
    let imp = block(&source, "helpers", BlockKind::Import);
    let go = block(&source, "go", BlockKind::Method);
    let fix = block(&source, "fix", BlockKind::Method);

    let out = apply_edit(&source, &module, |s| s.replace("import helpers\n\n", ""));
    assert_eq!(out.labels(), vec![ChangeLabel::DI]);
    // Update rule: remove the import node and edges incident on it. The
    // user's call edge is not incident on the import; it survives until the
    // boundary reconcile re-resolves the now-unbound name.
    assert!(out.added_edges().is_empty());
    assert_eq!(
        out.removed_edges(),
        pairs(&[
            (&module, RelationLabel::ParentOf, &imp),
            (&go, RelationLabel::Imports, &imp),
        ])
    );
    assert!(out.graph_after.neighbors(&go, RelationLabel::Calls).contains(&fix));
    // Impact over D: ImportedBy.
    assert_eq!(out.affected, affected_set(&[(&go, RelationLabel::ImportedBy)]));
}
