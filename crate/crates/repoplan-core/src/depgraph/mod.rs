//! Labeled dependency graph over code blocks with incremental maintenance.
//!
//! Fourteen relation labels in seven inverse pairs cover syntactic nesting,
//! constructor/class linkage, imports, inheritance, method overriding, calls,
//! instantiations and field uses. The graph stores the symmetric closure:
//! edge (a, l, b) is present iff (b, inverse(l), a) is present.
//!
//! Updates follow the per-label rules for atomic changes. During an in-flight
//! plan, relations keyed to renamed elements persist attached to the old
//! block (as forwarded tombstones) until the dependent block is itself
//! updated; [`DependencyGraph::reconcile`] settles all deferred resolution at
//! plan-iteration boundaries, after which the graph equals a from-scratch
//! reconstruction as an exact edge set.

pub mod resolve;

use crate::change::{rename_pairs, AtomicChange, ChangeLabel};
use crate::syntax::{BlockId, BlockKind, DeclInfo, Repository};
use resolve::{ResolutionWarning, Resolver, Target};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// The 14 relation labels (7 inverse pairs).
///
/// `rel(g, b, l)` returns the blocks standing in role `l` relative to `b`:
/// `rel(m, CalledBy)` is m's callers, `rel(c, DerivedClassOf)` is c's
/// subclasses, `rel(c, ConstructedBy)` is c's constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationLabel {
    ParentOf,
    ChildOf,
    Construct,
    ConstructedBy,
    Imports,
    ImportedBy,
    BaseClassOf,
    DerivedClassOf,
    Overrides,
    OverriddenBy,
    Calls,
    CalledBy,
    Instantiates,
    InstantiatedBy,
    Uses,
    UsedBy,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 16] = [
        RelationLabel::ParentOf,
        RelationLabel::ChildOf,
        RelationLabel::Construct,
        RelationLabel::ConstructedBy,
        RelationLabel::Imports,
        RelationLabel::ImportedBy,
        RelationLabel::BaseClassOf,
        RelationLabel::DerivedClassOf,
        RelationLabel::Overrides,
        RelationLabel::OverriddenBy,
        RelationLabel::Calls,
        RelationLabel::CalledBy,
        RelationLabel::Instantiates,
        RelationLabel::InstantiatedBy,
        RelationLabel::Uses,
        RelationLabel::UsedBy,
    ];

    pub fn inverse(self) -> RelationLabel {
        use RelationLabel::*;
        match self {
            ParentOf => ChildOf,
            ChildOf => ParentOf,
            Construct => ConstructedBy,
            ConstructedBy => Construct,
            Imports => ImportedBy,
            ImportedBy => Imports,
            BaseClassOf => DerivedClassOf,
            DerivedClassOf => BaseClassOf,
            Overrides => OverriddenBy,
            OverriddenBy => Overrides,
            Calls => CalledBy,
            CalledBy => Calls,
            Instantiates => InstantiatedBy,
            InstantiatedBy => Instantiates,
            Uses => UsedBy,
            UsedBy => Uses,
        }
    }

    /// Semantic labels derived from a carrier's body text.
    pub const CARRIER_OUT: [RelationLabel; 4] = [
        RelationLabel::Calls,
        RelationLabel::Uses,
        RelationLabel::Instantiates,
        RelationLabel::Imports,
    ];
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for RelationLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationLabel::ALL
            .iter()
            .find(|l| format!("{l:?}") == s)
            .copied()
            .ok_or_else(|| format!("unknown relation label `{s}`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct NodeState {
    tombstone: bool,
    forwarded_to: Option<BlockId>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("block not in graph: {0}")]
    NotFound(BlockId),
}

#[derive(Debug, thiserror::Error)]
pub enum UpdateError {
    #[error("classifier/graph desync: change references {0} which is absent from the graph")]
    Desync(BlockId),
}

pub type EdgeTriple = (BlockId, RelationLabel, BlockId);

/// The labeled dependency multigraph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DependencyGraph {
    nodes: BTreeMap<BlockId, NodeState>,
    adjacency: BTreeMap<BlockId, BTreeMap<RelationLabel, BTreeSet<BlockId>>>,
    warnings: BTreeMap<BlockId, Vec<ResolutionWarning>>,
    /// Carriers whose semantic edges are provisional until the next
    /// reconcile at a plan-iteration boundary.
    deferred: BTreeSet<BlockId>,
}

impl DependencyGraph {
    pub fn contains(&self, b: &BlockId) -> bool {
        self.nodes.contains_key(b)
    }

    pub fn is_tombstone(&self, b: &BlockId) -> bool {
        self.nodes.get(b).map(|s| s.tombstone).unwrap_or(false)
    }

    /// Follow rename forwarding to the current block for `b`, if any.
    pub fn forwarded(&self, b: &BlockId) -> BlockId {
        let mut cur = b.clone();
        let mut hops = 0;
        while let Some(next) = self.nodes.get(&cur).and_then(|s| s.forwarded_to.clone()) {
            if hops > 8 {
                break;
            }
            cur = next;
            hops += 1;
        }
        cur
    }

    /// Live (non-tombstone) node ids.
    pub fn node_set(&self) -> BTreeSet<BlockId> {
        self.nodes
            .iter()
            .filter(|(_, s)| !s.tombstone)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Full symmetric edge set.
    pub fn edge_set(&self) -> BTreeSet<EdgeTriple> {
        let mut out = BTreeSet::new();
        for (src, by_label) in &self.adjacency {
            for (label, peers) in by_label {
                for dst in peers {
                    out.insert((src.clone(), *label, dst.clone()));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().flat_map(|m| m.values()).map(|s| s.len()).sum::<usize>() / 2
    }

    /// Neighbors of `b` under `l`; empty when the block is unknown.
    pub fn neighbors(&self, b: &BlockId, l: RelationLabel) -> BTreeSet<BlockId> {
        self.adjacency
            .get(b)
            .and_then(|m| m.get(&l))
            .cloned()
            .unwrap_or_default()
    }

    /// The `rel` query: exactly the neighbors of `b` under label `l`.
    pub fn rel(&self, b: &BlockId, l: RelationLabel) -> Result<BTreeSet<BlockId>, GraphError> {
        if !self.contains(b) {
            return Err(GraphError::NotFound(b.clone()));
        }
        Ok(self.neighbors(b, l))
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ResolutionWarning> {
        self.warnings.values().flatten()
    }

    fn add_node(&mut self, id: BlockId) {
        self.nodes.entry(id).or_default();
    }

    fn add_pair(&mut self, a: &BlockId, l: RelationLabel, b: &BlockId) {
        self.add_node(a.clone());
        self.add_node(b.clone());
        self.adjacency
            .entry(a.clone())
            .or_default()
            .entry(l)
            .or_default()
            .insert(b.clone());
        self.adjacency
            .entry(b.clone())
            .or_default()
            .entry(l.inverse())
            .or_default()
            .insert(a.clone());
    }

    fn remove_pair(&mut self, a: &BlockId, l: RelationLabel, b: &BlockId) {
        if let Some(m) = self.adjacency.get_mut(a) {
            if let Some(s) = m.get_mut(&l) {
                s.remove(b);
                if s.is_empty() {
                    m.remove(&l);
                }
            }
        }
        if let Some(m) = self.adjacency.get_mut(b) {
            if let Some(s) = m.get_mut(&l.inverse()) {
                s.remove(a);
                if s.is_empty() {
                    m.remove(&l.inverse());
                }
            }
        }
    }

    /// All edges incident on `b` as (label-from-b, peer).
    fn incident(&self, b: &BlockId) -> Vec<(RelationLabel, BlockId)> {
        self.adjacency
            .get(b)
            .map(|m| {
                m.iter()
                    .flat_map(|(l, peers)| peers.iter().map(|p| (*l, p.clone())))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn remove_node(&mut self, b: &BlockId) {
        for (l, peer) in self.incident(b) {
            self.remove_pair(b, l, &peer);
        }
        self.adjacency.remove(b);
        self.nodes.remove(b);
        self.warnings.remove(b);
        self.deferred.remove(b);
    }

    fn defer(&mut self, b: &BlockId) {
        self.deferred.insert(b.clone());
    }

    pub fn deferred_carriers(&self) -> &BTreeSet<BlockId> {
        &self.deferred
    }

    /// Export as `{nodes:[...], edges:[{src,label,dst}...]}` using one
    /// canonical direction per inverse pair.
    pub fn to_json(&self) -> serde_json::Value {
        use RelationLabel::*;
        let canonical = [
            ParentOf, Construct, Imports, BaseClassOf, Overrides, Calls, Instantiates, Uses,
        ];
        let nodes: Vec<&BlockId> =
            self.nodes.iter().filter(|(_, s)| !s.tombstone).map(|(id, _)| id).collect();
        let mut edges = Vec::new();
        for (src, label, dst) in self.edge_set() {
            if canonical.contains(&label) {
                edges.push(serde_json::json!({ "src": src, "label": label, "dst": dst }));
            }
        }
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }

    /// Import the `to_json` format (test harness support).
    pub fn from_json(value: &serde_json::Value) -> Result<DependencyGraph, String> {
        let mut g = DependencyGraph::default();
        let nodes = value.get("nodes").and_then(|n| n.as_array()).ok_or("missing nodes")?;
        for n in nodes {
            let id: BlockId = serde_json::from_value(n.clone()).map_err(|e| e.to_string())?;
            g.add_node(id);
        }
        let edges = value.get("edges").and_then(|e| e.as_array()).ok_or("missing edges")?;
        for e in edges {
            let src: BlockId =
                serde_json::from_value(e.get("src").ok_or("missing src")?.clone())
                    .map_err(|e| e.to_string())?;
            let dst: BlockId =
                serde_json::from_value(e.get("dst").ok_or("missing dst")?.clone())
                    .map_err(|e| e.to_string())?;
            let label: RelationLabel = e
                .get("label")
                .and_then(|l| l.as_str())
                .ok_or("missing label")?
                .parse()?;
            g.add_pair(&src, label, &dst);
        }
        Ok(g)
    }
}

/// Kinds whose body text produces semantic out-edges.
fn is_carrier(repo: &Repository, id: &BlockId) -> bool {
    match id.kind {
        BlockKind::Method | BlockKind::Constructor => true,
        BlockKind::Statement => {
            // module-level statements only
            repo.block(id)
                .and_then(|b| b.parent.as_ref())
                .map(|p| p.kind == BlockKind::Module)
                .unwrap_or(false)
        }
        BlockKind::Field => match repo.decl(id) {
            Some(DeclInfo::Field(f)) => !f.from_constructor && f.value.is_some(),
            _ => false,
        },
        _ => false,
    }
}

/// Split a `lhs = rhs` line on a single top-level `=`. Used by typing.
pub(crate) fn split_assign_line(line: &str) -> Option<(&str, &str)> {
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
            b'#' => break,
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

/// Names assigned at the top level of a file (module "locals").
fn module_assigned_names(repo: &Repository, file: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let Some(f) = repo.file(file) else { return out };
    for line in f.text.lines() {
        if line.starts_with(' ') || line.starts_with('\t') {
            continue;
        }
        let t = line.trim_start();
        if t.starts_with("import ")
            || t.starts_with("from ")
            || t.starts_with("def ")
            || t.starts_with("class ")
        {
            continue;
        }
        if let Some((lhs, _)) = split_assign_line(line) {
            let lhs = lhs.trim();
            if !lhs.is_empty() && lhs.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                out.insert(lhs.to_string());
            }
        }
    }
    out
}

/// Derive the semantic out-edges of one carrier block.
fn carrier_edges(
    resolver: &Resolver<'_>,
    repo: &Repository,
    id: &BlockId,
) -> (Vec<(RelationLabel, BlockId)>, Vec<ResolutionWarning>) {
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    let Some(block) = repo.block(id) else { return (edges, warnings) };

    let enclosing_class = block
        .parent
        .as_ref()
        .filter(|p| p.kind == BlockKind::Class)
        .cloned();

    let (body_text, params): (String, Vec<crate::syntax::Param>) = match repo.decl(id) {
        Some(DeclInfo::Func(f)) => {
            let body = match block.text.find('\n') {
                Some(i) => block.text[i + 1..].to_string(),
                None => String::new(),
            };
            (body, f.params.clone())
        }
        Some(DeclInfo::Statement) => (block.text.clone(), Vec::new()),
        Some(DeclInfo::Field(f)) => (f.value.clone().unwrap_or_default(), Vec::new()),
        _ => return (edges, warnings),
    };

    let mut locals: BTreeSet<String> = params.iter().map(|p| p.name.clone()).collect();
    for r in crate::syntax::scan_refs(&body_text) {
        if r.is_assign_target && r.path.len() == 1 {
            locals.insert(r.path[0].clone());
        }
    }
    if id.kind == BlockKind::Statement {
        locals.extend(module_assigned_names(repo, &id.file));
    }
    let env = resolver.local_types(&id.file, &body_text, &params, enclosing_class.as_ref());

    for r in crate::syntax::scan_refs(&body_text) {
        let resolved = resolver.resolve_ref(&id.file, &r, &env, enclosing_class.as_ref(), &locals);
        if let Some(import) = &resolved.via_import {
            edges.push((RelationLabel::Imports, import.clone()));
        }
        match resolved.target {
            Target::Methods(candidates) => {
                if resolved.call.is_some() {
                    for m in candidates {
                        edges.push((RelationLabel::Calls, m));
                    }
                }
            }
            Target::Function(f) => {
                if resolved.call.is_some() {
                    edges.push((RelationLabel::Calls, f));
                }
            }
            Target::Class(c) => {
                if resolved.call.is_some() {
                    edges.push((RelationLabel::Instantiates, c));
                }
            }
            Target::Field(f) => edges.push((RelationLabel::Uses, f)),
            Target::Unresolved => {
                if resolved.call.is_some() || r.path.len() >= 2 {
                    warnings.push(ResolutionWarning {
                        block: id.clone(),
                        name: r.path.join("."),
                        message: format!("unresolved reference `{}`", r.path.join(".")),
                    });
                }
            }
            Target::UnknownMember(class) => {
                warnings.push(ResolutionWarning {
                    block: id.clone(),
                    name: r.path.join("."),
                    message: format!(
                        "`{}` does not resolve on class `{}`",
                        r.path.join("."),
                        class.qname
                    ),
                });
            }
            Target::External | Target::Builtin | Target::Local | Target::UntypedReceiver => {}
        }
    }
    edges.sort();
    edges.dedup();
    (edges, warnings)
}

/// Build the dependency graph of a repository from scratch.
pub fn construct_dependency_graph(repo: &Repository) -> DependencyGraph {
    let resolver = Resolver::new(repo);
    let mut g = DependencyGraph::default();

    for block in repo.blocks() {
        g.add_node(block.id.clone());
    }
    // Structural, constructor, inheritance and override families.
    rebuild_derived_families(&mut g, repo, &resolver);

    // Semantic carrier edges.
    let carriers: Vec<BlockId> = repo
        .blocks()
        .filter(|b| is_carrier(repo, &b.id))
        .map(|b| b.id.clone())
        .collect();
    for c in carriers {
        recompute_carrier(&mut g, &resolver, repo, &c);
    }
    g
}

/// Rebuild the repo-derived edge families wholesale: ParentOf/ChildOf,
/// Construct/ConstructedBy, BaseClassOf/DerivedClassOf, Overrides/OverriddenBy.
fn rebuild_derived_families(g: &mut DependencyGraph, repo: &Repository, resolver: &Resolver<'_>) {
    use RelationLabel::*;
    let derived = [
        ParentOf, ChildOf, Construct, ConstructedBy, BaseClassOf, DerivedClassOf, Overrides,
        OverriddenBy,
    ];
    let to_remove: Vec<EdgeTriple> = g
        .edge_set()
        .into_iter()
        .filter(|(_, l, _)| derived.contains(l))
        .collect();
    for (a, l, b) in to_remove {
        g.remove_pair(&a, l, &b);
    }

    for block in repo.blocks() {
        if let Some(parent) = &block.parent {
            if g.contains(parent) && g.contains(&block.id) {
                g.add_pair(parent, ParentOf, &block.id);
            }
        }
        if block.kind == BlockKind::Constructor {
            if let Some(class) = &block.parent {
                g.add_pair(&block.id, Construct, class);
            }
        }
    }
    for (class_id, info) in resolver.classes() {
        if let Some(base) = &info.base {
            g.add_pair(class_id, BaseClassOf, base);
        }
    }
    for (overriding, overridden) in resolver.override_pairs() {
        g.add_pair(&overriding, Overrides, &overridden);
    }
}

/// Remove and re-derive the semantic out-edges of one carrier.
fn recompute_carrier(
    g: &mut DependencyGraph,
    resolver: &Resolver<'_>,
    repo: &Repository,
    id: &BlockId,
) {
    for l in RelationLabel::CARRIER_OUT {
        for peer in g.neighbors(id, l) {
            g.remove_pair(id, l, &peer);
        }
    }
    g.warnings.remove(id);
    if !is_carrier(repo, id) || !repo.block(id).is_some() {
        return;
    }
    let (edges, warnings) = carrier_edges(resolver, repo, id);
    for (l, target) in edges {
        g.add_pair(id, l, &target);
    }
    if !warnings.is_empty() {
        g.warnings.insert(id.clone(), warnings);
    }
}

/// Add a block and its subtree (members, statements) with structural edges.
fn add_block_subtree(g: &mut DependencyGraph, repo: &Repository, id: &BlockId) {
    let Some(block) = repo.block(id) else { return };
    g.add_node(id.clone());
    if let Some(parent) = &block.parent {
        g.add_node(parent.clone());
        g.add_pair(parent, RelationLabel::ParentOf, id);
    }
    if block.kind == BlockKind::Constructor {
        if let Some(class) = &block.parent {
            g.add_pair(id, RelationLabel::Construct, class);
        }
    }
    for child in repo.children(id).into_iter().map(|c| c.id.clone()).collect::<Vec<_>>() {
        add_block_subtree(g, repo, &child);
    }
}

/// Block ids of the subtree rooted at `id` as currently known to the graph
/// (matched by qname prefix within the same file).
fn graph_subtree(g: &DependencyGraph, root: &BlockId) -> Vec<BlockId> {
    let method_prefix = format!("{}[", root.qname);
    let member_prefix = format!("{}.", root.qname);
    g.nodes
        .keys()
        .filter(|id| {
            id.file == root.file
                && (id.qname.starts_with(&method_prefix) || id.qname.starts_with(&member_prefix))
        })
        .cloned()
        .collect()
}

/// Drop the graph's statement children of `method` and re-add from the repo.
fn sync_statements(g: &mut DependencyGraph, repo: &Repository, method: &BlockId) {
    let prefix = format!("{}[", method.qname);
    let old: Vec<BlockId> = g
        .nodes
        .keys()
        .filter(|id| {
            id.kind == BlockKind::Statement
                && id.file == method.file
                && id.qname.starts_with(&prefix)
        })
        .cloned()
        .collect();
    for id in old {
        g.remove_node(&id);
    }
    if repo.block(method).is_some() {
        let children: Vec<BlockId> = repo
            .children(method)
            .into_iter()
            .filter(|c| c.kind == BlockKind::Statement)
            .map(|c| c.id.clone())
            .collect();
        for child in children {
            g.add_pair(method, RelationLabel::ParentOf, &child);
        }
    }
}

/// Re-derive one method's override edges against the current hierarchy.
fn resync_overrides_for(g: &mut DependencyGraph, resolver: &Resolver<'_>, method: &BlockId) {
    for l in [RelationLabel::Overrides, RelationLabel::OverriddenBy] {
        for peer in g.neighbors(method, l) {
            g.remove_pair(method, l, &peer);
        }
    }
    for (overriding, overridden) in resolver.override_pairs() {
        if &overriding == method || &overridden == method {
            g.add_pair(&overriding, RelationLabel::Overrides, &overridden);
        }
    }
}

/// Carriers of one file (methods, constructors, module statements, fields).
fn carriers_in_file(repo: &Repository, file: &str) -> Vec<BlockId> {
    repo.blocks_of_file(file)
        .filter(|b| is_carrier(repo, &b.id))
        .map(|b| b.id.clone())
        .collect()
}

/// Defer every carrier that currently records an unresolved reference; new
/// declarations may bind them.
fn defer_unresolved_carriers(g: &mut DependencyGraph) {
    let with_warnings: Vec<BlockId> = g.warnings.keys().cloned().collect();
    for c in with_warnings {
        g.defer(&c);
    }
}

/// Defer the methods of every class in `class`'s hierarchy family plus their
/// callers and the family's instantiators.
fn defer_family(g: &mut DependencyGraph, resolver: &Resolver<'_>, class: &BlockId) {
    for t in resolver.hierarchy_family(class) {
        if let Some(info) = resolver.class_info(&t) {
            let members: Vec<BlockId> =
                info.methods.values().cloned().chain(info.ctor.clone()).collect();
            for m in members {
                for caller in g.neighbors(&m, RelationLabel::CalledBy) {
                    g.defer(&caller);
                }
                g.defer(&m);
            }
        }
        for inst in g.neighbors(&t, RelationLabel::InstantiatedBy) {
            g.defer(&inst);
        }
    }
}

/// Tombstone `old`, preserving incoming dependence edges, optionally
/// forwarding to a renamed replacement.
fn tombstone(g: &mut DependencyGraph, old: &BlockId, forward: Option<BlockId>) {
    use RelationLabel::*;
    let keep = [CalledBy, UsedBy, InstantiatedBy, ImportedBy, OverriddenBy];
    for (l, peer) in g.incident(old) {
        if !keep.contains(&l) {
            g.remove_pair(old, l, &peer);
        } else {
            // the dependent will re-resolve at the boundary
            g.defer(&peer);
        }
    }
    if let Some(state) = g.nodes.get_mut(old) {
        state.tombstone = true;
        state.forwarded_to = forward;
    }
}

/// Apply the per-label dependency-graph update rules for one classified
/// merge. `repo` is the repository state after the merge.
pub fn update_dependency_graph(
    graph: &DependencyGraph,
    changes: &[AtomicChange],
    repo: &Repository,
) -> Result<DependencyGraph, UpdateError> {
    let mut g = graph.clone();
    let resolver = Resolver::new(repo);
    let renames = rename_pairs(changes);

    // Consistency: modification/deletion subjects must be known.
    for c in changes {
        if !c.label.is_addition() && !g.contains(&c.subject) {
            return Err(UpdateError::Desync(c.subject.clone()));
        }
    }

    let group = |label: ChangeLabel| -> u8 {
        use ChangeLabel::*;
        match label {
            AC => 0,
            AI => 1,
            ACC => 2,
            AM => 3,
            AF => 4,
            MC | MI | MMS | MMB | MF | MCC => 5,
            DC | DI | DM | DCC | DF => 6,
        }
    };
    let mut ordered: Vec<&AtomicChange> = changes.iter().collect();
    ordered.sort_by_key(|c| group(c.label));

    let any_binding_change = changes.iter().any(|c| !c.label.is_modification())
        || changes
            .iter()
            .any(|c| matches!(c.label, ChangeLabel::MC | ChangeLabel::MI | ChangeLabel::MF));

    for change in ordered {
        let b = &change.subject;
        match change.label {
            ChangeLabel::MMB => {
                sync_statements(&mut g, repo, b);
                recompute_carrier(&mut g, &resolver, repo, b);
            }
            ChangeLabel::MMS => {
                sync_statements(&mut g, repo, b);
                recompute_carrier(&mut g, &resolver, repo, b);
                resync_overrides_for(&mut g, &resolver, b);
                // Return-type changes can retype callers' locals.
                for caller in g.neighbors(b, RelationLabel::CalledBy) {
                    g.defer(&caller);
                }
            }
            ChangeLabel::MF => {
                for user in g.neighbors(b, RelationLabel::UsedBy) {
                    g.defer(&user);
                }
                recompute_carrier(&mut g, &resolver, repo, b);
            }
            ChangeLabel::MC => {
                let old_bases: Vec<BlockId> =
                    g.neighbors(b, RelationLabel::BaseClassOf).into_iter().collect();
                for base in &old_bases {
                    g.remove_pair(b, RelationLabel::BaseClassOf, base);
                }
                if let Some(info) = resolver.class_info(b) {
                    if let Some(new_base) = &info.base {
                        g.add_pair(b, RelationLabel::BaseClassOf, new_base);
                    }
                }
                defer_family(&mut g, &resolver, b);
                for base in &old_bases {
                    defer_family(&mut g, &resolver, base);
                }
            }
            ChangeLabel::MCC => {
                // No change (rules table): the constructor/class syntactic
                // relation is unaffected by a signature edit.
            }
            ChangeLabel::MI => {
                for user in g.neighbors(b, RelationLabel::ImportedBy) {
                    g.defer(&user);
                }
                for c in carriers_in_file(repo, &b.file) {
                    g.defer(&c);
                }
            }
            ChangeLabel::AM => {
                add_block_subtree(&mut g, repo, b);
                recompute_carrier(&mut g, &resolver, repo, b);
                resync_overrides_for(&mut g, &resolver, b);
                // Redirect dispatch: callers of same-named methods in the
                // hierarchy re-resolve against the new definition.
                if let Some(class) = repo.block(b).and_then(|blk| blk.parent.clone()) {
                    if class.kind == BlockKind::Class {
                        let name = b.qname.rsplit('.').next().unwrap_or(&b.qname).to_string();
                        let mut to_recompute = BTreeSet::new();
                        for t in resolver.hierarchy_family(&class) {
                            if let Some(info) = resolver.class_info(&t) {
                                if let Some(m) = info.methods.get(&name) {
                                    if m != b {
                                        to_recompute
                                            .extend(g.neighbors(m, RelationLabel::CalledBy));
                                    }
                                }
                            }
                        }
                        for caller in to_recompute {
                            recompute_carrier(&mut g, &resolver, repo, &caller);
                        }
                        defer_family(&mut g, &resolver, &class);
                    }
                }
            }
            ChangeLabel::AF => {
                add_block_subtree(&mut g, repo, b);
                recompute_carrier(&mut g, &resolver, repo, b);
                if let Some(class) = repo.block(b).and_then(|blk| blk.parent.clone()) {
                    if class.kind == BlockKind::Class {
                        defer_family(&mut g, &resolver, &class);
                    }
                }
            }
            ChangeLabel::AC => {
                add_block_subtree(&mut g, repo, b);
                if let Some(info) = resolver.class_info(b) {
                    if let Some(base) = &info.base {
                        g.add_pair(b, RelationLabel::BaseClassOf, base);
                    }
                }
                let members: Vec<BlockId> = repo
                    .children(b)
                    .into_iter()
                    .map(|c| c.id.clone())
                    .collect();
                for m in &members {
                    recompute_carrier(&mut g, &resolver, repo, m);
                    if m.kind == BlockKind::Method {
                        resync_overrides_for(&mut g, &resolver, m);
                    }
                }
                defer_family(&mut g, &resolver, b);
            }
            ChangeLabel::ACC => {
                add_block_subtree(&mut g, repo, b);
                recompute_carrier(&mut g, &resolver, repo, b);
            }
            ChangeLabel::AI => {
                add_block_subtree(&mut g, repo, b);
                for c in carriers_in_file(repo, &b.file) {
                    g.defer(&c);
                }
            }
            ChangeLabel::DM => {
                sync_statements(&mut g, repo, b);
                if let Some(new_id) = renames.get(b) {
                    tombstone(&mut g, b, Some(new_id.clone()));
                } else {
                    let callers: Vec<BlockId> =
                        g.neighbors(b, RelationLabel::CalledBy).into_iter().collect();
                    g.remove_node(b);
                    // Redirect: former callers re-resolve (possibly up the
                    // hierarchy to the base definition).
                    for caller in callers {
                        recompute_carrier(&mut g, &resolver, repo, &caller);
                    }
                }
            }
            ChangeLabel::DF => {
                let users: Vec<BlockId> =
                    g.neighbors(b, RelationLabel::UsedBy).into_iter().collect();
                g.remove_node(b);
                for u in users {
                    g.defer(&u);
                }
            }
            ChangeLabel::DC => {
                let subtree = graph_subtree(&g, b);
                if let Some(new_id) = renames.get(b) {
                    for member in &subtree {
                        let member_new = member.qname.replacen(&b.qname, &new_id.qname, 1);
                        let fwd = g
                            .nodes
                            .keys()
                            .find(|id| id.qname == member_new && id.kind == member.kind)
                            .cloned();
                        tombstone(&mut g, member, fwd);
                    }
                    tombstone(&mut g, b, Some(new_id.clone()));
                } else {
                    for peer in g.incident(b) {
                        g.defer(&peer.1);
                    }
                    for member in &subtree {
                        for peer in g.incident(member) {
                            g.defer(&peer.1);
                        }
                        g.remove_node(member);
                    }
                    g.remove_node(b);
                }
            }
            ChangeLabel::DCC => {
                sync_statements(&mut g, repo, b);
                let class = g.neighbors(b, RelationLabel::Construct).into_iter().next();
                g.remove_node(b);
                if let Some(class) = class {
                    // Rules table: instantiation edges via this constructor
                    // are dropped; the instantiators re-resolve later.
                    let insts: Vec<BlockId> =
                        g.neighbors(&class, RelationLabel::InstantiatedBy).into_iter().collect();
                    for i in insts {
                        g.remove_pair(&i, RelationLabel::Instantiates, &class);
                        g.defer(&i);
                    }
                }
            }
            ChangeLabel::DI => {
                let users: Vec<BlockId> =
                    g.neighbors(b, RelationLabel::ImportedBy).into_iter().collect();
                g.remove_node(b);
                for u in users {
                    g.defer(&u);
                }
                for c in carriers_in_file(repo, &b.file) {
                    g.defer(&c);
                }
            }
        }
    }

    if any_binding_change {
        defer_unresolved_carriers(&mut g);
    }

    Ok(g)
}

impl DependencyGraph {
    /// Settle all deferred resolution against the current repository. Called
    /// at plan-iteration boundaries; afterwards the graph equals
    /// [`construct_dependency_graph`] on `repo` as an exact edge set.
    pub fn reconcile(&mut self, repo: &Repository) {
        let resolver = Resolver::new(repo);

        // Purge tombstones; their dependents re-resolve below.
        let tombs: Vec<BlockId> = self
            .nodes
            .iter()
            .filter(|(_, s)| s.tombstone)
            .map(|(id, _)| id.clone())
            .collect();
        for t in tombs {
            for (_, peer) in self.incident(&t) {
                self.defer(&peer);
            }
            self.remove_node(&t);
        }

        // Node sync with the repository.
        let repo_ids: BTreeSet<BlockId> = repo.blocks().map(|b| b.id.clone()).collect();
        let graph_ids: Vec<BlockId> = self.nodes.keys().cloned().collect();
        for id in graph_ids {
            if !repo_ids.contains(&id) {
                for (_, peer) in self.incident(&id) {
                    self.defer(&peer);
                }
                self.remove_node(&id);
            }
        }
        for id in &repo_ids {
            if !self.contains(id) {
                self.add_node(id.clone());
                self.defer(id);
            }
        }

        rebuild_derived_families(self, repo, &resolver);

        let deferred: Vec<BlockId> = self.deferred.iter().cloned().collect();
        for c in deferred {
            recompute_carrier(self, &resolver, repo, &c);
        }
        self.deferred.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_repo() -> Repository {
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

class Complex:
    def __init__(self, real, imag):
        self.real = real
        self.imag = imag

def create_pair(first, second):
    return Pair(first, second)

def create_complex(real, imag):
    return Complex(real, imag)
",
            ),
            (
                "display.py",
                "\
def show(value):
    printed = value
    return printed
",
            ),
        ])
    }

    fn id(repo: &Repository, qname: &str, kind: BlockKind) -> BlockId {
        repo.blocks()
            .find(|b| b.qualified_name == qname && b.kind == kind)
            .map(|b| b.id.clone())
            .unwrap_or_else(|| panic!("no block {qname} of kind {kind}"))
    }

    #[test]
    fn every_label_has_a_unique_inverse() {
        for l in RelationLabel::ALL {
            assert_eq!(l.inverse().inverse(), l);
            assert_ne!(l.inverse(), l);
        }
    }

    #[test]
    fn caller_callee_edges_are_method_level() {
        let repo = fixture_repo();
        let g = construct_dependency_graph(&repo);
        let func = id(&repo, "func", BlockKind::Method);
        let process = id(&repo, "process", BlockKind::Method);
        let called_by = g.rel(&func, RelationLabel::CalledBy).unwrap();
        assert_eq!(called_by, BTreeSet::from([process.clone()]));
        let calls = g.rel(&process, RelationLabel::Calls).unwrap();
        assert!(calls.contains(&func));
    }

    #[test]
    fn symmetry_holds_for_every_edge() {
        let repo = fixture_repo();
        let g = construct_dependency_graph(&repo);
        for (a, l, b) in g.edge_set() {
            assert!(
                g.neighbors(&b, l.inverse()).contains(&a),
                "missing inverse of ({a}, {l}, {b})"
            );
        }
    }

    #[test]
    fn empty_class_has_only_structural_edges() {
        let repo = Repository::from_sources([("m.py", "class Empty:\n    pass\n")]);
        let g = construct_dependency_graph(&repo);
        let class = id(&repo, "Empty", BlockKind::Class);
        let module = id(&repo, "m", BlockKind::Module);
        assert_eq!(
            g.rel(&class, RelationLabel::ChildOf).unwrap(),
            BTreeSet::from([module])
        );
        let semantic: Vec<EdgeTriple> = g
            .edge_set()
            .into_iter()
            .filter(|(_, l, _)| !matches!(l, RelationLabel::ParentOf | RelationLabel::ChildOf))
            .collect();
        assert!(semantic.is_empty(), "unexpected edges: {semantic:?}");
    }

    #[test]
    fn override_edges_from_hierarchy() {
        let repo = Repository::from_sources([(
            "shapes.py",
            "\
class Shape:
    def area(self, scale):
        return scale

class Circle(Shape):
    def area(self, scale):
        return scale * 3
",
        )]);
        let g = construct_dependency_graph(&repo);
        let base = id(&repo, "Shape.area", BlockKind::Method);
        let derived = id(&repo, "Circle.area", BlockKind::Method);
        assert_eq!(
            g.rel(&derived, RelationLabel::Overrides).unwrap(),
            BTreeSet::from([base.clone()])
        );
        assert_eq!(
            g.rel(&base, RelationLabel::OverriddenBy).unwrap(),
            BTreeSet::from([derived])
        );
        // rel(C, DerivedClassOf) = subclasses
        let shape = id(&repo, "Shape", BlockKind::Class);
        let circle = id(&repo, "Circle", BlockKind::Class);
        assert_eq!(
            g.rel(&shape, RelationLabel::DerivedClassOf).unwrap(),
            BTreeSet::from([circle.clone()])
        );
        assert_eq!(
            g.rel(&circle, RelationLabel::BaseClassOf).unwrap(),
            BTreeSet::from([shape])
        );
    }

    #[test]
    fn constructor_and_instantiation_edges() {
        let repo = fixture_repo();
        let g = construct_dependency_graph(&repo);
        let pair_class = id(&repo, "Pair", BlockKind::Class);
        let pair_ctor = id(&repo, "Pair.__init__", BlockKind::Constructor);
        let create_pair = id(&repo, "create_pair", BlockKind::Method);
        assert_eq!(
            g.rel(&pair_class, RelationLabel::ConstructedBy).unwrap(),
            BTreeSet::from([pair_ctor])
        );
        assert!(g
            .rel(&pair_class, RelationLabel::InstantiatedBy)
            .unwrap()
            .contains(&create_pair));
    }

    #[test]
    fn rel_on_unknown_block_errors() {
        let repo = fixture_repo();
        let g = construct_dependency_graph(&repo);
        let ghost = BlockId::new("nowhere.py", "ghost", BlockKind::Method);
        assert!(matches!(g.rel(&ghost, RelationLabel::Calls), Err(GraphError::NotFound(_))));
    }

    #[test]
    fn graph_json_round_trips() {
        let repo = fixture_repo();
        let g = construct_dependency_graph(&repo);
        let json = g.to_json();
        let g2 = DependencyGraph::from_json(&json).unwrap();
        assert_eq!(g.edge_set(), g2.edge_set());
        assert_eq!(g.node_set(), g2.node_set());
    }

    #[test]
    fn field_use_edges_respect_receiver_typing() {
        let repo = Repository::from_sources([(
            "app.py",
            "\
class Box:
    def __init__(self, size):
        self.size = size

def inspect(b: Box):
    shown = b.size
    return shown
",
        )]);
        let g = construct_dependency_graph(&repo);
        let field = id(&repo, "Box.size", BlockKind::Field);
        let inspect = id(&repo, "inspect", BlockKind::Method);
        let ctor = id(&repo, "Box.__init__", BlockKind::Constructor);
        // The constructor initializes the field, so it is a user too.
        assert_eq!(
            g.rel(&field, RelationLabel::UsedBy).unwrap(),
            BTreeSet::from([ctor, inspect])
        );
    }
}
