//! The plan graph: a DAG of edit obligations with cause-labeled edges.
//!
//! Pending obligations are scheduled FIFO by enqueue order. A block whose
//! obligation completed and which is affected again later gets a fresh
//! generation of its node, bounded by a per-block generation cap. Edges that
//! would close a cycle are recorded but excluded from temporal-path
//! traversal.

use crate::depgraph::RelationLabel;
use crate::syntax::{BlockId, BlockKind, Repository};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Selector for a block in seed files: file + qualified name (+ kind).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSelector {
    pub file: String,
    pub block: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<BlockKind>,
}

impl BlockSelector {
    /// Resolve to exactly one live block.
    pub fn resolve(&self, repo: &Repository) -> Result<BlockId, PlanError> {
        let matches: Vec<BlockId> = repo
            .blocks_of_file(&self.file)
            .filter(|b| b.qualified_name == self.block)
            .filter(|b| self.kind.map(|k| b.kind == k).unwrap_or(true))
            .map(|b| b.id.clone())
            .collect();
        match matches.len() {
            1 => Ok(matches.into_iter().next().unwrap()),
            0 => Err(PlanError::UnresolvableSelector(format!(
                "{}::{} matches no block",
                self.file, self.block
            ))),
            n => Err(PlanError::UnresolvableSelector(format!(
                "{}::{} matches {n} blocks; add a kind",
                self.file, self.block
            ))),
        }
    }
}

/// An initial (block, instruction) pair supplied by the task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSpecification {
    #[serde(flatten)]
    pub selector: BlockSelector,
    #[serde(default)]
    pub instruction: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObligationStatus {
    Pending,
    Completed,
    Failed,
}

/// One edit obligation: a block, an instruction and a status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub block: BlockId,
    pub generation: u32,
    pub instruction: String,
    pub status: ObligationStatus,
    pub seq: u64,
    /// Region text before/after the merge, recorded on completion of an
    /// obligation that produced changes; feeds temporal context.
    pub before_text: Option<String>,
    pub after_text: Option<String>,
}

/// Node identity: block plus generation.
pub type NodeKey = (BlockId, u32);

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("unresolvable seed selector: {0}")]
    UnresolvableSelector(String),
    #[error("generation cap ({0}) reached for block {1}")]
    GenerationCap(u32, BlockId),
}

/// Directed acyclic graph of obligations with cause-labeled edges.
#[derive(Debug, Clone, Default)]
pub struct PlanGraph {
    nodes: BTreeMap<NodeKey, Obligation>,
    /// cause edges: source (earlier edit) -> target (consequent obligation)
    edges: BTreeSet<(NodeKey, NodeKey, RelationLabel)>,
    /// Edges that would have closed a cycle; kept out of traversal.
    deferred_edges: Vec<(NodeKey, NodeKey, RelationLabel)>,
    next_seq: u64,
    generation_cap: u32,
}

impl PlanGraph {
    pub fn new(generation_cap: u32) -> Self {
        PlanGraph { generation_cap: generation_cap.max(1), ..Default::default() }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeKey, &Obligation)> {
        self.nodes.iter()
    }

    pub fn node(&self, key: &NodeKey) -> Option<&Obligation> {
        self.nodes.get(key)
    }

    pub fn edges(&self) -> impl Iterator<Item = &(NodeKey, NodeKey, RelationLabel)> {
        self.edges.iter()
    }

    pub fn deferred_edges(&self) -> &[(NodeKey, NodeKey, RelationLabel)] {
        &self.deferred_edges
    }

    pub fn pending_count(&self) -> usize {
        self.nodes.values().filter(|o| o.status == ObligationStatus::Pending).count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Latest generation node for a block.
    fn latest(&self, block: &BlockId) -> Option<NodeKey> {
        self.nodes
            .keys()
            .filter(|(b, _)| b == block)
            .max_by_key(|(_, g)| *g)
            .cloned()
    }

    /// Add root obligations for the seed specifications. Duplicate seeds on
    /// one block merge into a single node with concatenated instructions.
    pub fn initialize(&mut self, seeds: &[(BlockId, String)]) -> Result<Vec<NodeKey>, PlanError> {
        let mut keys = Vec::new();
        for (block, instruction) in seeds {
            let key = self.select_or_add(block)?;
            let ob = self.nodes.get_mut(&key).expect("node just selected");
            if ob.instruction.is_empty() {
                ob.instruction = instruction.clone();
            } else if !instruction.is_empty() && ob.status == ObligationStatus::Pending {
                ob.instruction.push('\n');
                ob.instruction.push_str(instruction);
            }
            keys.push(key);
        }
        Ok(keys)
    }

    /// Reuse the pending node for `block`, or create a fresh generation when
    /// the latest one is already discharged.
    pub fn select_or_add(&mut self, block: &BlockId) -> Result<NodeKey, PlanError> {
        if let Some(key) = self.latest(block) {
            let ob = &self.nodes[&key];
            if ob.status == ObligationStatus::Pending {
                return Ok(key);
            }
            let next_gen = key.1 + 1;
            if next_gen >= self.generation_cap {
                return Err(PlanError::GenerationCap(self.generation_cap, block.clone()));
            }
            let new_key = (block.clone(), next_gen);
            self.insert_node(new_key.clone());
            return Ok(new_key);
        }
        let key = (block.clone(), 0);
        self.insert_node(key.clone());
        Ok(key)
    }

    fn insert_node(&mut self, key: NodeKey) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.nodes.insert(
            key.clone(),
            Obligation {
                block: key.0,
                generation: key.1,
                instruction: String::new(),
                status: ObligationStatus::Pending,
                seq,
                before_text: None,
                after_text: None,
            },
        );
    }

    /// FIFO: the pending obligation with the smallest enqueue number.
    pub fn next_pending(&self) -> Option<NodeKey> {
        self.nodes
            .iter()
            .filter(|(_, o)| o.status == ObligationStatus::Pending)
            .min_by_key(|(_, o)| o.seq)
            .map(|(k, _)| k.clone())
    }

    /// True if `target` is reachable from `start` along cause edges.
    fn reaches(&self, start: &NodeKey, target: &NodeKey) -> bool {
        let mut stack = vec![start.clone()];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if &cur == target {
                return true;
            }
            if !seen.insert(cur.clone()) {
                continue;
            }
            for (src, dst, _) in &self.edges {
                if src == &cur {
                    stack.push(dst.clone());
                }
            }
        }
        false
    }

    /// Add a cause edge; an edge that would close a cycle is recorded as
    /// deferred and excluded from path traversal. Returns true when the edge
    /// entered the traversal graph.
    pub fn add_edge(&mut self, from: NodeKey, to: NodeKey, cause: RelationLabel) -> bool {
        if from == to || self.reaches(&to, &from) {
            self.deferred_edges.push((from, to, cause));
            return false;
        }
        self.edges.insert((from, to, cause));
        true
    }

    /// Completion is idempotent; failed obligations stay failed.
    pub fn mark_completed(&mut self, key: &NodeKey) {
        if let Some(o) = self.nodes.get_mut(key) {
            if o.status == ObligationStatus::Pending {
                o.status = ObligationStatus::Completed;
            }
        }
    }

    pub fn mark_failed(&mut self, key: &NodeKey) {
        if let Some(o) = self.nodes.get_mut(key) {
            if o.status == ObligationStatus::Pending {
                o.status = ObligationStatus::Failed;
            }
        }
    }

    pub fn record_edit(&mut self, key: &NodeKey, before: String, after: String) {
        if let Some(o) = self.nodes.get_mut(key) {
            o.before_text = Some(before);
            o.after_text = Some(after);
        }
    }

    /// Direct cause edges into `key`: (source node, relation).
    pub fn incoming(&self, key: &NodeKey) -> Vec<(NodeKey, RelationLabel)> {
        self.edges
            .iter()
            .filter(|(_, dst, _)| dst == key)
            .map(|(src, _, l)| (src.clone(), *l))
            .collect()
    }

    /// Transitive ancestors of `key` along traversal edges, deduplicated,
    /// earliest enqueue first.
    pub fn ancestors(&self, key: &NodeKey) -> Vec<NodeKey> {
        let mut seen: BTreeSet<NodeKey> = BTreeSet::new();
        let mut stack: Vec<NodeKey> = self.incoming(key).into_iter().map(|(s, _)| s).collect();
        while let Some(cur) = stack.pop() {
            if seen.insert(cur.clone()) {
                stack.extend(self.incoming(&cur).into_iter().map(|(s, _)| s));
            }
        }
        let mut out: Vec<NodeKey> = seen.into_iter().collect();
        out.sort_by_key(|k| self.nodes.get(k).map(|o| o.seq).unwrap_or(u64::MAX));
        out
    }

    /// The traversal edge set is acyclic by construction; verify.
    pub fn is_acyclic(&self) -> bool {
        // Kahn over traversal edges
        let mut indeg: BTreeMap<&NodeKey, usize> = BTreeMap::new();
        for k in self.nodes.keys() {
            indeg.insert(k, 0);
        }
        for (_, dst, _) in &self.edges {
            *indeg.entry(dst).or_insert(0) += 1;
        }
        let mut queue: Vec<&NodeKey> =
            indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut visited = 0usize;
        while let Some(k) = queue.pop() {
            visited += 1;
            for (src, dst, _) in &self.edges {
                if src == k {
                    let d = indeg.get_mut(dst).expect("node known");
                    *d -= 1;
                    if *d == 0 {
                        queue.push(dst);
                    }
                }
            }
        }
        visited == self.nodes.len()
    }
}
