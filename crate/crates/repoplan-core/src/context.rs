//! Context assembly: spatial context from the dependency graph, temporal
//! context from plan-graph ancestry, and the final prompt.

use crate::depgraph::{DependencyGraph, RelationLabel};
use crate::plan::{NodeKey, PlanGraph};
use crate::syntax::{extract_fragment, BlockId, Fragment, Repository};
use serde::{Deserialize, Serialize};

/// Knobs for context assembly and the RQ-style ablations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextConfig {
    pub include_temporal: bool,
    pub include_spatial: bool,
    /// Cap on spatial entries, applied in relation-priority order.
    pub max_spatial_entries: usize,
    /// Total prompt budget in characters; truncation drops lowest-priority
    /// spatial entries first, then oldest temporal edits, never the code to
    /// be changed.
    pub max_prompt_chars: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            include_temporal: true,
            include_spatial: true,
            max_spatial_entries: 8,
            max_prompt_chars: 24_000,
        }
    }
}

/// One spatial-context entry: a graph-adjacent block and its sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialEntry {
    pub block: BlockId,
    pub relation: RelationLabel,
    pub sketch: String,
}

/// One temporal-context entry: an ancestor edit's before/after pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalEntry {
    pub block: BlockId,
    pub before: String,
    pub after: String,
}

/// Temporal context: ancestor edits in enqueue order plus one cause sentence
/// per direct incoming plan edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemporalContext {
    pub edits: Vec<TemporalEntry>,
    pub causes: Vec<String>,
}

/// Relation priority for spatial context: callees first, then used fields,
/// instantiated classes, override counterparts, imports.
const SPATIAL_PRIORITY: [RelationLabel; 6] = [
    RelationLabel::Calls,
    RelationLabel::Uses,
    RelationLabel::Instantiates,
    RelationLabel::Overrides,
    RelationLabel::OverriddenBy,
    RelationLabel::Imports,
];

/// Sketches of the blocks graph-adjacent to `subject`, capped at
/// `max_spatial_entries` in priority order. Renamed neighbors are followed
/// through tombstone forwarding so the current definition is sketched.
pub fn gather_spatial_context(
    subject: &BlockId,
    repo: &Repository,
    graph: &DependencyGraph,
    config: &ContextConfig,
) -> Vec<SpatialEntry> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for relation in SPATIAL_PRIORITY {
        for neighbor in graph.neighbors(subject, relation) {
            if out.len() >= config.max_spatial_entries {
                return out;
            }
            let live = graph.forwarded(&neighbor);
            if &live == subject || !seen.insert(live.clone()) {
                continue;
            }
            let Ok(fragment) = extract_fragment(repo, &live) else { continue };
            out.push(SpatialEntry { block: live, relation, sketch: fragment.sketch_text });
        }
    }
    out
}

/// Before/after pairs of every plan-graph ancestor of `key` (deduplicated,
/// earliest enqueue first) plus one cause sentence per incoming edge.
pub fn gather_temporal_context(plan: &PlanGraph, key: &NodeKey) -> TemporalContext {
    let mut edits = Vec::new();
    for anc in plan.ancestors(key) {
        if let Some(ob) = plan.node(&anc) {
            if let (Some(before), Some(after)) = (&ob.before_text, &ob.after_text) {
                edits.push(TemporalEntry {
                    block: ob.block.clone(),
                    before: before.clone(),
                    after: after.clone(),
                });
            }
        }
    }
    let causes = plan
        .incoming(key)
        .into_iter()
        .map(|(src, relation)| cause_sentence(&key.0, &src.0, relation))
        .collect();
    TemporalContext { edits, causes }
}

/// "X is related to Y by REL" — X is the block to be edited, Y the earlier
/// changed block.
pub fn cause_sentence(subject: &BlockId, earlier: &BlockId, relation: RelationLabel) -> String {
    format!("{} is related to {} by {}", subject.qname, earlier.qname, relation)
}

const P1_HEADER: &str = "Task Instructions:";
const P2_HEADER: &str =
    "Earlier Code Changes (Temporal Context): These are edits that have been made in the code-base previously -";
const P3_HEADER: &str = "Causes for Change: The change is required due to -";
const P4_HEADER: &str = "Related Code (Spatial Context): The following code maybe related -";
const P5_HEADER: &str = "Code to be Changed Next: The existing code is given below -";
const CLOSING: &str = "Edit the \"Code to be Changed Next\" and produce \"Changed Code\" below. \
Edit the \"Code to be Changed Next\" according to the \"Task Instructions\" to make it consistent \
with the \"Earlier Code Changes\", \"Causes for Change\" and \"Related Code\".\n\
If no changes are needed, output \"No changes.\"";

fn render(
    instruction: &str,
    temporal: &TemporalContext,
    spatial: &[SpatialEntry],
    config: &ContextConfig,
    fragment: &Fragment,
) -> String {
    let mut p = String::new();
    p.push_str(P1_HEADER);
    p.push_str(" Your task is to ");
    if instruction.trim().is_empty() {
        p.push_str("keep the repository consistent with the changes made so far.");
    } else {
        p.push_str(instruction.trim());
    }
    p.push_str("\n\n");

    if config.include_temporal {
        p.push_str(P2_HEADER);
        p.push('\n');
        if temporal.edits.is_empty() {
            p.push_str("(none)\n");
        } else {
            for (i, e) in temporal.edits.iter().enumerate() {
                p.push_str(&format!(
                    "Edit {}:\nBefore:\n{}\nAfter:\n{}\n",
                    i + 1,
                    e.before,
                    e.after
                ));
            }
        }
        p.push('\n');
        p.push_str(P3_HEADER);
        p.push('\n');
        if temporal.causes.is_empty() {
            p.push_str("(none)\n");
        } else {
            for c in &temporal.causes {
                p.push_str(c);
                p.push('\n');
            }
        }
        p.push('\n');
    }

    if config.include_spatial {
        p.push_str(P4_HEADER);
        p.push('\n');
        if spatial.is_empty() {
            p.push_str("(none)\n");
        } else {
            for s in spatial {
                p.push_str(&s.sketch);
                p.push('\n');
            }
        }
        p.push('\n');
    }

    p.push_str(P5_HEADER);
    p.push('\n');
    p.push_str(&fragment.sketch_text);
    p.push_str("\n\n");
    p.push_str(CLOSING);
    p
}

/// Assemble the prompt: p1 task instructions, p2 earlier code changes, p3
/// causes, p4 related code, p5 code to be changed, then the fixed closing
/// edit instruction. The ablation flags drop p2/p3 or p4 entirely.
pub fn make_prompt(
    fragment: &Fragment,
    instruction: &str,
    spatial: &[SpatialEntry],
    temporal: &TemporalContext,
    config: &ContextConfig,
) -> String {
    let mut spatial_kept: Vec<SpatialEntry> = spatial.to_vec();
    let mut temporal_kept = temporal.clone();
    let mut prompt = render(instruction, &temporal_kept, &spatial_kept, config, fragment);
    // Budget: drop lowest-priority spatial entries first, then oldest
    // temporal edits. p5 is never dropped.
    while prompt.len() > config.max_prompt_chars {
        if !spatial_kept.is_empty() {
            spatial_kept.pop();
        } else if !temporal_kept.edits.is_empty() {
            temporal_kept.edits.remove(0);
        } else {
            break;
        }
        prompt = render(instruction, &temporal_kept, &spatial_kept, config, fragment);
    }
    prompt
}
