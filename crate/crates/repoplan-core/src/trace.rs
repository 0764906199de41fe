//! Append-only run trace. Serialized as JSON lines, one record per event;
//! prompts are kept alongside for verbatim per-step logging. Records carry
//! no timestamps so identical runs produce byte-identical traces.

use crate::change::ChangeLabel;
use crate::depgraph::RelationLabel;
use crate::syntax::BlockId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseRef {
    pub block: BlockId,
    pub relation: RelationLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Step {
        step: usize,
        iteration: u32,
        block: BlockId,
        generation: u32,
        causes: Vec<CauseRef>,
        prompt_hash: String,
        editor_backend: String,
        change_labels: Vec<ChangeLabel>,
        affected: Vec<CauseRef>,
        status: String,
    },
    MergeRejected {
        step: usize,
        block: BlockId,
        reason: String,
        attempt: u32,
    },
    IterationEnd {
        iteration: u32,
        oracle_pass: bool,
        diagnostics: usize,
    },
    RoundEnd {
        round: u32,
        oracle_pass: bool,
        diagnostics: usize,
    },
    GenerationCapReached {
        block: BlockId,
        cap: u32,
    },
    BudgetExhausted {
        limit: usize,
    },
    DeferredCycleEdge {
        from: BlockId,
        to: BlockId,
        cause: RelationLabel,
    },
    Warning {
        message: String,
    },
}

/// Append-only log of one run plus the verbatim prompts per step.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    records: Vec<TraceRecord>,
    prompts: Vec<(usize, String)>,
}

impl RunTrace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn push_prompt(&mut self, step: usize, prompt: String) {
        self.prompts.push((step, prompt));
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn prompts(&self) -> &[(usize, String)] {
        &self.prompts
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn steps(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| matches!(r, TraceRecord::Step { .. }))
    }

    pub fn has_generation_cap_event(&self) -> bool {
        self.records.iter().any(|r| matches!(r, TraceRecord::GenerationCapReached { .. }))
    }

    pub fn has_budget_event(&self) -> bool {
        self.records.iter().any(|r| matches!(r, TraceRecord::BudgetExhausted { .. }))
    }
}

pub fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
