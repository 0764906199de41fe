//! The adaptive planning engine: executes pending obligations one at a time
//! (extract fragment, gather context, prompt the edit backend, merge and
//! classify, update the dependency graph, extend the plan with affected
//! blocks), alternating with oracle runs whose diagnostics seed the next
//! iteration.

use crate::change::classify_changes;
use crate::context::{
    gather_spatial_context, gather_temporal_context, make_prompt, ContextConfig, TemporalContext,
};
use crate::depgraph::{construct_dependency_graph, update_dependency_graph, DependencyGraph};
use crate::editors::{EditBackend, EditRequest, EditResponse};
use crate::impact::get_affected_blocks;
use crate::oracle::{diagnostics_to_seeds, Oracle, OracleError, OracleVerdict};
use crate::plan::{EditSpecification, NodeKey, ObligationStatus, PlanError, PlanGraph};
use crate::syntax::{extract_fragment, merge_fragment, MergeError, Repository};
use crate::trace::{sha256_hex, CauseRef, RunTrace, TraceRecord};
use serde::{Deserialize, Serialize};

/// Budget knobs for a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Outer oracle/plan iterations.
    pub max_iterations: u32,
    /// Node budget = factor x initial block count.
    pub node_budget_factor: usize,
    /// Generations allowed per block before refusing re-activation.
    pub generation_cap: u32,
    /// Merge/editor retries per obligation.
    pub merge_retries: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_iterations: 3,
            node_budget_factor: 10,
            generation_cap: 3,
            merge_retries: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub context: ContextConfig,
    /// Task-level instruction rendered into p1 for every obligation.
    #[serde(default)]
    pub task_instruction: String,
}

/// Result of a full run.
#[derive(Debug)]
pub struct RunOutcome {
    pub repo: Repository,
    pub graph: DependencyGraph,
    pub plan: PlanGraph,
    pub trace: RunTrace,
    pub iterations: u32,
    /// Last oracle verdict, when the oracle ran at least once.
    pub verdict: Option<OracleVerdict>,
    /// True iff the final oracle run passed.
    pub validated: bool,
    pub budget_exhausted: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("dependency graph desync: {0}")]
    GraphDesync(String),
    #[error("classification failed: {0}")]
    Classify(String),
}

/// Resolve seed specifications against the repository.
pub fn resolve_seeds(
    repo: &Repository,
    seeds: &[EditSpecification],
) -> Result<Vec<(crate::syntax::BlockId, String)>, PlanError> {
    seeds
        .iter()
        .map(|s| Ok((s.selector.resolve(repo)?, s.instruction.clone())))
        .collect()
}

struct Session<'a> {
    repo: Repository,
    graph: DependencyGraph,
    plan: PlanGraph,
    trace: RunTrace,
    editor: &'a mut dyn EditBackend,
    config: &'a EngineConfig,
    step: usize,
    node_budget: usize,
    executed: usize,
    budget_exhausted: bool,
}

impl<'a> Session<'a> {
    fn instruction_for(&self, key: &NodeKey) -> String {
        let ob_instruction = self
            .plan
            .node(key)
            .map(|o| o.instruction.clone())
            .unwrap_or_default();
        let task = self.config.task_instruction.trim();
        match (task.is_empty(), ob_instruction.trim().is_empty()) {
            (true, true) => String::new(),
            (true, false) => ob_instruction,
            (false, true) => task.to_string(),
            (false, false) => format!("{task}\n{ob_instruction}"),
        }
    }

    /// Run pending obligations to exhaustion (or budget). Returns early with
    /// the budget flag set when the node budget is hit.
    fn plan_and_execute(&mut self, iteration: u32) -> Result<(), EngineError> {
        while let Some(key) = self.plan.next_pending() {
            if self.executed >= self.node_budget {
                self.trace.push(TraceRecord::BudgetExhausted { limit: self.node_budget });
                self.budget_exhausted = true;
                // leave remaining obligations pending; partial results carry
                return Ok(());
            }
            self.executed += 1;
            self.step += 1;
            let step = self.step;
            let block = key.0.clone();
            let causes: Vec<CauseRef> = self
                .plan
                .incoming(&key)
                .into_iter()
                .map(|(src, relation)| CauseRef { block: src.0, relation })
                .collect();

            // First step: extract the fragment of code.
            let fragment = match extract_fragment(&self.repo, &block) {
                Ok(f) => f,
                Err(_) => {
                    // The block disappeared through an earlier edit.
                    self.plan.mark_failed(&key);
                    self.trace.push(TraceRecord::Step {
                        step,
                        iteration,
                        block,
                        generation: key.1,
                        causes,
                        prompt_hash: String::new(),
                        editor_backend: self.editor.name().to_string(),
                        change_labels: vec![],
                        affected: vec![],
                        status: "stale_block".into(),
                    });
                    continue;
                }
            };

            // Second step: gather the context of the edit.
            let spatial = if self.config.context.include_spatial {
                gather_spatial_context(&block, &self.repo, &self.graph, &self.config.context)
            } else {
                Vec::new()
            };
            let temporal = if self.config.context.include_temporal {
                gather_temporal_context(&self.plan, &key)
            } else {
                TemporalContext::default()
            };

            // Third step: construct the prompt and invoke the backend.
            let instruction = self.instruction_for(&key);
            let prompt =
                make_prompt(&fragment, &instruction, &spatial, &temporal, &self.config.context);
            let prompt_hash = sha256_hex(&prompt);
            self.trace.push_prompt(step, prompt.clone());

            let request = EditRequest {
                prompt,
                subject: block.clone(),
                sketch: fragment.sketch_text.clone(),
                subject_text: fragment.subject_text.clone(),
                step,
            };

            let status;
            let mut change_labels = Vec::new();
            let mut affected_refs = Vec::new();

            let mut attempt = 0u32;
            loop {
                let response = match self.editor.edit(&request) {
                    Ok(r) => r,
                    Err(e) => {
                        if attempt < self.config.budgets.merge_retries {
                            attempt += 1;
                            continue;
                        }
                        self.plan.mark_failed(&key);
                        status = format!("editor_failed: {e}");
                        break;
                    }
                };
                match response {
                    EditResponse::NoChanges => {
                        // Completed without classification or propagation.
                        self.plan.mark_completed(&key);
                        status = "no_changes".into();
                        break;
                    }
                    EditResponse::NewText(new_text) => {
                        // Fourth step: merge the edit back into the repository.
                        match merge_fragment(&self.repo, &new_text, &fragment) {
                            Err(MergeError::Rejected(reason) | MergeError::Stale(reason)) => {
                                self.trace.push(TraceRecord::MergeRejected {
                                    step,
                                    block: block.clone(),
                                    reason,
                                    attempt,
                                });
                                if attempt < self.config.budgets.merge_retries {
                                    attempt += 1;
                                    continue;
                                }
                                self.plan.mark_failed(&key);
                                status = "merge_rejected".into();
                                break;
                            }
                            Ok(outcome) => {
                                let changes = classify_changes(
                                    &outcome.before_text,
                                    &outcome.after_text,
                                    &block,
                                )
                                .map_err(|e| EngineError::Classify(e.to_string()))?;
                                if changes.is_empty() {
                                    self.repo = outcome.repo;
                                    self.plan.mark_completed(&key);
                                    status = "completed_no_classified_changes".into();
                                    break;
                                }
                                let new_graph = update_dependency_graph(
                                    &self.graph,
                                    &changes,
                                    &outcome.repo,
                                )
                                .map_err(|e| EngineError::GraphDesync(e.to_string()))?;
                                // Fifth step: impact analysis extends the plan.
                                let (affected, warnings) = get_affected_blocks(
                                    &changes,
                                    &block,
                                    &self.graph,
                                    &new_graph,
                                    &outcome.repo,
                                );
                                for w in warnings {
                                    self.trace.push(TraceRecord::Warning { message: w.message });
                                }
                                self.repo = outcome.repo;
                                self.graph = new_graph;
                                self.plan.record_edit(
                                    &key,
                                    outcome.before_text.clone(),
                                    outcome.after_text.clone(),
                                );
                                self.plan.mark_completed(&key);
                                change_labels = changes.iter().map(|c| c.label).collect();
                                for (affected_block, relation) in affected {
                                    affected_refs.push(CauseRef {
                                        block: affected_block.clone(),
                                        relation,
                                    });
                                    match self.plan.select_or_add(&affected_block) {
                                        Ok(target_key) => {
                                            if !self.plan.add_edge(
                                                key.clone(),
                                                target_key.clone(),
                                                relation,
                                            ) {
                                                self.trace.push(TraceRecord::DeferredCycleEdge {
                                                    from: key.0.clone(),
                                                    to: target_key.0.clone(),
                                                    cause: relation,
                                                });
                                            }
                                        }
                                        Err(PlanError::GenerationCap(cap, b)) => {
                                            self.trace.push(TraceRecord::GenerationCapReached {
                                                block: b,
                                                cap,
                                            });
                                        }
                                        Err(e) => return Err(e.into()),
                                    }
                                }
                                status = "completed".into();
                                break;
                            }
                        }
                    }
                }
            }

            self.trace.push(TraceRecord::Step {
                step,
                iteration,
                block,
                generation: key.1,
                causes,
                prompt_hash,
                editor_backend: self.editor.name().to_string(),
                change_labels,
                affected: affected_refs,
                status,
            });
        }
        Ok(())
    }
}

/// Execute the full plan/oracle loop: seed obligations are planned and
/// executed, the oracle validates the result, and its diagnostics become the
/// seeds of the next iteration until the oracle passes or the iteration
/// budget is exhausted.
pub fn run_plan(
    repo: Repository,
    seeds: &[EditSpecification],
    oracle: &dyn Oracle,
    editor: &mut dyn EditBackend,
    config: &EngineConfig,
) -> Result<RunOutcome, EngineError> {
    let graph = construct_dependency_graph(&repo);
    let node_budget = (repo.block_count() * config.budgets.node_budget_factor).max(16);
    let mut session = Session {
        repo,
        graph,
        plan: PlanGraph::new(config.budgets.generation_cap),
        trace: RunTrace::default(),
        editor,
        config,
        step: 0,
        node_budget,
        executed: 0,
        budget_exhausted: false,
    };

    let mut seeds = resolve_seeds(&session.repo, seeds)?;
    let mut iterations = 0u32;
    let mut verdict: Option<OracleVerdict> = None;
    let mut validated = false;

    while !seeds.is_empty() && iterations < config.budgets.max_iterations {
        iterations += 1;
        // Seed one at a time so a generation-capped block skips with a trace
        // event instead of aborting the run.
        for (block, instruction) in &seeds {
            match session.plan.initialize(std::slice::from_ref(&(block.clone(), instruction.clone()))) {
                Ok(_) => {}
                Err(PlanError::GenerationCap(cap, b)) => {
                    session.trace.push(TraceRecord::GenerationCapReached { block: b, cap });
                }
                Err(e) => return Err(e.into()),
            }
        }
        session.plan_and_execute(iterations)?;
        // Plan-iteration boundary: settle deferred graph resolution.
        session.graph.reconcile(&session.repo);
        let v = oracle.check(&session.repo)?;
        session.trace.push(TraceRecord::IterationEnd {
            iteration: iterations,
            oracle_pass: v.pass,
            diagnostics: v.diagnostics.len(),
        });
        if v.pass {
            validated = true;
            verdict = Some(v);
            seeds.clear();
        } else {
            seeds = diagnostics_to_seeds(&v, &session.repo)
                .into_iter()
                .collect();
            verdict = Some(v);
        }
        if session.budget_exhausted {
            break;
        }
    }

    Ok(RunOutcome {
        repo: session.repo,
        graph: session.graph,
        plan: session.plan,
        trace: session.trace,
        iterations,
        verdict,
        validated,
        budget_exhausted: session.budget_exhausted,
    })
}

/// Completion soundness helper for tests: no pending obligations remain
/// unless the budget flag is set.
pub fn no_pending_left(outcome: &RunOutcome) -> bool {
    outcome.budget_exhausted
        || outcome
            .plan
            .nodes()
            .all(|(_, o)| o.status != ObligationStatus::Pending)
}
