//! Oracle-guided repair baseline: apply the seed edits, then reactively fix
//! whatever the oracle flags, using the same contextualization machinery as
//! the planner but no impact analysis — the oracle alone localizes edits.

use crate::change::classify_changes;
use crate::context::{make_prompt, TemporalContext, TemporalEntry};
use crate::depgraph::{construct_dependency_graph, update_dependency_graph};
use crate::editors::{EditBackend, EditRequest, EditResponse};
use crate::engine::{resolve_seeds, EngineConfig, EngineError, RunOutcome};
use crate::oracle::{diagnostics_to_seeds, Oracle, OracleVerdict};
use crate::plan::{EditSpecification, PlanGraph};
use crate::syntax::{extract_fragment, merge_fragment, BlockId, MergeError, Repository};
use crate::trace::{sha256_hex, CauseRef, RunTrace, TraceRecord};

/// Reactive repair loop: seed edits, then up to `max_rounds` of
/// oracle-run/diagnose/patch cycles. Stops as soon as the oracle passes.
pub fn oracle_guided_repair(
    repo: Repository,
    seeds: &[EditSpecification],
    oracle: &dyn Oracle,
    editor: &mut dyn EditBackend,
    config: &EngineConfig,
    max_rounds: u32,
) -> Result<RunOutcome, EngineError> {
    let mut repo = repo;
    let mut graph = construct_dependency_graph(&repo);
    let mut trace = RunTrace::default();
    let mut step = 0usize;
    // Prior edits of this run, accumulated for temporal context.
    let mut history: Vec<TemporalEntry> = Vec::new();

    let seed_blocks = resolve_seeds(&repo, seeds)?;

    let execute = |repo: &mut Repository,
                       graph: &mut crate::depgraph::DependencyGraph,
                       trace: &mut RunTrace,
                       history: &mut Vec<TemporalEntry>,
                       step: &mut usize,
                       round: u32,
                       block: &BlockId,
                       instruction: &str,
                       causes: &[String],
                       editor: &mut dyn EditBackend|
     -> Result<(), EngineError> {
        *step += 1;
        let step_no = *step;
        let Ok(fragment) = extract_fragment(repo, block) else {
            trace.push(TraceRecord::Step {
                step: step_no,
                iteration: round,
                block: block.clone(),
                generation: 0,
                causes: vec![],
                prompt_hash: String::new(),
                editor_backend: editor.name().to_string(),
                change_labels: vec![],
                affected: vec![],
                status: "stale_block".into(),
            });
            return Ok(());
        };
        let spatial = if config.context.include_spatial {
            crate::context::gather_spatial_context(block, repo, graph, &config.context)
        } else {
            Vec::new()
        };
        // Temporal context: this run's own prior edits. Cause sentences are
        // replaced by the oracle's diagnostic messages (no plan edges exist).
        let temporal = if config.context.include_temporal {
            TemporalContext { edits: history.clone(), causes: causes.to_vec() }
        } else {
            TemporalContext::default()
        };
        let instruction_full = {
            let task = config.task_instruction.trim();
            if task.is_empty() {
                instruction.to_string()
            } else if instruction.is_empty() {
                task.to_string()
            } else {
                format!("{task}\n{instruction}")
            }
        };
        let prompt = make_prompt(&fragment, &instruction_full, &spatial, &temporal, &config.context);
        let prompt_hash = sha256_hex(&prompt);
        trace.push_prompt(step_no, prompt.clone());
        let request = EditRequest {
            prompt,
            subject: block.clone(),
            sketch: fragment.sketch_text.clone(),
            subject_text: fragment.subject_text.clone(),
            step: step_no,
        };

        let mut status = "no_changes".to_string();
        let mut change_labels = Vec::new();
        match editor.edit(&request) {
            Err(e) => {
                status = format!("editor_failed: {e}");
            }
            Ok(EditResponse::NoChanges) => {}
            Ok(EditResponse::NewText(new_text)) => match merge_fragment(repo, &new_text, &fragment)
            {
                Err(MergeError::Rejected(reason) | MergeError::Stale(reason)) => {
                    trace.push(TraceRecord::MergeRejected {
                        step: step_no,
                        block: block.clone(),
                        reason,
                        attempt: 0,
                    });
                    status = "merge_rejected".into();
                }
                Ok(outcome) => {
                    let changes =
                        classify_changes(&outcome.before_text, &outcome.after_text, block)
                            .map_err(|e| EngineError::Classify(e.to_string()))?;
                    if !changes.is_empty() {
                        let new_graph = update_dependency_graph(graph, &changes, &outcome.repo)
                            .map_err(|e| EngineError::GraphDesync(e.to_string()))?;
                        *graph = new_graph;
                        history.push(TemporalEntry {
                            block: block.clone(),
                            before: outcome.before_text.clone(),
                            after: outcome.after_text.clone(),
                        });
                        change_labels = changes.iter().map(|c| c.label).collect();
                    }
                    *repo = outcome.repo;
                    status = "completed".into();
                }
            },
        }
        trace.push(TraceRecord::Step {
            step: step_no,
            iteration: round,
            block: block.clone(),
            generation: 0,
            causes: Vec::<CauseRef>::new(),
            prompt_hash,
            editor_backend: editor.name().to_string(),
            change_labels,
            affected: vec![],
            status,
        });
        Ok(())
    };

    // Round 0: the seed edits themselves (impact analysis disabled).
    for (block, instruction) in &seed_blocks {
        execute(
            &mut repo,
            &mut graph,
            &mut trace,
            &mut history,
            &mut step,
            0,
            block,
            instruction,
            &[],
            editor,
        )?;
    }

    let verdict: Option<OracleVerdict>;
    let mut validated = false;
    let mut rounds = 0u32;
    loop {
        graph.reconcile(&repo);
        let v = oracle.check(&repo)?;
        trace.push(TraceRecord::RoundEnd {
            round: rounds,
            oracle_pass: v.pass,
            diagnostics: v.diagnostics.len(),
        });
        if v.pass {
            validated = true;
            verdict = Some(v);
            break;
        }
        if rounds >= max_rounds {
            verdict = Some(v);
            break;
        }
        rounds += 1;
        let targets = diagnostics_to_seeds(&v, &repo);
        let messages: Vec<String> = v.diagnostics.iter().map(|d| d.message.clone()).collect();
        for (block, instruction) in &targets {
            execute(
                &mut repo,
                &mut graph,
                &mut trace,
                &mut history,
                &mut step,
                rounds,
                block,
                instruction,
                &messages,
                editor,
            )?;
        }
    }

    Ok(RunOutcome {
        repo,
        graph,
        plan: PlanGraph::new(1),
        trace,
        iterations: rounds,
        verdict,
        validated,
        budget_exhausted: false,
    })
}
