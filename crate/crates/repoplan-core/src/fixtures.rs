//! Built-in scenario corpus: source/target repository pairs with seeds and
//! editor fixtures, used by the test suite and the `fixtures` CLI command.
//!
//! Scenarios:
//! - `complex_migration` — a two-file API migration where a return-type
//!   change to one function forces an edit in its caller.
//! - `default_argument` — a new defaulted parameter that no checker flags
//!   but whose call sites all change in the ground truth.
//! - `dict_key` — a body-only change that pops a new payload key; ten call
//!   sites follow suit.
//! - `constructor_cascade` — a new field forces constructor and caller
//!   updates across four hops (rule editor, context-gated rules).
//! - `override_ripple` — a derived-class signature change that forces the
//!   base method and the sibling override to follow.
//! - `repair_retry` — the first editor response introduces a checker error;
//!   the second iteration repairs it.
//! - `mutual_recursion` — a deliberately cyclic pair bounded by the
//!   generation cap.
//! - `escape_gating` — one local-only body edit (no propagation) and one
//!   return-value edit (propagates to callers).

use crate::editors::{EditBackend, ReplayEditor, RuleEditor};
use crate::plan::EditSpecification;
use crate::syntax::Repository;
use serde::Deserialize;
use std::path::Path;

/// Which deterministic backend a fixture drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditorKind {
    Rule,
    Replay,
}

/// One bundled scenario.
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    /// (relative path, content) for everything the fixture ships.
    pub files: &'static [(&'static str, &'static str)],
    pub editor: EditorKind,
}

macro_rules! fixture_file {
    ($name:literal, $rel:literal) => {
        ($rel, include_str!(concat!("../fixtures/", $name, "/", $rel)))
    };
}

static COMPLEX_MIGRATION: Fixture = Fixture {
    name: "complex_migration",
    description: "Return-type migration: seed on func, derived edit on its caller process.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("complex_migration", "source/complexlib.py"),
        fixture_file!("complex_migration", "source/create.py"),
        fixture_file!("complex_migration", "source/display.py"),
        fixture_file!("complex_migration", "source/process.py"),
        fixture_file!("complex_migration", "target/complexlib.py"),
        fixture_file!("complex_migration", "target/create.py"),
        fixture_file!("complex_migration", "target/display.py"),
        fixture_file!("complex_migration", "target/process.py"),
        fixture_file!("complex_migration", "seeds.json"),
        fixture_file!("complex_migration", "replay.json"),
        fixture_file!("complex_migration", "rules.json"),
        fixture_file!("complex_migration", "expected_metrics.json"),
        fixture_file!("complex_migration", "expected_trace.json"),
    ],
};

static DEFAULT_ARGUMENT: Fixture = Fixture {
    name: "default_argument",
    description: "Defaulted parameter added to load_checkpoint; checkers stay quiet while every call site changes in the ground truth.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("default_argument", "source/store.py"),
        fixture_file!("default_argument", "source/loader.py"),
        fixture_file!("default_argument", "source/trainer.py"),
        fixture_file!("default_argument", "source/evaluate.py"),
        fixture_file!("default_argument", "source/export.py"),
        fixture_file!("default_argument", "target/store.py"),
        fixture_file!("default_argument", "target/loader.py"),
        fixture_file!("default_argument", "target/trainer.py"),
        fixture_file!("default_argument", "target/evaluate.py"),
        fixture_file!("default_argument", "target/export.py"),
        fixture_file!("default_argument", "seeds.json"),
        fixture_file!("default_argument", "replay.json"),
        fixture_file!("default_argument", "expected_metrics.json"),
        fixture_file!("default_argument", "expected_trace.json"),
    ],
};

static DICT_KEY: Fixture = Fixture {
    name: "dict_key",
    description: "send_request pops a new payload key; ten call sites across three files follow.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("dict_key", "source/payloads.py"),
        fixture_file!("dict_key", "source/api.py"),
        fixture_file!("dict_key", "source/client.py"),
        fixture_file!("dict_key", "source/jobs.py"),
        fixture_file!("dict_key", "source/admin.py"),
        fixture_file!("dict_key", "target/payloads.py"),
        fixture_file!("dict_key", "target/api.py"),
        fixture_file!("dict_key", "target/client.py"),
        fixture_file!("dict_key", "target/jobs.py"),
        fixture_file!("dict_key", "target/admin.py"),
        fixture_file!("dict_key", "seeds.json"),
        fixture_file!("dict_key", "replay.json"),
        fixture_file!("dict_key", "expected_metrics.json"),
        fixture_file!("dict_key", "expected_trace.json"),
    ],
};

static CONSTRUCTOR_CASCADE: Fixture = Fixture {
    name: "constructor_cascade",
    description: "A new field forces constructor and caller updates across four hops; rules are gated on temporal-context sentences.",
    editor: EditorKind::Rule,
    files: &[
        fixture_file!("constructor_cascade", "source/display.py"),
        fixture_file!("constructor_cascade", "source/output.py"),
        fixture_file!("constructor_cascade", "source/report.py"),
        fixture_file!("constructor_cascade", "source/pipeline.py"),
        fixture_file!("constructor_cascade", "source/app.py"),
        fixture_file!("constructor_cascade", "target/display.py"),
        fixture_file!("constructor_cascade", "target/output.py"),
        fixture_file!("constructor_cascade", "target/report.py"),
        fixture_file!("constructor_cascade", "target/pipeline.py"),
        fixture_file!("constructor_cascade", "target/app.py"),
        fixture_file!("constructor_cascade", "seeds.json"),
        fixture_file!("constructor_cascade", "rules.json"),
        fixture_file!("constructor_cascade", "expected_metrics.json"),
        fixture_file!("constructor_cascade", "expected_trace.json"),
    ],
};

static OVERRIDE_RIPPLE: Fixture = Fixture {
    name: "override_ripple",
    description: "Derived-class signature change forcing the base method and sibling override to follow.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("override_ripple", "source/shapes.py"),
        fixture_file!("override_ripple", "source/render.py"),
        fixture_file!("override_ripple", "source/demo.py"),
        fixture_file!("override_ripple", "target/shapes.py"),
        fixture_file!("override_ripple", "target/render.py"),
        fixture_file!("override_ripple", "target/demo.py"),
        fixture_file!("override_ripple", "seeds.json"),
        fixture_file!("override_ripple", "replay.json"),
        fixture_file!("override_ripple", "expected_metrics.json"),
        fixture_file!("override_ripple", "expected_trace.json"),
    ],
};

static REPAIR_RETRY: Fixture = Fixture {
    name: "repair_retry",
    description: "Iteration 1 injects a bad body; the oracle flags it and iteration 2 converges.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("repair_retry", "source/mathlib.py"),
        fixture_file!("repair_retry", "source/calc.py"),
        fixture_file!("repair_retry", "target/mathlib.py"),
        fixture_file!("repair_retry", "target/calc.py"),
        fixture_file!("repair_retry", "seeds.json"),
        fixture_file!("repair_retry", "replay.json"),
        fixture_file!("repair_retry", "expected_metrics.json"),
        fixture_file!("repair_retry", "expected_trace.json"),
    ],
};

static MUTUAL_RECURSION: Fixture = Fixture {
    name: "mutual_recursion",
    description: "Cyclic ping/pong signature growth, bounded by the generation cap.",
    editor: EditorKind::Rule,
    files: &[
        fixture_file!("mutual_recursion", "source/loop.py"),
        fixture_file!("mutual_recursion", "target/loop.py"),
        fixture_file!("mutual_recursion", "seeds.json"),
        fixture_file!("mutual_recursion", "rules.json"),
        fixture_file!("mutual_recursion", "expected_metrics.json"),
        fixture_file!("mutual_recursion", "expected_trace.json"),
    ],
};

static ESCAPE_GATING: Fixture = Fixture {
    name: "escape_gating",
    description: "A local-only body edit with no propagation next to a return-value edit that reaches callers.",
    editor: EditorKind::Replay,
    files: &[
        fixture_file!("escape_gating", "source/lib.py"),
        fixture_file!("escape_gating", "source/app.py"),
        fixture_file!("escape_gating", "target/lib.py"),
        fixture_file!("escape_gating", "target/app.py"),
        fixture_file!("escape_gating", "seeds.json"),
        fixture_file!("escape_gating", "replay.json"),
        fixture_file!("escape_gating", "expected_metrics.json"),
        fixture_file!("escape_gating", "expected_trace.json"),
    ],
};

static ALL: [&Fixture; 8] = [
    &COMPLEX_MIGRATION,
    &DEFAULT_ARGUMENT,
    &DICT_KEY,
    &CONSTRUCTOR_CASCADE,
    &OVERRIDE_RIPPLE,
    &REPAIR_RETRY,
    &MUTUAL_RECURSION,
    &ESCAPE_GATING,
];

/// Every shipped fixture.
pub fn all() -> &'static [&'static Fixture] {
    &ALL
}

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    all().iter().copied().find(|f| f.name == name)
}

/// Seed file shape shared by fixtures and the CLI.
#[derive(Debug, Clone, Deserialize)]
pub struct SeedFile {
    #[serde(default)]
    pub task: String,
    pub seeds: Vec<EditSpecification>,
}

impl Fixture {
    fn repo_from(&self, prefix: &str) -> Repository {
        Repository::from_sources(self.files.iter().filter_map(|(path, content)| {
            path.strip_prefix(prefix).map(|rel| (rel.to_string(), content.to_string()))
        }))
    }

    pub fn source_repo(&self) -> Repository {
        self.repo_from("source/")
    }

    pub fn target_repo(&self) -> Repository {
        self.repo_from("target/")
    }

    fn file(&self, rel: &str) -> Option<&'static str> {
        self.files.iter().find(|(p, _)| *p == rel).map(|(_, c)| *c)
    }

    pub fn seed_file(&self) -> SeedFile {
        serde_json::from_str(self.file("seeds.json").expect("fixture seeds.json"))
            .expect("fixture seeds parse")
    }

    pub fn expected_metrics(&self) -> serde_json::Value {
        serde_json::from_str(self.file("expected_metrics.json").expect("expected_metrics.json"))
            .expect("expected metrics parse")
    }

    pub fn expected_trace(&self) -> serde_json::Value {
        serde_json::from_str(self.file("expected_trace.json").expect("expected_trace.json"))
            .expect("expected trace parse")
    }

    /// Fresh instance of the fixture's deterministic editor.
    pub fn editor(&self) -> Box<dyn EditBackend> {
        match self.editor {
            EditorKind::Rule => {
                let rules = self.file("rules.json").expect("rules.json");
                Box::new(
                    RuleEditor::from_json(&serde_json::from_str(rules).expect("rules parse"))
                        .expect("rules compile"),
                )
            }
            EditorKind::Replay => {
                let replay = self.file("replay.json").expect("replay.json");
                Box::new(
                    ReplayEditor::from_json(&serde_json::from_str(replay).expect("replay parse"))
                        .expect("replay load"),
                )
            }
        }
    }

    /// Write the fixture's files under `dest/<name>/`.
    pub fn materialize(&self, dest: &Path) -> std::io::Result<()> {
        let root = dest.join(self.name);
        for (rel, content) in self.files {
            let path = root.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{InternalChecker, Oracle};

    #[test]
    fn all_fixture_sources_and_targets_parse() {
        for f in all() {
            let source = f.source_repo();
            let target = f.target_repo();
            assert!(source.warnings().is_empty(), "{}: source parse warnings", f.name);
            assert!(target.warnings().is_empty(), "{}: target parse warnings", f.name);
            assert!(source.block_count() > 0, "{}: empty source", f.name);
            assert!(target.block_count() > 0, "{}: empty target", f.name);
        }
    }

    #[test]
    fn every_target_passes_the_internal_oracle() {
        let checker = InternalChecker::new();
        for f in all() {
            let verdict = checker.check(&f.target_repo()).unwrap();
            assert!(
                verdict.pass,
                "{}: target fails oracle: {:?}",
                f.name, verdict.diagnostics
            );
        }
    }

    #[test]
    fn seeds_resolve_against_sources() {
        for f in all() {
            let repo = f.source_repo();
            let seed_file = f.seed_file();
            assert!(!seed_file.seeds.is_empty(), "{}: no seeds", f.name);
            for seed in &seed_file.seeds {
                seed.selector
                    .resolve(&repo)
                    .unwrap_or_else(|e| panic!("{}: seed does not resolve: {e}", f.name));
            }
        }
    }

    #[test]
    fn editors_load() {
        for f in all() {
            let _ = f.editor();
        }
    }

    #[test]
    fn materialize_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let f = by_name("complex_migration").unwrap();
        f.materialize(dir.path()).unwrap();
        assert!(dir.path().join("complex_migration/source/create.py").exists());
        assert!(dir.path().join("complex_migration/seeds.json").exists());
    }
}
