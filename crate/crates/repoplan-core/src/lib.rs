//! Repository-level edit planning.
//!
//! Given a repository, a set of seed edit specifications, a validity oracle
//! and a pluggable edit backend, this crate synthesizes and executes a chain
//! of inter-dependent edits. The machinery combines:
//!
//! - a block-level syntax front end for a statically analyzable Python-like
//!   subset ([`syntax`]),
//! - an incrementally maintained, labeled dependency graph ([`depgraph`]),
//! - classification of merged edits into atomic-change labels ([`change`]),
//! - change may-impact analysis mapping atomic changes to possibly affected
//!   blocks ([`impact`]),
//! - an adaptive plan graph and execution engine ([`plan`], [`engine`]),
//! - prompt assembly with spatial and temporal context ([`context`]),
//! - pluggable edit backends ([`editors`]) and validity oracles ([`oracle`]),
//! - a reactive oracle-guided repair baseline ([`baseline`]), and
//! - evaluation metrics against a ground-truth target repository ([`metrics`]).
//!
//! The [`fixtures`] module ships a built-in scenario corpus used by the test
//! suite and the `fixtures` CLI subcommand.

pub mod baseline;
pub mod change;
pub mod context;
pub mod editors;
pub mod engine;
pub mod fixtures;
pub mod depgraph;
pub mod impact;
pub mod metrics;
pub mod oracle;
pub mod plan;
pub mod syntax;
pub mod textdiff;
pub mod trace;

pub use syntax::{BlockId, BlockKind, CodeBlock, Repository, SourceFile, Span};
