//! Transfer-rule compiler and set-rewriting runtime.
//!
//! Source-language semantics arrive as a flat set of labeled ground
//! conditions packed into a [`vit::Vit`] container. Declarative rules
//! ([`dsl`]) relate source condition sets to target condition sets; the
//! compiler ([`compiler`]) orients them for a direction, orders them by
//! specificity and indexes them in a prefix-sharing trie; the runtime
//! ([`runtime`]) consumes the sorted input set condition by condition,
//! rewriting it into the target set.

pub mod compiler;
pub mod diag;
pub mod dsl;
pub mod runtime;
pub mod sorts;
pub mod syntax;
pub mod synth;
pub mod term;
pub mod vit;

pub use compiler::{compile, orient, CompiledRuleSet, Direction, OrientedRule, SpecKey};
pub use diag::{Diagnostic, Severity};
pub use dsl::{parse_rule_file, ClassDef, RuleCondition, RuleModule, TransferRule};
pub use runtime::{
    derive_all, oracle_transfer, transfer, FallbackPolicy, HookRegistry, TransferResult,
};
pub use sorts::{load_hierarchy, SortHierarchy};
pub use term::{
    match_condition, BindingEnv, FreshGen, GroundCondition, GroundTerm, PatternCondition, Symbol,
    VarName,
};
pub use vit::{parse_vit, serialize_vit, SemSet, Vit};
