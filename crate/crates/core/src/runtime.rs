//! The transfer engine: executes the rewriting loop over a vit, producing
//! the target vit, a derivation trace and (in debug mode) all derivations.
//!
//! The loop: select the first condition of the sorted source set, look up
//! the trie by its functor/arity, walk the candidate rules in specificity
//! order, match the rest of each left-hand side against the remaining set
//! (ordered search over the functor/arity run), evaluate the guards, and on
//! success consume the matched conditions and emit the instantiated
//! right-hand side. When no candidate fires, the fallback policy decides
//! what happens to the selected condition. Once a rule fires the engine
//! commits; choice points exist only among candidates for the currently
//! selected condition. `derive_all` explores those choice points
//! exhaustively instead, and `oracle_transfer` enumerates every exact rule
//! cover of the input outright.
//!
//! Context conditions match against the current remaining set united with
//! everything already consumed in this derivation; that union is always
//! exactly the original input set, so they are evaluated against the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::compiler::{CompiledRuleSet, IndexKey, OrientedRule};
use crate::dsl::{HookArg, LabelRef, RuleCondition};
use crate::sorts::{SortError, SortHierarchy, TOP};
use crate::term::{
    instantiate_condition, match_condition, BindingEnv, FreshGen, GroundCondition, GroundTerm,
    PatArg, PatternCondition, PatternLabel, Symbol, VarName,
};
use crate::vit::{serialize_vit, ScopeConstraint, SemSet, Vit, VitError};

#[derive(Debug, Clone, Error)]
pub enum TransferError {
    #[error("transfer input has an empty semantic set")]
    EmptyInput,
    #[error("invalid transfer input: {0}")]
    InputInvalid(#[from] VitError),
    #[error("no rule applies to `{condition}` and the fallback policy is `error`")]
    Stuck { condition: GroundCondition },
    #[error("unknown hook `{0}`")]
    UnknownHook(Symbol),
    #[error("hook `{name}` failed: {message}")]
    HookCrash { name: Symbol, message: String },
    #[error("cannot apply rule {rule}: {reason}")]
    InvalidApplication { rule: String, reason: String },
    #[error("sort error during transfer: {0}")]
    Sort(#[from] SortError),
    #[error("oracle restriction violated: {0}")]
    OracleUnsupported(String),
    #[error("oracle size bound exceeded: {0}")]
    OracleSizeBound(String),
}

/// What to do with a selected condition no rule consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FallbackPolicy {
    /// Emit the condition unchanged (the metarule that passes entities
    /// preserved between source and target, e.g. role and pronoun
    /// conditions).
    #[default]
    CopyThrough,
    Drop,
    Error,
}

// ---------------------------------------------------------------------------
// Hooks
// ---------------------------------------------------------------------------

/// Argument passed to a hook after resolution against the environment.
#[derive(Debug, Clone)]
pub enum ResolvedHookArg {
    Ground(GroundTerm),
    /// Unbound at call time; the hook may bind it via its outcome.
    Free(VarName),
}

/// Read-only view given to hooks.
pub struct HookInput<'a> {
    pub args: &'a [ResolvedHookArg],
    pub vit: &'a Vit,
    pub remaining: &'a [GroundCondition],
    pub emitted: &'a [GroundCondition],
}

#[derive(Debug, Clone, Default)]
pub struct HookOutcome {
    pub success: bool,
    /// Bindings for `Free` arguments.
    pub bindings: Vec<(VarName, GroundTerm)>,
}

impl HookOutcome {
    pub fn pass() -> Self {
        HookOutcome {
            success: true,
            bindings: Vec::new(),
        }
    }

    pub fn fail() -> Self {
        HookOutcome::default()
    }
}

pub type HookFn = dyn Fn(&HookInput) -> Result<HookOutcome, String> + Send + Sync;

/// Named guard predicates callable from rule conditions. The default
/// registry carries `subordinated`, backed by the deterministic
/// subordination check over the input's declared constraints and label
/// embedding; external inference would be registered here instead.
pub struct HookRegistry {
    hooks: BTreeMap<Symbol, Arc<HookFn>>,
}

impl HookRegistry {
    pub fn empty() -> Self {
        HookRegistry {
            hooks: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, hook: F)
    where
        F: Fn(&HookInput) -> Result<HookOutcome, String> + Send + Sync + 'static,
    {
        self.hooks
            .insert(Symbol::new_unchecked(name), Arc::new(hook));
    }

    pub fn get(&self, name: &Symbol) -> Option<&Arc<HookFn>> {
        self.hooks.get(name)
    }
}

impl Default for HookRegistry {
    fn default() -> Self {
        let mut r = HookRegistry::empty();
        r.register("subordinated", |input: &HookInput| {
            let leaves: Vec<&Symbol> = input
                .args
                .iter()
                .filter_map(|a| match a {
                    ResolvedHookArg::Ground(t) => t.as_leaf(),
                    ResolvedHookArg::Free(_) => None,
                })
                .collect();
            let success = match leaves.as_slice() {
                [lower, upper] => input.vit.subordinated(lower, upper).unwrap_or(false),
                _ => false,
            };
            Ok(HookOutcome {
                success,
                bindings: Vec::new(),
            })
        });
        r
    }
}

impl fmt::Debug for HookRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HookRegistry")
            .field("hooks", &self.hooks.keys().collect::<Vec<_>>())
            .finish()
    }
}

// ---------------------------------------------------------------------------
// State, trace, results
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    Fire { rule: String },
    Fallback,
}

/// Guard outcome recorded for the fired candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondOutcome {
    pub cond: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub action: TraceAction,
    pub consumed: Vec<GroundCondition>,
    pub produced: Vec<GroundCondition>,
    /// Bindings under the rule author's variable names.
    pub bindings: Vec<(VarName, GroundTerm)>,
    pub conds: Vec<CondOutcome>,
}

impl TraceStep {
    /// One stable line per step.
    pub fn render(&self) -> String {
        match &self.action {
            TraceAction::Fire { rule } => {
                let consumed: Vec<String> = self.consumed.iter().map(|c| c.to_string()).collect();
                let produced: Vec<String> = self.produced.iter().map(|c| c.to_string()).collect();
                let env: Vec<String> = self
                    .bindings
                    .iter()
                    .map(|(v, t)| format!("{v}={t}"))
                    .collect();
                format!(
                    "FIRE {rule} consumed=[{}] produced=[{}] env={{{}}}",
                    consumed.join(", "),
                    produced.join(", "),
                    env.join(", ")
                )
            }
            TraceAction::Fallback => format!("FALLBACK {}", self.consumed[0]),
        }
    }
}

/// The pair of remaining source set and accumulated target set, plus the
/// derivation trace and the fresh-constant counter.
#[derive(Debug, Clone)]
pub struct TransferState {
    /// Sorted; shrinks at every step.
    pub remaining: Vec<GroundCondition>,
    /// Emission order, canonicalized only at the end.
    pub emitted: Vec<GroundCondition>,
    pub trace: Vec<TraceStep>,
    pub fresh: FreshGen,
}

impl TransferState {
    pub fn start(sem: &SemSet) -> Self {
        TransferState {
            remaining: sem.as_slice().to_vec(),
            emitted: Vec::new(),
            trace: Vec::new(),
            fresh: FreshGen::new(),
        }
    }

    /// Per-step binding environments, in derivation order.
    pub fn env_log(&self) -> impl Iterator<Item = &[(VarName, GroundTerm)]> {
        self.trace.iter().map(|s| s.bindings.as_slice())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferStats {
    pub rules_tried: usize,
    pub rules_fired: usize,
    pub fallbacks: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub output: Vit,
    pub trace: Vec<TraceStep>,
    pub stats: TransferStats,
}

impl TransferResult {
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for step in &self.trace {
            out.push_str(&step.render());
            out.push('\n');
        }
        out
    }
}

/// Result set of an exhaustive derivation search.
#[derive(Debug, Clone)]
pub struct DeriveOutcome {
    /// One result per distinct output, in discovery order.
    pub results: Vec<TransferResult>,
    /// True when the search stopped because `limit` distinct outputs were
    /// exceeded.
    pub truncated: bool,
    /// Search-wide counters (per-result stats carry the per-path counts).
    pub stats: TransferStats,
}

// ---------------------------------------------------------------------------
// Rule application
// ---------------------------------------------------------------------------

/// Resolves equality bindings: bound/bound requires identity, bound/free
/// binds the free side, free/free seeds both with one fresh constant.
fn resolve_eqs(
    eqs: &[(VarName, VarName)],
    mut env: BindingEnv,
    fresh: &mut FreshGen,
) -> Option<BindingEnv> {
    for (a, b) in eqs {
        match (env.get(a).cloned(), env.get(b).cloned()) {
            (Some(x), Some(y)) => {
                if x != y {
                    return None;
                }
            }
            (Some(x), None) => {
                env.bind(b.clone(), x);
            }
            (None, Some(y)) => {
                env.bind(a.clone(), y);
            }
            (None, None) => {
                let t = GroundTerm::leaf(fresh.fresh());
                env.bind(a.clone(), t.clone());
                env.bind(b.clone(), t);
            }
        }
    }
    Some(env)
}

fn ground_under(pat: &PatternCondition, env: &BindingEnv) -> Option<GroundCondition> {
    fn term(t: &crate::term::PatternTerm, env: &BindingEnv) -> Option<GroundTerm> {
        let mut args = Vec::with_capacity(t.args.len());
        for a in &t.args {
            match a {
                PatArg::Var(v) => args.push(env.get(v)?.clone()),
                PatArg::Term(s) => args.push(term(s, env)?),
            }
        }
        Some(GroundTerm::new(t.functor.clone(), args))
    }
    let label = match &pat.label {
        PatternLabel::Sym(s) => s.clone(),
        PatternLabel::Var(v) => env.get(v)?.as_leaf()?.clone(),
    };
    Some(GroundCondition::new(label, term(&pat.body, env)?))
}

/// Applies one rule under a full environment: removes the ground instances
/// of the left-hand side from the remaining set (matching-based set
/// difference), appends the instantiated right-hand side, records a trace
/// step. Equality bindings are resolved first. Functional: returns the
/// successor state.
pub fn apply_rule(
    state: &TransferState,
    rule: &OrientedRule,
    env: &BindingEnv,
) -> Result<TransferState, TransferError> {
    let mut fresh = state.fresh.clone();
    let env = resolve_eqs(&rule.eqs, env.clone(), &mut fresh).ok_or_else(|| {
        TransferError::InvalidApplication {
            rule: rule.origin.clone(),
            reason: "conflicting eq bindings".into(),
        }
    })?;
    fire(state, rule, env, fresh, Vec::new())
}

fn fire(
    state: &TransferState,
    rule: &OrientedRule,
    mut env: BindingEnv,
    mut fresh: FreshGen,
    conds: Vec<CondOutcome>,
) -> Result<TransferState, TransferError> {
    let mut next = state.clone();
    let mut consumed = Vec::with_capacity(rule.lhs.len());
    for pat in &rule.lhs {
        let instance =
            ground_under(pat, &env).ok_or_else(|| TransferError::InvalidApplication {
                rule: rule.origin.clone(),
                reason: format!("unbound variable in lhs pattern `{pat}`"),
            })?;
        match next.remaining.binary_search(&instance) {
            Ok(i) => {
                next.remaining.remove(i);
            }
            Err(_) => {
                return Err(TransferError::InvalidApplication {
                    rule: rule.origin.clone(),
                    reason: format!("lhs instance `{instance}` not in the remaining set"),
                })
            }
        }
        consumed.push(instance);
    }
    let mut produced = Vec::with_capacity(rule.rhs.len());
    for pat in &rule.rhs {
        let cond = instantiate_condition(pat, &mut env, &mut fresh).map_err(|e| {
            TransferError::InvalidApplication {
                rule: rule.origin.clone(),
                reason: e.to_string(),
            }
        })?;
        produced.push(cond);
    }
    next.emitted.extend(produced.iter().cloned());
    next.fresh = fresh;

    let mut bindings: Vec<(VarName, GroundTerm)> = env
        .iter()
        .map(|(v, t)| (rule.original_name(v).clone(), t.clone()))
        .collect();
    bindings.sort_by(|a, b| a.0.cmp(&b.0));
    next.trace.push(TraceStep {
        action: TraceAction::Fire {
            rule: rule.origin.clone(),
        },
        consumed,
        produced,
        bindings,
        conds,
    });
    Ok(next)
}

fn fallback_step(state: &TransferState, policy: FallbackPolicy) -> Option<TransferState> {
    let mut next = state.clone();
    let selected = next.remaining.remove(0);
    let produced = match policy {
        FallbackPolicy::CopyThrough => {
            next.emitted.push(selected.clone());
            vec![selected.clone()]
        }
        FallbackPolicy::Drop => Vec::new(),
        FallbackPolicy::Error => return None,
    };
    next.trace.push(TraceStep {
        action: TraceAction::Fallback,
        consumed: vec![selected],
        produced,
        bindings: Vec::new(),
        conds: Vec::new(),
    });
    Some(next)
}

// ---------------------------------------------------------------------------
// Candidate search
// ---------------------------------------------------------------------------

struct EngineCtx<'a> {
    input: &'a Vit,
    prog: &'a CompiledRuleSet,
    hierarchy: &'a SortHierarchy,
    hooks: &'a HookRegistry,
}

/// A fully matched and guarded rule application, ready to fire.
struct Candidate {
    rule: Arc<OrientedRule>,
    env: BindingEnv,
    fresh: FreshGen,
    conds: Vec<CondOutcome>,
}

struct Search<'a, 'v> {
    ctx: &'a EngineCtx<'a>,
    state: &'a TransferState,
    stats: &'a mut TransferStats,
    visit: &'v mut dyn FnMut(Candidate) -> ControlFlow<()>,
}

impl<'a, 'v> Search<'a, 'v> {
    /// Enumerates candidates for the currently selected condition
    /// (`remaining[0]`) in trie walk order: branches before local leaves,
    /// siblings by descending specificity.
    fn run(&mut self) -> Result<ControlFlow<()>, TransferError> {
        let selected = &self.state.remaining[0];
        let key = IndexKey {
            functor: selected.functor().clone(),
            arity: selected.arity(),
        };
        let Some(node) = self.ctx.prog.trie.node(&key) else {
            return Ok(ControlFlow::Continue(()));
        };
        let mut used = vec![0usize];
        for (pat, child) in node.branches() {
            if let Some(env) = match_condition(pat, selected, &BindingEnv::new()) {
                if self.walk(child, &env, &mut used)?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn walk(
        &mut self,
        node: &crate::compiler::TrieNode,
        env: &BindingEnv,
        used: &mut Vec<usize>,
    ) -> Result<ControlFlow<()>, TransferError> {
        for (pat, child) in node.branches() {
            // ordered search with early cut-off: only the functor/arity run
            // of the sorted remaining set can match this pattern
            let (lo, hi) = self.range(pat.functor(), pat.arity());
            for idx in lo..hi {
                if used.contains(&idx) {
                    continue;
                }
                if let Some(env2) = match_condition(pat, &self.state.remaining[idx], env) {
                    used.push(idx);
                    let flow = self.walk(child, &env2, used)?;
                    used.pop();
                    if flow.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
            }
        }
        for leaf in node.leaves() {
            self.stats.rules_tried += 1;
            let mut log = Vec::new();
            if self
                .eval_conds(leaf, 0, env.clone(), self.state.fresh.clone(), &mut log)?
                .is_break()
            {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn range(&self, functor: &Symbol, arity: usize) -> (usize, usize) {
        let set = &self.state.remaining;
        let key = (functor.as_str(), arity);
        let lo = set.partition_point(|c| (c.functor().as_str(), c.arity()) < key);
        let hi = lo + set[lo..].partition_point(|c| (c.functor().as_str(), c.arity()) <= key);
        (lo, hi)
    }

    /// Left-to-right guard evaluation with backtracking over context-match
    /// alternatives. Calls the visitor for every full solution.
    fn eval_conds(
        &mut self,
        leaf: &Arc<OrientedRule>,
        i: usize,
        env: BindingEnv,
        fresh: FreshGen,
        log: &mut Vec<CondOutcome>,
    ) -> Result<ControlFlow<()>, TransferError> {
        if i == leaf.conds.len() {
            let mut fresh = fresh;
            let Some(env) = resolve_eqs(&leaf.eqs, env, &mut fresh) else {
                return Ok(ControlFlow::Continue(()));
            };
            return Ok((self.visit)(Candidate {
                rule: leaf.clone(),
                env,
                fresh,
                conds: log.clone(),
            }));
        }
        let cond = &leaf.conds[i];
        match cond {
            RuleCondition::ContextMatch(pat) => {
                self.context_alternatives(leaf, i, std::slice::from_ref(pat), env, fresh, log)
            }
            RuleCondition::ContextMatchAny(pats) => {
                self.context_alternatives(leaf, i, pats, env, fresh, log)
            }
            RuleCondition::SortTest {
                marker,
                sort,
                negated,
            } => {
                if self.eval_sort_test(marker, sort, *negated, &env)? {
                    log.push(CondOutcome {
                        cond: cond.to_string(),
                        passed: true,
                    });
                    let flow = self.eval_conds(leaf, i + 1, env, fresh, log)?;
                    log.pop();
                    Ok(flow)
                } else {
                    Ok(ControlFlow::Continue(()))
                }
            }
            RuleCondition::SubordTest { lower, upper } => {
                if self.eval_subord_test(lower, upper, &env)? {
                    log.push(CondOutcome {
                        cond: cond.to_string(),
                        passed: true,
                    });
                    let flow = self.eval_conds(leaf, i + 1, env, fresh, log)?;
                    log.pop();
                    Ok(flow)
                } else {
                    Ok(ControlFlow::Continue(()))
                }
            }
            RuleCondition::EqBind(a, b) => {
                let mut fresh = fresh;
                match resolve_eqs(&[(a.clone(), b.clone())], env, &mut fresh) {
                    Some(env) => {
                        log.push(CondOutcome {
                            cond: cond.to_string(),
                            passed: true,
                        });
                        let flow = self.eval_conds(leaf, i + 1, env, fresh, log)?;
                        log.pop();
                        Ok(flow)
                    }
                    None => Ok(ControlFlow::Continue(())),
                }
            }
            RuleCondition::HookCall { name, args } => {
                let Some(hook) = self.ctx.hooks.get(name) else {
                    return Err(TransferError::UnknownHook(name.clone()));
                };
                let resolved: Vec<ResolvedHookArg> = args
                    .iter()
                    .map(|a| match a {
                        HookArg::Var(v) => match env.get(v) {
                            Some(t) => ResolvedHookArg::Ground(t.clone()),
                            None => ResolvedHookArg::Free(v.clone()),
                        },
                        HookArg::Ground(g) => ResolvedHookArg::Ground(g.clone()),
                    })
                    .collect();
                let outcome = hook(&HookInput {
                    args: &resolved,
                    vit: self.ctx.input,
                    remaining: &self.state.remaining,
                    emitted: &self.state.emitted,
                })
                .map_err(|message| TransferError::HookCrash {
                    name: name.clone(),
                    message,
                })?;
                if !outcome.success {
                    return Ok(ControlFlow::Continue(()));
                }
                let mut env = env;
                for (v, t) in outcome.bindings {
                    if !env.bind(v, t) {
                        return Ok(ControlFlow::Continue(()));
                    }
                }
                log.push(CondOutcome {
                    cond: cond.to_string(),
                    passed: true,
                });
                let flow = self.eval_conds(leaf, i + 1, env, fresh, log)?;
                log.pop();
                Ok(flow)
            }
        }
    }

    fn context_alternatives(
        &mut self,
        leaf: &Arc<OrientedRule>,
        i: usize,
        pats: &[PatternCondition],
        env: BindingEnv,
        fresh: FreshGen,
        log: &mut Vec<CondOutcome>,
    ) -> Result<ControlFlow<()>, TransferError> {
        for pat in pats {
            for c in self.ctx.input.sem.functor_range(pat.functor(), pat.arity()) {
                if let Some(env2) = match_condition(pat, c, &env) {
                    log.push(CondOutcome {
                        cond: format!("{pat} ~ {c}"),
                        passed: true,
                    });
                    let flow = self.eval_conds(leaf, i + 1, env2, fresh.clone(), log)?;
                    log.pop();
                    if flow.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn eval_sort_test(
        &self,
        marker: &VarName,
        sort: &Symbol,
        negated: bool,
        env: &BindingEnv,
    ) -> Result<bool, TransferError> {
        let Some(term) = env.get(marker) else {
            return Ok(false);
        };
        let Some(m) = term.as_leaf() else {
            return Ok(false);
        };
        match self.ctx.input.sorts.get(m) {
            Some(assigned) => {
                let subsumed = self.ctx.hierarchy.subsumes(sort, assigned)?;
                Ok(if negated { !subsumed } else { subsumed })
            }
            None => {
                if negated {
                    // a negated test needs positive evidence; an unsorted
                    // marker must fall through to the default rule
                    Ok(false)
                } else {
                    let top = Symbol::new_unchecked(TOP);
                    Ok(self.ctx.hierarchy.subsumes(sort, &top)?)
                }
            }
        }
    }

    fn eval_subord_test(
        &self,
        lower: &LabelRef,
        upper: &LabelRef,
        env: &BindingEnv,
    ) -> Result<bool, TransferError> {
        let resolve = |side: &LabelRef| -> Option<Symbol> {
            match side {
                LabelRef::Sym(s) => Some(s.clone()),
                LabelRef::Var(v) => env.get(v)?.as_leaf().cloned(),
            }
        };
        let (Some(lo), Some(hi)) = (resolve(lower), resolve(upper)) else {
            return Ok(false);
        };
        // dispatches through the registry so external scope resolution can
        // replace the built-in check
        let name = Symbol::new_unchecked("subordinated");
        if let Some(hook) = self.ctx.hooks.get(&name) {
            let args = [
                ResolvedHookArg::Ground(GroundTerm::leaf(lo)),
                ResolvedHookArg::Ground(GroundTerm::leaf(hi)),
            ];
            let outcome = hook(&HookInput {
                args: &args,
                vit: self.ctx.input,
                remaining: &self.state.remaining,
                emitted: &self.state.emitted,
            })
            .map_err(|message| TransferError::HookCrash { name, message })?;
            Ok(outcome.success)
        } else {
            Ok(self.ctx.input.subordinated(&lo, &hi).unwrap_or(false))
        }
    }
}

fn first_candidate(
    ctx: &EngineCtx,
    state: &TransferState,
    stats: &mut TransferStats,
) -> Result<Option<Candidate>, TransferError> {
    let mut found = None;
    let mut search = Search {
        ctx,
        state,
        stats,
        visit: &mut |c| {
            found = Some(c);
            ControlFlow::Break(())
        },
    };
    let _ = search.run()?;
    Ok(found)
}

fn all_candidates(
    ctx: &EngineCtx,
    state: &TransferState,
    stats: &mut TransferStats,
) -> Result<Vec<Candidate>, TransferError> {
    let mut out = Vec::new();
    let mut search = Search {
        ctx,
        state,
        stats,
        visit: &mut |c| {
            out.push(c);
            ControlFlow::Continue(())
        },
    };
    let _ = search.run()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// transfer / derive_all
// ---------------------------------------------------------------------------

fn check_input(v: &Vit, hierarchy: &SortHierarchy) -> Result<(), TransferError> {
    if v.sem.is_empty() {
        return Err(TransferError::EmptyInput);
    }
    v.validate_sorts(hierarchy)?;
    Ok(())
}

/// Slot propagation: scope constraints survive when both endpoints still
/// occur in the output sem (as labels or label arguments); sort assignments
/// follow surviving markers; extras are copied verbatim.
fn finalize_output(input: &Vit, state: &TransferState) -> Vit {
    let sem = SemSet::from_conditions(state.emitted.clone());
    let universe = sem.label_universe();
    let scope: Vec<ScopeConstraint> = input
        .scope
        .iter()
        .filter(|sc| universe.contains(&sc.lower) && universe.contains(&sc.upper))
        .cloned()
        .collect();
    let args: BTreeSet<Symbol> = sem.arg_symbols().into_iter().cloned().collect();
    let sorts: BTreeMap<Symbol, Symbol> = input
        .sorts
        .iter()
        .filter(|(m, _)| args.contains(*m))
        .map(|(m, s)| (m.clone(), s.clone()))
        .collect();
    Vit::from_output_parts(state.emitted.clone(), scope, sorts, input.extras.clone())
}

/// Deterministically rewrites the source vit into the target vit.
pub fn transfer(
    v: &Vit,
    prog: &CompiledRuleSet,
    hierarchy: &SortHierarchy,
    hooks: &HookRegistry,
    policy: FallbackPolicy,
) -> Result<TransferResult, TransferError> {
    let started = Instant::now();
    check_input(v, hierarchy)?;
    let ctx = EngineCtx {
        input: v,
        prog,
        hierarchy,
        hooks,
    };
    let mut stats = TransferStats::default();
    let mut state = TransferState::start(&v.sem);
    while !state.remaining.is_empty() {
        match first_candidate(&ctx, &state, &mut stats)? {
            Some(c) => {
                stats.rules_fired += 1;
                state = fire(&state, &c.rule, c.env, c.fresh, c.conds)?;
            }
            None => {
                stats.fallbacks += 1;
                state = fallback_step(&state, policy).ok_or_else(|| TransferError::Stuck {
                    condition: state.remaining[0].clone(),
                })?;
            }
        }
    }
    let output = finalize_output(v, &state);
    stats.elapsed = started.elapsed();
    Ok(TransferResult {
        output,
        trace: state.trace,
        stats,
    })
}

/// Exhaustive search over candidate choices (selection stays first-of-sorted,
/// which is what rules out spurious orderings). Returns the distinct outputs,
/// at most `limit` of them.
pub fn derive_all(
    v: &Vit,
    prog: &CompiledRuleSet,
    hierarchy: &SortHierarchy,
    hooks: &HookRegistry,
    policy: FallbackPolicy,
    limit: usize,
) -> Result<DeriveOutcome, TransferError> {
    let started = Instant::now();
    check_input(v, hierarchy)?;
    let ctx = EngineCtx {
        input: v,
        prog,
        hierarchy,
        hooks,
    };
    let mut out = DeriveOutcome {
        results: Vec::new(),
        truncated: false,
        stats: TransferStats::default(),
    };
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let state = TransferState::start(&v.sem);
    derive_rec(&ctx, v, state, policy, limit, &mut seen, &mut out)?;
    out.stats.elapsed = started.elapsed();
    Ok(out)
}

fn derive_rec(
    ctx: &EngineCtx,
    input: &Vit,
    state: TransferState,
    policy: FallbackPolicy,
    limit: usize,
    seen: &mut BTreeSet<String>,
    out: &mut DeriveOutcome,
) -> Result<(), TransferError> {
    if out.truncated {
        return Ok(());
    }
    if state.remaining.is_empty() {
        let output = finalize_output(input, &state);
        let key = serialize_vit(&output);
        if seen.insert(key) {
            if out.results.len() == limit {
                out.truncated = true;
                return Ok(());
            }
            let stats = TransferStats {
                rules_tried: 0,
                rules_fired: state
                    .trace
                    .iter()
                    .filter(|s| matches!(s.action, TraceAction::Fire { .. }))
                    .count(),
                fallbacks: state
                    .trace
                    .iter()
                    .filter(|s| s.action == TraceAction::Fallback)
                    .count(),
                elapsed: Duration::ZERO,
            };
            out.results.push(TransferResult {
                output,
                trace: state.trace,
                stats,
            });
        }
        return Ok(());
    }
    let candidates = all_candidates(ctx, &state, &mut out.stats)?;
    if candidates.is_empty() {
        // a dead end under the error policy contributes nothing
        if let Some(next) = fallback_step(&state, policy) {
            derive_rec(ctx, input, next, policy, limit, seen, out)?;
        }
        return Ok(());
    }
    for c in candidates {
        if out.truncated {
            return Ok(());
        }
        out.stats.rules_fired += 1;
        let next = fire(&state, &c.rule, c.env, c.fresh, c.conds)?;
        derive_rec(ctx, input, next, policy, limit, seen, out)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

const ORACLE_MAX_CONDITIONS: usize = 10;
const ORACLE_MAX_RULES: usize = 12;

/// Exhaustive ground truth for small instances: enumerates every way to
/// cover the input exactly by rule applications (any partition, any
/// positions, no index restriction) and returns all distinct target sets.
/// An empty set means no covering partition exists.
pub fn oracle_transfer(
    v: &Vit,
    rules: &[Arc<OrientedRule>],
    hierarchy: &SortHierarchy,
) -> Result<BTreeSet<SemSet>, TransferError> {
    if v.sem.len() > ORACLE_MAX_CONDITIONS {
        return Err(TransferError::OracleSizeBound(format!(
            "{} conditions (max {ORACLE_MAX_CONDITIONS})",
            v.sem.len()
        )));
    }
    if rules.len() > ORACLE_MAX_RULES {
        return Err(TransferError::OracleSizeBound(format!(
            "{} rules (max {ORACLE_MAX_RULES})",
            rules.len()
        )));
    }
    for r in rules {
        if !r.eqs.is_empty() {
            return Err(TransferError::OracleUnsupported(format!(
                "rule {} has eq bindings",
                r.origin
            )));
        }
        for c in &r.conds {
            match c {
                RuleCondition::ContextMatch(_)
                | RuleCondition::ContextMatchAny(_)
                | RuleCondition::SortTest { .. }
                | RuleCondition::SubordTest { .. } => {}
                RuleCondition::EqBind(..) | RuleCondition::HookCall { .. } => {
                    return Err(TransferError::OracleUnsupported(format!(
                        "rule {} has a condition the oracle does not evaluate",
                        r.origin
                    )))
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    let remaining: Vec<GroundCondition> = v.sem.as_slice().to_vec();
    oracle_rec(
        v,
        hierarchy,
        rules,
        remaining,
        Vec::new(),
        FreshGen::new(),
        &mut out,
    )?;
    Ok(out)
}

fn oracle_rec(
    v: &Vit,
    hierarchy: &SortHierarchy,
    rules: &[Arc<OrientedRule>],
    remaining: Vec<GroundCondition>,
    emitted: Vec<GroundCondition>,
    fresh: FreshGen,
    out: &mut BTreeSet<SemSet>,
) -> Result<(), TransferError> {
    if remaining.is_empty() {
        out.insert(SemSet::from_conditions(emitted));
        return Ok(());
    }
    // every cover has exactly one block containing the first element, so
    // enumerating those blocks visits each partition once
    for rule in rules {
        let mut matches = Vec::new();
        oracle_match(
            rule,
            0,
            &remaining,
            &BindingEnv::new(),
            &mut Vec::new(),
            &mut matches,
        );
        for (env, used) in matches {
            if !used.contains(&0) {
                continue;
            }
            if !oracle_conds(v, hierarchy, &rule.conds, 0, &env) {
                continue;
            }
            let mut next_remaining = remaining.clone();
            let mut used = used;
            used.sort_unstable();
            for idx in used.iter().rev() {
                next_remaining.remove(*idx);
            }
            let mut env = env.clone();
            let mut next_fresh = fresh.clone();
            let mut next_emitted = emitted.clone();
            let mut ok = true;
            for pat in &rule.rhs {
                match instantiate_condition(pat, &mut env, &mut next_fresh) {
                    Ok(c) => next_emitted.push(c),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                oracle_rec(
                    v,
                    hierarchy,
                    rules,
                    next_remaining,
                    next_emitted,
                    next_fresh,
                    out,
                )?;
            }
        }
    }
    Ok(())
}

/// All ways the lhs matches pairwise-distinct elements, any positions.
fn oracle_match(
    rule: &OrientedRule,
    k: usize,
    remaining: &[GroundCondition],
    env: &BindingEnv,
    used: &mut Vec<usize>,
    out: &mut Vec<(BindingEnv, Vec<usize>)>,
) {
    if k == rule.lhs.len() {
        out.push((env.clone(), used.clone()));
        return;
    }
    for (idx, c) in remaining.iter().enumerate() {
        if used.contains(&idx) {
            continue;
        }
        if let Some(env2) = match_condition(&rule.lhs[k], c, env) {
            used.push(idx);
            oracle_match(rule, k + 1, remaining, &env2, used, out);
            used.pop();
        }
    }
}

/// Backtracking guard check, independent of the engine's evaluator: context
/// conditions consult the full input set, sort and subordination tests the
/// input vit and the hierarchy.
fn oracle_conds(
    v: &Vit,
    hierarchy: &SortHierarchy,
    conds: &[RuleCondition],
    i: usize,
    env: &BindingEnv,
) -> bool {
    if i == conds.len() {
        return true;
    }
    match &conds[i] {
        RuleCondition::ContextMatch(pat) => v.sem.iter().any(|c| {
            match_condition(pat, c, env)
                .map(|env2| oracle_conds(v, hierarchy, conds, i + 1, &env2))
                .unwrap_or(false)
        }),
        RuleCondition::ContextMatchAny(pats) => pats.iter().any(|pat| {
            v.sem.iter().any(|c| {
                match_condition(pat, c, env)
                    .map(|env2| oracle_conds(v, hierarchy, conds, i + 1, &env2))
                    .unwrap_or(false)
            })
        }),
        RuleCondition::SortTest {
            marker,
            sort,
            negated,
        } => {
            let passed = (|| {
                let m = env.get(marker)?.as_leaf()?;
                match v.sorts.get(m) {
                    Some(assigned) => {
                        let sub = hierarchy.subsumes(sort, assigned).ok()?;
                        Some(if *negated { !sub } else { sub })
                    }
                    None => {
                        if *negated {
                            Some(false)
                        } else {
                            hierarchy.subsumes(sort, &Symbol::new_unchecked(TOP)).ok()
                        }
                    }
                }
            })()
            .unwrap_or(false);
            passed && oracle_conds(v, hierarchy, conds, i + 1, env)
        }
        RuleCondition::SubordTest { lower, upper } => {
            let resolve = |side: &LabelRef| -> Option<Symbol> {
                match side {
                    LabelRef::Sym(s) => Some(s.clone()),
                    LabelRef::Var(var) => env.get(var)?.as_leaf().cloned(),
                }
            };
            let passed = match (resolve(lower), resolve(upper)) {
                (Some(lo), Some(hi)) => v.subordinated(&lo, &hi).unwrap_or(false),
                _ => false,
            };
            passed && oracle_conds(v, hierarchy, conds, i + 1, env)
        }
        _ => false,
    }
}
