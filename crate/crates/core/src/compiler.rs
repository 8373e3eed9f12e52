//! Compiles parsed rule modules into an executable, direction-oriented,
//! indexed, specificity-ordered program.
//!
//! Pipeline: expand classes, orient each rule for the requested direction,
//! sort each left-hand side into the canonical term order, rename variables
//! canonically (so alpha-equivalent prefixes merge), drop exact duplicates,
//! then index everything in a trie keyed by the first condition's
//! functor/arity with shared-prefix branches over the remaining conditions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::dsl::{
    class_table, expand_classes_with, ClassTable, DslError, HookArg, LabelRef, RuleCondition,
    RuleModule, TauOp, TransferRule,
};
use crate::sorts::SortHierarchy;
use crate::term::{
    skeleton_cmp, PatArg, PatternCondition, PatternLabel, PatternTerm, Symbol, VarName,
};

#[derive(Debug, Clone, Error)]
pub enum CompileError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("rule {rule}: orienting for {direction} leaves an empty left-hand side")]
    EmptyOrientedLhs { rule: String, direction: Direction },
    #[error("rule {rule}: unknown sort `{sort}` (not in the loaded hierarchy)")]
    UnknownSortInRule { rule: String, sort: Symbol },
    #[error("duplicate rule id `{0}` across loaded modules")]
    DuplicateRuleId(String),
    #[error("module `{module}` imports unknown module `{import}`")]
    UnknownImport { module: Symbol, import: Symbol },
    #[error("class `{0}` defined more than once across loaded modules")]
    DuplicateClass(Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Fwd,
    Bwd,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Fwd => write!(f, "fwd"),
            Direction::Bwd => write!(f, "bwd"),
        }
    }
}

// ---------------------------------------------------------------------------
// Specificity
// ---------------------------------------------------------------------------

/// Specificity key: longer left-hand sides win, then more instantiated ones,
/// then longer condition lists; file order breaks all remaining ties
/// (earlier is preferred). Greater means more specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecKey {
    pub lhs_len: usize,
    pub instantiation: usize,
    pub conds_len: usize,
    pub source_order: usize,
}

impl Ord for SpecKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lhs_len
            .cmp(&other.lhs_len)
            .then_with(|| self.instantiation.cmp(&other.instantiation))
            .then_with(|| self.conds_len.cmp(&other.conds_len))
            .then_with(|| other.source_order.cmp(&self.source_order))
    }
}

impl PartialOrd for SpecKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SpecKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.lhs_len, self.instantiation, self.conds_len
        )
    }
}

/// Compares two oriented rules by specificity; `Greater` means `a` is
/// preferred over `b`.
pub fn specificity_compare(a: &OrientedRule, b: &OrientedRule) -> Ordering {
    a.spec.cmp(&b.spec)
}

// ---------------------------------------------------------------------------
// Oriented rules
// ---------------------------------------------------------------------------

/// A rule oriented for one direction: canonically sorted and renamed
/// left-hand side, guards, right-hand side and equality bindings.
#[derive(Debug, Clone)]
pub struct OrientedRule {
    pub origin: String,
    pub lhs: Vec<PatternCondition>,
    pub conds: Vec<RuleCondition>,
    pub rhs: Vec<PatternCondition>,
    pub eqs: Vec<(VarName, VarName)>,
    pub spec: SpecKey,
    /// canonical variable -> the name the rule author wrote
    pub var_names: BTreeMap<VarName, VarName>,
}

impl OrientedRule {
    pub fn index_key(&self) -> IndexKey {
        let first = &self.lhs[0];
        IndexKey {
            functor: first.functor().clone(),
            arity: first.arity(),
        }
    }

    /// Maps a canonical variable back to its source name for traces.
    pub fn original_name<'a>(&'a self, canonical: &'a VarName) -> &'a VarName {
        self.var_names.get(canonical).unwrap_or(canonical)
    }
}

/// Orients a parsed rule for a direction. Returns `Ok(None)` when the rule's
/// operator excludes the direction. Backward orientation swaps the semantic
/// sides; guards stay guards, and target-side eq bindings become guard-side
/// equality conditions (they must be resolved before instantiation).
pub fn orient(
    rule: &TransferRule,
    direction: Direction,
) -> Result<Option<OrientedRule>, CompileError> {
    let applies = matches!(
        (direction, rule.op),
        (Direction::Fwd, TauOp::Bidir | TauOp::Fwd) | (Direction::Bwd, TauOp::Bidir | TauOp::Bwd)
    );
    if !applies {
        return Ok(None);
    }
    let (mut lhs, rhs, conds, eqs) = match direction {
        Direction::Fwd => (
            rule.sl_sem.clone(),
            rule.tl_sem.clone(),
            rule.sl_conds.clone(),
            rule.tl_eqs.clone(),
        ),
        Direction::Bwd => {
            let mut conds = rule.sl_conds.clone();
            conds.extend(
                rule.tl_eqs
                    .iter()
                    .map(|(a, b)| RuleCondition::EqBind(a.clone(), b.clone())),
            );
            (rule.tl_sem.clone(), rule.sl_sem.clone(), conds, Vec::new())
        }
    };
    if lhs.is_empty() {
        return Err(CompileError::EmptyOrientedLhs {
            rule: rule.id.clone(),
            direction,
        });
    }
    lhs.sort_by(skeleton_cmp);

    let mut renamer = Renamer::default();
    let lhs: Vec<PatternCondition> = lhs.iter().map(|p| renamer.condition(p)).collect();
    let conds: Vec<RuleCondition> = conds.iter().map(|c| renamer.rule_condition(c)).collect();
    let rhs: Vec<PatternCondition> = rhs.iter().map(|p| renamer.condition(p)).collect();
    let eqs: Vec<(VarName, VarName)> = eqs
        .iter()
        .map(|(a, b)| (renamer.var(a), renamer.var(b)))
        .collect();

    let spec = SpecKey {
        lhs_len: lhs.len(),
        instantiation: lhs.iter().map(instantiation_count).sum(),
        conds_len: conds.len(),
        source_order: rule.source_order,
    };
    let var_names = renamer
        .map
        .into_iter()
        .map(|(orig, canon)| (canon, orig))
        .collect();
    Ok(Some(OrientedRule {
        origin: rule.id.clone(),
        lhs,
        conds,
        rhs,
        eqs,
        spec,
        var_names,
    }))
}

/// Count of non-variable symbol occurrences: the "more instantiated"
/// measure.
fn instantiation_count(p: &PatternCondition) -> usize {
    fn term(t: &PatternTerm) -> usize {
        1 + t
            .args
            .iter()
            .map(|a| match a {
                PatArg::Var(_) => 0,
                PatArg::Term(t) => term(t),
            })
            .sum::<usize>()
    }
    let label = match &p.label {
        PatternLabel::Sym(_) => 1,
        PatternLabel::Var(_) => 0,
    };
    label + term(&p.body)
}

/// Consistent first-occurrence variable renaming (V1, V2, ...), applied over
/// sorted lhs, then conds, then rhs, then eqs. Alpha-equivalent rules rename
/// to identical forms, which is what trie prefix sharing and duplicate
/// detection compare.
#[derive(Default)]
struct Renamer {
    map: BTreeMap<VarName, VarName>,
    count: usize,
}

impl Renamer {
    fn var(&mut self, v: &VarName) -> VarName {
        if let Some(c) = self.map.get(v) {
            return c.clone();
        }
        self.count += 1;
        let c = VarName::new(format!("V{}", self.count)).expect("canonical name");
        self.map.insert(v.clone(), c.clone());
        c
    }

    fn condition(&mut self, p: &PatternCondition) -> PatternCondition {
        PatternCondition {
            label: match &p.label {
                PatternLabel::Sym(s) => PatternLabel::Sym(s.clone()),
                PatternLabel::Var(v) => PatternLabel::Var(self.var(v)),
            },
            body: self.term(&p.body),
        }
    }

    fn term(&mut self, t: &PatternTerm) -> PatternTerm {
        PatternTerm {
            functor: t.functor.clone(),
            args: t
                .args
                .iter()
                .map(|a| match a {
                    PatArg::Var(v) => PatArg::Var(self.var(v)),
                    PatArg::Term(t) => PatArg::Term(self.term(t)),
                })
                .collect(),
        }
    }

    fn rule_condition(&mut self, c: &RuleCondition) -> RuleCondition {
        match c {
            RuleCondition::ContextMatch(p) => RuleCondition::ContextMatch(self.condition(p)),
            RuleCondition::ContextMatchAny(ps) => {
                // alternatives share variables; renaming each in sequence keeps
                // the shared names consistent
                RuleCondition::ContextMatchAny(ps.iter().map(|p| self.condition(p)).collect())
            }
            RuleCondition::SortTest {
                marker,
                sort,
                negated,
            } => RuleCondition::SortTest {
                marker: self.var(marker),
                sort: sort.clone(),
                negated: *negated,
            },
            RuleCondition::SubordTest { lower, upper } => RuleCondition::SubordTest {
                lower: self.label_ref(lower),
                upper: self.label_ref(upper),
            },
            RuleCondition::EqBind(a, b) => RuleCondition::EqBind(self.var(a), self.var(b)),
            RuleCondition::HookCall { name, args } => RuleCondition::HookCall {
                name: name.clone(),
                args: args
                    .iter()
                    .map(|a| match a {
                        HookArg::Var(v) => HookArg::Var(self.var(v)),
                        HookArg::Ground(g) => HookArg::Ground(g.clone()),
                    })
                    .collect(),
            },
        }
    }

    fn label_ref(&mut self, l: &LabelRef) -> LabelRef {
        match l {
            LabelRef::Var(v) => LabelRef::Var(self.var(v)),
            LabelRef::Sym(s) => LabelRef::Sym(s.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Trie
// ---------------------------------------------------------------------------

/// Index key: functor and arity of the first condition of a sorted lhs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexKey {
    pub functor: Symbol,
    pub arity: usize,
}

impl fmt::Display for IndexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.functor, self.arity)
    }
}

/// Trie node: shared-prefix branches over successive lhs conditions, plus
/// the rules whose lhs ends here.
#[derive(Debug, Clone, Default)]
pub struct TrieNode {
    branches: Vec<(PatternCondition, TrieNode)>,
    leaves: Vec<Arc<OrientedRule>>,
    best: Option<SpecKey>,
}

impl TrieNode {
    pub fn branches(&self) -> &[(PatternCondition, TrieNode)] {
        &self.branches
    }

    pub fn leaves(&self) -> &[Arc<OrientedRule>] {
        &self.leaves
    }

    /// Most specific key anywhere in this subtree.
    pub fn best_key(&self) -> Option<SpecKey> {
        self.best
    }

    fn insert(&mut self, rule: Arc<OrientedRule>, depth: usize) {
        if depth == rule.lhs.len() {
            self.leaves.push(rule);
            return;
        }
        let pat = &rule.lhs[depth];
        if let Some(entry) = self.branches.iter_mut().find(|(p, _)| p == pat) {
            entry.1.insert(rule, depth + 1);
        } else {
            let mut child = TrieNode::default();
            let pat = pat.clone();
            child.insert(rule, depth + 1);
            self.branches.push((pat, child));
        }
    }

    fn finalize(&mut self) -> Option<SpecKey> {
        self.leaves.sort_by_key(|r| std::cmp::Reverse(r.spec));
        let mut best = self.leaves.first().map(|r| r.spec);
        for (_, child) in &mut self.branches {
            let child_best = child.finalize();
            best = match (best, child_best) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
        // deeper leaves always have longer lhs, hence outrank local leaves;
        // among siblings the subtree's best key decides
        self.branches
            .sort_by(|(_, x), (_, y)| y.best.cmp(&x.best).then(Ordering::Equal));
        self.best = best;
        best
    }

    /// Candidate enumeration order: branches first (longer lhs is always more
    /// specific), each in best-key order, then local leaves.
    pub fn for_each_rule<'a>(&'a self, f: &mut impl FnMut(&'a Arc<OrientedRule>)) {
        for (_, child) in &self.branches {
            child.for_each_rule(f);
        }
        for leaf in &self.leaves {
            f(leaf);
        }
    }
}

/// First-condition index over prefix-sharing tries.
#[derive(Debug, Clone, Default)]
pub struct RuleTrie {
    index: BTreeMap<IndexKey, TrieNode>,
}

impl RuleTrie {
    pub fn node(&self, key: &IndexKey) -> Option<&TrieNode> {
        self.index.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &IndexKey> {
        self.index.keys()
    }

    pub fn key_count(&self) -> usize {
        self.index.len()
    }

    pub fn for_each_rule<'a>(&'a self, f: &mut impl FnMut(&'a Arc<OrientedRule>)) {
        for node in self.index.values() {
            node.for_each_rule(f);
        }
    }

    fn insert(&mut self, rule: Arc<OrientedRule>) {
        self.index
            .entry(rule.index_key())
            .or_default()
            .insert(rule, 0);
    }

    fn finalize(&mut self) {
        for node in self.index.values_mut() {
            node.finalize();
        }
    }
}

/// The executable program: an oriented, reduced, indexed rule set.
#[derive(Debug, Clone)]
pub struct CompiledRuleSet {
    pub direction: Direction,
    pub trie: RuleTrie,
    /// The compiled rules in global source order (same objects the trie
    /// holds).
    pub rules: Vec<Arc<OrientedRule>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CompiledRuleSet {
    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn index_key_count(&self) -> usize {
        self.trie.key_count()
    }

    /// Deterministic one-line-per-node listing of the trie.
    pub fn dump_trie(&self) -> String {
        let mut out = format!(
            "trie direction={} rules={} keys={}\n",
            self.direction,
            self.rules.len(),
            self.trie.key_count()
        );
        for (key, node) in &self.trie.index {
            out.push_str(&format!("index {key}\n"));
            dump_node(node, 1, &mut out);
        }
        out
    }
}

fn dump_node(node: &TrieNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for leaf in &node.leaves {
        let rhs: Vec<String> = leaf.rhs.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!(
            "{pad}leaf {} spec={} src={} rhs=[{}]",
            leaf.origin,
            leaf.spec,
            leaf.spec.source_order,
            rhs.join(", ")
        ));
        if !leaf.conds.is_empty() {
            let conds: Vec<String> = leaf.conds.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(" conds=[{}]", conds.join(", ")));
        }
        if !leaf.eqs.is_empty() {
            let eqs: Vec<String> = leaf
                .eqs
                .iter()
                .map(|(a, b)| format!("eq({a},{b})"))
                .collect();
            out.push_str(&format!(" eqs=[{}]", eqs.join(", ")));
        }
        out.push('\n');
    }
    for (pat, child) in &node.branches {
        out.push_str(&format!("{pad}pat {pat}\n"));
        dump_node(child, depth + 1, out);
    }
}

// ---------------------------------------------------------------------------
// compile
// ---------------------------------------------------------------------------

pub fn compile(
    modules: &[RuleModule],
    direction: Direction,
    hierarchy: &SortHierarchy,
) -> Result<CompiledRuleSet, CompileError> {
    let mut diagnostics = Vec::new();

    // rule ids must be unique across the loaded set
    let mut ids: HashMap<&str, ()> = HashMap::new();
    for m in modules {
        for r in &m.rules {
            if ids.insert(r.id.as_str(), ()).is_some() {
                return Err(CompileError::DuplicateRuleId(r.id.clone()));
            }
        }
    }

    // imports must name loaded modules
    let names: Vec<&Symbol> = modules.iter().map(|m| &m.name).collect();
    for m in modules {
        for imp in &m.imports {
            if !names.contains(&imp) {
                return Err(CompileError::UnknownImport {
                    module: m.name.clone(),
                    import: imp.clone(),
                });
            }
        }
    }

    // one global class table
    let mut table: ClassTable = ClassTable::new();
    for m in modules {
        for (name, members) in class_table(&m.classes) {
            if table.insert(name.clone(), members).is_some() {
                return Err(CompileError::DuplicateClass(name));
            }
        }
    }

    // expand, orient, renumber globally
    let mut oriented: Vec<OrientedRule> = Vec::new();
    let mut global_order = 0usize;
    for m in modules {
        let expanded = expand_classes_with(m, &table)?;
        for rule in &expanded.rules {
            global_order += 1;
            let mut rule = rule.clone();
            rule.source_order = global_order;
            if let Some(or) = orient(&rule, direction)? {
                oriented.push(or);
            }
        }
    }

    // uniqueness reduction over the canonical (alpha-renamed) form
    type CanonKey = (
        Vec<PatternCondition>,
        Vec<RuleCondition>,
        Vec<PatternCondition>,
        Vec<(VarName, VarName)>,
    );
    let mut seen: HashMap<CanonKey, String> = HashMap::new();
    let mut kept: Vec<Arc<OrientedRule>> = Vec::new();
    for or in oriented {
        let key: CanonKey = (
            or.lhs.clone(),
            or.conds.clone(),
            or.rhs.clone(),
            or.eqs.clone(),
        );
        match seen.get(&key) {
            Some(earlier) => diagnostics.push(Diagnostic::warning(
                None,
                format!(
                    "rule {} duplicates rule {earlier}; reduced to one",
                    or.origin
                ),
            )),
            None => {
                seen.insert(key, or.origin.clone());
                kept.push(Arc::new(or));
            }
        }
    }

    // every sort a guard mentions must exist in the hierarchy
    for rule in &kept {
        for cond in &rule.conds {
            if let RuleCondition::SortTest { sort, .. } = cond {
                if !hierarchy.contains(sort) {
                    return Err(CompileError::UnknownSortInRule {
                        rule: rule.origin.clone(),
                        sort: sort.clone(),
                    });
                }
            }
        }
    }

    let mut trie = RuleTrie::default();
    for rule in &kept {
        trie.insert(rule.clone());
    }
    trie.finalize();

    Ok(CompiledRuleSet {
        direction,
        trie,
        rules: kept,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_rule_file;
    use crate::term::testutil::{pc, sym};

    fn demo_subset() -> RuleModule {
        let text = r#"
            module de_en.
            [L:echt(I)] <-> [L:real(I)].
            [L:passen(E), L:arg3(E, Y), L1:bei(E, X)] <-> [L:suit(E), L:arg3(E, Y), L:arg2(E, X)].
            [L:passen(E), L1:bei(E, X)] <-> [L:suit(E), L:arg2(E, X)].
            [L:schlecht(E)], [L1:passen(E)] <-> [L:neg(A), A:good(E)].
            [L:schlecht(E)] <-> [L:bad(E)].
            [L:passen(E)] <-> [L:suit(E)].
        "#;
        parse_rule_file(text).unwrap().0
    }

    fn compile_one(text: &str, dir: Direction) -> Result<CompiledRuleSet, CompileError> {
        let (m, _) = parse_rule_file(text).unwrap();
        compile(&[m], dir, &SortHierarchy::top_only())
    }

    #[test]
    fn orient_backward_swaps_sides() {
        let (m, _) = parse_rule_file("[L:echt(I)] <-> [L:real(I)].").unwrap();
        let or = orient(&m.rules[0], Direction::Bwd).unwrap().unwrap();
        assert_eq!(or.lhs, vec![pc("V1:real(V2)")]);
        assert_eq!(or.rhs, vec![pc("V1:echt(V2)")]);
        // original names preserved for traces
        assert_eq!(
            or.original_name(&crate::term::testutil::var("V1")).as_str(),
            "L"
        );
    }

    #[test]
    fn orient_skips_excluded_direction() {
        let (m, _) = parse_rule_file("[L:a(X)] -> [L:b(X)].").unwrap();
        assert!(orient(&m.rules[0], Direction::Bwd).unwrap().is_none());
        assert!(orient(&m.rules[0], Direction::Fwd).unwrap().is_some());
    }

    #[test]
    fn orient_keeps_guards() {
        let (m, _) =
            parse_rule_file("[L:termin(I)], [L1:date_verbs(E), L1:arg3(E, I)] -> [L:date(I)].")
                .unwrap();
        let or = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        assert_eq!(or.conds.len(), 2);
    }

    #[test]
    fn orient_empty_lhs_is_an_error() {
        let (m, _) = parse_rule_file("[L:gone(X)] <-> [].").unwrap();
        assert!(orient(&m.rules[0], Direction::Fwd).unwrap().is_some());
        assert!(matches!(
            orient(&m.rules[0], Direction::Bwd),
            Err(CompileError::EmptyOrientedLhs { .. })
        ));
    }

    #[test]
    fn lhs_is_sorted_canonically() {
        let (m, _) =
            parse_rule_file("[L:passen(E), L:arg3(E, Y), L1:bei(E, X)] <-> [L:suit(E)].").unwrap();
        let or = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        let functors: Vec<&str> = or.lhs.iter().map(|p| p.functor().as_str()).collect();
        assert_eq!(functors, vec!["arg3", "bei", "passen"]);
    }

    #[test]
    fn specificity_prefers_longer_lhs() {
        // rule (4) [2 lhs conditions] vs rule (6b) [1 lhs condition]
        let (m, _) = parse_rule_file(
            "[L:passen(E), L1:bei(E, X)] <-> [L:suit(E), L:arg2(E, X)].\n[L:passen(E)] <-> [L:suit(E)].",
        )
        .unwrap();
        let a = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        let b = orient(&m.rules[1], Direction::Fwd).unwrap().unwrap();
        assert_eq!(specificity_compare(&a, &b), Ordering::Greater);
    }

    #[test]
    fn specificity_prefers_more_conditions() {
        // (5a) [1 cond + 1 guard] vs (5b) [1 cond, no guard]
        let (m, _) = parse_rule_file(
            "[L:schlecht(E)], [L1:passen(E)] <-> [L:neg(A), A:good(E)].\n[L:schlecht(E)] <-> [L:bad(E)].",
        )
        .unwrap();
        let a = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        let b = orient(&m.rules[1], Direction::Fwd).unwrap().unwrap();
        assert_eq!(specificity_compare(&a, &b), Ordering::Greater);
    }

    #[test]
    fn specificity_prefers_more_instantiated() {
        let (m, _) = parse_rule_file("[L:f(a)] -> [L:g(a)].\n[L:f(X)] -> [L:h(X)].").unwrap();
        let a = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        let b = orient(&m.rules[1], Direction::Fwd).unwrap().unwrap();
        assert_eq!(specificity_compare(&a, &b), Ordering::Greater);
    }

    #[test]
    fn specificity_tie_breaks_on_file_order() {
        let (m, _) = parse_rule_file("[L:f(X)] -> [L:g(X)].\n[L:f(Y)] -> [L:h(Y)].").unwrap();
        let a = orient(&m.rules[0], Direction::Fwd).unwrap().unwrap();
        let b = orient(&m.rules[1], Direction::Fwd).unwrap().unwrap();
        assert_eq!(specificity_compare(&a, &b), Ordering::Greater);
    }

    #[test]
    fn demo_subset_index_keys() {
        // first conditions of the hand-sorted lhs sides:
        // (2) echt/1, (3) arg3/2, (4) bei/2, (5a)+(5b) schlecht/1, (6b) passen/1
        let compiled =
            compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        let keys: Vec<String> = compiled.trie.keys().map(|k| k.to_string()).collect();
        assert_eq!(
            keys,
            vec!["arg3/2", "bei/2", "echt/1", "passen/1", "schlecht/1"]
        );
    }

    #[test]
    fn duplicate_rules_reduce_to_one_leaf_with_warning() {
        let compiled = compile_one(
            "[L:echt(I)] <-> [L:real(I)].\n[L:echt(I)] <-> [L:real(I)].",
            Direction::Fwd,
        )
        .unwrap();
        assert_eq!(compiled.rule_count(), 1);
        assert!(compiled
            .diagnostics
            .iter()
            .any(|d| d.message.contains("duplicates")));
        // alpha-equivalent duplicates reduce too
        let compiled = compile_one(
            "[L:echt(I)] <-> [L:real(I)].\n[H:echt(J)] <-> [H:real(J)].",
            Direction::Fwd,
        )
        .unwrap();
        assert_eq!(compiled.rule_count(), 1);
    }

    #[test]
    fn same_lhs_different_rhs_both_survive() {
        let compiled = compile_one(
            "[L:f(X)] -> [L:g(X)].\n[L:f(X)] -> [L:h(X)].",
            Direction::Fwd,
        )
        .unwrap();
        assert_eq!(compiled.rule_count(), 2);
        assert!(compiled.diagnostics.is_empty());
    }

    #[test]
    fn zero_rules_is_valid() {
        let compiled = compile_one("% nothing\n", Direction::Fwd).unwrap();
        assert_eq!(compiled.rule_count(), 0);
        assert_eq!(compiled.index_key_count(), 0);
    }

    #[test]
    fn unknown_sort_in_rule_is_an_error() {
        let err = compile_one(
            "[L:termin(I)], [sort(I)=< ~temp_point] <-> [L:date(I)].",
            Direction::Fwd,
        )
        .unwrap_err();
        assert!(
            matches!(err, CompileError::UnknownSortInRule { .. }),
            "{err}"
        );
    }

    #[test]
    fn duplicate_rule_ids_rejected() {
        let (m1, _) = parse_rule_file("[L:a(X)] -> [L:b(X)].").unwrap();
        let (m2, _) = parse_rule_file("[L:c(X)] -> [L:d(X)].").unwrap();
        // both default to module `main`, so both contain main:r1
        let err = compile(&[m1, m2], Direction::Fwd, &SortHierarchy::top_only()).unwrap_err();
        assert!(matches!(err, CompileError::DuplicateRuleId(_)), "{err}");
    }

    #[test]
    fn unknown_import_rejected() {
        let (m, _) = parse_rule_file("module a.\nimport ghost.\n[L:a(X)] -> [L:b(X)].").unwrap();
        let err = compile(&[m], Direction::Fwd, &SortHierarchy::top_only()).unwrap_err();
        assert!(matches!(err, CompileError::UnknownImport { .. }), "{err}");
    }

    #[test]
    fn trie_walk_enumerates_exactly_the_compiled_set() {
        let compiled =
            compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        let mut walked = Vec::new();
        compiled
            .trie
            .for_each_rule(&mut |r| walked.push(r.origin.clone()));
        let mut expected: Vec<String> = compiled.rules.iter().map(|r| r.origin.clone()).collect();
        walked.sort();
        expected.sort();
        assert_eq!(walked, expected);
    }

    #[test]
    fn branches_and_leaves_are_specificity_ordered() {
        let compiled =
            compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        fn check(node: &TrieNode) {
            for pair in node.leaves().windows(2) {
                assert!(pair[0].spec >= pair[1].spec);
            }
            for pair in node.branches().windows(2) {
                assert!(pair[0].1.best_key() >= pair[1].1.best_key());
            }
            for (_, child) in node.branches() {
                check(child);
            }
        }
        for key in compiled.trie.keys() {
            check(compiled.trie.node(key).unwrap());
        }
    }

    #[test]
    fn prefix_sharing_merges_common_lhs_prefixes() {
        // (3) and (4) share nothing (arg3 vs bei first), but backwards both
        // start with arg2; their shared prefix must be a single branch
        let compiled =
            compile(&[demo_subset()], Direction::Bwd, &SortHierarchy::top_only()).unwrap();
        let node = compiled
            .trie
            .node(&IndexKey {
                functor: sym("arg2"),
                arity: 2,
            })
            .expect("arg2 node");
        assert_eq!(node.branches().len(), 1, "shared first condition");
    }

    #[test]
    fn compilation_is_deterministic() {
        let a = compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        let b = compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        assert_eq!(a.dump_trie(), b.dump_trie());
    }

    #[test]
    fn dump_lists_every_rule_once() {
        let compiled =
            compile(&[demo_subset()], Direction::Fwd, &SortHierarchy::top_only()).unwrap();
        let dump = compiled.dump_trie();
        for rule in &compiled.rules {
            assert_eq!(
                dump.matches(&format!("leaf {} ", rule.origin)).count(),
                1,
                "{dump}"
            );
        }
    }
}
