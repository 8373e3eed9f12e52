//! Ground terms, pattern terms, the canonical term order, one-way matching
//! and instantiation.
//!
//! Everything semantic in this crate is built from labeled conditions like
//! `l1:echt(l2)`: a label constant, a functor and ground arguments. Rules use
//! pattern conditions (`L:echt(I)`) whose variables bind to ground subterms by
//! one-way matching; skolemized input never contains variables, so matching
//! suffices and full unification is never needed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("invalid symbol `{0}` (want [a-z][a-zA-Z0-9_]*)")]
    InvalidSymbol(String),
    #[error("invalid variable `{0}` (want [A-Z][a-zA-Z0-9_]*)")]
    InvalidVariable(String),
    #[error("variable `{0}` bound to compound term `{1}` cannot be used as a label")]
    NonLeafLabel(String, String),
}

/// A lowercase-initial constant name: predicate functors, label constants
/// (`l1`), marker constants (`i1`), sort names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Result<Self, TermError> {
        let name = name.into();
        if is_valid_symbol(&name) {
            Ok(Symbol(name))
        } else {
            Err(TermError::InvalidSymbol(name))
        }
    }

    /// For callers that already hold a lexed identifier.
    pub(crate) fn new_unchecked(name: impl Into<String>) -> Self {
        Symbol(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An uppercase-initial rule variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Result<Self, TermError> {
        let name = name.into();
        if is_valid_variable(&name) {
            Ok(VarName(name))
        } else {
            Err(TermError::InvalidVariable(name))
        }
    }

    pub(crate) fn new_unchecked(name: impl Into<String>) -> Self {
        VarName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_valid_variable(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------------------
// Ground terms
// ---------------------------------------------------------------------------

/// A fully ground term: functor plus ground arguments. Arity-0 terms are
/// constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundTerm {
    pub functor: Symbol,
    pub args: Vec<GroundTerm>,
}

impl GroundTerm {
    pub fn leaf(functor: Symbol) -> Self {
        GroundTerm {
            functor,
            args: Vec::new(),
        }
    }

    pub fn new(functor: Symbol, args: Vec<GroundTerm>) -> Self {
        GroundTerm { functor, args }
    }

    pub fn is_leaf(&self) -> bool {
        self.args.is_empty()
    }

    /// The functor when this term is a constant.
    pub fn as_leaf(&self) -> Option<&Symbol> {
        if self.args.is_empty() {
            Some(&self.functor)
        } else {
            None
        }
    }
}

/// The canonical total term order: lexicographic on functor name, then
/// arity, then arguments left to right.
impl Ord for GroundTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.functor
            .cmp(&other.functor)
            .then_with(|| self.args.len().cmp(&other.args.len()))
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for GroundTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.functor)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A ground labeled condition, `label:body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundCondition {
    pub label: Symbol,
    pub body: GroundTerm,
}

impl GroundCondition {
    pub fn new(label: Symbol, body: GroundTerm) -> Self {
        GroundCondition { label, body }
    }

    pub fn functor(&self) -> &Symbol {
        &self.body.functor
    }

    pub fn arity(&self) -> usize {
        self.body.args.len()
    }
}

/// Conditions compare body first, then label, so the sort (and with it rule
/// indexing) keys on the semantic predicate rather than the skolem label.
impl Ord for GroundCondition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.body
            .cmp(&other.body)
            .then_with(|| self.label.cmp(&other.label))
    }
}

impl PartialOrd for GroundCondition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroundCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.body)
    }
}

// ---------------------------------------------------------------------------
// Pattern terms
// ---------------------------------------------------------------------------

/// Argument of a pattern term: a variable or a nested pattern term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatArg {
    Var(VarName),
    Term(PatternTerm),
}

impl fmt::Display for PatArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatArg::Var(v) => write!(f, "{v}"),
            PatArg::Term(t) => write!(f, "{t}"),
        }
    }
}

/// A term pattern. The functor position is never a variable; that is what
/// makes first-argument indexing possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternTerm {
    pub functor: Symbol,
    pub args: Vec<PatArg>,
}

impl PatternTerm {
    pub fn leaf(functor: Symbol) -> Self {
        PatternTerm {
            functor,
            args: Vec::new(),
        }
    }

    pub fn from_ground(t: &GroundTerm) -> Self {
        PatternTerm {
            functor: t.functor.clone(),
            args: t
                .args
                .iter()
                .map(|a| PatArg::Term(Self::from_ground(a)))
                .collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| match a {
            PatArg::Var(_) => false,
            PatArg::Term(t) => t.is_ground(),
        })
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.functor)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Label slot of a pattern condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternLabel {
    Sym(Symbol),
    Var(VarName),
}

impl fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternLabel::Sym(s) => write!(f, "{s}"),
            PatternLabel::Var(v) => write!(f, "{v}"),
        }
    }
}

/// A condition pattern, `L:functor(args...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternCondition {
    pub label: PatternLabel,
    pub body: PatternTerm,
}

impl PatternCondition {
    pub fn from_ground(c: &GroundCondition) -> Self {
        PatternCondition {
            label: PatternLabel::Sym(c.label.clone()),
            body: PatternTerm::from_ground(&c.body),
        }
    }

    pub fn functor(&self) -> &Symbol {
        &self.body.functor
    }

    pub fn arity(&self) -> usize {
        self.body.args.len()
    }

    pub fn to_ground(&self) -> Option<GroundCondition> {
        fn term(t: &PatternTerm) -> Option<GroundTerm> {
            let mut args = Vec::with_capacity(t.args.len());
            for a in &t.args {
                match a {
                    PatArg::Var(_) => return None,
                    PatArg::Term(t) => args.push(term(t)?),
                }
            }
            Some(GroundTerm::new(t.functor.clone(), args))
        }
        let label = match &self.label {
            PatternLabel::Sym(s) => s.clone(),
            PatternLabel::Var(_) => return None,
        };
        Some(GroundCondition::new(label, term(&self.body)?))
    }

    /// All variables, in left-to-right first-occurrence order.
    pub fn variables(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    pub(crate) fn collect_variables(&self, out: &mut Vec<VarName>) {
        if let PatternLabel::Var(v) = &self.label {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        fn walk(t: &PatternTerm, out: &mut Vec<VarName>) {
            for a in &t.args {
                match a {
                    PatArg::Var(v) => {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                    PatArg::Term(t) => walk(t, out),
                }
            }
        }
        walk(&self.body, out);
    }
}

impl fmt::Display for PatternCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.body)
    }
}

/// Skeleton order on pattern conditions: the canonical term order with
/// variables as a minimal element at their position. Used to sort rule
/// left-hand sides into the same order the input set is kept in.
pub fn skeleton_cmp(a: &PatternCondition, b: &PatternCondition) -> Ordering {
    skeleton_cmp_term(&a.body, &b.body).then_with(|| match (&a.label, &b.label) {
        (PatternLabel::Var(_), PatternLabel::Var(_)) => Ordering::Equal,
        (PatternLabel::Var(_), PatternLabel::Sym(_)) => Ordering::Less,
        (PatternLabel::Sym(_), PatternLabel::Var(_)) => Ordering::Greater,
        (PatternLabel::Sym(x), PatternLabel::Sym(y)) => x.cmp(y),
    })
}

fn skeleton_cmp_term(a: &PatternTerm, b: &PatternTerm) -> Ordering {
    a.functor
        .cmp(&b.functor)
        .then_with(|| a.args.len().cmp(&b.args.len()))
        .then_with(|| {
            for (x, y) in a.args.iter().zip(&b.args) {
                let ord = match (x, y) {
                    (PatArg::Var(_), PatArg::Var(_)) => Ordering::Equal,
                    (PatArg::Var(_), PatArg::Term(_)) => Ordering::Less,
                    (PatArg::Term(_), PatArg::Var(_)) => Ordering::Greater,
                    (PatArg::Term(s), PatArg::Term(t)) => skeleton_cmp_term(s, t),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
}

// ---------------------------------------------------------------------------
// Bindings, matching, instantiation
// ---------------------------------------------------------------------------

/// A functional variable environment: bindings are only ever extended, never
/// overwritten.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BindingEnv(BTreeMap<VarName, GroundTerm>);

impl BindingEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &VarName) -> Option<&GroundTerm> {
        self.0.get(var)
    }

    /// Extends the environment; a variable already bound must be bound to an
    /// identical term. Returns false on conflict.
    pub fn bind(&mut self, var: VarName, term: GroundTerm) -> bool {
        match self.0.get(&var) {
            Some(existing) => *existing == term,
            None => {
                self.0.insert(var, term);
                true
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &GroundTerm)> {
        self.0.iter()
    }
}

impl fmt::Display for BindingEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}={t}")?;
        }
        write!(f, "}}")
    }
}

/// One-way match of a pattern condition against a ground condition under an
/// existing environment. Returns the extended environment, or `None`; failure
/// is a normal outcome. The subject is never modified.
pub fn match_condition(
    pat: &PatternCondition,
    subject: &GroundCondition,
    env: &BindingEnv,
) -> Option<BindingEnv> {
    let mut env = env.clone();
    if !match_term(&pat.body, &subject.body, &mut env) {
        return None;
    }
    match &pat.label {
        PatternLabel::Sym(s) => {
            if *s != subject.label {
                return None;
            }
        }
        PatternLabel::Var(v) => {
            if !env.bind(v.clone(), GroundTerm::leaf(subject.label.clone())) {
                return None;
            }
        }
    }
    Some(env)
}

fn match_term(pat: &PatternTerm, subject: &GroundTerm, env: &mut BindingEnv) -> bool {
    if pat.functor != subject.functor || pat.args.len() != subject.args.len() {
        return false;
    }
    for (p, s) in pat.args.iter().zip(&subject.args) {
        let ok = match p {
            PatArg::Var(v) => env.bind(v.clone(), s.clone()),
            PatArg::Term(t) => match_term(t, s, env),
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Deterministic generator for fresh constants (`t1`, `t2`, ...). Confined to
/// a single derivation; the `t<digits>` namespace is reserved and rejected in
/// parsed input, so generated constants can never collide with skolem
/// constants from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshGen {
    next: u64,
}

impl FreshGen {
    pub fn new() -> Self {
        FreshGen { next: 1 }
    }

    pub fn fresh(&mut self) -> Symbol {
        let s = Symbol::new_unchecked(format!("t{}", self.next));
        self.next += 1;
        s
    }

    /// Number of constants handed out so far.
    pub fn consumed(&self) -> u64 {
        self.next - 1
    }
}

impl Default for FreshGen {
    fn default() -> Self {
        Self::new()
    }
}

/// True for constants in the reserved fresh namespace (`t` + digits).
pub fn is_reserved_fresh(sym: &Symbol) -> bool {
    let s = sym.as_str();
    let mut chars = s.chars();
    chars.next() == Some('t') && s.len() > 1 && chars.all(|c| c.is_ascii_digit())
}

/// Instantiates a pattern under `env`, drawing fresh constants for unbound
/// variables. The environment is extended with those fresh bindings, so the
/// same unbound variable maps to the same constant across the conditions of
/// one rule application.
pub fn instantiate_condition(
    pat: &PatternCondition,
    env: &mut BindingEnv,
    fresh: &mut FreshGen,
) -> Result<GroundCondition, TermError> {
    let label = match &pat.label {
        PatternLabel::Sym(s) => s.clone(),
        PatternLabel::Var(v) => {
            let t = lookup_or_fresh(v, env, fresh);
            match t.as_leaf() {
                Some(s) => s.clone(),
                None => return Err(TermError::NonLeafLabel(v.to_string(), t.to_string())),
            }
        }
    };
    let body = instantiate_term(&pat.body, env, fresh);
    Ok(GroundCondition::new(label, body))
}

pub fn instantiate_term(
    pat: &PatternTerm,
    env: &mut BindingEnv,
    fresh: &mut FreshGen,
) -> GroundTerm {
    let args = pat
        .args
        .iter()
        .map(|a| match a {
            PatArg::Var(v) => lookup_or_fresh(v, env, fresh),
            PatArg::Term(t) => instantiate_term(t, env, fresh),
        })
        .collect();
    GroundTerm::new(pat.functor.clone(), args)
}

fn lookup_or_fresh(v: &VarName, env: &mut BindingEnv, fresh: &mut FreshGen) -> GroundTerm {
    if let Some(t) = env.get(v) {
        return t.clone();
    }
    let t = GroundTerm::leaf(fresh.fresh());
    env.bind(v.clone(), t.clone());
    t
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::syntax::{parse_pattern_condition, TokStream};

    /// Parses `l1:f(a,b)` style text into a ground condition.
    pub fn gc(text: &str) -> GroundCondition {
        pc(text).to_ground().expect("condition not ground")
    }

    /// Parses pattern condition text.
    pub fn pc(text: &str) -> PatternCondition {
        let mut ts = TokStream::new(text).unwrap();
        let (_, c) = parse_pattern_condition(&mut ts).unwrap();
        assert!(ts.at_end(), "trailing tokens in {text:?}");
        c
    }

    pub fn sym(s: &str) -> Symbol {
        Symbol::new(s).unwrap()
    }

    pub fn var(s: &str) -> VarName {
        VarName::new(s).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compare_is_reflexive() {
        let a = gc("l1:echt(i1)");
        assert_eq!(a.cmp(&a), Ordering::Equal);
    }

    #[test]
    fn compare_by_functor_first() {
        // arg3 < echt lexicographically, despite the larger label
        let a = gc("l2:arg3(i1,i2)");
        let b = gc("l1:echt(i1)");
        assert_eq!(a.cmp(&b), Ordering::Less);
    }

    #[test]
    fn compare_arity_before_args() {
        let a = gc("l1:f(zz)");
        let b = gc("l1:f(a,a)");
        assert_eq!(a.cmp(&b), Ordering::Less);
    }

    #[test]
    fn sorts_example_set_by_functor() {
        // the printed variant of the running example, hand-sorted:
        // arg2 < arg3 < echt < passen < pron < pron < schlecht
        let mut set = [
            gc("l1:echt(l2)"),
            gc("l2:schlecht(i1)"),
            gc("l3:passen(i1)"),
            gc("l3:arg3(i1,i2)"),
            gc("l4:pron(i2)"),
            gc("l5:arg2(i1,i3)"),
            gc("l6:pron(i3)"),
        ];
        set.sort();
        let functors: Vec<&str> = set.iter().map(|c| c.functor().as_str()).collect();
        assert_eq!(
            functors,
            vec!["arg2", "arg3", "echt", "passen", "pron", "pron", "schlecht"]
        );
        // pron(i2) before pron(i3)
        assert_eq!(set[4].body.args[0].functor.as_str(), "i2");
    }

    #[test]
    fn match_binds_label_and_arg() {
        let env = match_condition(&pc("L:echt(I)"), &gc("l1:echt(l2)"), &BindingEnv::new())
            .expect("should match");
        assert_eq!(env.get(&var("L")), Some(&GroundTerm::leaf(sym("l1"))));
        assert_eq!(env.get(&var("I")), Some(&GroundTerm::leaf(sym("l2"))));
    }

    #[test]
    fn match_fails_on_functor_clash() {
        assert!(
            match_condition(&pc("L:passen(E)"), &gc("l3:suit(i1)"), &BindingEnv::new()).is_none()
        );
    }

    #[test]
    fn match_fails_on_rebinding_conflict() {
        let mut env = BindingEnv::new();
        assert!(env.bind(var("E"), GroundTerm::leaf(sym("i9"))));
        assert!(match_condition(&pc("L:arg3(E,Y)"), &gc("l3:arg3(i1,i2)"), &env).is_none());
    }

    #[test]
    fn match_repeated_variable_must_agree() {
        // X occurs twice; both positions must hold identical subterms
        assert!(match_condition(&pc("L:f(X,X)"), &gc("l1:f(a,a)"), &BindingEnv::new()).is_some());
        assert!(match_condition(&pc("L:f(X,X)"), &gc("l1:f(a,b)"), &BindingEnv::new()).is_none());
    }

    #[test]
    fn instantiate_with_full_env() {
        let mut env = BindingEnv::new();
        env.bind(var("L"), GroundTerm::leaf(sym("l1")));
        env.bind(var("I"), GroundTerm::leaf(sym("l2")));
        let mut fresh = FreshGen::new();
        let out = instantiate_condition(&pc("L:real(I)"), &mut env, &mut fresh).unwrap();
        assert_eq!(out, gc("l1:real(l2)"));
        assert_eq!(fresh.consumed(), 0);
    }

    #[test]
    fn instantiate_shares_fresh_constants_within_one_application() {
        let mut env = BindingEnv::new();
        env.bind(var("L"), GroundTerm::leaf(sym("l2")));
        env.bind(var("E"), GroundTerm::leaf(sym("i1")));
        let mut fresh = FreshGen::new();
        let a = instantiate_condition(&pc("L:neg(A)"), &mut env, &mut fresh).unwrap();
        let b = instantiate_condition(&pc("A:good(E)"), &mut env, &mut fresh).unwrap();
        assert_eq!(a, gc("l2:neg(t1)"));
        assert_eq!(b, gc("t1:good(i1)"));
        assert_eq!(fresh.consumed(), 1);
    }

    #[test]
    fn instantiate_ground_is_identity() {
        let mut env = BindingEnv::new();
        let mut fresh = FreshGen::new();
        let out = instantiate_condition(&pc("l1:echt(i1)"), &mut env, &mut fresh).unwrap();
        assert_eq!(out, gc("l1:echt(i1)"));
        assert_eq!(fresh.consumed(), 0);
    }

    #[test]
    fn reserved_fresh_names() {
        assert!(is_reserved_fresh(&sym("t1")));
        assert!(is_reserved_fresh(&sym("t42")));
        assert!(!is_reserved_fresh(&sym("t")));
        assert!(!is_reserved_fresh(&sym("termin")));
        assert!(!is_reserved_fresh(&sym("temp_point")));
        assert!(!is_reserved_fresh(&sym("t1x")));
    }

    #[test]
    fn skeleton_order_variables_minimal() {
        // f(X) sorts before f(a); passen(E) sorts after arg3(E,Y)
        assert_eq!(skeleton_cmp(&pc("L:f(X)"), &pc("L:f(a)")), Ordering::Less);
        assert_eq!(
            skeleton_cmp(&pc("L:arg3(E,Y)"), &pc("L:passen(E)")),
            Ordering::Less
        );
    }

    // --- property tests -----------------------------------------------------

    fn arb_ground_term() -> impl Strategy<Value = GroundTerm> {
        let leaf = prop_oneof![
            Just(GroundTerm::leaf(sym("a"))),
            Just(GroundTerm::leaf(sym("b"))),
            Just(GroundTerm::leaf(sym("c"))),
            Just(GroundTerm::leaf(sym("i1"))),
            Just(GroundTerm::leaf(sym("l1"))),
        ];
        leaf.prop_recursive(2, 8, 3, |inner| {
            (
                prop_oneof![Just(sym("f")), Just(sym("g")), Just(sym("arg3"))],
                prop::collection::vec(inner, 0..3),
            )
                .prop_map(|(f, args)| GroundTerm::new(f, args))
        })
    }

    fn arb_ground_condition() -> impl Strategy<Value = GroundCondition> {
        (
            prop_oneof![Just(sym("l1")), Just(sym("l2")), Just(sym("l3"))],
            arb_ground_term(),
        )
            .prop_map(|(l, b)| GroundCondition::new(l, b))
    }

    proptest! {
        #[test]
        fn order_is_total_and_antisymmetric(a in arb_ground_condition(), b in arb_ground_condition()) {
            match a.cmp(&b) {
                Ordering::Equal => prop_assert_eq!(&a, &b),
                Ordering::Less => prop_assert_eq!(b.cmp(&a), Ordering::Greater),
                Ordering::Greater => prop_assert_eq!(b.cmp(&a), Ordering::Less),
            }
        }

        #[test]
        fn order_is_transitive(
            a in arb_ground_condition(),
            b in arb_ground_condition(),
            c in arb_ground_condition()
        ) {
            if a.cmp(&b) != Ordering::Greater && b.cmp(&c) != Ordering::Greater {
                prop_assert_ne!(a.cmp(&c), Ordering::Greater);
            }
        }

        /// Abstracting argument positions of a ground condition into variables
        /// yields a pattern that matches it, and instantiating the resulting
        /// environment reproduces the subject without consuming fresh constants.
        #[test]
        fn match_then_instantiate_roundtrip(c in arb_ground_condition(), mask in prop::collection::vec(any::<bool>(), 0..3)) {
            let mut pat = PatternCondition::from_ground(&c);
            for (i, abstract_it) in mask.iter().enumerate() {
                if *abstract_it && i < pat.body.args.len() {
                    pat.body.args[i] = PatArg::Var(VarName::new_unchecked(format!("X{i}")));
                }
            }
            let env = match_condition(&pat, &c, &BindingEnv::new());
            prop_assert!(env.is_some());
            let mut env = env.unwrap();
            let mut fresh = FreshGen::new();
            let back = instantiate_condition(&pat, &mut env, &mut fresh).unwrap();
            prop_assert_eq!(back, c);
            prop_assert_eq!(fresh.consumed(), 0);
        }
    }
}
