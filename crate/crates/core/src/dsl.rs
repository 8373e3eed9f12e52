//! Parser for the transfer-rule language: rules, optional condition lists,
//! direction operators, class definitions and named rule modules.
//!
//! Grammar (Prolog-style surface form, `%` comments, statements end with `.`):
//!
//! ```text
//! file      := header? item* ;
//! header    := "module" NAME "." ;
//! item      := import | classdef | rule ;
//! import    := "import" NAME "." ;
//! classdef  := "type(" NAME "," NAME ",[" NAME ("," NAME)* "])." ;
//! rule      := condlist ("," condlist)? DIROP condlist ("," condlist)? "." ;
//! condlist  := "[" cond ("," cond)* "]" | "[]" ;
//! cond      := LV ":" NAME "(" args? ")" | sorttest | subord | eq | hook ;
//! sorttest  := "sort(" VAR ")" "=<" "~"? NAME ;
//! subord    := LV "<" LV ;
//! eq        := "eq(" VAR "," VAR ")" ;
//! hook      := NAME "(" args? ")" ;
//! DIROP     := "<->" | "->" | "<-" ;
//! ```
//!
//! An `eq(...)` written inside the target side is kept as an equality
//! binding on the rule rather than a target condition. Target-side condition
//! lists (the optional list after TLSem) are accepted, reported with a
//! warning and never evaluated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::syntax::{
    parse_pattern_condition, parse_pattern_term, Pos, SyntaxError, Tok, TokStream,
};
use crate::term::{
    is_reserved_fresh, GroundTerm, PatArg, PatternCondition, PatternLabel, PatternTerm, Symbol,
    VarName,
};

#[derive(Debug, Clone, Error)]
pub enum DslError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: empty SLSem (the source side of a rule must be a non-empty set)")]
    EmptySlSem { pos: Pos },
    #[error("{pos}: `{kind}` condition not allowed in {side}")]
    MisplacedCondition {
        pos: Pos,
        kind: &'static str,
        side: &'static str,
    },
    #[error("{pos}: duplicate condition `{cond}` in SLSem")]
    DuplicateSlCondition { pos: Pos, cond: String },
    #[error("{pos}: condition `{cond}` exceeds the depth limit (arguments must be constants or variables)")]
    DepthLimit { pos: Pos, cond: String },
    #[error("{pos}: reserved fresh constant `{sym}` in rule")]
    ReservedConstant { pos: Pos, sym: Symbol },
    #[error("{pos}: duplicate class member `{member}` in class `{class}`")]
    DuplicateClassMember {
        pos: Pos,
        class: Symbol,
        member: Symbol,
    },
    #[error("{pos}: `module` declaration must come before any item")]
    LateModuleHeader { pos: Pos },
    #[error("{pos}: hook argument must be a variable or a ground term")]
    NonGroundHookArg { pos: Pos },
    #[error("class `{class}` used inside the semantics of rule `{rule}` (classes are condition-side only)")]
    ClassInSem { class: Symbol, rule: String },
    #[error("unknown class `{0}`")]
    UnknownClass(Symbol),
}

/// Rule application direction operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauOp {
    Bidir,
    Fwd,
    Bwd,
}

impl fmt::Display for TauOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauOp::Bidir => write!(f, "<->"),
            TauOp::Fwd => write!(f, "->"),
            TauOp::Bwd => write!(f, "<-"),
        }
    }
}

/// Either side of a subordination test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelRef {
    Var(VarName),
    Sym(Symbol),
}

impl fmt::Display for LabelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelRef::Var(v) => write!(f, "{v}"),
            LabelRef::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Argument of a hook call.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HookArg {
    Var(VarName),
    Ground(GroundTerm),
}

impl fmt::Display for HookArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HookArg::Var(v) => write!(f, "{v}"),
            HookArg::Ground(t) => write!(f, "{t}"),
        }
    }
}

/// A guard on rule applicability, evaluated without consuming input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleCondition {
    /// Must match somewhere in the source set (never consumes).
    ContextMatch(PatternCondition),
    /// Class-expanded context match: succeeds if any alternative matches.
    ContextMatchAny(Vec<PatternCondition>),
    /// `sort(I) =< s` / `sort(I) =< ~s`.
    SortTest {
        marker: VarName,
        sort: Symbol,
        negated: bool,
    },
    /// `L1 < F`: lower is subordinated by upper.
    SubordTest { lower: LabelRef, upper: LabelRef },
    /// `eq(X, Y)`: unify two bindings (or seed them).
    EqBind(VarName, VarName),
    /// Call into the hook registry.
    HookCall { name: Symbol, args: Vec<HookArg> },
}

impl RuleCondition {
    pub(crate) fn collect_variables(&self, out: &mut Vec<VarName>) {
        match self {
            RuleCondition::ContextMatch(p) => p.collect_variables(out),
            RuleCondition::ContextMatchAny(ps) => {
                for p in ps {
                    p.collect_variables(out);
                }
            }
            RuleCondition::SortTest { marker, .. } => {
                if !out.contains(marker) {
                    out.push(marker.clone());
                }
            }
            RuleCondition::SubordTest { lower, upper } => {
                for side in [lower, upper] {
                    if let LabelRef::Var(v) = side {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
            }
            RuleCondition::EqBind(a, b) => {
                for v in [a, b] {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
            RuleCondition::HookCall { args, .. } => {
                for a in args {
                    if let HookArg::Var(v) = a {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
            }
        }
    }
}

impl fmt::Display for RuleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleCondition::ContextMatch(p) => write!(f, "{p}"),
            RuleCondition::ContextMatchAny(ps) => {
                let alts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", alts.join("|"))
            }
            RuleCondition::SortTest {
                marker,
                sort,
                negated,
            } => {
                write!(
                    f,
                    "sort({marker})=<{}{sort}",
                    if *negated { "~" } else { "" }
                )
            }
            RuleCondition::SubordTest { lower, upper } => write!(f, "{lower}<{upper}"),
            RuleCondition::EqBind(a, b) => write!(f, "eq({a},{b})"),
            RuleCondition::HookCall { name, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{name}({})", args.join(","))
            }
        }
    }
}

/// A parsed transfer rule: `SLSem, SLConds TauOp TLSem, TLConds.`
#[derive(Debug, Clone)]
pub struct TransferRule {
    /// Module-qualified stable id, e.g. `de_en:r3`.
    pub id: String,
    pub sl_sem: Vec<PatternCondition>,
    pub sl_conds: Vec<RuleCondition>,
    pub op: TauOp,
    pub tl_sem: Vec<PatternCondition>,
    /// `eq(...)` items written in TLSem position.
    pub tl_eqs: Vec<(VarName, VarName)>,
    /// Parsed but never evaluated.
    pub tl_conds: Vec<RuleCondition>,
    /// Position in the source file, for specificity tie-breaking.
    pub source_order: usize,
    pub pos: Pos,
}

/// `type(lang, name, [members]).`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub language: Symbol,
    pub name: Symbol,
    pub members: Vec<Symbol>,
}

/// A named collection of rules and class definitions.
#[derive(Debug, Clone)]
pub struct RuleModule {
    pub name: Symbol,
    pub imports: Vec<Symbol>,
    pub rules: Vec<TransferRule>,
    pub classes: Vec<ClassDef>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_rule_file(text: &str) -> Result<(RuleModule, Vec<Diagnostic>), DslError> {
    parse_rule_file_named(text, "main")
}

/// Parses a rule file; `default_module` names the module when the file has
/// no `module` header.
pub fn parse_rule_file_named(
    text: &str,
    default_module: &str,
) -> Result<(RuleModule, Vec<Diagnostic>), DslError> {
    let mut ts = TokStream::new(text)?;
    let mut diags = Vec::new();
    let mut module = RuleModule {
        name: Symbol::new_unchecked(default_module),
        imports: Vec::new(),
        rules: Vec::new(),
        classes: Vec::new(),
    };
    let mut item_count = 0usize;

    while !ts.at_end() {
        match ts.peek() {
            Some(Tok::Ident(kw)) if kw == "module" => {
                let (pos, _) = ts.expect_ident()?;
                if item_count > 0 {
                    return Err(DslError::LateModuleHeader { pos });
                }
                let (_, name) = ts.expect_ident()?;
                ts.expect(&Tok::Period)?;
                module.name = Symbol::new_unchecked(name);
            }
            Some(Tok::Ident(kw)) if kw == "import" => {
                ts.expect_ident()?;
                let (_, name) = ts.expect_ident()?;
                ts.expect(&Tok::Period)?;
                module.imports.push(Symbol::new_unchecked(name));
                item_count += 1;
            }
            Some(Tok::Ident(kw)) if kw == "type" => {
                module.classes.push(parse_classdef(&mut ts)?);
                item_count += 1;
            }
            Some(Tok::LBracket) => {
                let rule_index = module.rules.len() + 1;
                let id = format!("{}:r{}", module.name, rule_index);
                let rule = parse_rule(&mut ts, id, item_count, &mut diags)?;
                module.rules.push(rule);
                item_count += 1;
            }
            Some(t) => {
                let t = t.clone();
                return Err(ts
                    .err(format!(
                        "expected rule, `type`, `import` or `module`, found {t}"
                    ))
                    .into());
            }
            None => break,
        }
    }
    Ok((module, diags))
}

fn parse_classdef(ts: &mut TokStream) -> Result<ClassDef, DslError> {
    ts.expect_ident()?; // "type"
    ts.expect(&Tok::LParen)?;
    let (_, language) = ts.expect_ident()?;
    ts.expect(&Tok::Comma)?;
    let (_, name) = ts.expect_ident()?;
    ts.expect(&Tok::Comma)?;
    ts.expect(&Tok::LBracket)?;
    let mut members: Vec<Symbol> = Vec::new();
    loop {
        let (pos, member) = ts.expect_ident()?;
        let member = Symbol::new_unchecked(member);
        if members.contains(&member) {
            return Err(DslError::DuplicateClassMember {
                pos,
                class: Symbol::new_unchecked(name),
                member,
            });
        }
        members.push(member);
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBracket)?;
        break;
    }
    ts.expect(&Tok::RParen)?;
    ts.expect(&Tok::Period)?;
    Ok(ClassDef {
        language: Symbol::new_unchecked(language),
        name: Symbol::new_unchecked(name),
        members,
    })
}

/// One entry of a condition list, before its role (semantics vs guard) is
/// known.
enum RawCond {
    Pattern(Pos, PatternCondition),
    Sort(Pos, VarName, Symbol, bool),
    Subord(Pos, LabelRef, LabelRef),
    Eq(Pos, VarName, VarName),
    Hook(Pos, Symbol, Vec<HookArg>),
}

fn parse_rule(
    ts: &mut TokStream,
    id: String,
    source_order: usize,
    diags: &mut Vec<Diagnostic>,
) -> Result<TransferRule, DslError> {
    let pos = ts.pos();
    let first = parse_condlist(ts)?;
    let second = if ts.eat(&Tok::Comma) {
        Some(parse_condlist(ts)?)
    } else {
        None
    };
    let op = match ts.advance() {
        Some((_, Tok::ArrowBi)) => TauOp::Bidir,
        Some((_, Tok::ArrowFwd)) => TauOp::Fwd,
        Some((_, Tok::ArrowBwd)) => TauOp::Bwd,
        Some((p, t)) => {
            return Err(SyntaxError {
                pos: p,
                msg: format!("expected `<->`, `->` or `<-`, found {t}"),
            }
            .into())
        }
        None => return Err(ts.err("expected direction operator").into()),
    };
    let third = parse_condlist(ts)?;
    let fourth = if ts.eat(&Tok::Comma) {
        Some(parse_condlist(ts)?)
    } else {
        None
    };
    ts.expect(&Tok::Period)?;

    // source side
    let mut sl_sem = Vec::new();
    for item in first {
        match item {
            RawCond::Pattern(p, pat) => {
                check_pattern(&p, &pat)?;
                if sl_sem.contains(&pat) {
                    return Err(DslError::DuplicateSlCondition {
                        pos: p,
                        cond: pat.to_string(),
                    });
                }
                sl_sem.push(pat);
            }
            other => {
                return Err(DslError::MisplacedCondition {
                    pos: raw_pos(&other),
                    kind: raw_kind(&other),
                    side: "SLSem",
                })
            }
        }
    }
    if sl_sem.is_empty() {
        return Err(DslError::EmptySlSem { pos });
    }
    let sl_conds = match second {
        Some(items) => items
            .into_iter()
            .map(raw_to_condition)
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };

    // target side: patterns plus eq bindings
    let mut tl_sem = Vec::new();
    let mut tl_eqs = Vec::new();
    for item in third {
        match item {
            RawCond::Pattern(p, pat) => {
                check_pattern(&p, &pat)?;
                tl_sem.push(pat);
            }
            RawCond::Eq(_, a, b) => tl_eqs.push((a, b)),
            other => {
                return Err(DslError::MisplacedCondition {
                    pos: raw_pos(&other),
                    kind: raw_kind(&other),
                    side: "TLSem",
                })
            }
        }
    }
    let tl_conds = match fourth {
        Some(items) => {
            diags.push(Diagnostic::warning(
                Some(pos),
                format!("rule {id}: TLConds are not supported; parsed and ignored"),
            ));
            items
                .into_iter()
                .map(raw_to_condition)
                .collect::<Result<Vec<_>, _>>()?
        }
        None => Vec::new(),
    };

    // implicit target-side fresh variables
    let mut bound = Vec::new();
    for p in &sl_sem {
        p.collect_variables(&mut bound);
    }
    for c in &sl_conds {
        c.collect_variables(&mut bound);
    }
    let mut fresh = Vec::new();
    for p in &tl_sem {
        for v in p.variables() {
            if !bound.contains(&v) && !fresh.contains(&v) {
                fresh.push(v);
            }
        }
    }
    if !fresh.is_empty() {
        let names: Vec<&str> = fresh.iter().map(|v| v.as_str()).collect();
        diags.push(Diagnostic::info(
            Some(pos),
            format!(
                "rule {id}: target-only variables treated as fresh: {}",
                names.join(", ")
            ),
        ));
    }

    Ok(TransferRule {
        id,
        sl_sem,
        sl_conds,
        op,
        tl_sem,
        tl_eqs,
        tl_conds,
        source_order,
        pos,
    })
}

fn raw_pos(item: &RawCond) -> Pos {
    match item {
        RawCond::Pattern(p, _)
        | RawCond::Sort(p, ..)
        | RawCond::Subord(p, ..)
        | RawCond::Eq(p, ..)
        | RawCond::Hook(p, ..) => *p,
    }
}

fn raw_kind(item: &RawCond) -> &'static str {
    match item {
        RawCond::Pattern(..) => "pattern",
        RawCond::Sort(..) => "sort test",
        RawCond::Subord(..) => "subordination test",
        RawCond::Eq(..) => "eq",
        RawCond::Hook(..) => "hook call",
    }
}

fn raw_to_condition(item: RawCond) -> Result<RuleCondition, DslError> {
    Ok(match item {
        RawCond::Pattern(p, pat) => {
            check_pattern(&p, &pat)?;
            RuleCondition::ContextMatch(pat)
        }
        RawCond::Sort(_, marker, sort, negated) => RuleCondition::SortTest {
            marker,
            sort,
            negated,
        },
        RawCond::Subord(_, lower, upper) => RuleCondition::SubordTest { lower, upper },
        RawCond::Eq(_, a, b) => RuleCondition::EqBind(a, b),
        RawCond::Hook(_, name, args) => RuleCondition::HookCall { name, args },
    })
}

/// Depth limit and reserved-namespace checks shared by every pattern
/// position.
fn check_pattern(pos: &Pos, pat: &PatternCondition) -> Result<(), DslError> {
    for a in &pat.body.args {
        if let PatArg::Term(t) = a {
            if !t.args.is_empty() {
                return Err(DslError::DepthLimit {
                    pos: *pos,
                    cond: pat.to_string(),
                });
            }
        }
    }
    let mut syms: Vec<&Symbol> = vec![&pat.body.functor];
    if let PatternLabel::Sym(s) = &pat.label {
        syms.push(s);
    }
    for a in &pat.body.args {
        if let PatArg::Term(t) = a {
            syms.push(&t.functor);
        }
    }
    for s in syms {
        if is_reserved_fresh(s) {
            return Err(DslError::ReservedConstant {
                pos: *pos,
                sym: s.clone(),
            });
        }
    }
    Ok(())
}

fn parse_condlist(ts: &mut TokStream) -> Result<Vec<RawCond>, DslError> {
    ts.expect(&Tok::LBracket)?;
    let mut out = Vec::new();
    if ts.eat(&Tok::RBracket) {
        return Ok(out);
    }
    loop {
        out.push(parse_cond(ts)?);
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBracket)?;
        break;
    }
    Ok(out)
}

fn parse_cond(ts: &mut TokStream) -> Result<RawCond, DslError> {
    let pos = ts.pos();
    match (ts.peek(), ts.peek2()) {
        // `L < F` / `l1 < F` subordination tests
        (Some(Tok::Var(_)), Some(Tok::Lt)) | (Some(Tok::Ident(_)), Some(Tok::Lt)) => {
            let lower = parse_label_ref(ts)?;
            ts.expect(&Tok::Lt)?;
            let upper = parse_label_ref(ts)?;
            Ok(RawCond::Subord(pos, lower, upper))
        }
        // call-shaped: sort test, eq, or hook
        (Some(Tok::Ident(name)), Some(Tok::LParen)) => match name.as_str() {
            "sort" => {
                ts.expect_ident()?;
                ts.expect(&Tok::LParen)?;
                let marker = match ts.advance() {
                    Some((_, Tok::Var(v))) => VarName::new_unchecked(v),
                    Some((p, t)) => {
                        return Err(SyntaxError {
                            pos: p,
                            msg: format!("expected variable in sort test, found {t}"),
                        }
                        .into())
                    }
                    None => return Err(ts.err("expected variable in sort test").into()),
                };
                ts.expect(&Tok::RParen)?;
                ts.expect(&Tok::Leq)?;
                let negated = ts.eat(&Tok::Tilde);
                let (_, sort) = ts.expect_ident()?;
                Ok(RawCond::Sort(
                    pos,
                    marker,
                    Symbol::new_unchecked(sort),
                    negated,
                ))
            }
            "eq" => {
                ts.expect_ident()?;
                ts.expect(&Tok::LParen)?;
                let a = expect_var(ts)?;
                ts.expect(&Tok::Comma)?;
                let b = expect_var(ts)?;
                ts.expect(&Tok::RParen)?;
                Ok(RawCond::Eq(pos, a, b))
            }
            _ => {
                let (_, name) = ts.expect_ident()?;
                ts.expect(&Tok::LParen)?;
                let mut args = Vec::new();
                if !ts.eat(&Tok::RParen) {
                    loop {
                        match ts.peek() {
                            Some(Tok::Var(_)) => {
                                if let Some((_, Tok::Var(v))) = ts.advance() {
                                    args.push(HookArg::Var(VarName::new_unchecked(v)));
                                }
                            }
                            _ => {
                                let argpos = ts.pos();
                                let term = parse_pattern_term(ts)?;
                                match pattern_term_to_ground(&term) {
                                    Some(g) => args.push(HookArg::Ground(g)),
                                    None => return Err(DslError::NonGroundHookArg { pos: argpos }),
                                }
                            }
                        }
                        if ts.eat(&Tok::Comma) {
                            continue;
                        }
                        ts.expect(&Tok::RParen)?;
                        break;
                    }
                }
                Ok(RawCond::Hook(pos, Symbol::new_unchecked(name), args))
            }
        },
        // otherwise a labeled pattern condition
        _ => {
            let (p, pat) = parse_pattern_condition(ts)?;
            Ok(RawCond::Pattern(p, pat))
        }
    }
}

fn pattern_term_to_ground(t: &PatternTerm) -> Option<GroundTerm> {
    let mut args = Vec::with_capacity(t.args.len());
    for a in &t.args {
        match a {
            PatArg::Var(_) => return None,
            PatArg::Term(s) => args.push(pattern_term_to_ground(s)?),
        }
    }
    Some(GroundTerm::new(t.functor.clone(), args))
}

fn expect_var(ts: &mut TokStream) -> Result<VarName, DslError> {
    match ts.advance() {
        Some((_, Tok::Var(v))) => Ok(VarName::new_unchecked(v)),
        Some((p, t)) => Err(SyntaxError {
            pos: p,
            msg: format!("expected variable, found {t}"),
        }
        .into()),
        None => Err(SyntaxError {
            pos: Pos { line: 0, col: 0 },
            msg: "expected variable, found end of input".into(),
        }
        .into()),
    }
}

fn parse_label_ref(ts: &mut TokStream) -> Result<LabelRef, DslError> {
    match ts.advance() {
        Some((_, Tok::Var(v))) => Ok(LabelRef::Var(VarName::new_unchecked(v))),
        Some((_, Tok::Ident(s))) => Ok(LabelRef::Sym(Symbol::new_unchecked(s))),
        Some((p, t)) => Err(SyntaxError {
            pos: p,
            msg: format!("expected label or variable, found {t}"),
        }
        .into()),
        None => Err(SyntaxError {
            pos: Pos { line: 0, col: 0 },
            msg: "expected label or variable".into(),
        }
        .into()),
    }
}

// ---------------------------------------------------------------------------
// Class expansion
// ---------------------------------------------------------------------------

pub type ClassTable = BTreeMap<Symbol, Vec<Symbol>>;

pub fn class_table(classes: &[ClassDef]) -> ClassTable {
    classes
        .iter()
        .map(|c| (c.name.clone(), c.members.clone()))
        .collect()
}

/// Expands class names in context conditions into member disjunctions, using
/// the module's own class definitions. Idempotent.
pub fn expand_classes(module: &RuleModule) -> Result<RuleModule, DslError> {
    expand_classes_with(module, &class_table(&module.classes))
}

/// Like [`expand_classes`] but against an externally assembled table (for
/// imported classes).
pub fn expand_classes_with(
    module: &RuleModule,
    table: &ClassTable,
) -> Result<RuleModule, DslError> {
    let mut out = module.clone();
    for rule in &mut out.rules {
        for side in [&rule.sl_sem, &rule.tl_sem] {
            for pat in side {
                if table.contains_key(pat.functor()) {
                    return Err(DslError::ClassInSem {
                        class: pat.functor().clone(),
                        rule: rule.id.clone(),
                    });
                }
            }
        }
        for cond in &mut rule.sl_conds {
            if let RuleCondition::ContextMatch(pat) = cond {
                if let Some(members) = table.get(pat.functor()) {
                    let alts = members
                        .iter()
                        .map(|m| PatternCondition {
                            label: pat.label.clone(),
                            body: PatternTerm {
                                functor: m.clone(),
                                args: pat.body.args.clone(),
                            },
                        })
                        .collect();
                    *cond = RuleCondition::ContextMatchAny(alts);
                }
            }
        }
    }
    Ok(out)
}

/// Variables of a pattern sequence, first occurrence order.
pub fn side_variables(side: &[PatternCondition]) -> BTreeSet<VarName> {
    let mut out = Vec::new();
    for p in side {
        p.collect_variables(&mut out);
    }
    out.into_iter().collect()
}
