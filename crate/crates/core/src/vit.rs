//! The vit container: a canonical semantic set plus auxiliary slots (scope
//! constraints, sort assignments, opaque extras), with parsing, serialization
//! and validation.
//!
//! File format:
//!
//! ```text
//! vit {
//!   sem: [ l1:echt(l2), l2:schlecht(i1) ]
//!   scope: [ l4 < l1 ]          % optional
//!   sorts: { i2: human }        % optional
//!   extras: { tense: "pres" }   % optional
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::sorts::SortHierarchy;
use crate::syntax::{parse_pattern_condition, Pos, SyntaxError, Tok, TokStream};
use crate::term::{is_reserved_fresh, GroundCondition, GroundTerm, Symbol};

#[derive(Debug, Clone, Error)]
pub enum VitError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: variable in ground input: `{var}` (input must be skolemized)")]
    VariableInInput { pos: Pos, var: String },
    #[error("{pos}: condition `{cond}` exceeds the depth limit (arguments must be constants)")]
    DepthLimit { pos: Pos, cond: String },
    #[error("{pos}: reserved fresh constant `{sym}` in input")]
    ReservedConstant { pos: Pos, sym: Symbol },
    #[error("dangling label `{sym}` in {slot} slot")]
    DanglingLabel { sym: Symbol, slot: &'static str },
    #[error("cyclic scope declaration through `{0}`")]
    CyclicScope(Symbol),
    #[error("duplicate extras key `{0}`")]
    DuplicateExtra(Symbol),
    #[error("unknown label `{0}`")]
    UnknownLabel(Symbol),
    #[error("unknown sort `{sort}` assigned to `{marker}`")]
    UnknownSort { marker: Symbol, sort: Symbol },
}

// ---------------------------------------------------------------------------
// SemSet
// ---------------------------------------------------------------------------

/// A canonically sorted, duplicate-free set of ground conditions: the
/// rewriting substrate.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemSet {
    conds: Vec<GroundCondition>,
}

impl SemSet {
    pub fn from_conditions(mut conds: Vec<GroundCondition>) -> Self {
        conds.sort();
        conds.dedup();
        SemSet { conds }
    }

    pub fn as_slice(&self) -> &[GroundCondition] {
        &self.conds
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundCondition> {
        self.conds.iter()
    }

    pub fn len(&self) -> usize {
        self.conds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conds.is_empty()
    }

    pub fn contains(&self, c: &GroundCondition) -> bool {
        self.conds.binary_search(c).is_ok()
    }

    /// The contiguous run of conditions with the given functor and arity.
    pub fn functor_range(&self, functor: &Symbol, arity: usize) -> &[GroundCondition] {
        functor_range(&self.conds, functor, arity)
    }

    /// All condition labels.
    pub fn labels(&self) -> BTreeSet<&Symbol> {
        self.conds.iter().map(|c| &c.label).collect()
    }

    /// All constants occurring in argument position (at any depth).
    pub fn arg_symbols(&self) -> BTreeSet<&Symbol> {
        let mut out = BTreeSet::new();
        fn walk<'a>(t: &'a GroundTerm, out: &mut BTreeSet<&'a Symbol>) {
            for a in &t.args {
                out.insert(&a.functor);
                walk(a, out);
            }
        }
        for c in &self.conds {
            walk(&c.body, &mut out);
        }
        out
    }

    /// Condition labels plus label-shaped argument constants: everything a
    /// scope constraint may refer to.
    pub fn label_universe(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.labels().into_iter().cloned().collect();
        for a in self.arg_symbols() {
            if is_label_shaped(a) {
                out.insert(a.clone());
            }
        }
        out
    }
}

impl fmt::Display for SemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.conds.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Binary-search bounds of the `(functor, arity)` run in a sorted condition
/// slice. This is the ordered-set access that lets matching skip everything
/// that cannot match.
pub fn functor_range<'a>(
    sorted: &'a [GroundCondition],
    functor: &Symbol,
    arity: usize,
) -> &'a [GroundCondition] {
    let key = (functor.as_str(), arity);
    let lo = sorted.partition_point(|c| (c.functor().as_str(), c.arity()) < key);
    let hi = lo + sorted[lo..].partition_point(|c| (c.functor().as_str(), c.arity()) <= key);
    &sorted[lo..hi]
}

// ---------------------------------------------------------------------------
// Vit
// ---------------------------------------------------------------------------

/// An explicit subordination constraint: `lower` sits below `upper` in the
/// scope order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScopeConstraint {
    pub lower: Symbol,
    pub upper: Symbol,
}

impl fmt::Display for ScopeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} < {}", self.lower, self.upper)
    }
}

/// The multi-slot container passed through transfer: the semantic set plus
/// scope constraints, sort assignments and opaque extra slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vit {
    pub sem: SemSet,
    pub scope: Vec<ScopeConstraint>,
    pub sorts: BTreeMap<Symbol, Symbol>,
    /// Opaque slots copied verbatim through transfer, in input order.
    pub extras: Vec<(Symbol, String)>,
}

impl Vit {
    /// Builds and validates a vit from parsed input parts.
    pub fn new(
        conds: Vec<GroundCondition>,
        mut scope: Vec<ScopeConstraint>,
        sorts: BTreeMap<Symbol, Symbol>,
        extras: Vec<(Symbol, String)>,
    ) -> Result<Self, VitError> {
        scope.sort();
        scope.dedup();
        let vit = Vit {
            sem: SemSet::from_conditions(conds),
            scope,
            sorts,
            extras,
        };
        vit.validate()?;
        Ok(vit)
    }

    /// Constructor for transfer output: canonicalizes but skips the
    /// input-side checks (outputs legitimately contain generated `t<n>`
    /// constants).
    pub(crate) fn from_output_parts(
        conds: Vec<GroundCondition>,
        mut scope: Vec<ScopeConstraint>,
        sorts: BTreeMap<Symbol, Symbol>,
        extras: Vec<(Symbol, String)>,
    ) -> Self {
        scope.sort();
        scope.dedup();
        Vit {
            sem: SemSet::from_conditions(conds),
            scope,
            sorts,
            extras,
        }
    }

    fn validate(&self) -> Result<(), VitError> {
        let universe = self.scope_universe();
        for sc in &self.scope {
            for s in [&sc.lower, &sc.upper] {
                if !universe.contains(s) {
                    return Err(VitError::DanglingLabel {
                        sym: s.clone(),
                        slot: "scope",
                    });
                }
            }
        }
        self.check_scope_acyclic()?;
        let args = self.sem.arg_symbols();
        for marker in self.sorts.keys() {
            if !args.contains(marker) {
                return Err(VitError::DanglingLabel {
                    sym: marker.clone(),
                    slot: "sorts",
                });
            }
        }
        let mut seen = BTreeSet::new();
        for (k, _) in &self.extras {
            if !seen.insert(k.clone()) {
                return Err(VitError::DuplicateExtra(k.clone()));
            }
        }
        Ok(())
    }

    fn check_scope_acyclic(&self) -> Result<(), VitError> {
        let mut succ: BTreeMap<&Symbol, Vec<&Symbol>> = BTreeMap::new();
        for sc in &self.scope {
            succ.entry(&sc.lower).or_default().push(&sc.upper);
        }
        let mut color: BTreeMap<&Symbol, u8> = BTreeMap::new();
        fn visit<'a>(
            n: &'a Symbol,
            succ: &BTreeMap<&'a Symbol, Vec<&'a Symbol>>,
            color: &mut BTreeMap<&'a Symbol, u8>,
        ) -> Result<(), VitError> {
            match color.get(n) {
                Some(1) => return Err(VitError::CyclicScope(n.clone())),
                Some(2) => return Ok(()),
                _ => {}
            }
            color.insert(n, 1);
            if let Some(nexts) = succ.get(n) {
                for m in nexts {
                    visit(m, succ, color)?;
                }
            }
            color.insert(n, 2);
            Ok(())
        }
        for sc in &self.scope {
            visit(&sc.lower, &succ, &mut color)?;
        }
        Ok(())
    }

    /// Symbols usable as scope endpoints: condition labels plus any argument
    /// constant shaped like a label (`l` + digits). Hole labels that only
    /// occur in argument position are deliberately included.
    pub fn scope_universe(&self) -> BTreeSet<Symbol> {
        self.sem.label_universe()
    }

    /// Checks all sort assignments against a loaded hierarchy.
    pub fn validate_sorts(&self, hierarchy: &SortHierarchy) -> Result<(), VitError> {
        for (marker, sort) in &self.sorts {
            if !hierarchy.contains(sort) {
                return Err(VitError::UnknownSort {
                    marker: marker.clone(),
                    sort: sort.clone(),
                });
            }
        }
        Ok(())
    }

    /// True iff `lower` is subordinated under `upper`: the pair is in the
    /// reflexive-transitive closure of the declared scope constraints plus
    /// direct label-argument embedding (a condition labeled `u` whose
    /// argument `w` is itself a condition label contributes `w < u`).
    pub fn subordinated(&self, lower: &Symbol, upper: &Symbol) -> Result<bool, VitError> {
        let universe = self.scope_universe();
        for s in [lower, upper] {
            if !universe.contains(s) {
                return Err(VitError::UnknownLabel(s.clone()));
            }
        }
        if lower == upper {
            return Ok(true);
        }
        let labels = self.sem.labels();
        let mut up: BTreeMap<&Symbol, Vec<&Symbol>> = BTreeMap::new();
        for sc in &self.scope {
            up.entry(&sc.lower).or_default().push(&sc.upper);
        }
        for c in self.sem.iter() {
            for a in &c.body.args {
                if let Some(w) = a.as_leaf() {
                    if is_label_shaped(w) && labels.contains(w) && w != &c.label {
                        up.entry(w).or_default().push(&c.label);
                    }
                }
            }
        }
        let mut stack = vec![lower];
        let mut seen: BTreeSet<&Symbol> = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if let Some(nexts) = up.get(n) {
                for m in nexts {
                    if *m == upper {
                        return Ok(true);
                    }
                    if seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
        }
        Ok(false)
    }
}

impl fmt::Display for Vit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_vit(self))
    }
}

fn is_label_shaped(s: &Symbol) -> bool {
    let text = s.as_str();
    let mut chars = text.chars();
    chars.next() == Some('l') && text.len() > 1 && chars.all(|c| c.is_ascii_digit())
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_vit(text: &str) -> Result<Vit, VitError> {
    let mut ts = TokStream::new(text)?;
    let (pos, kw) = ts.expect_ident()?;
    if kw != "vit" {
        return Err(SyntaxError {
            pos,
            msg: format!("expected `vit`, found `{kw}`"),
        }
        .into());
    }
    ts.expect(&Tok::LBrace)?;

    let mut conds: Option<Vec<GroundCondition>> = None;
    let mut scope: Vec<ScopeConstraint> = Vec::new();
    let mut sorts: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    let mut extras: Vec<(Symbol, String)> = Vec::new();
    let mut seen_slots: BTreeSet<String> = BTreeSet::new();

    while !ts.eat(&Tok::RBrace) {
        let (pos, slot) = ts.expect_ident()?;
        if !seen_slots.insert(slot.clone()) {
            return Err(SyntaxError {
                pos,
                msg: format!("duplicate slot `{slot}`"),
            }
            .into());
        }
        ts.expect(&Tok::Colon)?;
        match slot.as_str() {
            "sem" => conds = Some(parse_sem(&mut ts)?),
            "scope" => scope = parse_scope(&mut ts)?,
            "sorts" => sorts = parse_sorts(&mut ts)?,
            "extras" => extras = parse_extras(&mut ts)?,
            other => {
                return Err(SyntaxError {
                    pos,
                    msg: format!("unknown slot `{other}`"),
                }
                .into())
            }
        }
    }
    if !ts.at_end() {
        return Err(ts.err("trailing input after `}`").into());
    }
    let conds = conds.ok_or_else(|| SyntaxError {
        pos: Pos { line: 1, col: 1 },
        msg: "missing `sem` slot".into(),
    })?;
    Vit::new(conds, scope, sorts, extras)
}

fn parse_sem(ts: &mut TokStream) -> Result<Vec<GroundCondition>, VitError> {
    ts.expect(&Tok::LBracket)?;
    let mut out = Vec::new();
    if ts.eat(&Tok::RBracket) {
        return Ok(out);
    }
    loop {
        let (pos, pat) = parse_pattern_condition(ts)?;
        let cond = match pat.to_ground() {
            Some(c) => c,
            None => {
                let var = pat
                    .variables()
                    .first()
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                return Err(VitError::VariableInInput { pos, var });
            }
        };
        if cond.body.args.iter().any(|a| !a.is_leaf()) {
            return Err(VitError::DepthLimit {
                pos,
                cond: cond.to_string(),
            });
        }
        if let Some(sym) = reserved_symbol(&cond) {
            return Err(VitError::ReservedConstant {
                pos,
                sym: sym.clone(),
            });
        }
        out.push(cond);
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBracket)?;
        break;
    }
    Ok(out)
}

fn reserved_symbol(c: &GroundCondition) -> Option<&Symbol> {
    if is_reserved_fresh(&c.label) {
        return Some(&c.label);
    }
    if is_reserved_fresh(&c.body.functor) {
        return Some(&c.body.functor);
    }
    c.body
        .args
        .iter()
        .flat_map(|a| a.as_leaf())
        .find(|s| is_reserved_fresh(s))
}

fn parse_scope(ts: &mut TokStream) -> Result<Vec<ScopeConstraint>, VitError> {
    ts.expect(&Tok::LBracket)?;
    let mut out = Vec::new();
    if ts.eat(&Tok::RBracket) {
        return Ok(out);
    }
    loop {
        let (_, lower) = ts.expect_ident()?;
        ts.expect(&Tok::Lt)?;
        let (_, upper) = ts.expect_ident()?;
        out.push(ScopeConstraint {
            lower: Symbol::new_unchecked(lower),
            upper: Symbol::new_unchecked(upper),
        });
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBracket)?;
        break;
    }
    Ok(out)
}

fn parse_sorts(ts: &mut TokStream) -> Result<BTreeMap<Symbol, Symbol>, VitError> {
    ts.expect(&Tok::LBrace)?;
    let mut out = BTreeMap::new();
    if ts.eat(&Tok::RBrace) {
        return Ok(out);
    }
    loop {
        let (_, marker) = ts.expect_ident()?;
        ts.expect(&Tok::Colon)?;
        let (_, sort) = ts.expect_ident()?;
        out.insert(Symbol::new_unchecked(marker), Symbol::new_unchecked(sort));
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBrace)?;
        break;
    }
    Ok(out)
}

fn parse_extras(ts: &mut TokStream) -> Result<Vec<(Symbol, String)>, VitError> {
    ts.expect(&Tok::LBrace)?;
    let mut out = Vec::new();
    if ts.eat(&Tok::RBrace) {
        return Ok(out);
    }
    loop {
        let (_, key) = ts.expect_ident()?;
        ts.expect(&Tok::Colon)?;
        let value = match ts.advance() {
            Some((_, Tok::Str(s))) => s,
            Some((pos, t)) => {
                return Err(SyntaxError {
                    pos,
                    msg: format!("expected string value, found {t}"),
                }
                .into())
            }
            None => return Err(ts.err("expected string value").into()),
        };
        out.push((Symbol::new_unchecked(key), value));
        if ts.eat(&Tok::Comma) {
            continue;
        }
        ts.expect(&Tok::RBrace)?;
        break;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Canonical text form; `parse_vit(serialize_vit(v)) == v` for valid vits.
/// Empty optional slots are omitted.
pub fn serialize_vit(v: &Vit) -> String {
    let mut out = String::from("vit {\n");
    if v.sem.is_empty() {
        out.push_str("  sem: []\n");
    } else {
        out.push_str("  sem: [\n");
        let n = v.sem.len();
        for (i, c) in v.sem.iter().enumerate() {
            out.push_str("    ");
            out.push_str(&c.to_string());
            if i + 1 < n {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("  ]\n");
    }
    if !v.scope.is_empty() {
        let items: Vec<String> = v.scope.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("  scope: [ {} ]\n", items.join(", ")));
    }
    if !v.sorts.is_empty() {
        let items: Vec<String> = v.sorts.iter().map(|(k, s)| format!("{k}: {s}")).collect();
        out.push_str(&format!("  sorts: {{ {} }}\n", items.join(", ")));
    }
    if !v.extras.is_empty() {
        let items: Vec<String> = v
            .extras
            .iter()
            .map(|(k, val)| {
                format!(
                    "{k}: \"{}\"",
                    val.replace('\\', "\\\\").replace('"', "\\\"")
                )
            })
            .collect();
        out.push_str(&format!("  extras: {{ {} }}\n", items.join(", ")));
    }
    out.push_str("}\n");
    out
}
