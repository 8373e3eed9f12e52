//! Minimal domain model: a sort DAG with subsumption queries.
//!
//! Stands in for the external domain-model process that rule guards like
//! `sort(I) =< ~temp_point` consult. File format is one `child isa parent.`
//! statement per line with `%` comments; every mentioned sort without a
//! declared parent hangs off the implicit root `top`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::syntax::{Pos, SyntaxError, Tok, TokStream};
use crate::term::Symbol;

pub const TOP: &str = "top";

#[derive(Debug, Clone, Error)]
pub enum SortError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: expected `isa`, found `{found}`")]
    ExpectedIsa { pos: Pos, found: String },
    #[error("cycle in sort hierarchy through `{0}`")]
    Cycle(Symbol),
    #[error("unknown sort `{0}`")]
    UnknownSort(Symbol),
}

/// An acyclic is-a hierarchy rooted at `top`. Multiple inheritance is
/// allowed; duplicate edges are idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortHierarchy {
    /// child -> set of parents; `top` has no entry.
    parents: BTreeMap<Symbol, BTreeSet<Symbol>>,
    sorts: BTreeSet<Symbol>,
}

impl SortHierarchy {
    /// The hierarchy containing only `top`.
    pub fn top_only() -> Self {
        let mut sorts = BTreeSet::new();
        sorts.insert(Symbol::new_unchecked(TOP));
        SortHierarchy {
            parents: BTreeMap::new(),
            sorts,
        }
    }

    pub fn from_edges(
        edges: impl IntoIterator<Item = (Symbol, Symbol)>,
    ) -> Result<Self, SortError> {
        let mut h = SortHierarchy::top_only();
        let mut declared_parent: BTreeSet<Symbol> = BTreeSet::new();
        for (child, parent) in edges {
            h.sorts.insert(child.clone());
            h.sorts.insert(parent.clone());
            declared_parent.insert(child.clone());
            h.parents.entry(child).or_default().insert(parent);
        }
        // attach parentless sorts (other than top) to the root
        let top = Symbol::new_unchecked(TOP);
        for s in h.sorts.clone() {
            if s.as_str() != TOP && !declared_parent.contains(&s) {
                h.parents.entry(s).or_default().insert(top.clone());
            }
        }
        h.check_acyclic()?;
        Ok(h)
    }

    fn check_acyclic(&self) -> Result<(), SortError> {
        // colors: 0 unvisited, 1 in progress, 2 done
        let mut color: BTreeMap<&Symbol, u8> = BTreeMap::new();
        for s in &self.sorts {
            self.visit(s, &mut color)?;
        }
        Ok(())
    }

    fn visit<'a>(
        &'a self,
        s: &'a Symbol,
        color: &mut BTreeMap<&'a Symbol, u8>,
    ) -> Result<(), SortError> {
        match color.get(s) {
            Some(1) => return Err(SortError::Cycle(s.clone())),
            Some(2) => return Ok(()),
            _ => {}
        }
        color.insert(s, 1);
        if let Some(ps) = self.parents.get(s) {
            for p in ps {
                self.visit(p, color)?;
            }
        }
        color.insert(s, 2);
        Ok(())
    }

    pub fn contains(&self, sort: &Symbol) -> bool {
        self.sorts.contains(sort)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &Symbol> {
        self.sorts.iter()
    }

    pub fn len(&self) -> usize {
        self.sorts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // `top` is always present
    }

    /// True iff `general` is reachable from `specific` via is-a edges
    /// (reflexive-transitive), i.e. `specific` is subsumed by `general`.
    pub fn subsumes(&self, general: &Symbol, specific: &Symbol) -> Result<bool, SortError> {
        if !self.contains(general) {
            return Err(SortError::UnknownSort(general.clone()));
        }
        if !self.contains(specific) {
            return Err(SortError::UnknownSort(specific.clone()));
        }
        if general == specific {
            return Ok(true);
        }
        let mut stack = vec![specific];
        let mut seen: BTreeSet<&Symbol> = BTreeSet::new();
        while let Some(s) = stack.pop() {
            if let Some(ps) = self.parents.get(s) {
                for p in ps {
                    if p == general {
                        return Ok(true);
                    }
                    if seen.insert(p) {
                        stack.push(p);
                    }
                }
            }
        }
        Ok(false)
    }

    /// All `child isa parent` edges, including the implicit attachments to
    /// `top`, in sorted order.
    pub fn edges(&self) -> Vec<(Symbol, Symbol)> {
        let mut out = Vec::new();
        for (c, ps) in &self.parents {
            for p in ps {
                out.push((c.clone(), p.clone()));
            }
        }
        out
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (c, p) in self.edges() {
            out.push_str(&format!("{c} isa {p}.\n"));
        }
        out
    }
}

pub fn load_hierarchy(text: &str) -> Result<SortHierarchy, SortError> {
    let mut ts = TokStream::new(text)?;
    let mut edges = Vec::new();
    while !ts.at_end() {
        let (_, child) = ts.expect_ident()?;
        let (pos, kw) = ts.expect_ident()?;
        if kw != "isa" {
            return Err(SortError::ExpectedIsa { pos, found: kw });
        }
        let (_, parent) = ts.expect_ident()?;
        ts.expect(&Tok::Period)?;
        edges.push((Symbol::new_unchecked(child), Symbol::new_unchecked(parent)));
    }
    SortHierarchy::from_edges(edges)
}
