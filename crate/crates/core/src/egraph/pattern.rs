use std::collections::BTreeMap;
use std::fmt;

use super::{EGraph, EGraphError, ENode, Head, Id};
use crate::ir::{Expr, Literal, RealFn, Symbol, TypeTag};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatHead {
    Real(RealFn),
    Op(Symbol),
}

impl PatHead {
    fn matches(&self, head: &Head) -> bool {
        match (self, head) {
            (PatHead::Real(a), Head::Real(b)) => a == b,
            (PatHead::Op(a), Head::Op(b)) => a == b,
            _ => false,
        }
    }

    fn to_head(&self) -> Head {
        match self {
            PatHead::Real(f) => Head::Real(*f),
            PatHead::Op(o) => Head::Op(o.clone()),
        }
    }
}

/// A term with metavariables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// `?x`: matches any class.
    Hole(Symbol),
    /// Matches a class containing a literal node of the given type, binding
    /// the literal.
    AnyLit(Symbol, TypeTag),
    /// Matches a class containing exactly this literal.
    Lit(Literal),
    Node(PatHead, Vec<Pattern>),
}

impl Pattern {
    pub fn real(f: RealFn, args: Vec<Pattern>) -> Pattern {
        Pattern::Node(PatHead::Real(f), args)
    }

    pub fn hole(name: &str) -> Pattern {
        Pattern::Hole(Symbol::new(name))
    }

    /// Metavariables in first-occurrence order.
    pub fn holes(&self) -> Vec<Symbol> {
        fn go(p: &Pattern, out: &mut Vec<Symbol>) {
            match p {
                Pattern::Hole(h) | Pattern::AnyLit(h, _) => {
                    if !out.contains(h) {
                        out.push(h.clone());
                    }
                }
                Pattern::Lit(_) => {}
                Pattern::Node(_, kids) => kids.iter().for_each(|k| go(k, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Node count, counting metavariables as one node.
    pub fn size(&self) -> usize {
        match self {
            Pattern::Node(_, kids) => 1 + kids.iter().map(Pattern::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn has_float_op(&self) -> bool {
        match self {
            Pattern::Node(PatHead::Op(_), _) => true,
            Pattern::Node(_, kids) => kids.iter().any(Pattern::has_float_op),
            Pattern::Lit(l) => l.ty != TypeTag::Real,
            Pattern::AnyLit(_, t) => *t != TypeTag::Real,
            Pattern::Hole(_) => false,
        }
    }

    /// Builds a pattern from an expression, turning the named variables into
    /// metavariables.
    pub fn from_expr(e: &Expr, holes: &[Symbol]) -> Option<Pattern> {
        Some(match e {
            Expr::Var(v) if holes.contains(v) => Pattern::Hole(v.clone()),
            Expr::Var(_) => return None,
            Expr::Lit(l) => Pattern::Lit(l.clone()),
            Expr::Real(f, args) => Pattern::Node(
                PatHead::Real(*f),
                args.iter()
                    .map(|a| Pattern::from_expr(a, holes))
                    .collect::<Option<_>>()?,
            ),
            Expr::Op(o, args) => Pattern::Node(
                PatHead::Op(o.clone()),
                args.iter()
                    .map(|a| Pattern::from_expr(a, holes))
                    .collect::<Option<_>>()?,
            ),
            _ => return None,
        })
    }

    /// Fills the metavariables with expressions.
    pub fn to_expr(&self, binds: &BTreeMap<Symbol, Expr>) -> Option<Expr> {
        Some(match self {
            Pattern::Hole(h) | Pattern::AnyLit(h, _) => binds.get(h)?.clone(),
            Pattern::Lit(l) => Expr::Lit(l.clone()),
            Pattern::Node(PatHead::Real(f), kids) => {
                Expr::Real(*f, kids.iter().map(|k| k.to_expr(binds)).collect::<Option<_>>()?)
            }
            Pattern::Node(PatHead::Op(o), kids) => {
                Expr::Op(o.clone(), kids.iter().map(|k| k.to_expr(binds)).collect::<Option<_>>()?)
            }
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Hole(h) => write!(f, "?{h}"),
            Pattern::AnyLit(h, t) => write!(f, "#{h}:{t}"),
            Pattern::Lit(l) => write!(f, "{}", Expr::Lit(l.clone())),
            Pattern::Node(h, kids) => {
                match h {
                    PatHead::Real(r) => write!(f, "({r}")?,
                    PatHead::Op(o) => write!(f, "({o}")?,
                }
                for k in kids {
                    write!(f, " {k}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub class: Id,
    /// Set for metavariables bound by [`Pattern::AnyLit`].
    pub lit: Option<Literal>,
}

/// Metavariable bindings of one match, kept sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst(pub Vec<(Symbol, Binding)>);

impl Subst {
    pub fn get(&self, h: &Symbol) -> Option<&Binding> {
        self.0.iter().find(|(n, _)| n == h).map(|(_, b)| b)
    }

    fn bind(mut self, h: &Symbol, b: Binding) -> Option<Subst> {
        match self.get(h) {
            Some(old) => (old.class == b.class && (b.lit.is_none() || old.lit == b.lit)).then_some(self),
            None => {
                let at = self.0.partition_point(|(n, _)| n < h);
                self.0.insert(at, (h.clone(), b));
                Some(self)
            }
        }
    }
}

impl EGraph {
    fn match_class(&self, pat: &Pattern, id: Id, subst: Subst, out: &mut Vec<Subst>) {
        let id = self.find(id);
        match pat {
            Pattern::Hole(h) => {
                out.extend(subst.bind(h, Binding { class: id, lit: None }));
            }
            Pattern::Lit(l) => {
                if self
                    .class(id)
                    .nodes
                    .iter()
                    .any(|n| matches!(&n.head, Head::Lit(m) if m == l))
                {
                    out.push(subst);
                }
            }
            Pattern::AnyLit(h, t) => {
                for n in &self.class(id).nodes {
                    if let Head::Lit(l) = &n.head {
                        if l.ty == *t {
                            let b = Binding {
                                class: id,
                                lit: Some(l.clone()),
                            };
                            out.extend(subst.clone().bind(h, b));
                        }
                    }
                }
            }
            Pattern::Node(head, kids) => {
                for n in &self.class(id).nodes {
                    if !head.matches(&n.head) || n.children.len() != kids.len() {
                        continue;
                    }
                    let mut partial = vec![subst.clone()];
                    for (k, c) in kids.iter().zip(&n.children) {
                        let mut next = Vec::new();
                        for s in partial {
                            self.match_class(k, *c, s, &mut next);
                        }
                        partial = next;
                        if partial.is_empty() {
                            break;
                        }
                    }
                    out.extend(partial);
                }
            }
        }
    }

    /// All `(class, substitution)` pairs where the pattern is represented,
    /// in class order. A class matched by several e-nodes in the same way is
    /// reported once.
    pub fn ematch(&self, pat: &Pattern) -> Vec<(Id, Subst)> {
        let mut out = Vec::new();
        for id in self.class_ids() {
            if let Pattern::Node(head, _) = pat {
                if !self.class(id).nodes.iter().any(|n| head.matches(&n.head)) {
                    continue;
                }
            }
            let mut found = Vec::new();
            self.match_class(pat, id, Subst::default(), &mut found);
            let mut unique: Vec<Subst> = Vec::new();
            for s in found {
                if !unique.contains(&s) {
                    unique.push(s);
                }
            }
            out.extend(unique.into_iter().map(|s| (id, s)));
        }
        out
    }

    /// The class of the instance of `pat` under `subst`, if it is already
    /// in the graph.
    pub fn lookup_instance(&self, pat: &Pattern, subst: &Subst) -> Option<Id> {
        match pat {
            Pattern::Hole(h) | Pattern::AnyLit(h, _) => subst.get(h).map(|b| self.find(b.class)),
            Pattern::Lit(l) => self.lookup(&ENode::leaf(Head::Lit(l.clone()))),
            Pattern::Node(head, kids) => {
                let children = kids
                    .iter()
                    .map(|k| self.lookup_instance(k, subst))
                    .collect::<Option<_>>()?;
                self.lookup(&ENode {
                    head: head.to_head(),
                    children,
                })
            }
        }
    }

    /// Adds the instance of `pat` under `subst`.
    pub fn instantiate(&mut self, pat: &Pattern, subst: &Subst) -> Result<Id, EGraphError> {
        match pat {
            Pattern::Hole(h) | Pattern::AnyLit(h, _) => Ok(subst
                .get(h)
                .unwrap_or_else(|| panic!("metavariable ?{h} is unbound"))
                .class),
            Pattern::Lit(l) => self.add_node(ENode::leaf(Head::Lit(l.clone()))),
            Pattern::Node(head, kids) => {
                let children = kids
                    .iter()
                    .map(|k| self.instantiate(k, subst))
                    .collect::<Result<_, _>>()?;
                self.add_node(ENode {
                    head: head.to_head(),
                    children,
                })
            }
        }
    }
}
