//! E-graphs over the mixed real/float IR.
//!
//! Classes hold e-nodes whose desugarings are equal as real numbers, so one
//! class may contain both real-function nodes and float-operator nodes of
//! several types.

mod pattern;
mod saturate;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ir::{Expr, Literal, RealFn, Symbol, TypeEnv, TypeTag};

pub use pattern::{Binding, PatHead, Pattern, Subst};
pub use saturate::{saturate, Limits, SaturationReport, StopReason};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// What an e-node applies to its children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    /// A program variable, at its declared type.
    Var(Symbol, TypeTag),
    Lit(Literal),
    Real(RealFn),
    Op(Symbol),
}

impl Head {
    pub fn name(&self) -> String {
        match self {
            Head::Var(v, _) => v.to_string(),
            Head::Lit(l) => Expr::Lit(l.clone()).to_string(),
            Head::Real(f) => f.name().to_string(),
            Head::Op(o) => o.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENode {
    pub head: Head,
    pub children: Vec<Id>,
}

impl ENode {
    pub fn leaf(head: Head) -> Self {
        ENode {
            head,
            children: Vec::new(),
        }
    }
}

impl fmt::Display for ENode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return f.write_str(&self.head.name());
        }
        write!(f, "({}", self.head.name())?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, Default)]
pub struct EClass {
    pub nodes: Vec<ENode>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EGraphError {
    #[error("e-graph node limit of {0} reached")]
    NodeLimit(usize),
    #[error("branches cannot be added to an e-graph")]
    Branch,
    #[error("variable `{0}` has no type")]
    UntypedVar(String),
}

#[derive(Clone, Debug, Default)]
pub struct EGraph {
    parent: Vec<u32>,
    classes: Vec<Option<EClass>>,
    memo: HashMap<ENode, Id>,
    node_count: usize,
    node_limit: Option<usize>,
    dirty: bool,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes additions fail once the graph holds `limit` e-nodes.
    pub fn set_node_limit(&mut self, limit: Option<usize>) {
        self.node_limit = limit;
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().filter(|c| c.is_some()).count()
    }

    pub fn find(&self, mut id: Id) -> Id {
        while self.parent[id.index()] != id.0 {
            id = Id(self.parent[id.index()]);
        }
        id
    }

    fn find_mut(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut cur = id;
        while cur != root {
            let next = Id(self.parent[cur.index()]);
            self.parent[cur.index()] = root.0;
            cur = next;
        }
        root
    }

    fn canonicalize(&self, node: &ENode) -> ENode {
        ENode {
            head: node.head.clone(),
            children: node.children.iter().map(|c| self.find(*c)).collect(),
        }
    }

    /// Canonical ids of live classes, in increasing order.
    pub fn class_ids(&self) -> impl Iterator<Item = Id> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| Id(i as u32))
    }

    pub fn class(&self, id: Id) -> &EClass {
        self.classes[self.find(id).index()]
            .as_ref()
            .expect("canonical id names a live class")
    }

    /// The class holding `node`, if the graph has it.
    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo.get(&self.canonicalize(node)).map(|id| self.find(*id))
    }

    /// Adds one e-node, returning its class.
    pub fn add_node(&mut self, node: ENode) -> Result<Id, EGraphError> {
        let node = self.canonicalize(&node);
        if let Some(id) = self.memo.get(&node) {
            return Ok(self.find(*id));
        }
        if let Some(limit) = self.node_limit {
            if self.node_count >= limit {
                return Err(EGraphError::NodeLimit(limit));
            }
        }
        let id = Id(self.classes.len() as u32);
        self.parent.push(id.0);
        self.classes.push(Some(EClass {
            nodes: vec![node.clone()],
        }));
        self.memo.insert(node, id);
        self.node_count += 1;
        Ok(id)
    }

    /// Adds a branch-free expression; variables take their types from `env`.
    pub fn add_expr(&mut self, e: &Expr, env: &TypeEnv) -> Result<Id, EGraphError> {
        let node = match e {
            Expr::Var(v) => {
                let t = env
                    .get(v)
                    .copied()
                    .ok_or_else(|| EGraphError::UntypedVar(v.to_string()))?;
                ENode::leaf(Head::Var(v.clone(), t))
            }
            Expr::Lit(l) => ENode::leaf(Head::Lit(l.clone())),
            Expr::Real(f, args) => ENode {
                head: Head::Real(*f),
                children: args.iter().map(|a| self.add_expr(a, env)).collect::<Result<_, _>>()?,
            },
            Expr::Op(o, args) => ENode {
                head: Head::Op(o.clone()),
                children: args.iter().map(|a| self.add_expr(a, env)).collect::<Result<_, _>>()?,
            },
            Expr::If(..) | Expr::Cmp(..) | Expr::Annot(..) => return Err(EGraphError::Branch),
        };
        self.add_node(node)
    }

    /// The class representing `e`, if every node of `e` is present.
    pub fn lookup_expr(&self, e: &Expr, env: &TypeEnv) -> Option<Id> {
        let node = match e {
            Expr::Var(v) => ENode::leaf(Head::Var(v.clone(), *env.get(v)?)),
            Expr::Lit(l) => ENode::leaf(Head::Lit(l.clone())),
            Expr::Real(f, args) => ENode {
                head: Head::Real(*f),
                children: args.iter().map(|a| self.lookup_expr(a, env)).collect::<Option<_>>()?,
            },
            Expr::Op(o, args) => ENode {
                head: Head::Op(o.clone()),
                children: args.iter().map(|a| self.lookup_expr(a, env)).collect::<Option<_>>()?,
            },
            _ => return None,
        };
        self.lookup(&node)
    }

    /// Merges two classes. Congruence is restored by [`EGraph::rebuild`].
    /// Returns whether anything changed.
    pub fn union(&mut self, a: Id, b: Id) -> bool {
        let a = self.find_mut(a);
        let b = self.find_mut(b);
        if a == b {
            return false;
        }
        let (root, other) = if a < b { (a, b) } else { (b, a) };
        self.parent[other.index()] = root.0;
        let moved = self.classes[other.index()].take().expect("live class");
        self.classes[root.index()]
            .as_mut()
            .expect("live class")
            .nodes
            .extend(moved.nodes);
        self.dirty = true;
        true
    }

    /// Restores the hashcons and congruence invariants after unions.
    pub fn rebuild(&mut self) {
        if !self.dirty {
            return;
        }
        loop {
            let mut merges = Vec::new();
            let mut memo: HashMap<ENode, Id> = HashMap::with_capacity(self.memo.len());
            for i in 0..self.classes.len() {
                let Some(class) = self.classes[i].take() else {
                    continue;
                };
                let id = Id(i as u32);
                let mut nodes: Vec<ENode> = class.nodes.iter().map(|n| self.canonicalize(n)).collect();
                nodes.sort();
                nodes.dedup();
                for n in &nodes {
                    match memo.get(n) {
                        Some(&other) if other != id => merges.push((other, id)),
                        Some(_) => {}
                        None => {
                            memo.insert(n.clone(), id);
                        }
                    }
                }
                self.classes[i] = Some(EClass { nodes });
            }
            self.node_count = memo.len();
            self.memo = memo;
            let mut changed = false;
            for (a, b) in merges {
                changed |= self.union(a, b);
            }
            if !changed {
                break;
            }
        }
        self.dirty = false;
    }

    /// Whether the class holds a literal equal to zero, at any type.
    pub fn has_zero_literal(&self, id: Id) -> bool {
        self.class(self.find(id))
            .nodes
            .iter()
            .any(|n| matches!(&n.head, Head::Lit(l) if l.value.cmp0().is_eq()))
    }

    /// A class holding literals of two different values: the rules have
    /// proved something false.
    pub fn conflicting_constants(&self) -> Option<Id> {
        self.class_ids().find(|&id| {
            let mut vals = self.class(id).nodes.iter().filter_map(|n| match &n.head {
                Head::Lit(l) => Some(&l.value),
                _ => None,
            });
            match vals.next() {
                Some(first) => vals.any(|v| v != first),
                None => false,
            }
        })
    }

    /// Real divisions whose denominator class holds a zero literal. Once one
    /// exists, every numerator it shares a class with can be merged with
    /// anything else divided by zero.
    pub fn zero_divisions(&self) -> usize {
        self.class_ids()
            .flat_map(|id| self.class(id).nodes.iter())
            .filter(|n| n.head == Head::Real(RealFn::Div) && self.has_zero_literal(n.children[1]))
            .count()
    }

    /// One line per class, `cN := node | node`, for golden tests and
    /// debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.class_ids() {
            let nodes: Vec<String> = self.class(id).nodes.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("{id} := {}\n", nodes.join(" | ")));
        }
        out
    }
}
