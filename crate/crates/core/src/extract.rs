//! Typed extraction: the cheapest all-float program of each type in each
//! e-class, and one candidate per e-node for candidate generation.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::egraph::{EGraph, ENode, Head, Id};
use crate::ir::{Expr, TypeTag};
use crate::target::TargetDesc;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("class {0} has no well-typed {1} program")]
    NoWellTypedProgram(Id, TypeTag),
}

#[derive(Clone, Debug)]
struct Entry {
    cost: f64,
    size: usize,
    node: ENode,
}

impl Entry {
    /// Cost, then size, then head name, then children: a total order so the
    /// choice does not depend on visiting order.
    fn better_than(&self, other: &Entry) -> bool {
        let ord = self
            .cost
            .partial_cmp(&other.cost)
            .unwrap_or(Ordering::Equal)
            .then(self.size.cmp(&other.size))
            .then_with(|| self.node.head.name().cmp(&other.node.head.name()))
            .then_with(|| self.node.children.cmp(&other.node.children));
        ord == Ordering::Less
    }
}

/// Best entry per (class, float type).
#[derive(Clone, Debug, Default)]
pub struct ExtractTable {
    best: HashMap<(Id, TypeTag), Entry>,
}

/// Cost and type of `node` built from the children's current best entries,
/// or `None` if it is not an all-float node or some child lacks an entry at
/// the type it needs.
fn candidate(node: &ENode, best: &HashMap<(Id, TypeTag), Entry>, target: &TargetDesc) -> Option<(TypeTag, Entry)> {
    match &node.head {
        Head::Var(_, t) => Some((
            *t,
            Entry {
                cost: target.var_cost(),
                size: 1,
                node: node.clone(),
            },
        )),
        Head::Lit(l) if l.ty.is_float() => Some((
            l.ty,
            Entry {
                cost: target.literal_cost(l.ty),
                size: 1,
                node: node.clone(),
            },
        )),
        Head::Op(o) => {
            let op = target.op(o)?;
            if op.params.len() != node.children.len() {
                return None;
            }
            let mut cost = op.cost;
            let mut size = 1;
            for (c, (_, t)) in node.children.iter().zip(&op.params) {
                let e = best.get(&(*c, *t))?;
                cost += e.cost;
                size += e.size;
            }
            Some((
                op.ret,
                Entry {
                    cost,
                    size,
                    node: node.clone(),
                },
            ))
        }
        _ => None,
    }
}

impl ExtractTable {
    /// Iterates to a fixed point over the whole graph. `g` must be rebuilt.
    pub fn build(g: &EGraph, target: &TargetDesc) -> Self {
        let mut best: HashMap<(Id, TypeTag), Entry> = HashMap::new();
        let ids: Vec<Id> = g.class_ids().collect();
        loop {
            let mut changed = false;
            for &id in &ids {
                for node in &g.class(id).nodes {
                    let Some((t, e)) = candidate(node, &best, target) else {
                        continue;
                    };
                    let slot = best.get(&(id, t));
                    if slot.is_none_or(|old| e.better_than(old)) {
                        best.insert((id, t), e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        ExtractTable { best }
    }

    pub fn best_cost(&self, g: &EGraph, id: Id, t: TypeTag) -> Option<f64> {
        self.best.get(&(g.find(id), t)).map(|e| e.cost)
    }

    pub fn has(&self, g: &EGraph, id: Id, t: TypeTag) -> bool {
        self.best.contains_key(&(g.find(id), t))
    }

    /// The cheapest program of type `t` in class `id`.
    pub fn extract(&self, g: &EGraph, id: Id, t: TypeTag, target: &TargetDesc) -> Result<Expr, ExtractError> {
        let id = g.find(id);
        let e = self.best.get(&(id, t)).ok_or(ExtractError::NoWellTypedProgram(id, t))?;
        self.build_node(g, &e.node, target)
    }

    /// Expression for `node` with every child filled by its best entry.
    fn build_node(&self, g: &EGraph, node: &ENode, target: &TargetDesc) -> Result<Expr, ExtractError> {
        Ok(match &node.head {
            Head::Var(v, _) => Expr::Var(v.clone()),
            Head::Lit(l) => Expr::Lit(l.clone()),
            Head::Op(o) => {
                let op = target.op(o).expect("table entries use target operators");
                let args = node
                    .children
                    .iter()
                    .zip(&op.params)
                    .map(|(c, (_, t))| self.extract(g, *c, *t, target))
                    .collect::<Result<_, _>>()?;
                Expr::Op(o.clone(), args)
            }
            Head::Real(_) => unreachable!("real nodes are never table entries"),
        })
    }

    /// One program per float e-node of type `t` in class `id`, children
    /// filled with their cheapest programs. Deduplicated, sorted by cost and
    /// cut to the `cap` cheapest.
    pub fn multi_extract(&self, g: &EGraph, id: Id, t: TypeTag, cap: usize, target: &TargetDesc) -> Vec<Expr> {
        let mut found: Vec<(f64, Expr)> = Vec::new();
        for node in &g.class(id).nodes {
            match candidate(node, &self.best, target) {
                Some((ty, e)) if ty == t => {
                    let Ok(expr) = self.build_node(g, node, target) else {
                        continue;
                    };
                    if !found.iter().any(|(_, x)| *x == expr) {
                        found.push((e.cost, expr));
                    }
                }
                _ => {}
            }
        }
        // Stable: equal costs keep the class's node order.
        found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        found.truncate(cap);
        found.into_iter().map(|(_, e)| e).collect()
    }
}

pub fn build_table(g: &EGraph, target: &TargetDesc) -> ExtractTable {
    ExtractTable::build(g, target)
}

pub fn typed_extract(g: &EGraph, target: &TargetDesc, root: Id, t: TypeTag) -> Result<Expr, ExtractError> {
    ExtractTable::build(g, target).extract(g, root, t, target)
}
