//! The target cost model and the cost-opportunity analysis.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::egraph::{saturate, EGraph, Id, Limits};
use crate::extract::ExtractTable;
use crate::ir::{typecheck, Expr, Path, Program, TypeTag};
use crate::rules::simplifying_rules;
use crate::target::{derive_rules, IfMode, RewriteRule, TargetDesc, CMP_COST};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CostError {
    #[error("cannot cost unresolved node `{0}`")]
    Unresolved(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
}

/// Saturation limits of the simplifying pass.
pub const OPPORTUNITY_LIMITS: Limits = Limits {
    node_limit: 2000,
    iter_limit: 4,
};

/// Tree cost of a resolved expression: operator costs plus the target's
/// charges for variables, literals and branches.
pub fn program_cost(e: &Expr, target: &TargetDesc) -> Result<f64, CostError> {
    match e {
        Expr::Var(_) => Ok(target.var_cost()),
        Expr::Lit(l) if l.ty.is_float() => Ok(target.literal_cost(l.ty)),
        Expr::Op(o, args) => {
            let op = target.op(o).ok_or_else(|| CostError::UnknownOperator(o.to_string()))?;
            args.iter()
                .try_fold(op.cost, |acc, a| Ok(acc + program_cost(a, target)?))
        }
        Expr::If(c, t, f) => {
            let ic = target.if_cost();
            let (t, f) = (program_cost(t, target)?, program_cost(f, target)?);
            let branches = match ic.mode {
                IfMode::Scalar => t.max(f),
                IfMode::Vector => t + f,
            };
            Ok(ic.overhead + program_cost(c, target)? + branches)
        }
        Expr::Cmp(_, a, b) => Ok(CMP_COST + program_cost(a, target)? + program_cost(b, target)?),
        _ => Err(CostError::Unresolved(e.to_string())),
    }
}

/// Cost opportunity of every node of a resolved program (Δcost of the node
/// minus Δcost of its children), using the simplifying rules and the
/// target's own rules.
pub fn cost_opportunity(p: &Program, target: &TargetDesc) -> Result<BTreeMap<Path, f64>, CostError> {
    let mut rules = simplifying_rules();
    rules.extend(derive_rules(target));
    cost_opportunity_with(p, target, &rules, OPPORTUNITY_LIMITS)
}

/// [`cost_opportunity`] with an explicit rule set and limits. Values are
/// raw; they may be negative.
pub fn cost_opportunity_with(
    p: &Program,
    target: &TargetDesc,
    rules: &[RewriteRule],
    limits: Limits,
) -> Result<BTreeMap<Path, f64>, CostError> {
    let env = p.type_env();
    let nodes = p.body.nodes();

    // Every branch-free subtree goes into one shared graph.
    let mut g = EGraph::new();
    let mut class_of: BTreeMap<&Path, Id> = BTreeMap::new();
    for (path, n) in &nodes {
        if !n.contains_branch() {
            let id = g.add_expr(n, &env).map_err(|_| CostError::Unresolved(n.to_string()))?;
            class_of.insert(path, id);
        }
    }
    saturate(&mut g, rules, limits);
    let table = ExtractTable::build(&g, target);

    // Δcost per node, children before parents.
    let mut delta: BTreeMap<&Path, f64> = BTreeMap::new();
    for (path, n) in nodes.iter().rev() {
        let kids: f64 = (0..n.children().len())
            .map(|i| {
                let mut c = path.clone();
                c.push(i);
                delta[&c]
            })
            .sum();
        let d = match (n, class_of.get(path)) {
            (Expr::Op(..), Some(id)) => {
                let ty = typecheck(n, &env, target).map_err(|_| CostError::Unresolved(n.to_string()))?;
                let before = program_cost(n, target)?;
                match table.best_cost(&g, *id, ty) {
                    Some(after) => before - after,
                    None => 0.0,
                }
            }
            // Leaves have no opportunity; branch structure passes the
            // children's savings through unchanged.
            (Expr::Var(_) | Expr::Lit(_), _) => 0.0,
            _ => kids,
        };
        delta.insert(path, d);
    }

    Ok(nodes
        .iter()
        .map(|(path, n)| {
            let kids: f64 = (0..n.children().len())
                .map(|i| {
                    let mut c = path.clone();
                    c.push(i);
                    delta[&c]
                })
                .sum();
            (path.clone(), delta[path] - kids)
        })
        .collect())
}

/// Opportunities as used for ranking: negative values count as none.
pub fn clamp(opportunity: f64) -> f64 {
    opportunity.max(0.0)
}

/// Output type of the node at `path`, when it is a float.
pub fn node_type(p: &Program, path: &[usize], target: &TargetDesc) -> Option<TypeTag> {
    let n = p.body.get(path)?;
    typecheck(n, &p.type_env(), target).ok().filter(|t| t.is_float())
}
