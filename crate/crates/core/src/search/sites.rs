use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::costing::clamp;
use crate::egraph::{saturate, EGraph, Limits, StopReason};
use crate::extract::ExtractTable;
use crate::ir::{desugar, typecheck, Expr, Path, Program};
use crate::rules::math_rules;
use crate::target::{derive_rules, RewriteRule, TargetDesc};

use super::SearchConfig;

/// Local error below this many bits does not make a node worth rewriting.
pub const LOCAL_ERROR_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SiteReason {
    LocalError,
    CostOpportunity,
    Both,
}

impl SiteReason {
    pub fn name(self) -> &'static str {
        match self {
            SiteReason::LocalError => "local-error",
            SiteReason::CostOpportunity => "cost-opportunity",
            SiteReason::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub path: Path,
    pub reason: SiteReason,
}

/// Operator nodes that may be rewritten: not under a comparison, not in the
/// condition of a branch, and with no branch below them.
fn rewritable(body: &Expr) -> Vec<Path> {
    fn walk(e: &Expr, path: &mut Path, out: &mut Vec<Path>) {
        match e {
            Expr::Cmp(..) => {}
            Expr::If(_, t, f) => {
                for (i, k) in [(1, t), (2, f)] {
                    path.push(i);
                    walk(k, path, out);
                    path.pop();
                }
            }
            _ => {
                if matches!(e, Expr::Op(..)) && !e.contains_branch() {
                    out.push(path.clone());
                }
                for (i, k) in e.children().into_iter().enumerate() {
                    path.push(i);
                    walk(k, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(body, &mut Vec::new(), &mut out);
    out
}

fn top_k(scores: &BTreeMap<Path, f64>, allowed: &[Path], floor: f64, k: usize) -> Vec<Path> {
    let mut ranked: Vec<(&Path, f64)> = allowed
        .iter()
        .filter_map(|p| scores.get(p).map(|v| (p, *v)))
        .filter(|(_, v)| *v > floor)
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.into_iter().take(k).map(|(p, _)| p.clone()).collect()
}

/// The union of the `k` nodes with the most local error (above the
/// threshold) and the `k` nodes with the most cost opportunity (above zero).
/// Local-error picks come first.
pub fn pick_sites(
    body: &Expr,
    local_error: &BTreeMap<Path, f64>,
    opportunity: &BTreeMap<Path, f64>,
    k: usize,
) -> Vec<Site> {
    let allowed = rewritable(body);
    let clamped: BTreeMap<Path, f64> = opportunity.iter().map(|(p, v)| (p.clone(), clamp(*v))).collect();
    let by_error = top_k(local_error, &allowed, LOCAL_ERROR_THRESHOLD, k);
    let by_cost = top_k(&clamped, &allowed, 0.0, k);
    let mut out: Vec<Site> = by_error
        .iter()
        .map(|p| Site {
            path: p.clone(),
            reason: if by_cost.contains(p) {
                SiteReason::Both
            } else {
                SiteReason::LocalError
            },
        })
        .collect();
    for p in by_cost {
        if !by_error.contains(&p) {
            out.push(Site {
                path: p,
                reason: SiteReason::CostOpportunity,
            });
        }
    }
    out
}

/// Rules of the rewrite pass. The target's rules come first so lowerings
/// are applied before a node limit can cut an iteration short.
pub fn search_rules(target: &TargetDesc) -> Vec<RewriteRule> {
    let mut rules = derive_rules(target);
    rules.extend(math_rules());
    rules
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiteRewrite {
    /// Whole programs with the site replaced, original included.
    pub programs: Vec<Program>,
    pub egraph_nodes: usize,
    pub stopped_by: StopReason,
}

/// Saturates a graph seeded with the subexpression at `path` and its real
/// meaning, extracts up to the configured number of variants at the site's
/// type and substitutes each back into the program.
pub fn rewrite_site(
    p: &Program,
    path: &[usize],
    target: &TargetDesc,
    rules: &[RewriteRule],
    cfg: &SearchConfig,
) -> SiteRewrite {
    let empty = SiteRewrite {
        programs: vec![],
        egraph_nodes: 0,
        stopped_by: StopReason::Saturated,
    };
    let env = p.type_env();
    let Some(site) = p.body.get(path) else { return empty };
    let Ok(ty) = typecheck(site, &env, target) else {
        return empty;
    };
    if !ty.is_float() {
        return empty;
    }

    let mut g = EGraph::new();
    let (Ok(root), Ok(real)) = (g.add_expr(site, &env), g.add_expr(&desugar(site, target), &env)) else {
        return empty;
    };
    g.union(root, real);
    g.rebuild();
    let report = saturate(
        &mut g,
        rules,
        Limits {
            node_limit: cfg.node_limit,
            iter_limit: cfg.rewrite_iters,
        },
    );
    let table = ExtractTable::build(&g, target);
    let root = g.find(root);
    let programs = table
        .multi_extract(&g, root, ty, cfg.candidates_per_site, target)
        .into_iter()
        .map(|v| p.with_body(p.body.replace_at(path, v)))
        .collect();
    SiteRewrite {
        programs,
        egraph_nodes: g.node_count(),
        stopped_by: report.stopped_by,
    }
}
