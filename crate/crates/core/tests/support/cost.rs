//! Cost change of a whole program under the simplifying pass.

use fplower::costing::{program_cost, OPPORTUNITY_LIMITS};
use fplower::egraph::{saturate, EGraph};
use fplower::extract::ExtractTable;
use fplower::ir::{typecheck, Expr, Program};
use fplower::rules::simplifying_rules;
use fplower::target::{derive_rules, TargetDesc};

/// Cost of the root minus the cheapest equivalent found in a graph seeded
/// with every subtree.
pub fn root_delta(p: &Program, t: &TargetDesc) -> f64 {
    if matches!(p.body, Expr::Var(_) | Expr::Lit(_)) {
        return 0.0;
    }
    let env = p.type_env();
    let mut g = EGraph::new();
    let mut root = None;
    for (path, n) in p.body.nodes() {
        let id = g.add_expr(n, &env).unwrap();
        if path.is_empty() {
            root = Some(id);
        }
    }
    let mut rules = simplifying_rules();
    rules.extend(derive_rules(t));
    saturate(&mut g, &rules, OPPORTUNITY_LIMITS);
    let table = ExtractTable::build(&g, t);
    let root = g.find(root.unwrap());
    let ty = typecheck(&p.body, &env, t).unwrap();
    let before = program_cost(&p.body, t).unwrap();
    table.best_cost(&g, root, ty).map_or(0.0, |after| before - after)
}
