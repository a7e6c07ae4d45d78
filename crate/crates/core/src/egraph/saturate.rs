use super::{EGraph, EGraphError};
use crate::target::RewriteRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub node_limit: usize,
    pub iter_limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// No rule adds anything new.
    Saturated,
    NodeLimit,
    IterLimit,
    /// An iteration proved something false even with the rules that add
    /// denominators switched off, and was undone.
    Unsound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaturationReport {
    pub stopped_by: StopReason,
    /// Iterations that changed the graph.
    pub iterations: usize,
    pub node_count: usize,
}

/// Applies `rules` until nothing changes or a limit is hit. Every iteration
/// first collects the matches of all rules, then applies them in rule order,
/// then rebuilds. Terms are never removed.
///
/// An iteration that ends with two different constants in one class, or with
/// a new division by a class holding zero, is rolled back: some rule fired
/// at a point where it does not hold. It is retried once without the rules
/// that add denominators, which stay off for the rest of the run; a second
/// failure ends the run.
pub fn saturate(g: &mut EGraph, rules: &[RewriteRule], limits: Limits) -> SaturationReport {
    let saved_limit = g.node_limit;
    g.set_node_limit(Some(limits.node_limit));
    g.rebuild();
    let mut iterations = 0;
    let mut cautious = false;
    let stopped_by = loop {
        if iterations >= limits.iter_limit {
            break StopReason::IterLimit;
        }
        let matches: Vec<_> = rules
            .iter()
            .filter(|r| !(cautious && r.adds_denominator()))
            .map(|r| (r, g.ematch(&r.lhs)))
            .collect();
        let zero_divisions = g.zero_divisions();
        let before = g.node_count();
        let snapshot = g.clone();
        let mut changed = false;
        let mut hit_limit = false;
        'apply: for (rule, found) in &matches {
            for (id, subst) in found {
                match rule.apply(g, subst) {
                    Ok(Some(new)) => changed |= g.union(*id, new),
                    Ok(None) => {}
                    Err(EGraphError::NodeLimit(_)) => {
                        hit_limit = true;
                        break 'apply;
                    }
                    Err(e) => panic!("rule {} failed: {e}", rule.name),
                }
            }
        }
        changed |= g.node_count() != before;
        g.rebuild();
        if g.conflicting_constants().is_some() || g.zero_divisions() > zero_divisions {
            *g = snapshot;
            if cautious {
                break StopReason::Unsound;
            }
            cautious = true;
            continue;
        }
        if changed {
            iterations += 1;
        }
        if hit_limit {
            break StopReason::NodeLimit;
        }
        if !changed {
            break StopReason::Saturated;
        }
    };
    g.set_node_limit(saved_limit);
    SaturationReport {
        stopped_by,
        iterations,
        node_count: g.node_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::Pattern;
    use crate::ir::{Expr, RealFn, Symbol, TypeEnv, TypeTag};
    use crate::target::RuleKind;

    fn env() -> TypeEnv {
        [(Symbol::new("x"), TypeTag::B64)].into_iter().collect()
    }

    fn limits() -> Limits {
        Limits {
            node_limit: 8000,
            iter_limit: 10,
        }
    }

    #[test]
    fn empty_rule_list_saturates_immediately() {
        let mut g = EGraph::new();
        g.add_expr(&Expr::Real(RealFn::Neg, vec![Expr::var("x")]), &env())
            .unwrap();
        let before = g.dump();
        let r = saturate(&mut g, &[], limits());
        assert_eq!(r.stopped_by, StopReason::Saturated);
        assert_eq!(r.iterations, 0);
        assert_eq!(g.dump(), before);
    }

    #[test]
    fn explosive_rules_stop_at_the_node_limit() {
        // Every class gets a fresh `exp` class above it, forever.
        let grow = RewriteRule::new(
            "grow",
            Pattern::hole("a"),
            Pattern::real(RealFn::Neg, vec![Pattern::real(RealFn::Exp, vec![Pattern::hole("a")])]),
            RuleKind::MathIdentity,
        )
        .unwrap();
        let mut g = EGraph::new();
        g.add_expr(&Expr::var("x"), &env()).unwrap();
        let r = saturate(
            &mut g,
            &[grow],
            Limits {
                node_limit: 50,
                iter_limit: 100,
            },
        );
        assert_eq!(r.stopped_by, StopReason::NodeLimit);
        assert!(r.node_count <= 50);
    }

    fn xy() -> TypeEnv {
        [(Symbol::new("x"), TypeTag::B64), (Symbol::new("y"), TypeTag::B64)]
            .into_iter()
            .collect()
    }

    #[test]
    fn new_denominators_are_dropped_after_a_division_by_zero() {
        let rules = crate::rules::parse_rules(
            "(rule flip-add (+ ?a ?b) (/ (- (* ?a ?a) (* ?b ?b)) (- ?a ?b)))
             (rule sub-self (- ?a ?a) 0)",
        )
        .unwrap();
        assert!(rules[0].adds_denominator());
        assert!(!rules[1].adds_denominator());
        let mut g = EGraph::new();
        let twice = |v: &str| Expr::Real(RealFn::Add, vec![Expr::var(v), Expr::var(v)]);
        let a = g.add_expr(&twice("x"), &xy()).unwrap();
        let b = g.add_expr(&twice("y"), &xy()).unwrap();
        let r = saturate(&mut g, &rules, limits());
        // Both sums are 0/0 once the flipped forms meet sub-self.
        assert_ne!(g.find(a), g.find(b));
        assert_eq!(g.zero_divisions(), 0);
        assert_ne!(r.stopped_by, StopReason::Unsound);
    }

    #[test]
    fn false_rules_are_rolled_back() {
        let mut rules = crate::rules::parse_rules("(rule left (+ ?a ?b) ?a)").unwrap();
        rules.push(RewriteRule::fold(RealFn::Add));
        let mut g = EGraph::new();
        g.add_expr(
            &Expr::Real(RealFn::Add, vec![Expr::real_lit(1), Expr::real_lit(2)]),
            &env(),
        )
        .unwrap();
        g.rebuild();
        let before = g.dump();
        let r = saturate(&mut g, &rules, limits());
        assert_eq!(r.stopped_by, StopReason::Unsound);
        assert_eq!(r.iterations, 0);
        assert_eq!(g.dump(), before);
        assert!(g.conflicting_constants().is_none());
    }
}
