use std::collections::{BTreeMap, BTreeSet};

use crate::costing::{cost_opportunity, program_cost};
use crate::ir::{format_fpcore, resolve, Program};
use crate::oracle::{error_against, local_error, sample, split, Sample};
use crate::par;
use crate::target::TargetDesc;

use super::sites::{pick_sites, rewrite_site, search_rules};
use super::{pareto_filter, Candidate, IterationTrace, Origin, SearchConfig, SearchError, SiteTrace};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// The input program, resolved and scored like any frontier member.
    pub original: Candidate,
    /// Scored on the test points, sorted by cost.
    pub frontier: Vec<Candidate>,
    pub trace: Vec<IterationTrace>,
    pub train: Sample,
    pub test: Sample,
}

/// Cost and mean training error of a resolved program.
pub fn evaluate(p: &Program, target: &TargetDesc, train: &Sample) -> Result<(f64, f64), SearchError> {
    Ok((program_cost(&p.body, target)?, error_against(p, train, target).mean))
}

fn validate(cfg: &SearchConfig) -> Result<(), SearchError> {
    let fields = [
        ("iterations", cfg.iterations),
        ("node_limit", cfg.node_limit),
        ("rewrite_iters", cfg.rewrite_iters),
        ("candidates_per_site", cfg.candidates_per_site),
        ("sites_per_heuristic", cfg.sites_per_heuristic),
        ("points", cfg.points),
    ];
    match fields.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(SearchError::Config(format!("{name} must be positive"))),
        None => Ok(()),
    }
}

/// Every program seen so far, keyed by its text.
struct Registry {
    ids: BTreeMap<String, usize>,
    all: Vec<Candidate>,
}

impl Registry {
    /// Scores the programs not seen before and records them. Returns the new
    /// candidates in input order.
    fn admit(
        &mut self,
        programs: Vec<(Program, usize)>,
        iteration: usize,
        target: &TargetDesc,
        train: &Sample,
    ) -> Result<Vec<Candidate>, SearchError> {
        let mut fresh: Vec<(Program, String, usize)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (p, parent) in programs {
            let text = format_fpcore(&p, target);
            if !self.ids.contains_key(&text) && seen.insert(text.clone()) {
                fresh.push((p, text, parent));
            }
        }
        let scores = par::map(&fresh, |(p, _, _)| evaluate(p, target, train));
        let mut out = Vec::with_capacity(fresh.len());
        for ((program, text, parent), score) in fresh.into_iter().zip(scores) {
            let (cost, train_error) = score?;
            let c = Candidate {
                id: self.all.len(),
                program,
                text: text.clone(),
                cost,
                train_error,
                test_error: None,
                origin: Origin {
                    iteration,
                    parent: Some(parent),
                },
            };
            self.ids.insert(text, c.id);
            self.all.push(c.clone());
            out.push(c);
        }
        Ok(out)
    }
}

/// Searches for cheaper and more accurate implementations of `p` on
/// `target`. Deterministic for a given configuration.
pub fn improve(p: &Program, target: &TargetDesc, cfg: &SearchConfig) -> Result<SearchResult, SearchError> {
    validate(cfg)?;
    let p = resolve(p, target)?;
    let all_points = sample(&p, target, cfg.points, cfg.seed)?;
    let (train, test) = split(&all_points);
    let rules = search_rules(target);

    let (cost, train_error) = evaluate(&p, target, &train)?;
    let text = format_fpcore(&p, target);
    let original = Candidate {
        id: 0,
        program: p,
        text: text.clone(),
        cost,
        train_error,
        test_error: None,
        origin: Origin {
            iteration: 0,
            parent: None,
        },
    };
    let mut registry = Registry {
        ids: BTreeMap::from([(text, 0)]),
        all: vec![original.clone()],
    };
    let mut frontier = vec![original.clone()];
    let mut expanded: BTreeSet<usize> = BTreeSet::new();
    let mut trace = Vec::with_capacity(cfg.iterations);

    for iteration in 1..=cfg.iterations {
        let members: Vec<&Candidate> = frontier.iter().filter(|c| !expanded.contains(&c.id)).collect();
        let picked = par::map(&members, |c| -> Result<_, SearchError> {
            let le = local_error(&c.program, &train.points, target);
            let opp = cost_opportunity(&c.program, target)?;
            Ok(pick_sites(&c.program.body, &le, &opp, cfg.sites_per_heuristic))
        });
        let mut jobs = Vec::new();
        for (c, sites) in members.iter().zip(picked) {
            for s in sites? {
                jobs.push((*c, s));
            }
        }
        let rewrites = par::map(&jobs, |(c, s)| rewrite_site(&c.program, &s.path, target, &rules, cfg));

        let mut sites = Vec::with_capacity(jobs.len());
        let mut programs = Vec::new();
        for ((c, s), r) in jobs.iter().zip(rewrites) {
            sites.push(SiteTrace {
                parent: c.id,
                path: s.path.clone(),
                reason: s.reason,
                egraph_nodes: r.egraph_nodes,
                stopped_by: r.stopped_by,
                candidates: r.programs.len(),
            });
            programs.extend(r.programs.into_iter().map(|q| (q, c.id)));
        }
        expanded.extend(members.iter().map(|c| c.id));

        let fresh = registry.admit(programs, iteration, target, &train)?;
        let candidates = fresh.len();
        frontier.extend(fresh);
        frontier = pareto_filter(frontier);
        trace.push(IterationTrace {
            iteration,
            sites,
            candidates,
            frontier_size: frontier.len(),
            best_cost: frontier.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min),
            best_error: frontier.iter().map(|c| c.train_error).fold(f64::INFINITY, f64::min),
        });
    }

    let test_errors = par::map(&frontier, |c| error_against(&c.program, &test, target).mean);
    for (c, e) in frontier.iter_mut().zip(test_errors) {
        c.test_error = Some(e);
    }
    let frontier = pareto_filter(frontier);
    let mut original = original;
    original.test_error = Some(error_against(&original.program, &test, target).mean);

    Ok(SearchResult {
        original,
        frontier,
        trace,
        train,
        test,
    })
}
