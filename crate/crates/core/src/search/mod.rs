//! The improvement loop: choose subexpressions worth rewriting, generate
//! lowerings of them with equality saturation, score the resulting programs
//! and keep the cost/error Pareto frontier.

mod improve;
mod pareto;
mod sites;

use thiserror::Error;

use crate::costing::CostError;
use crate::egraph::StopReason;
use crate::ir::{IrError, Path, Program};
use crate::oracle::OracleError;

pub use improve::{evaluate, improve, SearchResult};
pub use pareto::pareto_filter;
pub use sites::{pick_sites, rewrite_site, search_rules, Site, SiteReason, SiteRewrite};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub iterations: usize,
    pub node_limit: usize,
    /// Saturation iterations per rewritten subexpression.
    pub rewrite_iters: usize,
    pub candidates_per_site: usize,
    /// Sites taken from each heuristic per frontier member.
    pub sites_per_heuristic: usize,
    pub points: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iterations: 4,
            node_limit: 8000,
            rewrite_iters: 6,
            candidates_per_site: 40,
            sites_per_heuristic: 3,
            points: 512,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Where a candidate came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    /// 0 for the input program.
    pub iteration: usize,
    /// Registry id of the program it was rewritten from.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// Registry id, unique within one search.
    pub id: usize,
    pub program: Program,
    /// The program as FPCore text; also the tie-breaker between equal
    /// scores.
    pub text: String,
    pub cost: f64,
    /// Mean bits of error on the training points.
    pub train_error: f64,
    /// Mean bits of error on the test points, once measured.
    pub test_error: Option<f64>,
    pub origin: Origin,
}

impl Candidate {
    /// The error the frontier is built on: test error once known, training
    /// error before.
    pub fn error(&self) -> f64 {
        self.test_error.unwrap_or(self.train_error)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiteTrace {
    /// Registry id of the program the site belongs to.
    pub parent: usize,
    pub path: Path,
    pub reason: SiteReason,
    pub egraph_nodes: usize,
    pub stopped_by: StopReason,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub sites: Vec<SiteTrace>,
    /// New programs scored this iteration.
    pub candidates: usize,
    pub frontier_size: usize,
    /// Cheapest frontier cost after the iteration.
    pub best_cost: f64,
    /// Lowest mean training error on the frontier after the iteration.
    pub best_error: f64,
}

impl IterationTrace {
    pub fn max_egraph_nodes(&self) -> usize {
        self.sites.iter().map(|s| s.egraph_nodes).max().unwrap_or(0)
    }

    pub fn max_candidates_per_site(&self) -> usize {
        self.sites.iter().map(|s| s.candidates).max().unwrap_or(0)
    }
}
