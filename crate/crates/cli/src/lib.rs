//! Report building and output formats for the `fplower` command.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use fplower::ir::{parse_program, IrError};
use fplower::search::{improve, Candidate, SearchConfig, SearchError, SearchResult};
use fplower::target::{format_target_code, CodegenError, TargetDesc, TargetError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {msg}")]
    Read { path: String, msg: String },
    #[error("cannot write {path}: {msg}")]
    Write { path: String, msg: String },
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
}

impl CliError {
    /// 1 for I/O failures, 3 for everything the input or target is to
    /// blame for.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => 1,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Fpcore,
    Code,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub points: usize,
    pub iterations: usize,
    pub node_limit: usize,
    pub rewrite_iters: usize,
    pub candidates_per_site: usize,
    pub sites_per_heuristic: usize,
}

impl From<&SearchConfig> for ConfigEcho {
    fn from(c: &SearchConfig) -> Self {
        ConfigEcho {
            seed: c.seed,
            points: c.points,
            iterations: c.iterations,
            node_limit: c.node_limit,
            rewrite_iters: c.rewrite_iters,
            candidates_per_site: c.candidates_per_site,
            sites_per_heuristic: c.sites_per_heuristic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub cost: f64,
    /// Output precision minus the mean test error.
    pub accuracy: f64,
    pub train_error: f64,
    pub test_error: f64,
    pub fpcore: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub code: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteEcho {
    pub parent: usize,
    pub path: Vec<usize>,
    pub reason: String,
    pub egraph_nodes: usize,
    pub stopped_by: String,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationEcho {
    pub iteration: usize,
    pub candidates: usize,
    pub frontier_size: usize,
    pub best_cost: f64,
    pub best_error: f64,
    pub sites: Vec<SiteEcho>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub input: String,
    pub target: String,
    pub config: ConfigEcho,
    pub train_points: usize,
    pub test_points: usize,
    pub original: Entry,
    /// Sorted by cost, cheapest first.
    pub frontier: Vec<Entry>,
    pub trace: Vec<IterationEcho>,
}

fn entry(c: &Candidate, target: &TargetDesc) -> Entry {
    let test_error = c.test_error.unwrap_or(c.train_error);
    let p = c.program.output.precision().expect("float output") as f64;
    Entry {
        cost: c.cost,
        accuracy: p - test_error,
        train_error: c.train_error,
        test_error,
        fpcore: c.text.clone(),
        code: if target.has_templates() {
            format_target_code(&c.program, target).ok()
        } else {
            None
        },
    }
}

pub fn build_report(input: &str, target: &TargetDesc, cfg: &SearchConfig, r: &SearchResult) -> Report {
    Report {
        input: input.trim().to_string(),
        target: target.name.clone(),
        config: cfg.into(),
        train_points: r.train.len(),
        test_points: r.test.len(),
        original: entry(&r.original, target),
        frontier: r.frontier.iter().map(|c| entry(c, target)).collect(),
        trace: r
            .trace
            .iter()
            .map(|t| IterationEcho {
                iteration: t.iteration,
                candidates: t.candidates,
                frontier_size: t.frontier_size,
                best_cost: t.best_cost,
                best_error: t.best_error,
                sites: t
                    .sites
                    .iter()
                    .map(|s| SiteEcho {
                        parent: s.parent,
                        path: s.path.clone(),
                        reason: s.reason.name().to_string(),
                        egraph_nodes: s.egraph_nodes,
                        stopped_by: format!("{:?}", s.stopped_by).to_lowercase(),
                        candidates: s.candidates,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parses one FPCore program and runs the search on it.
pub fn compile(input: &str, target: &TargetDesc, cfg: &SearchConfig) -> Result<Report, CliError> {
    let p = parse_program(input)?;
    let r = improve(&p, target, cfg)?;
    Ok(build_report(input, target, cfg, &r))
}

/// 17 significant digits: enough to read the exact double back.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(r: &Report, format: Format) -> Result<String, CliError> {
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string_pretty(r).expect("reports serialize");
            out.push('\n');
        }
        Format::Csv => {
            out.push_str("cost,accuracy,fpcore\n");
            for e in &r.frontier {
                let _ = writeln!(out, "{},{},{}", sig17(e.cost), sig17(e.accuracy), csv_field(&e.fpcore));
            }
        }
        Format::Fpcore => {
            for e in &r.frontier {
                let _ = writeln!(out, "; cost={} accuracy={}", sig17(e.cost), sig17(e.accuracy));
                let _ = writeln!(out, "{}\n", e.fpcore);
            }
        }
        Format::Code => {
            for e in &r.frontier {
                let code = e
                    .code
                    .as_ref()
                    .ok_or_else(|| CodegenError::NoTemplates(r.target.clone()))?;
                let _ = writeln!(out, "// cost={} accuracy={}", sig17(e.cost), sig17(e.accuracy));
                let _ = writeln!(out, "{code}\n");
            }
        }
    }
    Ok(out)
}

/// The operator table printed by `check-target`.
pub fn operator_table(t: &TargetDesc) -> String {
    let mut out = format!("target {} ({} operators)\n", t.name, t.operators.len());
    for op in t.operators.values() {
        let args: Vec<&str> = op.params.iter().map(|(_, ty)| ty.name()).collect();
        let _ = writeln!(
            out,
            "{}\t({}) -> {}\tcost {:?}\t{}\t{}",
            op.name,
            args.join(" "),
            op.ret.name(),
            op.cost,
            op.imp,
            op.approx
        );
    }
    out
}
