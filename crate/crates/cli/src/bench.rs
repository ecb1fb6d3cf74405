//! Parameter sweeps over the triangle workload: candidate triples minus the
//! triangles of a random graph.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use dcq_core::{
    execute, oracle_dcq, Attr, Counters, Database, Dcq, DcqError, Metrics, Relation, Selection,
    Strategy,
};

use crate::corpus::corpus_entry;
use crate::error::RunError;
use crate::gen::{gen_graph, gen_triples, RuleMix};

/// Relation of the workload that the selectivity sweep filters.
pub const FILTERED_RELATION: &str = "G1";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub nodes: usize,
    pub edges: usize,
    pub triples: usize,
    pub mix: RuleMix,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    /// Run the points of a sweep concurrently and report counters only.
    pub parallel: bool,
    /// Skip the oracle above this input size.
    pub oracle_max_n: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            nodes: 2_000,
            edges: 10_000,
            triples: 10_000,
            mix: RuleMix {
                path2: 0.5,
                edge_vertex: 0.5,
                path4: 0.0,
            },
            seed: 7,
            strategies: vec![Strategy::Easy, Strategy::Baseline],
            parallel: false,
            oracle_max_n: 2_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleCheck {
    Match,
    Mismatch,
    Skipped,
}

impl OracleCheck {
    fn name(self) -> &'static str {
        match self {
            OracleCheck::Match => "match",
            OracleCheck::Mismatch => "mismatch",
            OracleCheck::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub sweep: &'static str,
    pub param: String,
    pub strategy: Strategy,
    pub n: usize,
    pub out: usize,
    /// `None` in parallel mode.
    pub millis: Option<f64>,
    pub counters: Counters,
    /// Every strategy of the point returned the same tuples.
    pub agree: bool,
    pub oracle: OracleCheck,
}

struct Workload {
    param: String,
    dcq: Dcq,
    dbs: Vec<Database>,
}

fn triangle_dcq() -> Dcq {
    corpus_entry("qg3").expect("built-in workload").dcq()
}

fn database(graph: &Relation, triples: Relation) -> Database {
    let graph = std::sync::Arc::new(graph.clone());
    let mut db = Database::new();
    db.insert("T", triples);
    for g in ["G1", "G2", "G3"] {
        db.insert_shared(g, graph.clone());
    }
    db
}

fn run_point(
    sweep: &'static str,
    w: &Workload,
    cfg: &BenchConfig,
) -> Result<Vec<SweepPoint>, RunError> {
    let n: usize = w
        .dcq
        .operands
        .iter()
        .zip(&w.dbs)
        .map(|(q, d)| d.size_for(q))
        .sum();
    let mut results = Vec::new();
    for &strategy in &cfg.strategies {
        let m = Metrics::new();
        let start = Instant::now();
        let r = execute(&w.dcq, &w.dbs, strategy, &m)?;
        let millis = (!cfg.parallel).then(|| start.elapsed().as_secs_f64() * 1e3);
        results.push((strategy, r, millis, m.snapshot()));
    }
    let sets: Vec<_> = results.iter().map(|(_, r, _, _)| r.to_set()).collect();
    let agree = sets.windows(2).all(|p| p[0] == p[1]);
    let oracle = if n > cfg.oracle_max_n {
        None
    } else {
        match oracle_dcq(&w.dcq.operands, &w.dbs) {
            Ok(r) => Some(r.to_set()),
            Err(DcqError::BudgetExceeded(_)) => None,
            Err(e) => return Err(e.into()),
        }
    };
    Ok(results
        .into_iter()
        .zip(&sets)
        .map(|((strategy, r, millis, counters), set)| SweepPoint {
            sweep,
            param: w.param.clone(),
            strategy,
            n,
            out: r.len(),
            millis,
            counters,
            agree,
            oracle: match &oracle {
                None => OracleCheck::Skipped,
                Some(o) if o == set => OracleCheck::Match,
                Some(_) => OracleCheck::Mismatch,
            },
        })
        .collect())
}

fn run_sweep(
    sweep: &'static str,
    workloads: Vec<Workload>,
    cfg: &BenchConfig,
) -> Result<Vec<SweepPoint>, RunError> {
    let points: Vec<Result<Vec<SweepPoint>, RunError>> = if cfg.parallel {
        dcq_core::par::map(&workloads, |w| run_point(sweep, w, cfg))
    } else {
        workloads.iter().map(|w| run_point(sweep, w, cfg)).collect()
    };
    let mut out = Vec::new();
    for p in points {
        out.extend(p?);
    }
    Ok(out)
}

/// Varies the number of candidate triples.
pub fn sweep_out1(cfg: &BenchConfig, sizes: &[usize]) -> Result<Vec<SweepPoint>, RunError> {
    let graph = gen_graph(cfg.nodes, cfg.edges, cfg.seed);
    let dcq = triangle_dcq();
    let workloads = sizes
        .iter()
        .map(|&m| {
            let triples = gen_triples(&graph, m, cfg.mix, cfg.seed)
                .map_err(|e| RunError::Unsupported(e.to_string()))?;
            let db = database(&graph, triples);
            Ok(Workload {
                param: format!("triples={m}"),
                dcq: dcq.clone(),
                dbs: vec![db.clone(), db],
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    run_sweep("out1", workloads, cfg)
}

fn edge_bucket(values: &[dcq_core::Value]) -> u64 {
    let mut h = DefaultHasher::new();
    values.hash(&mut h);
    h.finish() % 100
}

/// Keeps `percent` of the edges seen by one atom of the subtracted query.
pub fn sweep_out2(cfg: &BenchConfig, percents: &[u64]) -> Result<Vec<SweepPoint>, RunError> {
    let graph = gen_graph(cfg.nodes, cfg.edges, cfg.seed);
    let triples = gen_triples(&graph, cfg.triples, cfg.mix, cfg.seed)
        .map_err(|e| RunError::Unsupported(e.to_string()))?;
    let db = database(&graph, triples);
    let dcq = triangle_dcq();
    let workloads = percents
        .iter()
        .map(|&pct| {
            let keep = Selection::new(
                FILTERED_RELATION,
                vec![Attr::new("node1"), Attr::new("node2")],
                move |v| edge_bucket(v) < pct,
            );
            let (dcq, dbs) = dcq_core::push_selection(&dcq, &[db.clone(), db.clone()], &keep)?;
            Ok(Workload {
                param: format!("selectivity={pct}%"),
                dcq,
                dbs,
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    run_sweep("out2", workloads, cfg)
}

/// Varies the share of triples drawn from length-2 paths against edge-plus-vertex draws.
pub fn sweep_out(cfg: &BenchConfig, mixes: &[RuleMix]) -> Result<Vec<SweepPoint>, RunError> {
    let graph = gen_graph(cfg.nodes, cfg.edges, cfg.seed);
    let dcq = triangle_dcq();
    let workloads = mixes
        .iter()
        .map(|&mix| {
            let triples = gen_triples(&graph, cfg.triples, mix, cfg.seed)
                .map_err(|e| RunError::Unsupported(e.to_string()))?;
            let db = database(&graph, triples);
            Ok(Workload {
                param: format!("mix={}/{}/{}", mix.path2, mix.edge_vertex, mix.path4),
                dcq: dcq.clone(),
                dbs: vec![db.clone(), db],
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    run_sweep("out", workloads, cfg)
}

pub const CSV_HEADER: &str =
    "sweep,param,strategy,n,out,millis,total,scanned,probes,emitted,peak_intermediate,agree,oracle";

pub fn to_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let c = &p.counters;
        let millis = p.millis.map(|m| format!("{m:.3}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.sweep,
            p.param,
            p.strategy,
            p.n,
            p.out,
            millis,
            c.total(),
            c.scanned,
            c.probes,
            c.emitted,
            c.peak_intermediate,
            p.agree,
            p.oracle.name()
        );
    }
    s
}
