//! Running the differences of a program against loaded data.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;
use std::path::Path;
use std::time::Instant;

use dcq_core::{
    bag_dcq, drop_zero, evaluate_cq, execute, numerical_difference_agg, oracle_cq, oracle_dcq,
    oracle_dcq_bag, plan, relational_difference_agg, Atom, Attr, Counters, Database, Dcq, DcqError,
    Metrics, Pair, Query, Relation, Ring, Semiring, Strategy, Tuple,
};
use serde_json::json;

use crate::csv_io::{
    load_annotated, load_bag, load_database, load_set, write_set, write_weighted, CsvWeight,
};
use crate::csv_io::{COUNT_COLUMN, WEIGHT_COLUMN};
use crate::dsl::{Program, QueryDecl, RelDecl};
use crate::error::{CsvError, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Semantics {
    Set,
    Bag,
}

/// Annotation ring for aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RingKind {
    /// Integer sums.
    Counting,
    /// Two integer sums side by side, written `a|b`.
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum AggKind {
    /// Aggregate the tuples of the difference.
    Relational,
    /// Subtract the per-group aggregates.
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggOptions {
    pub group: Vec<Attr>,
    pub kind: AggKind,
    pub ring: RingKind,
    pub drop_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// `None` lets the planner choose.
    pub strategy: Option<Strategy>,
    pub semantics: Semantics,
    pub agg: Option<AggOptions>,
    pub check_oracle: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            strategy: None,
            semantics: Semantics::Set,
            agg: None,
            check_oracle: false,
        }
    }
}

/// Loaded tables, annotated as the options require.
#[derive(Clone, Debug)]
pub enum Data {
    Set(Database),
    Bag(Database<u64>),
    Counting(Database<i64>),
    Pair(Database<Pair>),
}

impl Data {
    pub fn load(program: &Program, dir: &Path, opts: &RunOptions) -> Result<Data, CsvError> {
        Ok(match (&opts.agg, opts.semantics) {
            (Some(agg), _) => match agg.ring {
                RingKind::Counting => {
                    Data::Counting(load_database(program, dir, load_annotated::<i64>)?)
                }
                RingKind::Pair => Data::Pair(load_database(program, dir, load_annotated::<Pair>)?),
            },
            (None, Semantics::Bag) => Data::Bag(load_database(program, dir, load_bag)?),
            (None, Semantics::Set) => Data::Set(load_database(program, dir, load_set)?),
        })
    }
}

/// A result relation in the annotation it was computed with.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Set(Relation),
    Bag(Relation<u64>),
    Counting(Relation<i64>),
    Pair(Relation<Pair>),
}

impl Output {
    pub fn len(&self) -> usize {
        match self {
            Output::Set(r) => r.len(),
            Output::Bag(r) => r.len(),
            Output::Counting(r) => r.len(),
            Output::Pair(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the rows in sorted order.
    pub fn write(&self, path: &Path) -> Result<(), CsvError> {
        match self {
            Output::Set(r) => write_set(path, &sorted(r)),
            Output::Bag(r) => write_weighted(path, &sorted(r), COUNT_COLUMN),
            Output::Counting(r) => write_weighted(path, &sorted(r), WEIGHT_COLUMN),
            Output::Pair(r) => write_weighted(path, &sorted(r), WEIGHT_COLUMN),
        }
    }
}

fn sorted<W: Semiring>(r: &Relation<W>) -> Relation<W> {
    let mut rows: Vec<(Tuple, W)> = r.iter().map(|(t, w)| (t.clone(), w.clone())).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Relation::from_weighted(r.schema().to_vec(), rows)
}

/// One line of run statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub query: String,
    pub strategy: String,
    pub n: usize,
    pub out: usize,
    pub millis: f64,
    pub counters: Counters,
    /// Output size of each operand, when the strategy materializes them.
    pub operand_outs: Option<Vec<usize>>,
    pub rationale: String,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Value {
        let counters: serde_json::Map<String, serde_json::Value> = self
            .counters
            .fields()
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        let mut line = json!({
            "query": self.query,
            "strategy": self.strategy,
            "n": self.n,
            "out": self.out,
            "millis": self.millis,
            "counters": counters,
            "rationale": self.rationale,
        });
        if let Some(outs) = &self.operand_outs {
            line["operand_outs"] = json!(outs);
        }
        line
    }
}

/// Runs every difference of `program`, in parallel when the feature is on.
pub fn run_program(
    program: &Program,
    data: &Data,
    opts: &RunOptions,
) -> Vec<Result<(RunReport, Output), RunError>> {
    let dcqs = program.all_dcqs();
    dcq_core::par::map(&dcqs, |(name, dcq)| run_dcq(name, dcq, data, opts))
}

pub fn run_dcq(
    name: &str,
    dcq: &Dcq,
    data: &Data,
    opts: &RunOptions,
) -> Result<(RunReport, Output), RunError> {
    dcq.validate()?;
    match (data, &opts.agg) {
        (Data::Set(db), None) => run_set(name, dcq, db, opts),
        (Data::Bag(db), None) => run_bag(name, dcq, db, opts),
        (Data::Counting(db), Some(agg)) => {
            let (report, r) = run_agg(name, dcq, db, agg, opts.check_oracle)?;
            Ok((report, Output::Counting(r)))
        }
        (Data::Pair(db), Some(agg)) => {
            let (report, r) = run_agg(name, dcq, db, agg, opts.check_oracle)?;
            Ok((report, Output::Pair(r)))
        }
        _ => Err(RunError::Unsupported(
            "loaded data does not match the run options".into(),
        )),
    }
}

fn input_size<W: Semiring>(dcq: &Dcq, db: &Database<W>) -> usize {
    dcq.operands.iter().map(|q| db.size_for(q)).sum()
}

fn millis_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn mismatch<T: Ord + Clone + Debug>(
    name: &str,
    strategy: &str,
    got: &BTreeSet<T>,
    expected: &BTreeSet<T>,
) -> Option<RunError> {
    if got == expected {
        return None;
    }
    let witness = got
        .symmetric_difference(expected)
        .next()
        .map(|t| format!("{t:?}"))
        .unwrap_or_default();
    Some(RunError::OracleMismatch {
        dcq: name.to_string(),
        strategy: strategy.to_string(),
        got: got.len(),
        expected: expected.len(),
        witness,
    })
}

fn weighted_rows<W: Semiring + Debug>(r: &Relation<W>) -> BTreeSet<(Tuple, String)> {
    r.iter()
        .map(|(t, w)| (t.clone(), format!("{w:?}")))
        .collect()
}

fn run_set(
    name: &str,
    dcq: &Dcq,
    db: &Database,
    opts: &RunOptions,
) -> Result<(RunReport, Output), RunError> {
    let dbs = vec![db.clone(); dcq.operands.len()];
    let (strategy, rationale) = match opts.strategy {
        Some(Strategy::Bag) => {
            return Err(RunError::Unsupported(
                "the bag strategy needs --semantics bag".into(),
            ))
        }
        Some(s) => (s, "requested".to_string()),
        None => {
            let chosen = plan(dcq, &dbs)?;
            (chosen.strategy, chosen.rationale)
        }
    };
    let m = Metrics::new();
    let start = Instant::now();
    let result = execute(dcq, &dbs, strategy, &m)?;
    let millis = millis_since(start);
    let operand_outs = match strategy {
        Strategy::Baseline | Strategy::Oracle => Some(
            dcq.operands
                .iter()
                .map(|q| {
                    Ok(evaluate_cq(&q.with_head(dcq.head().to_vec()), db, &Metrics::new())?.len())
                })
                .collect::<Result<Vec<_>, DcqError>>()?,
        ),
        _ => None,
    };
    if opts.check_oracle {
        let expected = oracle_dcq(&dcq.operands, &dbs)?;
        let got: BTreeSet<Tuple> = result.rows().iter().cloned().collect();
        let want: BTreeSet<Tuple> = expected.rows().iter().cloned().collect();
        if let Some(e) = mismatch(name, strategy.name(), &got, &want) {
            return Err(e);
        }
    }
    let report = RunReport {
        query: name.to_string(),
        strategy: strategy.name().to_string(),
        n: input_size(dcq, db),
        out: result.len(),
        millis,
        counters: m.snapshot(),
        operand_outs,
        rationale,
    };
    Ok((report, Output::Set(result)))
}

/// The second operand's tables renamed and reordered onto the first
/// operand's atoms, matched by attribute set.
pub fn align_second_operand<W: Semiring>(
    q1: &Query,
    q2: &Query,
    db: &Database<W>,
) -> Result<Database<W>, RunError> {
    let unsupported =
        |why: String| RunError::Unsupported(format!("bag difference needs one query shape: {why}"));
    if q1.head_set() != q2.head_set() || q1.body.len() != q2.body.len() {
        return Err(unsupported(format!("{q1} vs {q2}")));
    }
    let mut out = Database::new();
    for a1 in &q1.body {
        let a2 = q2
            .body
            .iter()
            .find(|a| a.attr_set() == a1.attr_set())
            .ok_or_else(|| unsupported(format!("no atom of the second query matches {a1}")))?;
        let rel2 = db
            .get(&a2.relation)
            .ok_or_else(|| DcqError::UnresolvedRelation(a2.relation.clone()))?;
        let rel1 = db
            .get(&a1.relation)
            .ok_or_else(|| DcqError::UnresolvedRelation(a1.relation.clone()))?;
        let aligned = rel2
            .renamed(a2.attrs.clone())?
            .project(&a1.attrs)?
            .renamed(rel1.schema().to_vec())?;
        out.insert(&a1.relation, aligned);
    }
    Ok(out)
}

fn run_bag(
    name: &str,
    dcq: &Dcq,
    db: &Database<u64>,
    opts: &RunOptions,
) -> Result<(RunReport, Output), RunError> {
    let [q1, q2] = &dcq.operands[..] else {
        return Err(RunError::Unsupported(
            "bag semantics takes exactly two operands".into(),
        ));
    };
    match opts.strategy {
        None | Some(Strategy::Bag) | Some(Strategy::Easy) => {}
        Some(other) => {
            return Err(RunError::Unsupported(format!(
                "strategy {other} runs under set semantics only"
            )))
        }
    }
    let d2 = align_second_operand(q1, q2, db)?;
    let m = Metrics::new();
    let start = Instant::now();
    let result = bag_dcq(q1, db, &d2, &m)?;
    let millis = millis_since(start);
    if opts.check_oracle {
        let expected = oracle_dcq_bag(&[q1.clone(), q1.clone()], &[db.clone(), d2.clone()])?;
        if let Some(e) = mismatch(
            name,
            "bag",
            &weighted_rows(&result),
            &weighted_rows(&expected),
        ) {
            return Err(e);
        }
    }
    let report = RunReport {
        query: name.to_string(),
        strategy: "bag".to_string(),
        n: db.size_for(q1) + d2.size_for(q1),
        out: result.len(),
        millis,
        counters: m.snapshot(),
        operand_outs: None,
        rationale: "multiset difference over one free-connex query".to_string(),
    };
    Ok((report, Output::Bag(result)))
}

fn run_agg<W>(
    name: &str,
    dcq: &Dcq,
    db: &Database<W>,
    agg: &AggOptions,
    check_oracle: bool,
) -> Result<(RunReport, Relation<W>), RunError>
where
    W: Ring + CsvWeight + Debug + Hash + Eq,
{
    let [q1, q2] = &dcq.operands[..] else {
        return Err(RunError::Unsupported(
            "aggregation takes exactly two operands".into(),
        ));
    };
    let m = Metrics::new();
    let start = Instant::now();
    let mut result = match agg.kind {
        AggKind::Relational => relational_difference_agg(q1, q2, db, db, &agg.group, &m)?,
        AggKind::Numerical => numerical_difference_agg(q1, q2, db, db, &agg.group, &m)?,
    };
    if agg.drop_zero {
        result = drop_zero(&result);
    }
    let millis = millis_since(start);
    let strategy = match agg.kind {
        AggKind::Relational => "relational-agg",
        AggKind::Numerical => "numerical-agg",
    };
    if check_oracle {
        let mut expected = oracle_agg(q1, q2, db, &agg.group, agg.kind)?;
        if agg.drop_zero {
            expected = drop_zero(&expected);
        }
        if let Some(e) = mismatch(
            name,
            strategy,
            &weighted_rows(&result),
            &weighted_rows(&expected),
        ) {
            return Err(e);
        }
    }
    let report = RunReport {
        query: name.to_string(),
        strategy: strategy.to_string(),
        n: input_size(dcq, db),
        out: result.len(),
        millis,
        counters: m.snapshot(),
        operand_outs: None,
        rationale: format!(
            "group by {}",
            agg.group
                .iter()
                .map(|a| a.name())
                .collect::<Vec<_>>()
                .join(",")
        ),
    };
    Ok((report, result))
}

/// Brute-force aggregation of either kind.
pub fn oracle_agg<W: Ring + Eq + Hash>(
    q1: &Query,
    q2: &Query,
    db: &Database<W>,
    group: &[Attr],
    kind: AggKind,
) -> Result<Relation<W>, DcqError> {
    let mut sums: BTreeMap<Tuple, W> = BTreeMap::new();
    let mut add = |key: Tuple, w: W| {
        let acc = sums.entry(key).or_insert_with(W::zero);
        *acc = acc.add(&w);
    };
    match kind {
        AggKind::Relational => {
            let support = db.support();
            let surviving = oracle_dcq(&[q1.clone(), q2.clone()], &[support.clone(), support])?;
            let annotated = oracle_cq(q1, db)?.to_map();
            let pos: Vec<usize> = group
                .iter()
                .map(|g| q1.head.iter().position(|h| h == g).expect("group in head"))
                .collect();
            for t in surviving.rows() {
                let key: Tuple = pos.iter().map(|&i| t[i].clone()).collect();
                add(key, annotated.get(t).cloned().unwrap_or_else(W::zero));
            }
        }
        AggKind::Numerical => {
            for (t, w) in oracle_cq(&q1.with_head(group.to_vec()), db)?.iter() {
                add(t.clone(), w.clone());
            }
            for (t, w) in oracle_cq(&q2.with_head(group.to_vec()), db)?.iter() {
                add(t.clone(), w.neg());
            }
        }
    }
    Ok(Relation::from_weighted(group.to_vec(), sums))
}

/// Replaces atoms of a query that cover the same attribute set by one atom
/// over the intersection of their tables.
pub fn intersect_duplicate_atoms<W: Semiring>(
    program: &Program,
    db: &Database<W>,
) -> Result<(Program, Database<W>), RunError> {
    let mut out = program.clone();
    let mut data = db.clone();
    let mut queries = Vec::new();
    for QueryDecl { name, query } in &program.queries {
        let mut groups: Vec<Vec<&Atom>> = Vec::new();
        for atom in &query.body {
            match groups
                .iter_mut()
                .find(|g| g[0].attr_set() == atom.attr_set())
            {
                Some(g) => g.push(atom),
                None => groups.push(vec![atom]),
            }
        }
        let mut body = Vec::new();
        for group in groups {
            let first = group[0];
            if group.len() == 1 {
                body.push(first.clone());
                continue;
            }
            let merged = group
                .iter()
                .map(|a| a.relation.as_str())
                .collect::<Vec<_>>()
                .join("_");
            let decl = program
                .relation(&first.relation)
                .ok_or_else(|| DcqError::UnresolvedRelation(first.relation.clone()))?;
            let base = db
                .get(&first.relation)
                .ok_or_else(|| DcqError::UnresolvedRelation(first.relation.clone()))?;
            let mut acc: HashMap<Tuple, W> = base.to_map();
            for other in &group[1..] {
                let rel = db
                    .get(&other.relation)
                    .ok_or_else(|| DcqError::UnresolvedRelation(other.relation.clone()))?;
                let there = rel
                    .renamed(other.attrs.clone())?
                    .project(&first.attrs)?
                    .to_map();
                acc = acc
                    .into_iter()
                    .filter_map(|(t, w)| there.get(&t).map(|v| (t, w.mul(v))))
                    .collect();
            }
            let mut rows: Vec<(Tuple, W)> = acc.into_iter().collect();
            rows.sort_by(|a, b| a.0.cmp(&b.0));
            data.insert(
                &merged,
                Relation::from_weighted(base.schema().to_vec(), rows),
            );
            if out.relation(&merged).is_none() {
                out.relations.push(RelDecl {
                    name: merged.clone(),
                    columns: decl.columns.clone(),
                    source: None,
                });
            }
            body.push(Atom {
                relation: merged,
                attrs: first.attrs.clone(),
            });
        }
        queries.push(QueryDecl {
            name: name.clone(),
            query: Query {
                head: query.head.clone(),
                body,
            },
        });
    }
    out.queries = queries;
    Ok((out, data))
}
