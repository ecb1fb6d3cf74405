//! Set-semantics strategies for differences of conjunctive queries, the
//! planner choosing among them, and the selection/projection/join rewrites.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{DcqError, Result};
use crate::generic::GenericEvaluator;
use crate::hypergraph::{
    classify, is_difference_linear, is_free_connex, is_linear_reducible, sets_acyclic,
    Classification, DifferenceVerdict,
};
use crate::instance::{key_set, BoundAtom, Instance};
use crate::metrics::Metrics;
use crate::oracle::oracle_dcq;
use crate::par;
use crate::reduce::{reduce_instance, schema_reduce};
use crate::schema::{pick, positions, Atom, Attr, Database, Dcq, Query, Relation, Tuple, Value};
use crate::yannakakis::{eval_instance, full_reduce, join_full};

/// Evaluation strategy for a difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Easy,
    Baseline,
    HeuristicBool,
    HeuristicCap,
    Dmcq,
    Bag,
    Oracle,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Easy => "easy",
            Strategy::Baseline => "baseline",
            Strategy::HeuristicBool => "heuristic-bool",
            Strategy::HeuristicCap => "heuristic-cap",
            Strategy::Dmcq => "dmcq",
            Strategy::Bag => "bag",
            Strategy::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "easy" => Strategy::Easy,
            "baseline" => Strategy::Baseline,
            "heuristic-bool" | "heuristic_bool" => Strategy::HeuristicBool,
            "heuristic-cap" | "heuristic_cap" => Strategy::HeuristicCap,
            "dmcq" => Strategy::Dmcq,
            "bag" => Strategy::Bag,
            "oracle" => Strategy::Oracle,
            other => return Err(format!("unknown strategy `{other}`")),
        })
    }
}

const DIFF_SUFFIX: &str = "#diff";
const CAP_ATOM: &str = "#first";

/// Materializes an instance under set semantics: Yannakakis when free-connex,
/// backtracking otherwise.
pub(crate) fn materialize(inst: &Instance, m: &Metrics) -> Result<Relation> {
    if is_free_connex(&inst.query()) {
        eval_instance(inst, m)
    } else {
        Ok(GenericEvaluator::new(inst, m).evaluate(m))
    }
}

/// Evaluates one conjunctive query under set semantics.
pub fn evaluate_cq(q: &Query, d: &Database, m: &Metrics) -> Result<Relation> {
    materialize(&Instance::bind(q, d)?, m)
}

fn check_heads(a: &[Attr], b: &[Attr]) -> Result<()> {
    let (x, y): (BTreeSet<&Attr>, BTreeSet<&Attr>) = (a.iter().collect(), b.iter().collect());
    if x != y {
        return Err(DcqError::HeadMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Rows of `left` (over `left_head`) that do not occur in `right`.
fn subtract(left: &Relation, left_head: &[Attr], right: &Relation) -> Result<Vec<Tuple>> {
    let pos = positions(right.schema(), left_head)?;
    let members: HashSet<Tuple> = key_set(right.rows().iter(), &pos);
    Ok(par::filter(left.rows(), |t| !members.contains(t)))
}

fn diff_atom(e: &BoundAtom, s_e: &Relation, m: &Metrics) -> BoundAtom {
    let members = key_set(
        e.relation.rows().iter(),
        &(0..e.attrs.len()).collect::<Vec<_>>(),
    );
    m.scanned(e.relation.len() + s_e.len());
    m.probes(s_e.len());
    let rows = par::filter(s_e.rows(), |t| !members.contains(t));
    BoundAtom::new(
        &format!("{}{DIFF_SUFFIX}", e.name),
        e.attrs.clone(),
        Relation::from_rows(e.attrs.clone(), rows),
    )
}

fn reduce_if_needed(inst: &Instance, m: &Metrics) -> Result<Instance> {
    if inst.is_full() {
        Ok(inst.clone())
    } else {
        reduce_instance(inst, m)
    }
}

/// Same-schema difference: the union over atoms of `(R - R') ⋈ rest`.
pub fn dcq_same_schema(q: &Query, d1: &Database, d2: &Database, m: &Metrics) -> Result<Relation> {
    if !is_free_connex(q) {
        return Err(DcqError::NotFreeConnex);
    }
    let r1 = reduce_if_needed(&Instance::bind(q, d1)?, m)?;
    let r2 = reduce_if_needed(&Instance::bind(q, d2)?, m)?;
    let indexes: Vec<usize> = (0..r1.atoms.len()).collect();
    let branches = par::map(&indexes, |&i| -> Result<Vec<Tuple>> {
        let members = key_set(
            r2.atoms[i].relation.rows().iter(),
            &positions(&r2.atoms[i].attrs, &r1.atoms[i].attrs)?,
        );
        let kept = par::filter(r1.atoms[i].relation.rows(), |t| !members.contains(t));
        m.scanned(r1.atoms[i].relation.len() + r2.atoms[i].relation.len());
        if kept.is_empty() {
            return Ok(Vec::new());
        }
        let mut branch = r1.clone();
        let attrs = r1.atoms[i].attrs.clone();
        branch.atoms[i] = BoundAtom::new(
            &r1.atoms[i].name,
            attrs.clone(),
            Relation::from_rows(attrs, kept),
        );
        Ok(join_full(&branch, &q.head, m)?.rows().to_vec())
    });
    collect_union(&q.head, branches)
}

fn collect_union(head: &[Attr], branches: Vec<Result<Vec<Tuple>>>) -> Result<Relation> {
    let mut seen: HashSet<Tuple> = HashSet::new();
    let mut rows = Vec::new();
    for branch in branches {
        for t in branch? {
            if seen.insert(t.clone()) {
                rows.push(t);
            }
        }
    }
    Ok(Relation::from_rows(head.to_vec(), rows))
}

/// The linear-time strategy for difference-linear pairs.
pub fn easy_dcq(
    q1: &Query,
    q2: &Query,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<Relation> {
    easy_instances(&Instance::bind(q1, d1)?, &Instance::bind(q2, d2)?, m)
}

pub(crate) fn easy_instances(i1: &Instance, i2: &Instance, m: &Metrics) -> Result<Relation> {
    let verdict = is_difference_linear(&i1.query(), &i2.query())?;
    if let Some(w) = verdict.witness {
        return Err(DcqError::NotDifferenceLinear(w.to_string()));
    }
    let n = i1.size() + i2.size();
    let r1 = reduce_if_needed(i1, m)?;
    let r2 = reduce_if_needed(i2, m)?;
    let branches = par::map(&r2.atoms, |e| -> Result<(usize, Vec<Tuple>)> {
        let s_e = eval_instance(&r1.with_head(e.attrs.clone()), m)?;
        m.intermediate(s_e.len());
        let diff = diff_atom(e, &s_e, m);
        if diff.relation.is_empty() {
            return Ok((s_e.len(), Vec::new()));
        }
        let mut branch = r1.clone();
        branch.atoms.push(diff);
        Ok((s_e.len(), join_full(&branch, &i1.head, m)?.rows().to_vec()))
    });
    let mut sizes = Vec::new();
    let mut rows = Vec::new();
    for b in branches {
        let (size, r) = b?;
        sizes.push(size);
        rows.push(Ok(r));
    }
    let result = collect_union(&i1.head, rows)?;
    for size in sizes {
        if size > n + result.len() {
            m.bound_violation();
        }
    }
    Ok(result)
}

/// Materializes both operands and subtracts.
pub fn dcq_baseline(
    q1: &Query,
    q2: &Query,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<Relation> {
    check_heads(&q1.head, &q2.head)?;
    let left = evaluate_cq(q1, d1, m)?;
    let right = evaluate_cq(q2, d2, m)?;
    Ok(Relation::from_rows(
        q1.head.clone(),
        subtract(&left, &q1.head, &right)?,
    ))
}

/// Materializes the first operand and tests each of its tuples against the second.
pub fn heuristic_bool(
    q1: &Query,
    q2: &Query,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<Relation> {
    let left = evaluate_cq(q1, d1, m)?;
    bool_filter(&left, &Instance::bind(q2, d2)?, m)
}

fn bool_filter(left: &Relation, i2: &Instance, m: &Metrics) -> Result<Relation> {
    let head = left.schema().to_vec();
    check_heads(&head, &i2.head)?;
    m.scanned(left.len());
    if is_linear_reducible(&i2.query()) {
        let r2 = reduce_if_needed(i2, m)?;
        let checks: Vec<(Vec<usize>, HashSet<Tuple>)> = r2
            .atoms
            .iter()
            .map(|e| -> Result<_> {
                let own: Vec<usize> = (0..e.attrs.len()).collect();
                Ok((
                    positions(&head, &e.attrs)?,
                    key_set(e.relation.rows().iter(), &own),
                ))
            })
            .collect::<Result<_>>()?;
        m.probes(left.len() * checks.len());
        let rows = par::filter(left.rows(), |t| {
            checks.iter().any(|(pos, set)| !set.contains(&pick(t, pos)))
        });
        Ok(Relation::from_rows(head, rows))
    } else {
        let evaluator = GenericEvaluator::new(&i2.with_head(head.clone()), m);
        let rows = par::filter(left.rows(), |t| !evaluator.contains_head(t, m));
        Ok(Relation::from_rows(head, rows))
    }
}

/// Materializes the first operand, joins it into the second to get the
/// intersection, and subtracts the intersection.
pub fn heuristic_cap(
    q1: &Query,
    q2: &Query,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<Relation> {
    let left = evaluate_cq(q1, d1, m)?;
    cap_filter(&left, &Instance::bind(q2, d2)?, m)
}

fn cap_filter(left: &Relation, i2: &Instance, m: &Metrics) -> Result<Relation> {
    let head = left.schema().to_vec();
    check_heads(&head, &i2.head)?;
    let mut plus = i2.with_head(head.clone());
    plus.atoms
        .push(BoundAtom::new(CAP_ATOM, head.clone(), left.clone()));
    let common = materialize(&plus, m)?;
    Ok(Relation::from_rows(
        head.clone(),
        subtract(left, &head, &common)?,
    ))
}

/// Why the multi-operand linear strategy does or does not apply.
pub fn dmcq_conditions(queries: &[Query]) -> std::result::Result<(), String> {
    let (first, rest) = queries.split_first().ok_or("no operands")?;
    if !is_free_connex(first) {
        return Err("first operand is not free-connex".into());
    }
    if let Some(i) = rest.iter().position(|q| !is_linear_reducible(q)) {
        return Err(format!("operand {} is not linear-reducible", i + 2));
    }
    let base = schema_reduce(first).map_err(|e| e.to_string())?;
    let reduced: Vec<Vec<BTreeSet<Attr>>> = rest
        .iter()
        .map(schema_reduce)
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    fn walk(
        edges: &mut Vec<BTreeSet<Attr>>,
        levels: &[Vec<BTreeSet<Attr>>],
    ) -> std::result::Result<(), String> {
        let Some((level, deeper)) = levels.split_first() else {
            return Ok(());
        };
        for e in level {
            edges.push(e.clone());
            if !sets_acyclic(edges) {
                let sets: Vec<String> = edges
                    .iter()
                    .map(|e| e.iter().map(|a| a.name()).collect::<Vec<_>>().join(","))
                    .collect();
                return Err(format!("edges {{{}}} are cyclic", sets.join("} {")));
            }
            walk(edges, deeper)?;
            edges.pop();
        }
        Ok(())
    }
    walk(&mut base.clone(), &reduced)
}

/// Difference of several queries, `((Q1 - Q2) - Q3) - ...`.
///
/// Uses the recursive linear strategy when [`dmcq_conditions`] holds and a
/// chain of materialized subtractions otherwise.
pub fn dmcq(queries: &[Query], dbs: &[Database], m: &Metrics) -> Result<Relation> {
    if queries.len() < 2 || queries.len() != dbs.len() {
        return Err(DcqError::TooFewOperands);
    }
    for q in &queries[1..] {
        check_heads(&queries[0].head, &q.head)?;
    }
    let instances: Vec<Instance> = queries
        .iter()
        .zip(dbs)
        .map(|(q, d)| Instance::bind(q, d))
        .collect::<Result<_>>()?;
    if queries.len() == 2 {
        return easy_instances(&instances[0], &instances[1], m);
    }
    if dmcq_conditions(queries).is_err() {
        return baseline_chain(&instances, m);
    }
    let rows = dmcq_rec(&instances[0], &instances[1..], m)?;
    Ok(Relation::from_rows(queries[0].head.clone(), rows))
}

fn dmcq_rec(first: &Instance, rest: &[Instance], m: &Metrics) -> Result<Vec<Tuple>> {
    if rest.len() == 1 {
        return Ok(easy_instances(first, &rest[0], m)?.rows().to_vec());
    }
    let r1 = reduce_if_needed(first, m)?;
    let r2 = reduce_if_needed(&rest[0], m)?;
    let branches = par::map(&r2.atoms, |e| -> Result<Vec<Tuple>> {
        let s_e = eval_instance(&r1.with_head(e.attrs.clone()), m)?;
        m.intermediate(s_e.len());
        let diff = diff_atom(e, &s_e, m);
        if diff.relation.is_empty() {
            return Ok(Vec::new());
        }
        let mut next = r1.clone();
        next.atoms.push(diff);
        let next = full_reduce(&next, m)?;
        dmcq_rec(&next, &rest[1..], m)
    });
    Ok(collect_union(&first.head, branches.into_iter().collect())?
        .rows()
        .to_vec())
}

fn baseline_chain(instances: &[Instance], m: &Metrics) -> Result<Relation> {
    let head = instances[0].head.clone();
    let mut acc = materialize(&instances[0], m)?;
    for inst in &instances[1..] {
        let right = materialize(inst, m)?;
        acc = Relation::from_rows(head.clone(), subtract(&acc, &head, &right)?);
    }
    Ok(acc)
}

/// A selection on one base relation: `predicate` sees the values of `attrs`.
/// Row test applied by a [`Selection`].
pub type Predicate = Arc<dyn Fn(&[Value]) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Selection {
    pub relation: String,
    pub attrs: Vec<Attr>,
    pub predicate: Predicate,
}

impl Selection {
    pub fn new(
        relation: &str,
        attrs: Vec<Attr>,
        predicate: impl Fn(&[Value]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Selection {
            relation: relation.to_string(),
            attrs,
            predicate: Arc::new(predicate),
        }
    }
}

impl fmt::Debug for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selection({} on {:?})", self.relation, self.attrs)
    }
}

/// Applies a selection by filtering its base relation in the operand that uses it.
pub fn push_selection(
    dcq: &Dcq,
    dbs: &[Database],
    selection: &Selection,
) -> Result<(Dcq, Vec<Database>)> {
    let not_base = || DcqError::PredicateNotOnBaseRelation(format!("{selection:?}"));
    let (operand, atom) = dcq
        .operands
        .iter()
        .enumerate()
        .find_map(|(i, q)| {
            q.body
                .iter()
                .find(|a| a.relation == selection.relation)
                .map(|a| (i, a))
        })
        .ok_or_else(not_base)?;
    let pos = positions(&atom.attrs, &selection.attrs).map_err(|_| not_base())?;
    let db = dbs
        .get(operand)
        .ok_or_else(|| DcqError::UnresolvedRelation(selection.relation.clone()))?;
    let relation = db
        .get(&selection.relation)
        .ok_or_else(|| DcqError::UnresolvedRelation(selection.relation.clone()))?;
    let filtered = relation.filter(|t, _| (selection.predicate)(&pick(t, &pos)));
    let mut out = dbs.to_vec();
    out[operand].insert(&selection.relation, filtered);
    Ok((dcq.clone(), out))
}

/// Replaces every operand head by `theta`.
pub fn push_projection(dcq: &Dcq, theta: &[Attr]) -> Result<Dcq> {
    let head: BTreeSet<&Attr> = dcq.head().iter().collect();
    if !theta.iter().all(|a| head.contains(a)) {
        return Err(DcqError::NotSubsetOfHead);
    }
    Ok(Dcq {
        operands: dcq
            .operands
            .iter()
            .map(|q| q.with_head(theta.to_vec()))
            .collect(),
    })
}

/// Rewrites a join of two-operand differences into one multi-operand difference.
///
/// `dbs[i]` holds the databases of the two operands of `dcqs[i]`. Non-head
/// attributes are renamed per component so components only join on heads;
/// relations of subtracted operands are renamed per operand.
pub fn join_of_dcqs(dcqs: &[Dcq], dbs: &[(Database, Database)]) -> Result<(Dcq, Vec<Database>)> {
    if dcqs.len() != dbs.len() || dcqs.is_empty() {
        return Err(DcqError::SchemaClash(
            "one database pair per difference".into(),
        ));
    }
    if dcqs.len() == 1 {
        return Ok((dcqs[0].clone(), vec![dbs[0].0.clone(), dbs[0].1.clone()]));
    }
    let mut names = HashSet::new();
    for d in dcqs {
        if d.operands.len() != 2 {
            return Err(DcqError::SchemaClash(
                "each joined difference needs two operands".into(),
            ));
        }
        for q in &d.operands {
            for a in &q.body {
                if !names.insert(a.relation.clone()) {
                    return Err(DcqError::SchemaClash(format!(
                        "relation `{}` occurs twice",
                        a.relation
                    )));
                }
            }
        }
    }
    let k = dcqs.len();
    let mut head: Vec<Attr> = Vec::new();
    for d in dcqs {
        for a in d.head() {
            if !head.contains(a) {
                head.push(a.clone());
            }
        }
    }
    let localize = |i: usize, q: &Query| -> Vec<Atom> {
        let local: HashSet<&Attr> = q.head.iter().collect();
        q.body
            .iter()
            .map(|a| Atom {
                relation: a.relation.clone(),
                attrs: a
                    .attrs
                    .iter()
                    .map(|x| {
                        if local.contains(x) {
                            x.clone()
                        } else {
                            Attr::new(&format!("{x}#{i}"))
                        }
                    })
                    .collect(),
            })
            .collect()
    };
    let mut operands = Vec::new();
    let mut out_dbs = Vec::new();
    let full_mask = (1usize << k) - 1;
    for mask in std::iter::once(full_mask).chain(0..full_mask) {
        let operand_no = operands.len();
        let mut body = Vec::new();
        let mut db = Database::new();
        for (i, d) in dcqs.iter().enumerate() {
            let side = if mask & (1 << i) != 0 { 0 } else { 1 };
            let source = if side == 0 { &dbs[i].0 } else { &dbs[i].1 };
            for mut atom in localize(i, &d.operands[side]) {
                let rel = source
                    .get(&atom.relation)
                    .ok_or_else(|| DcqError::UnresolvedRelation(atom.relation.clone()))?;
                if operand_no > 0 {
                    atom.relation = format!("{}@{operand_no}", atom.relation);
                }
                db.insert_shared(&atom.relation, Arc::clone(rel));
                body.push(atom);
            }
        }
        operands.push(Query {
            head: head.clone(),
            body,
        });
        out_dbs.push(db);
    }
    Ok((Dcq { operands }, out_dbs))
}

/// Cost terms for the planner, in estimated tuple counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostEstimate {
    pub input: usize,
    pub first_output: f64,
    /// First operand's output times the per-tuple residual check.
    pub bool_cost: f64,
    /// Input plus the intersection query's estimated work.
    pub cap_cost: f64,
}

/// The planner's choice.
#[derive(Clone, Debug, PartialEq)]
pub struct DcqPlan {
    pub strategy: Strategy,
    pub classifications: Vec<Classification>,
    pub verdict: Option<DifferenceVerdict>,
    pub rationale: String,
    pub cost: CostEstimate,
}

struct Estimator {
    domain: HashMap<Attr, f64>,
}

impl Estimator {
    fn new(inst: &Instance) -> Self {
        let mut domain: HashMap<Attr, f64> = HashMap::new();
        for atom in &inst.atoms {
            for (c, a) in atom.attrs.iter().enumerate() {
                let distinct: HashSet<&Value> =
                    atom.relation.rows().iter().map(|t| &t[c]).collect();
                let e = domain.entry(a.clone()).or_insert(1.0);
                *e = e.max(distinct.len() as f64);
            }
        }
        Estimator { domain }
    }

    /// Product of relation sizes discounted by one domain size per repeated attribute.
    fn full_size(&self, inst: &Instance) -> f64 {
        let mut est: f64 = inst.atoms.iter().map(|a| a.relation.len() as f64).product();
        let mut occurrences: HashMap<&Attr, i32> = HashMap::new();
        for a in inst.atoms.iter().flat_map(|a| a.attrs.iter()) {
            *occurrences.entry(a).or_default() += 1;
        }
        for (a, k) in occurrences {
            est /= self.domain.get(a).copied().unwrap_or(1.0).powi(k - 1);
        }
        est.max(0.0)
    }

    fn head_space(&self, head: &[Attr]) -> f64 {
        head.iter()
            .map(|a| self.domain.get(a).copied().unwrap_or(1.0))
            .product()
    }
}

/// Chooses a strategy following the complexity classes of the operands.
pub fn plan(dcq: &Dcq, dbs: &[Database]) -> Result<DcqPlan> {
    dcq.validate()?;
    let classifications: Vec<Classification> = dcq.operands.iter().map(classify).collect();
    let instances: Vec<Instance> = dcq
        .operands
        .iter()
        .zip(dbs)
        .map(|(q, d)| Instance::bind(q, d))
        .collect::<Result<_>>()?;
    let input: usize = instances.iter().map(|i| i.size()).sum();
    let head = dcq.head().to_vec();
    let first = Estimator::new(&instances[0]);
    let first_output = first.full_size(&instances[0]).min(first.head_space(&head));
    let mut cost = CostEstimate {
        input,
        first_output,
        ..Default::default()
    };

    if dcq.operands.len() > 2 {
        let (strategy, rationale) = match dmcq_conditions(&dcq.operands) {
            Ok(()) => (Strategy::Dmcq, "chain meets the multi-operand linear conditions: O(N + OUT)".to_string()),
            Err(why) => (Strategy::Baseline, format!("warning: multi-operand linear strategy not applicable ({why}); materializing every operand")),
        };
        return Ok(DcqPlan {
            strategy,
            classifications,
            verdict: None,
            rationale,
            cost,
        });
    }

    let verdict = is_difference_linear(&dcq.operands[0], &dcq.operands[1])?;
    if verdict.holds {
        return Ok(DcqPlan {
            strategy: Strategy::Easy,
            classifications,
            verdict: Some(verdict),
            rationale: "difference-linear: O(N + OUT)".into(),
            cost,
        });
    }
    if classifications[1].linear_reducible {
        let why = verdict
            .witness
            .as_ref()
            .map(|w| w.to_string())
            .unwrap_or_default();
        return Ok(DcqPlan {
            strategy: Strategy::HeuristicBool,
            classifications,
            verdict: Some(verdict),
            rationale: format!(
                "not difference-linear ({why}); second operand linear-reducible: O(cost(Q1))"
            ),
            cost,
        });
    }
    let second = Estimator::new(&instances[1]);
    let second_full = second.full_size(&instances[1]);
    let per_tuple = (second_full / second.head_space(&head)).max(1.0);
    cost.bool_cost = first_output * per_tuple;
    cost.cap_cost = input as f64
        + first_output
        + second_full * (first_output / second.head_space(&head)).min(1.0);
    let strategy = if cost.bool_cost < cost.cap_cost {
        Strategy::HeuristicBool
    } else {
        Strategy::HeuristicCap
    };
    let rationale = format!(
        "second operand not linear-reducible; estimated OUT1*cost(Q2 residual) = {:.0} vs cost(Q2 with Q1 results) = {:.0}",
        cost.bool_cost, cost.cap_cost
    );
    Ok(DcqPlan {
        strategy,
        classifications,
        verdict: Some(verdict),
        rationale,
        cost,
    })
}

/// Runs a difference with the given strategy under set semantics.
pub fn execute(dcq: &Dcq, dbs: &[Database], strategy: Strategy, m: &Metrics) -> Result<Relation> {
    dcq.validate()?;
    if dbs.len() != dcq.operands.len() {
        return Err(DcqError::TooFewOperands);
    }
    let ops = &dcq.operands;
    match strategy {
        Strategy::Easy | Strategy::Dmcq => dmcq(ops, dbs, m),
        Strategy::Baseline => {
            let instances: Vec<Instance> = ops
                .iter()
                .zip(dbs)
                .map(|(q, d)| Instance::bind(q, d))
                .collect::<Result<_>>()?;
            baseline_chain(&instances, m)
        }
        Strategy::HeuristicBool | Strategy::HeuristicCap => {
            let mut acc = evaluate_cq(&ops[0], &dbs[0], m)?;
            for (q, d) in ops[1..].iter().zip(&dbs[1..]) {
                let inst = Instance::bind(q, d)?;
                acc = if strategy == Strategy::HeuristicBool {
                    bool_filter(&acc, &inst, m)?
                } else {
                    cap_filter(&acc, &inst, m)?
                };
            }
            Ok(acc)
        }
        Strategy::Oracle => oracle_dcq(ops, dbs),
        Strategy::Bag => Err(DcqError::ConditionsNotMet(
            "bag strategy needs counted relations".into(),
        )),
    }
}
