//! Brute-force evaluators used as ground truth. They share no join code with
//! the engines: every combination of tuples is tried in nested loops.

use std::collections::{BTreeMap, HashMap};

use crate::error::{DcqError, Result};
use crate::ring::Semiring;
use crate::schema::{Attr, Database, Query, Relation, Tuple, Value};

/// Default cap on the number of (partial) tuple combinations visited.
pub const ORACLE_BUDGET: u64 = 10_000_000;

struct Search<'a, W> {
    atoms: Vec<(&'a [Attr], &'a Relation<W>)>,
    budget: u64,
    visited: u64,
}

impl<'a, W: Semiring> Search<'a, W> {
    fn run(
        &mut self,
        depth: usize,
        binding: &mut BTreeMap<Attr, Value>,
        weight: W,
        emit: &mut dyn FnMut(&BTreeMap<Attr, Value>, W),
    ) -> Result<()> {
        if depth == self.atoms.len() {
            emit(binding, weight);
            return Ok(());
        }
        let (attrs, rel) = self.atoms[depth];
        for (t, w) in rel.iter() {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(DcqError::BudgetExceeded(self.budget));
            }
            let consistent = attrs
                .iter()
                .zip(t)
                .all(|(a, v)| binding.get(a).is_none_or(|b| b == v));
            if !consistent {
                continue;
            }
            let added: Vec<Attr> = attrs
                .iter()
                .filter(|a| !binding.contains_key(*a))
                .cloned()
                .collect();
            for (a, v) in attrs.iter().zip(t) {
                binding.entry(a.clone()).or_insert_with(|| v.clone());
            }
            self.run(depth + 1, binding, weight.mul(w), emit)?;
            for a in added {
                binding.remove(&a);
            }
        }
        Ok(())
    }
}

fn search<W: Semiring>(
    q: &Query,
    d: &Database<W>,
    budget: u64,
    emit: &mut dyn FnMut(&BTreeMap<Attr, Value>, W),
) -> Result<()> {
    let universe = q.universe();
    if let Some(a) = q.head.iter().find(|a| !universe.contains(*a)) {
        return Err(DcqError::HeadNotInBody(a.to_string()));
    }
    let mut atoms = Vec::new();
    for a in &q.body {
        let rel = d
            .get(&a.relation)
            .ok_or_else(|| DcqError::UnresolvedRelation(a.relation.clone()))?;
        if rel.arity() != a.attrs.len() {
            return Err(DcqError::ArityMismatch {
                relation: a.relation.clone(),
                expected: a.attrs.len(),
                found: rel.arity(),
            });
        }
        atoms.push((a.attrs.as_slice(), rel.as_ref()));
    }
    Search {
        atoms,
        budget,
        visited: 0,
    }
    .run(0, &mut BTreeMap::new(), W::one(), emit)
}

/// `q(d)` with budget: each head tuple carries the sum over its combinations
/// of the product of tuple weights.
pub fn oracle_cq_with_budget<W: Semiring>(
    q: &Query,
    d: &Database<W>,
    budget: u64,
) -> Result<Relation<W>> {
    let mut out: HashMap<Tuple, W> = HashMap::new();
    let mut order: Vec<Tuple> = Vec::new();
    search(q, d, budget, &mut |binding, w| {
        let t: Tuple = q.head.iter().map(|a| binding[a].clone()).collect();
        match out.get_mut(&t) {
            Some(acc) => *acc = acc.add(&w),
            None => {
                order.push(t.clone());
                out.insert(t, w);
            }
        }
    })?;
    let rows = order.into_iter().map(|t| {
        let w = out.remove(&t).expect("recorded");
        (t, w)
    });
    Ok(Relation::from_weighted(q.head.clone(), rows))
}

pub fn oracle_cq<W: Semiring>(q: &Query, d: &Database<W>) -> Result<Relation<W>> {
    oracle_cq_with_budget(q, d, ORACLE_BUDGET)
}

fn aligned(q: &Query, head: &[Attr]) -> Query {
    q.with_head(head.to_vec())
}

/// `((Q1 - Q2) - ...)` under set semantics.
pub fn oracle_dcq<W: Semiring>(queries: &[Query], dbs: &[Database<W>]) -> Result<Relation> {
    if queries.len() < 2 || queries.len() != dbs.len() {
        return Err(DcqError::TooFewOperands);
    }
    let head = queries[0].head.clone();
    let mut acc = oracle_cq(&queries[0], &dbs[0])?.support().to_set();
    for (q, d) in queries[1..].iter().zip(&dbs[1..]) {
        let right = oracle_cq(&aligned(q, &head), d)?;
        for t in right.rows() {
            acc.remove(t);
        }
    }
    let mut rows: Vec<Tuple> = acc.into_iter().collect();
    rows.sort();
    Ok(Relation::from_rows(head, rows))
}

/// Multiset difference: each tuple keeps `max(0, w1 - w2 - ...)` copies.
pub fn oracle_dcq_bag(queries: &[Query], dbs: &[Database<u64>]) -> Result<Relation<u64>> {
    if queries.len() < 2 || queries.len() != dbs.len() {
        return Err(DcqError::TooFewOperands);
    }
    let head = queries[0].head.clone();
    let mut acc = oracle_cq(&queries[0], &dbs[0])?.to_map();
    for (q, d) in queries[1..].iter().zip(&dbs[1..]) {
        let right = oracle_cq(&aligned(q, &head), d)?.to_map();
        for (t, w) in acc.iter_mut() {
            *w = w.saturating_sub(right.get(t).copied().unwrap_or(0));
        }
    }
    let mut rows: Vec<(Tuple, u64)> = acc.into_iter().filter(|(_, w)| *w > 0).collect();
    rows.sort();
    Ok(Relation::from_weighted(head, rows))
}

/// Signed query by brute force: positive atoms are joined, attributes only
/// in negated atoms range over `domains`, and a binding survives when no
/// negated atom contains it.
pub fn oracle_scq(
    head: &[Attr],
    positive: &Query,
    negated: &[(Vec<Attr>, &Relation)],
    domains: &BTreeMap<Attr, Vec<Value>>,
    d: &Database,
) -> Result<Relation> {
    let mut matches: Vec<BTreeMap<Attr, Value>> = Vec::new();
    search(positive, d, ORACLE_BUDGET, &mut |b, ()| {
        matches.push(b.clone())
    })?;
    let mut extra: Vec<Attr> = Vec::new();
    for (attrs, _) in negated {
        for a in attrs {
            if !positive.universe().contains(a) && !extra.contains(a) {
                extra.push(a.clone());
            }
        }
    }
    for a in &extra {
        let values = domains
            .get(a)
            .ok_or_else(|| DcqError::MissingDomain(a.to_string()))?;
        matches = matches
            .into_iter()
            .flat_map(|b| {
                values.iter().map(move |v| {
                    let mut b = b.clone();
                    b.insert(a.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    let mut rows: Vec<Tuple> = Vec::new();
    for b in matches {
        let blocked = negated.iter().any(|(attrs, rel)| {
            let t: Tuple = attrs.iter().map(|a| b[a].clone()).collect();
            rel.rows().contains(&t)
        });
        if !blocked {
            let t: Tuple = head.iter().map(|a| b[a].clone()).collect();
            if !rows.contains(&t) {
                rows.push(t);
            }
        }
    }
    rows.sort();
    Ok(Relation::from_rows(head.to_vec(), rows))
}
