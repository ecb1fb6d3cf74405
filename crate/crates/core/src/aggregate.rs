//! Group-by aggregation over annotated relations, for both readings of a
//! difference: aggregate the tuples of `Q1 - Q2`, or subtract the aggregates.

use std::collections::{BTreeSet, HashMap};

use crate::engine::{execute, plan};
use crate::error::{DcqError, Result};
use crate::hypergraph::is_free_connex;
use crate::metrics::Metrics;
use crate::ring::{Ring, Semiring};
use crate::schema::{pick, positions, Attr, Database, Dcq, Query, Relation, Tuple};
use crate::yannakakis::yannakakis;

/// Evaluates a free-connex query: joins multiply annotations and the
/// projection onto the head adds them.
pub fn annotated_eval<W: Semiring>(q: &Query, d: &Database<W>, m: &Metrics) -> Result<Relation<W>> {
    yannakakis(q, d, m)
}

fn check_group(q: &Query, group: &[Attr]) -> Result<()> {
    let head = q.head_set();
    match group.iter().find(|a| !head.contains(*a)) {
        Some(a) => Err(DcqError::HeadMismatch(format!(
            "group attribute {a} is not in the head"
        ))),
        None => Ok(()),
    }
}

/// Sums the annotations of `Q1 - Q2` per group: the set difference is
/// computed first and each surviving tuple carries its annotation from `Q1`.
pub fn relational_difference_agg<W: Semiring>(
    q1: &Query,
    q2: &Query,
    d1: &Database<W>,
    d2: &Database<W>,
    group: &[Attr],
    m: &Metrics,
) -> Result<Relation<W>> {
    check_group(q1, group)?;
    let dcq = Dcq::pair(q1.clone(), q2.clone());
    let supports = [d1.support(), d2.support()];
    let chosen = plan(&dcq, &supports)?;
    let difference = execute(&dcq, &supports, chosen.strategy, m)?;
    let annotated = annotated_eval(q1, d1, m)?.to_map();
    let pos = positions(&q1.head, group)?;
    let mut sums: HashMap<Tuple, W> = HashMap::new();
    let mut order: Vec<Tuple> = Vec::new();
    for t in difference.rows() {
        let w = annotated.get(t).cloned().unwrap_or_else(W::zero);
        let key = pick(t, &pos);
        match sums.get_mut(&key) {
            Some(acc) => *acc = acc.add(&w),
            None => {
                order.push(key.clone());
                sums.insert(key, w);
            }
        }
    }
    m.scanned(difference.len());
    Ok(Relation::from_weighted(
        group.to_vec(),
        order.into_iter().map(|k| {
            let w = sums.remove(&k).expect("grouped");
            (k, w)
        }),
    ))
}

/// Per group, the aggregate of `Q1` minus the aggregate of `Q2`. Groups in
/// either result are kept, including those whose annotation cancels to zero.
pub fn numerical_difference_agg<W: Ring>(
    q1: &Query,
    q2: &Query,
    d1: &Database<W>,
    d2: &Database<W>,
    group: &[Attr],
    m: &Metrics,
) -> Result<Relation<W>> {
    check_group(q1, group)?;
    let (g1, g2) = (q1.with_head(group.to_vec()), q2.with_head(group.to_vec()));
    if !is_free_connex(&g1) || !is_free_connex(&g2) {
        return Err(DcqError::NotFreeConnexOnAggHead);
    }
    let left = annotated_eval(&g1, d1, m)?;
    let right = annotated_eval(&g2, d2, m)?;
    let right_map = right.to_map();
    let left_keys: BTreeSet<&Tuple> = left.rows().iter().collect();
    let mut rows: Vec<(Tuple, W)> = left
        .iter()
        .map(|(t, w)| {
            (
                t.clone(),
                w.add(&right_map.get(t).map_or_else(W::zero, |v| v.neg())),
            )
        })
        .collect();
    rows.extend(
        right
            .iter()
            .filter(|(t, _)| !left_keys.contains(t))
            .map(|(t, w)| (t.clone(), w.neg())),
    );
    m.scanned(left.len() + right.len());
    Ok(Relation::from_weighted(group.to_vec(), rows))
}

/// Drops groups whose annotation is zero.
pub fn drop_zero<W: Semiring>(r: &Relation<W>) -> Relation<W> {
    r.filter(|_, w| *w != W::zero())
}
