#![allow(dead_code)]

use dcq_core::{Atom, Attr, Database, Query, Relation, Value};
use rand::Rng;

/// Parses `"x1,x3 <- R1(x1,x2) R2(x2,x3)"`; `*` as head means full.
pub fn q(text: &str) -> Query {
    let (head, body) = text.split_once("<-").expect("head <- body");
    let body: Vec<Atom> = body
        .split(')')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (name, args) = s.split_once('(').expect("atom");
            let args: Vec<&str> = args.split(',').map(str::trim).collect();
            Atom::new(name.trim(), &args)
        })
        .collect();
    let head = head.trim();
    if head == "*" {
        Query::full(body)
    } else if head.is_empty() {
        Query {
            head: Vec::new(),
            body,
        }
    } else {
        let names: Vec<&str> = head.split(',').map(str::trim).collect();
        Query::new(&names, body)
    }
}

pub fn attrs(names: &str) -> Vec<Attr> {
    names
        .split(',')
        .map(|s| Attr::new(s.trim()))
        .filter(|a| !a.name().is_empty())
        .collect()
}

/// Random relations for every atom of the queries, `rows` tuples each at most.
pub fn random_db(queries: &[&Query], domain: i64, rows: usize, rng: &mut impl Rng) -> Database {
    let mut d = Database::new();
    for q in queries {
        for a in &q.body {
            if d.get(&a.relation).is_some() {
                continue;
            }
            let n = rng.gen_range(0..=rows);
            let tuples = (0..n).map(|_| {
                (0..a.attrs.len())
                    .map(|_| Value::Int(rng.gen_range(0..domain)))
                    .collect()
            });
            d.insert(&a.relation, Relation::from_rows(a.attrs.clone(), tuples));
        }
    }
    d
}

/// Like [`random_db`] with counts in `1..=max_count`.
pub fn random_bag_db(
    queries: &[&Query],
    domain: i64,
    rows: usize,
    max_count: u64,
    rng: &mut impl Rng,
) -> Database<u64> {
    let mut d = Database::new();
    for q in queries {
        for a in &q.body {
            if d.get(&a.relation).is_some() {
                continue;
            }
            let n = rng.gen_range(0..=rows);
            let tuples: Vec<(Vec<Value>, u64)> = (0..n)
                .map(|_| {
                    let t = (0..a.attrs.len())
                        .map(|_| Value::Int(rng.gen_range(0..domain)))
                        .collect();
                    (t, rng.gen_range(1..=max_count))
                })
                .collect();
            // Duplicate draws would add up; keep the first count instead.
            let mut seen = std::collections::HashSet::new();
            let tuples: Vec<_> = tuples
                .into_iter()
                .filter(|(t, _)| seen.insert(t.clone()))
                .collect();
            d.insert(
                &a.relation,
                Relation::from_weighted(a.attrs.clone(), tuples),
            );
        }
    }
    d
}

pub fn sorted<W: dcq_core::Semiring + Ord>(r: &Relation<W>) -> Vec<(Vec<Value>, W)> {
    let mut rows: Vec<_> = r.iter().map(|(t, w)| (t.clone(), w.clone())).collect();
    rows.sort();
    rows
}

pub fn set(r: &Relation) -> Vec<Vec<Value>> {
    let mut rows = r.rows().to_vec();
    rows.sort();
    rows
}
