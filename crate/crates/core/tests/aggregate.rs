mod common;

use std::collections::HashMap;

use common::{attrs, q, random_db};
use dcq_core::aggregate::{
    annotated_eval, drop_zero, numerical_difference_agg, relational_difference_agg,
};
use dcq_core::oracle::{oracle_cq, oracle_dcq};
use dcq_core::{
    Attr, Database, DcqError, Metrics, Pair, Query, Relation, Ring, Semiring, Tuple, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn annotate<W: Semiring>(
    d: &Database,
    rng: &mut impl Rng,
    mut draw: impl FnMut(&mut dyn rand::RngCore) -> W,
) -> Database<W> {
    let mut out = Database::new();
    for (name, rel) in d.iter() {
        let rows: Vec<(Tuple, W)> = rel.rows().iter().map(|t| (t.clone(), draw(rng))).collect();
        out.insert(name, Relation::from_weighted(rel.schema().to_vec(), rows));
    }
    out
}

fn grouped_oracle<W: Ring>(
    q1: &Query,
    q2: &Query,
    d1: &Database<W>,
    d2: &Database<W>,
    group: &[Attr],
) -> HashMap<Tuple, W> {
    let mut out: HashMap<Tuple, W> = oracle_cq(&q1.with_head(group.to_vec()), d1)
        .unwrap()
        .to_map();
    for (t, w) in oracle_cq(&q2.with_head(group.to_vec()), d2).unwrap().iter() {
        let entry = out.entry(t.clone()).or_insert_with(W::zero);
        *entry = entry.add(&w.neg());
    }
    out
}

fn relational_oracle<W: Ring>(
    q1: &Query,
    q2: &Query,
    d1: &Database<W>,
    d2: &Database<W>,
    group: &[Attr],
) -> HashMap<Tuple, W> {
    let diff = oracle_dcq(&[q1.clone(), q2.clone()], &[d1.support(), d2.support()]).unwrap();
    let w1 = oracle_cq(q1, d1).unwrap().to_map();
    let pos: Vec<usize> = group
        .iter()
        .map(|g| q1.head.iter().position(|h| h == g).unwrap())
        .collect();
    let mut out: HashMap<Tuple, W> = HashMap::new();
    for t in diff.rows() {
        let key: Tuple = pos.iter().map(|&i| t[i].clone()).collect();
        let entry = out.entry(key).or_insert_with(W::zero);
        *entry = entry.add(&w1[t]);
    }
    out
}

fn check_ring<W: Ring + std::hash::Hash>(
    draw: impl Fn(&mut dyn rand::RngCore) -> W + Copy,
    seed: u64,
) {
    let cases = [
        (
            q("* <- R1(x1,x2) R2(x2,x3)"),
            q("* <- R3(x1,x2) R4(x2,x3)"),
            attrs("x1"),
        ),
        (
            q("x1,x2 <- R1(x1,x2) R2(x2,x3)"),
            q("x1,x2 <- R3(x1,x2) R4(x2,x4)"),
            attrs("x2"),
        ),
        (
            q("* <- R1(x1,x2) R2(x1,x3)"),
            q("* <- R3(x1,x2,x3)"),
            attrs("x1,x3"),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (q1, q2, group) in &cases {
        for _ in 0..60 {
            let d1 = annotate(&random_db(&[q1], 4, 12, &mut rng), &mut rng, draw);
            let d2 = annotate(&random_db(&[q2], 4, 12, &mut rng), &mut rng, draw);
            let m = Metrics::new();
            let numerical = numerical_difference_agg(q1, q2, &d1, &d2, group, &m)
                .unwrap()
                .to_map();
            assert_eq!(numerical, grouped_oracle(q1, q2, &d1, &d2, group));
            let relational = relational_difference_agg(q1, q2, &d1, &d2, group, &m)
                .unwrap()
                .to_map();
            assert_eq!(relational, relational_oracle(q1, q2, &d1, &d2, group));
            let full = annotated_eval(q1, &d1, &m).unwrap().to_map();
            assert_eq!(full, oracle_cq(q1, &d1).unwrap().to_map());
        }
    }
}

#[test]
fn integer_ring_matches_oracle() {
    check_ring(|r| r.gen_range(-3i64..=5), 1);
}

#[test]
fn pair_ring_matches_oracle() {
    check_ring(|r| Pair(r.gen_range(-2..=4), r.gen_range(0..=3)), 2);
}

fn int(name: &str) -> Value {
    Value::from(name)
}

fn annotated(schema: &[&str], rows: &[(&[&str], i64)]) -> Relation<i64> {
    Relation::from_weighted(
        attrs(&schema.join(",")),
        rows.iter()
            .map(|(t, w)| (t.iter().map(|v| int(v)).collect(), *w)),
    )
}

#[test]
fn grouped_difference_two_readings() {
    let q1 = q("* <- R1(x1,x2) R2(x2,x3)");
    let q2 = q("* <- R3(x1,x2) R4(x2,x3)");
    let d1 = Database::new()
        .with(
            "R1",
            annotated(
                &["x1", "x2"],
                &[(&["a1", "b1"], 1), (&["a2", "b2"], 1), (&["a2", "b3"], 1)],
            ),
        )
        .with(
            "R2",
            annotated(
                &["x2", "x3"],
                &[(&["b1", "c1"], 1), (&["b2", "c2"], 1), (&["b3", "c3"], 2)],
            ),
        );
    let d2 = Database::new()
        .with(
            "R3",
            annotated(&["x1", "x2"], &[(&["a2", "b3"], 1), (&["a3", "b4"], 1)]),
        )
        .with(
            "R4",
            annotated(&["x2", "x3"], &[(&["b3", "c3"], 1), (&["b4", "c4"], 2)]),
        );
    let m = Metrics::new();
    let group = attrs("x1");
    let mut relational: Vec<_> = relational_difference_agg(&q1, &q2, &d1, &d2, &group, &m)
        .unwrap()
        .iter()
        .map(|(t, w)| (t.clone(), *w))
        .collect();
    relational.sort();
    assert_eq!(relational, vec![(vec![int("a1")], 1), (vec![int("a2")], 1)]);
    let mut numerical: Vec<_> = numerical_difference_agg(&q1, &q2, &d1, &d2, &group, &m)
        .unwrap()
        .iter()
        .map(|(t, w)| (t.clone(), *w))
        .collect();
    numerical.sort();
    assert_eq!(
        numerical,
        vec![
            (vec![int("a1")], 1),
            (vec![int("a2")], 2),
            (vec![int("a3")], -2)
        ]
    );
}

#[test]
fn zero_groups_are_kept_until_dropped() {
    let q1 = q("* <- R1(x1,x2)");
    let q2 = q("* <- R2(x1,x2)");
    let rel = annotated(&["x1", "x2"], &[(&["a", "b"], 2)]);
    let d1 = Database::new().with("R1", rel.clone());
    let d2 = Database::new().with("R2", rel);
    let out = numerical_difference_agg(&q1, &q2, &d1, &d2, &attrs("x1"), &Metrics::new()).unwrap();
    assert_eq!(out.len(), 1);
    assert!(drop_zero(&out).is_empty());
}

#[test]
fn errors() {
    let d = Database::<i64>::new();
    let m = Metrics::new();
    let q1 = q("* <- R1(x1,x2) R2(x2,x3)");
    let q2 = q("* <- R3(x1,x2) R4(x2,x3)");
    assert!(matches!(
        numerical_difference_agg(&q1, &q2, &d, &d, &attrs("x1,x3"), &m),
        Err(DcqError::NotFreeConnexOnAggHead)
    ));
    assert!(matches!(
        relational_difference_agg(&q1, &q2, &d, &d, &attrs("x9"), &m),
        Err(DcqError::HeadMismatch(_))
    ));
    let path = Database::new()
        .with("R1", annotated(&["x1", "x2"], &[]))
        .with("R2", annotated(&["x2", "x3"], &[]));
    assert!(matches!(
        annotated_eval(&q("x1,x3 <- R1(x1,x2) R2(x2,x3)"), &path, &m),
        Err(DcqError::NotFreeConnex)
    ));
}
