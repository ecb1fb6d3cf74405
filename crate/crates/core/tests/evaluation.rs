mod common;

use common::{q, random_bag_db, random_db, set, sorted};
use dcq_core::ring::check_ring_laws;
use dcq_core::{
    evaluate_generic, oracle_cq, reduce, schema_reduce, yannakakis, yannakakis_project, Attr,
    DcqError, Metrics, Pair, Query,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn free_connex_queries() -> Vec<Query> {
    [
        "* <- R1(x1,x2) R2(x2,x3)",
        "x1,x2 <- R1(x1,x2) R2(x2,x3)",
        "x2 <- R1(x1,x2) R2(x2,x3) R3(x2,x4)",
        "x1,x2,x3 <- R1(x1,x2,x3) R2(x3,x4) R3(x4,x5)",
        "x1,x2,x3 <- R1(x1,x2) R2(x2,x3) R3(x3,x4) R4(x1,x5)",
        " <- R1(x1,x2) R2(x2,x3)",
        "* <- R1(x1,x2) R2(x3,x4)",
    ]
    .iter()
    .map(|t| q(t))
    .collect()
}

#[test]
fn yannakakis_matches_oracle_with_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for query in free_connex_queries() {
        for _ in 0..60 {
            let d = random_bag_db(&[&query], 4, 12, 3, &mut rng);
            let m = Metrics::new();
            let got = yannakakis(&query, &d, &m).unwrap();
            assert_eq!(
                sorted(&got),
                sorted(&oracle_cq(&query, &d).unwrap()),
                "{query}"
            );
            let c = m.snapshot();
            assert_eq!(c.bound_violations, 0);
            assert!(c.scanned >= d.size_for(&query) as u64 || d.size_for(&query) == 0);
        }
    }
}

#[test]
fn projection_onto_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let query = q("* <- R1(x1,x2) R2(x2,x3) R3(x3,x4)");
    let target = vec![Attr::new("x2"), Attr::new("x3")];
    for _ in 0..50 {
        let d = random_db(&[&query], 4, 10, &mut rng);
        let got = yannakakis_project(&query, &target, &d, &Metrics::new()).unwrap();
        let expected = oracle_cq(&query.with_head(target.clone()), &d).unwrap();
        assert_eq!(set(&got), set(&expected));
    }
    let not_connex = [Attr::new("x1"), Attr::new("x3")];
    let d = random_db(&[&query], 4, 10, &mut rng);
    assert!(matches!(
        yannakakis_project(&query, &not_connex, &d, &Metrics::new()),
        Err(DcqError::NotFreeConnex)
    ));
}

#[test]
fn reduced_query_is_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let queries = [
        q("x1,x2 <- R1(x1,x2) R2(x2,x3) R3(x3,x4)"),
        q("x1,x2,x3 <- R1(x1,x2) R2(x2,x3) R3(x1,x3) R4(x3,x4)"),
        q("x1,x2,x3 <- R1(x1,x2) R2(x2,x3) R3(x1,x3) R4(x3,x4)"),
        q("x1 <- R1(x1,x2) R2(x1,x3)"),
    ];
    for query in &queries {
        let edges = schema_reduce(query).unwrap_or_else(|_| panic!("{}", query.to_string()));
        assert!(edges.iter().all(|e| e.is_subset(&query.head_set())));
        for _ in 0..60 {
            let d = random_bag_db(&[query], 4, 12, 3, &mut rng);
            let reduced = reduce(query, &d, &Metrics::new()).unwrap();
            let rq = reduced.query();
            assert!(rq.is_full());
            let via_reduced = oracle_cq(&rq, &reduced.database()).unwrap();
            assert_eq!(
                sorted(&via_reduced),
                sorted(&oracle_cq(query, &d).unwrap()),
                "{query}"
            );
        }
    }
    assert!(matches!(
        schema_reduce(&q("x1,x3 <- R1(x1,x2) R2(x2,x3)")),
        Err(DcqError::NotLinearReducible)
    ));
    assert!(matches!(
        schema_reduce(&q("x1,x2 <- R1(x1,x3) R2(x2,x3) R3(x1,x4) R4(x2,x4)")),
        Err(DcqError::NotLinearReducible)
    ));
}

#[test]
fn generic_matches_oracle_on_cyclic_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let queries = [
        q("* <- R1(x1,x2) R2(x2,x3) R3(x1,x3)"),
        q("x1 <- R1(x1,x2) R2(x2,x3) R3(x1,x3)"),
        q("x1,x3 <- R1(x1,x2) R2(x2,x3)"),
        q("* <- R1(x1,x2) R2(x2,x3) R3(x3,x4) R4(x4,x1)"),
        q("x1,x2,x3 <- R1(x1,x4) R2(x4,x2,x3)"),
        q(" <- R1(x1,x2) R2(x2,x3) R3(x1,x3)"),
    ];
    for query in &queries {
        for _ in 0..60 {
            let d = random_db(&[query], 4, 14, &mut rng);
            let got = evaluate_generic(query, &d, &Metrics::new()).unwrap();
            assert_eq!(
                set(&got),
                set(&oracle_cq(query, &d).unwrap().support()),
                "{query}"
            );
        }
    }
}

#[test]
fn binding_errors() {
    let query = q("* <- R1(x1,x2)");
    let d: dcq_core::Database = dcq_core::Database::new();
    assert!(matches!(
        yannakakis(&query, &d, &Metrics::new()),
        Err(DcqError::UnresolvedRelation(_))
    ));
    let d = dcq_core::Database::new().with("R1", dcq_core::Relation::from_ints(&["a"], &[&[1]]));
    assert!(matches!(
        yannakakis(&query, &d, &Metrics::new()),
        Err(DcqError::ArityMismatch { .. })
    ));
}

proptest! {
    #[test]
    fn integer_ring_laws(a: i64, b: i64, c: i64) {
        prop_assert_eq!(check_ring_laws(&a, &b, &c), Ok(()));
    }

    #[test]
    fn pair_ring_laws(a: (i64, i64), b: (i64, i64), c: (i64, i64)) {
        let (a, b, c) = (Pair(a.0, a.1), Pair(b.0, b.1), Pair(c.0, c.1));
        prop_assert_eq!(check_ring_laws(&a, &b, &c), Ok(()));
    }
}
