use std::collections::{HashMap, HashSet};

use dcq_cli::csv_io::to_csv_string;
use dcq_cli::dsl::parse_program;
use dcq_cli::error::GenError;
use dcq_cli::gen::{gen_cliques, gen_graph, gen_triples, graph_schema, random_database, RuleMix};
use dcq_core::{Relation, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn edges(g: &Relation) -> HashSet<(Value, Value)> {
    g.rows()
        .iter()
        .map(|t| (t[0].clone(), t[1].clone()))
        .collect()
}

fn two_hops(g: &Relation) -> HashSet<(Value, Value)> {
    let mut out: HashMap<Value, Vec<Value>> = HashMap::new();
    for (a, b) in edges(g) {
        out.entry(a).or_default().push(b);
    }
    let mut hops = HashSet::new();
    for (a, mids) in &out {
        for m in mids {
            for c in out.get(m).into_iter().flatten() {
                hops.insert((a.clone(), c.clone()));
            }
        }
    }
    hops
}

#[test]
fn graphs_are_simple() {
    let g = gen_graph(50, 300, 1);
    assert_eq!(g.len(), 300);
    assert_eq!(edges(&g).len(), 300);
    assert!(g.rows().iter().all(|t| t[0] != t[1]));
    // Saturates at the complete graph.
    assert_eq!(gen_graph(4, 100, 1).len(), 12);
}

#[test]
fn cliques_have_the_requested_edge_count() {
    let g = gen_cliques(120, 4);
    assert_eq!(g.len(), 120);
    let e = edges(&g);
    for (a, b) in &e {
        let triangles = e
            .iter()
            .filter(|(x, _)| x == b)
            .filter(|(_, c)| e.contains(&(c.clone(), a.clone())))
            .count();
        assert_eq!(triangles, 2);
    }
}

#[test]
fn every_rule_follows_the_graph() {
    let g = gen_graph(60, 400, 3);
    let e = edges(&g);
    let hops = two_hops(&g);
    let path2 = gen_triples(&g, 500, RuleMix::new(1.0, 0.0, 0.0).unwrap(), 9).unwrap();
    assert!(!path2.is_empty());
    for t in path2.rows() {
        assert!(
            e.contains(&(t[0].clone(), t[1].clone())) && e.contains(&(t[1].clone(), t[2].clone())),
            "{t:?}"
        );
    }
    let edge_vertex = gen_triples(&g, 500, RuleMix::new(0.0, 1.0, 0.0).unwrap(), 9).unwrap();
    for t in edge_vertex.rows() {
        assert!(e.contains(&(t[0].clone(), t[1].clone())), "{t:?}");
    }
    let path4 = gen_triples(&g, 500, RuleMix::new(0.0, 0.0, 1.0).unwrap(), 9).unwrap();
    for t in path4.rows() {
        assert!(
            hops.contains(&(t[0].clone(), t[1].clone()))
                && hops.contains(&(t[1].clone(), t[2].clone())),
            "{t:?}"
        );
    }
}

#[test]
fn triples_are_deterministic() {
    let g = gen_graph(100, 500, 5);
    let mix = RuleMix::new(0.4, 0.4, 0.2).unwrap();
    let a = to_csv_string(&gen_triples(&g, 1000, mix, 11).unwrap());
    let b = to_csv_string(&gen_triples(&g, 1000, mix, 11).unwrap());
    let c = to_csv_string(&gen_triples(&g, 1000, mix, 12).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(to_csv_string(&gen_graph(100, 500, 5)), to_csv_string(&g));
}

#[test]
fn degenerate_inputs() {
    let empty = Relation::empty(graph_schema());
    let mix = RuleMix::new(0.5, 0.5, 0.0).unwrap();
    assert_eq!(gen_triples(&empty, 10, mix, 0), Err(GenError::EmptyGraph));
    assert!(gen_triples(&empty, 0, mix, 0).unwrap().is_empty());
    assert!(gen_triples(&gen_graph(10, 20, 0), 0, mix, 0)
        .unwrap()
        .is_empty());
    assert!(matches!(
        RuleMix::new(0.5, 0.6, 0.0),
        Err(GenError::InvalidMix(_))
    ));
    assert!(matches!(
        RuleMix::new(-0.5, 1.5, 0.0),
        Err(GenError::InvalidMix(_))
    ));
    // A graph without any path of length 2.
    let single = Relation::from_ints(&["src", "dst"], &[&[1, 2]]);
    assert_eq!(
        gen_triples(&single, 3, RuleMix::new(1.0, 0.0, 0.0).unwrap(), 0),
        Err(GenError::NoPath(2))
    );
}

#[test]
fn random_tables_respect_the_program() {
    let p = parse_program("rel A(x, y) from t\nrel B(x, y) from t\nrel C(z)\n").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let db = random_database(&p, true, 5, 30, &mut rng, |_| ());
    assert!(std::sync::Arc::ptr_eq(
        db.get("A").unwrap(),
        db.get("B").unwrap()
    ));
    assert_eq!(db.get("C").unwrap().arity(), 1);
    for t in db.get("A").unwrap().rows() {
        assert!(t
            .iter()
            .all(|v| matches!(v, Value::Int(i) if (0..5).contains(i))));
    }
    let unshared = random_database(&p, false, 5, 30, &mut ChaCha8Rng::seed_from_u64(0), |_| ());
    assert!(!std::sync::Arc::ptr_eq(
        unshared.get("A").unwrap(),
        unshared.get("B").unwrap()
    ));
}
