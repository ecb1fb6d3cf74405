mod common;

use std::collections::BTreeSet;

use common::q;
use dcq_core::hypergraph::{anonymous_edges, build_join_tree, sets_acyclic, JoinTree};
use dcq_core::{classify, is_difference_linear, Attr, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Running intersection on an explicit tree: every attribute's edges are connected.
fn has_running_intersection(sets: &[BTreeSet<Attr>], tree: &[(usize, usize)]) -> bool {
    let universe: BTreeSet<&Attr> = sets.iter().flatten().collect();
    universe.into_iter().all(|x| {
        let holders: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].contains(x)).collect();
        let mut reached = vec![holders[0]];
        let mut i = 0;
        while i < reached.len() {
            let u = reached[i];
            for &(a, b) in tree {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if sets[v].contains(x) && !reached.contains(&v) {
                    reached.push(v);
                }
            }
            i += 1;
        }
        reached.len() == holders.len()
    })
}

/// Decodes a Prüfer sequence into the edges of a labeled tree.
fn prufer_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Acyclic iff some labeled tree over the edges has the running intersection property.
fn brute_acyclic(sets: &[BTreeSet<Attr>]) -> bool {
    let n = sets.len();
    if n <= 1 {
        return true;
    }
    if n == 2 {
        return true;
    }
    let mut seq = vec![0usize; n - 2];
    loop {
        if has_running_intersection(sets, &prufer_tree(&seq, n)) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == seq.len() {
                return false;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

fn random_sets(rng: &mut impl Rng) -> Vec<BTreeSet<Attr>> {
    let edges = rng.gen_range(2..=6);
    let width = rng.gen_range(3..=6);
    (0..edges)
        .map(|_| {
            let size = if rng.gen_bool(0.7) {
                2
            } else {
                rng.gen_range(1..=3)
            };
            (0..size)
                .map(|_| Attr::new(&format!("x{}", rng.gen_range(0..width))))
                .collect()
        })
        .collect()
}

fn tree_edges(tree: &JoinTree) -> Vec<(usize, usize)> {
    tree.nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.parent.map(|p| (i, p)))
        .collect()
}

#[test]
fn acyclicity_matches_join_tree_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut acyclic = 0;
    for _ in 0..10_000 {
        let sets = random_sets(&mut rng);
        let expected = brute_acyclic(&sets);
        assert_eq!(sets_acyclic(&sets), expected, "{sets:?}");
        if expected {
            acyclic += 1;
            let tree = JoinTree::from_edges(&anonymous_edges(&sets), None).unwrap();
            assert_eq!(tree.len(), sets.len());
            assert_eq!(tree_edges(&tree).len(), sets.len() - 1);
            assert!(tree.is_connected());
            assert!(has_running_intersection(&sets, &tree_edges(&tree)));
        }
    }
    assert!(
        acyclic > 1000 && acyclic < 9000,
        "only {acyclic} of 10000 acyclic"
    );
}

#[test]
fn classes_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..3000 {
        let sets = random_sets(&mut rng);
        let body: Vec<String> = sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                format!(
                    "R{i}({})",
                    s.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
                )
            })
            .collect();
        let universe: Vec<Attr> = sets
            .iter()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let head: Vec<&str> = universe
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|a| a.name())
            .collect();
        let query = q(&format!("{} <- {}", head.join(","), body.join(" ")));
        let mut with_head = sets.clone();
        with_head.push(head.iter().map(|h| Attr::new(h)).collect());
        let c = classify(&query);
        assert_eq!(c.acyclic, brute_acyclic(&sets));
        assert_eq!(c.linear_reducible, brute_acyclic(&with_head));
        assert_eq!(c.free_connex, c.acyclic && c.linear_reducible);
        assert_eq!(c.full, head.len() == universe.len());
        if c.acyclic {
            let tree = build_join_tree(&query, false).unwrap();
            assert!(tree.is_connected());
        }
        if c.linear_reducible {
            let tree = build_join_tree(&query, true).unwrap();
            assert!(tree.nodes[tree.root].is_head);
            assert!(tree.is_connected());
        }
    }
}

#[test]
fn difference_linear_golden_table() {
    let table: &[(&str, &str, &str, bool)] = &[
        (
            "3.1",
            "* <- R1(x1,x2) R2(x2,x3)",
            "* <- R3(x1,x2) R4(x2,x3)",
            true,
        ),
        (
            "3.4",
            "* <- R1(x1,x2) R2(x2,x3,x4)",
            "* <- R3(x1,x2,x3) R4(x3,x4)",
            true,
        ),
        (
            "3.7",
            "* <- R1(x1,x2,x3)",
            "* <- R2(x1,x2) R3(x2,x3) R4(x1,x3)",
            true,
        ),
        (
            "3.8",
            "* <- R1(x1,x2) R2(x3,x4)",
            "* <- R3(x1,x2) R4(x2,x3) R5(x1,x3) R6(x3,x4)",
            true,
        ),
        (
            "3.9",
            "* <- A(x1,x2) B(x1,x3) C(x1,x4)",
            "* <- D(x1,x2,x3) E(x1,x2,x4) F(x1,x3,x4)",
            true,
        ),
        (
            "qg3",
            "* <- T(n1,n2,n3)",
            "* <- G1(n1,n2) G2(n2,n3) G3(n3,n1)",
            true,
        ),
        (
            "qg4",
            "* <- T(n1,n2,n3)",
            "n1,n2,n3 <- G1(n1,n2) G2(n2,n3) G3(n3,n4)",
            true,
        ),
        (
            "4.2",
            "x1,x3 <- R1(x1,x3)",
            "x1,x3 <- R3(x1,x2) R4(x2,x3)",
            false,
        ),
        (
            "4.3",
            "x1 <- R1(x1)",
            "x1 <- R2(x1,x2) R3(x2,x3) R4(x1,x3)",
            false,
        ),
        (
            "4.5a",
            "* <- R1(x1,x2) R2(x2,x3)",
            "* <- R3(x1,x3) R4(x2)",
            false,
        ),
        (
            "4.5b",
            "* <- R1(x1,x2) R2(x2,x3)",
            "* <- R3(x1,x3) R4(x2,x3)",
            false,
        ),
        (
            "4.5c",
            "* <- R1(x1,x2) R2(x2,x3)",
            "* <- R3(x1,x3) R5(x1,x2)",
            false,
        ),
        (
            "4.5d",
            "* <- R1(x1,x2) R2(x2,x3)",
            "* <- R3(x1,x3) R4(x2,x3) R5(x1,x2)",
            false,
        ),
        (
            "4.8",
            "x1,x2,x3 <- R1(x1,x4) R2(x4,x2,x3)",
            "x1,x2,x3 <- R3(x1,x2) R4(x2,x3) R5(x1,x3) R6(x3,x4)",
            false,
        ),
        (
            "4.11",
            "x1,x3 <- R1(x1,x2) R2(x2,x3)",
            "x1,x3 <- R3(x1,x2) R4(x2,x3)",
            false,
        ),
        (
            "qg5",
            "* <- G1(n1,n2) G2(n2,n3) G3(n3,n4)",
            "n1,n2,n3,n4 <- G4(n2,n3) G5(n3,n4) G6(n4,n1)",
            false,
        ),
    ];
    for (label, q1, q2, expected) in table {
        let verdict = is_difference_linear(&q(q1), &q(q2)).unwrap();
        assert_eq!(verdict.holds, *expected, "{label}");
        assert_eq!(verdict.witness.is_none(), *expected, "{label}");
    }
    let witness = |a: &str, b: &str| is_difference_linear(&q(a), &q(b)).unwrap().witness.unwrap();
    assert_eq!(
        witness("x1,x3 <- R1(x1,x3)", "x1,x3 <- R3(x1,x2) R4(x2,x3)"),
        Witness::SecondNotLinearReducible
    );
    assert_eq!(
        witness("x1,x3 <- R1(x1,x2) R2(x2,x3)", "x1,x3 <- R3(x1,x3)"),
        Witness::FirstNotFreeConnex
    );
    let cyclic = witness("* <- R1(x1,x2) R2(x2,x3)", "* <- R3(x1,x3) R4(x2)");
    assert_eq!(
        cyclic,
        Witness::CyclicWith([Attr::new("x1"), Attr::new("x3")].into())
    );
    assert_eq!(
        cyclic.to_string(),
        "edge {x1,x3} makes the first operand cyclic"
    );
    assert!(is_difference_linear(&q("x1 <- R1(x1,x2)"), &q("x2 <- R2(x2)")).is_err());
}
