//! Synthetic data: random graphs, clique graphs, candidate triples and
//! random instances for a program's schemas.

use std::collections::{BTreeSet, HashMap, HashSet};

use dcq_core::{attrs, Database, Relation, Semiring, Tuple, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::Program;
use crate::error::GenError;

const MAX_ATTEMPTS: usize = 1000;

pub fn graph_schema() -> Vec<dcq_core::Attr> {
    attrs(&["src", "dst"])
}

pub fn triple_schema() -> Vec<dcq_core::Attr> {
    attrs(&["node1", "node2", "node3"])
}

/// `edges` distinct directed edges without self-loops over `nodes` vertices.
pub fn gen_graph(nodes: usize, edges: usize, seed: u64) -> Relation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = edges.min(nodes * nodes.saturating_sub(1));
    let mut seen: HashSet<(i64, i64)> = HashSet::with_capacity(target);
    let mut rows = Vec::with_capacity(target);
    while rows.len() < target {
        let a = rng.gen_range(0..nodes as i64);
        let b = rng.gen_range(0..nodes as i64);
        if a != b && seen.insert((a, b)) {
            rows.push(vec![Value::Int(a), Value::Int(b)]);
        }
    }
    Relation::from_rows(graph_schema(), rows)
}

/// Disjoint cliques of `size` vertices with edges in both directions, enough
/// of them to reach at least `edges` edges. Every edge lies on `size - 2`
/// directed triangles.
pub fn gen_cliques(edges: usize, size: usize) -> Relation {
    let per = size * (size - 1);
    let cliques = edges.div_ceil(per.max(1));
    let mut rows = Vec::with_capacity(cliques * per);
    for c in 0..cliques {
        let base = (c * size) as i64;
        for i in 0..size as i64 {
            for j in 0..size as i64 {
                if i != j {
                    rows.push(vec![Value::Int(base + i), Value::Int(base + j)]);
                }
            }
        }
    }
    Relation::from_rows(graph_schema(), rows)
}

/// Share of triples drawn by each rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleMix {
    /// A length-2 path.
    pub path2: f64,
    /// An edge plus a random vertex.
    pub edge_vertex: f64,
    /// Nodes 1, 3 and 5 of a length-4 path.
    pub path4: f64,
}

impl RuleMix {
    pub fn new(path2: f64, edge_vertex: f64, path4: f64) -> Result<Self, GenError> {
        let ok = [path2, edge_vertex, path4].iter().all(|p| *p >= 0.0)
            && (path2 + edge_vertex + path4 - 1.0).abs() < 1e-9;
        if ok {
            Ok(RuleMix {
                path2,
                edge_vertex,
                path4,
            })
        } else {
            Err(GenError::InvalidMix((path2, edge_vertex, path4)))
        }
    }
}

struct Adjacency {
    edges: Vec<(Value, Value)>,
    out: HashMap<Value, Vec<Value>>,
    vertices: Vec<Value>,
}

impl Adjacency {
    fn new(graph: &Relation) -> Self {
        let edges: Vec<(Value, Value)> = graph
            .rows()
            .iter()
            .map(|t| (t[0].clone(), t[1].clone()))
            .collect();
        let mut out: HashMap<Value, Vec<Value>> = HashMap::new();
        let mut vertices = BTreeSet::new();
        for (a, b) in &edges {
            out.entry(a.clone()).or_default().push(b.clone());
            vertices.insert(a.clone());
            vertices.insert(b.clone());
        }
        Adjacency {
            edges,
            out,
            vertices: vertices.into_iter().collect(),
        }
    }

    /// A random walk of `len` edges, retried until one completes.
    fn path(&self, len: usize, rng: &mut impl Rng) -> Result<Vec<Value>, GenError> {
        'attempt: for _ in 0..MAX_ATTEMPTS {
            let (a, b) = self.edges.choose(rng).expect("nonempty graph");
            let mut walk = vec![a.clone(), b.clone()];
            while walk.len() <= len {
                match self
                    .out
                    .get(walk.last().expect("nonempty walk"))
                    .and_then(|n| n.choose(rng))
                {
                    Some(next) => walk.push(next.clone()),
                    None => continue 'attempt,
                }
            }
            return Ok(walk);
        }
        Err(GenError::NoPath(len))
    }
}

/// `m` candidate triples `Triple(node1, node2, node3)` drawn from `graph`.
/// Duplicate draws collapse, so the relation may hold fewer than `m` tuples.
pub fn gen_triples(
    graph: &Relation,
    m: usize,
    mix: RuleMix,
    seed: u64,
) -> Result<Relation, GenError> {
    if m == 0 {
        return Ok(Relation::empty(triple_schema()));
    }
    if graph.is_empty() {
        return Err(GenError::EmptyGraph);
    }
    let adj = Adjacency::new(graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Tuple> = Vec::with_capacity(m);
    for _ in 0..m {
        let roll: f64 = rng.gen();
        let t = if roll < mix.path2 {
            adj.path(2, &mut rng)?
        } else if roll < mix.path2 + mix.edge_vertex {
            let (a, b) = adj.edges.choose(&mut rng).expect("nonempty graph");
            vec![
                a.clone(),
                b.clone(),
                adj.vertices
                    .choose(&mut rng)
                    .expect("nonempty graph")
                    .clone(),
            ]
        } else {
            let p = adj.path(4, &mut rng)?;
            vec![p[0].clone(), p[2].clone(), p[4].clone()]
        };
        rows.push(t);
    }
    Ok(Relation::from_rows(triple_schema(), rows))
}

/// Random tables for every relation of `program`: up to `max_rows` draws each
/// from `0..domain`, weighted by `weight`. With `share_sources`, relations
/// read from a common source table get the same data.
pub fn random_database<W: Semiring, R: Rng>(
    program: &Program,
    share_sources: bool,
    domain: i64,
    max_rows: usize,
    rng: &mut R,
    mut weight: impl FnMut(&mut R) -> W,
) -> Database<W> {
    let mut by_source: HashMap<String, std::sync::Arc<Relation<W>>> = HashMap::new();
    let mut db = Database::new();
    for decl in &program.relations {
        let rel = by_source
            .entry(
                if share_sources {
                    decl.source()
                } else {
                    &decl.name
                }
                .to_string(),
            )
            .or_insert_with(|| {
                let n = rng.gen_range(0..=max_rows);
                let mut seen = HashSet::new();
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    let t: Tuple = (0..decl.columns.len())
                        .map(|_| Value::Int(rng.gen_range(0..domain)))
                        .collect();
                    if seen.insert(t.clone()) {
                        let w = weight(rng);
                        rows.push((t, w));
                    }
                }
                let schema = decl
                    .columns
                    .iter()
                    .map(|c| dcq_core::Attr::new(c))
                    .collect();
                std::sync::Arc::new(Relation::from_weighted(schema, rows))
            })
            .clone();
        db.insert_shared(&decl.name, rel);
    }
    db
}
